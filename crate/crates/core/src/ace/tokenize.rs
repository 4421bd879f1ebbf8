/// Characters split off as tokens of their own.
const PUNCT: [char; 3] = ['.', '?', ','];

/// Splits on whitespace and separates `.`, `?` and `,` into standalone tokens.
/// The language tag is accepted for symmetry with the other operations; all
/// shipped languages share the same rules.
pub fn tokenize(_lang: &str, text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut cur = String::new();
        for ch in word.chars() {
            if PUNCT.contains(&ch) {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            } else {
                cur.push(ch);
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

pub fn detokenize(tokens: &[impl AsRef<str>]) -> String {
    tokens.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" ")
}
