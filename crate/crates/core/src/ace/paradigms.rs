//! Smart paradigms: full inflection tables from one to three word forms.

use crate::error::MorphologyError;
use crate::grammar::compile::{LexValue, Morphology};
use crate::grammar::source::LexArg;

/// Paradigm operators `mkN`, `mkPN` and `mkV2` for the shipped languages.
#[derive(Debug, Clone, Copy, Default)]
pub struct AceMorphology;

impl Morphology for AceMorphology {
    fn apply(&self, lang: &str, op: &str, args: &[LexArg]) -> Result<LexValue, MorphologyError> {
        let (forms, tags) = split_args(args)?;
        match (lang, op) {
            (_, "mkPN") => {
                arity(op, &forms, 1, 1, "1 form")?;
                no_tags(op, &tags, forms.len())?;
                Ok(rec(vec![("s", s(forms[0]))]))
            }
            ("ace", "mkN") => {
                no_tags(op, &tags, forms.len())?;
                let (sg, pl) = match forms.as_slice() {
                    [sg] => (sg.to_string(), english_plural(sg)),
                    [sg, pl] => (sg.to_string(), pl.to_string()),
                    _ => return Err(count(op, "1 or 2 forms", forms.len())),
                };
                let article = if starts_with_vowel(&sg) { "An" } else { "A" };
                Ok(rec(vec![("s", table(vec![("Sg", s(&sg)), ("Pl", s(&pl))])), ("a", p(article))]))
            }
            ("ace", "mkV2") => {
                no_tags(op, &tags, forms.len())?;
                let (inf, sg3, pp) = match forms.as_slice() {
                    [inf] => (inf.to_string(), english_plural(inf), english_participle(inf)),
                    [inf, sg3, pp] => (inf.to_string(), sg3.to_string(), pp.to_string()),
                    _ => return Err(count(op, "1 or 3 forms", forms.len())),
                };
                Ok(verb(&inf, &sg3, &pp))
            }
            ("ger", "mkN") => {
                let gender = single_tag(&tags, forms.len())?.map(german_gender).transpose()?;
                let (sg, pl) = match forms.as_slice() {
                    [sg] => (sg.to_string(), german_plural(sg)),
                    [sg, pl] => (sg.to_string(), pl.to_string()),
                    _ => return Err(count(op, "1 or 2 forms and a gender", forms.len())),
                };
                let gender = gender.unwrap_or_else(|| german_default_gender(&sg));
                Ok(german_noun(&sg, &pl, gender))
            }
            ("ger", "mkV2") => {
                no_tags(op, &tags, forms.len())?;
                let (inf, sg3, pp) = match forms.as_slice() {
                    [inf] => {
                        let stem = inf.strip_suffix("en").or_else(|| inf.strip_suffix('n')).unwrap_or(inf);
                        let t = if stem.ends_with('t') || stem.ends_with('d') { "et" } else { "t" };
                        (inf.to_string(), format!("{stem}{t}"), format!("ge{stem}{t}"))
                    }
                    [inf, sg3, pp] => (inf.to_string(), sg3.to_string(), pp.to_string()),
                    _ => return Err(count(op, "1 or 3 forms", forms.len())),
                };
                Ok(verb(&inf, &sg3, &pp))
            }
            ("spa", "mkN") => {
                let gender = single_tag(&tags, forms.len())?.map(romance_gender).transpose()?;
                let (sg, pl) = match forms.as_slice() {
                    [sg] => (sg.to_string(), spanish_plural(sg)),
                    [sg, pl] => (sg.to_string(), pl.to_string()),
                    _ => return Err(count(op, "1 or 2 forms and a gender", forms.len())),
                };
                let gender = gender.unwrap_or(if sg.ends_with('a') { "Fem" } else { "Masc" });
                Ok(rec(vec![("s", table(vec![("Sg", s(&sg)), ("Pl", s(&pl))])), ("g", p(gender))]))
            }
            ("spa", "mkV2") => {
                no_tags(op, &tags, forms.len())?;
                let (inf, sg3, pp) = match forms.as_slice() {
                    [inf] => {
                        let (stem, ending) = inf
                            .strip_suffix("ar")
                            .map(|st| (st, "ar"))
                            .or_else(|| inf.strip_suffix("er").map(|st| (st, "er")))
                            .or_else(|| inf.strip_suffix("ir").map(|st| (st, "ir")))
                            .ok_or_else(|| MorphologyError::Infinitive(inf.to_string()))?;
                        if stem.is_empty() {
                            return Err(MorphologyError::Infinitive(inf.to_string()));
                        }
                        let (sg3, pp) = if ending == "ar" { ("a", "ado") } else { ("e", "ido") };
                        (inf.to_string(), format!("{stem}{sg3}"), format!("{stem}{pp}"))
                    }
                    [inf, sg3, pp] => (inf.to_string(), sg3.to_string(), pp.to_string()),
                    _ => return Err(count(op, "1 or 3 forms", forms.len())),
                };
                Ok(verb(&inf, &sg3, &pp))
            }
            ("ace" | "ger" | "spa", _) => Err(MorphologyError::UnknownOperator(op.to_string())),
            _ => Err(MorphologyError::UnknownLanguage(lang.to_string())),
        }
    }
}

fn split_args(args: &[LexArg]) -> Result<(Vec<&str>, Vec<&str>), MorphologyError> {
    let mut forms = Vec::new();
    let mut tags = Vec::new();
    for a in args {
        match a {
            LexArg::Form(f) if f.trim().is_empty() => return Err(MorphologyError::EmptyForm),
            LexArg::Form(f) => forms.push(f.as_str()),
            LexArg::Tag(t) => tags.push(t.as_str()),
        }
    }
    Ok((forms, tags))
}

fn count(op: &str, expected: &str, found: usize) -> MorphologyError {
    MorphologyError::ArgCount { op: op.to_string(), expected: expected.to_string(), found }
}

fn arity(op: &str, forms: &[&str], min: usize, max: usize, expected: &str) -> Result<(), MorphologyError> {
    if forms.len() < min || forms.len() > max {
        return Err(count(op, expected, forms.len()));
    }
    Ok(())
}

fn no_tags(op: &str, tags: &[&str], forms: usize) -> Result<(), MorphologyError> {
    match tags.first() {
        None => Ok(()),
        Some(_) => Err(count(op, "string forms only", forms + tags.len())),
    }
}

fn single_tag<'a>(tags: &[&'a str], forms: usize) -> Result<Option<&'a str>, MorphologyError> {
    match tags {
        [] => Ok(None),
        [t] => Ok(Some(t)),
        _ => Err(count("mkN", "at most one gender", forms + tags.len())),
    }
}

fn s(x: &str) -> LexValue {
    LexValue::Str(x.to_string())
}

fn p(x: &str) -> LexValue {
    LexValue::Param(x.to_string())
}

fn rec(fields: Vec<(&str, LexValue)>) -> LexValue {
    LexValue::Record(fields.into_iter().map(|(n, v)| (n.to_string(), v)).collect())
}

fn table(cells: Vec<(&str, LexValue)>) -> LexValue {
    LexValue::Table(cells.into_iter().map(|(n, v)| (n.to_string(), v)).collect())
}

fn verb(inf: &str, sg3: &str, pp: &str) -> LexValue {
    rec(vec![("s", table(vec![("Inf", s(inf)), ("Sg3", s(sg3)), ("PastPart", s(pp))]))])
}

fn is_vowel(c: char) -> bool {
    matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u')
}

fn starts_with_vowel(w: &str) -> bool {
    w.chars().next().is_some_and(is_vowel)
}

/// Plural of nouns and third person singular of verbs share their spelling rules.
pub fn english_plural(w: &str) -> String {
    if ["s", "x", "z", "ch", "sh"].iter().any(|e| w.ends_with(e)) {
        return format!("{w}es");
    }
    let mut cs = w.chars().rev();
    if let (Some('y'), Some(prev)) = (cs.next(), cs.next()) {
        if !is_vowel(prev) {
            return format!("{}ies", &w[..w.len() - 1]);
        }
    }
    format!("{w}s")
}

pub fn english_participle(w: &str) -> String {
    if w.ends_with('e') {
        format!("{w}d")
    } else {
        format!("{w}ed")
    }
}

fn german_gender(tag: &str) -> Result<&'static str, MorphologyError> {
    match tag {
        "masculine" | "masc" => Ok("Masc"),
        "feminine" | "fem" => Ok("Fem"),
        "neuter" | "neut" => Ok("Neut"),
        other => Err(MorphologyError::UnknownGender(other.to_string())),
    }
}

fn romance_gender(tag: &str) -> Result<&'static str, MorphologyError> {
    match tag {
        "masculine" | "masc" => Ok("Masc"),
        "feminine" | "fem" => Ok("Fem"),
        other => Err(MorphologyError::UnknownGender(other.to_string())),
    }
}

/// Feminine for the typical feminine endings, masculine otherwise.
fn german_default_gender(sg: &str) -> &'static str {
    let fem = ["e", "ung", "heit", "keit", "schaft", "ion", "tät"];
    if fem.iter().any(|e| sg.ends_with(e)) {
        "Fem"
    } else {
        "Masc"
    }
}

fn german_plural(sg: &str) -> String {
    if sg.ends_with('e') {
        format!("{sg}n")
    } else {
        format!("{sg}e")
    }
}

fn german_noun(sg: &str, pl: &str, gender: &str) -> LexValue {
    let gen_sg = if gender == "Fem" {
        sg.to_string()
    } else if ["s", "x", "z", "ß"].iter().any(|e| sg.ends_with(e)) {
        format!("{sg}es")
    } else {
        format!("{sg}s")
    };
    let dat_pl = if pl.ends_with('n') || pl.ends_with('s') { pl.to_string() } else { format!("{pl}n") };
    let cases = |nom: &str, acc: &str, dat: &str, gen: &str| {
        table(vec![("Nom", s(nom)), ("Acc", s(acc)), ("Dat", s(dat)), ("Gen", s(gen))])
    };
    rec(vec![
        ("s", table(vec![("Sg", cases(sg, sg, sg, &gen_sg)), ("Pl", cases(pl, pl, &dat_pl, pl))])),
        ("g", p(gender)),
    ])
}

/// Adds `s` after a vowel and `es` after a consonant.
pub fn spanish_plural(sg: &str) -> String {
    match sg.chars().last() {
        Some(c) if "aeiouáéíóú".contains(c) => format!("{sg}s"),
        _ => format!("{sg}es"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forms(xs: &[&str]) -> Vec<LexArg> {
        xs.iter()
            .map(|x| match x.strip_prefix('#') {
                Some(tag) => LexArg::Tag(tag.to_string()),
                None => LexArg::Form(x.to_string()),
            })
            .collect()
    }

    fn cell<'a>(v: &'a LexValue, path: &[&str]) -> &'a str {
        let mut cur = v;
        for step in path {
            cur = cur.field(step).or_else(|| cur.cell(step)).unwrap_or_else(|| panic!("no {step}"));
        }
        cur.as_str().unwrap_or_else(|| panic!("not a string: {cur:?}"))
    }

    #[test]
    fn german_noun_cases() {
        let v = AceMorphology.apply("ger", "mkN", &forms(&["Land", "Länder", "#neuter"])).unwrap();
        assert_eq!(cell(&v, &["s", "Sg", "Nom"]), "Land");
        assert_eq!(cell(&v, &["s", "Pl", "Nom"]), "Länder");
        assert_eq!(cell(&v, &["s", "Pl", "Dat"]), "Ländern");
        assert_eq!(cell(&v, &["s", "Sg", "Gen"]), "Lands");
        assert_eq!(v.field("g"), Some(&LexValue::Param("Neut".into())));
        let see = AceMorphology.apply("ger", "mkN", &forms(&["See", "Seen", "#masculine"])).unwrap();
        assert_eq!(cell(&see, &["s", "Pl", "Dat"]), "Seen");
    }

    #[test]
    fn english_rules() {
        assert_eq!(english_plural("country"), "countries");
        assert_eq!(english_plural("day"), "days");
        assert_eq!(english_plural("box"), "boxes");
        assert_eq!(english_plural("church"), "churches");
        let v = AceMorphology.apply("ace", "mkV2", &forms(&["contain"])).unwrap();
        assert_eq!(cell(&v, &["s", "Sg3"]), "contains");
        assert_eq!(cell(&v, &["s", "PastPart"]), "contained");
        let n = AceMorphology.apply("ace", "mkN", &forms(&["apple"])).unwrap();
        assert_eq!(n.field("a"), Some(&LexValue::Param("An".into())));
    }

    #[test]
    fn spanish_rules() {
        assert_eq!(spanish_plural("mujer"), "mujeres");
        assert_eq!(spanish_plural("lago"), "lagos");
        let v = AceMorphology.apply("spa", "mkV2", &forms(&["limitar"])).unwrap();
        assert_eq!(cell(&v, &["s", "Sg3"]), "limita");
        assert_eq!(cell(&v, &["s", "PastPart"]), "limitado");
        let v = AceMorphology.apply("spa", "mkV2", &forms(&["contener", "contiene", "contenido"])).unwrap();
        assert_eq!(cell(&v, &["s", "Sg3"]), "contiene");
        assert_eq!(
            AceMorphology.apply("spa", "mkV2", &forms(&["hablo"])),
            Err(MorphologyError::Infinitive("hablo".into()))
        );
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(
            AceMorphology.apply("ace", "mkN", &forms(&["a", "b", "c"])),
            Err(MorphologyError::ArgCount { .. })
        ));
        assert_eq!(AceMorphology.apply("ace", "mkN", &forms(&[""])), Err(MorphologyError::EmptyForm));
        assert_eq!(
            AceMorphology.apply("ger", "mkN", &forms(&["Tisch", "#plural"])),
            Err(MorphologyError::UnknownGender("plural".into()))
        );
        assert!(matches!(AceMorphology.apply("fin", "mkN", &forms(&["talo"])), Err(MorphologyError::UnknownLanguage(_))));
    }
}
