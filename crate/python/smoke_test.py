"""Smoke test for the `cnlwiki` extension module.

Build and run from the repository root:

    cargo build --release -p cnlwiki-python
    cp target/release/libcnlwiki.so python/cnlwiki.so
    python3 python/smoke_test.py

or install with `maturin develop -m crates/python/Cargo.toml` first.
"""

import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import cnlwiki  # noqa: E402


def main():
    g = cnlwiki.Grammar()
    assert g.languages() == ["ace", "ger", "spa"], g.languages()

    trees = g.parse("ace", "if X contains Y then Y does not contain X .")
    assert len(trees) == 1, trees
    assert g.linearize("ger", trees[0]) == "wenn X Y enthält , dann enthält Y X nicht .".split()
    assert g.tree_to_axiom(trees[0]) == "Asymmetric(contain)"
    assert "country" in g.complete("ace", ["every"])
    assert g.translate("ace", "spa", ["Germany", "is", "a", "country", "."])

    try:
        g.tree_to_axiom("not a tree (")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed tree accepted")

    w = cnlwiki.Wiki(demo=True)
    assert w.query("spa", ["qué", "país", "limita", "Francia", "?"]) == ["Alemania"]
    assert ("Asymmetric(contain)" in [a for _, a in w.axioms()])

    with tempfile.TemporaryDirectory() as d:
        w = cnlwiki.Wiki(d, demo=False)
        e = w.add_entry("Notes", "ace", "France is a country .")
        assert e["status"] == "included" and e["axiom"] == "ClassAssertion(country, france)", e
        page = w.article("Notes", "ger")
        assert len(page["entries"]) == 1, page
        w.delete_entry(e["id"])
        assert w.axioms() == []
        try:
            w.add_entry("Notes", "ace", "Germany borders xylophone .")
        except cnlwiki.WikiException:
            pass
        else:
            raise AssertionError("unparsable sentence accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
