//! Misspelt aliases never match: there is no fuzzy matching.

mod common;

use common::oracle::edit_run;
use querylens::gazetteer::match_tokens;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn thousand_single_edits_never_match() {
    let res = common::resources();
    let run = edit_run(&mut StdRng::seed_from_u64(2019), &res.gazetteer, &res.lexicons, 1000);
    assert!(run.matched.is_empty(), "{:?}", run.matched);
    assert!(run.single_token > 300, "{run:?}");
    assert!(run.tried < 1100, "too many edits hit real spellings: {run:?}");
}

#[test]
fn known_misspellings_fail() {
    let res = common::resources();
    for text in ["anwterp", "overrvssche", "bruxels", "liége", "namr"] {
        let tokens = querylens::normalize_text(text);
        assert!(match_tokens(&tokens, &res.gazetteer, &res.lexicons).is_empty(), "{text}");
    }
}
