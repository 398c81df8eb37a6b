//! Checks on the bundled fixture files themselves.

mod common;

use std::collections::BTreeMap;

use querylens::evaluate::{gsc_subsets, score_extraction_detailed, GscWarning};
use querylens::pipeline::predict_gold;
use querylens::{Category, LocationKind, MatchMode};

#[test]
fn gazetteer_shape() {
    let gaz = common::gazetteer();
    assert_eq!(gaz.len(), 3000);
    let munis = gaz.entries().filter(|e| e.kind == LocationKind::Municipality).count();
    assert_eq!(munis, 589);
    assert!(gaz.get("FR-75056").is_none());
    assert_eq!(gaz.index().resolve("saint nicolas").unwrap().len(), 2);
    assert!(gaz.index().resolve("anwterp").is_none());
    assert!(gaz.entries().any(|e| e.coordinates().is_none()));
}

#[test]
fn gsc_shape() {
    let gsc = common::gsc();
    assert_eq!(gsc.queries.len(), 995);
    assert_eq!(gsc.entity_count(), 849);
    assert_eq!(gsc.disputed().len(), 20);
    let counts: Vec<usize> = Category::ALL.iter().map(|c| gsc.consensus_counts()[c]).collect();
    assert_eq!(counts, vec![473, 17, 16, 313, 10]);
    assert!(gsc.warnings.iter().any(|w| matches!(w, GscWarning::NumericQuery { .. })));
    assert!(gsc.warnings.iter().any(|w| matches!(w, GscWarning::DuplicateQuery { .. })));
    assert!(gsc.warnings.iter().any(|w| matches!(w, GscWarning::DuplicateRow { .. })));
}

#[test]
fn gsc_subsets_and_place_recall() {
    let res = common::resources();
    let gsc = common::gsc();
    let subsets = gsc_subsets(&gsc, &res.gazetteer);
    assert_eq!(subsets.belgian_municipal_locs.len(), 198);
    assert_eq!(subsets.full_name_pers.len(), 141);

    let (places, _) = predict_gold(&gsc, &res);
    let d = score_extraction_detailed(&places, &subsets.belgian_municipal_locs, MatchMode::Strict);
    assert_eq!(d.report.correct, 175, "{:?}", d.missed);
    let missed: BTreeMap<String, usize> =
        d.missed.iter().map(|m| (gsc.queries[m.query].tokens[m.span.start..m.span.end].join(" "), 1)).collect();
    assert!(missed.contains_key("wez"));
    assert!(missed.contains_key("overrvssche"));
}
