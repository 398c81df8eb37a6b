#![allow(dead_code)]

pub mod oracle;

use std::fs::File;
use std::path::PathBuf;

use querylens::evaluate::GoldCorpus;
use querylens::gazetteer::{Gazetteer, GazetteerOptions};
use querylens::lexicon::{Lexicon, ParticleList, SuppressionLexicons};
use querylens::load_gsc;
use querylens::person::PersonOptions;
use querylens::pipeline::Resources;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn gazetteer() -> Gazetteer {
    Gazetteer::load_files(
        &fixture("gazetteer/locations.tsv"),
        &fixture("gazetteer/aliases.tsv"),
        &GazetteerOptions { country: Some("BE".into()) },
    )
    .expect("bundled gazetteer loads")
}

pub fn lexicons() -> SuppressionLexicons {
    let common = Lexicon::read("common_words", File::open(fixture("lexicons/common_words.txt")).unwrap()).unwrap();
    let given = Lexicon::read("given_names", File::open(fixture("lexicons/given_names.txt")).unwrap()).unwrap();
    SuppressionLexicons::new(common, given)
}

pub fn particles() -> ParticleList {
    ParticleList::read(File::open(fixture("lexicons/particles.txt")).unwrap()).unwrap()
}

pub fn resources() -> Resources {
    Resources { gazetteer: gazetteer(), lexicons: lexicons(), particles: particles(), person: PersonOptions::default() }
}

pub fn gsc() -> GoldCorpus {
    load_gsc(File::open(fixture("gsc/gsc.tsv")).unwrap(), b'\t').expect("bundled gsc loads")
}
