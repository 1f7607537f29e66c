//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

pub mod reference;
pub mod values;
pub mod vertex;

use std::path::PathBuf;

use aara_fx::corpus::{load_corpus, GoldenEntry};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus() -> Vec<GoldenEntry> {
    load_corpus(&corpus_dir()).expect("corpus loads")
}

use aara_fx::syntax::{Program, SType, Value};
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

/// Runs `f` on `cases` generated values of `t` with a fixed seed.
pub fn for_inputs(
    p: &Program,
    t: &SType,
    max_len: usize,
    cases: u32,
    f: impl Fn(Value) -> Result<(), TestCaseError>,
) {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    if let Err(e) = runner.run(&values::value_of(p, t, max_len), &f) {
        panic!("{e}");
    }
}
