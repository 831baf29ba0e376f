//! Ten-particle scripted trace of the occlusion-aware particle filter,
//! frozen from a line-by-line reference transcription of the algorithm.

mod support;

use support::golden::{library, reference, sorted, GOLDEN, SEED};

#[test]
fn library_matches_frozen_trace() {
    assert_eq!(sorted(library(SEED)), GOLDEN.to_vec());
}

#[test]
fn reference_reproduces_frozen_trace() {
    assert_eq!(sorted(reference(SEED)), GOLDEN.to_vec());
}

#[test]
fn library_and_reference_agree_across_seeds() {
    for seed in 0..200 {
        assert_eq!(sorted(library(seed)), sorted(reference(seed)), "seed {seed}");
    }
}
