//! Small calibration instances with at most four latents, and the synthetic
//! recovery generator.
#![allow(dead_code)]

use dialsearch::calibration::{BinaryObservations, StarObservations};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn star_fixtures() -> Vec<(&'static str, StarObservations)> {
    vec![
        (
            "1x1 {3,3,3}",
            StarObservations::from_indices(1, 1, [(0, 0, 3.0), (0, 0, 3.0), (0, 0, 3.0)]).unwrap(),
        ),
        (
            "2x2 crossed",
            StarObservations::from_indices(
                2,
                2,
                [(0, 0, 4.0), (0, 1, 3.0), (1, 0, 2.0), (1, 1, 1.0), (0, 0, 3.0)],
            )
            .unwrap(),
        ),
        (
            "3x1",
            StarObservations::from_indices(3, 1, [(0, 0, 1.0), (1, 0, 2.0), (2, 0, 4.0), (2, 0, 4.0)]).unwrap(),
        ),
        (
            "1x3 harsh and generous",
            StarObservations::from_indices(1, 3, [(0, 0, 1.0), (0, 1, 4.0), (0, 2, 2.0), (0, 1, 4.0)]).unwrap(),
        ),
    ]
}

pub fn binary_fixtures() -> Vec<(&'static str, BinaryObservations)> {
    vec![
        (
            "1x1x2",
            BinaryObservations::from_indices(
                1,
                1,
                2,
                [(0, 0, 0, true), (0, 0, 1, true), (0, 0, 0, true), (0, 0, 1, false)],
            )
            .unwrap(),
        ),
        (
            "2x1x1",
            BinaryObservations::from_indices(
                2,
                1,
                1,
                [(0, 0, 0, true), (0, 0, 0, true), (1, 0, 0, false), (1, 0, 0, true), (1, 0, 0, false)],
            )
            .unwrap(),
        ),
        (
            "1x2x1",
            BinaryObservations::from_indices(1, 2, 1, [(0, 0, 0, false), (0, 1, 0, true), (0, 1, 0, true)]).unwrap(),
        ),
        (
            "2x1x1 no labels for m1",
            BinaryObservations::from_indices(2, 1, 1, [(0, 0, 0, true), (0, 0, 0, true), (0, 0, 0, true)]).unwrap(),
        ),
    ]
}

pub const TRUE_SCORES: [f64; 4] = [1.6, 2.2, 2.8, 3.4];

/// 4 models, 40 annotators, 6 scores each drawn from the star model with the
/// given true `M_i`. Every annotator scores models in a random order, at
/// least once each when possible.
pub fn synthetic_star(seed: u64) -> StarObservations {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::new();
    for j in 0..40 {
        let bias: f64 = StandardNormal.sample(&mut rng);
        for k in 0..6 {
            let i = if k < 4 { (j + k) % 4 } else { rng.random_range(0..4) };
            let noise: f64 = StandardNormal.sample(&mut rng);
            scores.push((i, j, TRUE_SCORES[i] + bias + noise));
        }
    }
    StarObservations::from_indices(4, 40, scores).unwrap()
}
