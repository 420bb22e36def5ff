//! Small reference instances with known answers.

use crate::model::{Instance, Matching};

/// Four agents with no stable matching; agent 4's list is `[1, 2, 3]`.
pub fn no_stable_four() -> Instance {
    Instance::from_one_based(&[&[2, 3, 4], &[3, 1, 4], &[1, 2, 4], &[1, 2, 3]])
}

/// Ten agents with complete lists and exactly seven stable matchings.
pub fn seven_stable() -> Instance {
    Instance::from_one_based(&[
        &[8, 2, 9, 3, 6, 4, 5, 7, 10],
        &[4, 3, 8, 9, 5, 1, 10, 6, 7],
        &[5, 6, 8, 2, 1, 7, 10, 4, 9],
        &[10, 7, 9, 3, 1, 6, 2, 5, 8],
        &[7, 4, 10, 8, 2, 6, 3, 1, 9],
        &[2, 8, 7, 3, 4, 10, 1, 5, 9],
        &[2, 1, 8, 3, 5, 10, 4, 6, 9],
        &[10, 4, 2, 5, 6, 7, 1, 3, 9],
        &[6, 7, 2, 5, 10, 3, 4, 8, 1],
        &[3, 1, 6, 5, 2, 9, 8, 4, 7],
    ])
}

/// The stable matchings of [`seven_stable`], in a fixed order used by the tests.
pub fn seven_stable_matchings() -> Vec<Matching> {
    let pairs: [[(usize, usize); 5]; 7] = [
        [(1, 3), (2, 4), (5, 7), (6, 8), (9, 10)],
        [(1, 7), (2, 8), (3, 5), (4, 9), (6, 10)],
        [(1, 4), (2, 9), (3, 6), (5, 7), (8, 10)],
        [(1, 4), (2, 3), (5, 7), (6, 8), (9, 10)],
        [(1, 4), (2, 8), (3, 6), (5, 7), (9, 10)],
        [(1, 7), (2, 3), (4, 9), (5, 10), (6, 8)],
        [(1, 7), (2, 8), (3, 6), (4, 9), (5, 10)],
    ];
    pairs
        .iter()
        .map(|p| Matching::from_one_based(10, p))
        .collect()
}

/// Profiles of [`seven_stable_matchings`], in the same order.
pub const SEVEN_STABLE_PROFILES: [[u32; 9]; 7] = [
    [2, 1, 0, 1, 4, 1, 1, 0, 0],
    [1, 1, 4, 0, 0, 1, 2, 1, 0],
    [2, 1, 1, 2, 2, 1, 1, 0, 0],
    [1, 2, 0, 1, 4, 2, 0, 0, 0],
    [1, 1, 2, 1, 3, 2, 0, 0, 0],
    [0, 3, 2, 2, 1, 0, 1, 1, 0],
    [0, 2, 4, 2, 0, 0, 1, 1, 0],
];

/// Costs of [`seven_stable_matchings`], in the same order.
pub const SEVEN_STABLE_COSTS: [u64; 7] = [41, 43, 38, 41, 40, 40, 39];

/// Two agents who list each other.
pub fn mutual_pair() -> Instance {
    Instance::from_one_based(&[&[2], &[1]])
}
