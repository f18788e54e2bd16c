//! Published reference figures, used for side-by-side printing and for the
//! metric self-check.

/// (class, tp, fp, fn, precision, recall, f1) as printed.
pub const NER_TABLE: [(&str, usize, usize, usize, f64, f64, f64); 5] = [
    ("Person", 87, 13, 6, 0.87, 0.94, 0.90),
    ("Rank", 80, 14, 11, 0.85, 0.88, 0.86),
    ("Organization", 103, 33, 31, 0.76, 0.77, 0.76),
    ("Title/Role", 85, 20, 23, 0.81, 0.79, 0.80),
    ("All Classes", 355, 80, 71, 0.82, 0.83, 0.82),
];

/// (method, tp, fp, fn, precision, recall, f1) as printed.
pub const RE_TABLE: [(&str, usize, usize, usize, f64, f64, f64); 5] = [
    (
        "Nearest Person (Baseline)",
        993,
        759,
        423,
        0.567,
        0.701,
        0.627,
    ),
    (
        "Shortest Dep. Path (No constraint)",
        1083,
        651,
        333,
        0.625,
        0.765,
        0.687,
    ),
    (
        "Shortest Dep. Path (With constraint)",
        1180,
        559,
        236,
        0.679,
        0.833,
        0.748,
    ),
    (
        "Neural Network (No constraint)",
        1086,
        667,
        330,
        0.620,
        0.767,
        0.685,
    ),
    (
        "Neural Network (With constraint)",
        1103,
        450,
        313,
        0.710,
        0.779,
        0.743,
    ),
];

/// (component, seconds per line, parameters) as printed.
pub const TIMING_TABLE: [(&str, f64, Option<u64>); 4] = [
    ("NER", 1.54, Some(6_153_100)),
    ("Dep. Parsing", 0.70, Some(8_791_858)),
    ("Shortest Dep. Path", 0.0039, None),
    ("Neural Network", 0.051, Some(294)),
];

/// Rounding tolerance for comparing recomputed metrics with printed ones.
pub const METRIC_TOLERANCE: f64 = 0.005;
