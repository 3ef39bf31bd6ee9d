//! Built-in parity-check matrices.

use crate::gf::GfField;
use crate::ldpc::ParityCheckMatrix;

/// Seeded (3,6)-regular, 4-cycle-free binary code with N = 504, M = 252,
/// generated by `scripts/gen_regular_alist.py`.
pub const REGULAR_504_ALIST: &str = include_str!("../data/regular_504_3_6.alist");

/// The 4 x 6 binary example code (row weight 3, column weight 2).
pub fn toy_code() -> ParityCheckMatrix {
    let rows = [
        vec![1, 0, 1, 0, 0, 1],
        vec![1, 1, 0, 1, 0, 0],
        vec![0, 0, 1, 1, 1, 0],
        vec![0, 1, 0, 0, 1, 1],
    ];
    ParityCheckMatrix::from_dense(GfField::new(2).expect("GF(2)"), &rows).expect("toy code")
}

/// The rate-1/2 length-504 binary code used by the experiments.
pub fn regular_504() -> ParityCheckMatrix {
    ParityCheckMatrix::parse_alist(REGULAR_504_ALIST).expect("embedded alist is valid")
}
