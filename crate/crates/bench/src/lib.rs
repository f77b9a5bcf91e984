//! Fixtures shared by the criterion benchmarks.

use pqcm_core::Ket;

/// The three real "trine" states at 0°, 60° and 120°; the first two are Bob's
/// states and the third is the A2 target in the bundled demo configs.
pub fn trine() -> [Ket; 3] {
    let at = |deg: f64| {
        let t = deg.to_radians();
        Ket::from_real(&[t.cos(), t.sin()]).expect("unit vector")
    };
    [at(0.0), at(60.0), at(120.0)]
}
