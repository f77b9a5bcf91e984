//! Random states and unitaries for property tests and benchmarks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::qcore::ket::Ket;

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state of dimension `dim`.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ket {
    loop {
        let amps = (0..dim).map(|_| gaussian_complex(rng)).collect();
        if let Ok(k) = Ket::normalized(amps) {
            return k;
        }
    }
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix the column phases so the distribution is Haar.
    DMatrix::from_fn(dim, dim, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        q[(i, j)] * phase
    })
}

/// Columns of a unitary as kets.
pub fn columns(u: &DMatrix<Complex64>) -> Vec<Ket> {
    (0..u.ncols())
        .map(|j| Ket::from_amplitudes(u.column(j).iter().copied().collect()).expect("nonempty"))
        .collect()
}
