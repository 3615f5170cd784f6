//! Random but physically shaped link instances for testing and
//! benchmarking without running the impedance synthesis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{Bounds, Link, RisLoad};
use crate::impedance::ImpedanceSet;
use crate::linalg::CMatrix;

/// Ohmic loss of every synthetic RIS element.
const LOSS: f64 = 0.01;

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_phasor<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(log_uniform(rng, lo, hi), rng.gen_range(-PI..PI))
}

/// A reciprocal, passive link with `n` RIS elements.
///
/// Element self impedances are short-dipole-like (small resistance, large
/// capacitive reactance). Mutual resistances follow a Gaussian correlation
/// in index distance and every element carries 10 mΩ of loss, so `Re(Z_SS)`
/// is positive definite; mutual reactances decay with index distance. The
/// TX side couples to the RIS far more strongly than the RX side, and port
/// resistances of at least 1 Ω keep the whole network passive for
/// `n ≤ 100`, so `Z_SE` cannot become singular for any real reactances.
pub fn random_link<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Link {
    let r_rad: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let corr = rng.gen_range(0.3..1.5);
    let mut z_ss = CMatrix::zeros(n);
    for r in 0..n {
        z_ss[(r, r)] = Complex64::new(r_rad[r] + LOSS, rng.gen_range(-3000.0..-500.0));
        for c in 0..r {
            let d = (r - c) as f64;
            let re = (r_rad[r] * r_rad[c]).sqrt() * (-0.5 * (d / corr).powi(2)).exp();
            let im = log_uniform(rng, 0.1, 50.0) / d * if rng.gen() { 1.0 } else { -1.0 };
            z_ss[(r, c)] = Complex64::new(re, im);
            z_ss[(c, r)] = Complex64::new(re, im);
        }
    }
    let z_ts = (0..n).map(|_| random_phasor(rng, 1e-4, 1e-2)).collect();
    let z_rs = (0..n).map(|_| random_phasor(rng, 1e-6, 1e-4)).collect();
    let port = |rng: &mut R| Complex64::new(rng.gen_range(1.0..80.0), rng.gen_range(-2000.0..50.0));
    let z_tt = port(rng);
    let z_rr = port(rng);
    let iset = ImpedanceSet::new(z_tt, z_rr, Complex64::new(0.0, 0.0), z_ts, z_rs, z_ss)
        .expect("shapes agree by construction");
    Link::new(iset, Complex64::new(50.0, 50.0), Complex64::new(50.0, 50.0))
}

/// Reactances drawn uniformly from the box.
pub fn random_load<R: Rng + ?Sized>(rng: &mut R, n: usize, r0: f64, bounds: Bounds) -> RisLoad {
    let x = (0..n).map(|_| rng.gen_range(bounds.min..=bounds.max)).collect();
    RisLoad::new(r0, x, bounds).expect("reactances drawn inside the box")
}
