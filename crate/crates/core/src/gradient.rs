//! Exact gradient of the received power with respect to the load
//! reactances.
//!
//! `∇f = 2·Im(h · vect_d(E*))` where
//! `E = z_L a Z_SE⁻¹ ((2aφ_TR² + 1) z_SR z_TS − aφ_TR z̃_R z_ST z_TS − aφ_TR z̃_T z_SR z_RS) Z_SE⁻¹`.
//!
//! Only the diagonal of `E` is ever needed. Writing
//! `u = Z_SE⁻ᵀ z_TSᵀ`, `v = Z_SE⁻¹ z_SR`, `p = Z_SE⁻¹ z_ST`, `q = Z_SE⁻ᵀ z_RSᵀ`,
//! each outer-product term contributes an elementwise product, e.g.
//! `diag(Z_SE⁻¹ z_SR z_TS Z_SE⁻¹) = v ∘ u`. Given the factorization that
//! costs two extra solves and O(N) products.

use num_complex::Complex64;

use crate::channel::{ChannelEval, Link};
use crate::metrics::{MultCounter, Phase};

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEval {
    /// `vect_d(E)`.
    pub e_diag: Vec<Complex64>,
    /// `∇_{z_RIS,Im} f`.
    pub grad: Vec<f64>,
}

/// Diagonal of `E`, reusing the solves stored in `eval`.
pub fn e_diagonal(eval: &ChannelEval, link: &Link, counter: &mut MultCounter) -> Vec<Complex64> {
    let iset = &link.impedances;
    let u = eval.zse.solve_transpose(&iset.z_ts, counter);
    let q = eval.zse.solve_transpose(&iset.z_rs, counter);
    let v = &eval.zinv_sr;
    let p = &eval.zinv_st;

    let a = eval.a;
    let phi = eval.phi_tr;
    let scale = link.z_l * a;
    let c_tr = scale * (2.0 * a * phi * phi + 1.0);
    let a_phi = scale * a * phi;
    let c_tt = -a_phi * eval.z_tilde_r;
    let c_rr = -a_phi * eval.z_tilde_t;
    counter.add(Phase::Gradient, 8 + 6 * u.len() as u64);

    (0..u.len())
        .map(|s| c_tr * (v[s] * u[s]) + c_tt * (p[s] * u[s]) + c_rr * (v[s] * q[s]))
        .collect()
}

/// Gradient at the point `eval` was computed for.
pub fn gradient(eval: &ChannelEval, link: &Link, counter: &mut MultCounter) -> GradientEval {
    let e_diag = e_diagonal(eval, link, counter);
    let h = eval.h_e2e;
    counter.add(Phase::Gradient, e_diag.len() as u64);
    let grad = e_diag.iter().map(|e| 2.0 * (h * e.conj()).im).collect();
    GradientEval { e_diag, grad }
}
