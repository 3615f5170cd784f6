//! End-to-end transfer function of the RIS-aided link.
//!
//! With `Z_SE = Z_SS + diag(z_RIS)` and, for ports `K, L ∈ {T, R}`,
//! `φ_KL = z_KL − z_KS Z_SE⁻¹ z_SL`, the channel is
//! `h = z_L φ_TR / (z̃_T z̃_R − φ_TR²)` with `z̃_T = z_G + φ_TT` and
//! `z̃_R = z_L + φ_RR`. The received-power objective is `|h|²`.
//!
//! `Z_SE` is factorized once per load vector; nothing here forms its
//! inverse.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::impedance::ImpedanceSet;
use crate::linalg::{dot, Lu};
use crate::metrics::{MultCounter, Phase};

/// Pivot-ratio condition estimate above which `Z_SE` is flagged.
pub const NEAR_SINGULAR_CONDITION: f64 = 1e14;

/// Box `[min, max]` on the load reactances, Ohm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Config(format!(
                "reactance bounds must satisfy min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn symmetric(limit: f64) -> Result<Self> {
        Self::new(-limit, limit)
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.min..=self.max).contains(&x)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }
}

/// Tunable RIS loads `z_RIS(s) = r0 + j·x(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisLoad {
    pub r0: f64,
    pub x: Vec<f64>,
    pub bounds: Bounds,
}

impl RisLoad {
    pub fn new(r0: f64, x: Vec<f64>, bounds: Bounds) -> Result<Self> {
        if !(r0 >= 0.0 && r0.is_finite()) {
            return Err(Error::Infeasible(format!(
                "load resistance must be a finite value >= 0, got {r0}"
            )));
        }
        if let Some((s, v)) = x.iter().enumerate().find(|(_, v)| !bounds.contains(**v)) {
            return Err(Error::Infeasible(format!(
                "reactance {s} = {v} outside [{}, {}]",
                bounds.min, bounds.max
            )));
        }
        Ok(Self { r0, x, bounds })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn impedance(&self, s: usize) -> Complex64 {
        Complex64::new(self.r0, self.x[s])
    }

    /// Same resistance and bounds, new reactances (not re-validated).
    pub fn with_reactances(&self, x: Vec<f64>) -> Self {
        Self {
            r0: self.r0,
            x,
            bounds: self.bounds,
        }
    }
}

/// Fixed impedances plus the generator and load terminations.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub impedances: ImpedanceSet,
    pub z_g: Complex64,
    pub z_l: Complex64,
}

impl Link {
    pub fn new(impedances: ImpedanceSet, z_g: Complex64, z_l: Complex64) -> Self {
        Self {
            impedances,
            z_g,
            z_l,
        }
    }

    pub fn n_ris(&self) -> usize {
        self.impedances.n_ris()
    }

    /// The same link with the RIS elements' mutual coupling dropped.
    pub fn without_ris_coupling(&self) -> Self {
        Self {
            impedances: self.impedances.without_ris_coupling(),
            ..self.clone()
        }
    }
}

/// Factorization of `Z_SE` with its conditioning flag.
#[derive(Debug, Clone)]
pub struct ZseFactorization {
    pub lu: Lu,
    pub near_singular: bool,
}

impl ZseFactorization {
    pub fn condition_estimate(&self) -> f64 {
        self.lu.condition_estimate()
    }

    pub fn solve(&self, b: &[Complex64], counter: &mut MultCounter) -> Vec<Complex64> {
        self.lu.solve(b, counter)
    }

    pub fn solve_transpose(&self, b: &[Complex64], counter: &mut MultCounter) -> Vec<Complex64> {
        self.lu.solve_transpose(b, counter)
    }
}

/// Factorizes `Z_SS + diag(r0 + j·x)`.
pub fn z_se(
    iset: &ImpedanceSet,
    load: &RisLoad,
    counter: &mut MultCounter,
) -> Result<ZseFactorization> {
    let n = iset.n_ris();
    if load.len() != n {
        return Err(Error::Dimension(format!(
            "load has {} reactances for {n} RIS elements",
            load.len()
        )));
    }
    let mut m = iset.z_ss.clone();
    for s in 0..n {
        m[(s, s)] += load.impedance(s);
    }
    let lu = Lu::factor(m, counter)?;
    let near_singular = lu.condition_estimate() > NEAR_SINGULAR_CONDITION;
    if near_singular {
        log::debug!(
            "Z_SE near singular (condition estimate {:e})",
            lu.condition_estimate()
        );
    }
    Ok(ZseFactorization { lu, near_singular })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    Tx,
    Rx,
}

/// `φ_KL = z_KL − z_KS Z_SE⁻¹ z_SL`.
pub fn phi(
    iset: &ImpedanceSet,
    zse: &ZseFactorization,
    k: Port,
    l: Port,
    counter: &mut MultCounter,
) -> Complex64 {
    let row = port_row(iset, k);
    let col = port_row(iset, l);
    let y = zse.solve(col, counter);
    port_self(iset, k, l) - dot(row, &y, counter, Phase::Objective)
}

fn port_row(iset: &ImpedanceSet, p: Port) -> &[Complex64] {
    match p {
        Port::Tx => &iset.z_ts,
        Port::Rx => &iset.z_rs,
    }
}

fn port_self(iset: &ImpedanceSet, k: Port, l: Port) -> Complex64 {
    match (k, l) {
        (Port::Tx, Port::Tx) => iset.z_tt,
        (Port::Rx, Port::Rx) => iset.z_rr,
        _ => iset.z_tr,
    }
}

/// Everything the objective and its gradient need at one load vector.
#[derive(Debug, Clone)]
pub struct ChannelEval {
    pub zse: ZseFactorization,
    /// `Z_SE⁻¹ z_ST`.
    pub zinv_st: Vec<Complex64>,
    /// `Z_SE⁻¹ z_SR`.
    pub zinv_sr: Vec<Complex64>,
    pub phi_tt: Complex64,
    pub phi_rr: Complex64,
    pub phi_tr: Complex64,
    pub z_tilde_t: Complex64,
    pub z_tilde_r: Complex64,
    /// `(z̃_T z̃_R − φ_TR²)⁻¹`.
    pub a: Complex64,
    pub h_e2e: Complex64,
    pub objective: f64,
}

impl ChannelEval {
    pub fn near_singular(&self) -> bool {
        self.zse.near_singular
    }

    /// `φ_RT = z_RT − z_RS Z_SE⁻¹ z_ST`, reusing the stored solve.
    pub fn phi_rt(&self, iset: &ImpedanceSet, counter: &mut MultCounter) -> Complex64 {
        iset.z_rt() - dot(&iset.z_rs, &self.zinv_st, counter, Phase::Objective)
    }
}

/// Evaluates the exact channel, charging multiplications to `counter`.
pub fn evaluate(link: &Link, load: &RisLoad, counter: &mut MultCounter) -> Result<ChannelEval> {
    let iset = &link.impedances;
    let zse = z_se(iset, load, counter)?;
    let zinv_st = zse.solve(iset.z_st(), counter);
    let zinv_sr = zse.solve(iset.z_sr(), counter);
    let phi_tt = iset.z_tt - dot(&iset.z_ts, &zinv_st, counter, Phase::Objective);
    let phi_rr = iset.z_rr - dot(&iset.z_rs, &zinv_sr, counter, Phase::Objective);
    let phi_tr = iset.z_tr - dot(&iset.z_ts, &zinv_sr, counter, Phase::Objective);

    let z_tilde_t = link.z_g + phi_tt;
    let z_tilde_r = link.z_l + phi_rr;
    let denom = z_tilde_t * z_tilde_r - phi_tr * phi_tr;
    if denom.re == 0.0 && denom.im == 0.0 {
        return Err(Error::Degenerate("z̃_T z̃_R − φ_TR² = 0"));
    }
    let a = denom.inv();
    let h_e2e = link.z_l * phi_tr * a;
    // two products in the denominator, the inverse, two for h
    counter.add(Phase::Objective, 5);
    Ok(ChannelEval {
        zse,
        zinv_st,
        zinv_sr,
        phi_tt,
        phi_rr,
        phi_tr,
        z_tilde_t,
        z_tilde_r,
        a,
        h_e2e,
        objective: h_e2e.norm_sqr(),
    })
}

/// Exact channel evaluation without multiplication accounting.
pub fn transfer_function(link: &Link, load: &RisLoad) -> Result<ChannelEval> {
    evaluate(link, load, &mut MultCounter::default())
}

/// Received power `|h|²` at `load`.
pub fn objective(link: &Link, load: &RisLoad) -> Result<f64> {
    Ok(transfer_function(link, load)?.objective)
}

/// `𝒴₀ = z_L (z_L + z_RR)⁻¹ (z_G + z_TT)⁻¹`.
pub fn y0(link: &Link) -> Result<Complex64> {
    let iset = &link.impedances;
    let rx = link.z_l + iset.z_rr;
    let tx = link.z_g + iset.z_tt;
    if rx == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate("z_L + z_RR = 0"));
    }
    if tx == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate("z_G + z_TT = 0"));
    }
    Ok(link.z_l / (rx * tx))
}

/// The decoupled approximation `h_APP = 𝒴₀ φ_RT`, which ignores the
/// feedback of the RIS on the TX and RX self impedances.
pub fn approx_transfer_function(link: &Link, load: &RisLoad) -> Result<Complex64> {
    let y0 = y0(link)?;
    let mut counter = MultCounter::default();
    let iset = &link.impedances;
    let zse = z_se(iset, load, &mut counter)?;
    Ok(y0 * phi(iset, &zse, Port::Rx, Port::Tx, &mut counter))
}

/// Continuity bound `‖z_TS‖‖z_SR‖ / R₀` on `|φ_TR|`, valid when the
/// Hermitian part of `Z_SS` is positive semidefinite. Only used as a
/// diagnostic.
pub fn phi_tr_bound(iset: &ImpedanceSet, r0: f64) -> f64 {
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    iset.z_tr.norm() + norm(&iset.z_ts) * norm(&iset.z_rs) / r0
}
