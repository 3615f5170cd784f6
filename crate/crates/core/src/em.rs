//! Thin-wire dipole geometry and impedance synthesis.
//!
//! All dipoles are parallel to the z-axis. Mutual impedances come from the
//! induced-EMF method with sinusoidal current distributions; self
//! impedances evaluate the same reaction integral on the wire surface.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::ImpedanceSet;
use crate::linalg::CMatrix;
use crate::quadrature::{integrate_adaptive, QuadratureOptions};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Free-space wave impedance `μ₀c`, Ohm.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730_313_412;

/// A z-directed thin-wire dipole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dipole {
    pub center: [f64; 3],
    pub length: f64,
    pub radius: f64,
}

impl Dipole {
    pub fn new(center: [f64; 3], length: f64, radius: f64) -> Result<Self> {
        let d = Self {
            center,
            length,
            radius,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Geometry(format!(
                "dipole length must be positive, got {}",
                self.length
            )));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Geometry(format!(
                "dipole radius must be positive, got {}",
                self.radius
            )));
        }
        if self.radius >= self.length / 10.0 {
            return Err(Error::Geometry(format!(
                "thin-wire model needs radius < length/10 (radius {}, length {})",
                self.radius, self.length
            )));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("non-finite dipole center".into()));
        }
        Ok(())
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.length
    }

    /// The orientation is fixed.
    pub fn orientation(&self) -> [f64; 3] {
        [0.0, 0.0, 1.0]
    }

    pub fn translated(&self, by: [f64; 3]) -> Self {
        Self {
            center: [
                self.center[0] + by[0],
                self.center[1] + by[1],
                self.center[2] + by[2],
            ],
            ..*self
        }
    }
}

/// TX and RX dipoles, the RIS elements and the port terminations.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tx: Dipole,
    pub rx: Dipole,
    /// Row-major over the grid: rows run along z, columns along y, and the
    /// column (y) index varies fastest.
    pub ris_elements: Vec<Dipole>,
    pub wavelength: f64,
    pub z_g: Complex64,
    pub z_l: Complex64,
}

impl Scenario {
    pub fn new(
        tx: Dipole,
        rx: Dipole,
        ris_elements: Vec<Dipole>,
        wavelength: f64,
        z_g: Complex64,
        z_l: Complex64,
    ) -> Result<Self> {
        let s = Self {
            tx,
            rx,
            ris_elements,
            wavelength,
            z_g,
            z_l,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn n_ris(&self) -> usize {
        self.ris_elements.len()
    }

    pub fn frequency_hz(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::Geometry(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        if self.ris_elements.is_empty() {
            return Err(Error::Geometry("RIS has no elements".into()));
        }
        for (i, e) in self.ris_elements.iter().enumerate() {
            e.validate()?;
            if e.center[0] != 0.0 {
                return Err(Error::Geometry(format!(
                    "RIS element {i} is off the x = 0 plane (x = {})",
                    e.center[0]
                )));
            }
        }
        self.tx.validate()?;
        self.rx.validate()?;
        let all: Vec<&Dipole> = [&self.tx, &self.rx]
            .into_iter()
            .chain(self.ris_elements.iter())
            .collect();
        for i in 0..all.len() {
            for j in 0..i {
                check_no_overlap(all[i], all[j], i, j)?;
            }
        }
        Ok(())
    }

    /// The same scenario rigidly shifted by `by` meters.
    ///
    /// The RIS plane moves with it, so the result is only meant for
    /// direct impedance synthesis, not for [`Scenario::validate`].
    pub fn translated(&self, by: [f64; 3]) -> Self {
        Self {
            tx: self.tx.translated(by),
            rx: self.rx.translated(by),
            ris_elements: self.ris_elements.iter().map(|d| d.translated(by)).collect(),
            wavelength: self.wavelength,
            z_g: self.z_g,
            z_l: self.z_l,
        }
    }
}

// Touching is allowed; overlap along z on the same wire axis is not.
fn check_no_overlap(p: &Dipole, q: &Dipole, i: usize, j: usize) -> Result<()> {
    let dx = p.center[0] - q.center[0];
    let dy = p.center[1] - q.center[1];
    let rho = dx.hypot(dy);
    if rho >= p.radius + q.radius {
        return Ok(());
    }
    let dz = (p.center[2] - q.center[2]).abs();
    let reach = p.half_length() + q.half_length();
    if dz < reach * (1.0 - 1e-9) {
        return Err(Error::Geometry(format!(
            "dipoles {j} and {i} overlap (axial gap {dz} m < {reach} m)"
        )));
    }
    Ok(())
}

fn default_radius() -> f64 {
    1.0 / 500.0
}

/// Dipole dimensions, in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub length_wavelengths: f64,
    #[serde(default = "default_radius")]
    pub radius_wavelengths: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaSpec {
    pub position_m: [f64; 3],
    pub length_wavelengths: f64,
    #[serde(default = "default_radius")]
    pub radius_wavelengths: f64,
}

/// Either an explicit grid or a square aperture filled at a given spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RisLayout {
    Grid {
        rows: usize,
        cols: usize,
        spacing_wavelengths: f64,
    },
    Aperture {
        aperture_m: f64,
        spacing_wavelengths: f64,
    },
}

impl RisLayout {
    pub fn spacing_wavelengths(&self) -> f64 {
        match *self {
            RisLayout::Grid {
                spacing_wavelengths,
                ..
            }
            | RisLayout::Aperture {
                spacing_wavelengths,
                ..
            } => spacing_wavelengths,
        }
    }

    /// Grid shape `(rows, cols)`. An aperture holds `round(aperture / spacing)`
    /// elements per side, each occupying one spacing-sized cell.
    pub fn shape(&self, wavelength: f64) -> Result<(usize, usize)> {
        let spacing = self.spacing_wavelengths();
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Geometry(format!(
                "RIS spacing must be positive, got {spacing} wavelengths"
            )));
        }
        match *self {
            RisLayout::Grid { rows, cols, .. } => {
                if rows == 0 || cols == 0 {
                    return Err(Error::Geometry("RIS grid needs rows, cols >= 1".into()));
                }
                Ok((rows, cols))
            }
            RisLayout::Aperture { aperture_m, .. } => {
                if !(aperture_m > 0.0) {
                    return Err(Error::Geometry(format!(
                        "aperture must be positive, got {aperture_m} m"
                    )));
                }
                let per_side = (aperture_m / (spacing * wavelength)).round() as usize;
                if per_side == 0 {
                    return Err(Error::Geometry(
                        "aperture smaller than half a spacing holds no element".into(),
                    ));
                }
                Ok((per_side, per_side))
            }
        }
    }
}

/// Everything that determines the fixed impedances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub frequency_hz: f64,
    pub ris: RisLayout,
    pub element: ElementSpec,
    pub tx: AntennaSpec,
    pub rx: AntennaSpec,
}

impl GeometryConfig {
    /// 3.5 GHz, 14×14 elements at λ/4, λ/32 dipoles of radius λ/500,
    /// TX at (10, −1, 0) m and RX at (10, 99, 0) m.
    pub fn reference() -> Self {
        let short = 1.0 / 32.0;
        Self {
            frequency_hz: 3.5e9,
            ris: RisLayout::Grid {
                rows: 14,
                cols: 14,
                spacing_wavelengths: 0.25,
            },
            element: ElementSpec {
                length_wavelengths: short,
                radius_wavelengths: default_radius(),
            },
            tx: AntennaSpec {
                position_m: [10.0, -1.0, 0.0],
                length_wavelengths: short,
                radius_wavelengths: default_radius(),
            },
            rx: AntennaSpec {
                position_m: [10.0, 99.0, 0.0],
                length_wavelengths: short,
                radius_wavelengths: default_radius(),
            },
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }
}

/// Lays the RIS out on the yz-plane centered at the origin.
pub fn build_grid_scenario(
    cfg: &GeometryConfig,
    z_g: Complex64,
    z_l: Complex64,
) -> Result<Scenario> {
    if !(cfg.frequency_hz > 0.0 && cfg.frequency_hz.is_finite()) {
        return Err(Error::Geometry(format!(
            "frequency must be positive, got {}",
            cfg.frequency_hz
        )));
    }
    let lambda = cfg.wavelength();
    let (rows, cols) = cfg.ris.shape(lambda)?;
    let d = cfg.ris.spacing_wavelengths() * lambda;
    let el_len = cfg.element.length_wavelengths * lambda;
    let el_rad = cfg.element.radius_wavelengths * lambda;

    let mut ris = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let z = (r as f64 - 0.5 * (rows as f64 - 1.0)) * d;
        for c in 0..cols {
            let y = (c as f64 - 0.5 * (cols as f64 - 1.0)) * d;
            ris.push(Dipole::new([0.0, y, z], el_len, el_rad)?);
        }
    }
    let antenna = |a: &AntennaSpec| {
        Dipole::new(
            a.position_m,
            a.length_wavelengths * lambda,
            a.radius_wavelengths * lambda,
        )
    };
    Scenario::new(antenna(&cfg.tx)?, antenna(&cfg.rx)?, ris, lambda, z_g, z_l)
}

// Orders a pair so the reaction integral is always taken the same way round.
fn canonical<'a>(p: &'a Dipole, q: &'a Dipole) -> (&'a Dipole, &'a Dipole) {
    let key = |d: &Dipole| [d.length, d.radius, d.center[0], d.center[1], d.center[2]];
    let (kp, kq) = (key(p), key(q));
    for (a, b) in kp.iter().zip(&kq) {
        match a.total_cmp(b) {
            std::cmp::Ordering::Less => return (p, q),
            std::cmp::Ordering::Greater => return (q, p),
            std::cmp::Ordering::Equal => {}
        }
    }
    (p, q)
}

/// Mutual impedance between two parallel z-directed dipoles, referred to
/// their feed-point currents.
///
/// The pair is put in a canonical order first, so the result is exactly
/// symmetric in its arguments. The lateral offset is floored at the larger
/// wire radius; for coincident axes this evaluates the field on the wire
/// surface.
pub fn mutual_impedance(p: &Dipole, q: &Dipole, wavelength: f64) -> Result<Complex64> {
    mutual_impedance_with(p, q, wavelength, &QuadratureOptions::default())
}

pub fn mutual_impedance_with(
    p: &Dipole,
    q: &Dipole,
    wavelength: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    if !(wavelength > 0.0) {
        return Err(Error::Geometry(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let (src, obs) = canonical(p, q);
    let k = 2.0 * PI / wavelength;
    let hp = src.half_length();
    let hq = obs.half_length();
    let dx = obs.center[0] - src.center[0];
    let dy = obs.center[1] - src.center[1];
    let rho = dx.hypot(dy).max(src.radius.max(obs.radius));
    // axial offset of the observer's center relative to the source's center
    let dz0 = obs.center[2] - src.center[2];
    let rho2 = rho * rho;
    let two_cos = 2.0 * (k * hp).cos();

    let kernel = |zeta: f64| {
        let dz = dz0 + zeta;
        let r0 = (rho2 + dz * dz).sqrt();
        let r1 = (rho2 + (dz - hp) * (dz - hp)).sqrt();
        let r2 = (rho2 + (dz + hp) * (dz + hp)).sqrt();
        let g = |r: f64| Complex64::from_polar(1.0 / r, -k * r);
        let field = g(r1) + g(r2) - g(r0) * two_cos;
        field * (k * (hq - zeta.abs())).sin()
    };

    // kink of the observer's current at 0; source center and ends
    let features = [0.0, -dz0, -dz0 - hp, -dz0 + hp];
    let integral = integrate_adaptive(-hq, hq, &features, rho, opts, &kernel).map_err(|e| {
        Error::Quadrature {
            nodes: e.nodes,
            residual: e.residual,
        }
    })?;
    let prefactor =
        Complex64::new(0.0, FREE_SPACE_IMPEDANCE / (4.0 * PI)) / ((k * hp).sin() * (k * hq).sin());
    Ok(integral * prefactor)
}

/// Input impedance of an isolated dipole.
pub fn self_impedance(d: &Dipole, wavelength: f64) -> Result<Complex64> {
    mutual_impedance(d, d, wavelength)
}

/// Computes every fixed impedance of the scenario.
///
/// Each unordered RIS pair is computed once and written to both slots, so
/// `Z_SS` is symmetric to the last bit. When `include_direct_link` is off
/// the TX-RX mutual impedance is set to exactly zero.
pub fn assemble_impedances(s: &Scenario, include_direct_link: bool) -> Result<ImpedanceSet> {
    let n = s.n_ris();
    let lambda = s.wavelength;
    let els = &s.ris_elements;

    let z_tt = self_impedance(&s.tx, lambda)?;
    let z_rr = self_impedance(&s.rx, lambda)?;
    let z_tr = if include_direct_link {
        mutual_impedance(&s.tx, &s.rx, lambda)?
    } else {
        Complex64::new(0.0, 0.0)
    };
    let z_ts = els
        .par_iter()
        .map(|e| mutual_impedance(&s.tx, e, lambda))
        .collect::<Result<Vec<_>>>()?;
    let z_rs = els
        .par_iter()
        .map(|e| mutual_impedance(&s.rx, e, lambda))
        .collect::<Result<Vec<_>>>()?;

    // upper triangle, row by row, each pair into its own slot
    let upper: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|r| {
            (r..n)
                .map(|c| mutual_impedance(&els[r], &els[c], lambda))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut z_ss = CMatrix::zeros(n);
    for (r, row) in upper.iter().enumerate() {
        for (off, &z) in row.iter().enumerate() {
            let c = r + off;
            z_ss[(r, c)] = z;
            z_ss[(c, r)] = z;
        }
    }

    ImpedanceSet::new(z_tt, z_rr, z_tr, z_ts, z_rs, z_ss)
}
