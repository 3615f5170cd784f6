//! The fixed impedances of a link and their JSON file format.
//!
//! File schema (all impedances in Ohm, complex values as `[re, im]`):
//!
//! ```json
//! {
//!   "n_ris": 2,
//!   "z_tt": [re, im], "z_rr": [re, im], "z_tr": [re, im],
//!   "z_ts": [[re, im], [re, im]],
//!   "z_rs": [[re, im], [re, im]],
//!   "z_ss": [[[re, im], [re, im]], [[re, im], [re, im]]]
//! }
//! ```
//!
//! RIS elements appear in row-major order with the y index fastest. The
//! column vectors `z_ST` and `z_SR` are not stored: by reciprocity they are
//! the transposes of `z_ts` and `z_rs`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Relative asymmetry of `Z_SS` tolerated when loading a file.
pub const RECIPROCITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceSet {
    pub z_tt: Complex64,
    pub z_rr: Complex64,
    pub z_tr: Complex64,
    /// Row vector `z_TS`; also `z_STᵀ`.
    pub z_ts: Vec<Complex64>,
    /// Row vector `z_RS`; also `z_SRᵀ`.
    pub z_rs: Vec<Complex64>,
    pub z_ss: CMatrix,
}

impl ImpedanceSet {
    pub fn new(
        z_tt: Complex64,
        z_rr: Complex64,
        z_tr: Complex64,
        z_ts: Vec<Complex64>,
        z_rs: Vec<Complex64>,
        z_ss: CMatrix,
    ) -> Result<Self> {
        let set = Self {
            z_tt,
            z_rr,
            z_tr,
            z_ts,
            z_rs,
            z_ss,
        };
        set.check_shape()?;
        Ok(set)
    }

    pub fn n_ris(&self) -> usize {
        self.z_ss.dim()
    }

    pub fn z_st(&self) -> &[Complex64] {
        &self.z_ts
    }

    pub fn z_sr(&self) -> &[Complex64] {
        &self.z_rs
    }

    pub fn z_rt(&self) -> Complex64 {
        self.z_tr
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.n_ris();
        for (name, v) in [("z_ts", &self.z_ts), ("z_rs", &self.z_rs)] {
            if v.len() != n {
                return Err(Error::Dimension(format!(
                    "{name} has {} entries but Z_SS is {n}x{n}",
                    v.len()
                )));
            }
        }
        Ok(())
    }

    /// Fails on the first pair whose relative asymmetry exceeds `tol`.
    pub fn check_reciprocity(&self, tol: f64) -> Result<()> {
        let n = self.n_ris();
        for r in 0..n {
            for c in 0..r {
                let a = self.z_ss[(r, c)];
                let b = self.z_ss[(c, r)];
                let scale = a.norm().max(b.norm());
                let diff = (a - b).norm();
                if diff > tol * scale {
                    return Err(Error::Reciprocity {
                        row: r,
                        col: c,
                        asymmetry: if scale > 0.0 { diff / scale } else { f64::INFINITY },
                    });
                }
            }
        }
        Ok(())
    }

    /// Copy with every off-diagonal entry of `Z_SS` zeroed.
    pub fn without_ris_coupling(&self) -> Self {
        let n = self.n_ris();
        let mut z_ss = CMatrix::zeros(n);
        for i in 0..n {
            z_ss[(i, i)] = self.z_ss[(i, i)];
        }
        Self {
            z_ss,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ImpedanceFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ImpedanceFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn cplx(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Serialize, Deserialize)]
struct ImpedanceFile {
    n_ris: usize,
    z_tt: Pair,
    z_rr: Pair,
    z_tr: Pair,
    z_ts: Vec<Pair>,
    z_rs: Vec<Pair>,
    z_ss: Vec<Vec<Pair>>,
}

impl From<&ImpedanceSet> for ImpedanceFile {
    fn from(s: &ImpedanceSet) -> Self {
        let n = s.n_ris();
        Self {
            n_ris: n,
            z_tt: pair(s.z_tt),
            z_rr: pair(s.z_rr),
            z_tr: pair(s.z_tr),
            z_ts: s.z_ts.iter().copied().map(pair).collect(),
            z_rs: s.z_rs.iter().copied().map(pair).collect(),
            z_ss: (0..n)
                .map(|r| s.z_ss.row(r).iter().copied().map(pair).collect())
                .collect(),
        }
    }
}

impl TryFrom<ImpedanceFile> for ImpedanceSet {
    type Error = Error;

    fn try_from(f: ImpedanceFile) -> Result<Self> {
        let n = f.n_ris;
        if f.z_ss.len() != n {
            return Err(Error::Dimension(format!(
                "n_ris = {n} but z_ss has {} rows",
                f.z_ss.len()
            )));
        }
        let mut data = Vec::with_capacity(n * n);
        for (r, row) in f.z_ss.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "n_ris = {n} but z_ss row {r} has {} entries",
                    row.len()
                )));
            }
            data.extend(row.iter().copied().map(cplx));
        }
        let set = ImpedanceSet::new(
            cplx(f.z_tt),
            cplx(f.z_rr),
            cplx(f.z_tr),
            f.z_ts.into_iter().map(cplx).collect(),
            f.z_rs.into_iter().map(cplx).collect(),
            CMatrix::from_row_major(n, data)?,
        )?;
        set.check_reciprocity(RECIPROCITY_TOL)?;
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_element() -> ImpedanceSet {
        let z_ss = CMatrix::from_row_major(
            2,
            vec![c(0.2, -2000.0), c(0.1, 3.0), c(0.1, 3.0), c(0.2, -2000.0)],
        )
        .unwrap();
        ImpedanceSet::new(
            c(0.19, -1999.0),
            c(0.19, -1999.0),
            c(0.0, 0.0),
            vec![c(1e-3, 2e-4), c(-3e-4, 1e-3)],
            vec![c(1e-5, 2e-6), c(3.3e-6, -1e-5)],
            z_ss,
        )
        .unwrap()
    }

    #[test]
    fn asymmetric_file_is_rejected() {
        let text = two_element().to_json().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["z_ss"][0][1] = serde_json::json!([0.1, 3.5]);
        let err = ImpedanceSet::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Reciprocity { row: 1, col: 0, .. }));
    }

    #[test]
    fn row_count_mismatch_is_rejected() {
        let text = two_element().to_json().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["n_ris"] = serde_json::json!(3);
        let err = ImpedanceSet::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn vector_length_mismatch_is_rejected() {
        let text = two_element().to_json().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["z_ts"].as_array_mut().unwrap().pop();
        assert!(matches!(
            ImpedanceSet::from_json(&v.to_string()).unwrap_err(),
            Error::Dimension(_)
        ));
    }

    #[test]
    fn unaware_copy_keeps_only_the_diagonal() {
        let s = two_element();
        let u = s.without_ris_coupling();
        assert_eq!(u.z_ss[(0, 1)], c(0.0, 0.0));
        assert_eq!(u.z_ss[(1, 0)], c(0.0, 0.0));
        assert_eq!(u.z_ss.diagonal(), s.z_ss.diagonal());
        assert_eq!(u.without_ris_coupling(), u);
    }
}
