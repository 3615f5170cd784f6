//! Independent reference implementations used only by tests.
//!
//! Nothing here calls the LU factorization, the quadrature module or the
//! gradient module of the crate under test.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use risopt::channel::{objective, Link, RisLoad};
use risopt::em::{Dipole, FREE_SPACE_IMPEDANCE};

pub type C = Complex64;
pub type Dense = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Gauss-Jordan inverse with full pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a.clone();
    let mut inv: Dense = (0..n)
        .map(|r| (0..n).map(|k| if r == k { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, -1.0);
        for r in k..n {
            for q in k..n {
                if m[r][q].norm() > best {
                    best = m[r][q].norm();
                    pr = r;
                    pc = q;
                }
            }
        }
        m.swap(k, pr);
        inv.swap(k, pr);
        if pc != k {
            for row in m.iter_mut() {
                row.swap(k, pc);
            }
            col_perm.swap(k, pc);
        }
        let p = m[k][k];
        for q in 0..n {
            m[k][q] /= p;
            inv[k][q] /= p;
        }
        for r in 0..n {
            if r != k {
                let f = m[r][k];
                for q in 0..n {
                    let (mk, ik) = (m[k][q], inv[k][q]);
                    m[r][q] -= f * mk;
                    inv[r][q] -= f * ik;
                }
            }
        }
    }
    // undo the column permutation: rows of the inverse follow it
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for (k, &orig) in col_perm.iter().enumerate() {
        out[orig] = inv[k].clone();
    }
    out
}

pub fn matvec(a: &Dense, x: &[C]) -> Vec<C> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn vecmat(x: &[C], a: &Dense) -> Vec<C> {
    let n = a.len();
    (0..n).map(|q| (0..n).map(|r| x[r] * a[r][q]).sum()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|q| (0..n).map(|k| a[r][k] * b[k][q]).sum()).collect())
        .collect()
}

pub fn outer(col: &[C], row: &[C]) -> Dense {
    col.iter().map(|a| row.iter().map(|b| a * b).collect()).collect()
}

pub fn bilinear(x: &[C], y: &[C]) -> C {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn zse_dense(link: &Link, load: &RisLoad) -> Dense {
    let n = link.n_ris();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|q| {
                    let mut z = link.impedances.z_ss[(r, q)];
                    if r == q {
                        z += c(load.r0, load.x[r]);
                    }
                    z
                })
                .collect()
        })
        .collect()
}

/// Everything the channel module computes, by explicit inversion.
pub struct Naive {
    pub phi_tt: C,
    pub phi_rr: C,
    pub phi_tr: C,
    pub h: C,
    pub h_app: C,
    pub e_diag: Vec<C>,
    pub objective: f64,
}

pub fn naive(link: &Link, load: &RisLoad) -> Naive {
    let s = &link.impedances;
    let zi = inverse(&zse_dense(link, load));
    let z_st = s.z_ts.clone();
    let z_sr = s.z_rs.clone();
    let phi = |row: &[C], col: &[C], z: C| z - bilinear(row, &matvec(&zi, col));
    let phi_tt = phi(&s.z_ts, &z_st, s.z_tt);
    let phi_rr = phi(&s.z_rs, &z_sr, s.z_rr);
    let phi_tr = phi(&s.z_ts, &z_sr, s.z_tr);
    let phi_rt = phi(&s.z_rs, &z_st, s.z_tr);
    let zt = link.z_g + phi_tt;
    let zr = link.z_l + phi_rr;
    let a = (zt * zr - phi_tr * phi_tr).inv();
    let h = link.z_l * phi_tr * a;
    let y0 = link.z_l / ((link.z_l + s.z_rr) * (link.z_g + s.z_tt));

    // E = z_L a Z⁻¹ (c1 z_SR z_TS − aφ z̃_R z_ST z_TS − aφ z̃_T z_SR z_RS) Z⁻¹
    let n = s.n_ris();
    let t1 = outer(&z_sr, &s.z_ts);
    let t2 = outer(&z_st, &s.z_ts);
    let t3 = outer(&z_sr, &s.z_rs);
    let c1 = 2.0 * a * phi_tr * phi_tr + 1.0;
    let mid: Dense = (0..n)
        .map(|r| {
            (0..n)
                .map(|q| c1 * t1[r][q] - a * phi_tr * zr * t2[r][q] - a * phi_tr * zt * t3[r][q])
                .collect()
        })
        .collect();
    let e = matmul(&matmul(&zi, &mid), &zi);
    let e_diag = (0..n).map(|i| link.z_l * a * e[i][i]).collect();
    Naive {
        phi_tt,
        phi_rr,
        phi_tr,
        h,
        h_app: y0 * phi_rt,
        e_diag,
        objective: h.norm_sqr(),
    }
}

pub fn rel(a: C, b: C) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

pub fn rel_vec(a: &[C], b: &[C]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let s: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Fourth-order central differences of the objective, one coordinate at a
/// time, with step `max(1e-5·|x|, 1e-4)` Ohm.
pub fn fd_gradient(link: &Link, load: &RisLoad) -> Vec<f64> {
    (0..load.len())
        .map(|s| {
            let h = (1e-5 * load.x[s].abs()).max(1e-4);
            let f = |d: f64| {
                let mut x = load.x.clone();
                x[s] += d;
                objective(link, &load.with_reactances(x)).unwrap()
            };
            (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
        })
        .collect()
}

/// `max_s |g(s) − fd(s)| / (|fd(s)| + 1e-3·max|fd|)`.
pub fn fd_error(grad: &[f64], fd: &[f64]) -> f64 {
    let floor = 1e-3 * fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    grad.iter()
        .zip(fd)
        .map(|(g, f)| (g - f).abs() / (f.abs() + floor))
        .fold(0.0, f64::max)
}

fn simpson<F: Fn(f64) -> C>(f: &F, a: f64, b: f64, fa: C, fm: C, fb: C, whole: C, tol: f64, depth: u32) -> C {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.norm() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> C>(f: &F, a: f64, b: f64, tol: f64) -> C {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Induced-EMF reaction integral of `src` on `obs` by adaptive Simpson,
/// `obs` taken as the observer regardless of argument order.
pub fn emf_oracle(src: &Dipole, obs: &Dipole, wavelength: f64, tol: f64) -> C {
    let k = 2.0 * PI / wavelength;
    let hp = src.length / 2.0;
    let hq = obs.length / 2.0;
    let rho = (obs.center[0] - src.center[0])
        .hypot(obs.center[1] - src.center[1])
        .max(src.radius.max(obs.radius));
    let dz0 = obs.center[2] - src.center[2];
    let f = |z: f64| {
        let dz = dz0 + z;
        let g = |d: f64| {
            let r = (rho * rho + d * d).sqrt();
            C::from_polar(1.0 / r, -k * r)
        };
        (g(dz - hp) + g(dz + hp) - 2.0 * (k * hp).cos() * g(dz)) * (k * (hq - z.abs())).sin()
    };
    let mut cuts = vec![-hq, 0.0, hq];
    for b in [-dz0, -dz0 - hp, -dz0 + hp] {
        if b > -hq && b < hq {
            cuts.push(b);
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let integral: C = cuts.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], tol)).sum();
    integral * c(0.0, FREE_SPACE_IMPEDANCE / (4.0 * PI)) / ((k * hp).sin() * (k * hq).sin())
}

/// Random link with `n` RIS elements and a direct path about as strong as
/// the path through the surface.
pub fn link_with_direct_path<R: rand::Rng>(rng: &mut R, n: usize) -> Link {
    let mut link = risopt::synthetic::random_link(rng, n);
    link.impedances.z_tr = C::from_polar(rng.gen_range(1e-10..1e-8), rng.gen_range(-PI..PI));
    link
}

/// Whether a real symmetric matrix is positive definite (Cholesky succeeds).
pub fn positive_definite(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

/// Real part of the full (TX, RX, RIS) impedance matrix.
pub fn network_resistance(link: &Link) -> Vec<Vec<f64>> {
    let s = &link.impedances;
    let n = s.n_ris();
    let entry = |r: usize, q: usize| -> C {
        match (r, q) {
            (0, 0) => s.z_tt,
            (1, 1) => s.z_rr,
            (0, 1) | (1, 0) => s.z_tr,
            (0, k) | (k, 0) => s.z_ts[k - 2],
            (1, k) | (k, 1) => s.z_rs[k - 2],
            (r, q) => s.z_ss[(r - 2, q - 2)],
        }
    };
    (0..n + 2).map(|r| (0..n + 2).map(|q| entry(r, q).re).collect()).collect()
}
