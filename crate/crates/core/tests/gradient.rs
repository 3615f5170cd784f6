mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use risopt::channel::transfer_function;
use risopt::gradient::gradient;
use risopt::linalg::CMatrix;
use risopt::synthetic::{random_link, random_load};
use risopt::{Bounds, ImpedanceSet, Link, MultCounter, RisLoad};

fn analytic(link: &Link, load: &RisLoad) -> Vec<f64> {
    let eval = transfer_function(link, load).unwrap();
    gradient(&eval, link, &mut MultCounter::default()).grad
}

#[test]
fn matches_finite_differences() {
    let bounds = Bounds::symmetric(1e4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for r0 in [1.0, 1e-2, 1e-3] {
        for k in 0..10 {
            let link = random_link(&mut rng, 8);
            let load = random_load(&mut rng, 8, r0, bounds);
            let err = fd_error(&analytic(&link, &load), &fd_gradient(&link, &load));
            assert!(err < 1e-5, "r0={r0} instance {k}: {err:e}");
        }
    }
}

#[test]
fn matches_finite_differences_with_direct_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let link = link_with_direct_path(&mut rng, 6);
        let load = random_load(&mut rng, 6, 1e-2, Bounds::symmetric(1e4).unwrap());
        let err = fd_error(&analytic(&link, &load), &fd_gradient(&link, &load));
        assert!(err < 1e-5, "{err:e}");
    }
}

fn permuted(link: &Link, load: &RisLoad, perm: &[usize]) -> (Link, RisLoad) {
    let s = &link.impedances;
    let n = perm.len();
    let z_ss = CMatrix::from_fn(n, |r, q| s.z_ss[(perm[r], perm[q])]);
    let iset = ImpedanceSet::new(
        s.z_tt,
        s.z_rr,
        s.z_tr,
        perm.iter().map(|&p| s.z_ts[p]).collect(),
        perm.iter().map(|&p| s.z_rs[p]).collect(),
        z_ss,
    )
    .unwrap();
    let x = perm.iter().map(|&p| load.x[p]).collect();
    (
        Link::new(iset, link.z_g, link.z_l),
        RisLoad::new(load.r0, x, load.bounds).unwrap(),
    )
}

#[test]
fn relabeling_elements_permutes_the_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let link = random_link(&mut rng, 7);
    let load = random_load(&mut rng, 7, 1e-2, Bounds::symmetric(1e4).unwrap());
    let mut perm: Vec<usize> = (0..7).collect();
    perm.shuffle(&mut rng);
    let g = analytic(&link, &load);
    let (pl, px) = permuted(&link, &load, &perm);
    let gp = analytic(&pl, &px);
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (k, &p) in perm.iter().enumerate() {
        assert!((gp[k] - g[p]).abs() <= 1e-10 * scale);
    }
}

#[test]
fn e_diagonal_matches_dense_oracle_for_three_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let link = link_with_direct_path(&mut rng, 3);
    let load = random_load(&mut rng, 3, 1e-3, Bounds::symmetric(1e4).unwrap());
    let eval = transfer_function(&link, &load).unwrap();
    let g = gradient(&eval, &link, &mut MultCounter::default());
    assert!(rel_vec(&g.e_diag, &naive(&link, &load).e_diag) < 1e-12);
}
