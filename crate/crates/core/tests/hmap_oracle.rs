//! The quadrature gate: the ordered-shuffle enumeration and the H map are
//! validated against numerically integrated iterated integrals of the
//! signature path, which serve as ground truth. Also covers the Chen
//! multiplicativity of H, group-likeness of the assembled element over W,
//! and admissibility of the W norm.

use sigkit::sample;
use sigkit::{
    h_map, iterated_integral_oracle, j_signature, outer_block, profiles, w_level_norm, HLevel,
    PiecewiseLinearPath, SignaturePath,
};

/// All profiles with n parts, entries in 1..=cap, total ≤ max_total.
fn gate_profiles(n: usize, cap: usize, max_total: usize) -> Vec<Vec<usize>> {
    profiles(cap, n)
        .into_iter()
        .filter(|p| p.iter().sum::<usize>() <= max_total)
        .collect()
}

fn h_for(x: &PiecewiseLinearPath, profile: &[usize], s: f64, t: f64) -> HLevel {
    let total: usize = profile.iter().sum();
    let sp = SignaturePath::new(x.clone(), total).unwrap();
    h_map(profile, &sp.at(s).unwrap(), &sp.increment(s, t).unwrap()).unwrap()
}

/// Gate required by the enumeration: for all n ≤ 3, i_k ≤ 3, d ≤ 2, the
/// H map built on the ordered shuffles reproduces the quadrature oracle
/// to 1e−6 at q = 64.
#[test]
fn h_matches_quadrature_oracle() {
    for dim in [1usize, 2] {
        let mut rng = sample::seeded(2024 + dim as u64);
        for case in 0..3 {
            let x = sample::random_path(&mut rng, dim, 4);
            let t0 = x.start_time();
            let t1 = x.end_time();
            let (s, t) = (t0 + 0.27 * (t1 - t0), t0 + 0.91 * (t1 - t0));
            for n in 1..=3usize {
                if n == 3 && case > 0 {
                    continue; // depth-3 integrals are slow; spot-check one path
                }
                for profile in gate_profiles(n, 3, 9) {
                    let h = h_for(&x, &profile, s, t);
                    let oracle = iterated_integral_oracle(&x, &profile, s, t, 64).unwrap();
                    let err = h.max_abs_diff(&oracle).unwrap();
                    assert!(
                        err < 1e-6,
                        "d={dim} case={case} profile {profile:?}: residual {err:.3e}"
                    );
                }
            }
        }
    }
}

/// The oracle residual drops by at least 3× when the panel count doubles.
/// The rule is exact on the lowest-degree profiles, so the decay is
/// measured on profiles whose integrands exceed the fitted degree
/// ((2,3) and (3,2) are the smallest such).
#[test]
fn oracle_residual_decreases_with_panel_count() {
    let mut rng = sample::seeded(77);
    let mut worst = [0.0f64; 2];
    for _ in 0..6 {
        let x = sample::random_path(&mut rng, 2, 3);
        let (s, t) = (x.start_time(), x.end_time());
        for profile in [vec![2usize, 3], vec![3, 2]] {
            let h = h_for(&x, &profile, s, t);
            for (slot, q) in [(0usize, 8usize), (1, 16)] {
                let oracle = iterated_integral_oracle(&x, &profile, s, t, q).unwrap();
                worst[slot] = worst[slot].max(h.max_abs_diff(&oracle).unwrap());
            }
        }
    }
    assert!(worst[0] > 1e-13, "no quadrature signal at q=8");
    assert!(
        worst[1] <= worst[0] / 3.0,
        "doubling q shrank the residual only from {:.3e} to {:.3e}",
        worst[0],
        worst[1]
    );
}

/// Chen for H: Σ_{j=0}^{n} H_{i_1..i_j}(S_{0,s}, S_{s,u}) ⊗
/// H_{i_{j+1}..i_n}(S_{0,u}, S_{u,t}) = H_{i_1..i_n}(S_{0,s}, S_{s,t}).
#[test]
fn h_is_multiplicative() {
    let mut rng = sample::seeded(4242);
    for _ in 0..4 {
        let x = sample::random_path(&mut rng, 2, 4);
        let t0 = x.start_time();
        let t1 = x.end_time();
        let (s, u, t) = (
            t0 + 0.2 * (t1 - t0),
            t0 + 0.5 * (t1 - t0),
            t0 + 0.85 * (t1 - t0),
        );
        let mut cases = gate_profiles(2, 2, 4);
        cases.push(vec![1, 2, 1]);
        cases.push(vec![2, 1, 2]);
        for profile in cases {
            let n = profile.len();
            let total: usize = profile.iter().sum();
            let sp = SignaturePath::new(x.clone(), total).unwrap();
            let x_s = sp.at(s).unwrap();
            let x_u = sp.at(u).unwrap();
            let y_su = sp.increment(s, u).unwrap();
            let y_ut = sp.increment(u, t).unwrap();
            let y_st = sp.increment(s, t).unwrap();

            let rhs = h_map(&profile, &x_s, &y_st).unwrap();
            let mut lhs = vec![0.0; rhs.block().len()];
            for j in 0..=n {
                let left = h_map(&profile[..j], &x_s, &y_su).unwrap();
                let right = h_map(&profile[j..], &x_u, &y_ut).unwrap();
                for (acc, v) in lhs.iter_mut().zip(outer_block(left.block(), right.block())) {
                    *acc += v;
                }
            }
            let err = lhs
                .iter()
                .zip(rhs.block())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-8, "profile {profile:?}: residual {err:.3e}");
        }
    }
}

/// The assembled element over W passes the shuffle criterion in the
/// W alphabet.
#[test]
fn assembled_element_is_group_like() {
    // one segment
    let seg = PiecewiseLinearPath::segment(vec![0.0, 0.0], vec![0.8, -0.5]).unwrap();
    let (ok, report) = sigkit::check_j_group_like(&seg, 2, 2, 1.0, 1e-8).unwrap();
    assert!(ok, "one-segment residual {:.3e}", report.worst_residual);

    // random 3-segment paths
    let mut rng = sample::seeded(99);
    for _ in 0..3 {
        let x = sample::random_path(&mut rng, 2, 3);
        let (ok, report) = sigkit::check_j_group_like(&x, 2, 2, x.end_time(), 1e-7).unwrap();
        assert!(ok, "residual {:.3e}", report.worst_residual);
    }

    // outer level 3 spot check
    let x = sample::random_path(&mut rng, 2, 2);
    let (ok, report) = sigkit::check_j_group_like(&x, 3, 2, x.end_time(), 1e-7).unwrap();
    assert!(ok, "n=3 residual {:.3e}", report.worst_residual);
}

/// Subsignatures of the assembled W element are multiplicative: packing the
/// H families over [s,u], [u,t], and [s,t] satisfies Chen over W.
#[test]
fn j_signature_chen_over_w() {
    let mut rng = sample::seeded(123);
    let x = sample::random_path(&mut rng, 2, 3);
    let t0 = x.start_time();
    let t1 = x.end_time();
    let (s, u, t) = (t0, t0 + 0.4 * (t1 - t0), t1);
    let a = j_signature(&x, 2, 2, s, u).unwrap().as_truncated().unwrap();
    let b = j_signature(&x, 2, 2, u, t).unwrap().as_truncated().unwrap();
    let c = j_signature(&x, 2, 2, s, t).unwrap().as_truncated().unwrap();
    let err = sigkit::rel_residual(&a.mul(&b).unwrap(), &c).unwrap();
    assert!(err < 1e-10, "residual {err:.3e}");
}

/// Admissibility of the W norm: the packed product never exceeds the
/// product of the packed norms.
#[test]
fn w_norm_is_admissible() {
    use rand::Rng;
    let (dim, inner) = (2usize, 2usize);
    let d_w = 6usize;
    let mut rng = sample::seeded(31415);
    for _ in 0..20 {
        let xi: Vec<f64> = (0..d_w).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let eta: Vec<f64> = (0..d_w * d_w)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let prod = outer_block(&xi, &eta);
        let lhs = w_level_norm(dim, inner, 3, &prod).unwrap();
        let rhs =
            w_level_norm(dim, inner, 1, &xi).unwrap() * w_level_norm(dim, inner, 2, &eta).unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-12), "lhs {lhs} rhs {rhs}");
    }

    // and on genuinely packed signature data
    let x = sample::random_path(&mut rng, dim, 3);
    let w = j_signature(&x, 2, inner, x.start_time(), x.end_time()).unwrap();
    let b1 = w.block(1).unwrap().to_vec();
    let prod = outer_block(&b1, &b1);
    let lhs = w_level_norm(dim, inner, 2, &prod).unwrap();
    let rhs = w.w_norm(1).unwrap().powi(2);
    assert!(lhs <= rhs * (1.0 + 1e-12));
}
