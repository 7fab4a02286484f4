use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relkern::closed_form::{rank_profile, ClosedFormParams};
use relkern::encoding::{cost, ridge_primal, verify_kernel_equivalence, weight_norm_cost, FourHotMap};
use relkern::{build_training_set, dual_solve, KernelParams, Ridge, TaskSpec};

fn task() -> impl Strategy<Value = TaskSpec> {
    prop_oneof![
        (3usize..=10).prop_map(|n| TaskSpec::ti(n).unwrap()),
        (3usize..=10).prop_map(|n| TaskSpec::tp(n).unwrap()),
        (5usize..=10)
            .prop_flat_map(|n| (Just(n), 1usize..=n - 2))
            .prop_flat_map(|(n, q)| (Just(n), Just(q), q + 2..=n))
            .prop_map(|(n, q, p)| TaskSpec::ti_exc(n, p, q).unwrap()),
    ]
}

fn params() -> impl Strategy<Value = KernelParams> {
    (0.1f64..3.0, 0.0f64..=1.0, 0.0f64..2.0, prop_oneof![Just(None), (0.05f64..50.0).prop_map(Some)])
        .prop_map(|(ds, frac, kd, c)| {
            let c = c.map_or(Ridge::Infinite, |c| Ridge::new(c).unwrap());
            KernelParams::new(ds + kd, kd + frac * ds / 2.0, kd, c).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn gram_identity(spec in task(), params in params()) {
        let map = FourHotMap::new(spec.n(), &params).unwrap();
        let data = build_training_set(&spec);
        prop_assert!(verify_kernel_equivalence(&map, &params, &data) <= 1e-12);
    }

    #[test]
    fn primal_matches_dual(spec in task(), params in params()) {
        let data = build_training_set(&spec);
        let map = FourHotMap::new(spec.n(), &params).unwrap();
        let dec = ridge_primal(&map, &data, params.c()).unwrap();
        let sol = dual_solve(&params, &data).unwrap();
        prop_assert!(dec.b.abs() <= 1e-10, "bias {}", dec.b);
        prop_assert!(dec.slot_asymmetry() <= 1e-10);
        for p in spec.all_pairs() {
            let (a, b) = (dec.predict(p), sol.predict(p));
            prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{} {}: {} vs {}", spec, p, a, b);
        }
    }
}

#[test]
fn decomposition_reproduces_closed_form_ranks() {
    let spec = TaskSpec::ti_exc(9, 6, 4).unwrap();
    let params = KernelParams::from_alpha(0.2, 0.0).unwrap();
    assert!(params.c().is_infinite());
    let dec = ridge_primal(&FourHotMap::new(9, &params).unwrap(), &build_training_set(&spec), params.c()).unwrap();
    let prof = rank_profile(&ClosedFormParams::new(spec, 0.2, 0.0).unwrap()).unwrap();
    // Ranks are defined up to a common shift; compare differences.
    for j in 1..9 {
        let a = dec.r[j - 1] - dec.r[j];
        let b = prof.ranks[j - 1] - prof.ranks[j];
        assert!((a - b).abs() < 1e-8, "j={j}: {a} vs {b}");
    }
}

/// Constraint matrix of `f(j,k) = r_j - r_k + t_jk` on the training pairs, over
/// the unknowns `(r, t)`.
fn readout_constraints(spec: &TaskSpec) -> DMatrix<f64> {
    let n = spec.n();
    let data = build_training_set(spec);
    let mut a = DMatrix::zeros(data.len(), n + n * n);
    for (row, e) in data.examples.iter().enumerate() {
        a[(row, e.pair.j - 1)] += 1.0;
        a[(row, e.pair.k - 1)] -= 1.0;
        a[(row, n + (e.pair.j - 1) * n + e.pair.k - 1)] = 1.0;
    }
    a
}

fn null_space_projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    let pinv = a.clone().pseudo_inverse(1e-12).unwrap();
    DMatrix::identity(a.ncols(), a.ncols()) - pinv * a
}

#[test]
fn min_norm_readout_minimizes_weight_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for spec in [
        TaskSpec::ti(6).unwrap(),
        TaskSpec::tp(5).unwrap(),
        TaskSpec::ti_exc(9, 6, 4).unwrap(),
        TaskSpec::ti_exc(7, 5, 2).unwrap(),
    ] {
        let n = spec.n();
        let proj = null_space_projector(&readout_constraints(&spec));
        for &alpha in &[0.1, 0.3, 0.5, 0.8] {
            let params = KernelParams::from_alpha(alpha, 0.0).unwrap();
            let map = FourHotMap::new(n, &params).unwrap();
            let dec = ridge_primal(&map, &build_training_set(&spec), Ridge::Infinite).unwrap();
            let base = weight_norm_cost(&dec.r, &dec.t, alpha).unwrap();
            // delta_s = 1 in this gauge, and the bias weight is zero.
            assert!((base - dec.weight_norm_sq).abs() <= 1e-8 * base.max(1.0));
            let x0: Vec<f64> = dec.r.iter().chain(&dec.t).copied().collect();
            for _ in 0..50 {
                let v = DVector::from_fn(n + n * n, |_, _| rng.random::<f64>() - 0.5);
                let dir = &proj * v;
                for eps in [1e-3, 1e-1] {
                    let x: Vec<f64> = x0.iter().zip(dir.iter()).map(|(a, d)| a + eps * d).collect();
                    let c = weight_norm_cost(&x[..n], &x[n..], alpha).unwrap();
                    assert!(c >= base - 1e-10, "{spec} alpha={alpha}: {c} < {base}");
                }
            }
        }
    }
}

/// Records how the literal cost behaves on the same perturbations. It differs
/// from the weight cost only by `2/(1-alpha) |r|^2`, so its minimizer over the
/// interpolating readouts is generally a different point.
#[test]
fn literal_cost_relation() {
    let spec = TaskSpec::ti_exc(9, 6, 4).unwrap();
    let alpha = 0.3;
    let params = KernelParams::from_alpha(alpha, 0.0).unwrap();
    let dec = ridge_primal(&FourHotMap::new(9, &params).unwrap(), &build_training_set(&spec), Ridge::Infinite).unwrap();
    let c = cost(&dec.r, &dec.t, alpha).unwrap();
    let w = weight_norm_cost(&dec.r, &dec.t, alpha).unwrap();
    let rr: f64 = dec.r.iter().map(|x| x * x).sum();
    assert!((w - c - 2.0 / (1.0 - alpha) * rr).abs() < 1e-10);
}
