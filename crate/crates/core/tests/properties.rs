//! Property tests over randomly drawn parameters and vectors.

use std::sync::Arc;

use gtsfde::kernels::{
    l1_coefficients, soe_build, w2_value, wsgd_weights, WeightingFunction,
};
use gtsfde::krylov::{bicgstab, NoPreconditioner, SolveConfig};
use gtsfde::special::gamma;
use gtsfde::toeplitz::{GsfInverse, SkewCirculantFactor, SystemOperator, ToeplitzMatrix};
use proptest::prelude::*;

fn dense_mul(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(f64::MIN_POSITIVE, |s, v| s.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |d, (x, y)| d.max((x - y).abs())) / scale
}

fn operator(alpha: f64, p: f64, c0: f64, xi: Vec<f64>) -> SystemOperator {
    let n = xi.len();
    let uniform = xi.windows(2).all(|w| w[0] == w[1]);
    let w = Arc::new(wsgd_weights(alpha, n + 1).unwrap());
    SystemOperator::new(c0, 1.0 / (n + 1) as f64, p, xi, w, uniform).unwrap()
}

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wsgd_sign_pattern(alpha in 1.01f64..1.999, k in 3usize..200) {
        let w = wsgd_weights(alpha, k).unwrap().w;
        prop_assert!(w[0] > 0.0);
        prop_assert!(w[1] < 0.0);
        prop_assert!(w[3..].iter().all(|&x| x > 0.0));
        prop_assert!(w[0] + w[2] >= 0.0);
        let mut partial = w[0] + w[1];
        for &x in &w[2..] {
            partial += x;
            prop_assert!(partial < 0.0);
        }
    }

    #[test]
    fn partial_sums_approach_zero_from_below(alpha in 1.01f64..1.999) {
        let w = wsgd_weights(alpha, 400).unwrap().w;
        let sums: Vec<f64> = w.iter().scan(0.0, |s, x| { *s += x; Some(*s) }).collect();
        for pair in sums[2..].windows(2) {
            prop_assert!(pair[1] >= pair[0]);
        }
    }

    #[test]
    fn w2_matches_weight_sequence(alpha in 1.0001f64..=2.0) {
        let direct = w2_value(alpha).unwrap();
        let seq = wsgd_weights(alpha, 2).unwrap().w[2];
        prop_assert!((direct - seq).abs() <= 1e-14);
    }

    #[test]
    fn l1_decreasing_with_lower_bound(g in 0.05f64..0.95, b in 0.0f64..4.0, tau in 1e-3f64..0.2, m in 2usize..60) {
        let lam = WeightingFunction::tempered(b);
        let c = l1_coefficients(g, &lam, tau, m).unwrap().c;
        for l in 0..m {
            if l + 1 < m {
                prop_assert!(c[l] > c[l + 1]);
            }
            let t_mid = (l as f64 + 0.5) * tau;
            let t_next = (l as f64 + 1.0) * tau;
            let bound = (-b * t_mid).exp() / (gamma(1.0 - g) * t_next.powf(g));
            prop_assert!(c[l] > bound, "c[{}] = {} <= {}", l, c[l], bound);
        }
    }

    #[test]
    fn toeplitz_matvec_matches_dense(n in 1usize..=64, col in vec_strategy(64), row in vec_strategy(64), v in vec_strategy(64)) {
        let mut row = row[..n].to_vec();
        row[0] = col[0];
        let t = ToeplitzMatrix::new(col[..n].to_vec(), row).unwrap();
        let v = &v[..n];
        prop_assert!(max_rel(&t.matvec(v).unwrap(), &dense_mul(&t.to_dense(), v)) <= 1e-12);
    }

    #[test]
    fn skew_circulant_inverse_roundtrip(n in 3usize..=64, alpha in 1.05f64..2.0, p in 0.0f64..=1.0, v in vec_strategy(64)) {
        let op = operator(alpha, p, 3.0, vec![1.3; n]);
        let sk = SkewCirculantFactor::build(&op).unwrap();
        let v = &v[..n];
        prop_assert!(max_rel(&sk.solve(&sk.apply_forward(v)), v) <= 1e-11);
    }

    #[test]
    fn gsf_inverts_operator(n in 3usize..=64, alpha in 1.05f64..2.0, p in 0.0f64..=1.0, v in vec_strategy(64)) {
        let op = operator(alpha, p, 2.0, vec![0.8; n]);
        let g = GsfInverse::build(&op).unwrap();
        let x = &v[..n];
        let mx = op.apply(x).unwrap();
        prop_assert!(max_rel(&g.apply(&mx).unwrap(), x) <= 1e-10);
    }

    #[test]
    fn preconditioned_and_plain_solutions_agree(n in 3usize..=48, alpha in 1.1f64..2.0, p in 0.0f64..=1.0, v in vec_strategy(48)) {
        let xi: Vec<f64> = (0..n).map(|i| 0.5 + (i as f64 * 0.37).sin().abs()).collect();
        let op = operator(alpha, p, 4.0, xi);
        let b = &v[..n];
        prop_assume!(b.iter().any(|x| x.abs() > 1e-3));
        let cfg = SolveConfig::default();
        let plain = bicgstab(&op, &NoPreconditioner, b, None, &cfg).unwrap();
        let sk = SkewCirculantFactor::build(&op).unwrap();
        let pre = bicgstab(&op, &sk, b, None, &cfg).unwrap();
        prop_assert!(plain.converged && pre.converged);
        prop_assert!(max_rel(&plain.x, &pre.x) <= 1e-9);
    }

    #[test]
    fn exact_inverse_preconditioner_converges_fast(n in 3usize..=64, alpha in 1.05f64..2.0, p in 0.0f64..=1.0, v in vec_strategy(64)) {
        let op = operator(alpha, p, 2.5, vec![1.1; n]);
        let g = GsfInverse::build(&op).unwrap();
        let b = &v[..n];
        prop_assume!(b.iter().any(|x| x.abs() > 1e-3));
        let res = bicgstab(&op, &g, b, None, &SolveConfig::default()).unwrap();
        prop_assert!(res.converged);
        prop_assert!(res.iterations <= 2.0, "iterations = {}", res.iterations);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn soe_certified_on_dense_sample(g in 0.05f64..0.95, log_delta in -4.0f64..-1.0) {
        let delta = 10f64.powf(log_delta);
        let eps = 1e-8;
        let soe = soe_build(g, delta, 1.0, eps).unwrap();
        let k = 20_000;
        let ratio = 1.0 / delta;
        let worst = (0..k)
            .map(|i| delta * ratio.powf(i as f64 / (k - 1) as f64))
            .map(|t| (soe.eval(t) - t.powf(-g)).abs())
            .fold(0.0, f64::max);
        prop_assert!(worst < eps);
        prop_assert!(soe.n_exp() < 80);
    }
}
