//! Special functions and quadrature rules shared by every formula in the
//! crate: the Gamma function, Gauss rules built with Golub–Welsch, and an
//! adaptive Gauss–Kronrod integrator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Γ(x) for real `x`.
///
/// All closed-form expressions (L1 coefficients, manufactured sources,
/// SOE weights) go through this one function so that Γ-ratios are
/// evaluated consistently.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Nodes and weights of an `n`-point Gauss rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Jacobi rule for the weight `(1 - x)^a (1 + x)^b` on `[-1, 1]`.
///
/// Requires `a, b > -1`. Nodes are returned in ascending order.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> GaussRule {
    assert!(n >= 1, "Gauss rule needs at least one node");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        jac[(k, k)] = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / denom
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let s = 2.0 * j + ab;
            let beta = 4.0 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0));
            let off = beta.sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> GaussRule {
    gauss_jacobi(n, 0.0, 0.0)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K15: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WEIGHTS_G7: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_WEIGHTS_K15[7] * fc;
    let mut gauss = GK_WEIGHTS_G7[3] * fc;
    for i in 0..7 {
        let dx = r * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kron += GK_WEIGHTS_K15[i] * s;
        if i % 2 == 1 {
            gauss += GK_WEIGHTS_G7[i / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// Adaptive 15-point Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Intervals are bisected until every leaf satisfies the local share of
/// `max(rel_tol * |I|, abs_tol)`. Integrable endpoint singularities such as
/// `θ^{-γ}` converge through repeated subdivision toward the endpoint.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 4000;
    let (i0, e0) = gk15(&f, a, b);
    // Each entry: (lo, hi, integral, error estimate).
    let mut parts = vec![(a, b, i0, e0)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let tol = (rel_tol * total.abs()).max(abs_tol);
        if err <= tol {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailed { a, b, estimate: err });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::QuadratureFailed { a, b, estimate: err });
        }
        let (il, el) = gk15(&f, lo, mid);
        let (ir, er) = gk15(&f, mid, hi);
        parts.push((lo, mid, il, el));
        parts.push((mid, hi, ir, er));
    }
}

/// Generalized binomial coefficient `C(q, k)` for real `q`.
pub fn binomial(q: f64, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (q - i as f64) / (i as f64 + 1.0);
    }
    c
}
