//! Root finding for small floating polynomials via the companion matrix.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::polynomial::ComplexPolynomial;

/// Relative distance under which two denominator roots are identified.
pub const ROOT_DISTINCTNESS_TOL: f64 = 1e-9;

/// Relative coefficient cleanup applied before locating zeros of a form.
pub const COEFF_CLEANUP_TOL: f64 = 1e-12;

/// Relative distance under which computed zeros are merged into one
/// multiple zero. Perturbed multiple roots spread like `eps^(1/m)`, so
/// this is looser than [`ROOT_DISTINCTNESS_TOL`].
pub const ZERO_CLUSTER_TOL: f64 = 1e-6;

/// All complex roots with multiplicity, unordered.
///
/// Polynomials of degree up to ~16 are supported. Roots of a monomial
/// factor `z^k` are returned as exact zeros.
pub fn roots(p: &ComplexPolynomial) -> Vec<Complex64> {
    let Some(deg) = p.degree() else {
        return Vec::new();
    };
    let coeffs = p.coeffs();
    let zero_mult = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let mut out = vec![Complex64::new(0.0, 0.0); zero_mult];
    let reduced = &coeffs[zero_mult..];
    let n = deg - zero_mult;
    if n == 0 {
        return out;
    }
    let lead = reduced[n];
    if n == 1 {
        out.push(-reduced[0] / lead);
        return out;
    }
    let mut companion = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -reduced[i] / lead;
    }
    let eig = Schur::try_new(companion, 1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect::<Vec<_>>())
        .unwrap_or_else(|| durand_kerner(reduced));
    let shifted = ComplexPolynomial::from_slice(reduced);
    out.extend(eig.into_iter().map(|r| polish(&shifted, r)));
    out
}

/// Newton polishing; keeps the input if an iterate does not improve the residual.
fn polish(p: &ComplexPolynomial, mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (v, dv) = p.eval_with_derivative(z);
        if v.norm() == 0.0 || dv.norm() == 0.0 {
            break;
        }
        let next = z - v / dv;
        if !next.is_finite() || p.eval(&next).norm() >= v.norm() {
            break;
        }
        z = next;
    }
    z
}

fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let p = ComplexPolynomial::from_slice(&monic);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = p.eval(&z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Groups nearby roots into `(center, multiplicity)` pairs.
///
/// Two roots join a cluster when they are within `rel_tol · max(1, |r|)`
/// of each other (single linkage). Cluster centers are member means, which
/// are accurate for perturbed multiple roots.
pub fn cluster(roots: &[Complex64], rel_tol: f64) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= rel_tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, members)) => members.push(roots[i]),
            None => groups.push((r, vec![roots[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let m = members.len();
            let center = members.iter().sum::<Complex64>() / m as f64;
            (center, m)
        })
        .collect()
}

/// Distinct zeros of `p` with multiplicities, after coefficient cleanup.
pub fn zeros_with_multiplicity(p: &ComplexPolynomial) -> Vec<(Complex64, usize)> {
    let cleaned = p.cleaned(COEFF_CLEANUP_TOL);
    let mut out: Vec<(Complex64, usize)> = cluster(&roots(&cleaned), ZERO_CLUSTER_TOL)
        .into_iter()
        .map(|(center, m)| {
            if m == 1 || center.norm() == 0.0 {
                return (center, m);
            }
            // A root of multiplicity m is a simple root of the (m-1)-th derivative.
            let mut d = cleaned.clone();
            for _ in 1..m {
                d = d.derivative();
            }
            (polish(&d, center), m)
        })
        .collect();
    out.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap()
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    out
}
