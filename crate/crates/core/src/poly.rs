//! Complex polynomials and simultaneous root finding (Aberth–Ehrlich).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative backward error every returned root must satisfy.
pub const ROOT_CERTIFICATE: f64 = 1e-10;

const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("polynomial needs at least one nonzero coefficient of positive degree")]
    ZeroDegree,
    #[error("leading coefficient is zero")]
    ZeroLeading,
    #[error("{} of {} roots failed the backward-error certificate", failed.len(), roots.len())]
    NotConverged { failed: Vec<usize>, roots: Vec<Complex64> },
}

/// `a_0 + a_1 z + ... + a_n z^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, PolyError> {
        if coeffs.len() < 2 {
            return Err(PolyError::ZeroDegree);
        }
        if *coeffs.last().unwrap() == Complex64::new(0.0, 0.0) {
            return Err(PolyError::ZeroLeading);
        }
        Ok(ComplexPolynomial { coeffs })
    }

    /// Monic polynomial with the given roots. Factors are multiplied in Leja
    /// order, which keeps the expansion well conditioned.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in leja_order(roots) {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        ComplexPolynomial { coeffs: c }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn conj(&self) -> Self {
        ComplexPolynomial { coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    /// `|p(z)| / sum |a_k| |z|^k`.
    pub fn backward_error(&self, z: Complex64) -> f64 {
        newton_step(&self.coeffs, z).1
    }

    pub fn roots(&self) -> Result<Vec<Complex64>, PolyError> {
        poly_roots(self)
    }
}

/// Greedy Leja sequence: start at the largest point, then repeatedly take the
/// point maximizing the product of distances to those already chosen.
fn leja_order(points: &[Complex64]) -> Vec<Complex64> {
    let n = points.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let mut used = vec![false; n];
    let mut score = vec![0.0f64; n];
    let mut next = (0..n).max_by(|&i, &j| points[i].norm().total_cmp(&points[j].norm())).unwrap();
    for _ in 0..n {
        used[next] = true;
        let chosen = points[next];
        out.push(chosen);
        let mut best: Option<usize> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            score[i] += (points[i] - chosen).norm().ln();
            if best.is_none_or(|b| score[i] > score[b]) {
                best = Some(i);
            }
        }
        match best {
            Some(b) => next = b,
            None => break,
        }
    }
    out
}

/// Newton ratio `p/p'` and relative backward error at `z`. Points outside the
/// unit disk are evaluated through the reversed polynomial at `1/z`.
fn newton_step(a: &[Complex64], z: Complex64) -> (Complex64, f64) {
    let n = a.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    if z.norm_sqr() <= 1.0 {
        let az = z.norm();
        let mut p = a[n];
        let mut dp = zero;
        let mut s = a[n].norm();
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + a[k];
            s = s * az + a[k].norm();
        }
        let berr = if s > 0.0 { p.norm() / s } else { 0.0 };
        (p / dp, berr)
    } else {
        let w = z.inv();
        let aw = w.norm();
        let mut q = a[0];
        let mut dq = zero;
        let mut s = a[0].norm();
        for &ak in &a[1..] {
            dq = dq * w + q;
            q = q * w + ak;
            s = s * aw + ak.norm();
        }
        let berr = if s > 0.0 { q.norm() / s } else { 0.0 };
        (z * q / (q * n as f64 - w * dq), berr)
    }
}

/// Initial guesses on circles whose radii come from the upper convex hull of
/// `(k, log|a_k|)`.
fn initial_guesses(a: &[Complex64]) -> Vec<Complex64> {
    let n = a.len() - 1;
    let pts: Vec<(usize, f64)> =
        a.iter().enumerate().filter(|(_, c)| c.norm() > 0.0).map(|(k, c)| (k, c.norm().ln())).collect();
    let mut hull: Vec<(usize, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let (k1, l1) = hull[hull.len() - 2];
            let (k2, l2) = hull[hull.len() - 1];
            // drop the middle point unless it lies strictly above the chord
            let cross = (k2 as f64 - k1 as f64) * (p.1 - l1) - (l2 - l1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(n);
    for seg in hull.windows(2) {
        let (k1, l1) = seg[0];
        let (k2, l2) = seg[1];
        let m = k2 - k1;
        let radius = ((l1 - l2) / m as f64).exp();
        for j in 0..m {
            let theta = 2.0 * PI * (j as f64 / m as f64 + k1 as f64 / n as f64) + 0.4;
            guesses.push(Complex64::from_polar(radius, theta));
        }
    }
    guesses
}

/// All `n` roots with multiplicity. Each root satisfies the backward-error
/// certificate [`ROOT_CERTIFICATE`].
pub fn poly_roots(p: &ComplexPolynomial) -> Result<Vec<Complex64>, PolyError> {
    let zero = Complex64::new(0.0, 0.0);
    let leading_zeros = p.coeffs.iter().take_while(|&&c| c == zero).count();
    let a = &p.coeffs[leading_zeros..];
    let mut roots = vec![zero; leading_zeros];
    let n = a.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-a[0] / a[1]);
        return Ok(roots);
    }

    let mut z = initial_guesses(a);
    let mut done = vec![false; n];
    let tiny = 4.0 * f64::EPSILON;
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, berr) = newton_step(a, z[i]);
            if berr <= tiny {
                done[i] = true;
                continue;
            }
            let zi = z[i];
            let repulsion: Complex64 =
                z.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &zj)| (zi - zj).inv()).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[i] = zi - step;
                if step.norm() <= tiny * z[i].norm() {
                    done[i] = true;
                }
            }
            all_done &= done[i];
        }
        if all_done {
            break;
        }
    }

    let failed: Vec<usize> =
        (0..n).filter(|&i| !(newton_step(a, z[i]).1 <= ROOT_CERTIFICATE)).map(|i| i + leading_zeros).collect();
    roots.extend(z);
    if failed.is_empty() {
        Ok(roots)
    } else {
        Err(PolyError::NotConverged { failed, roots })
    }
}
