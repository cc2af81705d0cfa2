//! Real orthonormal spherical harmonics and a second-order forward-mode jet.
//!
//! Harmonics are evaluated in Cartesian form,
//! `Y_lm ∝ Q_l^m(z) · Re/Im (x + iy)^m` with `Q_l^m = d^m P_l / dz^m`, which is
//! a polynomial in the unit-vector components. There is no pole singularity,
//! and evaluating the same code on [`Jet`] values yields exact gradients and
//! Hessians of any function built from the harmonics.
//!
//! Convention: orthonormal on the unit sphere, no Condon–Shortley phase,
//! `Y_{l,m>0} ∝ cos(mφ)`, `Y_{l,−m} ∝ sin(mφ)`.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Default maximal degree for shape coefficients.
pub const DEFAULT_MAX_DEGREE: usize = 8;
/// Largest degree accepted anywhere in the crate.
pub const MAX_SUPPORTED_DEGREE: usize = 16;

/// Flat index of `(l, m)` with `−l ≤ m ≤ l`.
#[inline]
pub fn index(l: usize, m: i32) -> usize {
    ((l * l + l) as i64 + m as i64) as usize
}

#[inline]
pub const fn count(max_degree: usize) -> usize {
    (max_degree + 1) * (max_degree + 1)
}

/// Inverse of [`index`].
pub fn degree_order(idx: usize) -> (usize, i32) {
    let l = (idx as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= idx { l + 1 } else { l };
    (l, idx as i32 - (l * l + l) as i32)
}

/// Arithmetic needed to evaluate the harmonics generically.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn constant(v: f64) -> Self;
    fn scale(self, k: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// Value, gradient and Hessian of a scalar function of three variables.
/// The Hessian is stored as `[xx, xy, xz, yy, yz, zz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [f64; 6],
}

const HESS_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

impl Jet {
    pub fn variable(value: f64, axis: usize) -> Self {
        let mut g = [0.0; 3];
        g[axis] = 1.0;
        Self {
            v: value,
            g,
            h: [0.0; 6],
        }
    }

    pub fn hessian(&self) -> [[f64; 3]; 3] {
        let h = &self.h;
        [[h[0], h[1], h[2]], [h[1], h[3], h[4]], [h[2], h[4], h[5]]]
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        let mut g = [0.0; 3];
        for (gi, si) in g.iter_mut().zip(self.g) {
            *gi = -si * inv2;
        }
        let mut h = [0.0; 6];
        for (k, &(i, j)) in HESS_PAIRS.iter().enumerate() {
            h[k] = -self.h[k] * inv2 + 2.0 * self.g[i] * self.g[j] * inv3;
        }
        Self { v: inv, g, h }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let mut g = [0.0; 3];
        for (gi, si) in g.iter_mut().zip(self.g) {
            *gi = si / (2.0 * s);
        }
        let s3 = 4.0 * s * s * s;
        let mut h = [0.0; 6];
        for (k, &(i, j)) in HESS_PAIRS.iter().enumerate() {
            h[k] = self.h[k] / (2.0 * s) - self.g[i] * self.g[j] / s3;
        }
        Self { v: s, g, h }
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        let mut r = self;
        r.v += o.v;
        for i in 0..3 {
            r.g[i] += o.g[i];
        }
        for i in 0..6 {
            r.h[i] += o.h[i];
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let g = std::array::from_fn(|i| self.v * o.g[i] + o.v * self.g[i]);
        let mut h = [0.0; 6];
        for (k, &(i, j)) in HESS_PAIRS.iter().enumerate() {
            h[k] = self.v * o.h[k] + o.v * self.h[k] + self.g[i] * o.g[j] + self.g[j] * o.g[i];
        }
        Jet { v: self.v * o.v, g, h }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Scalar for Jet {
    #[inline]
    fn constant(v: f64) -> Self {
        Jet {
            v,
            g: [0.0; 3],
            h: [0.0; 6],
        }
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        let mut r = self;
        r.v *= k;
        for x in r.g.iter_mut() {
            *x *= k;
        }
        for x in r.h.iter_mut() {
            *x *= k;
        }
        r
    }
}

/// Normalisation factors `N_lm` (including `√2` for `m ≠ 0`).
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    max_degree: usize,
    norms: Vec<f64>,
}

impl HarmonicBasis {
    pub fn new(max_degree: usize) -> Self {
        assert!(max_degree <= MAX_SUPPORTED_DEGREE);
        let mut norms = vec![0.0; count(max_degree)];
        for l in 0..=max_degree {
            for m in 0..=l {
                // (l − m)! / (l + m)!
                let mut ratio = 1.0;
                for k in (l - m + 1)..=(l + m) {
                    ratio /= k as f64;
                }
                let base = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
                if m == 0 {
                    norms[index(l, 0)] = base;
                } else {
                    norms[index(l, m as i32)] = base * std::f64::consts::SQRT_2;
                    norms[index(l, -(m as i32))] = base * std::f64::consts::SQRT_2;
                }
            }
        }
        Self { max_degree, norms }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    /// Writes every `Y_lm(x, y, z)` for `l ≤ max_degree` into `out`. The
    /// arguments must describe a unit vector.
    pub fn evaluate<T: Scalar>(&self, x: T, y: T, z: T, out: &mut [T]) {
        let lmax = self.max_degree;
        debug_assert!(out.len() >= self.len());
        // (x + iy)^m = a_m + i b_m
        let mut a = T::constant(1.0);
        let mut b = T::constant(0.0);
        let mut double_factorial = 1.0;
        for m in 0..=lmax {
            if m > 0 {
                let na = a * x - b * y;
                let nb = a * y + b * x;
                a = na;
                b = nb;
                double_factorial *= (2 * m - 1) as f64;
            }
            // Q_l^m(z) by upward recurrence in l.
            let mut q_prev = T::constant(0.0);
            let mut q = T::constant(double_factorial);
            for l in m..=lmax {
                if l > m {
                    let next = if l == m + 1 {
                        (z * q).scale((2 * m + 1) as f64)
                    } else {
                        ((z * q).scale((2 * l - 1) as f64) - q_prev.scale((l + m - 1) as f64))
                            .scale(1.0 / (l - m) as f64)
                    };
                    q_prev = q;
                    q = next;
                }
                if m == 0 {
                    out[index(l, 0)] = q.scale(self.norms[index(l, 0)]);
                } else {
                    let n = self.norms[index(l, m as i32)];
                    out[index(l, m as i32)] = (q * a).scale(n);
                    out[index(l, -(m as i32))] = (q * b).scale(n);
                }
            }
        }
    }

    pub fn evaluate_f64(&self, u: &crate::Vec3) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.evaluate(u.x, u.y, u.z, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SphereGrid;

    #[test]
    fn index_roundtrip() {
        for idx in 0..count(10) {
            let (l, m) = degree_order(idx);
            assert_eq!(index(l, m), idx);
            assert!(m.unsigned_abs() as usize <= l);
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        let basis = HarmonicBasis::new(2);
        let u = crate::Vec3::new(0.3, -0.4, 0.5).normalize();
        let y = basis.evaluate_f64(&u);
        let y00 = 0.5 / PI.sqrt();
        assert!((y[index(0, 0)] - y00).abs() < 1e-15);
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        assert!((y[index(1, 0)] - c1 * u.z).abs() < 1e-15);
        assert!((y[index(1, 1)] - c1 * u.x).abs() < 1e-15);
        assert!((y[index(1, -1)] - c1 * u.y).abs() < 1e-15);
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * u.z * u.z - 1.0);
        assert!((y[index(2, 0)] - y20).abs() < 1e-14);
        let y22 = 0.25 * (15.0 / PI).sqrt() * (u.x * u.x - u.y * u.y);
        assert!((y[index(2, 2)] - y22).abs() < 1e-14);
        let y2m1 = 0.5 * (15.0 / PI).sqrt() * u.y * u.z;
        assert!((y[index(2, -1)] - y2m1).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_on_the_sphere() {
        let lmax = 8;
        let basis = HarmonicBasis::new(lmax);
        let grid = SphereGrid::new(20);
        let n = basis.len();
        let mut gram = vec![0.0; n * n];
        let mut y = vec![0.0; n];
        for (u, w) in grid.nodes() {
            basis.evaluate(u.x, u.y, u.z, &mut y);
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] += w * y[i] * y[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[i * n + j] - expected).abs() < 1e-12,
                    "gram[{i},{j}] = {}",
                    gram[i * n + j]
                );
            }
        }
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let f = |x: Jet, y: Jet, z: Jet| (x * x * y + z.sqrt()) / (y + Jet::constant(2.0));
        let f64_eval = |p: [f64; 3]| (p[0] * p[0] * p[1] + p[2].sqrt()) / (p[1] + 2.0);
        let p = [0.7, 0.2, 1.3];
        let j = f(Jet::variable(p[0], 0), Jet::variable(p[1], 1), Jet::variable(p[2], 2));
        assert!((j.v - f64_eval(p)).abs() < 1e-15);
        let h = 1e-4;
        for i in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[i] += h;
            pm[i] -= h;
            let fd = (f64_eval(pp) - f64_eval(pm)) / (2.0 * h);
            assert!((j.g[i] - fd).abs() < 1e-7);
        }
        let hess = j.hessian();
        for i in 0..3 {
            for k in 0..3 {
                let mut ppp = p;
                let mut ppm = p;
                let mut pmp = p;
                let mut pmm = p;
                ppp[i] += h;
                ppp[k] += h;
                ppm[i] += h;
                ppm[k] -= h;
                pmp[i] -= h;
                pmp[k] += h;
                pmm[i] -= h;
                pmm[k] -= h;
                let fd = (f64_eval(ppp) - f64_eval(ppm) - f64_eval(pmp) + f64_eval(pmm)) / (4.0 * h * h);
                assert!((hess[i][k] - fd).abs() < 1e-5, "H[{i}][{k}]");
            }
        }
    }
}
