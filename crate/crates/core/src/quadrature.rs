//! Gauss–Legendre rules and product quadrature on the unit sphere.

use std::f64::consts::PI;

use crate::Vec3;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos θ` and the
/// trapezoidal rule in `φ`. With `n` latitude nodes it integrates spherical
/// polynomials of degree `< 2n` exactly.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n: usize) -> Self {
        let (zs, wz) = gauss_legendre(n);
        let nphi = 2 * n;
        let dphi = 2.0 * PI / nphi as f64;
        let mut nodes = Vec::with_capacity(n * nphi);
        let mut weights = Vec::with_capacity(n * nphi);
        for (z, w) in zs.iter().zip(&wz) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..nphi {
                let phi = (k as f64 + 0.5) * dphi;
                nodes.push(Vec3::new(s * phi.cos(), s * phi.sin(), *z));
                weights.push(w * dphi);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&Vec3, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    pub fn points(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(&Vec3) -> f64>(&self, f: F) -> f64 {
        crate::estimate::compensated_sum(self.nodes().map(|(u, w)| w * f(u)))
    }
}

/// Integrates `f` over the sphere at resolutions `n` and `n/2`; returns the
/// fine value and the difference as an error bound.
pub fn sphere_integral_with_bound<F: Fn(&Vec3) -> f64>(n: usize, f: F) -> (f64, f64) {
    let fine = SphereGrid::new(n).integrate(&f);
    let coarse = SphereGrid::new((n / 2).max(1)).integrate(&f);
    (fine, (fine - coarse).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫ x^12 = 2/13
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((v - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_grid_area_and_moments() {
        let g = SphereGrid::new(12);
        assert!((g.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-13);
        // ∫ z² dΩ = 4π/3, ∫ x⁴ dΩ = 4π/5
        assert!((g.integrate(|u| u.z * u.z) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((g.integrate(|u| u.x.powi(4)) - 4.0 * PI / 5.0).abs() < 1e-13);
    }
}
