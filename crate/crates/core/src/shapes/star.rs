//! Star-shaped bodies `r(u) = R (1 + Σ c_lm Y_lm(u))`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{uniform_direction, BoundaryDraw};
use crate::harmonics::{self, HarmonicBasis, Jet, Scalar, DEFAULT_MAX_DEGREE, MAX_SUPPORTED_DEGREE};
use crate::quadrature::{sphere_integral_with_bound, SphereGrid};
use crate::{Error, Estimate, Result, Vec3};

/// Smallest admissible value of `r / R` on the validation grid.
pub const MIN_RADIUS_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct StarShape {
    center: Vec3,
    mean_radius: f64,
    coeffs: Vec<f64>,
    basis: HarmonicBasis,
    /// Basis truncated at the highest degree with a nonzero coefficient.
    active: HarmonicBasis,
    bound_factor: f64,
    /// Rigorous bound of `max |∇_S r| / R` on the unit sphere.
    slope_factor: f64,
}

/// Geometry of the boundary point above direction `u`.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub direction: Vec3,
    pub radius: f64,
    pub point: Vec3,
    pub outward_normal: Vec3,
    /// Surface element relative to `dΩ`: `dA = area_factor · dΩ(u)`.
    pub area_factor: f64,
    pub mean_curvature: f64,
}

impl PartialEq for StarShape {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center && self.mean_radius == other.mean_radius && self.coeffs == other.coeffs
    }
}

impl StarShape {
    /// Builds a star shape from a dense coefficient vector indexed by
    /// [`harmonics::index`]. The degree is inferred from its length.
    pub fn new(center: Vec3, mean_radius: f64, coeffs: Vec<f64>) -> Result<Self> {
        let len = coeffs.len().max(1);
        let side = (len as f64).sqrt().round() as usize;
        if side * side != len {
            return Err(Error::InvalidBody(format!(
                "coefficient vector of length {len} is not (L+1)^2"
            )));
        }
        let degree = side - 1;
        if degree > MAX_SUPPORTED_DEGREE {
            return Err(Error::InvalidBody(format!(
                "degree {degree} exceeds the supported maximum {MAX_SUPPORTED_DEGREE}"
            )));
        }
        if !(mean_radius > 0.0 && mean_radius.is_finite()) {
            return Err(Error::InvalidBody(format!(
                "mean radius must be positive, got {mean_radius}"
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody("non-finite star shape parameter".into()));
        }
        let mut coeffs = coeffs;
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        let shape = Self::assemble(center, mean_radius, coeffs);
        let min = shape.min_radius_factor();
        if min <= MIN_RADIUS_FACTOR {
            return Err(Error::InvalidBody(format!(
                "radial function is not positive (min r/R = {min:.3e})"
            )));
        }
        Ok(shape)
    }

    fn assemble(center: Vec3, mean_radius: f64, coeffs: Vec<f64>) -> Self {
        let degree = (coeffs.len() as f64).sqrt().round() as usize - 1;
        let active_degree = coeffs
            .iter()
            .rposition(|c| *c != 0.0)
            .map_or(0, |i| harmonics::degree_order(i).0);
        // Σ_m Y_lm² = (2l+1)/4π and Σ_m |∇Y_lm|² = l(l+1)(2l+1)/4π.
        let (mut bound, mut slope) = (1.0, 0.0);
        for (i, c) in coeffs.iter().enumerate() {
            let (l, _) = harmonics::degree_order(i);
            let w = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
            bound += c.abs() * w;
            slope += c.abs() * w * ((l * (l + 1)) as f64).sqrt();
        }
        Self {
            center,
            mean_radius,
            coeffs,
            basis: HarmonicBasis::new(degree),
            active: HarmonicBasis::new(active_degree),
            bound_factor: bound,
            slope_factor: slope,
        }
    }

    /// Star shape from sparse `(l, m, c)` triples, padded to degree
    /// `max(L, DEFAULT_MAX_DEGREE)`.
    pub fn from_terms(center: Vec3, mean_radius: f64, terms: &[(usize, i32, f64)]) -> Result<Self> {
        let degree = terms.iter().map(|t| t.0).max().unwrap_or(0).max(DEFAULT_MAX_DEGREE);
        if degree > MAX_SUPPORTED_DEGREE {
            return Err(Error::InvalidBody(format!(
                "degree {degree} exceeds the supported maximum {MAX_SUPPORTED_DEGREE}"
            )));
        }
        let mut coeffs = vec![0.0; harmonics::count(degree)];
        for &(l, m, c) in terms {
            if m.unsigned_abs() as usize > l {
                return Err(Error::InvalidBody(format!("invalid harmonic order (l={l}, m={m})")));
            }
            coeffs[harmonics::index(l, m)] += c;
        }
        Self::new(center, mean_radius, coeffs)
    }

    pub fn round(center: Vec3, radius: f64) -> Result<Self> {
        Self::new(center, radius, vec![0.0; harmonics::count(DEFAULT_MAX_DEGREE)])
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn mean_radius(&self) -> f64 {
        self.mean_radius
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn max_degree(&self) -> usize {
        self.basis.max_degree()
    }

    pub fn basis(&self) -> &HarmonicBasis {
        &self.basis
    }

    /// `√(Σ c_lm²)` over `l ≥ 1`.
    pub fn asphericity(&self) -> f64 {
        self.coeffs.iter().skip(1).map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Rigorous upper bound of `r / R`.
    pub fn bound_factor(&self) -> f64 {
        self.bound_factor
    }

    pub fn bounding_radius(&self) -> f64 {
        self.mean_radius * self.bound_factor
    }

    /// Rigorous lower bound of `r`, possibly zero.
    pub fn inscribed_radius(&self) -> f64 {
        self.mean_radius * (2.0 - self.bound_factor).max(0.0)
    }

    /// Same shape, same center, different mean radius and coefficients.
    /// Positivity is checked on the validation grid.
    pub fn with_parameters(&self, mean_radius: f64, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(self.center, mean_radius, coeffs)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            center: self.center * t,
            mean_radius: self.mean_radius * t,
            ..self.clone()
        }
    }

    pub fn translated(&self, v: &Vec3) -> Self {
        Self {
            center: self.center + v,
            ..self.clone()
        }
    }

    fn validation_grid_size(&self) -> usize {
        (4 * self.max_degree() + 8).max(32)
    }

    /// Minimum of `r / R` over the dense validation grid.
    pub fn min_radius_factor(&self) -> f64 {
        let grid = SphereGrid::new(self.validation_grid_size());
        let mut buf = vec![0.0; self.active.len()];
        grid.points()
            .iter()
            .map(|u| self.factor_with(u, &mut buf))
            .fold(f64::INFINITY, f64::min)
    }

    fn factor_with(&self, u: &Vec3, buf: &mut [f64]) -> f64 {
        self.active.evaluate(u.x, u.y, u.z, buf);
        1.0 + self.coeffs.iter().zip(buf.iter()).map(|(c, y)| c * y).sum::<f64>()
    }

    /// `r(u)` for a unit vector `u`.
    pub fn radius(&self, u: &Vec3) -> f64 {
        let mut buf = [0.0; harmonics::count(MAX_SUPPORTED_DEGREE)];
        self.mean_radius * self.factor_with(u, &mut buf[..self.active.len()])
    }

    /// Boundary geometry above `u`, using exact derivatives of the level
    /// function `F(p) = |p| − r(p/|p|)`.
    pub fn surface(&self, u: &Vec3) -> SurfacePoint {
        let u = u.normalize();
        let r = self.radius(&u);
        let p = u * r;
        let (x, y, z) = (Jet::variable(p.x, 0), Jet::variable(p.y, 1), Jet::variable(p.z, 2));
        let n = (x * x + y * y + z * z).sqrt();
        let inv = n.recip();
        let (ux, uy, uz) = (x * inv, y * inv, z * inv);
        let zero = Jet::constant(0.0);
        let mut jets = vec![zero; self.active.len()];
        self.active.evaluate(ux, uy, uz, &mut jets);
        let mut s = zero;
        for (c, yj) in self.coeffs.iter().zip(&jets) {
            if *c != 0.0 {
                s = s + yj.scale(*c);
            }
        }
        let f = n - (s + Jet::constant(1.0)).scale(self.mean_radius);
        let g = Vec3::from(f.g);
        let hess = f.hessian();
        let g2 = g.norm_squared();
        let trace = hess[0][0] + hess[1][1] + hess[2][2];
        let mut ghg = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                ghg += g[i] * hess[i][j] * g[j];
            }
        }
        let gn = g2.sqrt();
        SurfacePoint {
            direction: u,
            radius: r,
            point: self.center + p,
            outward_normal: g / gn,
            area_factor: r * r * gn,
            mean_curvature: (g2 * trace - ghg) / (g2 * gn),
        }
    }

    pub fn volume(&self) -> Estimate {
        let n = (3 * self.max_degree()) / 2 + 8;
        let (v, bound) = sphere_integral_with_bound(n, |u| self.radius(u).powi(3) / 3.0);
        Estimate::with_bound(v, bound.max(4.0 * f64::EPSILON * v))
    }

    pub fn area(&self) -> Estimate {
        let n = (4 * self.max_degree()).max(48);
        let (v, bound) = sphere_integral_with_bound(n, |u| self.surface(u).area_factor);
        Estimate::with_bound(v, bound.max(4.0 * f64::EPSILON * v))
    }

    fn level(&self, x: &Vec3) -> f64 {
        let rel = x - self.center;
        let d = rel.norm();
        if d == 0.0 {
            return -self.mean_radius;
        }
        d - self.radius(&(rel / d))
    }

    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        self.level(x) <= tol * self.mean_radius
    }

    /// Bracketing march of `g(t) = |x + tσ − c| − r(dir)` with step `R/64`,
    /// then bisection to `1e-10 R`. Stretches where `g` is provably
    /// negative are crossed in one step: the inscribed ball, and any step
    /// shorter than `−g` over the Lipschitz bound of `g`.
    pub fn exit(&self, x: &Vec3, dir: &Vec3) -> Result<f64> {
        let big_r = self.mean_radius;
        if self.level(x) > 1e-9 * big_r {
            return Err(Error::ExteriorOrigin);
        }
        let g = |t: f64| self.level(&(x + dir * t));
        let h = big_r / 64.0;
        let r_in = self.inscribed_radius();
        let limit = 2.0 * self.bounding_radius() + 2.0 * h;
        let rel = x - self.center;
        // Leaves the inscribed ball (if ever inside it) at t_ball.
        let b = rel.dot(dir);
        let disc = b * b - (rel.norm_squared() - r_in * r_in);
        let t_ball = if r_in > 0.0 && disc > 0.0 {
            -b + disc.sqrt()
        } else {
            f64::NEG_INFINITY
        };
        let mut lo = 0.0;
        let mut g_lo = g(0.0).min(0.0);
        let hi = loop {
            let p = rel + dir * lo;
            let dist = p.norm();
            let mut step = h;
            if dist < r_in * (1.0 - 1e-12) && t_ball > lo {
                step = step.max(t_ball - lo);
            } else if dist > 0.0 {
                // |dg/dt| ≤ 1 + max|∇_S r| / |p|. Along a step of length at
                // most |p|/2 the radius stays above |p|/2 (or above r_in,
                // inside which g < 0 regardless).
                let floor = (0.5 * dist).max(r_in);
                let lip = 1.0 + self.slope_factor * big_r / floor;
                let reach = if r_in >= 0.5 * dist { f64::INFINITY } else { 0.5 * dist };
                step = step.max((-g_lo / lip).min(reach));
            }
            let t = lo + step;
            let gt = g(t);
            if gt > 0.0 {
                break t;
            }
            lo = t;
            g_lo = gt;
            if lo > limit {
                return Err(Error::RayExit(0));
            }
        };
        let mut hi = hi;
        let tol = 1e-10 * big_r;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn mean_curvature_at(&self, x: &Vec3) -> Result<f64> {
        let rel = x - self.center;
        let d = rel.norm();
        if d == 0.0 {
            return Err(Error::Domain("point is the star center".into()));
        }
        let sp = self.surface(&(rel / d));
        if (d - sp.radius).abs() > 1e-6 * self.mean_radius {
            return Err(Error::Domain("point is not on the boundary".into()));
        }
        Ok(sp.mean_curvature)
    }

    pub fn project(&self, p: &Vec3) -> Vec3 {
        let rel = p - self.center;
        let u = rel.normalize();
        self.center + u * self.radius(&u)
    }

    pub(crate) fn draw_boundary<R: Rng>(&self, rng: &mut R) -> BoundaryDraw {
        let u = uniform_direction(rng);
        let sp = self.surface(&u);
        BoundaryDraw {
            point: sp.point,
            inward_normal: -sp.outward_normal,
            area_weight: 4.0 * PI * sp.area_factor,
            mean_curvature: sp.mean_curvature,
        }
    }

    /// Uniform point in the body by rejection from the bounding ball.
    pub(crate) fn draw_interior<R: Rng>(&self, rng: &mut R) -> Vec3 {
        let rb = self.bounding_radius();
        loop {
            let p = self.center + super::primitives::uniform_in_unit_ball(rng) * rb;
            if self.contains(&p, 0.0) {
                return p;
            }
        }
    }
}

/// JSON form `{"R": .., "coeffs": [{"l","m","c"}], "center": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarShapeDocument {
    #[serde(rename = "R")]
    pub mean_radius: f64,
    pub coeffs: Vec<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub l: usize,
    pub m: i32,
    pub c: f64,
}

impl StarShapeDocument {
    pub fn to_shape(&self) -> Result<StarShape> {
        let terms: Vec<_> = self.coeffs.iter().map(|k| (k.l, k.m, k.c)).collect();
        let center = self.center.map(Vec3::from).unwrap_or_else(Vec3::zeros);
        StarShape::from_terms(center, self.mean_radius, &terms)
    }
}

impl From<&StarShape> for StarShapeDocument {
    fn from(s: &StarShape) -> Self {
        let coeffs = s
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| {
                let (l, m) = harmonics::degree_order(i);
                Coefficient { l, m, c: *c }
            })
            .collect();
        let center = (s.center != Vec3::zeros()).then(|| s.center.into());
        Self {
            mean_radius: s.mean_radius,
            coeffs,
            center,
        }
    }
}

impl StarShape {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StarShapeDocument = serde_json::from_str(text)?;
        doc.to_shape()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StarShapeDocument::from(self)).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c20(c: f64) -> StarShape {
        StarShape::from_terms(Vec3::zeros(), 1.0, &[(2, 0, c)]).unwrap()
    }

    #[test]
    fn round_star_matches_ball() {
        let s = StarShape::round(Vec3::new(0.3, 0.0, -1.0), 1.0).unwrap();
        assert!((s.volume().value - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((s.area().value - 4.0 * PI).abs() < 1e-12);
        let sp = s.surface(&Vec3::new(1.0, 2.0, -0.5).normalize());
        assert!((sp.mean_curvature - 2.0).abs() < 1e-12);
        let x = sp.point;
        let l = s.exit(&x, &(-sp.outward_normal)).unwrap();
        assert!((l - 2.0).abs() < 1e-8);
    }

    #[test]
    fn curvature_matches_finite_difference_of_radial_graph() {
        // Axisymmetric surface ρ(θ) = r(θ); mean curvature of a surface of
        // revolution from its planar profile curve.
        let s = c20(0.05);
        let r = |t: f64| s.radius(&Vec3::new(t.sin(), 0.0, t.cos()));
        let h = 1e-4;
        for &t in &[0.3f64, 0.9, PI / 2.0] {
            let (rp, r0, rm) = (r(t + h), r(t), r(t - h));
            let d1 = (rp - rm) / (2.0 * h);
            let d2 = (rp - 2.0 * r0 + rm) / (h * h);
            // polar curve curvature
            let k1 = (r0 * r0 + 2.0 * d1 * d1 - r0 * d2) / (r0 * r0 + d1 * d1).powf(1.5);
            // rotational curvature: sin(angle between normal and axis) / distance to axis
            let (x, z) = (r0 * t.sin(), r0 * t.cos());
            let (dx, dz) = (d1 * t.sin() + r0 * t.cos(), d1 * t.cos() - r0 * t.sin());
            let k2 = -dz / ((dx * dx + dz * dz).sqrt() * x);
            let _ = z;
            let exact = s.surface(&Vec3::new(t.sin(), 0.0, t.cos())).mean_curvature;
            assert!((exact - (k1 + k2)).abs() < 1e-4, "θ={t}: {exact} vs {}", k1 + k2);
        }
    }

    #[test]
    fn rejects_non_positive_radius() {
        let err = StarShape::from_terms(Vec3::zeros(), 1.0, &[(2, 0, 5.0)]);
        assert!(matches!(err, Err(Error::InvalidBody(_))));
    }

    #[test]
    fn json_roundtrip() {
        let s = StarShape::from_terms(Vec3::zeros(), 0.7, &[(2, 0, 0.1), (3, -2, 0.02)]).unwrap();
        let back = StarShape::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn exit_lands_on_boundary() {
        let s = c20(0.2);
        let x = Vec3::new(0.1, -0.05, 0.2);
        let dir = Vec3::new(0.3, 0.4, -0.5).normalize();
        let l = s.exit(&x, &dir).unwrap();
        let end = x + dir * l;
        assert!(s.level(&end).abs() < 1e-9);
        assert!(s.exit(&Vec3::new(3.0, 0.0, 0.0), &dir).is_err());
    }
}
