//! Compact bodies in R³ and the measurement and ray primitives used by
//! every estimator.

pub mod mesh;
pub mod off;
pub mod primitives;
pub mod star;

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

pub use mesh::Mesh;
pub use primitives::{Ball, Ellipsoid, TwoBalls};
pub use star::{StarShape, StarShapeDocument};

use crate::estimate::{par_samples, Stream};
use crate::{Error, Estimate, Result, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Ball(Ball),
    Ellipsoid(Ellipsoid),
    StarShape(StarShape),
    Mesh(Mesh),
    TwoBalls(TwoBalls),
}

/// A boundary point with an unbiased surface-measure weight.
/// `mean_curvature` is NaN where the mesh estimator is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySample {
    pub point: Vec3,
    pub inward_normal: Vec3,
    pub weight: f64,
    pub mean_curvature: f64,
}

/// One boundary draw; `area_weight` is the single-sample estimate of the
/// surface area (the weight before dividing by the sample count).
#[derive(Debug, Clone, Copy)]
pub(crate) struct BoundaryDraw {
    pub point: Vec3,
    pub inward_normal: Vec3,
    pub area_weight: f64,
    pub mean_curvature: f64,
}

pub(crate) fn uniform_direction<R: Rng>(rng: &mut R) -> Vec3 {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Two unit vectors completing `n` to a right-handed orthonormal frame.
pub fn orthonormal_frame(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Relative tolerance for closed-region membership.
const CLOSURE_TOL: f64 = 1e-12;
/// Relative tolerance for accepting a ray origin as a point of the closure.
const ORIGIN_TOL: f64 = 1e-9;

impl Body {
    pub fn ball(radius: f64) -> Result<Self> {
        Ball::new(Vec3::zeros(), radius).map(Body::Ball)
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        Ellipsoid::new(Vec3::zeros(), [a, b, c]).map(Body::Ellipsoid)
    }

    pub fn two_balls(r1: f64, r2: f64, separation: f64) -> Result<Self> {
        TwoBalls::new(Vec3::zeros(), [r1, r2], separation).map(Body::TwoBalls)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Body::Ball(_) => "ball",
            Body::Ellipsoid(_) => "ellipsoid",
            Body::StarShape(_) => "star",
            Body::Mesh(_) => "mesh",
            Body::TwoBalls(_) => "two_balls",
        }
    }

    /// Whether the boundary is smooth, i.e. curvature is exact rather than
    /// a discrete estimate.
    pub fn is_smooth(&self) -> bool {
        !matches!(self, Body::Mesh(_))
    }

    pub fn volume(&self) -> Estimate {
        match self {
            Body::Ball(b) => Estimate::exact(b.volume()),
            Body::Ellipsoid(e) => Estimate::exact(e.volume()),
            Body::StarShape(s) => s.volume(),
            Body::Mesh(m) => Estimate::exact(m.volume()),
            Body::TwoBalls(t) => Estimate::exact(t.volume()),
        }
    }

    pub fn perimeter(&self) -> Estimate {
        match self {
            Body::Ball(b) => Estimate::exact(b.area()),
            Body::Ellipsoid(e) => e.area(),
            Body::StarShape(s) => s.area(),
            Body::Mesh(m) => Estimate::exact(m.area()),
            Body::TwoBalls(t) => Estimate::exact(t.area()),
        }
    }

    /// Upper bound of the diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            Body::Ball(b) => 2.0 * b.radius,
            Body::Ellipsoid(e) => 2.0 * e.semi_axes.iter().copied().fold(0.0, f64::max),
            Body::StarShape(s) => 2.0 * s.bounding_radius(),
            Body::Mesh(m) => m.diameter(),
            Body::TwoBalls(t) => t.separation + t.radii[0] + t.radii[1],
        }
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        self.contains_within(x, CLOSURE_TOL)
    }

    fn contains_within(&self, x: &Vec3, tol: f64) -> bool {
        match self {
            Body::Ball(b) => b.contains(x, tol),
            Body::Ellipsoid(e) => e.contains(x, tol),
            Body::StarShape(s) => s.contains(x, tol),
            Body::Mesh(m) => m.contains(x, tol),
            Body::TwoBalls(t) => t.containing_ball(x, tol).is_some(),
        }
    }

    /// `ℓ(x, σ) = sup{t ≥ 0 : x + sσ ∈ Ω for s < t}` along the first exit.
    pub fn ray_exit_length(&self, x: &Vec3, dir: &Vec3) -> Result<f64> {
        if ((dir.norm() - 1.0).abs()) > 1e-9 {
            return Err(Error::Domain(format!(
                "direction must be a unit vector (|σ| = {})",
                dir.norm()
            )));
        }
        match self {
            Body::Ball(b) => {
                if !b.contains(x, ORIGIN_TOL) {
                    return Err(Error::ExteriorOrigin);
                }
                Ok(b.exit(x, dir))
            }
            Body::Ellipsoid(e) => {
                if !e.contains(x, ORIGIN_TOL) {
                    return Err(Error::ExteriorOrigin);
                }
                Ok(e.exit(x, dir))
            }
            Body::StarShape(s) => s.exit(x, dir),
            Body::Mesh(m) => m.exit(x, dir),
            Body::TwoBalls(t) => t
                .containing_ball(x, ORIGIN_TOL)
                .map(|b| b.exit(x, dir))
                .ok_or(Error::ExteriorOrigin),
        }
    }

    /// Sum of principal curvatures at a boundary point, positive on
    /// spheres.
    pub fn mean_curvature(&self, x: &Vec3) -> Result<f64> {
        let off_boundary = || Error::Domain("point is not on the boundary".into());
        match self {
            Body::Ball(b) => {
                if ((x - b.center).norm() - b.radius).abs() > 1e-6 * b.radius {
                    return Err(off_boundary());
                }
                Ok(2.0 / b.radius)
            }
            Body::Ellipsoid(e) => {
                let level = (x - e.center).component_div(&Vec3::from(e.semi_axes)).norm();
                if (level - 1.0).abs() > 1e-6 {
                    return Err(off_boundary());
                }
                Ok(e.mean_curvature(x))
            }
            Body::StarShape(s) => s.mean_curvature_at(x),
            Body::Mesh(m) => m.mean_curvature_at(x),
            Body::TwoBalls(t) => Body::Ball(t.nearest_ball(x)).mean_curvature(x),
        }
    }

    /// Closest boundary point along the body's natural chart: radial
    /// projection for star-shaped smooth bodies, orthogonal projection onto
    /// the nearest face plane for meshes.
    pub fn project_to_boundary(&self, p: &Vec3) -> Vec3 {
        match self {
            Body::Ball(b) => b.center + (p - b.center).normalize() * b.radius,
            Body::Ellipsoid(e) => e.project(p),
            Body::StarShape(s) => s.project(p),
            Body::Mesh(m) => m.project(p),
            Body::TwoBalls(t) => {
                let b = t.nearest_ball(p);
                b.center + (p - b.center).normalize() * b.radius
            }
        }
    }

    pub(crate) fn draw_boundary<R: Rng>(&self, rng: &mut R) -> BoundaryDraw {
        match self {
            Body::Ball(b) => b.draw_boundary(rng),
            Body::Ellipsoid(e) => e.draw_boundary(rng),
            Body::StarShape(s) => s.draw_boundary(rng),
            Body::Mesh(m) => m.draw_boundary(rng),
            Body::TwoBalls(t) => t.draw_boundary(rng),
        }
    }

    /// Uniformly distributed interior point.
    pub(crate) fn draw_interior<R: Rng>(&self, rng: &mut R) -> Vec3 {
        match self {
            Body::Ball(b) => b.draw_interior(rng),
            Body::Ellipsoid(e) => e.draw_interior(rng),
            Body::StarShape(s) => s.draw_interior(rng),
            Body::Mesh(m) => m.draw_interior(rng),
            Body::TwoBalls(t) => t.draw_interior(rng),
        }
    }

    /// `count` boundary samples whose weights sum to an unbiased estimate of
    /// the surface area.
    pub fn sample_boundary(&self, count: usize, seed: u64) -> Vec<BoundarySample> {
        let count = count.max(1);
        let n = count as f64;
        par_samples(count, seed, Stream::Boundary, |rng| {
            let d = self.draw_boundary(rng);
            BoundarySample {
                point: d.point,
                inward_normal: d.inward_normal,
                weight: d.area_weight / n,
                mean_curvature: d.mean_curvature,
            }
        })
    }

    /// Uniform interior points.
    pub fn sample_interior(&self, count: usize, seed: u64) -> Vec<Vec3> {
        par_samples(count, seed, Stream::Interior, |rng| self.draw_interior(rng))
    }

    /// Image under `x ↦ t x`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {t}")));
        }
        Ok(match self {
            Body::Ball(b) => Body::Ball(Ball::new(b.center * t, b.radius * t)?),
            Body::Ellipsoid(e) => Body::Ellipsoid(Ellipsoid::new(e.center * t, e.semi_axes.map(|a| a * t))?),
            Body::StarShape(s) => Body::StarShape(s.scaled(t)),
            Body::Mesh(m) => Body::Mesh(m.map_vertices(|v| v * t)),
            Body::TwoBalls(b) => Body::TwoBalls(TwoBalls::new(b.center * t, b.radii.map(|r| r * t), b.separation * t)?),
        })
    }

    pub fn translated(&self, v: &Vec3) -> Self {
        match self {
            Body::Ball(b) => Body::Ball(Ball {
                center: b.center + v,
                ..b.clone()
            }),
            Body::Ellipsoid(e) => Body::Ellipsoid(Ellipsoid {
                center: e.center + v,
                ..e.clone()
            }),
            Body::StarShape(s) => Body::StarShape(s.translated(v)),
            Body::Mesh(m) => Body::Mesh(m.map_vertices(|p| p + v)),
            Body::TwoBalls(b) => Body::TwoBalls(TwoBalls {
                center: b.center + v,
                ..b.clone()
            }),
        }
    }

    /// Radius of the ball with the same volume.
    pub fn equivalent_radius(&self) -> f64 {
        (3.0 * self.volume().value / (4.0 * PI)).cbrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_examples() {
        let b = Body::ball(1.0).unwrap();
        assert!(b.contains(&Vec3::zeros()));
        assert!(!b.contains(&Vec3::new(2.0, 0.0, 0.0)));
        let t = Body::two_balls(1.0, 1.0, 10.0).unwrap();
        assert!(!t.contains(&Vec3::zeros()));
        assert!(t.contains(&Vec3::new(5.0, 0.0, 0.0)));
    }

    #[test]
    fn boundary_weights_are_unbiased() {
        let b = Body::ball(1.0).unwrap();
        let s = b.sample_boundary(1000, 3);
        let total: f64 = s.iter().map(|s| s.weight).sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        for x in &s {
            assert!((x.inward_normal.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s, b.sample_boundary(1000, 3));
    }

    #[test]
    fn ray_exit_rejects_exterior_origin() {
        let b = Body::ellipsoid(1.0, 1.0, 2.0).unwrap();
        let r = b.ray_exit_length(&Vec3::new(0.0, 0.0, 2.5), &Vec3::z());
        assert!(matches!(r, Err(Error::ExteriorOrigin)));
        let l = b.ray_exit_length(&Vec3::zeros(), &Vec3::z()).unwrap();
        assert!((l - 2.0).abs() < 1e-14);
    }

    #[test]
    fn curvature_examples() {
        let b = Body::ball(2.0).unwrap();
        assert_eq!(b.mean_curvature(&Vec3::new(0.0, 2.0, 0.0)).unwrap(), 1.0);
        assert!(b.mean_curvature(&Vec3::zeros()).is_err());
    }
}
