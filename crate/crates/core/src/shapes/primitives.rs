//! Balls, ellipsoids and pairs of disjoint balls.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{uniform_direction, BoundaryDraw};
use crate::quadrature::sphere_integral_with_bound;
use crate::{Error, Estimate, Result, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidBody(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }

    pub fn area(&self) -> f64 {
        4.0 * PI * self.radius * self.radius
    }

    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        (x - self.center).norm() <= self.radius * (1.0 + tol)
    }

    /// Largest root of `|x + tσ − c| = R`.
    pub fn exit(&self, x: &Vec3, dir: &Vec3) -> f64 {
        let rel = x - self.center;
        let b = rel.dot(dir);
        let c = rel.norm_squared() - self.radius * self.radius;
        let disc = (b * b - c).max(0.0);
        // Stable form of −b + √disc.
        let s = disc.sqrt();
        if b <= 0.0 {
            -b + s
        } else {
            let q = b + s;
            if q == 0.0 {
                0.0
            } else {
                (-c / q).max(0.0)
            }
        }
    }

    /// Newtonian potential `∫_B |x − y|⁻¹ dy`.
    pub fn potential(&self, x: &Vec3) -> f64 {
        let r = (x - self.center).norm();
        let big_r = self.radius;
        if r <= big_r {
            2.0 * PI / 3.0 * (3.0 * big_r * big_r - r * r)
        } else {
            4.0 * PI * big_r.powi(3) / (3.0 * r)
        }
    }

    pub fn coulomb(&self) -> f64 {
        16.0 * PI * PI / 15.0 * self.radius.powi(5)
    }

    /// `∫_{∂B} v_B`.
    pub fn boundary_interaction(&self) -> f64 {
        16.0 * PI * PI / 3.0 * self.radius.powi(4)
    }

    pub(crate) fn draw_boundary<R: Rng>(&self, rng: &mut R) -> BoundaryDraw {
        let u = uniform_direction(rng);
        BoundaryDraw {
            point: self.center + u * self.radius,
            inward_normal: -u,
            area_weight: self.area(),
            mean_curvature: 2.0 / self.radius,
        }
    }

    pub(crate) fn draw_interior<R: Rng>(&self, rng: &mut R) -> Vec3 {
        self.center + uniform_in_unit_ball(rng) * self.radius
    }
}

pub(crate) fn uniform_in_unit_ball<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let p = Vec3::new(
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
        );
        if p.norm_squared() <= 1.0 {
            return p;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub center: Vec3,
    pub semi_axes: [f64; 3],
}

impl Ellipsoid {
    pub fn new(center: Vec3, semi_axes: [f64; 3]) -> Result<Self> {
        if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidBody(format!(
                "ellipsoid semi-axes must be positive, got {semi_axes:?}"
            )));
        }
        Ok(Self { center, semi_axes })
    }

    fn axes(&self) -> Vec3 {
        Vec3::from(self.semi_axes)
    }

    pub fn volume(&self) -> f64 {
        let [a, b, c] = self.semi_axes;
        4.0 / 3.0 * PI * a * b * c
    }

    /// Surface element relative to the unit sphere under `u ↦ A u`.
    pub fn area_factor(&self, u: &Vec3) -> f64 {
        let [a, b, c] = self.semi_axes;
        ((b * c * u.x).powi(2) + (a * c * u.y).powi(2) + (a * b * u.z).powi(2)).sqrt()
    }

    pub fn area(&self) -> Estimate {
        let (v, bound) = sphere_integral_with_bound(96, |u| self.area_factor(u));
        Estimate::with_bound(v, bound.max(1e-14 * v))
    }

    fn level(&self, x: &Vec3) -> f64 {
        (x - self.center).component_div(&self.axes()).norm_squared()
    }

    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        self.level(x) <= 1.0 + tol
    }

    pub fn exit(&self, x: &Vec3, dir: &Vec3) -> f64 {
        let ax = self.axes();
        let p = (x - self.center).component_div(&ax);
        let d = dir.component_div(&ax);
        let a = d.norm_squared();
        let b = p.dot(&d);
        let c = p.norm_squared() - 1.0;
        let disc = (b * b - a * c).max(0.0);
        let s = disc.sqrt();
        if b <= 0.0 {
            (-b + s) / a
        } else {
            let q = b + s;
            if q == 0.0 {
                0.0
            } else {
                (-c / q).max(0.0)
            }
        }
    }

    pub fn outward_normal(&self, x: &Vec3) -> Vec3 {
        let ax = self.axes();
        (x - self.center).component_div(&ax).component_div(&ax).normalize()
    }

    /// Sum of principal curvatures at a boundary point, from the implicit
    /// form `F = Σ x_i²/a_i² − 1`.
    pub fn mean_curvature(&self, x: &Vec3) -> f64 {
        let ax = self.axes();
        let inv2 = Vec3::new(1.0 / (ax.x * ax.x), 1.0 / (ax.y * ax.y), 1.0 / (ax.z * ax.z));
        let p = (x - self.center).component_mul(&inv2);
        let pn2 = p.norm_squared();
        let trace: f64 = inv2.sum();
        let quad = p.component_mul(&p).dot(&inv2);
        (pn2 * trace - quad) / pn2.powf(1.5)
    }

    pub fn project(&self, p: &Vec3) -> Vec3 {
        let d = p - self.center;
        let s = d.component_div(&self.axes()).norm();
        self.center + d / s
    }

    pub(crate) fn draw_boundary<R: Rng>(&self, rng: &mut R) -> BoundaryDraw {
        let u = uniform_direction(rng);
        let point = self.center + u.component_mul(&self.axes());
        BoundaryDraw {
            point,
            inward_normal: -self.outward_normal(&point),
            area_weight: 4.0 * PI * self.area_factor(&u),
            mean_curvature: self.mean_curvature(&point),
        }
    }

    pub(crate) fn draw_interior<R: Rng>(&self, rng: &mut R) -> Vec3 {
        self.center + uniform_in_unit_ball(rng).component_mul(&self.axes())
    }
}

/// Two disjoint balls whose centers sit at `center ∓ (separation/2)·e_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBalls {
    pub center: Vec3,
    pub radii: [f64; 2],
    pub separation: f64,
}

impl TwoBalls {
    pub fn new(center: Vec3, radii: [f64; 2], separation: f64) -> Result<Self> {
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidBody(format!("radii must be positive, got {radii:?}")));
        }
        if !(separation > radii[0] + radii[1]) || !separation.is_finite() {
            return Err(Error::InvalidBody(format!(
                "balls must be disjoint: separation {separation} <= r1 + r2 = {}",
                radii[0] + radii[1]
            )));
        }
        Ok(Self {
            center,
            radii,
            separation,
        })
    }

    pub fn balls(&self) -> [Ball; 2] {
        let offset = Vec3::new(0.5 * self.separation, 0.0, 0.0);
        [
            Ball {
                center: self.center - offset,
                radius: self.radii[0],
            },
            Ball {
                center: self.center + offset,
                radius: self.radii[1],
            },
        ]
    }

    pub fn volume(&self) -> f64 {
        self.balls().iter().map(Ball::volume).sum()
    }

    pub fn area(&self) -> f64 {
        self.balls().iter().map(Ball::area).sum()
    }

    pub fn containing_ball(&self, x: &Vec3, tol: f64) -> Option<Ball> {
        self.balls().into_iter().find(|b| b.contains(x, tol))
    }

    pub fn nearest_ball(&self, x: &Vec3) -> Ball {
        let [a, b] = self.balls();
        if (x - a.center).norm() - a.radius <= (x - b.center).norm() - b.radius {
            a
        } else {
            b
        }
    }

    pub fn potential(&self, x: &Vec3) -> f64 {
        self.balls().iter().map(|b| b.potential(x)).sum()
    }

    /// Exact: the cross term of two disjoint balls is `|B₁||B₂| / d`.
    pub fn coulomb(&self) -> f64 {
        let [a, b] = self.balls();
        a.coulomb() + b.coulomb() + a.volume() * b.volume() / self.separation
    }

    /// Exact: `∫_{∂B_i} v_{B_j} = |∂B_i| · v_{B_j}(c_i)` by the mean value
    /// property, since `v_{B_j}` is harmonic outside `B_j`.
    pub fn boundary_interaction(&self) -> f64 {
        let [a, b] = self.balls();
        a.boundary_interaction()
            + b.boundary_interaction()
            + a.area() * b.potential(&a.center)
            + b.area() * a.potential(&b.center)
    }

    pub(crate) fn draw_boundary<R: Rng>(&self, rng: &mut R) -> BoundaryDraw {
        let [a, b] = self.balls();
        let total = a.area() + b.area();
        let pick = if rng.random::<f64>() * total < a.area() { a } else { b };
        let mut draw = pick.draw_boundary(rng);
        draw.area_weight = total;
        draw
    }

    pub(crate) fn draw_interior<R: Rng>(&self, rng: &mut R) -> Vec3 {
        let [a, b] = self.balls();
        let pick = if rng.random::<f64>() * (a.volume() + b.volume()) < a.volume() {
            a
        } else {
            b
        };
        pick.draw_interior(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_exit_from_boundary_is_chord() {
        let ball = Ball::new(Vec3::new(1.0, -2.0, 0.5), 1.5).unwrap();
        let nu_in = Vec3::new(0.0, 0.0, -1.0);
        let x = ball.center - nu_in * ball.radius;
        for k in 0..10 {
            let u = 0.15 * k as f64;
            let dir = Vec3::new(u.sin(), 0.0, -u.cos());
            let l = ball.exit(&x, &dir);
            assert!((l - 2.0 * ball.radius * u.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipsoid_curvature_at_poles() {
        let e = Ellipsoid::new(Vec3::zeros(), [1.0, 1.0, 2.0]).unwrap();
        // pole of a prolate spheroid: both curvatures c/a² = 2
        assert!((e.mean_curvature(&Vec3::new(0.0, 0.0, 2.0)) - 4.0).abs() < 1e-12);
        // equator: 1/a + a/c² = 1.25
        assert!((e.mean_curvature(&Vec3::new(1.0, 0.0, 0.0)) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn prolate_spheroid_area_closed_form() {
        let (a, c) = (1.0f64, 2.0f64);
        let e = Ellipsoid::new(Vec3::zeros(), [a, a, c]).unwrap();
        let ecc = (1.0 - a * a / (c * c)).sqrt();
        let exact = 2.0 * PI * a * a * (1.0 + c / (a * ecc) * ecc.asin());
        let area = e.area();
        assert!((area.value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn two_balls_reject_overlap() {
        assert!(TwoBalls::new(Vec3::zeros(), [1.0, 1.0], 1.5).is_err());
        assert!(TwoBalls::new(Vec3::zeros(), [1.0, 1.0], 2.5).is_ok());
    }
}
