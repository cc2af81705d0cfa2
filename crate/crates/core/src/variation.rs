//! First-variation diagnostics: `H + v_Ω = λ` on critical shapes, the
//! Minkowski deficit and the mean-convexity certificate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::{coulomb_energy, sampled_potential, EnergyReport};
use crate::estimate::{compensated_sum, derive_seed};
use crate::shapes::Body;
use crate::surface::{quadrature_energies, SurfaceQuadrature, DEFAULT_RESOLUTION};
use crate::{Estimate, Result};

/// Number of boundary points at which the residual is evaluated.
pub const STATIONARITY_POINTS: usize = 128;

/// `λ = 2P/(3|Ω|) + 5D/(3|Ω|)`.
pub fn lagrange_multiplier(body: &Body, samples: usize, seed: u64) -> Estimate {
    multiplier(body.volume(), body.perimeter(), coulomb_energy(body, samples, seed))
}

/// `λ` from the terms of an existing report.
pub fn lagrange_multiplier_from(report: &EnergyReport) -> Estimate {
    multiplier(report.volume, report.perimeter, report.coulomb)
}

fn multiplier(v: Estimate, p: Estimate, d: Estimate) -> Estimate {
    p.scale(2.0).plus(d.scale(5.0)).divided_by(v.scale(3.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub body: String,
    pub lambda: Estimate,
    pub points: usize,
    pub residual_mean: f64,
    /// `max |H + v − λ|`.
    pub residual_max: f64,
    pub residual_sd: f64,
    /// Largest standard error of a single residual.
    pub residual_sigma: f64,
    /// `max |residual| / σ`, with a round-off floor on `σ`.
    pub max_z: f64,
    pub minkowski_deficit: Estimate,
    pub min_mean_curvature: f64,
    /// `"closed_form"`, `"quadrature"` or `"monte_carlo"`.
    pub method: String,
    pub samples: usize,
    pub seed: u64,
}

impl StationarityReport {
    /// Residuals at noise level: `max |residual| ≤ k σ`.
    pub fn is_stationary(&self, k: f64) -> bool {
        self.max_z <= k
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationarityRow {
    pub body: String,
    pub volume: f64,
    pub lambda: f64,
    pub lambda_se: f64,
    pub residual_mean: f64,
    pub residual_max: f64,
    pub residual_sd: f64,
    pub residual_sigma: f64,
    pub max_z: f64,
    pub minkowski_deficit: f64,
    pub min_mean_curvature: f64,
}

impl StationarityReport {
    pub fn row(&self, volume: f64) -> StationarityRow {
        StationarityRow {
            body: self.body.clone(),
            volume,
            lambda: self.lambda.value,
            lambda_se: self.lambda.std_error,
            residual_mean: self.residual_mean,
            residual_max: self.residual_max,
            residual_sd: self.residual_sd,
            residual_sigma: self.residual_sigma,
            max_z: self.max_z,
            minkowski_deficit: self.minkowski_deficit.value,
            min_mean_curvature: self.min_mean_curvature,
        }
    }
}

/// Evaluates `H + v_Ω − λ` at [`STATIONARITY_POINTS`] boundary samples.
///
/// Potentials are exact for balls, come from boundary-integral quadrature
/// for ellipsoids and star shapes, and from Monte Carlo with
/// `samples / points` draws per point for meshes.
pub fn stationarity_residual(body: &Body, samples: usize, seed: u64) -> Result<StationarityReport> {
    let points = body.sample_boundary(STATIONARITY_POINTS, seed);
    let volume = body.volume();
    let perimeter = body.perimeter();
    let (lambda, potentials, method): (Estimate, Vec<Estimate>, &str) = match body {
        Body::Ball(b) => (
            lagrange_multiplier(body, samples, seed),
            points.iter().map(|s| Estimate::exact(b.potential(&s.point))).collect(),
            "closed_form",
        ),
        Body::TwoBalls(t) => (
            lagrange_multiplier(body, samples, seed),
            points.iter().map(|s| Estimate::exact(t.potential(&s.point))).collect(),
            "closed_form",
        ),
        Body::Ellipsoid(_) | Body::StarShape(_) => {
            let fine = SurfaceQuadrature::new(body, DEFAULT_RESOLUTION)?;
            let coarse = SurfaceQuadrature::new(body, DEFAULT_RESOLUTION / 2)?;
            let q = quadrature_energies(body, DEFAULT_RESOLUTION)?;
            let lambda = multiplier(volume, perimeter, q.coulomb);
            let pots = points
                .iter()
                .map(|s| {
                    let a = fine.potential_on_boundary(&s.point);
                    let b = coarse.potential_on_boundary(&s.point);
                    Estimate::with_bound(a, (a - b).abs())
                })
                .collect();
            (lambda, pots, "quadrature")
        }
        Body::Mesh(_) => {
            let per_point = (samples / STATIONARITY_POINTS).max(1000);
            let pots = points
                .iter()
                .enumerate()
                .map(|(i, s)| sampled_potential(body, &s.point, per_point, derive_seed(seed, i as u64)))
                .collect();
            (lagrange_multiplier(body, samples, seed), pots, "monte_carlo")
        }
    };
    let floor = 1e-12 * lambda.value.abs();
    let mut residuals = Vec::with_capacity(points.len());
    let mut sigma_max: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    let mut min_h = f64::INFINITY;
    for (s, v) in points.iter().zip(&potentials) {
        let h = s.mean_curvature;
        min_h = min_h.min(h);
        let r = h + v.value - lambda.value;
        let sigma = v.std_error.hypot(lambda.std_error);
        sigma_max = sigma_max.max(sigma);
        max_z = max_z.max(r.abs() / (sigma + floor));
        residuals.push(r);
    }
    let n = residuals.len() as f64;
    let mean = compensated_sum(residuals.iter().copied()) / n;
    let sd = (compensated_sum(residuals.iter().map(|r| (r - mean) * (r - mean))) / (n - 1.0)).sqrt();
    Ok(StationarityReport {
        body: body.kind().to_string(),
        lambda,
        points: points.len(),
        residual_mean: mean,
        residual_max: residuals.iter().map(|r| r.abs()).fold(0.0, f64::max),
        residual_sd: sd,
        residual_sigma: sigma_max,
        max_z,
        minkowski_deficit: minkowski_deficit(body, samples, seed)?,
        min_mean_curvature: min_h,
        method: method.to_string(),
        samples,
        seed,
    })
}

/// `∫_{∂Ω} H − √(16π P)`.
pub fn minkowski_deficit(body: &Body, samples: usize, seed: u64) -> Result<Estimate> {
    let perimeter = body.perimeter();
    let total_h = match body {
        Body::Ball(b) => Estimate::exact(8.0 * PI * b.radius),
        Body::TwoBalls(t) => Estimate::exact(8.0 * PI * (t.radii[0] + t.radii[1])),
        Body::Ellipsoid(_) | Body::StarShape(_) => {
            let integral = |n| -> Result<f64> {
                let q = SurfaceQuadrature::new(body, n)?;
                Ok(compensated_sum(
                    q.weights().iter().zip(q.mean_curvatures()).map(|(w, h)| w * h),
                ))
            };
            let a = integral(2 * DEFAULT_RESOLUTION)?;
            let b = integral(DEFAULT_RESOLUTION)?;
            Estimate::with_bound(a, (a - b).abs())
        }
        Body::Mesh(_) => {
            let draws = body.sample_boundary(samples.max(1000), seed);
            let values: Vec<f64> = draws
                .iter()
                .filter(|s| s.mean_curvature.is_finite())
                .map(|s| s.weight * draws.len() as f64 * s.mean_curvature)
                .collect();
            Estimate::from_samples(&values)
        }
    };
    Ok(total_h.minus(perimeter.scale(16.0 * PI).sqrt()))
}

/// Volume below which stationary shapes are certified mean-convex:
/// `(4/3)(10/3)^{1/2}`.
pub fn mean_convexity_volume_threshold() -> f64 {
    4.0 / 3.0 * (10.0f64 / 3.0).sqrt()
}

/// Matching radius `(10/(3π²))^{1/6}`.
pub fn mean_convexity_radius_threshold() -> f64 {
    (10.0 / (3.0 * PI * PI)).powf(1.0 / 6.0)
}

/// `2 (10π/3)^{1/3}`, the AM-GM floor of `2P/(3V) + 80πV²/(9P²)`.
pub fn amgm_floor() -> f64 {
    2.0 * (10.0 * PI / 3.0).cbrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanConvexityReport {
    pub volume: f64,
    pub radius: f64,
    /// Smallest sampled `H`.
    pub min_mean_curvature: f64,
    /// `2P/(3V) + 80πV²/(9P²)`.
    pub chain_value: Estimate,
    pub amgm_floor: f64,
    pub chain_holds: bool,
    /// `2(10π/3)^{1/3} − 2πR²`, a lower bound for `H` on stationary shapes.
    pub certified_margin: f64,
    /// The certificate covers this volume.
    pub applies: bool,
    pub volume_threshold: f64,
    /// `applies` and the sampled curvature is positive.
    pub certified: bool,
}

pub fn mean_convexity_certificate(body: &Body, samples: usize, seed: u64) -> MeanConvexityReport {
    let v = body.volume();
    let p = body.perimeter();
    let r = body.equivalent_radius();
    let chain = p
        .scale(2.0)
        .divided_by(v.scale(3.0))
        .plus(v.powi(2).scale(80.0 * PI).divided_by(p.powi(2).scale(9.0)));
    let floor = amgm_floor();
    let min_h = body
        .sample_boundary(samples.clamp(STATIONARITY_POINTS, 100_000), seed)
        .iter()
        .map(|s| s.mean_curvature)
        .fold(f64::INFINITY, f64::min);
    let margin = floor - 2.0 * PI * r * r;
    let applies = margin >= 0.0;
    MeanConvexityReport {
        volume: v.value,
        radius: r,
        min_mean_curvature: min_h,
        chain_holds: chain.value >= floor - 3.0 * chain.std_error - 1e-12 * floor,
        chain_value: chain,
        amgm_floor: floor,
        certified_margin: margin,
        applies,
        volume_threshold: mean_convexity_volume_threshold(),
        certified: applies && min_h > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_multiplier_identity() {
        for r in [0.5, 1.0, 2.0] {
            let b = Body::ball(r).unwrap();
            let l = lagrange_multiplier(&b, 2, 0).value;
            assert!((l - (2.0 / r + 4.0 * PI * r * r / 3.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn ball_is_stationary_in_closed_form() {
        let b = Body::ball(1.0).unwrap();
        let rep = stationarity_residual(&b, 10, 1).unwrap();
        assert!(rep.points >= 100);
        assert!(rep.residual_max < 1e-12, "{rep:?}");
        assert!(rep.is_stationary(3.0));
        assert_eq!(rep.minkowski_deficit.value, 0.0);
    }

    #[test]
    fn ellipsoid_is_not_stationary() {
        let e = Body::ellipsoid(1.0, 1.0, 2.0).unwrap();
        let rep = stationarity_residual(&e, 10, 1).unwrap();
        assert!(rep.residual_sd > 5.0 * rep.residual_sigma, "{rep:?}");
        assert!(rep.minkowski_deficit.value > 3.0 * rep.minkowski_deficit.std_error);
    }

    #[test]
    fn thresholds() {
        assert!((mean_convexity_volume_threshold() - 2.43432).abs() < 1e-4);
        let r = mean_convexity_radius_threshold();
        assert!((4.0 / 3.0 * PI * r.powi(3) - mean_convexity_volume_threshold()).abs() < 1e-12);
        // brute-force minimum of 2P/(3V) + 80πV²/(9P²) at V = 1
        let min = (1..200_000)
            .map(|i| i as f64 * 1e-4)
            .map(|p| 2.0 * p / 3.0 + 80.0 * PI / (9.0 * p * p))
            .fold(f64::INFINITY, f64::min);
        assert!((amgm_floor() - min).abs() < 1e-6);
        let ball = Body::ball(1.0).unwrap();
        let c = mean_convexity_certificate(&ball, 1000, 0);
        assert_eq!(c.min_mean_curvature, 2.0);
        assert!(c.chain_holds);
    }
}
