//! Newtonian potential and the energy functionals `P`, `D`, `D^∂`, `E`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::estimate::{par_samples, Stream};
use crate::shapes::Body;
use crate::surface::quadrature_energies;
use crate::{Error, Estimate, Result, Vec3};

/// Interior points closer than this to the evaluation point are re-drawn.
const MIN_DISTANCE: f64 = 1e-12;

/// `v_Ω(x) = ∫_Ω |x − y|⁻¹ dy`. Closed form for balls, otherwise
/// `|Ω| · mean |x − y|⁻¹` over uniform interior points.
pub fn newtonian_potential(body: &Body, x: &Vec3, samples: usize, seed: u64) -> Estimate {
    match body {
        Body::Ball(b) => Estimate::exact(b.potential(x)),
        Body::TwoBalls(t) => Estimate::exact(t.potential(x)),
        _ => sampled_potential(body, x, samples, seed),
    }
}

/// Monte Carlo potential regardless of the body variant.
pub fn sampled_potential(body: &Body, x: &Vec3, samples: usize, seed: u64) -> Estimate {
    let volume = body.volume();
    let values = par_samples(samples.max(1), seed, Stream::Potential, |rng| loop {
        let y = body.draw_interior(rng);
        let r = (x - y).norm();
        if r >= MIN_DISTANCE {
            break 1.0 / r;
        }
    });
    Estimate::from_samples(&values).times(volume)
}

/// `D(Ω) = ½ ∬ |x − y|⁻¹`. Closed form for balls and pairs of balls,
/// otherwise independent uniform interior pairs.
pub fn coulomb_energy(body: &Body, samples: usize, seed: u64) -> Estimate {
    match body {
        Body::Ball(b) => Estimate::exact(b.coulomb()),
        Body::TwoBalls(t) => Estimate::exact(t.coulomb()),
        _ => sampled_coulomb(body, samples, seed),
    }
}

/// Paired-interior Monte Carlo estimate of `D` for any body.
pub fn sampled_coulomb(body: &Body, samples: usize, seed: u64) -> Estimate {
    let volume = body.volume();
    let values = par_samples(samples.max(2), seed, Stream::Pairs, |rng| {
        let x = body.draw_interior(rng);
        loop {
            let y = body.draw_interior(rng);
            let r = (x - y).norm();
            if r >= MIN_DISTANCE {
                break 1.0 / r;
            }
        }
    });
    Estimate::from_samples(&values).times(volume.powi(2)).scale(0.5)
}

/// `D^∂(Ω) = ∫_{∂Ω} v_Ω`, with no factor ½.
pub fn boundary_interaction(body: &Body, samples: usize, seed: u64) -> Estimate {
    match body {
        Body::Ball(b) => Estimate::exact(b.boundary_interaction()),
        Body::TwoBalls(t) => Estimate::exact(t.boundary_interaction()),
        _ => sampled_boundary_interaction(body, samples, seed),
    }
}

/// Monte Carlo `D^∂`: boundary draw times an independent interior draw.
pub fn sampled_boundary_interaction(body: &Body, samples: usize, seed: u64) -> Estimate {
    let volume = body.volume();
    let values = par_samples(samples.max(2), seed, Stream::Interior, |rng| {
        let b = body.draw_boundary(rng);
        loop {
            let y = body.draw_interior(rng);
            let r = (b.point - y).norm();
            if r >= MIN_DISTANCE {
                break b.area_weight / r;
            }
        }
    });
    Estimate::from_samples(&values).times(volume)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub body: String,
    pub volume: Estimate,
    pub perimeter: Estimate,
    pub coulomb: Estimate,
    pub boundary_interaction: Estimate,
    pub total: Estimate,
    /// `"closed_form"`, `"monte_carlo"` or `"quadrature"`.
    pub method: String,
    pub samples: usize,
    pub seed: u64,
}

/// Flat CSV row of an [`EnergyReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyRow {
    pub body: String,
    pub method: String,
    pub volume: f64,
    pub volume_se: f64,
    pub perimeter: f64,
    pub perimeter_se: f64,
    pub coulomb: f64,
    pub coulomb_se: f64,
    pub boundary_interaction: f64,
    pub boundary_interaction_se: f64,
    pub total: f64,
    pub total_se: f64,
    pub samples: usize,
    pub seed: u64,
}

impl EnergyReport {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        body: &Body,
        volume: Estimate,
        perimeter: Estimate,
        coulomb: Estimate,
        boundary_interaction: Estimate,
        method: &str,
        samples: usize,
        seed: u64,
    ) -> Self {
        Self {
            body: body.kind().to_string(),
            volume,
            perimeter,
            coulomb,
            boundary_interaction,
            total: perimeter.plus(coulomb),
            method: method.to_string(),
            samples,
            seed,
        }
    }

    pub fn row(&self) -> EnergyRow {
        EnergyRow {
            body: self.body.clone(),
            method: self.method.clone(),
            volume: self.volume.value,
            volume_se: self.volume.std_error,
            perimeter: self.perimeter.value,
            perimeter_se: self.perimeter.std_error,
            coulomb: self.coulomb.value,
            coulomb_se: self.coulomb.std_error,
            boundary_interaction: self.boundary_interaction.value,
            boundary_interaction_se: self.boundary_interaction.std_error,
            total: self.total.value,
            total_se: self.total.std_error,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

/// Full report; closed forms where available, Monte Carlo otherwise.
pub fn total_energy(body: &Body, samples: usize, seed: u64) -> EnergyReport {
    let closed = matches!(body, Body::Ball(_) | Body::TwoBalls(_));
    let method = if closed { "closed_form" } else { "monte_carlo" };
    EnergyReport::assemble(
        body,
        body.volume(),
        body.perimeter(),
        coulomb_energy(body, samples, seed),
        boundary_interaction(body, samples, seed),
        method,
        if closed { 0 } else { samples },
        seed,
    )
}

/// Deterministic report from boundary-integral quadrature (balls,
/// ellipsoids and star shapes). Errors are resolution-difference bounds.
pub fn total_energy_quadrature(body: &Body, resolution: usize) -> Result<EnergyReport> {
    let q = quadrature_energies(body, resolution)?;
    Ok(EnergyReport::assemble(
        body,
        body.volume(),
        body.perimeter(),
        q.coulomb,
        q.boundary_interaction,
        "quadrature",
        0,
        0,
    ))
}

/// Radius of the ball of volume `V`.
pub fn ball_radius(volume: f64) -> Result<f64> {
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(Error::Domain(format!("volume must be positive, got {volume}")));
    }
    Ok((3.0 * volume / (4.0 * PI)).cbrt())
}

/// `E_B(V) = 4πR² + 16π²R⁵/15` with `|B_R| = V`.
pub fn ball_profile(volume: f64) -> Result<f64> {
    let r = ball_radius(volume)?;
    Ok(4.0 * PI * r * r + 16.0 * PI * PI / 15.0 * r.powi(5))
}

/// Volume at which one ball and two far-apart half-volume balls have equal
/// energy: `5(2 − 2^{2/3}) / (2^{2/3} − 1)`.
pub fn splitting_threshold() -> f64 {
    let c = 2f64.powf(2.0 / 3.0);
    5.0 * (2.0 - c) / (c - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_closed_forms() {
        let b = Body::ball(1.0).unwrap();
        assert_relative_eq!(newtonian_potential(&b, &Vec3::zeros(), 1, 0).value, 2.0 * PI);
        assert_relative_eq!(
            newtonian_potential(&b, &Vec3::new(2.0, 0.0, 0.0), 1, 0).value,
            2.0 * PI / 3.0
        );
        assert_relative_eq!(coulomb_energy(&b, 2, 0).value, 16.0 * PI * PI / 15.0);
        assert_relative_eq!(boundary_interaction(&b, 1, 0).value, 16.0 * PI * PI / 3.0);
        let r = total_energy(&b, 10, 0);
        assert_relative_eq!(r.total.value, 4.0 * PI + 16.0 * PI * PI / 15.0, max_relative = 1e-14);
    }

    #[test]
    fn profile_values() {
        assert_relative_eq!(
            ball_profile(4.0 * PI / 3.0).unwrap(),
            4.0 * PI + 16.0 * PI * PI / 15.0,
            max_relative = 1e-14
        );
        assert!((ball_profile(1.0).unwrap() - 5.8032).abs() < 1e-4);
        assert!(ball_profile(0.0).is_err());
        let vs = splitting_threshold();
        assert!((vs - 3.51207).abs() < 1e-5);
        assert!((ball_profile(vs).unwrap() - 2.0 * ball_profile(vs / 2.0).unwrap()).abs() < 1e-9);
        assert!(2.0 * ball_profile(2.0).unwrap() < ball_profile(4.0).unwrap());
    }

    #[test]
    fn two_ball_far_field() {
        let r = 1.0;
        let t = Body::two_balls(r, r, 100.0 * r).unwrap();
        let d1 = 16.0 * PI * PI / 15.0;
        let monopole = 2.0 * d1 + (4.0 * PI / 3.0f64).powi(2) / 100.0;
        assert!((coulomb_energy(&t, 2, 0).value - monopole).abs() < 0.01 * monopole);
    }

    #[test]
    fn sampled_coulomb_is_consistent_on_ball() {
        let b = Body::ball(1.0).unwrap();
        let d = sampled_coulomb(&b, 50_000, 4);
        assert!(d.agrees_with(16.0 * PI * PI / 15.0, 4.0), "{d:?}");
        let d2 = sampled_boundary_interaction(&b, 50_000, 4);
        assert!(d2.agrees_with(16.0 * PI * PI / 3.0, 4.0), "{d2:?}");
    }
}
