//! Unit-sphere-bundle sampling and chord-length integral geometry.
//!
//! `U⁺ = {(x, σ) : x ∈ ∂Ω, ⟨σ, ν(x)⟩ > 0}` with `ν` the inward normal and
//! `ℓ(x, σ)` the distance to the first exit along `σ`.

use std::f64::consts::PI;

use nalgebra::SMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{boundary_interaction, coulomb_energy};
use crate::estimate::{par_samples, Stream};
use crate::shapes::{orthonormal_frame, Body};
use crate::{Error, Estimate, Result, Vec3};

/// How bundle directions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hemisphere {
    /// Uniform on the inward hemisphere; weight `W·2π/n`.
    Uniform,
    /// Density `cos u / π`; weight `W·π/(n cos u)`.
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundleSample {
    pub point: Vec3,
    pub direction: Vec3,
    pub cosine: f64,
    pub chord: f64,
    /// `Σ weight · f` estimates `∫_{U⁺} f`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSet {
    pub convention: Hemisphere,
    pub samples: Vec<BundleSample>,
    /// Draws dropped because the ray exit failed after retries.
    pub excluded: usize,
}

impl BundleSet {
    pub fn requested(&self) -> usize {
        self.samples.len() + self.excluded
    }

    /// Estimate of `∫_{U⁺} f`. Excluded draws count as zeros so the
    /// estimator keeps its normalisation.
    pub fn integrate(&self, f: impl Fn(&BundleSample) -> f64) -> Estimate {
        let n = self.requested();
        let mut values: Vec<f64> = self.samples.iter().map(|s| s.weight * f(s) * n as f64).collect();
        values.resize(n, 0.0);
        Estimate::from_samples(&values)
    }
}

fn hemisphere_direction<R: Rng>(rng: &mut R, inward: &Vec3, convention: Hemisphere) -> (Vec3, f64) {
    let (e1, e2) = orthonormal_frame(inward);
    loop {
        let u: f64 = rng.random();
        let c = match convention {
            Hemisphere::Uniform => u,
            Hemisphere::Cosine => u.sqrt(),
        };
        if c <= 0.0 {
            continue;
        }
        let s = (1.0 - c * c).max(0.0).sqrt();
        let phi = 2.0 * PI * rng.random::<f64>();
        let dir = inward * c + (e1 * phi.cos() + e2 * phi.sin()) * s;
        return (dir, c);
    }
}

/// Draws `count` points of `U⁺` with weights for the chosen convention.
pub fn sample_bundle_with(body: &Body, count: usize, seed: u64, convention: Hemisphere) -> BundleSet {
    let count = count.max(1);
    let n = count as f64;
    let stream = match convention {
        Hemisphere::Uniform => Stream::BundleUniform,
        Hemisphere::Cosine => Stream::BundleCosine,
    };
    let drawn = par_samples(count, seed, stream, |rng| {
        let b = body.draw_boundary(rng);
        let (dir, c) = hemisphere_direction(rng, &b.inward_normal, convention);
        let chord = body.ray_exit_length(&b.point, &dir).ok()?;
        let weight = match convention {
            Hemisphere::Uniform => b.area_weight * 2.0 * PI / n,
            Hemisphere::Cosine => b.area_weight * PI / (c * n),
        };
        Some(BundleSample {
            point: b.point,
            direction: dir,
            cosine: c,
            chord,
            weight,
        })
    });
    let excluded = drawn.iter().filter(|s| s.is_none()).count();
    BundleSet {
        convention,
        samples: drawn.into_iter().flatten().collect(),
        excluded,
    }
}

/// Bundle samples with directions uniform on the inward hemisphere.
pub fn sample_bundle(body: &Body, count: usize, seed: u64) -> BundleSet {
    sample_bundle_with(body, count, seed, Hemisphere::Uniform)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordMomentReport {
    pub alpha: f64,
    /// `∫_{Ω×S²} ℓ^α`.
    pub lhs: Estimate,
    /// `(α+1)⁻¹ ∫_{U⁺} ℓ^{α+1} cos u`.
    pub rhs: Estimate,
    pub z_score: f64,
    pub excluded: usize,
}

impl ChordMomentReport {
    pub fn agrees(&self, k: f64) -> bool {
        self.z_score.abs() <= k
    }
}

/// Checks `∫_{Ω×S²} ℓ^α = (α+1)⁻¹ ∫_{U⁺} ℓ^{α+1} cos u` with independent
/// estimators for the two sides.
pub fn chord_moment_identity(body: &Body, alpha: f64, count: usize, seed: u64) -> Result<ChordMomentReport> {
    Ok(chord_moment_identities(body, &[alpha], count, seed)?.remove(0))
}

/// As [`chord_moment_identity`] for several exponents sharing one set of
/// samples per side.
pub fn chord_moment_identities(body: &Body, alphas: &[f64], count: usize, seed: u64) -> Result<Vec<ChordMomentReport>> {
    if let Some(a) = alphas.iter().find(|a| !(**a > -1.0)) {
        return Err(Error::Domain(format!("chord moment exponent must exceed -1, got {a}")));
    }
    let count = count.max(2);
    let bundle = sample_bundle_with(body, count, seed, Hemisphere::Cosine);
    let volume = body.volume();
    let interior = par_samples(count, seed, Stream::SphereBundle, |rng| {
        let x = body.draw_interior(rng);
        let dir = crate::shapes::uniform_direction(rng);
        body.ray_exit_length(&x, &dir).ok()
    });
    let interior_excluded = interior.iter().filter(|l| l.is_none()).count();
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let vals: Vec<f64> = interior.iter().map(|l| l.map_or(0.0, |l| l.powf(alpha))).collect();
            let lhs = Estimate::from_samples(&vals).times(volume).scale(4.0 * PI);
            let rhs = bundle
                .integrate(|s| s.chord.powf(alpha + 1.0) * s.cosine)
                .scale(1.0 / (alpha + 1.0));
            ChordMomentReport {
                alpha,
                z_score: lhs.z_score(&rhs),
                lhs,
                rhs,
                excluded: bundle.excluded + interior_excluded,
            }
        })
        .collect())
}

/// `|Ω| = (4π)⁻¹ ∫_{U⁺} ℓ cos u`.
pub fn santalo_volume(body: &Body, count: usize, seed: u64) -> Estimate {
    sample_bundle_with(body, count, seed, Hemisphere::Cosine)
        .integrate(|s| s.chord * s.cosine)
        .scale(1.0 / (4.0 * PI))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordCoulombBounds {
    /// `∫_{U⁺} ℓ³ cos u`, at most `12 D`.
    pub m3: Estimate,
    /// `∫_{U⁺} ℓ²`, at most `2 D^∂`.
    pub m2: Estimate,
    pub excluded: usize,
}

pub fn chord_coulomb_bounds(body: &Body, count: usize, seed: u64) -> ChordCoulombBounds {
    let cosine = sample_bundle_with(body, count, seed, Hemisphere::Cosine);
    let uniform = sample_bundle_with(body, count, seed, Hemisphere::Uniform);
    ChordCoulombBounds {
        m3: cosine.integrate(|s| s.chord.powi(3) * s.cosine),
        m2: uniform.integrate(|s| s.chord * s.chord),
        excluded: cosine.excluded + uniform.excluded,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub left: Estimate,
    pub right: Estimate,
    /// `right − left`.
    pub slack: Estimate,
    pub relative_slack: f64,
    /// Slack in units of its standard error.
    pub z_score: f64,
    /// `|slack| ≤ 3σ` and relative slack at most 1%.
    pub equality: bool,
    /// `slack ≥ −3σ`.
    pub holds: bool,
    /// `slack > 3σ`.
    pub strict: bool,
}

/// Flat CSV row, one per (body, inequality).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityRow {
    pub body: String,
    pub inequality: String,
    pub left: f64,
    pub left_se: f64,
    pub right: f64,
    pub right_se: f64,
    pub slack: f64,
    pub slack_se: f64,
    pub relative_slack: f64,
    pub equality: bool,
    pub holds: bool,
    pub strict: bool,
}

/// Standard-error multiple used by every verdict.
pub const SIGMA_GATE: f64 = 3.0;
/// Relative slack above which equality is never declared.
pub const EQUALITY_RELATIVE: f64 = 0.01;

impl InequalityReport {
    pub fn new(name: &str, left: Estimate, right: Estimate) -> Self {
        let slack = right.minus(left);
        let scale = left.value.abs().max(right.value.abs());
        let floor = 1e-12 * scale;
        let sigma = slack.std_error;
        let relative_slack = if scale > 0.0 { slack.value / scale } else { 0.0 };
        let z_score = if sigma > 0.0 {
            slack.value / sigma
        } else if slack.value.abs() <= floor {
            0.0
        } else {
            f64::INFINITY.copysign(slack.value)
        };
        Self {
            name: name.to_string(),
            left,
            right,
            slack,
            relative_slack,
            z_score,
            equality: slack.value.abs() <= SIGMA_GATE * sigma + floor && relative_slack.abs() <= EQUALITY_RELATIVE,
            holds: slack.value >= -(SIGMA_GATE * sigma + floor),
            strict: slack.value > SIGMA_GATE * sigma + floor,
        }
    }

    pub fn row(&self, body: &str) -> InequalityRow {
        InequalityRow {
            body: body.to_string(),
            inequality: self.name.clone(),
            left: self.left.value,
            left_se: self.left.std_error,
            right: self.right.value,
            right_se: self.right.std_error,
            slack: self.slack.value,
            slack_se: self.slack.std_error,
            relative_slack: self.relative_slack,
            equality: self.equality,
            holds: self.holds,
            strict: self.strict,
        }
    }
}

pub const P2D_INEQUALITY: &str = "volume_cubed_le_p2d";
pub const PD_BOUNDARY_INEQUALITY: &str = "volume_squared_le_p_dboundary";

/// `|Ω|³ < (3/16π) P² D` and `|Ω|² ≤ (12π)⁻¹ P D^∂`.
pub fn verify_main_inequalities(body: &Body, count: usize, seed: u64) -> [InequalityReport; 2] {
    let v = body.volume();
    let p = body.perimeter();
    let d = coulomb_energy(body, count, seed);
    let db = boundary_interaction(body, count, seed);
    [
        InequalityReport::new(P2D_INEQUALITY, v.powi(3), p.powi(2).times(d).scale(3.0 / (16.0 * PI))),
        InequalityReport::new(PD_BOUNDARY_INEQUALITY, v.powi(2), p.times(db).scale(1.0 / (12.0 * PI))),
    ]
}

/// Smallest cosine admitted by the Jacobian check.
pub const JACOBIAN_MIN_COSINE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    pub max_relative_deviation: f64,
    pub mean_relative_deviation: f64,
    /// Samples that entered the maximum.
    pub used: usize,
    /// Draws dropped by the cosine filter.
    pub filtered: usize,
    /// Draws dropped because the ray exit failed.
    pub rejected: usize,
}

/// `|det dΦ|` at `((x, σ), t)` for `Φ((x,σ),t) = (x + tσ, σ)`, computed by
/// central differences in orthonormal charts and divided by the chart's
/// area element.
pub fn jacobian_determinant(body: &Body, x: &Vec3, inward: &Vec3, dir: &Vec3, t: f64) -> f64 {
    let h = 1e-5 * body.diameter();
    let (e1, e2) = orthonormal_frame(inward);
    let (f1, f2) = orthonormal_frame(dir);
    let chart = |a: f64, b: f64| -> Vec3 {
        let p = x + e1 * a + e2 * b;
        match body {
            Body::Mesh(_) => p,
            _ => body.project_to_boundary(&p),
        }
    };
    let sphere = |w1: f64, w2: f64| (dir + f1 * w1 + f2 * w2).normalize();
    // Φ in coordinates (a, b, w1, w2, t) ↦ (X ∈ R³, sphere coords ∈ R²).
    let phi = |q: [f64; 5]| -> [f64; 5] {
        let xs = chart(q[0], q[1]);
        let s = sphere(q[2], q[3]);
        let y = xs + s * q[4];
        [y.x, y.y, y.z, (s - dir).dot(&f1), (s - dir).dot(&f2)]
    };
    let base = [0.0, 0.0, 0.0, 0.0, t];
    let mut m = SMatrix::<f64, 5, 5>::zeros();
    for k in 0..5 {
        let mut plus = base;
        let mut minus = base;
        plus[k] += h;
        minus[k] -= h;
        let (fp, fm) = (phi(plus), phi(minus));
        for r in 0..5 {
            m[(r, k)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    let da = (chart(h, 0.0) - chart(-h, 0.0)) / (2.0 * h);
    let db = (chart(0.0, h) - chart(0.0, -h)) / (2.0 * h);
    let area = da.cross(&db).norm();
    m.determinant().abs() / area
}

/// Compares `|det dΦ|` with `cos u` over `count` samples that pass the
/// cosine filter, drawing at most `20·count` candidates.
pub fn jacobian_check(body: &Body, count: usize, seed: u64) -> JacobianReport {
    let count = count.max(1);
    let candidates = par_samples(20 * count, seed, Stream::Jacobian, |rng| {
        let b = body.draw_boundary(rng);
        let (dir, c) = hemisphere_direction(rng, &b.inward_normal, Hemisphere::Uniform);
        if c < JACOBIAN_MIN_COSINE {
            return Err(true);
        }
        let ell = body.ray_exit_length(&b.point, &dir).map_err(|_| false)?;
        let t = rng.random::<f64>() * ell;
        let det = jacobian_determinant(body, &b.point, &b.inward_normal, &dir, t);
        Ok((det - c).abs() / c)
    });
    let mut report = JacobianReport {
        max_relative_deviation: 0.0,
        mean_relative_deviation: 0.0,
        used: 0,
        filtered: 0,
        rejected: 0,
    };
    let mut total = 0.0;
    for c in candidates {
        if report.used == count {
            break;
        }
        match c {
            Ok(dev) => {
                report.used += 1;
                total += dev;
                report.max_relative_deviation = report.max_relative_deviation.max(dev);
            }
            Err(true) => report.filtered += 1,
            Err(false) => report.rejected += 1,
        }
    }
    report.mean_relative_deviation = total / report.used.max(1) as f64;
    report
}
