//! Volume-constrained gradient descent on the harmonic coefficients of a
//! star shape.
//!
//! The shape is `r(u) = R (1 + Σ c_lm Y_lm(u))` with `R` fixed by the target
//! volume after every update. For the reduced energy `Ê(c) = E(R(c), c)`,
//!
//! `∂Ê/∂c_lm = ∫_{S²} (H + v − λ) R Y_lm r² du`, `λ = (2P + 5D)/(3V)`.
//!
//! Energies, potentials and curvatures come from boundary-integral
//! quadrature; error bars are differences between two resolutions.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::estimate::compensated_sum;
use crate::harmonics::{self, HarmonicBasis};
use crate::shapes::{StarShape, StarShapeDocument};
use crate::surface::{SurfaceQuadrature, DEFAULT_RESOLUTION};
use crate::{Error, Estimate, Result, Vec3};

/// Below this value of `min r/R` the shape counts as degenerating.
pub const DEGENERACY_FACTOR: f64 = 0.05;
const SIGMA_GATE: f64 = 3.0;
const GROWTH: f64 = 1.2;
const GROWTH_AFTER: usize = 5;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Latitude nodes of the fine quadrature; the error bar uses half.
    pub resolution: usize,
    pub initial_step: f64,
    /// Upper bound on the step. `None` uses `1.5 / ((L−1)(L+2) R²)`, the
    /// inverse stiffness of the highest surface-tension mode.
    pub max_step: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            initial_step: 1e-2,
            max_step: None,
        }
    }
}

impl FlowOptions {
    fn step_cap(&self, degree: usize, mean_radius: f64) -> f64 {
        self.max_step.unwrap_or_else(|| {
            let l = degree.max(2) as f64;
            1.5 / ((l - 1.0) * (l + 2.0) * mean_radius * mean_radius)
        })
    }
}

/// Coefficient gradient of the volume-constrained energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    /// Dense, indexed like the coefficients; zero for `l < 2`.
    pub components: Vec<f64>,
    /// Resolution-difference bound per component.
    pub errors: Vec<f64>,
    pub norm: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub coeffs: Vec<f64>,
    pub mean_radius: f64,
    pub center: [f64; 3],
    pub step: usize,
    pub energy: Estimate,
    pub volume: f64,
    pub target_volume: f64,
    pub step_size: f64,
    /// `√(Σ c_lm²)` over `l ≥ 1`.
    pub asphericity: f64,
    pub gradient_norm: f64,
    pub gradient: Vec<f64>,
    /// Accepted steps since the last growth of the step size.
    pub streak: usize,
}

struct Evaluation {
    shape: StarShape,
    energy: Estimate,
    gradient: Gradient,
}

fn freeze(i: usize) -> bool {
    harmonics::degree_order(i).0 < 2
}

/// Rescales `(c, ·)` to the target volume. Fails with `RadialDegeneracy`
/// when `min r/R` drops below [`DEGENERACY_FACTOR`].
fn rescaled(center: Vec3, coeffs: &[f64], volume: f64) -> Result<StarShape> {
    let unit = match StarShape::new(center, 1.0, coeffs.to_vec()) {
        Ok(s) => s,
        Err(Error::InvalidBody(_)) => return Err(Error::RadialDegeneracy(0.0)),
        Err(e) => return Err(e),
    };
    let min = unit.min_radius_factor();
    if min < DEGENERACY_FACTOR {
        return Err(Error::RadialDegeneracy(min));
    }
    let r = (volume / unit.volume().value).cbrt();
    unit.with_parameters(r, coeffs.to_vec())
}

fn pair(a: f64, b: f64) -> Estimate {
    Estimate::with_bound(a, (a - b).abs().max(1e-15 * a.abs()))
}

fn raw_gradient(q: &SurfaceQuadrature, basis: &HarmonicBasis, mean_radius: f64) -> (Vec<f64>, f64) {
    let potentials = q.node_potentials();
    let area = q.area();
    let volume = q.volume();
    let lambda = (2.0 * area + 5.0 * q.coulomb()) / (3.0 * volume);
    let center = q.center();
    let n = basis.len();
    let mut terms: Vec<Vec<f64>> = vec![Vec::with_capacity(q.len()); n];
    let mut y = vec![0.0; n];
    for (i, v) in potentials.iter().enumerate() {
        let u = q.directions()[i];
        let r = (q.points()[i] - center).norm();
        let residual = q.mean_curvatures()[i] + v - lambda;
        let w = q.direction_weights()[i] * residual * r * r * mean_radius;
        basis.evaluate(u.x, u.y, u.z, &mut y);
        for (k, t) in terms.iter_mut().enumerate() {
            if !freeze(k) {
                t.push(w * y[k]);
            }
        }
    }
    let g = terms.into_iter().map(compensated_sum).collect();
    (g, lambda)
}

fn evaluate(center: Vec3, coeffs: &[f64], volume: f64, options: &FlowOptions) -> Result<Evaluation> {
    let shape = rescaled(center, coeffs, volume)?;
    let body = crate::Body::StarShape(shape.clone());
    let fine = SurfaceQuadrature::new(&body, options.resolution)?;
    let coarse = SurfaceQuadrature::new(&body, options.resolution / 2)?;
    let energy = pair(fine.area() + fine.coulomb(), coarse.area() + coarse.coulomb());
    let (g, lambda) = raw_gradient(&fine, shape.basis(), shape.mean_radius());
    let (gc, _) = raw_gradient(&coarse, shape.basis(), shape.mean_radius());
    let errors = g.iter().zip(&gc).map(|(a, b)| (a - b).abs()).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(Evaluation {
        shape,
        energy,
        gradient: Gradient {
            components: g,
            errors,
            norm,
            lambda,
        },
    })
}

/// `E` of the shape with coefficients `c` rescaled to `volume`.
pub fn constrained_energy(center: Vec3, coeffs: &[f64], volume: f64, resolution: usize) -> Result<Estimate> {
    let shape = rescaled(center, coeffs, volume)?;
    let body = crate::Body::StarShape(shape);
    let fine = SurfaceQuadrature::new(&body, resolution)?;
    let coarse = SurfaceQuadrature::new(&body, resolution / 2)?;
    Ok(pair(fine.area() + fine.coulomb(), coarse.area() + coarse.coulomb()))
}

impl FlowState {
    /// Starts a flow from the coefficients of `shape`, rescaled to
    /// `target_volume`.
    pub fn new(shape: &StarShape, target_volume: f64, options: &FlowOptions) -> Result<Self> {
        if !(target_volume > 0.0 && target_volume.is_finite()) {
            return Err(Error::Domain(format!(
                "target volume must be positive, got {target_volume}"
            )));
        }
        let eval = evaluate(shape.center(), shape.coeffs(), target_volume, options)?;
        Ok(Self::from_evaluation(eval, target_volume, 0, options.initial_step, 0))
    }

    fn from_evaluation(eval: Evaluation, target_volume: f64, step: usize, step_size: f64, streak: usize) -> Self {
        Self {
            coeffs: eval.shape.coeffs().to_vec(),
            mean_radius: eval.shape.mean_radius(),
            center: eval.shape.center().into(),
            step,
            energy: eval.energy,
            volume: eval.shape.volume().value,
            target_volume,
            step_size,
            asphericity: eval.shape.asphericity(),
            gradient_norm: eval.gradient.norm,
            gradient: eval.gradient.components,
            streak,
        }
    }

    pub fn shape(&self) -> Result<StarShape> {
        StarShape::new(Vec3::from(self.center), self.mean_radius, self.coeffs.clone())
    }

    pub fn degree(&self) -> usize {
        (self.coeffs.len() as f64).sqrt().round() as usize - 1
    }
}

/// Gradient of the volume-constrained energy at `state`.
pub fn energy_gradient(state: &FlowState, options: &FlowOptions) -> Result<Gradient> {
    Ok(evaluate(Vec3::from(state.center), &state.coeffs, state.target_volume, options)?.gradient)
}

/// One descent step with backtracking: the step halves while the energy
/// rises by more than 3σ or the shape degenerates.
pub fn flow_step(state: &FlowState, options: &FlowOptions) -> Result<FlowState> {
    let center = Vec3::from(state.center);
    let cap = options.step_cap(state.degree(), state.mean_radius);
    let mut step = state.step_size.min(cap);
    let mut last_error = None;
    for _ in 0..=MAX_HALVINGS {
        let trial: Vec<f64> = state
            .coeffs
            .iter()
            .zip(&state.gradient)
            .enumerate()
            .map(|(i, (c, g))| if freeze(i) { *c } else { c - step * g })
            .collect();
        match evaluate(center, &trial, state.target_volume, options) {
            Ok(eval) => {
                let sigma = eval.energy.std_error.hypot(state.energy.std_error);
                if eval.energy.value <= state.energy.value + SIGMA_GATE * sigma {
                    let mut streak = state.streak + 1;
                    let mut next = step;
                    if streak >= GROWTH_AFTER {
                        next = (step * GROWTH).min(cap);
                        streak = 0;
                    }
                    return Ok(FlowState::from_evaluation(
                        eval,
                        state.target_volume,
                        state.step + 1,
                        next,
                        streak,
                    ));
                }
                last_error = None;
            }
            Err(e @ Error::RadialDegeneracy(_)) => last_error = Some(e),
            Err(e) => return Err(e),
        }
        step *= 0.5;
    }
    match last_error {
        Some(e) => Err(e),
        // No descent at any step size: stationary within noise.
        None => Ok(FlowState {
            step: state.step + 1,
            step_size: step,
            streak: 0,
            ..state.clone()
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowStatus {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "max steps")]
    MaxSteps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub energy: f64,
    pub volume: f64,
    pub asphericity: f64,
    pub step_size: f64,
    pub gradient_norm: f64,
}

impl From<&FlowState> for TrajectoryRow {
    fn from(s: &FlowState) -> Self {
        Self {
            step: s.step,
            energy: s.energy.value,
            volume: s.volume,
            asphericity: s.asphericity,
            step_size: s.step_size,
            gradient_norm: s.gradient_norm,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub status: FlowStatus,
    pub rows: Vec<TrajectoryRow>,
    pub final_state: FlowState,
}

impl Trajectory {
    pub fn final_shape(&self) -> Result<StarShape> {
        self.final_state.shape()
    }

    pub fn final_document(&self) -> Result<StarShapeDocument> {
        Ok(StarShapeDocument::from(&self.final_shape()?))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Steps until the gradient norm drops below `tolerance` or `max_steps`
/// steps have been taken.
pub fn run_flow(initial: FlowState, max_steps: usize, tolerance: f64, options: &FlowOptions) -> Result<Trajectory> {
    let mut rows = vec![TrajectoryRow::from(&initial)];
    let mut state = initial;
    while state.gradient_norm >= tolerance {
        if state.step >= max_steps {
            return Ok(Trajectory {
                status: FlowStatus::MaxSteps,
                rows,
                final_state: state,
            });
        }
        state = flow_step(&state, options)?;
        rows.push(TrajectoryRow::from(&state));
    }
    Ok(Trajectory {
        status: FlowStatus::Converged,
        rows,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn start(c20: f64, volume: f64) -> FlowState {
        let s = StarShape::from_terms(Vec3::zeros(), 1.0, &[(2, 0, c20)]).unwrap();
        FlowState::new(&s, volume, &FlowOptions::default()).unwrap()
    }

    #[test]
    fn ball_is_critical() {
        let s = start(0.0, 1.0);
        assert!(s.gradient_norm < 1e-10, "{}", s.gradient_norm);
        let next = flow_step(&s, &FlowOptions::default()).unwrap();
        assert!(next.asphericity < 1e-15, "{}", next.asphericity);
        assert!((next.volume - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gradient_restores_the_ball() {
        let s = start(0.05, 1.0);
        assert!(s.gradient[harmonics::index(2, 0)] > 0.0);
        assert!((s.volume - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let opts = FlowOptions::default();
        let s = start(0.1, 1.0);
        let h = 1e-3;
        let k = harmonics::index(2, 0);
        let mut plus = s.coeffs.clone();
        let mut minus = s.coeffs.clone();
        plus[k] += h;
        minus[k] -= h;
        let ep = constrained_energy(Vec3::zeros(), &plus, 1.0, opts.resolution).unwrap();
        let em = constrained_energy(Vec3::zeros(), &minus, 1.0, opts.resolution).unwrap();
        let fd = (ep.value - em.value) / (2.0 * h);
        assert!(
            (s.gradient[k] - fd).abs() < 0.05 * fd.abs(),
            "{} vs {fd}",
            s.gradient[k]
        );
    }

    #[test]
    fn degeneracy_is_reported() {
        let s = StarShape::from_terms(Vec3::zeros(), 1.0, &[(2, 0, 3.1)]).unwrap();
        match FlowState::new(&s, 1.0, &FlowOptions::default()) {
            Err(Error::RadialDegeneracy(m)) => assert!(m < DEGENERACY_FACTOR),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn asphericity_decreases() {
        let opts = FlowOptions::default();
        let mut s = start(0.1, 1.0);
        for _ in 0..20 {
            let next = flow_step(&s, &opts).unwrap();
            assert!(next.asphericity < s.asphericity);
            assert!(next.energy.value <= s.energy.value + 3.0 * next.energy.std_error.hypot(s.energy.std_error));
            assert!((next.volume - 1.0).abs() < 1e-8);
            s = next;
        }
    }
}
