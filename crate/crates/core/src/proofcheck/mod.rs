//! Verification of the scalar inequality chains behind the roundness
//! argument.
//!
//! Polynomial claims are decided in exact rational arithmetic: identities by
//! comparing coefficients, signs on `[a, ∞)` by Taylor-shifting to `a` and
//! inspecting coefficient signs. Non-polynomial claims are bounded with
//! outward-rounded intervals. Plain floating-point evaluations appear only as
//! corroboration or for quantities claimed to equal a closed form.

pub mod interval;
pub mod poly;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::energy::{ball_profile, splitting_threshold};
use crate::{Error, Result};
use interval::Interval;
use poly::{integer, rational, Poly};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `margin > 0`.
    Positive,
    /// `margin ≥ 0`.
    NonNegative,
    /// `|margin| ≤ tolerance`.
    Zero { tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub claim: String,
    /// `"exact"`, `"interval"`, `"closed_form"` or `"float_grid"`.
    pub method: String,
    pub margin: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Checkpoint {
    fn float(claim: impl Into<String>, method: &str, margin: f64, relation: Relation) -> Self {
        let pass = margin.is_finite()
            && match relation {
                Relation::Positive => margin > 0.0,
                Relation::NonNegative => margin >= 0.0,
                Relation::Zero { tolerance } => margin.abs() <= tolerance,
            };
        Self {
            claim: claim.into(),
            method: method.into(),
            margin,
            relation,
            pass,
        }
    }

    /// Pass/fail decided on the exact value.
    fn exact(claim: impl Into<String>, margin: &BigRational, relation: Relation) -> Self {
        let pass = match relation {
            Relation::Positive => margin.is_positive(),
            Relation::NonNegative => !margin.is_negative(),
            Relation::Zero { .. } => margin.is_zero(),
        };
        let relation = match relation {
            Relation::Zero { .. } => Relation::Zero { tolerance: 0.0 },
            r => r,
        };
        Self {
            claim: claim.into(),
            method: "exact".into(),
            margin: margin.to_f64().unwrap_or(f64::NAN),
            relation,
            pass,
        }
    }

    /// Certificate with no numeric margin of its own (margin 0 for
    /// identities, 1 for sign certificates).
    fn certificate(claim: impl Into<String>, holds: bool, identity: bool) -> Self {
        Self {
            claim: claim.into(),
            method: "exact".into(),
            margin: if identity { 0.0 } else { 1.0 },
            relation: if identity {
                Relation::Zero { tolerance: 0.0 }
            } else {
                Relation::Positive
            },
            pass: holds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStatus {
    Pass,
    Fail,
    /// The chain's hypotheses do not cover the requested parameter.
    RangeExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarChainReport {
    pub chain: String,
    pub parameters: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub flags: Vec<String>,
    pub status: ChainStatus,
    pub verdict: bool,
}

impl ScalarChainReport {
    fn new(chain: &str) -> Self {
        Self {
            chain: chain.into(),
            parameters: BTreeMap::new(),
            values: BTreeMap::new(),
            checkpoints: Vec::new(),
            flags: Vec::new(),
            status: ChainStatus::Pass,
            verdict: true,
        }
    }

    fn push(&mut self, c: Checkpoint) {
        self.checkpoints.push(c);
    }

    fn finish(mut self, range_exceeded: bool) -> Self {
        let all = self.checkpoints.iter().all(|c| c.pass);
        self.status = if range_exceeded {
            ChainStatus::RangeExceeded
        } else if all {
            ChainStatus::Pass
        } else {
            ChainStatus::Fail
        };
        self.verdict = self.status == ChainStatus::Pass;
        self
    }

    pub fn checkpoint(&self, claim_prefix: &str) -> Option<&Checkpoint> {
        self.checkpoints.iter().find(|c| c.claim.starts_with(claim_prefix))
    }
}

impl fmt::Display for ScalarChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "chain: {}", self.chain)?;
        for (k, v) in &self.parameters {
            writeln!(f, "  {k} = {v}")?;
        }
        for (k, v) in &self.values {
            writeln!(f, "  {k} = {v:.10}")?;
        }
        for c in &self.checkpoints {
            writeln!(
                f,
                "  [{}] {}  (margin {:.3e}, {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.claim,
                c.margin,
                c.method
            )?;
        }
        for flag in &self.flags {
            writeln!(f, "  FLAG: {flag}")?;
        }
        let status = match self.status {
            ChainStatus::Pass => "pass",
            ChainStatus::Fail => "fail",
            ChainStatus::RangeExceeded => "certificate range exceeded",
        };
        write!(f, "  verdict: {status}")
    }
}

fn exact_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

fn check_positive_parameter(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {x}")))
    }
}

/// `f(α) = 12 − 20α² + 17α³ − 10α⁵`.
pub fn outer_min_f() -> Poly {
    Poly::from_ints(&[12, 0, -20, 17, 0, -10])
}

/// `g(α) = 40 − 51α + 50α³`, with `f′ = −α g`.
pub fn outer_min_g() -> Poly {
    Poly::from_ints(&[40, -51, 0, 50])
}

fn volume_of_radius(r: f64) -> f64 {
    4.0 * PI * r.powi(3) / 3.0
}

fn radius_of_volume(v: f64) -> f64 {
    (3.0 * v / (4.0 * PI)).cbrt()
}

/// Left side of the α-inequality at volume `V`, normalised by
/// `4π²R⁵/15`: `(1 + α³ − (1 + α³)^{5/3})(20/V + 4) + 10α³ + 4α⁵`.
fn alpha_inequality(alpha: f64, volume: f64) -> f64 {
    let a3 = alpha.powi(3);
    (1.0 + a3 - (1.0 + a3).powf(5.0 / 3.0)) * (20.0 / volume + 4.0) + 10.0 * a3 + 4.0 * alpha.powi(5)
}

/// Outer-minimality chain at volume `V`: any admissible enlargement of
/// relative size `α³` must have `α = 0`. Certified for `V ≤ 1`.
pub fn outer_min_chain(volume: f64) -> Result<ScalarChainReport> {
    check_positive_parameter("volume", volume)?;
    let mut rep = ScalarChainReport::new("outer_min");
    let r = radius_of_volume(volume);
    rep.parameters.insert("volume".into(), volume);
    rep.parameters.insert("radius".into(), r);

    // 15/(πR³) = 20/V ≥ 20.
    let v = exact_from_f64(volume)?;
    let twenty = integer(20);
    let lead = &twenty / &v;
    let in_range = lead >= twenty;
    rep.push(Checkpoint::exact(
        "15/(pi R^3) = 20/V >= 20",
        &(&lead - &twenty),
        Relation::NonNegative,
    ));
    let direct = 15.0 / (PI * r.powi(3));
    rep.push(Checkpoint::float(
        "15/(pi R^3) agrees with 20/V",
        "closed_form",
        (direct - 20.0 / volume) / (20.0 / volume),
        Relation::Zero { tolerance: 1e-12 },
    ));
    rep.values.insert("15/(pi R^3)".into(), direct);
    if !in_range {
        rep.flags.push(format!(
            "certificate range exceeded: V = {volume} > 1; the extension to V <= 20/11 is not certified"
        ));
    }

    // Dividing by 4π²R⁵/15: (8π²/3) ↦ 10 and (16π²/15) ↦ 4.
    let norm = rational(4, 15);
    let ten = &rational(8, 3) / &norm;
    let four = &rational(16, 15) / &norm;
    rep.push(Checkpoint::exact(
        "normalised coefficients of alpha^3 and alpha^5 are 10 and 4",
        &((&ten - &integer(10)).abs() + (&four - &integer(4)).abs()),
        Relation::Zero { tolerance: 0.0 },
    ));

    // (1+y)^{5/3} > 1 + y for y > 0, via (1+y)⁵ − (1+y)³ ≥ 0 with vanishing
    // constant term and a positive linear one.
    let one_plus_y = Poly::from_ints(&[1, 1]);
    let d = &one_plus_y.pow(5) - &one_plus_y.pow(3);
    let strictly = d.nonnegative_from(&BigRational::zero())
        && d.coeffs().first().is_none_or(Zero::is_zero)
        && d.coeffs().get(1).is_some_and(Signed::is_positive);
    rep.push(Checkpoint::certificate(
        "1 + y - (1 + y)^(5/3) < 0 for y > 0",
        strictly,
        false,
    ));
    // Replacing 20/V + 4 by its lower bound 24 halves to 12(..) + 5a^3 + 2a^5.
    rep.push(Checkpoint::exact(
        "24 = 2*12, 10 = 2*5, 4 = 2*2",
        &(integer(24) - integer(2) * integer(12) + integer(10) - integer(2) * integer(5) + integer(4)
            - integer(2) * integer(2)),
        Relation::Zero { tolerance: 0.0 },
    ));

    // Bernoulli: (1+y)⁵ − (1 + 5y/3)³ = 5/3 y² + 145/27 y³ + 5y⁴ + y⁵.
    let bern = Poly::new(vec![BigRational::one(), rational(5, 3)]);
    let gap = &one_plus_y.pow(5) - &bern.pow(3);
    let expected = Poly::new(vec![
        BigRational::zero(),
        BigRational::zero(),
        rational(5, 3),
        rational(145, 27),
        integer(5),
        integer(1),
    ]);
    rep.push(Checkpoint::certificate(
        "(1+y)^5 - (1+5y/3)^3 = 5/3 y^2 + 145/27 y^3 + 5 y^4 + y^5",
        gap == expected,
        true,
    ));
    rep.push(Checkpoint::certificate(
        "(1+y)^(5/3) >= 1 + 5y/3 for y >= 0",
        gap.nonnegative_from(&BigRational::zero()),
        false,
    ));

    // 12(1 + a³ − 1 − 5a³/3) + 5a³ + 2a⁵ = a³(2a² − 3).
    let a = Poly::x();
    let a3 = a.pow(3);
    let a5 = a.pow(5);
    let twelve = Poly::constant(integer(12));
    let five_a3 = a3.scale(&integer(5));
    let two_a5 = a5.scale(&integer(2));
    let small = &(&twelve * &(&a3 - &a3.scale(&rational(5, 3)))) + &(&five_a3 + &two_a5);
    let factored = &a3 * &Poly::from_ints(&[-3, 0, 2]);
    rep.push(Checkpoint::certificate(
        "12(1+a^3-(1+5a^3/3)) + 5a^3 + 2a^5 = a^3 (2a^2 - 3)",
        small == factored,
        true,
    ));
    rep.push(Checkpoint::exact(
        "a > 0 implies a^2 >= 3/2",
        &rational(3, 2),
        Relation::Positive,
    ));

    // Using (1+a³)^{5/3} ≥ a⁵ + 5a²/3.
    let large = &(&twelve * &(&(&Poly::from_ints(&[1]) + &a3) - &(&a5 + &a.pow(2).scale(&rational(5, 3)))))
        + &(&five_a3 + &two_a5);
    let f = outer_min_f();
    rep.push(Checkpoint::certificate(
        "12(1+a^3-a^5-5a^2/3) + 5a^3 + 2a^5 = 12 - 20a^2 + 17a^3 - 10a^5",
        large == f,
        true,
    ));
    let one = BigRational::one();
    let f1 = f.eval(&one);
    rep.values.insert("f(1)".into(), f1.to_f64().unwrap_or(f64::NAN));
    rep.push(Checkpoint::exact(
        "f(1) = -1",
        &(&f1 + &one),
        Relation::Zero { tolerance: 0.0 },
    ));
    let g = outer_min_g();
    let minus_a_g = &(-&a) * &g;
    rep.push(Checkpoint::certificate(
        "f'(a) = -a g(a)",
        f.derivative() == minus_a_g,
        true,
    ));
    let g1 = g.eval(&one);
    rep.values.insert("g(1)".into(), g1.to_f64().unwrap_or(f64::NAN));
    rep.push(Checkpoint::exact(
        "g(1) = 39",
        &(&g1 - &integer(39)),
        Relation::Zero { tolerance: 0.0 },
    ));
    let gp = g.derivative();
    rep.push(Checkpoint::certificate(
        "g'(a) = 150a^2 - 51",
        gp == Poly::from_ints(&[-51, 0, 150]),
        true,
    ));
    rep.push(Checkpoint::certificate(
        "g'(1+s) = 99 + 300s + 150s^2 > 0 for s >= 0",
        gp.shifted(&one) == Poly::from_ints(&[99, 300, 150]) && gp.positive_from(&one),
        false,
    ));
    rep.push(Checkpoint::certificate(
        "g(a) > 0 for a >= 1",
        g.positive_from(&one),
        false,
    ));
    rep.push(Checkpoint::exact("f(1) < 0", &(-&f1), Relation::Positive));

    // Exact grid a = 1 + k/1000 on [1, 10].
    let max_f = (0..=9000)
        .map(|k| f.eval(&(&one + &rational(k, 1000))))
        .max()
        .expect("non-empty grid");
    rep.push(Checkpoint::exact(
        "f < 0 on the grid 1 + k/1000, k <= 9000",
        &(-max_f),
        Relation::Positive,
    ));

    // Floating-point corroboration of the full inequality.
    let worst = (1..=10_000)
        .map(|k| alpha_inequality(k as f64 * 1e-3, volume.min(1.0)))
        .fold(f64::NEG_INFINITY, f64::max);
    rep.push(Checkpoint::float(
        "alpha inequality fails on the grid a = k/1000, k <= 10^4",
        "float_grid",
        -worst,
        Relation::Positive,
    ));
    rep.push(Checkpoint::exact(
        "a < 1 contradicts a^2 >= 3/2, hence a = 0",
        &(rational(3, 2) - one),
        Relation::Positive,
    ));
    Ok(rep.finish(!in_range))
}

/// [`outer_min_chain`] at the volume of the ball of radius `R`.
pub fn outer_min_chain_for_radius(radius: f64) -> Result<ScalarChainReport> {
    check_positive_parameter("radius", radius)?;
    outer_min_chain(volume_of_radius(radius))
}

/// `f_R(x) = −(3/4π)R⁻³x² + (5/R + 4πR²/3)x − 4√π √x − (64π³/3)R⁶/x`.
pub fn roundness_f(r: f64, x: f64) -> f64 {
    -(3.0 / (4.0 * PI)) * x * x / r.powi(3) + (5.0 / r + 4.0 * PI * r * r / 3.0) * x
        - 4.0 * PI.sqrt() * x.sqrt()
        - 64.0 * PI.powi(3) / 3.0 * r.powi(6) / x
}

pub fn roundness_f_prime(r: f64, x: f64) -> f64 {
    -(3.0 / (2.0 * PI)) * x / r.powi(3) + 5.0 / r + 4.0 * PI * r * r / 3.0 - 2.0 * PI.sqrt() / x.sqrt()
        + 64.0 * PI.powi(3) / 3.0 * r.powi(6) / (x * x)
}

pub fn roundness_f_second(r: f64, x: f64) -> f64 {
    -(3.0 / (2.0 * PI)) / r.powi(3) + PI.sqrt() * x.powf(-1.5) - 128.0 * PI.powi(3) / 3.0 * r.powi(6) / x.powi(3)
}

/// Upper end of the interval grid for `f″`, in units of `4πR²`.
const GRID_EXTENT: i64 = 100;
const GRID_STEP: f64 = 1e-3;

/// Chain showing that `f_R(x) ≥ 0` with `x ≥ 4πR²` forces `x = 4πR²`.
/// Certified when `V = 4πR³/3 ≤ 1`.
pub fn roundness_polynomial_chain(radius: f64) -> Result<ScalarChainReport> {
    check_positive_parameter("radius", radius)?;
    roundness_chain(radius, volume_of_radius(radius))
}

/// [`roundness_polynomial_chain`] parameterised by volume, so that `V = 1`
/// is represented exactly.
pub fn roundness_chain_for_volume(volume: f64) -> Result<ScalarChainReport> {
    check_positive_parameter("volume", volume)?;
    roundness_chain(radius_of_volume(volume), volume)
}

fn roundness_chain(r: f64, volume: f64) -> Result<ScalarChainReport> {
    let mut rep = ScalarChainReport::new("roundness");
    rep.parameters.insert("radius".into(), r);
    rep.parameters.insert("volume".into(), volume);
    let x0 = 4.0 * PI * r * r;

    // f_R(4πR²) in the basis {πR, π²R⁴}: (−12 + 20 − 8) πR + (16/3 − 16/3) π²R⁴.
    let c1 = integer(-12) + integer(20) - integer(8);
    let c4 = rational(16, 3) - rational(16, 3);
    rep.push(Checkpoint::exact(
        "f_R(4 pi R^2) = 0 identically in R",
        &(c1.abs() + c4.abs()),
        Relation::Zero { tolerance: 0.0 },
    ));
    let terms = [
        (3.0 / (4.0 * PI)) * x0 * x0 / r.powi(3),
        (5.0 / r + 4.0 * PI * r * r / 3.0) * x0,
        4.0 * PI.sqrt() * x0.sqrt(),
        64.0 * PI.powi(3) / 3.0 * r.powi(6) / x0,
    ];
    let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let f0 = roundness_f(r, x0);
    rep.values.insert("f_R(4 pi R^2)".into(), f0);
    rep.push(Checkpoint::float(
        "f_R(4 pi R^2) = 0 (relative)",
        "closed_form",
        f0 / scale,
        Relation::Zero { tolerance: 1e-10 },
    ));

    // f′_R(4πR²) = (−6 + 5 − 1)/R + (4/3 + 4/3)πR² = −2/R + 8πR²/3 = (2/R)(V − 1).
    let inv_r = integer(-6) + integer(5) - integer(1);
    let pi_r2 = rational(4, 3) + rational(4, 3);
    rep.push(Checkpoint::exact(
        "f'_R(4 pi R^2) = -2/R + (8 pi/3) R^2",
        &((inv_r + integer(2)).abs() + (pi_r2.clone() - rational(8, 3)).abs()),
        Relation::Zero { tolerance: 0.0 },
    ));
    // (8/3)πR² = (2/R)·(4πR³/3).
    rep.push(Checkpoint::exact(
        "-2/R + (8 pi/3) R^2 = (2/R)(V - 1)",
        &(pi_r2 - integer(2) * rational(4, 3)),
        Relation::Zero { tolerance: 0.0 },
    ));
    let fp_direct = roundness_f_prime(r, x0);
    let fp_closed = -2.0 / r + 8.0 * PI * r * r / 3.0;
    rep.values.insert("f'_R(4 pi R^2)".into(), fp_direct);
    rep.push(Checkpoint::float(
        "direct f'_R(4 pi R^2) matches the closed form",
        "closed_form",
        (fp_direct - fp_closed) / (2.0 / r + 8.0 * PI * r * r / 3.0),
        Relation::Zero { tolerance: 1e-10 },
    ));
    let v_exact = exact_from_f64(volume)?;
    let in_range = v_exact <= BigRational::one();
    rep.push(Checkpoint::exact(
        "f'_R(4 pi R^2) <= 0, i.e. V <= 1",
        &(BigRational::one() - v_exact),
        Relation::NonNegative,
    ));
    if !in_range {
        rep.flags.push(format!(
            "certificate range exceeded: V = {volume} > 1 makes f'_R(4 pi R^2) > 0"
        ));
    }

    // Bound on the first two terms of f″: 3/2 − 1/8 = 11/8, using
    // √π (4πR²)^{−3/2} = R⁻³/(8π).
    rep.push(Checkpoint::exact(
        "3/2 - 1/8 = 11/8",
        &(rational(3, 2) - rational(1, 8) - rational(11, 8)),
        Relation::Zero { tolerance: 0.0 },
    ));
    let lhs = PI.sqrt() * x0.powf(-1.5);
    let rhs = 1.0 / (8.0 * PI * r.powi(3));
    rep.push(Checkpoint::float(
        "sqrt(pi) (4 pi R^2)^(-3/2) = R^-3/(8 pi)",
        "closed_form",
        (lhs - rhs) / rhs,
        Relation::Zero { tolerance: 1e-12 },
    ));
    let (worst, tail) = second_derivative_bounds(r);
    rep.push(Checkpoint::float(
        "f''_R < 0 on [4 pi R^2, 400 pi R^2] (interval cells of width 1e-3 * 4 pi R^2)",
        "interval",
        -worst,
        Relation::Positive,
    ));
    rep.push(Checkpoint::float(
        "f''_R <= -(11/(8 pi)) R^-3 < 0 beyond the grid",
        "interval",
        -tail,
        Relation::Positive,
    ));
    let fpp = roundness_f_second(r, 2.0 * x0);
    rep.values.insert("f''_R(8 pi R^2)".into(), fpp);
    rep.values
        .insert("-(11/(8 pi)) R^-3".into(), -11.0 / (8.0 * PI * r.powi(3)));
    Ok(rep.finish(!in_range))
}

/// Largest interval upper bound of `f″_R` over the grid cells, and the upper
/// bound of the tail constant `−(11/8π)R⁻³`.
fn second_derivative_bounds(r: f64) -> (f64, f64) {
    let pi = Interval::point(PI);
    let ri = Interval::point(r);
    let r3 = ri.powi(3);
    let c1 = Interval::point(3.0) * (Interval::point(2.0) * pi * r3).recip();
    let c2 = pi.sqrt();
    let c3 = Interval::point(128.0) * pi.powi(3) * ri.powi(6) * Interval::point(3.0).recip();
    let x0 = Interval::point(4.0) * pi * ri.powi(2);
    let cells = (GRID_EXTENT as f64 / GRID_STEP).round() as usize;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..cells {
        let a = x0 * Interval::point(1.0 + k as f64 * GRID_STEP);
        let b = x0 * Interval::point(1.0 + (k + 1) as f64 * GRID_STEP);
        let x = Interval::new(a.lo, b.hi);
        let value = -c1 + c2 * (x * x.sqrt()).recip() - c3 * x.powi(3).recip();
        worst = worst.max(value.hi);
    }
    let tail = -(Interval::point(11.0) * (Interval::point(8.0) * pi * r3).recip());
    (worst, tail.hi)
}

/// Volume at which `f′_R(4πR²)` changes sign, by bisection on the direct
/// derivative.
pub fn roundness_threshold_volume() -> f64 {
    let sign = |r: f64| roundness_f_prime(r, 4.0 * PI * r * r);
    let (mut lo, mut hi) = (0.1, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sign(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    volume_of_radius(0.5 * (lo + hi))
}

/// Lower bound `(243π/16)^{1/3}` from the constant `4/(9π)`.
pub fn binding_lower_bound_kmn() -> f64 {
    (243.0 * PI / 16.0).cbrt()
}

/// Lower bound `(36π)^{1/3}` from the constant `3/(16π)`.
pub fn binding_lower_bound() -> f64 {
    (36.0 * PI).cbrt()
}

/// `min_R E(B_R)/|B_R| = 3(9π/5)^{1/3}`, attained at `R³ = 15/(8π)`.
pub fn binding_upper_bound() -> f64 {
    3.0 * (9.0 * PI / 5.0).cbrt()
}

/// Decimal values as printed next to the three constants.
pub const PRINTED_KMN: f64 = 3.627;
pub const PRINTED_LOWER: f64 = 3.836;
pub const PRINTED_UPPER: f64 = 5.345;

pub fn binding_energy_bounds() -> ScalarChainReport {
    let mut rep = ScalarChainReport::new("binding");
    let kmn = binding_lower_bound_kmn();
    let lower = binding_lower_bound();
    let upper = binding_upper_bound();
    rep.values.insert("kmn_lower".into(), kmn);
    rep.values.insert("lower".into(), lower);
    rep.values.insert("upper".into(), upper);

    // |Ω|³ ≤ C P²D with C = 27/(4e³) sharp: C < c₀ gives e³ > 27/(4c₀).
    // c₀ = 3/(16π): 27·16/(4·3) = 36. c₀ = 4/(9π): 27·9/(4·4) = 243/16.
    rep.push(Checkpoint::exact(
        "27/(4 * 3/(16 pi)) = 36 pi",
        &(integer(27) * integer(16) / (integer(4) * integer(3)) - integer(36)),
        Relation::Zero { tolerance: 0.0 },
    ));
    rep.push(Checkpoint::exact(
        "27/(4 * 4/(9 pi)) = 243 pi/16",
        &(integer(27) * integer(9) / (integer(4) * integer(4)) - rational(243, 16)),
        Relation::Zero { tolerance: 0.0 },
    ));
    // Ball density 3/R + (4π/5)R², stationary at R³ = 15/(8π).
    let density = |r: f64| ball_profile(volume_of_radius(r)).expect("positive") / volume_of_radius(r);
    let r_opt = (15.0 / (8.0 * PI)).cbrt();
    rep.values.insert("optimal_radius".into(), r_opt);
    rep.push(Checkpoint::float(
        "E(B_R)/|B_R| at R^3 = 15/(8 pi) equals 3 (9 pi/5)^(1/3)",
        "closed_form",
        (density(r_opt) - upper) / upper,
        Relation::Zero { tolerance: 1e-12 },
    ));
    let numeric = golden_section_min(density, 0.1, 5.0);
    rep.values.insert("numeric_minimum".into(), numeric);
    rep.push(Checkpoint::float(
        "numerical minimum of E(B_R)/|B_R| matches",
        "float_grid",
        (numeric - upper) / upper,
        Relation::Zero { tolerance: 1e-10 },
    ));
    rep.push(Checkpoint::float(
        "(243 pi/16)^(1/3) < (36 pi)^(1/3)",
        "closed_form",
        lower - kmn,
        Relation::Positive,
    ));
    rep.push(Checkpoint::float(
        "(36 pi)^(1/3) < 3 (9 pi/5)^(1/3)",
        "closed_form",
        upper - lower,
        Relation::Positive,
    ));
    // Exact ordering of the cubes: 243/16 < 36 < 27·9/5 (π factored out).
    rep.push(Checkpoint::exact(
        "243/16 < 36 < 243/5 (cubes over pi)",
        &(integer(36) - rational(243, 16)).min(rational(243, 5) - integer(36)),
        Relation::Positive,
    ));
    for (name, printed, computed) in [
        ("(243 pi/16)^(1/3)", PRINTED_KMN, kmn),
        ("(36 pi)^(1/3)", PRINTED_LOWER, lower),
        ("3 (9 pi/5)^(1/3)", PRINTED_UPPER, upper),
    ] {
        if (printed - computed).abs() > 5e-4 {
            rep.flags.push(format!(
                "printed value {printed} for {name} disagrees with the evaluated {computed:.4}; the derivation supports {computed:.4}"
            ));
        }
    }
    rep.finish(false)
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    while b - a > 1e-12 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    f(0.5 * (a + b))
}

/// `2 E_B(V/2) − E_B(V)`: positive when one ball beats two distant halves.
pub fn two_ball_gap(volume: f64) -> Result<f64> {
    Ok(2.0 * ball_profile(volume / 2.0)? - ball_profile(volume)?)
}

/// Bisection for the sign change of [`two_ball_gap`] in `[lo, hi]`.
pub fn two_ball_crossover(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (glo, ghi) = (two_ball_gap(lo)?, two_ball_gap(hi)?);
    if glo.signum() == ghi.signum() {
        return Err(Error::Domain(format!(
            "no sign change of the two-ball gap in [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if two_ball_gap(mid)?.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn two_ball_comparison(volume: f64) -> Result<ScalarChainReport> {
    check_positive_parameter("volume", volume)?;
    let mut rep = ScalarChainReport::new("two_ball");
    rep.parameters.insert("volume".into(), volume);
    let single = ball_profile(volume)?;
    let pair = 2.0 * ball_profile(volume / 2.0)?;
    let gap = pair - single;
    let vs = splitting_threshold();
    rep.values.insert("single_ball".into(), single);
    rep.values.insert("two_balls".into(), pair);
    rep.values.insert("gap".into(), gap);
    rep.values.insert("splitting_volume".into(), vs);
    let crossover = two_ball_crossover(1.0, 8.0, 1e-12)?;
    rep.values.insert("bisected_crossover".into(), crossover);
    rep.push(Checkpoint::float(
        "bisected crossover equals 5(2 - 2^(2/3))/(2^(2/3) - 1)",
        "closed_form",
        crossover - vs,
        Relation::Zero { tolerance: 1e-9 },
    ));
    let tol = 1e-9 * single;
    if (volume - vs).abs() <= 1e-12 * vs {
        rep.push(Checkpoint::float(
            "one ball and two balls tie at the splitting volume",
            "closed_form",
            gap,
            Relation::Zero { tolerance: tol },
        ));
    } else if volume < vs {
        rep.push(Checkpoint::float(
            "one ball beats two balls below the splitting volume",
            "closed_form",
            gap,
            Relation::Positive,
        ));
    } else {
        rep.push(Checkpoint::float(
            "two balls beat one ball above the splitting volume",
            "closed_form",
            -gap,
            Relation::Positive,
        ));
    }
    Ok(rep.finish(false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outer_min_passes_up_to_volume_one() {
        for v in [0.1, 0.5, 1.0] {
            let rep = outer_min_chain(v).unwrap();
            assert!(rep.verdict, "{rep}");
        }
        let at_one = outer_min_chain(1.0).unwrap();
        assert_eq!(at_one.checkpoints[0].margin, 0.0);
        assert_eq!(at_one.values["f(1)"], -1.0);
        assert_eq!(at_one.values["g(1)"], 39.0);
        let beyond = outer_min_chain(1.5).unwrap();
        assert_eq!(beyond.status, ChainStatus::RangeExceeded);
        assert!(!beyond.flags.is_empty());
    }

    #[test]
    fn roundness_zero_at_the_ball() {
        for r in [0.3, 0.62035, 1.0] {
            let rep = roundness_polynomial_chain(r).unwrap();
            assert!(rep.values["f_R(4 pi R^2)"].abs() < 1e-10 * 20.0 * PI * r);
            assert!(rep.checkpoint("f_R(4 pi R^2) = 0 (relative)").unwrap().pass);
        }
        assert!(roundness_chain_for_volume(1.0).unwrap().verdict);
        assert!(roundness_polynomial_chain(0.3).unwrap().verdict);
        assert_eq!(
            roundness_polynomial_chain(1.0).unwrap().status,
            ChainStatus::RangeExceeded
        );
        assert!((roundness_threshold_volume() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn binding_constants_and_typo() {
        let rep = binding_energy_bounds();
        assert!(rep.verdict, "{rep}");
        assert!((rep.values["kmn_lower"] - 3.6269).abs() < 1e-4);
        assert!((rep.values["lower"] - 4.8360).abs() < 1e-4);
        assert!((rep.values["upper"] - 5.34477).abs() < 1e-5);
        assert_eq!(rep.flags.len(), 1);
        assert!(rep.flags[0].contains("3.836"));
    }

    #[test]
    fn two_ball_signs() {
        assert!(two_ball_comparison(2.0).unwrap().verdict);
        assert!(two_ball_comparison(8.0).unwrap().verdict);
        let at = two_ball_comparison(splitting_threshold()).unwrap();
        assert!(at.verdict, "{at}");
        assert!(at.values["gap"].abs() < 1e-9);
    }
}
