//! Acceptance suite. Runs without the libtest harness so that each
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use liquid_drop::energy::{
    ball_profile, boundary_interaction, coulomb_energy, sampled_coulomb, sampled_potential, splitting_threshold,
};
use liquid_drop::flow::{constrained_energy, energy_gradient, run_flow, FlowOptions, FlowState, FlowStatus};
use liquid_drop::harmonics;
use liquid_drop::proofcheck::{
    binding_energy_bounds, outer_min_chain, roundness_chain_for_volume, roundness_polynomial_chain,
    roundness_threshold_volume, two_ball_crossover, ChainStatus,
};
use liquid_drop::santalo::{chord_coulomb_bounds, chord_moment_identities, jacobian_check, verify_main_inequalities};
use liquid_drop::shapes::{Mesh, StarShape};
use liquid_drop::variation::{lagrange_multiplier, mean_convexity_volume_threshold, stationarity_residual};
use liquid_drop::{Body, Estimate, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn(&mut Log));

const MILLION: usize = 1_000_000;
const K: f64 = 3.0;

/// Collects failed sub-checks; a criterion passes when none failed.
#[derive(Default)]
struct Log {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Log {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }
}

fn z(a: Estimate, b: Estimate) -> f64 {
    let s = a.std_error.hypot(b.std_error);
    let d = a.value - b.value;
    if s > 0.0 {
        d / s
    } else if d.abs() <= 1e-12 * a.value.abs().max(b.value.abs()) {
        0.0
    } else {
        f64::INFINITY.copysign(d)
    }
}

fn ball(r: f64) -> Body {
    Body::ball(r).unwrap()
}

fn ellipsoid() -> Body {
    Body::ellipsoid(1.0, 1.0, 2.0).unwrap()
}

fn cube() -> Body {
    Body::Mesh(Mesh::cube(Vec3::zeros(), 1.0, 0).unwrap())
}

fn dumbbell() -> Body {
    Body::StarShape(StarShape::from_terms(Vec3::zeros(), 1.0, &[(2, 0, 2.0)]).unwrap())
}

fn single_worker<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

fn closed_form_coulomb(log: &mut Log) {
    let exact = 16.0 * PI * PI / 15.0;
    let t = Instant::now();
    let d = single_worker(|| sampled_coulomb(&ball(1.0), MILLION, 1));
    let elapsed = t.elapsed();
    let zs = (d.value - exact) / d.std_error;
    log.check(
        zs.abs() <= K,
        format!("D = {:.5} ± {:.5} vs {exact:.5} (z = {zs:.2})", d.value, d.std_error),
    );
    log.check((d.value - exact).abs() <= 0.01 * exact, "within 1%");
    log.check(
        elapsed < Duration::from_secs(30),
        format!("{:.1} s on one worker", elapsed.as_secs_f64()),
    );
}

/// `∫_{B×S²} ℓ^α` for the unit ball, via the chord `2 cos u`.
fn ball_chord_moment(alpha: f64) -> f64 {
    8.0 * PI * PI * 2f64.powf(alpha + 1.0) / ((alpha + 1.0) * (alpha + 3.0))
}

fn santalo_identity(log: &mut Log) {
    let alphas = [0.0, 1.0, 2.0];
    for (name, body) in [("ball", ball(1.0)), ("ellipsoid", ellipsoid()), ("cube", cube())] {
        let reports = chord_moment_identities(&body, &alphas, MILLION, 2).unwrap();
        for r in &reports {
            log.check(
                r.z_score.abs() <= K,
                format!(
                    "{name} alpha={}: {:.4} vs {:.4} (z = {:.2})",
                    r.alpha, r.lhs.value, r.rhs.value, r.z_score
                ),
            );
            if name == "ball" {
                let exact = ball_chord_moment(r.alpha);
                for (side, e) in [("lhs", r.lhs), ("rhs", r.rhs)] {
                    let zs = z(e, Estimate::exact(exact));
                    log.check(
                        zs.abs() <= K,
                        format!("ball alpha={} {side} vs {exact:.4} (z = {zs:.2})", r.alpha),
                    );
                }
            }
        }
    }
    log.check(
        (ball_chord_moment(2.0) - 42.11).abs() < 0.005,
        format!("64 pi^2/15 = {:.4}", ball_chord_moment(2.0)),
    );
}

fn equality_cases(log: &mut Log) {
    let [p2d, pdb] = verify_main_inequalities(&ball(1.0), MILLION, 3);
    log.check(
        pdb.equality && pdb.slack.value.abs() <= K * pdb.slack.std_error + 1e-12 * pdb.right.value,
        format!(
            "ball D-boundary slack {:.3e} ± {:.1e}",
            pdb.slack.value, pdb.slack.std_error
        ),
    );
    let v = 4.0 * PI / 3.0;
    let expected = 16.0 * PI.powi(3) / 5.0 - v.powi(3);
    log.check(
        p2d.strict && (p2d.slack.value - expected).abs() < 1e-9,
        format!(
            "ball P2D slack {:.4} = {:.2} - {:.2}",
            p2d.slack.value, p2d.right.value, p2d.left.value
        ),
    );
    log.check(
        (p2d.right.value - 99.22).abs() < 0.005 && (p2d.left.value - 73.50).abs() < 0.005,
        "99.22 and 73.50",
    );
    for r in verify_main_inequalities(&ellipsoid(), MILLION, 3) {
        log.check(
            r.z_score > 5.0,
            format!("ellipsoid {} slack z = {:.1}", r.name, r.z_score),
        );
    }
}

fn chord_saturation(log: &mut Log) {
    let b = ball(1.0);
    let bounds = chord_coulomb_bounds(&b, MILLION, 4);
    let d = coulomb_energy(&b, 0, 0);
    let db = boundary_interaction(&b, 0, 0);
    let z3 = z(bounds.m3, d.scale(12.0));
    let z2 = z(bounds.m2, db.scale(2.0));
    log.check(
        z3.abs() <= K,
        format!(
            "ball m3 {:.3} vs 12D {:.3} (z = {z3:.2})",
            bounds.m3.value,
            12.0 * d.value
        ),
    );
    log.check(
        z2.abs() <= K,
        format!(
            "ball m2 {:.3} vs 2Db {:.3} (z = {z2:.2})",
            bounds.m2.value,
            2.0 * db.value
        ),
    );
    let peanut = dumbbell();
    let n = 200_000;
    let bounds = chord_coulomb_bounds(&peanut, n, 5);
    let d = coulomb_energy(&peanut, n, 6).scale(12.0);
    let zd = z(bounds.m3, d);
    log.check(
        zd < -K,
        format!("dumbbell m3 {:.1} vs 12D {:.1} (z = {zd:.1})", bounds.m3.value, d.value),
    );
}

fn jacobian(log: &mut Log) {
    for (name, body) in [("ball", ball(1.0)), ("cube", cube())] {
        let r = jacobian_check(&body, 1000, 7);
        log.check(
            r.used >= 1000 && r.max_relative_deviation < 1e-4,
            format!(
                "{name}: max deviation {:.2e} over {} samples",
                r.max_relative_deviation, r.used
            ),
        );
    }
}

fn stationarity(log: &mut Log) {
    for r in [0.5, 1.0] {
        let body = ball(r);
        let rep = stationarity_residual(&body, 100_000, 8).unwrap();
        log.check(
            rep.is_stationary(K),
            format!("R={r}: residual max {:.2e}, z {:.2}", rep.residual_max, rep.max_z),
        );
        let lambda = lagrange_multiplier(&body, 0, 0).value;
        let expected = 2.0 / r + 4.0 * PI * r * r / 3.0;
        log.check(
            (lambda - expected).abs() < 1e-9,
            format!("R={r}: lambda {lambda:.12} vs {expected:.12}"),
        );
    }
}

fn thresholds(log: &mut Log) {
    let vs = splitting_threshold();
    log.check((vs - 3.51207).abs() < 1e-5, format!("V_* = {vs:.6}"));
    // Independent root of the closed-form gap by the secant method.
    let gap = |v: f64| 2.0 * ball_profile(v / 2.0).unwrap() - ball_profile(v).unwrap();
    let (mut a, mut b) = (1.0, 10.0);
    for _ in 0..200 {
        let c = b - gap(b) * (b - a) / (gap(b) - gap(a));
        a = b;
        b = c;
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    log.check((vs - b).abs() < 1e-9, format!("secant root {b:.10}"));
    let x = two_ball_crossover(1.0, 10.0, 1e-9).unwrap();
    log.check((x - vs).abs() < 1e-6, format!("bisected crossover {x:.8}"));
    let mc = mean_convexity_volume_threshold();
    log.check((mc - 2.43432).abs() < 1e-4, format!("mean-convexity threshold {mc:.6}"));
    let root = roundness_threshold_volume();
    log.check((root - 1.0).abs() < 1e-6, format!("f'_R root at V = {root:.9}"));
}

fn proof_chains(log: &mut Log) {
    let t = Instant::now();
    for v in [0.1, 0.5, 1.0] {
        let r = outer_min_chain(v).unwrap();
        log.check(r.verdict, format!("outer_min V={v}: {:?}", r.status));
        log.check(
            r.values["f(1)"] == -1.0 && r.values["g(1)"] == 39.0,
            "f(1) = -1, g(1) = 39",
        );
    }
    for radius in [0.3, 0.5, 0.62] {
        let r = roundness_polynomial_chain(radius).unwrap();
        let f = r.values["f_R(4 pi R^2)"];
        log.check(
            r.verdict && f.abs() < 1e-10,
            format!("roundness R={radius}: f_R(4 pi R^2) = {f:.1e}"),
        );
    }
    let r = roundness_chain_for_volume(1.0).unwrap();
    log.check(r.status == ChainStatus::Pass, "roundness at V = 1");
    let b = binding_energy_bounds();
    let (kmn, lower, upper) = (b.values["kmn_lower"], b.values["lower"], b.values["upper"]);
    log.check(b.verdict, "binding chain verdict");
    log.check(
        (kmn - (243.0 * PI / 16.0).cbrt()).abs() < 1e-12 && (kmn - 3.6269).abs() < 1e-4,
        format!("kmn {kmn:.5}"),
    );
    log.check(
        (lower - (36.0 * PI).cbrt()).abs() < 1e-12 && (lower - 4.8360).abs() < 1e-4,
        format!("lower {lower:.5}"),
    );
    // 3 (9π/5)^{1/3} = 5.34477; 5.3451 agrees only to 3 decimals.
    log.check(
        (upper - 3.0 * (9.0 * PI / 5.0).cbrt()).abs() < 1e-12 && (upper - 5.3451).abs() < 5e-4,
        format!("upper {upper:.5}"),
    );
    log.check(b.flags.iter().any(|f| f.contains("3.836")), "3.836 flagged");
    let elapsed = t.elapsed();
    log.check(
        elapsed < Duration::from_secs(5),
        format!("{:.2} s", elapsed.as_secs_f64()),
    );
}

fn flow(log: &mut Log) {
    let t = Instant::now();
    let opts = FlowOptions::default();
    let start = StarShape::from_terms(Vec3::zeros(), 1.0, &[(2, 0, 0.1)]).unwrap();
    let state = FlowState::new(&start, 1.0, &opts).unwrap();

    let g = energy_gradient(&state, &opts).unwrap();
    let h = 1e-3;
    let center = Vec3::from(state.center);
    let mut fd = vec![0.0; state.coeffs.len()];
    for (i, d) in fd.iter_mut().enumerate() {
        if harmonics::degree_order(i).0 < 2 {
            continue;
        }
        let mut plus = state.coeffs.clone();
        let mut minus = state.coeffs.clone();
        plus[i] += h;
        minus[i] -= h;
        let ep = constrained_energy(center, &plus, 1.0, opts.resolution).unwrap();
        let em = constrained_energy(center, &minus, 1.0, opts.resolution).unwrap();
        *d = (ep.value - em.value) / (2.0 * h);
    }
    let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = g
        .components
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).abs() / b.abs().max(scale))
        .fold(0.0f64, f64::max);
    log.check(
        worst < 0.05,
        format!("gradient vs central differences: worst {:.2e}", worst),
    );

    let traj = run_flow(state, 500, 1e-9, &opts).unwrap();
    let f = &traj.final_state;
    let target = ball_profile(1.0).unwrap();
    let zs = (f.energy.value - target) / f.energy.std_error.max(1e-300);
    log.check(f.asphericity < 0.01, format!("asphericity {:.1e}", f.asphericity));
    log.check(
        zs.abs() <= K,
        format!("E = {:.10} vs {target:.10} (z = {zs:.2})", f.energy.value),
    );
    log.check((target - 5.8032).abs() < 5e-5, "ball_profile(1) = 5.8032");
    log.check(
        f.step <= 500 && traj.status == FlowStatus::Converged,
        format!("{} steps", f.step),
    );
    let elapsed = t.elapsed();
    log.check(
        elapsed < Duration::from_secs(600),
        format!("{:.1} s", elapsed.as_secs_f64()),
    );
}

fn random_star(rng: &mut ChaCha8Rng) -> StarShape {
    let mut terms = Vec::new();
    for l in 2..=3usize {
        for m in -(l as i32)..=(l as i32) {
            terms.push((l, m, rng.random_range(-0.12..0.12)));
        }
    }
    StarShape::from_terms(Vec3::zeros(), rng.random_range(0.5..1.5), &terms).unwrap()
}

fn invariants(log: &mut Log) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let probes = 1000;
    let per_probe = 4000;
    for k in 0..5 {
        let body = Body::StarShape(random_star(&mut rng));
        let r = body.equivalent_radius();
        let bound = 2.0 * PI * r * r;
        let points = body.sample_interior(probes, 100 + k);
        let worst = points
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let v = sampled_potential(&body, x, per_probe, 1000 * k + i as u64);
                (v.value - bound) / v.std_error
            })
            .fold(f64::NEG_INFINITY, f64::max);
        log.check(worst <= K, format!("star {k}: bathtub worst z {worst:.2}"));
        let d = coulomb_energy(&body, 200_000, 200 + k);
        let dball = 16.0 * PI * PI * r.powi(5) / 15.0;
        let zr = (d.value - dball) / d.std_error;
        log.check(zr <= K, format!("star {k}: Riesz z {zr:.1}"));
    }
    let n = 200_000;
    let star = Body::StarShape(random_star(&mut rng));
    for (name, body) in [("star", star), ("cube", cube())] {
        for t in [0.5, 2.0] {
            let scaled = body.scaled(t).unwrap();
            let pairs = [
                ("perimeter", 2, body.perimeter(), scaled.perimeter()),
                ("volume", 3, body.volume(), scaled.volume()),
                (
                    "D-boundary",
                    4,
                    boundary_interaction(&body, n, 11),
                    boundary_interaction(&scaled, n, 12),
                ),
                ("D", 5, coulomb_energy(&body, n, 13), coulomb_energy(&scaled, n, 14)),
            ];
            for (what, power, base, value) in pairs {
                let zs = z(value, base.scale(t.powi(power)));
                log.check(zs.abs() <= K, format!("{name} t={t} {what} ~ t^{power} (z = {zs:.2})"));
            }
        }
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed-form Coulomb energy of the unit ball", closed_form_coulomb),
        ("chord-moment identity", santalo_identity),
        ("equality cases of the Coulomb inequalities", equality_cases),
        ("chord-Coulomb saturation", chord_saturation),
        ("sphere-bundle Jacobian", jacobian),
        ("stationarity of balls", stationarity),
        ("volume thresholds", thresholds),
        ("scalar proof chains", proof_chains),
        ("volume-constrained flow", flow),
        ("statistical invariants", invariants),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t = Instant::now();
        let mut log = Log::default();
        run(&mut log);
        let secs = t.elapsed().as_secs_f64();
        if log.failures.is_empty() {
            println!("PASS criterion {n:2}: {name} ({secs:.1} s)");
        } else {
            failed += 1;
            println!(
                "FAIL criterion {n:2}: {name} ({secs:.1} s): {}",
                log.failures.join("; ")
            );
        }
        if verbose {
            for note in &log.notes {
                println!("    {note}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
