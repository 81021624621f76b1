//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs under `cargo test` (it is a `harness = false` test target) or on its
//! own with `cargo test -p nlsv-core --test acceptance`.

use std::f64::consts::PI;
use std::time::Instant;

use nlsv::diagnostics::{
    cumulative_integral, nested_double_integral, residual_cross_term, residual_pseudoconformal, residual_virial,
    weighted_integral, InitialData,
};
use nlsv::propagator::{check_factorization, duhamel_residual_series};
use nlsv::report::{verify, ToleranceModel};
use nlsv::scenarios::{free_gaussian_exact, glassey_experiment};
use nlsv::solver::{convergence_order, evolve};
use nlsv::{Complex, DiagnosticSample64, Field64, Grid64, Integrator, RunConfig64, ScenarioSpec, TimeSeries64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Every sample from every run, for the algebraic J check.
#[derive(Default)]
struct Pool {
    samples: Vec<DiagnosticSample64>,
}

impl Pool {
    fn run(&mut self, cfg: &RunConfig64) -> TimeSeries64 {
        let series = evolve(cfg).expect("run failed");
        self.samples.extend(series.samples.iter().cloned());
        series
    }
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn soliton_invariance(pool: &mut Pool) -> Outcome {
    let mut cfg = RunConfig64::soliton();
    cfg.t_end = 2.0;
    let series = pool.run(&cfg);
    let s = &series.samples;
    let charge = s.iter().map(|x| (x.charge - 2.0).abs() / 2.0).fold(0.0, f64::max);
    let energy = s.iter().map(|x| (x.energy + 1.0 / 3.0).abs()).fold(0.0, f64::max);
    let variance = s.iter().map(|x| (x.variance - PI * PI / 6.0).abs()).fold(0.0, f64::max);
    let momentum = s.iter().map(|x| x.momentum[0].abs()).fold(0.0, f64::max);
    let h = series.sample_spacing;
    let init = InitialData::from_sample(&s[0]);
    let virial = max_abs(&residual_virial(s, h, &init));
    let pc = max_abs(&residual_pseudoconformal(s, h, &init));
    let cross = max_abs(&residual_cross_term(s, h, &init));
    let pass = charge <= 1e-8
        && energy <= 1e-6
        && variance <= 1e-3
        && momentum <= 1e-10
        && virial <= 1e-3
        && pc <= 1e-3
        && cross <= 1e-3;
    Outcome::new(
        pass,
        format!(
            "charge {charge:.1e}, energy {energy:.1e}, variance {variance:.1e}, momentum {momentum:.1e}, \
             virial {virial:.1e}, pseudo-conformal {pc:.1e}, cross {cross:.1e}"
        ),
    )
}

fn free_evolution(pool: &mut Pool) -> Outcome {
    let mut cfg = RunConfig64::free_gaussian();
    cfg.t_end = 2.0;
    cfg.dt = 1e-2;
    cfg.sample_every = 5;
    cfg.store_snapshots = true;
    let series = pool.run(&cfg);
    let grid = cfg.grid().unwrap();
    let l2 = series
        .snapshots
        .iter()
        .zip(&series.times)
        .map(|(u, &t)| u.sub(&free_gaussian_exact(t, &grid).unwrap()).unwrap().norm())
        .fold(0.0, f64::max);
    let variance = series
        .samples
        .iter()
        .map(|s| (s.variance - PI.sqrt() / 2.0 * (1.0 + s.t * s.t)).abs())
        .fold(0.0, f64::max);
    let w = series.samples.iter().map(|s| s.w_int.abs()).fold(0.0, f64::max);
    let report = verify(&cfg, &series, &ToleranceModel::default()).unwrap();
    let (worst_name, worst) = report
        .identities
        .iter()
        .map(|r| (r.name.as_str(), r.max_abs))
        .fold(("", 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let pass = l2 <= 1e-8 && variance <= 1e-8 && w == 0.0 && worst <= 1e-6 && report.passed();
    Outcome::new(
        pass,
        format!("L2 {l2:.1e}, variance {variance:.1e}, W {w:.1e}, worst residual {worst:.1e} ({worst_name})"),
    )
}

fn mass_critical(pool: &mut Pool) -> Outcome {
    let w_ratio = |series: &TimeSeries64, p: f64| {
        series
            .samples
            .iter()
            .map(|s| {
                let scale = (s.potential_int.abs() * (p + 1.0) / 2.0).max(f64::MIN_POSITIVE);
                s.w_int.abs() / scale
            })
            .fold(0.0, f64::max)
    };
    let mut quintic = RunConfig64::new(1, 512, 20.0, 1.0, 5.0, ScenarioSpec::gaussian(1, 1.0, 1.0));
    quintic.t_end = 1.0;
    let defocusing = pool.run(&quintic);
    let mut cubic_2d = RunConfig64::new(2, 128, 10.0, -1.0, 3.0, ScenarioSpec::gaussian(2, 1.0, 1.0));
    cubic_2d.dt = 1e-2;
    cubic_2d.t_end = 0.5;
    cubic_2d.sample_every = 5;
    let planar = pool.run(&cubic_2d);
    let w1 = w_ratio(&defocusing, 5.0);
    let w2 = w_ratio(&planar, 3.0);

    let q: Vec<f64> = defocusing.samples.iter().map(|s| s.j_norm2 + 2.0 * s.t * s.t * s.potential_int).collect();
    let drift = q.iter().map(|v| (v - q[0]).abs()).fold(0.0, f64::max) / q[0].abs().max(1.0);
    let pass = w1 <= 1e-13 && w2 <= 1e-13 && drift <= 1e-3;
    Outcome::new(pass, format!("W/scale n=1 {w1:.1e}, n=2 {w2:.1e}; pseudo-conformal drift {drift:.1e}"))
}

fn j_expansion(pool: &Pool) -> Outcome {
    let worst = pool
        .samples
        .iter()
        .map(|s| {
            let scale = s.j_norm2.abs().max(s.variance.abs()).max(f64::MIN_POSITIVE);
            s.j_expansion_defect().abs() / scale
        })
        .fold(0.0, f64::max);
    Outcome::new(worst <= 1e-10, format!("{} samples, worst relative defect {worst:.1e}", pool.samples.len()))
}

fn summation_by_parts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let h: f64 = rng.gen_range(1e-3..1e-1);
        let g: Vec<f64> = (0..1000).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let cum = cumulative_integral(&g, h);
        let nested = nested_double_integral(&g, h);
        let weighted = weighted_integral(&g, h);
        let rhs: Vec<f64> = cum.iter().zip(&nested).enumerate().map(|(i, (c, n))| i as f64 * h * c - n).collect();
        let scale = max_abs(&weighted).max(max_abs(&rhs)).max(f64::MIN_POSITIVE);
        let defect = weighted.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(defect / scale);
    }
    Outcome::new(worst <= 1e-12, format!("100 series of length 1000, worst relative defect {worst:.1e}"))
}

fn convergence() -> Outcome {
    let dts = [4e-3, 2e-3, 1e-3];
    // dx = 80/512 keeps the classical RK4 step inside its stability region
    // at the largest dt, and the wider box pushes the sech tail mismatch at
    // the periodic seam (about sech(L)) below the RK4 error.
    let mut cfg = RunConfig64::soliton();
    cfg.half_width = 40.0;
    cfg.t_end = 1.0;
    let strang = convergence_order(&cfg, &dts).unwrap();
    cfg.integrator = Integrator::Rk4;
    let rk4 = convergence_order(&cfg, &dts).unwrap();
    let finest = dts.len() - 1;
    // Gap between the two most accurate final states, against the summed
    // error models at that step.
    let dt = dts[finest];
    let gap = strang.finals[finest].sub(&rk4.finals[finest]).unwrap().norm();
    let agreement = gap / (strang.model_error(dt) + rk4.model_error(dt));
    let pass = (strang.order - 2.0).abs() <= 0.1
        && (rk4.order - 4.0).abs() <= 0.2
        && strang.reliable
        && rk4.reliable
        && agreement <= 1.0;
    Outcome::new(
        pass,
        format!(
            "Strang order {:.3} (errors {:.1e}..{:.1e}), RK4 order {:.3} (errors {:.1e}..{:.1e}), \
             gap within model, margin {:.1e} (reliable: {}, {})",
            strang.order, strang.errors[0], strang.errors[finest], rk4.order, rk4.errors[0], rk4.errors[finest],
            1.0 - agreement, strang.reliable, rk4.reliable
        ),
    )
}

fn duhamel(pool: &mut Pool) -> Outcome {
    let at_spacing = |pool: &mut Pool, every: usize| {
        let mut cfg = RunConfig64::soliton();
        cfg.sample_every = every;
        cfg.store_snapshots = true;
        let series = pool.run(&cfg);
        let nl = cfg.nonlinearity().unwrap();
        let r = duhamel_residual_series(&series.snapshots, series.sample_spacing, &nl).unwrap();
        *r.last().unwrap()
    };
    let coarse = at_spacing(pool, 10);
    let fine = at_spacing(pool, 5);
    let ratio = coarse / fine;
    let pass = coarse <= 1e-3 && (3.5..=4.5).contains(&ratio);
    Outcome::new(pass, format!("h=1e-2: {coarse:.2e}, h=5e-3: {fine:.2e}, ratio {ratio:.2}"))
}

fn factorization() -> Outcome {
    let residual = |n: usize| {
        let grid = Grid64::new(1, n, 20.0).unwrap();
        let phi = Field64::from_fn(&grid, |x| Complex::new((-x[0] * x[0] / 2.0).exp(), 0.0)).unwrap();
        check_factorization(&phi, 0.5).unwrap()
    };
    let ladder: Vec<(usize, f64)> = [64, 128, 256, 1024].iter().map(|&n| (n, residual(n))).collect();
    // Past 256 points both sides agree to roundoff, so the refinement trend
    // is read off the under-resolved end of the ladder.
    let decreasing = ladder[0].1 > ladder[1].1 && ladder[1].1 > ladder[2].1 && ladder[3].1 < ladder[1].1;
    let at_1024 = ladder[3].1;
    let listing: Vec<String> = ladder.iter().map(|(n, r)| format!("N={n}: {r:.1e}")).collect();
    Outcome::new(at_1024 <= 1e-6 && decreasing, listing.join(", "))
}

fn glassey() -> Outcome {
    let start = Instant::now();
    let mut cfg = RunConfig64::new(1, 2048, 10.0, -1.0, 5.0, ScenarioSpec::gaussian(1, 2.0, 0.5_f64.sqrt()));
    cfg.dt = 1e-5;
    cfg.t_end = 0.5;
    cfg.sample_every = 10;
    let verdict = glassey_experiment(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let predicted = verdict.predicted_time_bound.unwrap_or(f64::NAN);
    let abort = verdict.observed_abort_time.unwrap_or(f64::INFINITY);
    let target = 2.0 * verdict.energy0;
    let curvature_err = ((verdict.variance_curvature_fit - target) / target).abs();
    let pass = verdict.energy0 < 0.0
        && verdict.criterion_met
        && curvature_err <= 0.1
        && abort < 1.5 * predicted
        && elapsed < 30.0;
    Outcome::new(
        pass,
        format!(
            "E0 {:.4}, curvature {:.4} vs {target:.4} ({curvature_err:.1e}), abort {abort:.4} vs bound {predicted:.4}, \
             {elapsed:.1} s",
            verdict.energy0, verdict.variance_curvature_fit
        ),
    )
}

fn boosted_soliton(pool: &mut Pool) -> Outcome {
    let mut cfg = RunConfig64::soliton();
    cfg.initial = ScenarioSpec::boosted(vec![1.0]);
    let series = pool.run(&cfg);
    let v = series.snapped_velocity[0];
    let s = &series.samples;
    let p0 = s[0].momentum[0];
    let boost = (p0 - v * s[0].charge).abs();
    let drift = s.iter().map(|x| (x.momentum[0] - p0).abs()).fold(0.0, f64::max) / p0.abs();
    Outcome::new(boost <= 1e-10 && drift <= 1e-8, format!("v {v:.4}, |P(0) - vI| {boost:.1e}, P drift {drift:.1e}"))
}

fn main() {
    let mut pool = Pool::default();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 soliton invariance", soliton_invariance(&mut pool)),
        ("2 exact free evolution", free_evolution(&mut pool)),
        ("3 mass-critical structure", mass_critical(&mut pool)),
        ("5 summation by parts", summation_by_parts()),
        ("6 convergence orders", convergence()),
        ("7 duhamel residual", duhamel(&mut pool)),
        ("8 galilean factorization", factorization()),
        ("9 glassey blow-up", glassey()),
        ("10 boost covariance", boosted_soliton(&mut pool)),
    ];
    // The J check covers every sample collected above, so it runs last.
    results.insert(3, ("4 J expansion", j_expansion(&pool)));

    let mut failed = 0;
    for (name, outcome) in &results {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
