//! Invariant suites behind `pmc verify`: convergence orders, identity
//! residuals and hypothesis checks on the shipped examples.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::{radial_reduce, Field, Grid};
use crate::error::{PmcError, Result};
use crate::geometry::{
    boundary_mean_curvature, covariant_divergence, slice_mean_curvature, ChartMetric, Warp,
};
use crate::oracles::{barrier_formula, flux_analysis, q_field_checked, spherical_cap_oracle, theta_identity_residual};
use crate::problems::{counterexample_problem, make_cmc, make_custom, DomainChart, Shape};
use crate::quad::sphere_area;
use crate::solver::{apriori_bounds, comparison_check, continuation, newton_solve, Outcome, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Geometry,
    Oracles,
    Bounds,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "oracles" => Ok(Suite::Oracles),
            "bounds" => Ok(Suite::Bounds),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite {s:?} (geometry|oracles|bounds|all)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Measured quantities (errors, rates, margins) in check-specific order.
    pub measured: Vec<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, measured: Vec<f64>, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), pass, measured, detail: detail.into() }
    }

    fn failed(name: &str, e: impl std::fmt::Display) -> Self {
        Check::new(name, false, vec![], format!("error: {e}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

fn ratios(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| w[0] / w[1]).collect()
}

fn in_order_band(r: &[f64]) -> bool {
    r.iter().all(|q| (3.5..=4.5).contains(q))
}

fn wrap(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, e))
}

fn polar_disk(radius: f64, nr: usize, ntheta: usize) -> Result<Arc<Grid>> {
    Ok(Arc::new(Grid::polar(DomainChart::new(ChartMetric::euclidean(2), Shape::disk(radius)), nr, ntheta)?))
}

pub fn geometry_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(wrap("divergence_second_order", || {
        // div W on φ²δ with φ = cosh(x₁): (1/φ²)∂_i(φ²W^i)
        let m = ChartMetric::conformal_product(2, Warp::Cosh);
        let x: [f64; 2] = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let w = |y: &[f64]| vec![y[0].sin(), y[0] * y[1]];
        let exact = x[0].cos() + x[0] + 2.0 * x[1].tanh() * x[0] * x[1];
        let errs: Vec<f64> = [0.08, 0.04, 0.02]
            .iter()
            .map(|&h| covariant_divergence(&m, w, &x, h).map(|d| (d - exact).abs()))
            .collect::<Result<_>>()?;
        let r = ratios(&errs);
        Ok(Check::new("divergence_second_order", in_order_band(&r), r, "Richardson ratios in [3.5, 4.5]"))
    }));
    out.push(wrap("slice_formula", || {
        let mut worst: f64 = 0.0;
        for n in [2, 3] {
            let m = ChartMetric::conformal_product(n + 1, Warp::Cosh);
            for t in [0.25, 0.5, 1.0] {
                let d = DomainChart::new(m.clone(), Shape::HalfSpace { level: t });
                let mut y = vec![0.1; n + 1];
                y[n] = t;
                let diff = (slice_mean_curvature(&Warp::Cosh, n, t)? - boundary_mean_curvature(&d, &y)?).abs();
                worst = worst.max(diff);
            }
        }
        Ok(Check::new("slice_formula", worst <= 1e-6, vec![worst], "slice vs boundary curvature within 1e-6"))
    }));
    out.push(wrap("counterexample_lemma", || {
        let mut worst = [0.0f64; 3];
        for (beta, n) in [(1.0, 2), (0.5, 3), (2.0, 3)] {
            let c = counterexample_problem(beta, n);
            worst[0] = worst[0].max((c.sphere_curvature(c.beta_sphere_radius()) - beta).abs());
            worst[1] = worst[1].max((c.boundary_curvature() - (n as f64 - 1.0) * c.k).abs());
            let r0 = c.euclidean_radius();
            let ball = sphere_area(n) * r0.powi(n as i32) / n as f64;
            worst[2] = worst[2].max((c.volume(r0) - ball).abs());
        }
        let pass = worst[0] <= 1e-8 && worst[1] <= 1e-8 && worst[2] <= 1e-6;
        Ok(Check::new("counterexample_lemma", pass, worst.to_vec(), "sphere curvature, boundary curvature, ball volume"))
    }));
    out.push(wrap("disk_boundary_curvature", || {
        let a = rng.gen_range(0.3..2.0);
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::disk(a));
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let h = crate::geometry::boundary_mean_curvature_numeric(&d, &[a * th.cos(), a * th.sin()])?;
        let err = (h - 1.0 / a).abs();
        Ok(Check::new("disk_boundary_curvature", err <= 1e-6, vec![err], "numeric H of a circle is 1/a"))
    }));
    out
}

pub fn oracle_checks(_rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let cap = spherical_cap_oracle(2.0, 1.0, 2);
    let p = cap.problem();
    let solves: Result<Vec<Field>> = [32, 64, 128]
        .iter()
        .map(|&nr| newton_solve(&p, &Field::from_fn(polar_disk(1.0, nr, 64)?, |_| cap.psi())))
        .collect();
    let solves = match solves {
        Ok(s) => s,
        Err(e) => return vec![Check::failed("cap_solves", e)],
    };
    let errs: Vec<f64> = solves
        .iter()
        .map(|u| u.values.iter().zip(&u.grid.coords).map(|(v, x)| (v - cap.u(x)).abs()).fold(0.0, f64::max))
        .collect();
    let r = ratios(&errs);
    out.push(Check::new(
        "cap_convergence",
        errs[1] <= 2e-3 && (3.5..=4.5).contains(&r[0]),
        vec![errs[0], errs[1], errs[2], r[0], r[1]],
        "max error at nr = 64 below 2e-3, ratio 32 -> 64 in [3.5, 4.5]",
    ));
    out.push(wrap("theta_identity_order", || {
        let t: Vec<f64> = solves.iter().map(|u| theta_identity_residual(&p, u).map(|r| r.max_abs)).collect::<Result<_>>()?;
        let r = ratios(&t);
        let mut m = t.clone();
        m.extend(&r);
        Ok(Check::new("theta_identity_order", in_order_band(&r), m, "residual ratios in [3.5, 4.5]"))
    }));
    out.push(wrap("q_field", || {
        let qs = solves.iter().map(|u| q_field_checked(&p, u)).collect::<Result<Vec<_>>>()?;
        let c: Vec<f64> = qs.iter().zip(&solves).map(|(q, u)| q.max_div_residual / u.grid.h().powi(2)).collect();
        let stable = c.windows(2).all(|w| (0.875..=1.125).contains(&(w[1] / w[0])));
        let subcritical = qs.iter().all(|q| q.margin() > 0.0);
        let mut m = c;
        m.push(qs[2].margin());
        Ok(Check::new("q_field", stable && subcritical, m, "C = |div Q - f|/h^2 stable, sup<Q,Q> < 1"))
    }));
    out.push(wrap("flux_saturation", || {
        let mut worst: f64 = 0.0;
        for beta in [0.5, 1.0, 2.0] {
            for n in [2, 3] {
                let c = counterexample_problem(beta, n);
                let fa = flux_analysis(&radial_reduce(&c.problem, &c.domain)?);
                worst = worst.max(fa.saturation_radius.map_or(f64::INFINITY, |r| (r - n as f64 / beta).abs()));
            }
        }
        Ok(Check::new("flux_saturation", worst <= 1e-6, vec![worst], "saturation radius n/beta within 1e-6"))
    }));
    out.push(wrap("flux_exact_solution", || {
        let d = DomainChart::new(ChartMetric::euclidean(2), Shape::disk(1.0));
        let fa = flux_analysis(&radial_reduce(&make_cmc(1.0), &d)?);
        let ex = fa.exact.ok_or_else(|| crate::PmcError::Invalid("no exact solution".into()))?;
        let err = [0.2, 0.5, 0.9, 1.0]
            .iter()
            .map(|&r| (ex.u(r) + cap.u(&[0.0, 0.0]) - cap.u(&[r, 0.0])).abs())
            .fold(0.0, f64::max);
        Ok(Check::new("flux_exact_solution", err <= 1e-8, vec![err], "radial reconstruction matches the cap"))
    }));
    out
}

pub fn bound_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(wrap("torus_alpha2", || {
        let g = Arc::new(Grid::periodic(DomainChart::new(ChartMetric::euclidean(2), Shape::BoxPeriodic { length: 1.0 }), 17)?);
        let amp = rng.gen_range(0.2..1.0);
        let p = make_custom(0.0, 1.0, Arc::new(move |x: &[f64]| amp * (2.0 * std::f64::consts::PI * x[0]).sin()));
        let rep = continuation(&p, g, &Schedule::default())?;
        let a2 = rep.bound_checks.alpha2.map_or(false, |b| b.pass);
        let tu = rep.bound_checks.tu_beta2;
        let bound = apriori_bounds(&p, &p_domain_torus())?.alpha2;
        Ok(Check::new(
            "torus_alpha2",
            rep.outcome == Outcome::Converged && a2 && tu.pass,
            vec![rep.final_u.sup_abs(), bound, tu.value, tu.bound],
            "sup|u| <= alpha2 and sup|t u| <= beta2",
        ))
    }));
    out.push(wrap("disk_tu_beta2", || {
        let p = make_cmc(1.0).with_constant_psi(0.0);
        let rep = continuation(&p, polar_disk(0.5, 17, 32)?, &Schedule::default())?;
        let tu = rep.bound_checks.tu_beta2;
        Ok(Check::new("disk_tu_beta2", rep.outcome == Outcome::Converged && tu.pass, vec![tu.value, tu.bound], "sup|t u| <= beta2"))
    }));
    out.push(wrap("comparison", || {
        let g = polar_disk(0.5, 17, 32)?;
        let lo = rng.gen_range(-0.5..0.0);
        let hi = lo + rng.gen_range(0.01..0.5);
        let p1 = make_cmc(1.0).with_psi(move |x| hi + 0.1 * x[0]);
        let p2 = make_cmc(1.0).with_psi(move |x| lo + 0.1 * x[0]);
        let solve = |p: &crate::problems::PMCProblem| -> Result<Field> {
            let rep = continuation(p, g.clone(), &Schedule::default())?;
            match rep.outcome {
                Outcome::Converged => Ok(rep.final_u),
                o => Err(PmcError::Invalid(format!("continuation ended with {}", o.name()))),
            }
        };
        let (u1, u2) = (solve(&p1)?, solve(&p2)?);
        let rep = comparison_check(&p1, &u1, &p2, &u2)?;
        Ok(Check::new("comparison", rep.pass, vec![rep.min_difference, rep.tol_cmp], "ordered data give ordered solutions"))
    }));
    out.push(wrap("barrier_formula", || {
        let b = barrier_formula(1.0, 2.0, 1.0, 0.25)?;
        let err = (b.kappa() - 25.5562).abs();
        Ok(Check::new("barrier_formula", b.nu == 2.0 && err < 1e-4, vec![b.nu, b.kappa()], "nu = 2, kappa = 25.5562"))
    }));
    out
}

fn p_domain_torus() -> DomainChart {
    DomainChart::new(ChartMetric::euclidean(2), Shape::BoxPeriodic { length: 1.0 })
}

pub fn run_suite(suite: Suite, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    if matches!(suite, Suite::Geometry | Suite::All) {
        checks.extend(geometry_checks(&mut rng));
    }
    if matches!(suite, Suite::Oracles | Suite::All) {
        checks.extend(oracle_checks(&mut rng));
    }
    if matches!(suite, Suite::Bounds | Suite::All) {
        checks.extend(bound_checks(&mut rng));
    }
    for c in &checks {
        log::info!("{} {}: {:?}", if c.pass { "pass" } else { "FAIL" }, c.name, c.measured);
    }
    VerifyReport { suite, seed, pass: checks.iter().all(|c| c.pass), checks }
}

/// `verify`: writes verify.json; exit 0 iff every check passes, 4 otherwise,
/// 1 for an unknown suite or unwritable output.
pub fn cmd_verify(suite: &str, out: &std::path::Path, seed: u64) -> i32 {
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return super::commands::EXIT_CONFIG;
        }
    };
    let rep = run_suite(suite, seed);
    for c in &rep.checks {
        eprintln!("{:4} {}", if c.pass { "ok" } else { "FAIL" }, c.name);
    }
    let json = serde_json::to_string_pretty(&rep).expect("verify report serializes") + "\n";
    if let Err(e) = super::report::write(&out.join("verify.json"), &json) {
        eprintln!("error: {e}");
        return super::commands::EXIT_CONFIG;
    }
    if rep.pass {
        super::commands::EXIT_OK
    } else {
        super::commands::EXIT_VERIFY_FAILED
    }
}
