use ouldp::cgf::{self, CgfQuery};
use ouldp::checks::{self, CheckReport};
use ouldp::concentration::{
    ci_bound, corollary_bound, corollary_simplified, laplace_upper_bound, CiBoundReport,
};
use ouldp::mc::{estimate_tail, ldp_slope};
use ouldp::model::{couple_stats, mle, mle_from_stats, simulate_path};
use ouldp::rates::{contraction_infimum, joint_rate, mle_rate, numeric_legendre};
use ouldp::{
    CgfError, CiMethod, CiQuery, ConcentrationError, Estimator, EstimatorKind, EventSpec,
    ExtendedReal, GridSpec, LegendreOptions, McError, ModelError, OuModel, RateError, RateValue,
    RunConfig, StreamId,
};
use serde_json::{json, Value};

use crate::output::{num, CliError, Record};
use crate::{CiMethodArg, Command, EstimatorArg, EventArg, EventArgs, RunArgs, Suite, Variant};

pub struct Outcome {
    pub record: Record,
    /// False for failed checks; the record is still printed.
    pub success: bool,
}

impl From<Record> for Outcome {
    fn from(record: Record) -> Self {
        Self {
            record,
            success: true,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let kind = match e {
            ModelError::Overflow { .. } => "overflow",
            _ => "domain",
        };
        CliError::new(kind, e)
    }
}

impl From<CgfError> for CliError {
    fn from(e: CgfError) -> Self {
        CliError::new("domain", e)
    }
}

impl From<RateError> for CliError {
    fn from(e: RateError) -> Self {
        let kind = match e {
            RateError::NoConvergence { .. } => "convergence",
            RateError::UnsupportedRegime(_) => "domain",
        };
        CliError::new(kind, e)
    }
}

impl From<ConcentrationError> for CliError {
    fn from(e: ConcentrationError) -> Self {
        let kind = match e {
            ConcentrationError::NoConvergence { .. } => "convergence",
            _ => "domain",
        };
        CliError::new(kind, e)
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::Model(m) => m.into(),
            McError::WeightOverflow { .. } => CliError::new("overflow", e),
            McError::Pool(_) => CliError::new("runtime", e),
            _ => CliError::new("domain", e),
        }
    }
}

fn ext(v: ExtendedReal) -> Value {
    num(v.to_f64())
}

fn rate_fields(r: Record, v: RateValue) -> Record {
    r.out("rate", ext(v.value)).out("branch", json!(v.branch))
}

fn run_config(run: RunArgs) -> RunConfig {
    let cfg = RunConfig::new(run.seed);
    match run.workers {
        Some(w) => cfg.with_workers(w),
        None => cfg,
    }
}

fn grid_for(model: &OuModel, steps: Option<usize>) -> Result<GridSpec, CliError> {
    Ok(match steps {
        Some(n) => GridSpec::new(n)?,
        None => GridSpec::default_for(model),
    })
}

fn event_spec(e: &EventArgs) -> EventSpec {
    match e.event {
        EventArg::MleGe => EventSpec::mle_ge(e.threshold),
        EventArg::MleLe => EventSpec::mle_le(e.threshold),
        EventArg::AbsDevGe => EventSpec::abs_dev_ge(e.threshold),
    }
}

fn estimator(e: &EventArgs) -> Estimator {
    match e.estimator {
        EstimatorArg::Plain => Estimator::Plain,
        EstimatorArg::Tilted => Estimator::Tilted {
            theta_sim: e.theta_sim,
        },
    }
}

fn event_params(r: Record, e: &EventArgs) -> Record {
    let kind = match e.event {
        EventArg::MleGe => "mle-ge",
        EventArg::MleLe => "mle-le",
        EventArg::AbsDevGe => "abs-dev-ge",
    };
    let est = match e.estimator {
        EstimatorArg::Plain => "plain",
        EstimatorArg::Tilted => "tilted",
    };
    r.param("event", kind)
        .param("threshold", num(e.threshold))
        .param("estimator", est)
        .param("theta_sim", e.theta_sim.map_or(Value::Null, num))
        .param("paths", e.paths)
}

fn ci_fields(r: Record, b: &CiBoundReport) -> Record {
    let method = match b.method {
        CiMethod::NumericArgmax => "numeric-argmax",
        CiMethod::CorollaryStable { .. } => "corollary-stable",
        CiMethod::CorollaryUnstable => "corollary-unstable",
        CiMethod::CorollaryExplosive => "corollary-explosive",
    };
    r.out("bound", num(b.bound))
        .out("log_bound", num(b.log_bound))
        .out("y_star", num(b.y_star))
        .out("h_value", num(b.h_value))
        .out("method", method)
        .out("capped", b.capped)
        .out("monotone", b.monotone)
}

fn check_json(r: &CheckReport) -> Value {
    json!({
        "name": r.name,
        "passed": r.passed,
        "cases": r.cases,
        "worst": num(r.worst),
        "failures": r.failures,
    })
}

fn run_suite(
    suite: Suite,
    paths: Option<usize>,
    run: RunConfig,
) -> Result<Vec<CheckReport>, CliError> {
    let n = |default: usize| paths.unwrap_or(default);
    Ok(match suite {
        Suite::Duality => vec![checks::legendre_duality(&LegendreOptions::default())],
        Suite::Contraction => vec![checks::contraction_identity()],
        Suite::CameronMartin => vec![checks::cameron_martin()],
        Suite::CgfMc => vec![checks::cgf_monte_carlo(n(1_000_000), run)?],
        Suite::Continuity => vec![checks::continuity_and_truth()],
        Suite::LdpSlopes => vec![checks::ldp_slopes(n(200_000), run)?],
        Suite::CiDominance => vec![checks::ci_dominance(n(100_000), run)?],
        Suite::Corollary => vec![checks::corollary_values()],
        Suite::Stochastic => vec![checks::stochastic_properties(n(100_000), run)?],
        Suite::Laplace => vec![checks::laplace_dominance()],
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::Duality,
                Suite::Contraction,
                Suite::CameronMartin,
                Suite::CgfMc,
                Suite::Continuity,
                Suite::LdpSlopes,
                Suite::CiDominance,
                Suite::Corollary,
                Suite::Stochastic,
                Suite::Laplace,
            ] {
                all.extend(run_suite(s, paths, run)?);
            }
            all
        }
    })
}

pub fn execute(command: Command) -> Result<Outcome, CliError> {
    Ok(match command {
        Command::Simulate {
            theta,
            horizon,
            steps,
            paths,
            run,
        } => {
            let model = OuModel::new(theta, horizon)?;
            let grid = grid_for(&model, steps)?;
            let mut rows = Vec::with_capacity(paths);
            for path in 0..paths as u64 {
                let s = simulate_path(&model, &grid, StreamId::new(run.seed, path))?;
                let v = couple_stats(&s, horizon);
                rows.push(json!({
                    "path": path,
                    "x_t": num(s.x_t),
                    "s_t": num(s.s_t),
                    "theta_hat": mle(&s, horizon).map_or(Value::Null, num),
                    "couple": { "x": num(v.x), "y": num(v.y) },
                }));
            }
            Record::new(run.seed)
                .param("theta", num(theta))
                .param("T", num(horizon))
                .param("paths", paths)
                .out("n_steps", grid.n_steps())
                .out("paths", rows)
                .into()
        }
        Command::Mle { horizon, x_t, s_t } => Record::new(0)
            .param("T", num(horizon))
            .param("x_t", num(x_t))
            .param("s_t", num(s_t))
            .out("theta_hat", num(mle_from_stats(x_t, s_t, horizon)?))
            .into(),
        Command::Cgf {
            theta,
            a,
            b,
            horizon,
            limit,
            variant,
        } => {
            let q = match horizon {
                Some(t) if !limit => CgfQuery::finite(theta, t, a, b),
                _ => CgfQuery::limit(theta, a, b),
            };
            let r = Record::new(0)
                .param("theta", num(theta))
                .param("a", num(a))
                .param("b", num(b))
                .param("T", horizon.map_or(json!("limit"), num))
                .param("variant", if variant == Variant::V { "v" } else { "w" });
            let v = match (variant, horizon) {
                (Variant::V, _) => cgf::cgf(&q)?,
                (Variant::W, Some(_)) => cgf::finite_cgf_w(&q)?,
                (Variant::W, None) => {
                    return Err(CliError::new(
                        "domain",
                        "the limiting Λ has no closed form here; give --T",
                    ))
                }
            };
            let domain = match (variant, horizon) {
                (Variant::V, _) => json!(cgf::classify_l(theta, a, b)),
                (Variant::W, _) => {
                    cgf::classify_lambda(theta, a, b).map_or(Value::Null, |d| json!(d))
                }
            };
            r.out("value", ext(v.value))
                .out("phi", num(v.phi))
                .out("sigma2", num(v.sigma2))
                .out("gamma", num(v.gamma))
                .out("limit_domain", domain)
                .out("extrapolated", v.extrapolated)
                .into()
        }
        Command::Rate { theta, z, x, y } => {
            let r = Record::new(0).param("theta", num(theta));
            match (z, x, y) {
                (Some(z), _, _) => {
                    rate_fields(r.param("z", num(z)), mle_rate(theta, z)).out("kind", "mle")
                }
                (None, Some(x), Some(y)) => rate_fields(
                    r.param("x", num(x)).param("y", num(y)),
                    joint_rate(theta, x, y),
                )
                .out("kind", "joint"),
                _ => return Err(CliError::new("usage", "give --z, or --x and --y")),
            }
            .into()
        }
        Command::Legendre {
            theta,
            x,
            y,
            tol,
            max_iter,
        } => {
            let opts = LegendreOptions {
                tol,
                max_iter,
                ..Default::default()
            };
            let v = numeric_legendre(theta, x, y, &opts)?;
            rate_fields(
                Record::new(0)
                    .param("theta", num(theta))
                    .param("x", num(x))
                    .param("y", num(y))
                    .param("tol", num(tol))
                    .param("max_iter", max_iter),
                v,
            )
            .out("closed_form", ext(joint_rate(theta, x, y).value))
            .into()
        }
        Command::Contract { theta, z } => rate_fields(
            Record::new(0).param("theta", num(theta)).param("z", num(z)),
            contraction_infimum(theta, z),
        )
        .out("closed_form", ext(mle_rate(theta, z).value))
        .into(),
        Command::CiBound {
            theta,
            horizon,
            x,
            method,
        } => {
            let q = CiQuery::new(theta, horizon, x)?;
            let r = Record::new(0)
                .param("theta", num(theta))
                .param("T", num(horizon))
                .param("x", num(x));
            match method {
                CiMethodArg::Numeric => ci_fields(r.param("method", "numeric"), &ci_bound(&q)?),
                CiMethodArg::Corollary => {
                    ci_fields(r.param("method", "corollary"), &corollary_bound(&q)).out(
                        "simplified",
                        corollary_simplified(&q).map_or(Value::Null, num),
                    )
                }
            }
            .into()
        }
        Command::LaplaceBound { theta, horizon, b } => {
            let lb = laplace_upper_bound(theta, horizon, b)?;
            let exact = cgf::finite_cgf(&CgfQuery::finite(theta, horizon, 0.0, b))?
                .value
                .to_f64()
                * horizon;
            Record::new(0)
                .param("theta", num(theta))
                .param("T", num(horizon))
                .param("b", num(b))
                .out("bound", num(lb.bound))
                .out("log_bound", num(lb.log_bound))
                .out("phi", num(lb.phi))
                .out("exact", num(exact.exp()))
                .into()
        }
        Command::McTail {
            theta,
            horizon,
            steps,
            event,
            run,
        } => {
            let model = OuModel::new(theta, horizon)?;
            let grid = grid_for(&model, steps)?;
            let e = estimate_tail(
                &model,
                &grid,
                &event_spec(&event),
                event.paths,
                run_config(run),
                estimator(&event),
            )?;
            let theta_sim = match e.estimator {
                EstimatorKind::Plain => Value::Null,
                EstimatorKind::Tilted { theta_sim } => num(theta_sim),
            };
            event_params(
                Record::new(run.seed)
                    .param("theta", num(theta))
                    .param("T", num(horizon)),
                &event,
            )
            .out("p_hat", num(e.p_hat))
            .out("se", num(e.se))
            .out("n", e.n)
            .out("n_steps", grid.n_steps())
            .out("sampling_theta", theta_sim)
            .into()
        }
        Command::LdpSlope {
            theta,
            ladder,
            event,
            run,
        } => {
            let r = ldp_slope(
                theta,
                &ladder,
                &event_spec(&event),
                event.paths,
                run_config(run),
                estimator(&event),
            )?;
            let points: Vec<Value> = r
                .points
                .iter()
                .map(|p| {
                    json!({
                        "T": num(p.horizon),
                        "p_hat": num(p.p_hat),
                        "se": num(p.se),
                        "log_p_over_T": p.log_p_over_t.map_or(Value::Null, num),
                        "used": p.used,
                    })
                })
                .collect();
            event_params(
                Record::new(run.seed)
                    .param("theta", num(theta))
                    .param("T", ladder.iter().map(|&t| num(t)).collect::<Vec<_>>()),
                &event,
            )
            .out("points", points)
            .out("slope", r.extrapolated_slope.map_or(Value::Null, num))
            .out("intercept", r.intercept.map_or(Value::Null, num))
            .out("target", num(r.target))
            .out("warnings", r.warnings)
            .into()
        }
        Command::Check { suite, paths, run } => {
            let reports = run_suite(suite, paths, run_config(run))?;
            let passed = reports.iter().all(|r| r.passed);
            let record = Record::new(run.seed)
                .param("suite", format!("{suite:?}").to_lowercase())
                .param("paths", paths.map_or(Value::Null, Value::from))
                .out("passed", passed)
                .out("suites", reports.iter().map(check_json).collect::<Vec<_>>());
            Outcome {
                record,
                success: passed,
            }
        }
        Command::Sweep { .. } => return Err(CliError::new("usage", "sweeps cannot be nested")),
    })
}
