use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use torus_control::closure::{self, compare_tables};
use torus_control::dynamics::{integrate_flow, variational_jacobian};
use torus_control::ensemble::{self, bump_field};
use torus_control::planner::{plan_ensemble, verify_plan};
use torus_control::{io, ControlSignal, EnsembleState, ExactField, ModeSpanTable, PlanOptions, PlanProblem, Rational};

/// Lie algebra closure, simulation and ensemble steering for trigonometric
/// vector fields on the 2- and 3-torus.
#[derive(Parser)]
#[command(name = "torus-control", version)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FieldArg {
    /// Field JSON: `{"dim", "constant", "terms": [{"mode", "a", "b"}]}` or, on T^2, `{"dim": 2, "stream": [{"mode", "cos", "sin"}]}`.
    #[arg(short, long)]
    field: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted Lie closure of `f` with the control translations, plus the class report and dual group.
    Classify {
        #[command(flatten)]
        field: FieldArg,
    },
    /// Brute-force closure on a mode box, compared against the prediction.
    Closure {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long = "inner-box", default_value_t = 3)]
        inner_box: i64,
        #[arg(long = "outer-box", default_value_t = 8)]
        outer_box: i64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Report the oracle table alone when the closure is unclassified.
        #[arg(long)]
        oracle_fallback: bool,
    },
    /// Rank of the lifted closure at an ensemble configuration.
    EnsembleCheck {
        #[command(flatten)]
        field: FieldArg,
        /// Ensemble JSON: array of points.
        #[arg(short, long)]
        ensemble: PathBuf,
        /// Box of the closure table used for the lift.
        #[arg(long = "inner-box", default_value_t = 3)]
        inner_box: i64,
        #[arg(long = "outer-box", default_value_t = 8)]
        outer_box: i64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long)]
        oracle_fallback: bool,
    },
    /// Trajectory CSV of an ensemble under a control; diagnostics go to stderr.
    Simulate {
        #[command(flatten)]
        field: FieldArg,
        /// Control JSON: `{"segments": [{"dt", "u", "alpha"}]}`.
        #[arg(short, long)]
        control: PathBuf,
        #[arg(short = 'x', long)]
        ensemble: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Piecewise constant control steering one ensemble onto another.
    Plan {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        /// Number of segments.
        #[arg(short = 'S', long, default_value_t = 12)]
        segments: usize,
        /// Time horizon.
        #[arg(short = 'T', long, default_value_t = 8.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Step of the independent re-simulation of the returned control.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Values and divergence of a compactly supported bump field on a grid.
    Bump {
        /// Value inside the inner ball, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        target: Vec<f64>,
        /// Centre of the bump, comma separated; the origin by default.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        #[arg(long)]
        rin: f64,
        #[arg(long)]
        rout: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 16)]
        grid: usize,
    },
    /// Lower bound on the distance of two points after total drift time `T`.
    Separation {
        #[command(flatten)]
        field: FieldArg,
        #[arg(short, long)]
        ensemble: PathBuf,
        #[arg(short = 'T', long)]
        horizon: f64,
    },
}

enum Failure {
    Input(String),
    /// Oracle found elements outside the predicted closure; the report is still emitted.
    Mismatch(Value),
}

impl From<torus_control::Error> for Failure {
    fn from(e: torus_control::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

enum Report {
    Json(Value),
    Text(String),
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_field(arg: &FieldArg) -> Result<ExactField, Failure> {
    io::parse_field(&read(&arg.field)?).map_err(|e| Failure::Input(format!("{}: {e}", arg.field.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_ensemble(path: &Path, dim: usize) -> Result<EnsembleState, Failure> {
    let e: EnsembleState = read_json(path)?;
    if e.dim() != dim {
        return Err(Failure::Input(format!(
            "{}: ensemble points have dimension {}, field has dimension {dim}",
            path.display(),
            e.dim()
        )));
    }
    Ok(e)
}

/// Oracle table on the outer box restricted to the inner one, with the
/// predicted table and their comparison when the closure is classified.
fn closure_report(
    f: &ExactField,
    inner: i64,
    outer: i64,
    depth: usize,
    fallback: bool,
) -> Result<(ModeSpanTable<Rational>, Value, bool), Failure> {
    let desc = closure::predicted_closure(f)?;
    if !desc.is_classified() && !fallback {
        return Err(Failure::Input(format!(
            "closure is {}; pass --oracle-fallback to use the brute-force table alone",
            io::descriptor_to_json(&desc)["reason"].as_str().unwrap_or("unclassified")
        )));
    }
    let oracle = closure::bruteforce_closure(&closure::control_generators(f), inner, outer, depth)?;
    let mut report = json!({
        "descriptor": io::descriptor_to_json(&desc),
        "oracle": io::table_to_json(&oracle),
    });
    let mut sound = true;
    if desc.is_classified() {
        let predicted = closure::predicted_table(&desc, inner)?;
        let cmp = compare_tables(&oracle, &predicted);
        sound = cmp.sound();
        report["predicted"] = io::table_to_json(&predicted);
        report["comparison"] = json!({
            "verdict": cmp.verdict(),
            "violations": cmp.violations,
            "missing": cmp.missing,
        });
    } else {
        report["warnings"] = json!(["closure unclassified; table is the brute-force oracle alone"]);
    }
    Ok((oracle, report, sound))
}

fn run(cmd: Command) -> Result<Report, Failure> {
    match cmd {
        Command::Classify { field } => {
            let f = read_field(&field)?;
            let desc = closure::predicted_closure(&f)?;
            Ok(Report::Json(json!({
                "closure": io::descriptor_to_json(&desc),
                "class": f.check_class_vd(),
            })))
        }
        Command::Closure {
            field,
            inner_box,
            outer_box,
            depth,
            oracle_fallback,
        } => {
            let f = read_field(&field)?;
            let (_, report, sound) = closure_report(&f, inner_box, outer_box, depth, oracle_fallback)?;
            if sound {
                Ok(Report::Json(report))
            } else {
                Err(Failure::Mismatch(report))
            }
        }
        Command::EnsembleCheck {
            field,
            ensemble,
            inner_box,
            outer_box,
            depth,
            oracle_fallback,
        } => {
            let f = read_field(&field)?;
            let gamma = read_ensemble(&ensemble, f.dim())?;
            let desc = closure::predicted_closure(&f)?;
            let (table, source) = if desc.is_classified() {
                (closure::predicted_table(&desc, inner_box)?, "predicted")
            } else {
                let (oracle, _, _) = closure_report(&f, inner_box, outer_box, depth, oracle_fallback)?;
                (oracle, "oracle")
            };
            let rank = ensemble::bracket_generating_test(&table, &gamma)?;
            Ok(Report::Json(json!({
                "table": source,
                "box": inner_box,
                "rank": rank.rank,
                "ambient": rank.ambient,
                "generating": rank.generating,
            })))
        }
        Command::Simulate {
            field,
            control,
            ensemble,
            dt,
        } => {
            let f = read_field(&field)?;
            let x0 = read_ensemble(&ensemble, f.dim())?;
            let ctrl: ControlSignal = read_json(&control)?;
            ctrl.validate(Some(f.dim()))?;
            if !(dt > 0.0) {
                return Err(Failure::Input("dt must be positive".into()));
            }
            let tr = integrate_flow(&f, &ctrl, &x0, dt)?;
            let jac = variational_jacobian(&f, &ctrl, &x0, dt)?;
            let volume_defect = jac
                .last()
                .map(|js| js.iter().map(|j| (j.determinant() - 1.0).abs()).fold(0.0, f64::max))
                .unwrap_or(0.0);
            let diagnostics = json!({
                "steps": tr.times.len() - 1,
                "final_time": tr.times.last(),
                "max_det_defect": volume_defect,
                "min_separation": if x0.len() > 1 { json!(tr.min_separation()) } else { Value::Null },
                "divergence_free": f.is_divergence_free(),
            });
            eprintln!("{diagnostics}");
            Ok(Report::Text(io::trajectory_csv(&tr)))
        }
        Command::Plan {
            field,
            from,
            to,
            segments,
            horizon,
            tol,
            seed,
            restarts,
            dt,
        } => {
            let f = read_field(&field)?;
            let start = read_ensemble(&from, f.dim())?;
            let target = read_ensemble(&to, f.dim())?;
            if !(dt > 0.0) {
                return Err(Failure::Input("dt must be positive".into()));
            }
            let problem = PlanProblem {
                field: f.clone(),
                start: start.clone(),
                target: target.clone(),
                segments,
                horizon,
                tolerance: tol,
                seed,
                options: PlanOptions {
                    restarts,
                    ..PlanOptions::default()
                },
            };
            let result = plan_ensemble(&problem)?;
            let verified = verify_plan(&f, &result.control, &start, &target, dt)?;
            let mut report = serde_json::to_value(&result).map_err(|e| Failure::Input(e.to_string()))?;
            report["verification"] = json!({ "dt": dt, "error": verified, "within_tolerance": verified <= tol });
            Ok(Report::Json(report))
        }
        Command::Bump {
            target,
            center,
            rin,
            rout,
            grid,
        } => {
            let dim = target.len();
            let center = center.unwrap_or_else(|| vec![0.0; dim]);
            if center.len() != dim {
                return Err(Failure::Input(format!("center has {} coordinates, target has {dim}", center.len())));
            }
            if grid == 0 {
                return Err(Failure::Input("grid must be positive".into()));
            }
            let b = bump_field(&target, &center, rin, rout)?;
            let h = 2.0 * std::f64::consts::PI / grid as f64;
            let mut points = Vec::new();
            let mut idx = vec![0usize; dim];
            loop {
                let x: Vec<f64> = idx.iter().zip(&center).map(|(&i, c)| c - std::f64::consts::PI + h * i as f64).collect();
                points.push(json!({ "x": x, "value": b.evaluate(&x), "divergence": b.divergence(&x) }));
                let Some(k) = (0..dim).find(|&k| idx[k] + 1 < grid) else { break };
                idx[k] += 1;
                idx[..k].iter_mut().for_each(|i| *i = 0);
            }
            Ok(Report::Json(json!({
                "dim": dim,
                "target": target,
                "center": center,
                "r_in": rin,
                "r_out": rout,
                "grid": grid,
                "points": points,
            })))
        }
        Command::Separation {
            field,
            ensemble,
            horizon,
        } => {
            let f = read_field(&field)?;
            let x0 = read_ensemble(&ensemble, f.dim())?;
            let b = ensemble::separation_bound(&f, &x0, horizon)?;
            Ok(Report::Json(serde_json::to_value(b).map_err(|e| Failure::Input(e.to_string()))?))
        }
    }
}

fn emit(output: Option<&Path>, report: &Report) -> Result<(), String> {
    let text = match report {
        Report::Json(v) => format!("{}\n", serde_json::to_string_pretty(v).expect("JSON values serialize")),
        Report::Text(s) => s.clone(),
    };
    match output {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.output.as_deref();
    match run(cli.command) {
        Ok(report) => match emit(out, &report) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch(report)) => {
            eprintln!("error: brute-force closure exceeds the predicted closure");
            let _ = emit(out, &Report::Json(report));
            ExitCode::from(2)
        }
    }
}
