use clap::{Parser, Subcommand};
use mpshell::element;
use mpshell::model::results::{record_for, write_vtk, CurveWriter};
use mpshell::model::ModelConfig;
use mpshell::solver::{newton_solve, SolveError, SystemState};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mpshell",
    about = "Micropolar shell solver for hard-magnetic soft structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model described by a JSON configuration file.
    Run {
        config: PathBuf,
        /// Output directory (curves, logs, snapshots).
        #[arg(long, default_value = "mpshell_out")]
        out: PathBuf,
    },
    /// Solve a built-in benchmark with optional parameter overrides.
    Benchmark {
        name: String,
        /// Generator parameter override, repeatable: --param key=value
        #[arg(long = "param", value_parser = parse_param)]
        param: Vec<(String, f64)>,
        #[arg(long, default_value = "mpshell_out")]
        out: PathBuf,
    },
    /// Check the analytic element tangent against central finite
    /// differences of the residual on one element of the configured model.
    VerifyTangent { config: PathBuf },
    /// Print the configuration JSON schema.
    Schema,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let value: f64 = v.parse().map_err(|e| format!("value of `{k}`: {e}"))?;
    Ok((k.to_string(), value))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out } => run_config(&config, &out),
        Command::Benchmark { name, param, out } => run_benchmark(&name, &param, &out),
        Command::VerifyTangent { config } => verify_tangent(&config),
        Command::Schema => {
            println!("{}", mpshell::model::config_schema());
            EXIT_OK
        }
    };
    ExitCode::from(code)
}

fn run_config(path: &Path, out: &Path) -> u8 {
    let cfg = match ModelConfig::from_path(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    run_built(&cfg, out)
}

fn run_benchmark(name: &str, params: &[(String, f64)], out: &Path) -> u8 {
    let mut cfg = ModelConfig::default();
    cfg.geometry.benchmark = Some(name.to_string());
    cfg.geometry.params = params.iter().cloned().collect::<BTreeMap<_, _>>();
    run_built(&cfg, out)
}

fn run_built(cfg: &ModelConfig, out: &Path) -> u8 {
    let built = match cfg.build() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let name = built.name.clone();
    let (model, all_probes) = match built.into_shell_model() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let probes: BTreeMap<String, usize> = match &cfg.output.probes {
        Some(names) => {
            let mut sel = BTreeMap::new();
            for n in names {
                match all_probes.get(n) {
                    Some(&id) => {
                        sel.insert(n.clone(), id);
                    }
                    None => {
                        eprintln!("error: unknown probe `{n}`");
                        return EXIT_CONFIG;
                    }
                }
            }
            sel
        }
        None => all_probes,
    };

    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_IO;
    }
    let curve_path = out.join(format!("{name}_curve.csv"));
    let curve_file = match std::fs::File::create(&curve_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", curve_path.display());
            return EXIT_IO;
        }
    };
    let mut curves = match CurveWriter::new(curve_file) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };

    let mut snapshots: Vec<f64> = cfg.output.snapshot_loads.clone();
    snapshots.sort_by(f64::total_cmp);
    let mut snapshot_idx = 0usize;
    let mut io_failure: Option<std::io::Error> = None;

    let mut state = SystemState::zero(&model.mesh);
    let opts = cfg.solver_options();
    println!("{name}: {} elements, {} dofs", model.mesh.element_count(), model.dofs.n_dofs);
    let zero = record_for(&model, &state, &probes, 0);
    let _ = curves.write_record(&zero);
    let result = newton_solve(&model, &mut state, 1.0, &opts, |model, st, rec| {
        println!(
            "step {:4}  load {:8.5}  iters {:2}  residual {:10.3e}",
            rec.step, rec.load_factor, rec.iterations, rec.residual_norm
        );
        let r = record_for(model, st, &probes, rec.step + 1);
        if let Err(e) = curves.write_record(&r) {
            io_failure.get_or_insert(e);
        }
        while snapshot_idx < snapshots.len() && rec.load_factor >= snapshots[snapshot_idx] - 1e-9 {
            let p = out.join(format!("{name}_load_{:.4}.vtk", rec.load_factor));
            if let Err(e) = write_vtk(&p, &model.mesh, st, &name) {
                io_failure.get_or_insert(e);
            }
            snapshot_idx += 1;
        }
    });

    match result {
        Ok(report) => {
            let log_path = out.join(format!("{name}_iterations.log"));
            if let Err(e) = std::fs::write(&log_path, report.log_lines().join("\n") + "\n") {
                eprintln!("error: cannot write {}: {e}", log_path.display());
                return EXIT_IO;
            }
            if let Some(e) = io_failure {
                eprintln!("error: output incomplete: {e}");
                return EXIT_IO;
            }
            println!("done: curves in {}", curve_path.display());
            EXIT_OK
        }
        Err(SolveError::NonConvergence { step_size, residual }) => {
            eprintln!(
                "error: no convergence (step size {step_size:.3e}, residual {residual:.3e}); partial curves kept"
            );
            EXIT_NO_CONVERGENCE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn verify_tangent(path: &Path) -> u8 {
    let cfg = match ModelConfig::from_path(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let built = match cfg.build() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let (model, _) = match built.into_shell_model() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let elref = &model.elements[0];
    let load = model.element_load(0, 1.0);
    let state = element::verify::random_moderate_state(elref, 7);
    match element::verify::tangent_vs_fd(elref, &state, &model.material, Some(&load)) {
        Ok(check) => {
            println!(
                "max relative tangent error {:.3e} (block {} / {})",
                check.max_rel_error, check.worst_row_field, check.worst_col_field
            );
            if check.max_rel_error < 1e-5 {
                println!("PASS");
                EXIT_OK
            } else {
                println!("FAIL");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
