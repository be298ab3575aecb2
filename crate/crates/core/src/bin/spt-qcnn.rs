use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spt_qcnn::config::ExperimentConfig;
use spt_qcnn::experiments::{
    ideal_backend, linecut, linecut_csv, phase_diagram, phase_diagram_csv, prepare_point, SweepSetup, SCHEMA_VERSION,
};
use spt_qcnn::noise::DensityMatrix;
use spt_qcnn::qcnn::{measurement_settings, msop_expand_with, qcnn_output_density, ExpansionLimits, MsopPart};
use spt_qcnn::spinchain::{build_hamiltonian, ground_state, HamiltonianParams};
use spt_qcnn::vqe::{optimize, prepare_state, read_angle_store, rewrite_angles, write_angle_store, AngleRecord};
use spt_qcnn::Error;

const N: usize = 7;

#[derive(Parser)]
#[command(name = "spt-qcnn", version, about = "Cluster-Ising phase recognition with a seven-qubit QCNN")]
struct Cli {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// ⟨S⟩ and ⟨H⟩ (exact, ideal circuit, noisy) over the (h1, h2) grid.
    PhaseDiagram {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Angle store from `vqe-prepare`; missing points are optimized.
        #[arg(long)]
        angles: Option<PathBuf>,
    },
    /// Direct ⟨S⟩ against the QCNN output along a fixed-h1 cut.
    Linecut {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        angles: Option<PathBuf>,
    },
    /// Optimizes ansatz angles for every grid and linecut point.
    VqePrepare {
        #[arg(long)]
        out: PathBuf,
        /// Store rewritten angles (first layer within [−π/2, π/2]).
        #[arg(long)]
        rewrite: bool,
    },
    /// QCNN output for one (h1, h2) point.
    QcnnRun {
        #[arg(long, allow_hyphen_values = true)]
        h1: f64,
        #[arg(long, allow_hyphen_values = true)]
        h2: f64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
    },
    /// Expands the multiscale string order parameter into Pauli strings.
    SopExpand {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        part: Part,
        /// Keep the terms found so far instead of failing at the cap.
        #[arg(long)]
        truncate: bool,
        #[arg(long)]
        max_terms: Option<usize>,
    },
    /// Runs the invariant suite and prints a JSON report.
    Verify {
        #[arg(long, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/data/msop_d1.csv"))]
        golden: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Exact ground state.
    Exact,
    /// Optimized ansatz, noiseless.
    Ideal,
    /// Optimized ansatz on the configured device.
    Noisy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Part {
    Full,
    First,
    Second,
}

enum Failure {
    Invariant(String),
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } => Failure::Config(e.to_string()),
            other => Failure::Invariant(other.to_string()),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: &'a str,
    device: String,
    config: &'a ExperimentConfig,
}

fn setup(cfg: &ExperimentConfig, angles: Option<&Path>) -> Result<SweepSetup, Failure> {
    let store = match angles {
        Some(p) => read_angle_store(p)?,
        None => vec![],
    };
    Ok(SweepSetup { n: N, vqe: cfg.vqe.clone(), store, noisy: cfg.backend(N)?, shots: cfg.shots, seed: cfg.seed })
}

fn write_outputs(cfg: &ExperimentConfig, dir: &Path, name: &str, csv: &str, extra: Option<String>) -> Result<(), Failure> {
    write_file(&dir.join(format!("{name}.csv")), csv)?;
    let m = Manifest { schema_version: SCHEMA_VERSION, command: name, device: cfg.device_name(), config: cfg };
    write_file(&dir.join(format!("{name}.manifest.json")), &to_json(&m))?;
    if let Some(text) = extra {
        write_file(&dir.join(format!("{name}.json")), &text)?;
    }
    println!("wrote {}", dir.join(format!("{name}.csv")).display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    match cli.cmd {
        Cmd::PhaseDiagram { out, angles } => {
            let s = setup(&cfg, angles.as_deref())?;
            let pts = phase_diagram(&cfg.grid, &s)?;
            let flagged = pts.iter().filter(|p| !p.converged).count();
            if flagged > 0 {
                eprintln!("{flagged} of {} points did not reach the fidelity threshold (flagged)", pts.len());
            }
            write_outputs(&cfg, &out.unwrap_or(cfg.output_dir.clone()), "phase_diagram", &phase_diagram_csv(&pts)?, None)
        }
        Cmd::Linecut { out, angles } => {
            let s = setup(&cfg, angles.as_deref())?;
            let cut = linecut(cfg.linecut.h1, &cfg.linecut.h2_values(), &s)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                spt_window: (f64, f64),
                boundaries: &'a [spt_qcnn::spinchain::BoundaryPoint],
            }
            let summary = to_json(&Summary { spt_window: cut.spt_window, boundaries: &cut.boundaries });
            write_outputs(&cfg, &out.unwrap_or(cfg.output_dir.clone()), "linecut", &linecut_csv(&cut)?, Some(summary))
        }
        Cmd::VqePrepare { out, rewrite } => {
            use rayon::prelude::*;
            let mut pts = cfg.grid.points();
            pts.extend(cfg.linecut.h2_values().into_iter().map(|h2| (cfg.linecut.h1, h2)));
            let records: Vec<AngleRecord> = pts
                .par_iter()
                .map(|&(h1, h2)| {
                    let mut r = optimize(h1, h2, N, &cfg.vqe)?;
                    if rewrite {
                        r.theta_opt = rewrite_angles(&r.theta_opt);
                    }
                    Ok(AngleRecord::from_result(h1, h2, &r))
                })
                .collect::<Result<_, Error>>()?;
            let rejected = records.iter().filter(|r| !r.accepted).count();
            write_angle_store(&out, &records)?;
            println!("wrote {} records to {} ({rejected} below the fidelity threshold)", records.len(), out.display());
            Ok(())
        }
        Cmd::QcnnRun { h1, h2, mode } => {
            let rho = match mode {
                Mode::Exact => {
                    let g = ground_state(&build_hamiltonian(&HamiltonianParams::new(h1, h2, N)?)?)?;
                    DensityMatrix::from_pure(&g.ground)?
                }
                Mode::Ideal | Mode::Noisy => {
                    let prep = prepare_point(h1, h2, N, &cfg.vqe, &[])?;
                    match mode {
                        Mode::Ideal => DensityMatrix::from_pure(&prepare_state(&prep.params)?)?,
                        _ => cfg.backend(N)?.prepare(&prep.params)?,
                    }
                }
            };
            let outcome = match mode {
                Mode::Noisy => {
                    let b = cfg.backend(N)?;
                    spt_qcnn::qcnn::qcnn_output_noisy(&rho, &b.device, &b.readout)?
                }
                _ if cfg.shots == 0 => qcnn_output_density(&rho, 0, 0)?,
                _ => {
                    let b = ideal_backend(N, cfg.shots, cfg.seed);
                    spt_qcnn::qcnn::qcnn_output_noisy(&rho, &b.device, &b.readout)?
                }
            };
            print!("{}", to_json(&outcome));
            Ok(())
        }
        Cmd::SopExpand { d, out, part, truncate, max_terms } => {
            let part = match part {
                Part::Full => MsopPart::Full,
                Part::First => MsopPart::First,
                Part::Second => MsopPart::Second,
            };
            let mut limits = ExpansionLimits { allow_truncate: truncate, ..ExpansionLimits::default() };
            if let Some(m) = max_terms {
                limits.max_terms = m;
            }
            let e = msop_expand_with(d, part, limits)?;
            let strings: Vec<_> = e.terms.iter().map(|t| t.pauli.clone()).collect();
            let settings = if d == 1 { Some(measurement_settings(&strings).count()) } else { None };
            let e = if d == 1 { e.sorted_by_setting() } else { e };
            write_file(&out, &e.to_csv_string()?)?;
            let mut line = format!("d={d} n={} terms={} raw_products={} truncated={}", e.n, e.len(), e.raw_products, e.truncated);
            if let Some(s) = settings {
                line += &format!(" settings={s}");
            }
            println!("{line}");
            Ok(())
        }
        Cmd::Verify { golden } => {
            let report = spt_qcnn::verify::run_all(&golden);
            print!("{}", to_json(&report));
            if report.passed {
                Ok(())
            } else {
                let names: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
                Err(Failure::Invariant(format!("failed checks: {}", names.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("invalid configuration: {m}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<(), Failure> {
        run(Cli::try_parse_from(std::iter::once("spt-qcnn").chain(args.iter().copied())).unwrap())
    }

    fn golden() -> String {
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/msop_d1.csv").into()
    }

    #[test]
    fn sop_expand_reproduces_golden_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("d1.csv");
        run_args(&["sop-expand", "--d", "1", "--out", out.to_str().unwrap()]).ok().unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(golden()).unwrap());
    }

    #[test]
    fn verify_flags_corrupted_golden() {
        assert!(run_args(&["verify", "--golden", &golden()]).is_ok());
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, std::fs::read_to_string(golden()).unwrap().replace("0.25,S02", "0.5,S02")).unwrap();
        assert!(matches!(run_args(&["verify", "--golden", bad.to_str().unwrap()]), Err(Failure::Invariant(_))));
    }

    #[test]
    fn bad_config_is_a_config_failure() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "bogus = 1\n").unwrap();
        let r = run_args(&["--config", cfg.to_str().unwrap(), "qcnn-run", "--h1", "0", "--h2", "0"]);
        assert!(matches!(r, Err(Failure::Config(_))));
        std::fs::write(&cfg, "device = \"/nonexistent.toml\"\n").unwrap();
        let r = run_args(&["--config", cfg.to_str().unwrap(), "qcnn-run", "--h1", "0", "--h2", "0", "--mode", "noisy"]);
        assert!(matches!(r, Err(Failure::Config(_))));
        let r = run_args(&["sop-expand", "--d", "3", "--out", dir.path().join("x").to_str().unwrap()]);
        assert!(matches!(r, Err(Failure::Invariant(_))));
    }

    #[test]
    fn linecut_writes_csv_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "device = \"ideal\"\n[linecut]\npoints = 5\n[vqe]\nmax_restarts = 2\n").unwrap();
        let out = dir.path().join("out");
        run_args(&["--config", cfg.to_str().unwrap(), "linecut", "--out", out.to_str().unwrap()]).ok().unwrap();
        let csv = std::fs::read_to_string(out.join("linecut.csv")).unwrap();
        assert_eq!(csv.lines().count(), 6);
        assert_eq!(csv.lines().next().unwrap(), spt_qcnn::experiments::LINECUT_COLUMNS.join(","));
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("linecut.manifest.json")).unwrap()).unwrap();
        assert_eq!(m["schema_version"], SCHEMA_VERSION);
        assert_eq!(m["device"], "ideal");
        assert!(out.join("linecut.json").exists());
    }
}
