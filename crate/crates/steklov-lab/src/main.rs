//! Configuration-driven entry point: mesh, solve, agmon, sweep, decay,
//! audit, gauge and verify pipelines with deterministic file outputs.
//! Outputs are staged in a temporary directory and moved into place only
//! after the whole run succeeds.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use steklov_lab::agmon::{self, AgmonMetricData, AgmonParams};
use steklov_lab::config::{preset, RunConfig};
use steklov_lab::field::Polynomial2;
use steklov_lab::geometry::{build_mesh, DomainSpec};
use steklov_lab::report::ExperimentReport;
use steklov_lab::solver::solve_steklov;
use steklov_lab::vec2::Vec2;
use steklov_lab::verify;
use steklov_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "steklov-lab", version, about = "Magnetic Steklov eigenproblem laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Path to a flat key-value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Shipped preset name: nonvanishing | montgomery-k.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the beta value(s) the subcommand uses, comma separated.
    #[arg(long, global = true)]
    beta: Option<String>,
    /// Override the mesh size the subcommand uses.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Worker threads (fallback: STEKLOV_LAB_JOBS, then all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Cmd {
    /// Build the mesh and write the plain-text mesh file.
    Mesh,
    /// Solve the Steklov eigenproblem at `beta`.
    Solve,
    /// Compute the Agmon metric data CSV at `beta`.
    Agmon,
    /// Run the eigenvalue scaling sweep.
    Sweep,
    /// Fit the eigenfunction decay rate at `decay.beta`.
    Decay,
    /// Run the coercivity and weighted-L2 audits over `audit.betas`.
    Audit,
    /// Compare eigenvalues for A and A + grad(phi) at two mesh levels.
    Gauge,
    /// Run the reports configured under `verify.reports`; exit nonzero if
    /// any verdict fails.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("verdict: FAIL");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match (&cli.config, &cli.preset) {
        (Some(path), None) => std::fs::read_to_string(path)?,
        (None, Some(name)) => preset(name)?.to_string(),
        (Some(_), Some(_)) => {
            return Err(Error::Config { line: 0, msg: "pass either --config or --preset, not both".into() })
        }
        (None, None) => return Err(Error::Config { line: 0, msg: "a --config file or --preset is required".into() }),
    };
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(list) = &cli.beta {
        let betas: Vec<f64> = list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config { line: 0, msg: format!("--beta: cannot parse `{t}`") })
            })
            .collect::<Result<_>>()?;
        if betas.is_empty() {
            return Err(Error::Config { line: 0, msg: "--beta: empty list".into() });
        }
        match cli.cmd {
            Cmd::Sweep => cfg.sweep_betas = betas,
            Cmd::Audit => cfg.audit_betas = betas,
            Cmd::Decay => cfg.decay_beta = betas[0],
            Cmd::Gauge => cfg.gauge_beta = betas[0],
            _ => cfg.beta = betas,
        }
    }
    if let Some(h) = cli.h {
        if h <= 0.0 {
            return Err(Error::Config { line: 0, msg: format!("--h: {h} must be positive") });
        }
        match cli.cmd {
            Cmd::Gauge => cfg.gauge_h = h,
            _ => cfg.h = h,
        }
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    } else if let Ok(env_jobs) = std::env::var("STEKLOV_LAB_JOBS") {
        if let Ok(n) = env_jobs.parse::<usize>() {
            cfg.jobs = n;
        }
    }
    Ok(cfg)
}

/// Guard that owns the output lock file and removes it on drop.
struct OutputLock(PathBuf);

impl OutputLock {
    fn acquire(dir: &Path) -> Result<OutputLock> {
        std::fs::create_dir_all(dir)?;
        let lock = dir.join(".lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(OutputLock(lock)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::OutputLocked(dir.display().to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

/// Staged writes: everything lands in `<out>/.stage-<pid>` and is renamed
/// into `<out>` only after the run succeeds, so failures leave no partial
/// artifacts (except an explicitly written partial sweep table).
struct Stage {
    dir: PathBuf,
    out: PathBuf,
    files: Vec<String>,
}

impl Stage {
    fn new(out: &Path) -> Result<Stage> {
        let dir = out.join(format!(".stage-{}", std::process::id()));
        if dir.exists() {
            std::fs::remove_dir_all(&dir)?;
        }
        std::fs::create_dir_all(&dir)?;
        Ok(Stage { dir, out: out.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn commit(self) -> Result<()> {
        for name in &self.files {
            let from = self.dir.join(name);
            let to = self.out.join(name);
            if to.exists() {
                std::fs::remove_file(&to)?;
            }
            std::fs::rename(from, to)?;
        }
        std::fs::remove_dir_all(&self.dir)?;
        Ok(())
    }
}

impl Drop for Stage {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.dir);
    }
}

fn write_report(stage: &mut Stage, name: &str, report: &ExperimentReport) -> Result<()> {
    stage.write(&format!("{name}.json"), &serde_json::to_string_pretty(report).expect("report serializes"))?;
    stage.write(&format!("{name}.csv"), &report.csv_string())?;
    println!("{name}: verdict {}", if report.verdict { "pass" } else { "FAIL" });
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    if cfg.jobs > 0 {
        // Ignore failure: the pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let _lock = OutputLock::acquire(&out)?;
    let mut stage = Stage::new(&out)?;
    stage.write("config_snapshot.txt", &cfg.snapshot())?;

    let field = cfg.field.build();
    let mut all_passed = true;

    match cli.cmd {
        Cmd::Mesh => {
            let mesh = build_mesh(&cfg.domain, cfg.h)?;
            stage.write("mesh.txt", &mesh.to_text())?;
            println!(
                "mesh: {} vertices, {} triangles, {} boundary edges, max edge {:.5}",
                mesh.num_vertices(),
                mesh.num_triangles(),
                mesh.boundary_edges.len(),
                mesh.h
            );
        }
        Cmd::Solve => {
            let beta = cfg.beta[0];
            let mesh = build_mesh(&cfg.domain, cfg.h)?;
            let run = solve_steklov(&mesh, &field, beta, cfg.eig_k, cfg.quadrature_order)?;
            stage.write("solution.json", &serde_json::to_string_pretty(&run.solution.header_json()).unwrap())?;
            for pair in 0..run.solution.eigenvalues.len() {
                stage.write(&format!("eig_{pair:03}.csv"), &run.solution.eig_csv(&mesh, pair))?;
            }
            println!("solve: beta = {beta}, eigenvalues = {:?}", run.solution.eigenvalues);
        }
        Cmd::Agmon => {
            let beta = cfg.beta[0];
            let mesh = build_mesh(&cfg.domain, cfg.h)?;
            let mut params = AgmonParams::for_mesh_diameter(cfg.domain.diameter());
            if let Some(r0) = cfg.r0_calib {
                params.r0_calib = r0;
            }
            params.edge_rule = cfg.edge_rule;
            let t = match cfg.agmon_well {
                Some(t) => t,
                None => {
                    let min_b = mesh
                        .boundary_vertices()
                        .iter()
                        .map(|&v| agmon::m_tilde(&field, mesh.vertices[v], beta))
                        .fold(f64::INFINITY, f64::min);
                    2.0 * min_b
                }
            };
            let data = AgmonMetricData::compute(&mesh, &field, beta, t, &params)?;
            stage.write("agmon.csv", &data.to_csv(&mesh))?;
            println!(
                "agmon: beta = {beta}, well threshold = {t:.4}, |well| = {}, psi gap = {:.4}",
                data.well.len(),
                data.psi_gap()
            );
        }
        Cmd::Sweep => {
            let b0 = field.b(Vec2::ZERO).abs();
            let domain = sweep_domain(&cfg);
            let schedule = verify::sweep_schedule(&domain, b0, &cfg.sweep_betas, cfg.h, cfg.sweep_h_rule);
            match verify::scaling_sweep(&domain, &field, &schedule, cfg.quadrature_order) {
                Ok(report) => {
                    all_passed &= report.verdict;
                    write_report(&mut stage, "scaling_report", &report)?;
                }
                Err(Error::SweepAborted { beta, source, partial }) => {
                    // The partial table is the one artifact worth keeping.
                    let mut csv = String::from("beta,lambda1\n");
                    for (b, l) in &partial {
                        csv.push_str(&format!("{b},{l}\n"));
                    }
                    std::fs::write(out.join("scaling_partial.csv"), csv)?;
                    return Err(Error::SweepAborted { beta, source, partial });
                }
                Err(e) => return Err(e),
            }
        }
        Cmd::Decay => {
            let beta = cfg.decay_beta;
            let b0 = field.b(Vec2::ZERO).abs();
            let schedule = verify::sweep_schedule(&cfg.domain, b0, &[beta], cfg.h, cfg.sweep_h_rule);
            let mesh = build_mesh(&cfg.domain, schedule[0].1)?;
            let run = solve_steklov(&mesh, &field, beta, 1, cfg.quadrature_order)?;
            let (report, rate) = verify::decay_profile(&mesh, &field, &run, &cfg.t_factors, cfg.edge_rule)?;
            all_passed &= report.verdict;
            write_report(&mut stage, "decay_report", &report)?;
            println!("decay: eps_hat = {:.4} (T = {}, r2 = {:.4})", rate.eps_hat, rate.t_factor, rate.r2);
        }
        Cmd::Audit => {
            let b0 = field.b(Vec2::ZERO).abs();
            let schedule = verify::sweep_schedule(&cfg.domain, b0, &cfg.audit_betas, cfg.h, cfg.sweep_h_rule);
            let coercivity = verify::coercivity_audit(
                &cfg.domain,
                &field,
                &schedule,
                cfg.quadrature_order,
                cfg.audit_random,
                cfg.seed,
            )?;
            all_passed &= coercivity.verdict;
            write_report(&mut stage, "coercivity_report", &coercivity)?;
            let weighted = verify::weighted_l2_audit(
                &cfg.domain,
                &field,
                &schedule,
                cfg.quadrature_order,
                &cfg.t_factors,
                cfg.edge_rule,
            )?;
            all_passed &= weighted.verdict;
            write_report(&mut stage, "weighted_l2_report", &weighted)?;
        }
        Cmd::Gauge => {
            let domain = gauge_domain(&cfg);
            let phi = Polynomial2::new(cfg.gauge_phi.clone());
            let report = verify::gauge_check(&domain, &field, &phi, cfg.gauge_beta, cfg.gauge_h, cfg.quadrature_order)?;
            all_passed &= report.verdict;
            write_report(&mut stage, "gauge_report", &report)?;
        }
        Cmd::Verify => {
            all_passed = run_verify(&cfg, &field, &mut stage)?;
        }
    }
    stage.commit()?;
    Ok(all_passed)
}

fn gauge_domain(cfg: &RunConfig) -> DomainSpec {
    match (&cfg.domain, cfg.gauge_radius) {
        (DomainSpec::Disk { .. }, Some(r)) => DomainSpec::Disk { radius: r },
        (d, _) => d.clone(),
    }
}

fn sweep_domain(cfg: &RunConfig) -> DomainSpec {
    match (&cfg.domain, cfg.sweep_radius) {
        (DomainSpec::Disk { .. }, Some(r)) => DomainSpec::Disk { radius: r },
        (d, _) => d.clone(),
    }
}

fn run_verify(cfg: &RunConfig, field: &steklov_lab::field::MagneticField, stage: &mut Stage) -> Result<bool> {
    let mut all = true;
    let b0 = field.b(Vec2::ZERO).abs();
    for name in &cfg.verify_reports {
        match name.as_str() {
            "sweep" => {
                let domain = sweep_domain(cfg);
                let schedule = verify::sweep_schedule(&domain, b0, &cfg.sweep_betas, cfg.h, cfg.sweep_h_rule);
                let report = verify::scaling_sweep(&domain, field, &schedule, cfg.quadrature_order)?;
                all &= report.verdict;
                write_report(stage, "scaling_report", &report)?;
            }
            "decay" => {
                let schedule = verify::sweep_schedule(&cfg.domain, b0, &[cfg.decay_beta], cfg.h, cfg.sweep_h_rule);
                let mesh = build_mesh(&cfg.domain, schedule[0].1)?;
                let run = solve_steklov(&mesh, field, cfg.decay_beta, 1, cfg.quadrature_order)?;
                let (report, _) = verify::decay_profile(&mesh, field, &run, &cfg.t_factors, cfg.edge_rule)?;
                all &= report.verdict;
                write_report(stage, "decay_report", &report)?;
            }
            "audit" => {
                let schedule = verify::sweep_schedule(&cfg.domain, b0, &cfg.audit_betas, cfg.h, cfg.sweep_h_rule);
                let coercivity = verify::coercivity_audit(
                    &cfg.domain,
                    field,
                    &schedule,
                    cfg.quadrature_order,
                    cfg.audit_random,
                    cfg.seed,
                )?;
                all &= coercivity.verdict;
                write_report(stage, "coercivity_report", &coercivity)?;
                let weighted = verify::weighted_l2_audit(
                    &cfg.domain,
                    field,
                    &schedule,
                    cfg.quadrature_order,
                    &cfg.t_factors,
                    cfg.edge_rule,
                )?;
                all &= weighted.verdict;
                write_report(stage, "weighted_l2_report", &weighted)?;
            }
            "gauge" => {
                let domain = gauge_domain(cfg);
                let phi = Polynomial2::new(cfg.gauge_phi.clone());
                let report =
                    verify::gauge_check(&domain, field, &phi, cfg.gauge_beta, cfg.gauge_h, cfg.quadrature_order)?;
                all &= report.verdict;
                write_report(stage, "gauge_report", &report)?;
            }
            "localization" => {
                let h = cfg.loc_h.unwrap_or(cfg.h);
                let mesh = build_mesh(&cfg.domain, h)?;
                let run = solve_steklov(&mesh, field, cfg.loc_beta, 1, cfg.quadrature_order)?;
                let report = verify::localization_check(&mesh, field, &run)?;
                all &= report.verdict;
                write_report(stage, "localization_report", &report)?;
            }
            other => {
                return Err(Error::Config { line: 0, msg: format!("verify.reports: unknown report `{other}`") })
            }
        }
    }
    Ok(all)
}
