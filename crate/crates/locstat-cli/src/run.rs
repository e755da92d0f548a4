//! Experiment dispatch: build the inputs, run the requested operation,
//! write CSV tables and the JSON run report.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use locstat::asympt::{regime_tail, stationary_tail};
use locstat::grid::Grid;
use locstat::model::validate_assumptions;
use locstat::pickands::{
    default_horizon_ladder, estimate_pickands, interval_constants_nested, DEFAULT_MESH,
    DEFAULT_SAMPLES,
};
use locstat::raretail::{
    compare_to_theory, crude_tail, importance_tail, slepian_sandwich, CompareConfig,
    ComparisonTable, SandwichConfig, TailMethod, DEFAULT_U_LADDER,
};
use locstat::sampler::{covariance_on_grid, sample_paths};
use locstat::{Error, Result};

use crate::config::{AsymptTarget, ExperimentConfig};

/// Everything one invocation produced. `wall_time_s` is reported on stderr
/// but excluded from the serialized report so identical (config, seed)
/// runs write byte-identical files.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub threads: Option<usize>,
    pub versions: Versions,
    pub results: serde_json::Value,
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub cli: &'static str,
    pub lib: &'static str,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub files: Vec<PathBuf>,
}

/// Effective settings after flag/env/config merging.
pub struct Effective {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

pub fn run(config: ExperimentConfig, eff: &Effective) -> Result<RunOutcome> {
    let started = Instant::now();
    fs::create_dir_all(&eff.out_dir)?;
    let seed = eff.seed;
    let mut files = Vec::new();

    let results = match &config {
        ExperimentConfig::Asympt(cfg) => {
            if cfg.u_ladder.is_empty() {
                return Err(Error::invalid("asympt needs a nonempty u ladder"));
            }
            let mut rows = Vec::new();
            for &u in &cfg.u_ladder {
                let approx = match &cfg.target {
                    AsymptTarget::Stationary { horizon, a, alpha } => {
                        stationary_tail(*horizon, *a, *alpha, cfg.h_alpha, u)?
                    }
                    AsymptTarget::Process { process } => {
                        let spec = process.build()?;
                        regime_tail(&spec.regime_params(), cfg.h_alpha, u)?
                    }
                };
                rows.push((u, approx));
            }
            let mut csv = String::from("u,value,prefactor,power,log_factor,survival,regime_const\n");
            for (u, t) in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    u, t.value, t.prefactor, t.power, t.log_factor, t.survival, t.regime_const
                ));
            }
            files.push(write_text(&eff.out_dir, "asympt.csv", &csv)?);
            json!({ "tail_approx": rows.iter().map(|(u, t)| json!({
                "u": u, "approx": t,
            })).collect::<Vec<_>>() })
        }

        ExperimentConfig::Pickands(cfg) => {
            let ladder = cfg
                .s_ladder
                .clone()
                .unwrap_or_else(|| default_horizon_ladder(cfg.alpha));
            let mesh = cfg.mesh.unwrap_or(DEFAULT_MESH);
            let n = cfg.n_samples.unwrap_or(DEFAULT_SAMPLES);
            let per_s = interval_constants_nested(cfg.alpha, &ladder, mesh, n, seed)?;
            let est = estimate_pickands(cfg.alpha, &ladder, mesh, n, seed)?;
            let fit = est.extrapolated.as_ref().expect("ladder fit present");
            let mut csv = String::from("alpha,S,mesh,n,h_rate,se,extrapolated,fit_residual\n");
            for e in &per_s {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    e.alpha, e.s_horizon, e.mesh, e.n_samples, e.h_rate, e.std_error, fit.h,
                    fit.rms_residual
                ));
            }
            files.push(write_text(&eff.out_dir, "pickands.csv", &csv)?);
            json!({ "estimate": est })
        }

        ExperimentConfig::Tail(cfg) => {
            let spec = cfg.process.build()?;
            let grid = Grid::uniform(cfg.grid.start, cfg.grid.end, cfg.grid.points)?;
            warn_if_mesh_coarse(&grid, cfg.u, spec.index().alpha0);
            let est = match cfg.method {
                TailMethod::Crude => crude_tail(&spec, &grid, cfg.u, cfg.n_samples, seed)?,
                TailMethod::Importance => {
                    importance_tail(&spec, &grid, cfg.u, cfg.n_samples, seed)?
                }
            };
            let mut csv = String::from("u,p_hat,se,n,method,ess,exceedances,ill_tilted\n");
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                est.u,
                est.p_hat,
                est.std_error,
                est.n,
                est.method,
                est.ess.map(|e| e.to_string()).unwrap_or_default(),
                est.exceedances,
                est.ill_tilted
            ));
            files.push(write_text(&eff.out_dir, "tail.csv", &csv)?);
            if cfg.export_paths > 0 {
                let cov = covariance_on_grid(&spec, &grid)?;
                let paths = sample_paths(&cov, cfg.export_paths, seed);
                let mut csv = String::from("t,value,path_id\n");
                for (id, path) in paths.iter().enumerate() {
                    for (t, v) in path.grid.points().iter().zip(&path.values) {
                        csv.push_str(&format!("{t},{v},{id}\n"));
                    }
                }
                files.push(write_text(&eff.out_dir, "paths.csv", &csv)?);
            }
            json!({ "estimate": est })
        }

        ExperimentConfig::Compare(cfg) => {
            let spec = cfg.process.build()?;
            let ladder = cfg.u_ladder.clone().unwrap_or_else(|| DEFAULT_U_LADDER.to_vec());
            let alpha0 = spec.index().alpha0;
            let (h_alpha, h_source) = match cfg.h_alpha {
                Some(h) => (h, "fixed"),
                None => {
                    let est = estimate_pickands(
                        alpha0,
                        &default_horizon_ladder(alpha0),
                        DEFAULT_MESH,
                        DEFAULT_SAMPLES,
                        seed,
                    )?;
                    (est.extrapolated.expect("ladder fit present").h, "estimated")
                }
            };
            let mut run_cfg = CompareConfig::default();
            if let Some(n) = cfg.n_samples {
                run_cfg.n_samples = n;
            }
            if let Some(m) = cfg.method {
                run_cfg.method = m;
            }
            if let Some(cap) = cfg.max_grid_points {
                run_cfg.max_grid_points = cap;
            }
            let table = compare_to_theory(&spec, &ladder, h_alpha, &run_cfg, seed)?;
            files.push(write_text(&eff.out_dir, "compare.csv", &table.to_csv())?);
            let plot = eff.out_dir.join("plot.csv");
            emit_plotdata(&table, &plot)?;
            files.push(plot);
            json!({ "h_alpha": h_alpha, "h_alpha_source": h_source, "table": table })
        }

        ExperimentConfig::Validate(cfg) => {
            let spec = cfg.process.build()?;
            let vcfg = cfg.validation.clone().unwrap_or_default();
            let report = validate_assumptions(&spec, &vcfg)?;
            json!({ "validation": report })
        }

        ExperimentConfig::Sandwich(cfg) => {
            let spec = cfg.process.build()?;
            let scfg = SandwichConfig {
                u: cfg.u,
                nu: cfg.nu,
                s_horizon: cfg.s_horizon,
                n_samples: cfg.n_samples,
                grid_points: cfg.grid_points,
                q: cfg.q,
            };
            let report = slepian_sandwich(&spec, &scfg, seed)?;
            let mut csv = String::from("arm,p_hat,se\n");
            for (name, arm) in [
                ("lower", &report.lower),
                ("target", &report.target),
                ("upper", &report.upper),
            ] {
                csv.push_str(&format!("{},{},{}\n", name, arm.p_hat, arm.std_error));
            }
            files.push(write_text(&eff.out_dir, "sandwich.csv", &csv)?);
            json!({ "sandwich": report })
        }
    };

    let report = RunReport {
        config,
        seed,
        threads: eff.threads,
        versions: Versions { cli: env!("CARGO_PKG_VERSION"), lib: locstat::VERSION },
        results,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let path = eff.out_dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(&report).expect("report serializes"))?;
    files.push(path);
    Ok(RunOutcome { report, files })
}

/// Two-column plot data (u vs ratio) with error band columns.
pub fn emit_plotdata(table: &ComparisonTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::invalid("cannot emit plot data from an empty table"));
    }
    let mut out = String::from("u,ratio,ratio_lo,ratio_hi\n");
    for r in &table.rows {
        out.push_str(&format!("{},{},{},{}\n", r.u, r.ratio, r.ratio_lo, r.ratio_hi));
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

fn warn_if_mesh_coarse(grid: &Grid, u: f64, alpha0: f64) {
    if let Some(mesh) = grid.mesh() {
        let guidance = locstat::raretail::MESH_GUIDANCE_FACTOR * u.powf(-2.0 / alpha0);
        if mesh > guidance {
            eprintln!(
                "warning: grid mesh {mesh:.3e} exceeds the u^(-2/alpha) guidance {guidance:.3e}; \
                 supremum discretization bias grows past this scale"
            );
        }
    }
}
