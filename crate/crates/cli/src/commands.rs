//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use pem::datagen::{write_container, DataDump};
use pem::pem::{parse_preset_name, preset, preset_names, CovInit, PemConfig};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::CliError;
use crate::pipeline::{generate, run_seed, ResultRecord, SeedOutcome, Status};
use crate::report::{write_diag, write_results, write_summary};
use crate::spec::{Experiment, SourceModel};

/// Default sampling stride of diagnostics traces.
pub const DEFAULT_DIAG_STRIDE: usize = 100;

/// Worker pool sized by `PEM_THREADS` (all cores when unset).
pub fn worker_pool() -> Result<ThreadPool, CliError> {
    let threads = match std::env::var("PEM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Validation(format!("PEM_THREADS must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run_tasks(
    pool: &ThreadPool,
    tasks: &[(Experiment, u64, Option<usize>)],
    stride: Option<usize>,
) -> Result<Vec<SeedOutcome>, CliError> {
    pool.install(|| {
        tasks
            .par_iter()
            .map(|(exp, seed, master)| run_seed(exp, *seed, *master, stride))
            .collect()
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub diag: Vec<PathBuf>,
    pub records: Vec<ResultRecord>,
}

/// Every seed of `exp`; writes `<name>.results.csv`, `<name>.summary.csv` and, with a
/// diagnostics stride, `<name>.diag.seed<k>.csv` per successful seed.
pub fn run(exp: &Experiment, out_dir: &Path) -> Result<RunOutput, CliError> {
    let pool = worker_pool()?;
    let tasks: Vec<_> = exp.seeds.iter().map(|&s| (exp.clone(), s, None)).collect();
    let outcomes = run_tasks(&pool, &tasks, exp.diag_stride)?;

    let mut diag = Vec::new();
    for o in &outcomes {
        if let Some(rows) = &o.diag {
            let path = out_dir.join(format!("{}.diag.seed{}.csv", exp.name, o.record.seed));
            let rows: Vec<_> = rows.iter().map(|r| (None, r)).collect();
            write_diag(&path, &rows)?;
            diag.push(path);
        }
    }
    let records: Vec<ResultRecord> = outcomes.into_iter().map(|o| o.record).collect();
    let results = out_dir.join(format!("{}.results.csv", exp.name));
    let summary = out_dir.join(format!("{}.summary.csv", exp.name));
    write_results(&results, &records, None)?;
    write_summary(&summary, std::slice::from_ref(&records), None)?;
    Ok(RunOutput {
        results,
        summary,
        diag,
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rho,
    SnrInDb,
    M,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Rho => "rho",
            Axis::SnrInDb => "snr_in_db",
            Axis::M => "m",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "rho" => Ok(Axis::Rho),
            "snr_in_db" | "snr" => Ok(Axis::SnrInDb),
            "m" => Ok(Axis::M),
            _ => Err(CliError::Validation(format!(
                "unknown sweep axis {s:?} (rho, snr_in_db, m)"
            ))),
        }
    }
}

/// Parses a comma-separated value list; `null` stands for "no noise" on the SNR axis.
pub fn parse_values(axis: Axis, text: &str) -> Result<Vec<Option<f64>>, CliError> {
    let bad = |v: &str| CliError::Validation(format!("bad {} value {v:?}", axis.name()));
    let values: Vec<Option<f64>> = text
        .split(',')
        .map(str::trim)
        .map(|v| match v {
            "null" | "none" if axis == Axis::SnrInDb => Ok(None),
            _ => v.parse::<f64>().map(Some).map_err(|_| bad(v)),
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Validation("empty value list".into()));
    }
    Ok(values)
}

/// The experiment at one sweep value, validated.
fn at_value(exp: &Experiment, axis: Axis, value: Option<f64>) -> Result<Experiment, CliError> {
    let mut e = exp.clone();
    match axis {
        Axis::Rho => {
            let SourceModel::CopulaT { nu, .. } = exp.source else {
                return Err(CliError::Validation("a rho sweep needs copula_t sources".into()));
            };
            let rho = value.unwrap_or(0.0);
            if !(0.0..1.0).contains(&rho) {
                return Err(CliError::Validation(format!("rho {rho} outside [0, 1)")));
            }
            e.source = SourceModel::CopulaT { rho, nu };
        }
        Axis::SnrInDb => e.snr_in_db = value,
        Axis::M => {
            let m = value.unwrap_or(f64::NAN);
            if !(m.fract() == 0.0 && m >= exp.n as f64) {
                return Err(CliError::Validation(format!(
                    "m value {m} must be an integer >= n = {}",
                    exp.n
                )));
            }
            e = e.with_m(m as usize);
        }
    }
    e.pem.validate().map_err(|err| CliError::Validation(err.to_string()))?;
    Ok(e)
}

/// Cartesian product of `values` and seeds. For the `m` axis each seed's mixing
/// matrix is drawn once at the largest `m` and every run uses its leading rows.
pub fn sweep(exp: &Experiment, axis: Axis, values: &[Option<f64>], out_dir: &Path) -> Result<RunOutput, CliError> {
    let configs: Vec<Experiment> = values
        .iter()
        .map(|&v| at_value(exp, axis, v))
        .collect::<Result<_, _>>()?;
    let master = (axis == Axis::M).then(|| configs.iter().map(|c| c.m).max().unwrap_or(exp.m));
    let tasks: Vec<_> = configs
        .iter()
        .flat_map(|c| exp.seeds.iter().map(move |&s| (c.clone(), s, master)))
        .collect();
    let pool = worker_pool()?;
    let records: Vec<ResultRecord> = run_tasks(&pool, &tasks, None)?.into_iter().map(|o| o.record).collect();

    let groups: Vec<Vec<ResultRecord>> = records.chunks(exp.seeds.len()).map(|c| c.to_vec()).collect();
    let stem = format!("{}.sweep-{}", exp.name, axis.name());
    let results = out_dir.join(format!("{stem}.results.csv"));
    let summary = out_dir.join(format!("{stem}.summary.csv"));
    write_results(&results, &records, Some(axis.name()))?;
    write_summary(&summary, &groups, Some(axis.name()))?;
    Ok(RunOutput {
        results,
        summary,
        diag: Vec::new(),
        records,
    })
}

/// Diagnostics traces for every seed in one CSV with a leading seed column.
/// Fails if any emitted row violates `|R2| ≤ norm_bound`.
pub fn diagnose(exp: &Experiment, rho: Option<f64>, out_dir: &Path) -> Result<PathBuf, CliError> {
    let exp = match rho {
        Some(r) => at_value(exp, Axis::Rho, Some(r))?,
        None => exp.clone(),
    };
    let stride = exp.diag_stride.unwrap_or(DEFAULT_DIAG_STRIDE);
    let pool = worker_pool()?;
    let tasks: Vec<_> = exp.seeds.iter().map(|&s| (exp.clone(), s, None)).collect();
    let outcomes = run_tasks(&pool, &tasks, Some(stride))?;

    let mut rows = Vec::new();
    for o in &outcomes {
        if let Status::Diverged(msg) = &o.record.status {
            return Err(CliError::Runtime(format!("seed {}: {msg}", o.record.seed)));
        }
        for row in o.diag.iter().flatten() {
            let r = &row.remainder;
            if r.r2_spectral.abs() > r.norm_bound + 1e-12 * (1.0 + r.norm_bound) {
                return Err(CliError::Runtime(format!(
                    "seed {} t={}: remainder {} exceeds bound {}",
                    o.record.seed, row.t, r.r2_spectral, r.norm_bound
                )));
            }
            rows.push((Some(o.record.seed), row));
        }
    }
    let file = match rho {
        Some(r) => format!("{}.diag.rho{r}.csv", exp.name),
        None => format!("{}.diag.csv", exp.name),
    };
    let path = out_dir.join(file);
    write_diag(&path, &rows)?;
    Ok(path)
}

/// Writes the `PEMB` data container for one seed (the spec's first seed by default).
pub fn dump_data(exp: &Experiment, out: &Path, seed: Option<u64>, master_m: Option<usize>) -> Result<(), CliError> {
    if let Some(mm) = master_m {
        if mm < exp.m {
            return Err(CliError::Validation(format!("master m {mm} is below m = {}", exp.m)));
        }
    }
    let seed = seed.unwrap_or(exp.seeds[0]);
    let data = generate(exp, seed, master_m)?;
    let dump = DataDump {
        domain: exp.domain,
        s: data.sources.s,
        a: data.mixing,
        x: data.mixtures,
    };
    write_container(BufWriter::new(File::create(out)?), &dump)?;
    Ok(())
}

fn describe(cfg: &PemConfig) -> String {
    let mut s = String::new();
    let sched =
        |s: &pem::pem::StepSchedule| format!("{} base={} divider={} floor={:e}", s.rule, s.base, s.divider, s.floor);
    let _ = writeln!(s, "  variant = {}", cfg.variant);
    let _ = writeln!(s, "  lambda = {}", cfg.lambda);
    let _ = writeln!(s, "  epsilon = {:e}", cfg.epsilon);
    let _ = writeln!(s, "  gamma_pred = {}", cfg.gamma_pred);
    if let Some(g) = cfg.gamma_lateral {
        let _ = writeln!(s, "  gamma_lateral = {g}");
    }
    let _ = writeln!(s, "  w_schedule = {}", sched(&cfg.w_schedule));
    let _ = writeln!(s, "  y_schedule = {}", sched(&cfg.y_schedule));
    if let Some(e) = cfg.eta_lambda {
        let _ = writeln!(s, "  eta_lambda = {e}");
    }
    let _ = writeln!(s, "  tau_max = {}", cfg.tau_max);
    let _ = writeln!(s, "  inner_tol = {:e}", cfg.inner_tol);
    let cov = match cfg.init.cov {
        CovInit::Scaled(c) => format!("{c} I"),
        CovInit::Gram { diag, noise_var } => format!("G G^T, G = sqrt({diag}) I + N(0, {noise_var})"),
    };
    let _ = writeln!(
        s,
        "  init = W: {} I + {} xi, C: {}, mu: {}",
        cfg.init.w_diag, cfg.init.w_noise, cov, cfg.init.mu0
    );
    s
}

/// Human-readable listing of every shipped preset.
pub fn presets() -> String {
    let mut out = String::new();
    for name in preset_names() {
        let (domain, variant) = parse_preset_name(&name).expect("listed presets parse");
        let _ = writeln!(out, "{name}");
        out.push_str(&describe(&preset(domain, variant, 1, 1)));
    }
    out
}
