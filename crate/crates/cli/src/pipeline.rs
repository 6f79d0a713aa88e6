//! One seed of an experiment: generate, mix, separate, score.

use std::time::Instant;

use pem::datagen::{
    gen_mixing, mix_with_noise, sample_copula_t_source, sample_uniform_source, take_first_rows, SourceBatch,
};
use pem::diagnostics::TraceRow;
use pem::metrics::{align, msnr_db};
use pem::pem::{run_online, Variant};
use pem::{Error, Matrix, SourceDomain};

use crate::error::CliError;
use crate::spec::{Experiment, SourceModel};

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Diverged(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub name: String,
    pub seed: u64,
    pub domain: SourceDomain,
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub rho: f64,
    pub snr_in_db: Option<f64>,
    pub variant: Variant,
    pub status: Status,
    /// NaN for failed seeds.
    pub msnr_db_mean: f64,
    pub per_source_msnr: Vec<f64>,
    pub mean_inner_iters: f64,
    pub infeasible_fraction: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub record: ResultRecord,
    pub diag: Option<Vec<TraceRow>>,
}

pub struct GeneratedData {
    pub sources: SourceBatch,
    pub mixing: Matrix,
    pub mixtures: Matrix,
}

/// Sources, mixing matrix and mixtures for `seed`. With `master_m`, the mixing
/// matrix is drawn with that many rows and its first `exp.m` rows are kept, so
/// different `m` share nested observation channels.
pub fn generate(exp: &Experiment, seed: u64, master_m: Option<usize>) -> Result<GeneratedData, CliError> {
    let sources = match exp.source {
        SourceModel::Uniform => sample_uniform_source(exp.domain, exp.n, exp.t, seed)?,
        SourceModel::CopulaT { rho, nu } => sample_copula_t_source(exp.domain, exp.n, exp.t, rho, nu, seed)?,
    };
    let rows = master_m.unwrap_or(exp.m).max(exp.m);
    let master = gen_mixing(rows, exp.n, exp.mixing, seed)?;
    let mixing = take_first_rows(&master, exp.m)?;
    let (mixtures, _) = mix_with_noise(&mixing, &sources, exp.snr_in_db, seed)?;
    Ok(GeneratedData {
        sources,
        mixing,
        mixtures,
    })
}

pub fn run_seed(
    exp: &Experiment,
    seed: u64,
    master_m: Option<usize>,
    stride: Option<usize>,
) -> Result<SeedOutcome, CliError> {
    let started = Instant::now();
    let data = generate(exp, seed, master_m)?;
    let mut record = ResultRecord {
        name: exp.name.clone(),
        seed,
        domain: exp.domain,
        n: exp.n,
        m: exp.m,
        t: exp.t,
        rho: exp.source.rho(),
        snr_in_db: exp.snr_in_db,
        variant: exp.pem.variant,
        status: Status::Ok,
        msnr_db_mean: f64::NAN,
        per_source_msnr: Vec::new(),
        mean_inner_iters: f64::NAN,
        infeasible_fraction: f64::NAN,
        wall_time_s: 0.0,
    };

    let run = match run_online(&data.mixtures, &exp.pem, seed, stride) {
        Ok(run) => run,
        Err(e @ Error::NumericalDivergence { .. }) => {
            record.status = Status::Diverged(e.to_string());
            record.wall_time_s = started.elapsed().as_secs_f64();
            return Ok(SeedOutcome { record, diag: None });
        }
        Err(e) => return Err(e.into()),
    };

    let (_, aligned) = align(&data.sources.s, &run.y, exp.domain)?;
    let (per_source, mean) = msnr_db(&data.sources.s, &aligned)?;
    record.msnr_db_mean = mean;
    record.per_source_msnr = per_source;
    record.mean_inner_iters = run.mean_inner_iters();
    record.infeasible_fraction = run.infeasible_fraction();

    let diag = match run.trace {
        Some(trace) => Some(
            trace
                .iter()
                .map(|s| TraceRow::from_trace(s, exp.pem.epsilon))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    record.wall_time_s = started.elapsed().as_secs_f64();
    Ok(SeedOutcome { record, diag })
}
