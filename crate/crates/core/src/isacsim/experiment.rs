use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::{ChannelModel, GroupingStrategy, RangeMode, ScenarioConfig, UserDisk};
use super::link::{
    combiner, drop_users, free_space_gain, group_users, rate_optimized_groups, sinr_per_user, sum_rate, user_channels,
};
use crate::error::{Error, Result};
use crate::estimation::{simulate_snapshots, zf_music, NearFieldOptions, SinGrid, Source, SourceScene, TargetRange};
use crate::geometry::{unique_labels, ElementLayout};
use crate::seed;
use crate::wave::geomspace_through;

const RATE_STREAM: u64 = 0x5241_5445;
const SENSE_STREAM: u64 = 0x5345_4e53;

/// One aggregated output line.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub architecture: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

pub const RESULT_HEADER: &str = "sweep_var,sweep_value,architecture,metric,mean,stderr,trials,seed";

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = format!("{RESULT_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sweep_var, r.sweep_value, r.architecture, r.metric, r.mean, r.stderr, r.trials, r.seed
        );
    }
    out
}

/// Mean and standard error of the mean.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn build_layouts(cfg: &ScenarioConfig) -> Result<Vec<ElementLayout>> {
    cfg.architectures.iter().map(|a| a.build()).collect()
}

/// Short label per architecture; the tag, made unique when repeated.
fn labels(cfg: &ScenarioConfig) -> Vec<String> {
    unique_labels(&cfg.architectures)
}

/// Sum rate versus user-disk radius, for every architecture and assumed
/// channel model. The true channel is always near field.
pub fn run_rate_experiment(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let layouts = build_layouts(cfg)?;
    let names = labels(cfg);
    let lambda = cfg.wavelength();
    let snr = 10f64.powf(cfg.snr_db[0] / 10.0);
    let noise = free_space_gain(lambda, cfg.reference_range).powi(2) / snr;
    let mut rows = Vec::new();
    for (ri, &radius) in cfg.radius_sweep.iter().enumerate() {
        let disk = UserDisk { radius, ..cfg.disk };
        // per trial: [arch][model] -> (rate, groups)
        let per_trial: Vec<Vec<Vec<(f64, f64)>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let users = drop_users(seed::derive(cfg.master_seed, &[RATE_STREAM, ri as u64, t as u64]), &disk, cfg.users)?;
                layouts
                    .iter()
                    .map(|l| {
                        let truth = user_channels(l, lambda, &users, ChannelModel::NearField)?;
                        cfg.channel_models
                            .iter()
                            .map(|&model| {
                                let assumed = if model == ChannelModel::NearField {
                                    truth.clone()
                                } else {
                                    user_channels(l, lambda, &users, model)?
                                };
                                let groups = match cfg.grouping {
                                    GroupingStrategy::Threshold => group_users(&assumed, cfg.grouping_threshold),
                                    GroupingStrategy::RateOptimized => {
                                        rate_optimized_groups(&assumed, cfg.combiner, 1.0, noise)?
                                    }
                                };
                                let w = combiner(&assumed, cfg.combiner)?;
                                let sinr = sinr_per_user(&w, &truth, 1.0, noise, &groups);
                                Ok((sum_rate(&sinr, &groups), groups.count as f64))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (ai, name) in names.iter().enumerate() {
            for (mi, model) in cfg.channel_models.iter().enumerate() {
                let pick = |f: fn(&(f64, f64)) -> f64| -> Vec<f64> { per_trial.iter().map(|t| f(&t[ai][mi])).collect() };
                for (metric, values) in [
                    (format!("sum_rate_{}_{}", model.name(), cfg.combiner.name()), pick(|v| v.0)),
                    (format!("groups_{}", model.name()), pick(|v| v.1)),
                ] {
                    let (mean, stderr) = mean_stderr(&values);
                    rows.push(ResultRow {
                        sweep_var: "radius_m".into(),
                        sweep_value: radius,
                        architecture: name.clone(),
                        metric,
                        mean,
                        stderr,
                        trials: cfg.trials,
                        seed: cfg.master_seed,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Outcome of one sensing trial for one architecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingOutcome {
    /// Estimated target angle; broadside when the estimator failed.
    pub estimate: f64,
    pub failed: bool,
}

/// One sensing trial: users plus the target echo, zero-forced ZF-MUSIC.
pub fn sensing_trial(
    cfg: &ScenarioConfig,
    layout: &ElementLayout,
    snr_db: f64,
    trial_seed: u64,
) -> Result<SensingOutcome> {
    let lambda = cfg.wavelength();
    let users = drop_users(seed::derive(trial_seed, &[0]), &cfg.disk, cfg.users)?;
    let user_snr = 10f64.powf(cfg.user_snr_db / 10.0);
    let mut sources: Vec<Source> = users
        .iter()
        .map(|u| Source::near(u.angle, u.range, user_snr * (cfg.reference_range / u.range).powi(2)))
        .collect();
    sources.push(Source::near(cfg.target.angle, cfg.target.range, 10f64.powf(snr_db / 10.0)));
    let snap = simulate_snapshots(
        layout,
        lambda,
        &SourceScene::uncorrelated(sources),
        cfg.snapshots,
        1.0,
        seed::derive(trial_seed, &[1]),
    )?;
    let h = user_channels(layout, lambda, &users, ChannelModel::NearField)?;
    let grid = SinGrid::for_span(layout.span());
    let r_t = cfg.target.range;
    let ranges;
    let mode = match cfg.range_mode {
        RangeMode::Far => TargetRange::Far,
        RangeMode::Focused => TargetRange::Focused(r_t),
        RangeMode::Search => {
            ranges = geomspace_through(0.5 * r_t, r_t, 5.0 * r_t, 16, 16);
            TargetRange::Search(&ranges, NearFieldOptions::default())
        }
    };
    match zf_music(&snap, &h, 1, &grid, mode) {
        Ok(report) => Ok(SensingOutcome { estimate: report.angles[0], failed: false }),
        Err(Error::EstimationFailure(_)) => Ok(SensingOutcome { estimate: 0.0, failed: true }),
        Err(e) => Err(e),
    }
}

/// Target DOA NRMSE versus per-antenna target SNR.
pub fn run_sensing_experiment(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let layouts = build_layouts(cfg)?;
    let names = labels(cfg);
    let mut rows = Vec::new();
    for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
        let per_trial: Vec<Vec<SensingOutcome>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let s = seed::derive(cfg.master_seed, &[SENSE_STREAM, si as u64, t as u64]);
                layouts.iter().map(|l| sensing_trial(cfg, l, snr_db, s)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (ai, name) in names.iter().enumerate() {
            let sq: Vec<f64> = per_trial.iter().map(|t| (t[ai].estimate - cfg.target.angle).powi(2)).collect();
            let (mse, mse_se) = mean_stderr(&sq);
            let nrmse = mse.sqrt() / std::f64::consts::PI;
            // delta method: d sqrt(x) = dx / (2 sqrt(x))
            let nrmse_se = if mse > 0.0 { mse_se / (2.0 * mse.sqrt() * std::f64::consts::PI) } else { 0.0 };
            let fails: Vec<f64> = per_trial.iter().map(|t| if t[ai].failed { 1.0 } else { 0.0 }).collect();
            let (fail_rate, fail_se) = mean_stderr(&fails);
            for (metric, mean, stderr) in [("nrmse", nrmse, nrmse_se), ("failure_rate", fail_rate, fail_se)] {
                rows.push(ResultRow {
                    sweep_var: "snr_db".into(),
                    sweep_value: snr_db,
                    architecture: name.clone(),
                    metric: metric.into(),
                    mean,
                    stderr,
                    trials: cfg.trials,
                    seed: cfg.master_seed,
                });
            }
        }
    }
    Ok(rows)
}
