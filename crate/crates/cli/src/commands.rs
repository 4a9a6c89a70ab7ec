//! The five subcommands. Each declares its settings with defaults and
//! renders its outputs in memory.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use sparse_mimo::coarray::{difference_coarray, sensing_dof, sum_coarray};
use sparse_mimo::estimation::{
    coarray_music, music_far, nrmse, polar_omp, sample_covariance, simulate_snapshots, spatial_smoothing, steer_far,
    steer_near, two_stage_near, zf_music, EstimateReport, NearFieldOptions, SinGrid, SnapshotSet, Source, SourceScene,
    TargetRange,
};
use sparse_mimo::geometry::{unique_labels, Architecture, ElementLayout};
use sparse_mimo::isacsim::{rows_to_csv, run_rate_experiment, run_sensing_experiment, ScenarioConfig};
use sparse_mimo::patterns::{angular_resolution, depth_3db, farfield_pattern, nearfield_focus_pattern, peak_sidelobe, PolarPoint};
use sparse_mimo::wave::{geomspace_through, linspace};
use sparse_mimo::{seed, wavelength, Error, C64};

use crate::error::{io_err, CliError, Result};
use crate::output::Outputs;
use crate::settings::{Origin, Settings};

pub struct CommandSpec {
    pub name: &'static str,
    /// Every accepted key with its default.
    pub defaults: fn() -> Vec<(String, String)>,
    /// The key holding the master seed.
    pub seed_key: &'static str,
    pub run: fn(&Settings, &mut Outputs) -> Result<()>,
}

pub fn spec(name: &str) -> Option<CommandSpec> {
    Some(match name {
        "pattern" => CommandSpec { name: "pattern", defaults: pattern_defaults, seed_key: "seed", run: pattern },
        "focus" => CommandSpec { name: "focus", defaults: focus_defaults, seed_key: "seed", run: focus },
        "coarray" => CommandSpec { name: "coarray", defaults: coarray_defaults, seed_key: "seed", run: coarray },
        "doa" => CommandSpec { name: "doa", defaults: doa_defaults, seed_key: "seed", run: doa },
        "isac" => CommandSpec { name: "isac", defaults: isac_defaults, seed_key: "master_seed", run: isac },
        _ => return None,
    })
}

fn owned(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

const LAYOUT_KEYS: [(&str, &str); 3] = [("architectures", ""), ("layout_file", ""), ("seed", "1")];

fn with_layout(extra: &[(&str, &str)]) -> Vec<(String, String)> {
    let mut v = owned(&LAYOUT_KEYS);
    v.extend(owned(extra));
    v
}

/// Layouts named by `architectures` (`;`-separated) or read from `layout_file`.
fn layouts(s: &Settings) -> Result<Vec<(String, ElementLayout)>> {
    if let Some(path) = s.raw("layout_file").filter(|p| !p.is_empty()) {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let layout = ElementLayout::from_text(&text)
            .map_err(|e| CliError::Config { origin: s.origin("layout_file"), message: format!("{path}: {e}") })?;
        return Ok(vec![(layout.architecture().tag().to_string(), layout)]);
    }
    let archs: Vec<Architecture> = s
        .raw("architectures")
        .unwrap_or("")
        .split(';')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(|a| {
            a.parse().map_err(|e: Error| match s.origin("architectures") {
                Origin::Flag => CliError::Usage(e.to_string()),
                origin => CliError::Config { origin, message: e.to_string() },
            })
        })
        .collect::<Result<_>>()?;
    if archs.is_empty() {
        return Err(CliError::Usage("no array given: pass --arch with its parameters, --layout, --preset or --config".into()));
    }
    let labels = unique_labels(&archs);
    archs.iter().zip(labels).map(|(a, l)| Ok((l, a.build()?))).collect()
}

fn pattern_defaults() -> Vec<(String, String)> {
    with_layout(&[("points", "4001"), ("db", "false")])
}

fn pattern(s: &Settings, out: &mut Outputs) -> Result<()> {
    let points: usize = s.get("points")?;
    if points < 2 {
        return Err(CliError::Invalid("`points` must be at least 2".into()));
    }
    let db: bool = s.get("db")?;
    let grid = linspace(-1.0, 1.0, points);
    for (label, layout) in layouts(s)? {
        let curve = farfield_pattern(&layout, &grid)?;
        let res = angular_resolution(&curve).ok();
        let psl = res.and_then(|r| peak_sidelobe(&curve, r).ok());
        out.report.push(format!(
            "{label}: M={} resolution={} peak_sidelobe={}",
            layout.len(),
            res.map_or("n/a".into(), |r| r.to_string()),
            psl.map_or("n/a".into(), |p| p.level.to_string())
        ));
        out.add(format!("pattern_{label}.csv"), curve.to_csv(db));
    }
    Ok(())
}

fn focus_defaults() -> Vec<(String, String)> {
    with_layout(&[
        ("carrier_hz", "28e9"),
        ("focus_range_m", "200"),
        ("focus_angle_rad", "0"),
        ("range_min_m", "20"),
        ("range_max_m", "20000"),
        ("range_points_below", "60"),
        ("range_points_above", "120"),
        ("angle_halfwidth_rad", "0.1"),
        ("angle_points", "201"),
        ("db", "false"),
    ])
}

fn focus(s: &Settings, out: &mut Outputs) -> Result<()> {
    let lambda = wavelength(s.get("carrier_hz")?);
    let focus = PolarPoint { range: s.get("focus_range_m")?, angle: s.get("focus_angle_rad")? };
    let (lo, hi): (f64, f64) = (s.get("range_min_m")?, s.get("range_max_m")?);
    if !(0.0 < lo && lo < focus.range && focus.range < hi) {
        return Err(CliError::Invalid("need 0 < range_min_m < focus_range_m < range_max_m".into()));
    }
    let ranges = geomspace_through(lo, focus.range, hi, s.get("range_points_below")?, s.get("range_points_above")?);
    let n: usize = s.get("angle_points")?;
    if n % 2 == 0 {
        return Err(CliError::Invalid("`angle_points` must be odd so the focus angle is a grid point".into()));
    }
    let hw: f64 = s.get("angle_halfwidth_rad")?;
    let h = (n / 2) as f64;
    // the middle sample is the focus angle exactly
    let angles: Vec<f64> = (0..n).map(|i| focus.angle + hw * (i as f64 - h) / h.max(1.0)).collect();
    let db: bool = s.get("db")?;
    for (label, layout) in layouts(s)? {
        let grid = nearfield_focus_pattern(&layout, lambda, focus, &ranges, &angles)?;
        let depth = depth_3db(&grid)?;
        let upper = if depth.is_bounded_above() { format!("{}", depth.upper) } else { "unbounded".into() };
        out.report.push(format!("{label}: 3dB depth [{}, {upper}] m, peak at focus: {}", depth.lower, grid.focus_cell() == Some(grid.argmax())));
        out.add(format!("focus_{label}.csv"), grid.to_csv(db));
    }
    Ok(())
}

fn coarray_defaults() -> Vec<(String, String)> {
    with_layout(&[("kind", "difference")])
}

fn coarray(s: &Settings, out: &mut Outputs) -> Result<()> {
    let kind = s.raw("kind").unwrap_or("difference").to_string();
    for (label, layout) in layouts(s)? {
        let profile = match kind.as_str() {
            "difference" => difference_coarray(&layout),
            "sum" => sum_coarray(&layout),
            other => return Err(CliError::Invalid(format!("unknown co-array kind `{other}` (difference or sum)"))),
        };
        let profile = profile.map_err(|e| match e {
            Error::NonIntegerGrid { .. } => CliError::Invalid(format!(
                "{label}: {e}. Co-arrays need every element on a whole multiple of d0; \
                 a uniform sparse array with eta = 4.1 is the usual example that is not"
            )),
            e => e.into(),
        })?;
        let holes = profile.holes();
        let mut report = String::new();
        let _ = writeln!(report, "architecture = {}", layout.architecture());
        let _ = writeln!(report, "kind = {kind}");
        let _ = writeln!(report, "elements = {}", layout.len());
        let _ = writeln!(report, "max_lag = {}", profile.max_lag());
        let _ = writeln!(report, "max_contiguous = {}", profile.max_contiguous());
        let list: Vec<String> = holes.iter().map(u64::to_string).collect();
        let _ = writeln!(report, "holes = {}", if list.is_empty() { "none".into() } else { list.join(",") });
        if kind == "difference" {
            let _ = writeln!(report, "sensing_dof = {}", sensing_dof(&layout)?);
        }
        out.report.push(format!("[{label}]\n{}", report.trim_end()));
        out.add(format!("coarray_{label}.csv"), profile.to_csv());
        out.add(format!("coarray_{label}.txt"), report);
    }
    Ok(())
}

const DOA_STREAM: u64 = 0x444f_4121;

fn doa_defaults() -> Vec<(String, String)> {
    with_layout(&[
        ("estimator", "music"),
        ("k", "1"),
        ("source_sin", ""),
        ("source_range_m", "inf"),
        ("coherent", "false"),
        ("snr_db", "10"),
        ("snapshots", "200"),
        ("trials", "10"),
        ("carrier_hz", "28e9"),
        ("grid_step", "0"),
        ("subarray", "0"),
        ("range_min_m", "2"),
        ("range_max_m", "2000"),
        ("range_points", "64"),
        ("user_sin", ""),
        ("user_range_m", "inf"),
        ("user_snr_db", "10"),
    ])
}

#[derive(Clone, Copy, PartialEq)]
enum Estimator {
    Music,
    SmoothMusic,
    CoarrayMusic,
    TwoStage,
    Omp,
    ZfMusic,
}

impl Estimator {
    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "music" => Estimator::Music,
            "smooth-music" => Estimator::SmoothMusic,
            "coarray-music" => Estimator::CoarrayMusic,
            "two-stage" => Estimator::TwoStage,
            "omp" => Estimator::Omp,
            "zf-music" => Estimator::ZfMusic,
            other => {
                return Err(CliError::Invalid(format!(
                    "unknown estimator `{other}` (music, smooth-music, coarray-music, two-stage, omp, zf-music)"
                )))
            }
        })
    }
}

fn source(angle: f64, range: f64, power: f64) -> Source {
    if range.is_finite() {
        Source::near(angle, range, power)
    } else {
        Source::far(angle, power)
    }
}

fn doa(s: &Settings, out: &mut Outputs) -> Result<()> {
    let name = s.raw("estimator").unwrap_or("music").to_string();
    let est = Estimator::parse(&name)?;
    let mut all = layouts(s)?;
    if all.len() != 1 {
        return Err(CliError::Invalid("doa runs on exactly one array".into()));
    }
    let (label, layout) = all.remove(0);
    let k: usize = s.get("k")?;
    let mut sines: Vec<f64> = s.list("source_sin")?;
    if sines.is_empty() {
        sines = match k {
            0 => vec![],
            1 => vec![0.0],
            _ => linspace(-0.7, 0.7, k),
        };
    }
    if sines.len() != k || sines.iter().any(|u| !(u.abs() < 1.0)) {
        return Err(CliError::Invalid(format!("`source_sin` needs {k} values inside (-1, 1)")));
    }
    sines.sort_by(f64::total_cmp);
    let truth: Vec<f64> = sines.iter().map(|u| u.asin()).collect();
    let src_range: f64 = s.get("source_range_m")?;
    let coherent: bool = s.get("coherent")?;
    let noise = 10f64.powf(-s.get::<f64>("snr_db")? / 10.0);
    let snapshots: usize = s.get("snapshots")?;
    let trials: usize = s.get("trials")?;
    let master: u64 = s.get("seed")?;
    let lambda = wavelength(s.get("carrier_hz")?);
    let step: f64 = s.get("grid_step")?;
    let grid = if step > 0.0 { SinGrid::new(-1.0, 1.0, step)? } else { SinGrid::for_span(layout.span()) };
    let (r_lo, r_hi): (f64, f64) = (s.get("range_min_m")?, s.get("range_max_m")?);
    if !(0.0 < r_lo && r_lo < r_hi) {
        return Err(CliError::Invalid("need 0 < range_min_m < range_max_m".into()));
    }
    let half = s.get::<usize>("range_points")?.max(2) / 2;
    let ranges = geomspace_through(r_lo, (r_lo * r_hi).sqrt(), r_hi, half, half);
    let subarray = match s.get::<usize>("subarray")? {
        0 => layout.len() / 2,
        n => n,
    };
    let users: Vec<f64> = s.list("user_sin")?;
    if est != Estimator::ZfMusic && !users.is_empty() {
        return Err(CliError::Invalid("`user_sin` only applies to zf-music".into()));
    }
    let user_range: f64 = s.get("user_range_m")?;
    let user_power = 10f64.powf(s.get::<f64>("user_snr_db")? / 10.0);

    let mut sources: Vec<Source> = truth.iter().map(|&a| source(a, src_range, 1.0)).collect();
    sources.extend(users.iter().map(|u| source(u.asin(), user_range, user_power)));
    let scene = if coherent { SourceScene::coherent(sources) } else { SourceScene::uncorrelated(sources) };
    let columns = users
        .iter()
        .map(|u| {
            if user_range.is_finite() {
                steer_near(&layout, lambda, user_range, u.asin())
            } else {
                Ok(steer_far(&layout, u.asin()))
            }
        })
        .collect::<sparse_mimo::Result<Vec<_>>>()?;
    let h = if columns.is_empty() { DMatrix::<C64>::zeros(layout.len(), 0) } else { DMatrix::from_columns(&columns) };
    let omp_angles: Vec<f64> = grid.values().iter().map(|u| u.asin()).collect();
    let mut rings = ranges.clone();
    rings.push(f64::INFINITY);

    let run = |snap: &SnapshotSet| -> sparse_mimo::Result<EstimateReport> {
        match est {
            Estimator::Music => music_far(&sample_covariance(snap), &layout, k, &grid),
            Estimator::SmoothMusic => {
                let r = spatial_smoothing(snap, subarray)?;
                music_far(&r, &layout.subarray(subarray)?, k, &grid)
            }
            Estimator::CoarrayMusic => coarray_music(&sample_covariance(snap), &layout, k, &grid),
            Estimator::TwoStage => two_stage_near(snap, k, &grid, &ranges, NearFieldOptions::default()),
            Estimator::Omp => polar_omp(snap, k, &omp_angles, &rings),
            Estimator::ZfMusic => {
                let mode = if src_range.is_finite() { TargetRange::Focused(src_range) } else { TargetRange::Far };
                zf_music(snap, &h, k, &grid, mode)
            }
        }
    };
    let reports: Vec<Option<EstimateReport>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let snap = simulate_snapshots(&layout, lambda, &scene, snapshots, noise, seed::derive(master, &[DOA_STREAM, t as u64]))?;
            match run(&snap) {
                Ok(r) => Ok(Some(r)),
                Err(Error::EstimationFailure(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<sparse_mimo::Result<_>>()?;

    let mut csv = String::from("trial,true_angle_rad,est_angle_rad,est_range_m,method\n");
    for (t, rep) in reports.iter().enumerate() {
        for (i, truth_i) in truth.iter().enumerate() {
            let (a, r) = match rep {
                Some(r) => (r.angles[i].to_string(), r.ranges.get(i).map_or(String::new(), f64::to_string)),
                None => ("nan".into(), String::new()),
            };
            let _ = writeln!(csv, "{t},{truth_i},{a},{r},{name}");
        }
    }
    let mut summary = String::from("method,architecture,true_angle_rad,nrmse,trials,failures\n");
    let failures = reports.iter().filter(|r| r.is_none()).count();
    for (i, truth_i) in truth.iter().enumerate() {
        let est: Vec<f64> = reports.iter().flatten().map(|r| r.angles[i]).collect();
        let e = nrmse(&est, *truth_i).map_or("nan".into(), |v| v.to_string());
        let _ = writeln!(summary, "{name},{label},{truth_i},{e},{trials},{failures}");
        out.report.push(format!("source {i}: true {truth_i} rad, nrmse {e}"));
    }
    out.report.push(format!("{trials} trials, {failures} failed"));
    out.notes.push("nrmse = RMS angle error in radians divided by pi".into());
    out.notes.push("snr_db is per antenna with unit-power sources".into());
    out.add("doa_estimates.csv", csv);
    out.add("doa_summary.csv", summary);
    Ok(())
}

fn isac_defaults() -> Vec<(String, String)> {
    let mut v = vec![("experiment".to_string(), String::new())];
    for line in ScenarioConfig::default().to_text().lines() {
        let (k, val) = line.split_once('=').expect("to_text writes key = value");
        v.push((k.trim().to_string(), val.trim().to_string()));
    }
    v
}

fn isac(s: &Settings, out: &mut Outputs) -> Result<()> {
    let mut cfg = ScenarioConfig::default();
    for (k, v, origin) in s.iter().filter(|(k, ..)| !matches!(*k, "experiment" | "preset")) {
        cfg.set(k, v).map_err(|e| CliError::Config { origin: origin.clone(), message: e.to_string() })?;
    }
    cfg.validate()?;
    let experiment = s.raw("experiment").unwrap_or("");
    let rows = match experiment {
        "sensing" => {
            out.notes.push("nrmse = RMS target DOA error in radians divided by pi".into());
            out.notes.push("snr_db is the per-antenna target SNR; users have user_snr_db at reference_range_m, scaled by (reference/r)^2".into());
            run_sensing_experiment(&cfg)?
        }
        "rate" => {
            out.notes.push("snr_db is the per-antenna SNR of a user at reference_range_m; sum rate in bit/s/Hz".into());
            out.notes.push("the true channel is near field; channel_models name the channel the receiver assumes".into());
            run_rate_experiment(&cfg)?
        }
        "" => return Err(CliError::Usage("choose an experiment: --experiment sensing|rate or --preset fig5|fig6".into())),
        other => return Err(CliError::Invalid(format!("unknown experiment `{other}` (sensing or rate)"))),
    };
    for r in &rows {
        out.report.push(format!("{} {:>8} {:>6} {:<26} {:.6} ± {:.6}", r.sweep_var, r.sweep_value, r.architecture, r.metric, r.mean, r.stderr));
    }
    out.add(format!("isac_{experiment}.csv"), rows_to_csv(&rows));
    Ok(())
}
