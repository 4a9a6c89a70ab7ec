use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::geometry::Architecture;
use crate::patterns::PolarPoint;

/// Model the base station assumes when it builds combiners and groups. The
/// physical channel is always the exact spherical-wavefront one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    FarField,
    NearField,
}

impl ChannelModel {
    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::FarField => "far_field",
            ChannelModel::NearField => "near_field",
        }
    }
}

impl FromStr for ChannelModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "far_field" | "far" => Ok(ChannelModel::FarField),
            "near_field" | "near" => Ok(ChannelModel::NearField),
            _ => Err(invalid(format!("unknown channel model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinerKind {
    Mrc,
    Zf,
}

impl CombinerKind {
    pub fn name(self) -> &'static str {
        match self {
            CombinerKind::Mrc => "mrc",
            CombinerKind::Zf => "zf",
        }
    }
}

impl FromStr for CombinerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mrc" => Ok(CombinerKind::Mrc),
            "zf" => Ok(CombinerKind::Zf),
            _ => Err(invalid(format!("unknown combiner `{s}`"))),
        }
    }
}

/// How users are split into time-frequency blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupingStrategy {
    /// Greedy colouring at `grouping_threshold`.
    Threshold,
    /// Greedy colouring at the ladder threshold with the best predicted rate.
    RateOptimized,
}

impl GroupingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            GroupingStrategy::Threshold => "threshold",
            GroupingStrategy::RateOptimized => "rate_optimized",
        }
    }
}

impl FromStr for GroupingStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(GroupingStrategy::Threshold),
            "rate_optimized" => Ok(GroupingStrategy::RateOptimized),
            _ => Err(invalid(format!("unknown grouping strategy `{s}`"))),
        }
    }
}

/// How the sensing experiment treats the target range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeMode {
    /// Plane-wave steering.
    Far,
    /// Near-field steering focused at the nominal target range.
    Focused,
    /// Two-stage angle then range search.
    Search,
}

impl RangeMode {
    pub fn name(self) -> &'static str {
        match self {
            RangeMode::Far => "far",
            RangeMode::Focused => "focused",
            RangeMode::Search => "search",
        }
    }
}

impl FromStr for RangeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "far" => Ok(RangeMode::Far),
            "focused" => Ok(RangeMode::Focused),
            "search" => Ok(RangeMode::Search),
            _ => Err(invalid(format!("unknown range mode `{s}`"))),
        }
    }
}

/// Disk in which users are dropped, described by its center in polar
/// coordinates about the array origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserDisk {
    pub center_range: f64,
    pub center_angle: f64,
    pub radius: f64,
}

/// Everything an ISAC experiment needs. Parsed from and written to a flat
/// `key = value` text with `#` comments; lists are comma separated except
/// `architectures`, which is `;` separated.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub carrier_hz: f64,
    pub architectures: Vec<Architecture>,
    pub users: usize,
    pub disk: UserDisk,
    /// Disk radii for the rate experiment.
    pub radius_sweep: Vec<f64>,
    pub target: PolarPoint,
    /// Rate experiment: per-antenna SNR of a user at `reference_range`
    /// (first entry only). Sensing experiment: per-antenna target SNR sweep.
    pub snr_db: Vec<f64>,
    pub channel_models: Vec<ChannelModel>,
    pub combiner: CombinerKind,
    pub grouping: GroupingStrategy,
    pub grouping_threshold: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub reference_range: f64,
    pub snapshots: usize,
    /// Per-antenna SNR of a user at `reference_range` during sensing.
    pub user_snr_db: f64,
    pub range_mode: RangeMode,
    /// Sensing pass mark at the top of the SNR sweep.
    pub nrmse_threshold: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 28e9,
            architectures: vec![Architecture::Compact { m: 128 }],
            users: 30,
            disk: UserDisk { center_range: 200.0, center_angle: 0.0, radius: 20.0 },
            radius_sweep: vec![20.0],
            target: PolarPoint { range: 200.0, angle: 70f64.to_radians() },
            snr_db: vec![0.0],
            channel_models: vec![ChannelModel::NearField],
            combiner: CombinerKind::Mrc,
            grouping: GroupingStrategy::Threshold,
            grouping_threshold: 0.5,
            trials: 10,
            master_seed: 0,
            reference_range: 200.0,
            snapshots: 64,
            user_snr_db: 10.0,
            range_mode: RangeMode::Focused,
            nrmse_threshold: 0.01,
        }
    }
}

fn list<T: FromStr>(v: &str, sep: char) -> std::result::Result<Vec<T>, T::Err> {
    v.split(sep).map(str::trim).filter(|s| !s.is_empty()).map(T::from_str).collect()
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        crate::wavelength(self.carrier_hz)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(invalid(m.to_string()));
        if !(self.carrier_hz > 0.0) {
            return bad("carrier_hz must be positive");
        }
        if self.architectures.is_empty() {
            return bad("architectures must not be empty");
        }
        if self.users == 0 {
            return bad("users must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.snr_db.is_empty() {
            return bad("snr_db sweep must not be empty");
        }
        if self.radius_sweep.is_empty() || self.radius_sweep.iter().any(|r| !(*r >= 0.0)) {
            return bad("radius_sweep must be non-empty with radii >= 0");
        }
        if !(self.disk.radius >= 0.0) || !(self.disk.center_range > 0.0) {
            return bad("disk radius must be >= 0 and center range > 0");
        }
        if self.channel_models.is_empty() {
            return bad("channel_models must not be empty");
        }
        if !(0.0..=1.0).contains(&self.grouping_threshold) {
            return bad("grouping_threshold must lie in [0, 1]");
        }
        if !(self.target.range > 0.0) || !(self.target.angle.abs() < std::f64::consts::FRAC_PI_2) {
            return bad("target must have positive range and |angle| < π/2");
        }
        if !(self.reference_range > 0.0) || self.snapshots == 0 {
            return bad("reference_range must be positive and snapshots >= 1");
        }
        Ok(())
    }

    /// Parses the text format on top of the defaults; later keys win.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| invalid(format!("`{key}`: cannot parse `{v}`")))
        }
        fn nums<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            list(v, ',').map_err(|_| invalid(format!("`{key}`: cannot parse `{v}`")))
        }
        match key {
            "carrier_hz" => self.carrier_hz = num(key, value)?,
            "architectures" => self.architectures = list(value, ';')?,
            "users" => self.users = num(key, value)?,
            "disk_center_range_m" => self.disk.center_range = num(key, value)?,
            "disk_center_angle_rad" => self.disk.center_angle = num(key, value)?,
            "disk_radius_m" => self.disk.radius = num(key, value)?,
            "radius_sweep_m" => self.radius_sweep = nums(key, value)?,
            "target_range_m" => self.target.range = num(key, value)?,
            "target_angle_rad" => self.target.angle = num(key, value)?,
            "snr_db" => self.snr_db = nums(key, value)?,
            "channel_models" => self.channel_models = list(value, ',')?,
            "combiner" => self.combiner = value.parse()?,
            "grouping" => self.grouping = value.parse()?,
            "grouping_threshold" => self.grouping_threshold = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "master_seed" => self.master_seed = num(key, value)?,
            "reference_range_m" => self.reference_range = num(key, value)?,
            "snapshots" => self.snapshots = num(key, value)?,
            "user_snr_db" => self.user_snr_db = num(key, value)?,
            "range_mode" => self.range_mode = value.parse()?,
            "nrmse_threshold" => self.nrmse_threshold = num(key, value)?,
            _ => return Err(invalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Every key with its resolved value; `parse(to_text())` round-trips.
    pub fn to_text(&self) -> String {
        let models: Vec<&str> = self.channel_models.iter().map(|m| m.name()).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("carrier_hz", self.carrier_hz.to_string());
        kv("architectures", join(&self.architectures, "; "));
        kv("users", self.users.to_string());
        kv("disk_center_range_m", self.disk.center_range.to_string());
        kv("disk_center_angle_rad", self.disk.center_angle.to_string());
        kv("disk_radius_m", self.disk.radius.to_string());
        kv("radius_sweep_m", join(&self.radius_sweep, ","));
        kv("target_range_m", self.target.range.to_string());
        kv("target_angle_rad", self.target.angle.to_string());
        kv("snr_db", join(&self.snr_db, ","));
        kv("channel_models", models.join(","));
        kv("combiner", self.combiner.name().to_string());
        kv("grouping", self.grouping.name().to_string());
        kv("grouping_threshold", self.grouping_threshold.to_string());
        kv("trials", self.trials.to_string());
        kv("master_seed", self.master_seed.to_string());
        kv("reference_range_m", self.reference_range.to_string());
        kv("snapshots", self.snapshots.to_string());
        kv("user_snr_db", self.user_snr_db.to_string());
        kv("range_mode", self.range_mode.name().to_string());
        kv("nrmse_threshold", self.nrmse_threshold.to_string());
        out
    }
}
