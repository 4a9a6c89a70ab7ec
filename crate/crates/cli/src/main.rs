//! `sparse-mimo`: beam patterns, focusing maps, co-arrays, DOA Monte Carlo
//! and ISAC sweeps, written as CSV next to a replayable run manifest.

mod commands;
mod error;
mod output;
mod presets;
mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::commands::CommandSpec;
use crate::error::{io_err, CliError, Result};
use crate::output::{write_all, Outputs, RunManifest};
use crate::settings::{Origin, Settings};

#[derive(Debug, Parser)]
#[command(name = "sparse-mimo", version, about = "Sparse linear array and ISAC simulation runner")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Flat `key = value` settings file (a run manifest works too).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for every random draw.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; 0 picks one per core. Never changes the output.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,
    /// Built-in parameter set (fig3, fig4, fig5, fig6).
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Override any setting; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Far-field beam pattern over Δθ in [-1, 1].
    Pattern {
        #[command(flatten)]
        layout: LayoutArgs,
        /// Grid points.
        #[arg(long)]
        points: Option<usize>,
        /// Emit gains in dB.
        #[arg(long)]
        db: bool,
    },
    /// Near-field focusing map around a focus point.
    Focus {
        #[command(flatten)]
        layout: LayoutArgs,
        /// Focus range in meters.
        #[arg(long)]
        range: Option<f64>,
        /// Focus angle in radians.
        #[arg(long)]
        angle: Option<f64>,
        #[arg(long)]
        carrier_hz: Option<f64>,
        #[arg(long)]
        db: bool,
    },
    /// Difference (or sum) co-array: lag weights, holes, sensing DoF.
    Coarray {
        #[command(flatten)]
        layout: LayoutArgs,
        /// Compute the sum co-array instead.
        #[arg(long)]
        sum: bool,
    },
    /// Monte Carlo DOA estimation.
    Doa {
        #[command(flatten)]
        layout: LayoutArgs,
        /// music, smooth-music, coarray-music, two-stage, omp or zf-music.
        #[arg(long)]
        est: Option<String>,
        /// Number of sources.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
        #[arg(long)]
        snapshots: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Sources share one waveform.
        #[arg(long)]
        coherent: bool,
    },
    /// Multi-user ISAC sweeps: target sensing NRMSE or uplink sum rate.
    Isac {
        /// sensing or rate.
        #[arg(long)]
        experiment: Option<String>,
        /// `;`-separated architectures, e.g. "ca m=128; na min=64 mou=64".
        #[arg(long)]
        architectures: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

/// One array from flags; parameters not used by the tag are rejected by the
/// architecture parser.
#[derive(Debug, Args)]
struct LayoutArgs {
    /// ca, usa, moa, na, cpa, mra or emra.
    #[arg(long)]
    arch: Option<String>,
    /// Element count (ca, usa, mra) or elements per module/sub-array (moa, emra).
    #[arg(long)]
    m: Option<usize>,
    /// USA spacing in units of λ/2.
    #[arg(long)]
    eta: Option<f64>,
    /// Module or sub-array count (moa, emra).
    #[arg(long)]
    n: Option<usize>,
    /// Module pitch in units of λ/2 (moa).
    #[arg(long)]
    gamma: Option<f64>,
    /// Nested inner element count.
    #[arg(long)]
    min: Option<usize>,
    /// Nested outer element count.
    #[arg(long)]
    mou: Option<usize>,
    /// Co-prime first factor.
    #[arg(long)]
    mf: Option<usize>,
    /// Co-prime second factor.
    #[arg(long)]
    ms: Option<usize>,
    /// Layout text file: one position (units of λ/2) per line.
    #[arg(long, value_name = "PATH")]
    layout: Option<PathBuf>,
}

impl LayoutArgs {
    fn to_settings(&self, s: &mut Settings) {
        if let Some(tag) = &self.arch {
            let mut desc = tag.clone();
            let params: [(&str, Option<String>); 8] = [
                ("n", self.n.map(|v| v.to_string())),
                ("m", self.m.map(|v| v.to_string())),
                ("eta", self.eta.map(|v| v.to_string())),
                ("gamma", self.gamma.map(|v| v.to_string())),
                ("min", self.min.map(|v| v.to_string())),
                ("mou", self.mou.map(|v| v.to_string())),
                ("mf", self.mf.map(|v| v.to_string())),
                ("ms", self.ms.map(|v| v.to_string())),
            ];
            for (k, v) in params {
                if let Some(v) = v {
                    desc.push_str(&format!(" {k}={v}"));
                }
            }
            s.insert("architectures", &desc, Origin::Flag);
            s.insert("layout_file", "", Origin::Flag);
        }
        if let Some(p) = &self.layout {
            s.insert("layout_file", &p.display().to_string(), Origin::Flag);
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Pattern { .. } => "pattern",
            Command::Focus { .. } => "focus",
            Command::Coarray { .. } => "coarray",
            Command::Doa { .. } => "doa",
            Command::Isac { .. } => "isac",
        }
    }

    /// Subcommand flags as settings.
    fn flag_settings(&self) -> Settings {
        let mut s = Settings::default();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                s.insert(k, &v, Origin::Flag);
            }
        };
        match self {
            Command::Pattern { points, db, .. } => {
                put("points", points.map(|v| v.to_string()));
                put("db", db.then(|| "true".into()));
            }
            Command::Focus { range, angle, carrier_hz, db, .. } => {
                put("focus_range_m", range.map(|v| v.to_string()));
                put("focus_angle_rad", angle.map(|v| v.to_string()));
                put("carrier_hz", carrier_hz.map(|v| v.to_string()));
                put("db", db.then(|| "true".into()));
            }
            Command::Coarray { sum, .. } => put("kind", sum.then(|| "sum".into())),
            Command::Doa { est, k, snr_db, snapshots, trials, coherent, .. } => {
                put("estimator", est.clone());
                put("k", k.map(|v| v.to_string()));
                put("snr_db", snr_db.map(|v| v.to_string()));
                put("snapshots", snapshots.map(|v| v.to_string()));
                put("trials", trials.map(|v| v.to_string()));
                put("coherent", coherent.then(|| "true".into()));
            }
            Command::Isac { experiment, architectures, trials } => {
                put("experiment", experiment.clone());
                put("architectures", architectures.clone());
                put("trials", trials.map(|v| v.to_string()));
            }
        }
        if let Command::Pattern { layout, .. }
        | Command::Focus { layout, .. }
        | Command::Coarray { layout, .. }
        | Command::Doa { layout, .. } = self
        {
            layout.to_settings(&mut s);
        }
        s
    }
}

/// Keys a manifest carries besides the settings themselves.
const MANIFEST_KEYS: [&str; 3] = ["subcommand", "tool_version", "outputs"];

/// Defaults < preset < config file < flags.
fn resolve(cli: &Cli, spec: &CommandSpec) -> Result<Settings> {
    let mut resolved = Settings::default();
    for (k, v) in (spec.defaults)() {
        resolved.insert(&k, &v, Origin::Default);
    }

    let mut file = match &cli.global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            let shown = path.display().to_string();
            Settings::parse(&text, |line| Origin::File { path: shown.clone(), line })?
        }
        None => Settings::default(),
    };
    if let Some(sub) = file.raw("subcommand") {
        if sub != spec.name {
            return Err(CliError::Config {
                origin: file.origin("subcommand"),
                message: format!("this file was written by `{sub}`, not `{}`", spec.name),
            });
        }
    }
    for k in MANIFEST_KEYS {
        file.remove(k);
    }
    let file_preset = file.remove("preset");

    let preset = cli.global.preset.clone().or(file_preset);
    if let Some(name) = &preset {
        let text = presets::lookup(spec.name, name).ok_or_else(|| {
            CliError::Invalid(format!(
                "unknown preset `{name}` for `{}` (available: {})",
                spec.name,
                presets::names(spec.name).join(", ")
            ))
        })?;
        resolved.merge(Settings::parse(text, |_| Origin::Preset(name.clone()))?);
        resolved.insert("preset", name, Origin::Preset(name.clone()));
    }
    resolved.merge(file);

    let mut flags = cli.command.flag_settings();
    if let Some(seed) = cli.global.seed {
        flags.insert(spec.seed_key, &seed.to_string(), Origin::Flag);
    }
    for kv in &cli.global.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        flags.insert(k.trim(), v.trim(), Origin::Flag);
    }
    resolved.merge(flags);

    let mut allowed: Vec<String> = (spec.defaults)().into_iter().map(|(k, _)| k).collect();
    allowed.push("preset".into());
    let allowed: Vec<&str> = allowed.iter().map(String::as_str).collect();
    resolved.check_keys(spec.name, &allowed)?;
    Ok(resolved)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let spec = commands::spec(cli.command.name()).expect("every subcommand has a spec");
    let resolved = resolve(cli, &spec)?;
    let master_seed: u64 = resolved.get(spec.seed_key)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build()?;
    let mut outputs = Outputs::default();
    pool.install(|| (spec.run)(&resolved, &mut outputs))?;

    for line in &outputs.report {
        println!("{line}");
    }
    let manifest = RunManifest {
        subcommand: spec.name,
        resolved: &resolved,
        master_seed,
        outputs: outputs.files.iter().map(|(n, _)| n.clone()).collect(),
        notes: &outputs.notes,
    };
    write_all(Path::new(&cli.global.out), &outputs, &manifest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let sub = cmd.find_subcommand_mut(cli.command.name()).expect("known subcommand");
            sub.error(clap::error::ErrorKind::MissingRequiredArgument, msg).exit()
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
