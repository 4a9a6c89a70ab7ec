//! Figure-reproduction presets. Values the figures leave open (grids, powers,
//! trial counts) are fixed here and echoed into every manifest.

/// Preset names known for a subcommand.
pub fn names(command: &str) -> &'static [&'static str] {
    match command {
        "pattern" => &["fig3"],
        "coarray" => &["fig3"],
        "focus" => &["fig4"],
        "isac" => &["fig5", "fig6"],
        _ => &[],
    }
}

pub fn lookup(command: &str, name: &str) -> Option<&'static str> {
    Some(match (command, name) {
        ("pattern", "fig3") => FIG3_PATTERN,
        ("coarray", "fig3") => FIG3_COARRAY,
        ("focus", "fig4") => FIG4,
        ("isac", "fig5") => FIG5,
        ("isac", "fig6") => FIG6,
        _ => return None,
    })
}

const FIG3_PATTERN: &str = "
architectures = ca m=16; usa m=16 eta=4; mra m=16; moa n=4 m=4 gamma=8; na min=8 mou=8; cpa mf=8 ms=9
points = 4001
";

const FIG3_COARRAY: &str = "
architectures = ca m=16; usa m=16 eta=4; mra m=16; moa n=4 m=4 gamma=8; na min=8 mou=8; cpa mf=8 ms=9
";

const FIG4: &str = "
architectures = ca m=128; usa m=128 eta=4.1; emra n=8 m=16; moa n=8 m=16 gamma=64; na min=64 mou=64; cpa mf=64 ms=65
carrier_hz = 28e9
focus_range_m = 200
focus_angle_rad = 0
range_min_m = 20
range_max_m = 20000
range_points_below = 60
range_points_above = 120
angle_halfwidth_rad = 0.1
angle_points = 201
";

// 30 users in an 80 m disk around (200 m, 0°); target at (200 m, 70°).
// Narrower disks leave the 30 compact-array user channels rank deficient.
const FIG5: &str = "
experiment = sensing
architectures = ca m=128; usa m=128 eta=4.1; na min=64 mou=64; cpa mf=64 ms=65
users = 30
disk_center_range_m = 200
disk_center_angle_rad = 0
disk_radius_m = 80
target_range_m = 200
target_angle_rad = 1.2217304763960306
snr_db = -20,-10,0,10
snapshots = 64
user_snr_db = 0
reference_range_m = 200
range_mode = focused
nrmse_threshold = 0.1
trials = 100
master_seed = 7
";

const FIG6: &str = "
experiment = rate
architectures = ca m=128; usa m=128 eta=4.1; na min=64 mou=64; cpa mf=64 ms=65
users = 30
disk_center_range_m = 200
disk_center_angle_rad = 0
radius_sweep_m = 5,10,20,50,100,150
snr_db = -25
reference_range_m = 200
channel_models = near_field,far_field
combiner = mrc
grouping = rate_optimized
grouping_threshold = 0.5
trials = 50
master_seed = 6
";
