//! Multi-user uplink ISAC scenarios: user drops, channels, combining,
//! grouping, sum rate and target-sensing sweeps.

mod config;
mod experiment;
mod link;

pub use config::{ChannelModel, CombinerKind, GroupingStrategy, RangeMode, ScenarioConfig, UserDisk};
pub use experiment::{
    rows_to_csv, run_rate_experiment, run_sensing_experiment, sensing_trial, ResultRow, SensingOutcome,
    RESULT_HEADER,
};
pub use link::{
    combiner, correlation_matrix, drop_users, free_space_gain, group_users, rate_optimized_groups, sinr_per_user,
    sum_rate, user_channels, GroupAssignment, THRESHOLD_LADDER,
};
