//! Forecast ingestion, rolling-window scoring, Seasonal-Naive normalization
//! and leaderboards.

mod aggregate;
mod archive;
mod leaderboard;
mod scoring;

pub use aggregate::{
    aggregate_geomean, mean_rank, normalize, task_id, unit_means, variate_id, ExcludedUnit, GeoMean, MeanRank, Metric,
    NormalizedScores, UnitKind, UnitMean, CLAMP_MAX, CLAMP_MIN,
};
pub use archive::{
    coverage, expected_keys, ingest_forecasts, write_forecasts_csv, CoverageReport, ForecastArchive, ForecastKey,
    IngestOutcome, RejectedRow, SEASONAL_NAIVE,
};
pub use leaderboard::{
    dataset_leaderboard, leaderboard_from, pattern_leaderboard, retrieve_by_pattern, task_leaderboard,
    variate_leaderboard, EntryDiagnostics, Leaderboard, LeaderboardEntry, Level,
};
pub use scoring::{score_all, score_archive, seasonal_naive_archive, seasonal_naive_for, window_data, ScoreRow, ScoreTable, WindowData};
