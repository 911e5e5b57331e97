use std::collections::BTreeMap;

use chrono::NaiveDate;
use proptest::prelude::*;
use tsbench::corpus::{
    enumerate_windows, rectify_timestamps, DatasetSpec, FrequencyCode, FrequencySpec, Horizon, RawRow, RawSeries,
};
use tsbench::evaluation::{aggregate_geomean, mean_rank, NormalizedScores};
use tsbench::features::{features_of, group_separation};
use tsbench::screening::{univariate_quality_check, CheckName, ScreeningConfig};
use tsbench::corpus::Variate;

const CHECK_ORDER: [CheckName; 6] = [
    CheckName::DataType,
    CheckName::Length,
    CheckName::MissingRate,
    CheckName::SignalExistence,
    CheckName::WhiteNoise,
    CheckName::ExtremeOutliers,
];

fn freq_strategy() -> impl Strategy<Value = FrequencyCode> {
    prop::sample::select(vec![
        FrequencyCode::Min15,
        FrequencyCode::Hourly,
        FrequencyCode::Daily,
        FrequencyCode::Weekly,
        FrequencyCode::Monthly,
        FrequencyCode::Quarterly,
    ])
}

fn signal(len: usize, period: usize, seed: u64, slope: f64, amp: f64, noise: f64) -> Vec<f64> {
    // small deterministic LCG noise keeps the strategy cheap
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|t| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            let tf = t as f64;
            slope * tf + amp * (std::f64::consts::TAU * tf / period as f64).sin() + noise * u
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rectification_is_idempotent_and_grid_exact(
        code in freq_strategy(),
        len in 3usize..80,
        drop_every in 2usize..9,
        jitter in 0i64..2,
    ) {
        let freq = FrequencySpec::new(code);
        let start = NaiveDate::from_ymd_opt(2019, 1, 31).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let exact = tsbench::corpus::Grid::anchored_at(freq, start).points(len);
        let rows: Vec<RawRow> = exact
            .iter()
            .enumerate()
            .filter(|(i, _)| i % drop_every != 1)
            .map(|(i, t)| RawRow {
                timestamp: *t + chrono::Duration::seconds(jitter * (i as i64 % 3)),
                values: vec![Some(i as f64)],
            })
            .collect();
        let raw = RawSeries { series_id: "s".into(), variate_names: vec!["x".into()], numeric: vec![true], rows };
        let once = rectify_timestamps(&raw, freq).unwrap();
        let twice = rectify_timestamps(&once.to_raw(), freq).unwrap();
        let observed = |r: &tsbench::corpus::SeriesRecord| -> Vec<Option<f64>> { (0..r.len()).map(|i| r.variates[0].get(i)).collect() };
        prop_assert_eq!(observed(&once), observed(&twice));
        prop_assert_eq!(once.start, twice.start);
        let grid = once.grid();
        for (i, t) in once.timestamps().iter().enumerate() {
            prop_assert_eq!(*t, grid.point(i as i64));
        }
    }

    #[test]
    fn windows_stay_inside_the_test_span(
        series in 1usize..4,
        test_length in 1usize..300,
        h_frac in 0.01f64..1.0,
        extra in 1usize..100,
    ) {
        let h = ((test_length as f64 * h_frac).ceil() as usize).clamp(1, test_length);
        let freq = FrequencySpec::new(FrequencyCode::Daily);
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let len = test_length + extra;
        let ds = DatasetSpec {
            dataset_id: "d".into(),
            domain: "x".into(),
            freq,
            series: (0..series)
                .map(|i| tsbench::corpus::SeriesRecord {
                    series_id: format!("s{i}"),
                    start,
                    freq,
                    variates: vec![Variate::from_values("x", vec![0.0; len])],
                    collisions: Vec::new(),
                })
                .collect(),
            test_length,
            horizons: vec![Horizon { label: "h".into(), length: h }],
        };
        let windows = enumerate_windows(&ds, h).unwrap();
        let span: usize = windows.iter().map(|w| w.length).sum();
        prop_assert!(span <= series * test_length);
        let mut by_series: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
        for w in &windows {
            by_series.entry(w.series_id.as_str()).or_default().push((w.start_offset, w.start_offset + w.length));
        }
        for spans in by_series.values() {
            for pair in spans.windows(2) {
                prop_assert!(pair[0].1 <= pair[1].0);
            }
            prop_assert!(spans.last().unwrap().1 <= test_length);
        }
    }

    #[test]
    fn quality_gate_is_monotone(
        len in 10usize..1500,
        kind in 0u8..4,
        missing_every in 0usize..6,
        seed in any::<u64>(),
    ) {
        let values = match kind {
            0 => vec![2.5; len],
            1 => signal(len, 24, seed, 0.0, 0.0, 1.0),
            2 => signal(len, 24, seed, 0.01, 5.0, 0.5),
            _ => signal(len, 7, seed, -0.2, 1.0, 3.0),
        };
        let opts: Vec<Option<f64>> = values
            .iter()
            .enumerate()
            .map(|(i, v)| (missing_every == 0 || i % (missing_every + 1) != 0).then_some(*v))
            .collect();
        let variate = Variate::from_options("x", &opts);
        let cfg = ScreeningConfig::default();
        let q = univariate_quality_check(&variate, &cfg, 1000, 24);
        prop_assert_eq!(q.predictable, q.failed.is_empty());
        let positions: Vec<usize> = q.failed.iter().map(|c| CHECK_ORDER.iter().position(|o| o == c).unwrap()).collect();
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]), "{:?}", q.failed);
        if let Some(cleaned) = &q.cleaned {
            prop_assert_eq!(cleaned.len(), len);
        }
    }

    #[test]
    fn features_in_range_and_scale_invariant(
        len in 30usize..400,
        period in prop::sample::select(vec![1usize, 4, 7, 12, 24]),
        slope in -1.0f64..1.0,
        amp in 0.0f64..5.0,
        noise in 0.05f64..3.0,
        seed in any::<u64>(),
        c in 0.01f64..100.0,
    ) {
        let x = signal(len, period.max(2), seed, slope, amp, noise);
        let a = features_of(&x, period).unwrap();
        prop_assert!(a.in_range(), "{:?}", a);
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let b = features_of(&scaled, period).unwrap();
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-9;
        prop_assert!(close(a.trend_strength, b.trend_strength));
        prop_assert!(close(a.seasonality_strength, b.seasonality_strength));
        prop_assert!(close(a.seasonality_correlation, b.seasonality_correlation));
        prop_assert!(close(a.residual_acf1, b.residual_acf1));
        prop_assert!(close(a.complexity, b.complexity));
        prop_assert_eq!(a.stationarity, b.stationarity);
        prop_assert!((b.trend_linearity - c * a.trend_linearity).abs() <= 1e-9 * (c * a.trend_linearity).abs().max(1.0));
    }

    #[test]
    fn fisher_and_d_agree_in_sign(
        a in prop::collection::vec(-10f64..10.0, 2..40),
        b in prop::collection::vec(-10f64..10.0, 2..40),
    ) {
        let s = group_separation(&a, &b);
        if let (Some(f), Some(d)) = (s.fisher, s.cohens_d) {
            let diff = s.mean_high - s.mean_low;
            prop_assert!(f >= 0.0);
            prop_assert_eq!(d > 0.0, diff > 0.0);
            prop_assert_eq!(d < 0.0, diff < 0.0);
            prop_assert_eq!(f == 0.0, d == 0.0);
        }
    }

    #[test]
    fn geomean_is_log_linear(
        values in prop::collection::vec(1e-3f64..1e3, 1..30),
        k in 1e-2f64..1e2,
    ) {
        let base = aggregate_geomean(&values).value.unwrap();
        let scaled: Vec<f64> = values.iter().map(|v| v * k).collect();
        let got = aggregate_geomean(&scaled).value.unwrap();
        prop_assert!((got - k * base).abs() <= 1e-10 * k * base);
    }

    #[test]
    fn ranks_follow_model_relabeling(
        table in prop::collection::vec(prop::collection::vec(0u8..5, 4), 1..12),
        perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let names = ["a", "b", "c", "d"];
        let build = |label: &dyn Fn(usize) -> String| {
            let mut s = NormalizedScores { models: (0..4).map(label).collect(), ..Default::default() };
            s.models.sort();
            for (u, row) in table.iter().enumerate() {
                let per: BTreeMap<String, f64> = row.iter().enumerate().map(|(m, v)| (label(m), f64::from(*v))).collect();
                s.values.insert(format!("u{u}"), per);
            }
            s
        };
        let original = mean_rank(&build(&|m| names[m].to_string()));
        let relabeled = mean_rank(&build(&|m| names[perm[m]].to_string()));
        for m in 0..4 {
            prop_assert_eq!(original[names[m]], relabeled[names[perm[m]]]);
        }
    }
}
