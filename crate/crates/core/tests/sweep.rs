use holomimo::experiments::{
    apply_axis, csv_string, evaluate, parse_csv, point_seed, run_sweep, Axis, Series,
    SpectrumCache, SweepOptions, SweepSpec,
};
use holomimo::scenario::ScenarioConfig;

fn spec() -> SweepSpec {
    let series = ["UMa", "RMa"]
        .iter()
        .map(|name| Series {
            label: name.to_string(),
            config: ScenarioConfig::from_preset(name, 2.0, 0.25).unwrap(),
        })
        .collect();
    SweepSpec {
        title: "test".into(),
        axis: Axis::SnrDb,
        values: vec![0.0, 10.0, 20.0],
        series,
        trials: 20,
        master_seed: 77,
    }
}

#[test]
fn points_do_not_depend_on_evaluation_order() {
    let s = spec();
    let result = run_sweep(&s, SweepOptions::default()).unwrap();
    let cache = SpectrumCache::new();
    for (si, series) in s.series.iter().enumerate().rev() {
        for (vi, &v) in s.values.iter().enumerate().rev() {
            let cfg = apply_axis(&series.config, s.axis, v).unwrap();
            let p = evaluate(&cfg, s.trials, point_seed(s.master_seed, si, vi), &cache).unwrap();
            let row = result.row(&series.label, v).unwrap();
            assert_eq!(row.capacity_bits.to_bits(), p.estimate.mean_bits.to_bits());
            assert_eq!(row.std_error.to_bits(), p.estimate.std_error.to_bits());
        }
    }
}

#[test]
fn rows_stay_below_bound_and_round_trip_through_csv() {
    let result = run_sweep(&spec(), SweepOptions::default()).unwrap();
    for (row, ub) in result.rows.iter().zip(&result.upper_bounds) {
        assert!(row.capacity_bits <= *ub, "{row:?} > {ub}");
        assert_eq!(row.wall_time_s, 0.0);
    }
    let text = csv_string(&result.rows).unwrap();
    assert_eq!(parse_csv(&text).unwrap(), result.rows);
    let again = run_sweep(&spec(), SweepOptions::default()).unwrap();
    assert_eq!(csv_string(&again.rows).unwrap(), text);
}
