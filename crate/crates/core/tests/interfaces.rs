//! File formats: configs, traces and network checkpoints.

use cellbalance::agent::{checkpoint, QNetwork};
use cellbalance::seed::rng_for;
use cellbalance::simcore::{generate_trace, load_trace, SimConfig, Trace};
use cellbalance::Error;

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.conf");
    let cfg = SimConfig {
        num_ue: 37,
        rb_per_bs: 75,
        commute_speed_m_per_epoch: Some(12.5),
        ..SimConfig::desk_scale()
    };
    std::fs::write(&path, cfg.to_config_text()).unwrap();
    assert_eq!(SimConfig::from_file(&path).unwrap(), cfg);
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    assert!(matches!(SimConfig::parse("num_uez = 3\n"), Err(Error::Config(_))));
    assert!(SimConfig::parse("num_ue = -3\n").is_err());
    assert!(SimConfig::parse("rb_per_bs = 0\n").is_err());
    let partial = SimConfig::parse("# comment\nnum_ue = 12\n\nhorizon = 30\n").unwrap();
    assert_eq!(partial.num_ue, 12);
    assert_eq!(partial.horizon, 30);
}

#[test]
fn missing_config_file_names_the_path() {
    let err = SimConfig::from_file(std::path::Path::new("/nonexistent/env.conf")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/env.conf"));
}

#[test]
fn trace_file_round_trip_is_byte_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let cfg = SimConfig {
        num_ue: 9,
        ..SimConfig::desk_scale()
    };
    let trace = generate_trace(&cfg, 77).unwrap();
    trace.save(&path).unwrap();
    let back = load_trace(&path).unwrap();
    assert_eq!(back, trace);
    assert_eq!(back.content_hash(), trace.content_hash());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), trace.to_csv());
}

#[test]
fn trace_gaps_are_reported() {
    let cfg = SimConfig {
        num_ue: 2,
        horizon: 5,
        ..SimConfig::desk_scale()
    };
    let csv = generate_trace(&cfg, 1).unwrap().to_csv();
    let holed: String = csv
        .lines()
        .filter(|l| !l.starts_with("1,3,"))
        .map(|l| format!("{l}\n"))
        .collect();
    let err = Trace::parse_csv(&holed).unwrap_err();
    assert!(err.to_string().contains("missing epoch 3"), "{err}");
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ue3.qnet");
    let mut rng = rng_for(5, 0, 0);
    let net = QNetwork::new(&[9, 64, 64, 32, 4], &mut rng).unwrap();
    checkpoint::save(&net, &path).unwrap();
    let back = checkpoint::load(&path).unwrap();
    assert_eq!(back.parameters(), net.parameters());
    let s = [0.1, -0.2, 0.3, 0.0, 1.0, 0.5, 0.25, 0.125, -1.0];
    assert_eq!(back.forward(&s).unwrap(), net.forward(&s).unwrap());
}
