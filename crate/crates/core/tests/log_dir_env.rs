mod common;

use cego::harness::{run_experiment, PolicyParams, LOG_DIR_ENV};

#[test]
fn environment_overrides_output_dir() {
    let configured = tempfile::tempdir().unwrap();
    let actual = tempfile::tempdir().unwrap();
    let config =
        common::artificial_config(configured.path(), vec![PolicyParams::Random], vec![1], 3);
    std::env::set_var(LOG_DIR_ENV, actual.path());
    let out = run_experiment(&config, Some(1)).unwrap();
    std::env::remove_var(LOG_DIR_ENV);
    out[0].result.as_ref().unwrap();
    assert!(out[0].log.starts_with(actual.path()));
    assert!(actual.path().join("random/seed-1.jsonl").exists());
    assert_eq!(std::fs::read_dir(configured.path()).unwrap().count(), 0);
}
