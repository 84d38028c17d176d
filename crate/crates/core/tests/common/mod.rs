#![allow(dead_code)]

use std::path::PathBuf;

use clap::Parser;
use schauder_lab::cli::{execute, Cli, Outcome};

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Runs a shipped config in-process through the CLI dispatcher.
pub fn run_config(command: &str, file: &str) -> Outcome {
    let path = config_path(file);
    let cli = Cli::try_parse_from(["schauder-lab", command, "--config", path.to_str().unwrap()]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    execute(&cli.command, &text).unwrap()
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_schauder-lab")
}
