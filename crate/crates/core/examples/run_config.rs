//! Drives the CLI dispatcher in-process on a shipped config.

use clap::Parser;
use schauder_lab::cli::{execute, report, Cli};

fn main() -> schauder_lab::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/case4_design.json");
    let cli = Cli::parse_from(["schauder-lab", "case4-design", "--config", path]);
    let text = std::fs::read_to_string(path)?;
    let outcome = execute(&cli.command, &text)?;
    let r = report(&cli.command, &text, &outcome);
    println!("{} pass={} hash={}", r["command"], r["pass"], r["input_hash"]);
    Ok(())
}
