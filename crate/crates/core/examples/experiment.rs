//! Run an experiment from a config file, as the `lqdim` binary does.
//!
//!     cargo run --release --example experiment -- configs/repeated.json

use std::path::PathBuf;

use lqdim::experiments::{run, ExperimentConfig};

fn main() -> lqdim::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/improvement.json"));
    let cfg = ExperimentConfig::load(&path)?;
    let kind = cfg.experiment.ok_or_else(|| lqdim::Error::InvalidConfig("config names no experiment".into()))?;
    let report = run(kind, &cfg)?;

    println!("{} ({:?})", kind.tag(), report.status);
    for p in &report.preconditions {
        println!("  {:<24} {:<5} {}", p.name, p.met, p.detail);
    }
    for row in report.rows.iter().take(12) {
        println!("  n={} m={:>2} exponent {:.4} improvement {:?}", row.n, row.m, row.exponent, row.improvement);
    }
    let out = cfg.out.clone().unwrap_or_else(|| std::env::temp_dir().join("lqdim-example"));
    for p in report.write_to(&out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
