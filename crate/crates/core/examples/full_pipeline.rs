//! Run the whole verify-all pipeline from a config and list what it wrote.
//!
//! ```sh
//! cargo run --release --example full_pipeline -- configs/exponential.json target/pipeline
//! ```

use std::path::PathBuf;

use reindiv::cli::execute;
use reindiv::config::{Mode, RunConfig};

fn main() -> reindiv::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/exponential.json")
    });
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("reindiv-pipeline"));

    let cfg = RunConfig::load(&config)?;
    let summary = execute(Mode::VerifyAll, &cfg, &out)?;
    for s in &summary.report.suites {
        println!("{:<40} {:>10.2e} / {:<10.2e} {}", s.name, s.worst_defect, s.tolerance, if s.passed { "ok" } else { "FAILED" });
    }
    println!("wrote {} files to {}", summary.files.len(), summary.directory.display());
    for f in &summary.files {
        println!("  {f}");
    }
    std::process::exit(summary.exit_code());
}
