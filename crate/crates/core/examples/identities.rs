//! Run the identity suite on a small phase-space mesh and write its outputs.

use apdg::study::{emit_outputs, run_identity_suite, StudyConfig, StudyKind};

fn main() -> apdg::Result<()> {
    let cfg = StudyConfig::new(StudyKind::Identities);
    cfg.validate()?;
    let res = run_identity_suite(&cfg)?;
    for c in &res.criteria {
        println!("[{}] {}", if c.passed { "ok" } else { "FAIL" }, c.describe());
    }
    let dir = std::env::temp_dir().join("apdg_identities");
    let files = emit_outputs(&res, &dir)?;
    println!("{} rows in {}", res.rows.len(), files.csv.display());
    Ok(())
}
