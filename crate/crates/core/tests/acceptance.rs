//! Runs every acceptance criterion at full size and prints one line each.
//! Tolerances live in `melonic_core::checks::tol`.

use melonic_core::checks::{run, Level, DEFAULT_SEED};
use std::io::Write;

#[test]
fn acceptance_criteria() {
    let ids: Vec<u8> = (1..=10).collect();
    let outcomes = run(&ids, Level::Full, DEFAULT_SEED);
    // written to the handle directly so the table shows without --nocapture
    let mut out = std::io::stdout().lock();
    for o in &outcomes {
        writeln!(out, "{o}").unwrap();
    }
    drop(out);
    assert_eq!(outcomes.len(), 10);
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
