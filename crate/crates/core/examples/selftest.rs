// Runs the quick self-test suites with a fixed seed.

use slocc::harness::{run_suite, Suite};

pub fn run_example() -> slocc::Result<()> {
    for suite in [Suite::Golden, Suite::ClosedForms, Suite::Beta] {
        let report = run_suite(suite, 0, None);
        println!("{}", report.summary());
        assert!(report.ok());
    }
    // a short orbit run, with per-trial records
    let report = run_suite(Suite::Orbit, 1, Some(5));
    print!("{}", report.json_lines());
    assert!(report.ok());
    Ok(())
}

fn main() -> slocc::Result<()> {
    run_example()
}
