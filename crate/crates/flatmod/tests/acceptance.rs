//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines are printed whether or not output capture is on.

use flatmod::suite::{run_suite, SuiteConfig};
use std::process::ExitCode;

fn main() -> ExitCode {
    let report = match run_suite(&SuiteConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance suite could not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let passed = report.criteria.iter().filter(|c| c.passed).count();
    println!("acceptance: {passed}/{} criteria passed", report.criteria.len());
    if report.all_passed() && report.criteria.len() == 9 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
