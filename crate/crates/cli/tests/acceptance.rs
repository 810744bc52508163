//! End-to-end acceptance suite. Pass criterion ids as arguments to run a subset.

use std::process::ExitCode;

use qcrit_cli::acceptance;

fn main() -> ExitCode {
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for report in acceptance::run(&ids) {
        println!("{}", report.headline());
        for line in report.detail_lines() {
            println!("{line}");
        }
        if !report.passed() {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
