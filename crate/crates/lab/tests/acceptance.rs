//! Runs every acceptance criterion and prints one line each. Exits
//! nonzero if any criterion fails.

use std::process::ExitCode;

use wavegauge_lab::acceptance;

fn main() -> ExitCode {
    let mut failed = 0;
    for c in acceptance::run_all() {
        println!("{}", c.line());
        failed += usize::from(!c.pass);
    }
    println!("{failed} failing criteria");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
