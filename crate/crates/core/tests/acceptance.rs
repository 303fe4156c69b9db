use std::process::ExitCode;
use std::time::Instant;

use penalab_core::harness::suite::{run_criterion, SuiteConfig, CRITERIA};

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let start = Instant::now();
        let r = run_criterion(id, &cfg);
        let tag = if r.pass() { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id:>2}: {} ({} checks, {:.1}s)", r.title, r.verdicts.len(), start.elapsed().as_secs_f64());
        if let Some(e) = &r.error {
            println!("        error: {e}");
        }
        for v in r.verdicts.iter().filter(|v| !v.pass) {
            println!("        failed: {} observed {:.6e} target {:.6e} tolerance {:.3e} {}", v.name, v.observed, v.target, v.tolerance, v.note);
        }
        if !r.pass() {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
