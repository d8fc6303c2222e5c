//! One line per criterion, details indented beneath. Exits nonzero on any failure.
//!
//! `ACCEPTANCE_ONLY=3,10` restricts the run; `ACCEPTANCE_RESOLUTION` overrides the mesh size.

use tamed_core::acceptance::{run_criterion, AcceptanceOptions};

fn main() {
    let mut opts = AcceptanceOptions::default();
    if let Some(res) = std::env::var("ACCEPTANCE_RESOLUTION").ok().and_then(|s| s.parse().ok()) {
        opts.resolution = res;
    }
    let ids: Vec<u8> = match std::env::var("ACCEPTANCE_ONLY") {
        Ok(s) => s.split(',').filter_map(|x| x.trim().parse().ok()).collect(),
        Err(_) => (1..=12).collect(),
    };
    let mut failed = 0;
    for id in ids {
        let out = run_criterion(id, &opts);
        println!("{}", out.summary_line());
        for line in out.detail_lines() {
            println!("{line}");
        }
        failed += usize::from(!out.passed);
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
