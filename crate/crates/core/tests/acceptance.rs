use restriction_lab::acceptance::{run_suite, AcceptanceConfig};

fn main() {
    let cfg = AcceptanceConfig::default();
    let (report, timings) = run_suite(&cfg);
    println!("acceptance seed {}", report.seed);
    for c in &report.criteria {
        let secs = timings.seconds.get(&c.id).copied().unwrap_or(0.0);
        println!("{}  ({secs:.1}s)", c.line());
    }
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    println!("{} of {} criteria passed", report.criteria.len() - failed, report.criteria.len());
    if !report.passed {
        std::process::exit(1);
    }
}
