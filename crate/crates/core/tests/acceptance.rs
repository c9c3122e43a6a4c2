//! Runs every acceptance criterion at its stated tolerance and prints one
//! pass/fail line per criterion.

use wavefront_scope::acceptance::{run_all, summary_line};
use wavefront_scope::par::Exec;

#[test]
fn acceptance_criteria() {
    let report = run_all(Exec::Parallel, |c| {
        println!("{}", summary_line(c));
        for d in &c.detail {
            println!("    {d}");
        }
    });
    println!("acceptance suite finished in {:.1}s", report.seconds);
    let failed: Vec<u32> = report
        .criteria
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
