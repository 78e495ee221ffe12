//! Acceptance suite: one pass/fail line per criterion, every tolerance
//! pinned in the checks module. Run with
//! `cargo test -p relvac --test acceptance -- --nocapture` to see the table.

use relvac::checks;

#[test]
fn acceptance_criteria() {
    let t0 = std::time::Instant::now();
    let results = checks::full_suite();
    println!();
    for (i, r) in results.iter().enumerate() {
        println!("criterion {:>2}: {}", i + 1, r.line());
    }
    println!("total wall time: {:.1}s", t0.elapsed().as_secs_f64());
    let failures: Vec<String> =
        results.iter().filter(|r| !r.passed).map(|r| r.line()).collect();
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
