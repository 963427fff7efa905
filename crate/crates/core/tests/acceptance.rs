//! Acceptance run: one pass/fail line per criterion, followed by its checks.
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the table.

use spinor_minimal::verify::{run_suite, VerifyOptions, SUITES};
use std::time::Instant;

const TITLES: [&str; 11] = [
    "pfaffian suite",
    "elliptic suite",
    "omega oracle equivalence",
    "sphere with four ends",
    "sphere with six ends",
    "projective plane variety",
    "Arf invariants",
    "torus with four ends",
    "Klein bottle with four ends",
    "surface geometry",
    "non-existence evidence",
];

#[test]
fn acceptance() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    let mut out = String::new();
    for (k, (suite, title)) in SUITES.iter().zip(TITLES).enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run_suite(suite, &opts) {
            Ok(rep) => (rep.ok, rep.to_text()),
            Err(e) => (false, format!("{suite}\n  error: {e}\n")),
        };
        let secs = start.elapsed().as_secs_f64();
        out.push_str(&format!("[{}] {:>2}. {title} ({suite}, {secs:.1} s)\n", if ok { "PASS" } else { "FAIL" }, k + 1));
        for line in detail.lines().skip(1) {
            out.push_str(&format!("        {}\n", line.trim_start()));
        }
        if !ok {
            failed.push(k + 1);
        }
    }
    println!("{out}");
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
