//! Runs every built-in corpus case and prints its result.

use jet_closure::cli::{corpus_cases, run_case};

fn main() {
    let cases = corpus_cases();
    let mut passed = 0;
    for case in &cases {
        let r = run_case(case);
        passed += usize::from(r.pass);
        println!("{} {:<28} {}", if r.pass { "PASS" } else { "FAIL" }, r.id, case.summary);
    }
    println!("{passed}/{} cases pass", cases.len());
}
