//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 5 and 8 cannot pass as stated (see README, "Known failures"); they
//! run unchanged and print FAIL. Any other failure fails the target.
//! `GROKKLAB_ACCEPT_ONLY=1,4` restricts the run.

use grokklab_cli::selftest::{criteria, run_one};

const KNOWN_UNATTAINABLE: &[u32] = &[5, 8];

fn main() {
    let only: Option<Vec<u32>> = std::env::var("GROKKLAB_ACCEPT_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut unexpected = Vec::new();
    let mut known = Vec::new();
    for c in criteria() {
        if only.as_ref().is_some_and(|o| !o.contains(&c.id)) {
            continue;
        }
        let o = run_one(&c);
        println!("{}", o.line());
        if !o.pass {
            if KNOWN_UNATTAINABLE.contains(&o.id) {
                known.push(o.id);
            } else {
                unexpected.push(o.id);
            }
        }
    }
    println!("SKIP 11 figure rendering: the plotting scripts are not part of this workspace");
    println!("acceptance: known-unattainable failures {known:?}, unexpected failures {unexpected:?}");
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
