// Shared between the integration test targets; not every target uses every
// helper.
#![allow(dead_code)]

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::time::{Duration, Instant};

use tallypda::families::gen_random;
use tallypda::Dpda;

/// The shared test corpus: 500 reproducible machines with up to 4 states and
/// 4 stack symbols, cycling through every dimension pair.
pub fn corpus() -> Vec<Dpda> {
    (0..500u64)
        .map(|i| {
            let n = (i % 4) as usize + 1;
            let m = ((i / 4) % 4) as usize + 1;
            gen_random(n, m, i)
        })
        .collect()
}

/// Runs one acceptance criterion, printing exactly one pass/fail line and
/// enforcing the stated wall-clock bound.
pub fn criterion<F>(name: &str, limit: Duration, body: F)
where
    F: FnOnce() + UnwindSafe,
{
    let start = Instant::now();
    let outcome = catch_unwind(body);
    let elapsed = start.elapsed();
    match outcome {
        Ok(()) if elapsed <= limit => {
            println!("acceptance: {name}: pass ({elapsed:.2?})");
        }
        Ok(()) => {
            println!(
                "acceptance: {name}: fail (took {elapsed:.2?}, limit {limit:.2?})"
            );
            panic!("{name} exceeded its time limit");
        }
        Err(cause) => {
            println!("acceptance: {name}: fail ({elapsed:.2?})");
            resume_unwind(cause);
        }
    }
}
