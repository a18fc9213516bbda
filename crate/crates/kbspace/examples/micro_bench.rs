//! Lookup and distance latency on synthetic KBs of growing size, against
//! full-scan baselines.
//!
//! ```sh
//! cargo run --release --example micro_bench -- 1000000
//! ```

use kbspace::eval::{micro_bench, MicroBenchSpec};
use kbspace::synth::{generate, SyntheticSpec};

pub fn bench(sizes: &[usize]) -> anyhow::Result<()> {
    println!("{:>9}  {:<24} {:>8} {:>12} {:>12}", "facts", "operation", "samples", "median ns", "mean ns");
    for &n in sizes {
        let kb = generate(&SyntheticSpec::with_facts(n, 1))?;
        let spec = MicroBenchSpec {
            lookups: 200_000,
            pairs: 200_000,
            naive_samples: 10,
            seed: 2,
        };
        for row in micro_bench(&kb, &spec)?.rows {
            println!(
                "{n:>9}  {:<24} {:>8} {:>12.0} {:>12.0}",
                row.operation, row.samples, row.median_ns, row.mean_ns
            );
        }
    }
    Ok(())
}

pub fn run() -> anyhow::Result<()> {
    bench(&[1_000, 10_000])
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    let sizes: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    if sizes.is_empty() {
        run()
    } else {
        bench(&sizes)
    }
}
