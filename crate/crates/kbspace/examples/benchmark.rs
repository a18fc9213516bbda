//! Answer presence, space size and runtime over the fixture questions,
//! with and without signal ablations.

use kbspace::eval::run_benchmark;
use kbspace::{fixture, QueryConfig, SignalMask};

pub fn run() -> anyhow::Result<()> {
    let engine = fixture::engine()?;
    let questions = fixture::questions()?;
    let variants = [
        ("all signals", SignalMask::ALL),
        (
            "w/o match + rel",
            SignalMask {
                rel: false,
                term_match: false,
                ..SignalMask::ALL
            },
        ),
        (
            "w/o coh + conn",
            SignalMask {
                coh: false,
                conn: false,
                ..SignalMask::ALL
            },
        ),
    ];
    for (name, ablation) in variants {
        let cfg = QueryConfig {
            ablation,
            ..Default::default()
        };
        let report = run_benchmark(&engine, &questions, &cfg)?;
        let a = report.aggregates;
        println!(
            "{name:<16} presence {:>5.1}%  mean |S| {:>5.1} facts  mean {:.3} ms",
            a.answer_presence, a.mean_space_size, a.mean_runtime_ms
        );
    }

    let out = tempfile::tempdir()?;
    run_benchmark(&engine, &questions, &QueryConfig::default())?.write(out.path())?;
    print!("\n{}", std::fs::read_to_string(out.path().join("report.csv"))?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
