//! Exhaustive search over weights, k and p.

use kbspace::eval::{grid_search, GridSpec};
use kbspace::{fixture, KSetting, PruneSetting, QueryConfig};

pub fn run() -> anyhow::Result<()> {
    let engine = fixture::engine()?;
    let questions = fixture::questions()?;
    let grid = GridSpec {
        weights: vec![[0.1, 0.3, 0.2, 0.4], [0.25, 0.25, 0.25, 0.25], [0.0, 0.0, 0.0, 1.0]],
        k: vec![KSetting::Fixed(1), KSetting::Auto],
        p: vec![PruneSetting::Fixed(5), PruneSetting::Fixed(1000)],
        depth: vec![],
    };
    let result = grid_search(&engine, &questions, &grid, &QueryConfig::default())?;
    for (i, point) in result.points.iter().enumerate() {
        let c = &point.config;
        println!(
            "{} w={:?} k={} p={}  presence {:>5.1}%  mean |S| {:.1}",
            if i == result.best { "*" } else { " " },
            c.weights.as_array(),
            c.k,
            c.p,
            point.aggregates.answer_presence,
            point.aggregates.mean_space_size
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
