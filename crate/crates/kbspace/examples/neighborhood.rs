//! Neighborhood lookups, frequency profiles and KB distance.

use kbspace::fixture;
use kbspace::space::verbalize_fact;

pub fn run() -> anyhow::Result<()> {
    let kb = fixture::knowledge_base()?;
    let id = |s: &str| kb.lookup(s).ok_or_else(|| anyhow::anyhow!("no item {s}"));

    let team = id("croatia_team")?;
    println!("facts of {}:", kb.label(team));
    for f in kb.neighborhood_facts(team)? {
        println!("  #{:<3} {}", f.id.0, verbalize_fact(&kb, f));
    }
    let neighbors: Vec<&str> = kb.neighbors(team)?.iter().map(|&x| kb.label(x)).collect();
    println!("neighbors: {}", neighbors.join(", "));
    println!("frequency: {:?}", kb.frequency(team)?);

    for (a, b) in [
        ("france_team", "wc2018_final"),
        ("pogba", "perisic"),
        ("pogba", "asteroid_589"),
        ("luzhniki", "luzhniki"),
    ] {
        let d = kb.distance(id(a)?, id(b)?)?;
        println!("{a} ~ {b}: {d:?}, connectivity {}", d.connectivity());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
