//! Word and item vectors: cosine-based similarity in [0, 1].

use kbspace::fixture;
use kbspace::EmbeddingStore;

pub fn run() -> anyhow::Result<()> {
    let store = EmbeddingStore::load(&fixture::embeddings_path())?;
    println!("{} vectors of dimension {}", store.len(), store.dim());
    for (a, b) in [
        ("croatia_team", "croatia_basketball"),
        ("croatia_team", "perisic"),
        ("croatia_team", "asteroid_589"),
        ("scored", "goal_scored_by"),
        ("scored", "film_score"),
        ("scored", "no-such-token"),
    ] {
        println!("sim({a}, {b}) = {:.3}", store.sim(a, b));
    }
    let phrase = store.phrase_vector("2018 final").expect("both words are known");
    println!("phrase vector of \"2018 final\" has {} dims", phrase.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
