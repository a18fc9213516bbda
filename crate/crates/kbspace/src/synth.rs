//! Seeded random knowledge bases for benchmarks and property tests.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::Result;
use crate::kb::{Fact, FactId, ItemId, ItemKind, KbItem};
use crate::store::KnowledgeBase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub num_facts: usize,
    pub num_entities: usize,
    pub num_predicates: usize,
    /// Probability that a fact carries one qualifier pair.
    pub qualifier_rate: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Average entity degree stays constant as `num_facts` grows.
    pub fn with_facts(num_facts: usize, seed: u64) -> Self {
        Self {
            num_facts,
            num_entities: (num_facts / 2).max(16),
            num_predicates: (num_facts / 10_000).max(8),
            qualifier_rate: 0.2,
            seed,
        }
    }
}

/// Entities `Q0..` come first, then predicates `P0..`.
pub fn generate(spec: &SyntheticSpec) -> Result<KnowledgeBase> {
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let ne = spec.num_entities.max(1);
    let np = spec.num_predicates.max(1);
    let mut items = Vec::with_capacity(ne + np);
    for i in 0..ne {
        items.push(KbItem {
            code: ItemId(i as u32),
            external_id: format!("Q{i}"),
            label: format!("entity {i}"),
            aliases: vec![],
            description: String::new(),
            kind: ItemKind::Entity,
        });
    }
    for i in 0..np {
        items.push(KbItem {
            code: ItemId((ne + i) as u32),
            external_id: format!("P{i}"),
            label: format!("predicate {i}"),
            aliases: vec![],
            description: String::new(),
            kind: ItemKind::Predicate,
        });
    }
    let entity = |rng: &mut StdRng| ItemId(rng.random_range(0..ne) as u32);
    let predicate = |rng: &mut StdRng| ItemId((ne + rng.random_range(0..np)) as u32);
    let facts = (0..spec.num_facts)
        .map(|i| {
            let subject = entity(&mut rng);
            let predicate_id = predicate(&mut rng);
            let object = entity(&mut rng);
            let qualifiers = if rng.random_bool(spec.qualifier_rate.clamp(0.0, 1.0)) {
                vec![(predicate(&mut rng), entity(&mut rng))]
            } else {
                vec![]
            };
            Fact {
                id: FactId(i as u32),
                subject,
                predicate: predicate_id,
                object,
                qualifiers,
            }
        })
        .collect();
    KnowledgeBase::new(items, facts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let spec = SyntheticSpec::with_facts(500, 3);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_facts(), 500);
        assert_eq!(a.num_items(), 250 + 8);
        let c = generate(&SyntheticSpec { seed: 4, ..spec }).unwrap();
        assert_ne!(a.facts(), c.facts());
    }
}
