//! Benchmark harness: answer presence, search-space size and runtime over a
//! question set, grid search over query parameters, and KB-interface
//! micro-benchmarks.

use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auto::{KSetting, PruneSetting};
use crate::engine::{Engine, QueryConfig};
use crate::error::{Error, Result};
use crate::ingest::literal_form;
use crate::kb::{FactId, ItemId, ItemKind};
use crate::scoring::SignalWeights;
use crate::space::SearchSpace;
use crate::store::{Distance, KnowledgeBase};
use crate::text::normalize;

/// One question with its gold answers: item ids, or literal strings
/// (optionally quoted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkInstance {
    pub question: String,
    #[serde(alias = "gold_answers")]
    pub answers: Vec<String>,
    /// Skips segmentation when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<String>>,
}

pub fn read_instances(path: &Path) -> Result<Vec<BenchmarkInstance>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: BenchmarkInstance =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if inst.answers.is_empty() {
            return Err(Error::parse(path, i + 1, "instance has no gold answers"));
        }
        out.push(inst);
    }
    Ok(out)
}

/// True iff some gold answer occurs in some fact of the space. Identifiers
/// match by item; other strings match literal items by normalized form.
pub fn answer_presence(kb: &KnowledgeBase, space: &SearchSpace, gold: &[String]) -> bool {
    fact_presence(kb, &space.facts, gold)
}

pub fn fact_presence(kb: &KnowledgeBase, facts: &[FactId], gold: &[String]) -> bool {
    let mut ids: HashSet<ItemId> = HashSet::new();
    let mut literals: HashSet<String> = HashSet::new();
    for g in gold {
        match (literal_form(g), kb.lookup(g)) {
            (None, Some(x)) => {
                ids.insert(x);
            }
            (Some(form), _) => {
                literals.insert(normalize(form));
            }
            (None, None) => {
                literals.insert(normalize(g));
            }
        }
    }
    facts.iter().filter_map(|&f| kb.fact(f)).any(|f| {
        f.items().any(|x| {
            ids.contains(&x) || (kb.kind(x) == Some(ItemKind::Literal) && literals.contains(&normalize(kb.label(x))))
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub index: usize,
    pub question: String,
    pub answer_present: bool,
    /// Number of facts in the search space.
    pub space_size: usize,
    pub num_items: usize,
    pub elapsed_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub questions: usize,
    /// Percentage of questions whose space contains a gold answer.
    pub answer_presence: f64,
    pub mean_space_size: f64,
    pub mean_items: f64,
    pub mean_runtime_ms: f64,
}

impl Aggregates {
    pub fn from_rows(rows: &[EvalRow]) -> Self {
        let n = rows.len();
        let mean = |f: &dyn Fn(&EvalRow) -> f64| {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(f).sum::<f64>() / n as f64
            }
        };
        Self {
            questions: n,
            answer_presence: 100.0 * mean(&|r| if r.answer_present { 1.0 } else { 0.0 }),
            mean_space_size: mean(&|r| r.space_size as f64),
            mean_items: mean(&|r| r.num_items as f64),
            mean_runtime_ms: mean(&|r| r.elapsed_ms),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: QueryConfig,
    pub rows: Vec<EvalRow>,
    pub aggregates: Aggregates,
}

impl EvalReport {
    /// Writes `report.json` and `report.csv` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json_path = dir.join("report.json");
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
        let csv_path = dir.join("report.csv");
        let to_io = |e: csv::Error| Error::io(&csv_path, e.into());
        let mut w = csv::Writer::from_path(&csv_path).map_err(to_io)?;
        for row in &self.rows {
            w.serialize(row).map_err(to_io)?;
        }
        w.flush().map_err(|e| Error::io(&csv_path, e))
    }
}

fn evaluate(engine: &Engine, index: usize, inst: &BenchmarkInstance, cfg: &QueryConfig) -> EvalRow {
    let start = Instant::now();
    let result = engine.search_space(&inst.question, inst.terms.as_deref(), cfg);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let (answer_present, space_size, num_items, error) = match result {
        Ok(space) => (
            answer_presence(engine.kb(), &space, &inst.answers),
            space.facts.len(),
            space.items.len(),
            None,
        ),
        Err(e) => (false, 0, 0, Some(e.to_string())),
    };
    EvalRow {
        index,
        question: inst.question.clone(),
        answer_present,
        space_size,
        num_items,
        elapsed_ms,
        error,
    }
}

/// Evaluates every instance in parallel. Rows keep the input order; a
/// question that fails counts as a miss with its error recorded.
pub fn run_benchmark(engine: &Engine, instances: &[BenchmarkInstance], cfg: &QueryConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let rows: Vec<EvalRow> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| evaluate(engine, i, inst, cfg))
        .collect();
    Ok(EvalReport {
        config: *cfg,
        aggregates: Aggregates::from_rows(&rows),
        rows,
    })
}

/// Axes of a parameter grid. An empty axis keeps the base configuration's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Rows of `[coh, conn, rel, match]`, each summing to 1.
    pub weights: Vec<[f64; 4]>,
    pub k: Vec<KSetting>,
    pub p: Vec<PruneSetting>,
    pub depth: Vec<usize>,
}

impl GridSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e == "toml");
        if is_toml {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
    }

    /// Cartesian product in the order weights, k, p, depth.
    pub fn configs(&self, base: &QueryConfig) -> Result<Vec<QueryConfig>> {
        let weights = if self.weights.is_empty() {
            vec![base.weights]
        } else {
            self.weights
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    SignalWeights::from_array(*w)
                        .map_err(|e| Error::InvalidArgument(format!("grid weights row {i}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        let ks = if self.k.is_empty() { vec![base.k] } else { self.k.clone() };
        let ps = if self.p.is_empty() { vec![base.p] } else { self.p.clone() };
        let ds = if self.depth.is_empty() { vec![base.depth] } else { self.depth.clone() };
        let mut out = Vec::new();
        for &w in &weights {
            for &k in &ks {
                for &p in &ps {
                    for &depth in &ds {
                        let cfg = QueryConfig {
                            weights: w,
                            k,
                            p,
                            depth,
                            ..*base
                        };
                        cfg.validate()?;
                        out.push(cfg);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub config: QueryConfig,
    pub aggregates: Aggregates,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub points: Vec<GridPoint>,
    /// Index into `points`.
    pub best: usize,
}

impl GridResult {
    pub fn best_config(&self) -> &QueryConfig {
        &self.points[self.best].config
    }
}

/// Evaluates every grid point. The best has the highest answer presence,
/// then the smallest mean space size, then comes first in grid order.
pub fn grid_search(
    engine: &Engine,
    instances: &[BenchmarkInstance],
    grid: &GridSpec,
    base: &QueryConfig,
) -> Result<GridResult> {
    let configs = grid.configs(base)?;
    let points = configs
        .iter()
        .map(|cfg| {
            run_benchmark(engine, instances, cfg).map(|r| GridPoint {
                config: *cfg,
                aggregates: r.aggregates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = (0..points.len())
        .reduce(|best, i| {
            let (a, b) = (&points[best].aggregates, &points[i].aggregates);
            let better = b.answer_presence > a.answer_presence
                || (b.answer_presence == a.answer_presence && b.mean_space_size < a.mean_space_size);
            if better {
                i
            } else {
                best
            }
        })
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    Ok(GridResult { points, best })
}

/// Neighborhood by scanning every fact.
pub fn naive_neighborhood(kb: &KnowledgeBase, x: ItemId) -> Vec<FactId> {
    kb.facts().iter().filter(|f| f.contains(x)).map(|f| f.id).collect()
}

/// Distance from a single scan over all facts, without the indexes.
pub fn naive_distance(kb: &KnowledgeBase, a: ItemId, b: ItemId) -> Distance {
    if a == b {
        return Distance::Hop1;
    }
    let mut na = HashSet::new();
    let mut nb = HashSet::new();
    for f in kb.facts() {
        let (has_a, has_b) = (f.contains(a), f.contains(b));
        if has_a && has_b {
            return Distance::Hop1;
        }
        if has_a {
            na.extend(f.items().filter(|&x| x != a));
        }
        if has_b {
            nb.extend(f.items().filter(|&x| x != b));
        }
    }
    if na.intersection(&nb).next().is_some() {
        Distance::Hop2
    } else {
        Distance::Far
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub operation: String,
    pub samples: usize,
    pub median_ns: f64,
    pub mean_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroBenchReport {
    pub num_facts: usize,
    pub num_items: usize,
    pub rows: Vec<LatencyRow>,
}

impl MicroBenchReport {
    pub fn row(&self, operation: &str) -> Option<&LatencyRow> {
        self.rows.iter().find(|r| r.operation == operation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicroBenchSpec {
    pub lookups: usize,
    pub pairs: usize,
    /// Samples for each full-scan baseline; 0 skips them.
    pub naive_samples: usize,
    pub seed: u64,
}

impl Default for MicroBenchSpec {
    fn default() -> Self {
        Self {
            lookups: 1_000_000,
            pairs: 1_000_000,
            naive_samples: 20,
            seed: 1,
        }
    }
}

pub const OP_LOOKUP: &str = "neighborhood_lookup";
pub const OP_DISTANCE: &str = "distance";
pub const OP_NAIVE_LOOKUP: &str = "naive_neighborhood_scan";
pub const OP_NAIVE_DISTANCE: &str = "naive_distance_scan";

fn latency_row(operation: &str, mut samples: Vec<u64>) -> LatencyRow {
    samples.sort_unstable();
    let n = samples.len();
    let median_ns = match n {
        0 => 0.0,
        _ if n % 2 == 1 => samples[n / 2] as f64,
        _ => (samples[n / 2 - 1] + samples[n / 2]) as f64 / 2.0,
    };
    let mean_ns = if n == 0 { 0.0 } else { samples.iter().sum::<u64>() as f64 / n as f64 };
    LatencyRow {
        operation: operation.to_string(),
        samples: n,
        median_ns,
        mean_ns,
    }
}

fn time_each<T>(inputs: &[T], mut op: impl FnMut(&T)) -> Vec<u64> {
    inputs
        .iter()
        .map(|x| {
            let t = Instant::now();
            op(x);
            t.elapsed().as_nanos() as u64
        })
        .collect()
}

/// Per-call latency of neighborhood lookups and distance checks on random
/// items, plus the full-scan baselines.
pub fn micro_bench(kb: &KnowledgeBase, spec: &MicroBenchSpec) -> Result<MicroBenchReport> {
    let n = kb.num_items();
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let mut sample = |len: usize| -> Vec<ItemId> { (0..len).map(|_| ItemId(rng.random_range(0..n) as u32)).collect() };
    let lookup = |&x: &ItemId| {
        let facts = kb.neighborhood(x).expect("sampled item exists");
        std::hint::black_box(facts.iter().map(|f| f.0 as u64).sum::<u64>());
    };
    let distance = |&(a, b): &(ItemId, ItemId)| {
        std::hint::black_box(kb.distance(a, b).expect("sampled items exist"));
    };
    let zip = |a: Vec<ItemId>, b: Vec<ItemId>| -> Vec<(ItemId, ItemId)> { a.into_iter().zip(b).collect() };

    // Each operation first runs untimed over an independent sample, so its
    // measurements see a warm steady state rather than cold caches.
    let mut rows = Vec::new();
    sample(spec.lookups).iter().for_each(lookup);
    let lookups = sample(spec.lookups);
    rows.push(latency_row(OP_LOOKUP, time_each(&lookups, lookup)));

    zip(sample(spec.pairs), sample(spec.pairs)).iter().for_each(distance);
    let pairs = zip(sample(spec.pairs), sample(spec.pairs));
    rows.push(latency_row(OP_DISTANCE, time_each(&pairs, distance)));

    let naive_items: Vec<ItemId> = lookups.iter().copied().take(spec.naive_samples).collect();
    let naive_pairs: Vec<(ItemId, ItemId)> = pairs.iter().copied().take(spec.naive_samples).collect();
    if spec.naive_samples > 0 {
        rows.push(latency_row(
            OP_NAIVE_LOOKUP,
            time_each(&naive_items, |&x| {
                std::hint::black_box(naive_neighborhood(kb, x));
            }),
        ));
        rows.push(latency_row(
            OP_NAIVE_DISTANCE,
            time_each(&naive_pairs, |&(a, b)| {
                std::hint::black_box(naive_distance(kb, a, b));
            }),
        ));
    }
    Ok(MicroBenchReport {
        num_facts: kb.num_facts(),
        num_items: n,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SyntheticSpec};

    fn row(i: usize, present: bool, size: usize, ms: f64) -> EvalRow {
        EvalRow {
            index: i,
            question: format!("q{i}"),
            answer_present: present,
            space_size: size,
            num_items: size * 2,
            elapsed_ms: ms,
            error: None,
        }
    }

    #[test]
    fn aggregates_recompute_from_rows() {
        let rows = vec![row(0, true, 10, 1.0), row(1, false, 20, 3.0), row(2, true, 30, 2.0), row(3, true, 0, 2.0)];
        let a = Aggregates::from_rows(&rows);
        assert_eq!(a.questions, 4);
        assert_eq!(a.answer_presence, 75.0);
        assert_eq!(a.mean_space_size, 15.0);
        assert_eq!(a.mean_items, 30.0);
        assert_eq!(a.mean_runtime_ms, 2.0);
        assert_eq!(Aggregates::from_rows(&[]).answer_presence, 0.0);
    }

    #[test]
    fn naive_matches_indexed() {
        let kb = generate(&SyntheticSpec::with_facts(400, 9)).unwrap();
        for a in (0..kb.num_items() as u32).step_by(7).map(ItemId) {
            assert_eq!(naive_neighborhood(&kb, a), kb.neighborhood(a).unwrap());
            for b in (0..kb.num_items() as u32).step_by(11).map(ItemId) {
                assert_eq!(naive_distance(&kb, a, b), kb.distance(a, b).unwrap());
            }
        }
    }

    #[test]
    fn micro_bench_has_all_rows() {
        let kb = generate(&SyntheticSpec::with_facts(1000, 1)).unwrap();
        let spec = MicroBenchSpec {
            lookups: 100,
            pairs: 100,
            naive_samples: 5,
            seed: 2,
        };
        let r = micro_bench(&kb, &spec).unwrap();
        for op in [OP_LOOKUP, OP_DISTANCE, OP_NAIVE_LOOKUP, OP_NAIVE_DISTANCE] {
            assert!(r.row(op).is_some_and(|r| r.samples > 0), "{op}");
        }
        assert_eq!(latency_row("x", vec![4, 1, 3, 2]).median_ns, 2.5);
    }

    #[test]
    fn grid_rejects_bad_weight_rows() {
        let grid = GridSpec {
            weights: vec![[0.25; 4], [0.5, 0.5, 0.5, 0.0]],
            ..Default::default()
        };
        assert!(grid.configs(&QueryConfig::default()).is_err());
        let grid = GridSpec {
            k: vec![KSetting::Fixed(1), KSetting::Auto],
            p: vec![PruneSetting::Fixed(10), PruneSetting::Unbounded],
            ..Default::default()
        };
        let configs = grid.configs(&QueryConfig::default()).unwrap();
        assert_eq!(configs.len(), 4);
        assert_eq!(configs[1].p, PruneSetting::Unbounded);
    }
}
