//! Every example runs to completion.

#[path = "../examples/auto_params.rs"]
mod auto_params;
#[path = "../examples/benchmark.rs"]
mod benchmark;
#[path = "../examples/bm25_filter.rs"]
mod bm25_filter;
#[path = "../examples/candidates.rs"]
mod candidates;
#[path = "../examples/embeddings.rs"]
mod embeddings;
#[path = "../examples/grid_search.rs"]
mod grid_search;
#[path = "../examples/ingest_fixture.rs"]
mod ingest_fixture;
#[path = "../examples/micro_bench.rs"]
mod micro_bench;
#[path = "../examples/neighborhood.rs"]
mod neighborhood;
#[path = "../examples/search_space.rs"]
mod search_space;
#[path = "../examples/serve.rs"]
mod serve;
#[path = "../examples/threshold_topk.rs"]
mod threshold_topk;

#[test]
fn auto_params_runs() {
    auto_params::run().unwrap();
}

#[test]
fn benchmark_runs() {
    benchmark::run().unwrap();
}

#[test]
fn bm25_filter_runs() {
    bm25_filter::run().unwrap();
}

#[test]
fn candidates_runs() {
    candidates::run().unwrap();
}

#[test]
fn embeddings_runs() {
    embeddings::run().unwrap();
}

#[test]
fn grid_search_runs() {
    grid_search::run().unwrap();
}

#[test]
fn ingest_fixture_runs() {
    ingest_fixture::run().unwrap();
}

#[test]
fn micro_bench_runs() {
    micro_bench::run().unwrap();
}

#[test]
fn neighborhood_runs() {
    neighborhood::run().unwrap();
}

#[test]
fn search_space_runs() {
    search_space::run().unwrap();
}

#[test]
fn serve_runs() {
    serve::run().unwrap();
}

#[test]
fn threshold_topk_runs() {
    threshold_topk::run().unwrap();
}
