macro_rules! example {
    ($module:ident, $test:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(load_dataset_example, load_dataset_runs, "load_dataset.rs");
example!(tfidf_vectors_example, tfidf_vectors_runs, "tfidf_vectors.rs");
example!(suggest_tropes_example, suggest_tropes_runs, "suggest_tropes.rs");
example!(text_search_example, text_search_runs, "text_search.rs");
example!(explore_filters_example, explore_filters_runs, "explore_filters.rs");
example!(temperature_sampling_example, temperature_sampling_runs, "temperature_sampling.rs");
example!(method_overlap_example, method_overlap_runs, "method_overlap.rs");
example!(bootstrap_ratings_example, bootstrap_ratings_runs, "bootstrap_ratings.rs");
example!(synthetic_fixture_example, synthetic_fixture_runs, "synthetic_fixture.rs");
example!(http_api_example, http_api_runs, "http_api.rs");
example!(canvas_store_example, canvas_store_runs, "canvas_store.rs");
