//! Engine values on the micro10 fixture against the frozen brute-force oracle.

mod common;

use std::collections::BTreeMap;

use common::{expected, ids, micro10_engine, str_list};
use talestream::suggest::{apply_temperature, expanded_index_corpus, Breadth, SuggestionQuery};
use talestream::TropeIx;

const TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

#[test]
fn stats_and_inverse_maps() {
    let e = micro10_engine();
    let c = e.corpus();
    let exp = expected();
    let s = c.stats();
    let es = &exp["stats"];
    assert_eq!(s.tropes as u64, es["tropes"].as_u64().unwrap());
    assert_eq!(s.indexes as u64, es["indexes"].as_u64().unwrap());
    assert_eq!(s.movies as u64, es["movies"].as_u64().unwrap());
    assert!(close(s.mean_description_tropes, es["mean_description_tropes"].as_f64().unwrap()));
    assert!(close(s.mean_indexes, es["mean_indexes"].as_f64().unwrap()));
    assert!(close(s.mean_occurrences, es["mean_occurrences"].as_f64().unwrap()));

    for index in c.indexes() {
        assert_eq!(ids(c, &index.members), str_list(&exp["index_members"][&index.id]));
    }
    for movie in c.movies() {
        assert_eq!(ids(c, &movie.tropes), str_list(&exp["movie_tropes"][&movie.id]));
    }
    let subs = c.sub_tropes("AntiHeroLike").unwrap();
    assert_eq!(subs.len(), 3);
    assert_eq!(ids(c, &subs), str_list(&exp["sub_tropes_AntiHeroLike"]));
    assert!(c.sub_tropes("ViceCity").unwrap().is_empty());
    c.check_integrity().unwrap();
}

#[test]
fn expanded_index_corpora() {
    let e = micro10_engine();
    let c = e.corpus();
    let exp = expected();
    for t in c.trope_keys() {
        let got: BTreeMap<String, u64> = expanded_index_corpus(c, t)
            .iter()
            .map(|(&i, n)| (c.index(i).id.clone(), n as u64))
            .collect();
        let want: BTreeMap<String, u64> = exp["expanded_index_corpus"][&c.trope(t).id]
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.as_u64().unwrap()))
            .collect();
        assert_eq!(got, want, "{}", c.trope(t).id);
    }
}

#[test]
fn space_weights_match_oracle() {
    let e = micro10_engine();
    let c = e.corpus();
    let exp = expected();
    for t in c.trope_keys() {
        let id = &c.trope(t).id;
        let check = |space: &str, got: Vec<(String, f64)>| {
            let want = exp["spaces"][space]["weights"][id].as_object().unwrap();
            assert_eq!(got.len(), want.len(), "{space} {id}");
            for (term, w) in got {
                assert!(close(w, want[&term].as_f64().unwrap()), "{space} {id} {term}");
            }
        };
        check("index", e.index_space().weights(t.index()).unwrap().map(|(i, w)| (c.index(*i).id.clone(), w)).collect());
        check("movie", e.movie_space().weights(t.index()).unwrap().map(|(m, w)| (c.movie(*m).id.clone(), w)).collect());
        check("text", e.text_space().weights(t.index()).unwrap().map(|(s, w)| (s.clone(), w)).collect());
    }
}

#[test]
fn pairwise_similarities_match_oracle() {
    let e = micro10_engine();
    let c = e.corpus();
    let exp = expected();
    for a in c.trope_keys() {
        for b in c.trope_keys() {
            let (ia, ib) = (&c.trope(a).id, &c.trope(b).id);
            for (space, got) in [
                ("index", e.index_similarity(a, b).unwrap()),
                ("movie", e.movie_similarity(a, b).unwrap()),
                ("text", e.text_similarity(a, b).unwrap()),
            ] {
                let want = exp["spaces"][space]["similarity"][ia][ib].as_f64().unwrap();
                assert!(close(got, want), "{space} {ia} {ib}: {got} vs {want}");
            }
        }
    }
}

fn input_sets(exp: &serde_json::Value) -> Vec<String> {
    exp["index_score"].as_object().unwrap().keys().cloned().collect()
}

fn keys(e: &talestream::Engine, set: &str) -> Vec<TropeIx> {
    set.split(',').map(|id| e.corpus().trope_ix(id).unwrap()).collect()
}

#[test]
fn index_and_cooccurrence_scores_match_oracle() {
    let e = micro10_engine();
    let c = e.corpus();
    let exp = expected();
    for set in input_sets(&exp) {
        let inputs = keys(&e, &set);
        let batch_ind = e.index_scores(&inputs).unwrap();
        let batch_co = e.cooccurrence_scores(&inputs).unwrap();
        for t in c.trope_keys() {
            let id = &c.trope(t).id;
            let want_ind = exp["index_score"][&set][id].as_f64().unwrap();
            let want_co = exp["cooccurrence_score"][&set][id].as_f64().unwrap();
            assert!(close(e.index_score(&inputs, t).unwrap(), want_ind), "s_ind {set} {id}");
            assert!(close(batch_ind[t.index()], want_ind), "batch s_ind {set} {id}");
            assert!(close(e.cooccurrence_score_multi(&inputs, t).unwrap(), want_co), "s_co {set} {id}");
            assert!(close(batch_co[t.index()], want_co), "batch s_co {set} {id}");
        }
    }
}

#[test]
fn combined_raw_scores_match_oracle() {
    let e = micro10_engine();
    let exp = expected();
    let text = exp["text_query"].as_str().unwrap().to_owned();
    for set in input_sets(&exp) {
        for (b, breadth) in [("1", Breadth::Index), ("2", Breadth::Mixed), ("3", Breadth::Cooccurrence)] {
            for (with_text, table) in [(false, "combined_raw"), (true, "combined_raw_with_text")] {
                let query = SuggestionQuery {
                    input_tropes: set.split(',').map(String::from).collect(),
                    text: with_text.then(|| text.clone()),
                    breadth,
                    seed: Some(0),
                    ..Default::default()
                };
                let resolved = e.resolve(&query).unwrap();
                let got = e.combined_raw_scores(&resolved).unwrap();
                let want = exp[table][b][&set].as_object().unwrap();
                assert_eq!(got.len(), want.len());
                for (t, s) in got {
                    let id = &e.corpus().trope(t).id;
                    assert!(close(s, want[id].as_f64().unwrap()), "{table} b{b} {set} {id}");
                }
            }
        }
    }
}

#[test]
fn text_scores_match_oracle() {
    let e = micro10_engine();
    let c = e.corpus();
    let exp = expected();
    let scores = e.text_scores(exp["text_query"].as_str().unwrap());
    for t in c.trope_keys() {
        assert!(close(scores[t.index()], exp["text_scores"][&c.trope(t).id].as_f64().unwrap()));
    }
    let mut order: Vec<TropeIx> = c.trope_keys().collect();
    order.sort_by(|a, b| scores[b.index()].total_cmp(&scores[a.index()]).then(a.cmp(b)));
    assert_eq!(ids(c, &order), str_list(&exp["text_ranking"]));

    // Text-only query equals the text scores over all tropes.
    let resolved = e.resolve(&SuggestionQuery::for_text("heist night")).unwrap();
    for (t, s) in e.combined_raw_scores(&resolved).unwrap() {
        assert_eq!(s, scores[t.index()]);
    }
    assert!(e.text_scores("").iter().all(|&s| s == 0.0));
    assert!(e.text_scores("zzzz qqqq").iter().all(|&s| s == 0.0));
}

#[test]
fn full_occurrence_text_finds_its_trope() {
    let e = micro10_engine();
    let c = e.corpus();
    for t in c.trope_keys() {
        let text: Vec<&str> = c.trope(t).occurrences.iter().map(|o| o.text.as_str()).collect();
        if text.is_empty() {
            continue;
        }
        let scores = e.text_scores(&text.join(" "));
        let best = c.trope_keys().max_by(|a, b| scores[a.index()].total_cmp(&scores[b.index()]).then(b.cmp(a))).unwrap();
        assert_eq!(best, t);
    }
}

#[test]
fn filters_and_name_search_match_scans() {
    let e = micro10_engine();
    let c = e.corpus();
    let exp = expected();
    let m1 = c.movie_ix("M1").unwrap();
    assert_eq!(ids(c, &e.filter_candidates(&[], &[m1], &[], &[])), str_list(&exp["movie_filter_M1"]));
    assert_eq!(e.filter_candidates(&[], &[], &[], &[]).len(), 10);
    let anti = c.index_ix("AntiHeroLike").unwrap();
    let input = c.trope_ix("ByronicHero").unwrap();
    assert_eq!(e.filter_candidates(&[anti], &[], &[], &[input]).len(), 2);

    assert_eq!(ids(c, &e.name_search("he", 20)), str_list(&exp["name_search_he"]));
    assert_eq!(ids(c, &e.name_search("Night of Terror", 5)), ["NightOfTerror"]);
    assert!(e.name_search("astronaut", 5).is_empty());
}

#[test]
fn temperature_hand_example() {
    let exp = expected();
    let scores = [(0u8, 0.5), (1, 0.4), (2, 0.3), (3, 0.2), (4, 0.1)];
    let ranked = apply_temperature(&scores, 1.0).unwrap();
    for (r, want) in ranked.iter().zip(exp["temperature_theta1"].as_array().unwrap()) {
        assert!(close(r.final_score, want.as_f64().unwrap()));
    }
    assert!(close(ranked[1].final_score, 0.32));
    assert!(close(ranked[4].final_score, 0.02));
}

#[test]
fn deterministic_top_k_matches_oracle() {
    let e = micro10_engine();
    let exp = expected();
    for t in e.corpus().tropes() {
        let q = SuggestionQuery {
            breadth: Breadth::Index,
            count: 3,
            temperature: 0.0,
            ..SuggestionQuery::for_tropes([t.id.clone()])
        };
        let got: Vec<String> = e.suggest(&q).unwrap().suggestions.into_iter().map(|s| s.trope).collect();
        assert_eq!(got, str_list(&exp["top3_breadth1"][&t.id]), "{}", t.id);
    }
}

#[test]
fn cooccurrence_reductions() {
    let e = micro10_engine();
    let c = e.corpus();
    let k = |id| c.trope_ix(id).unwrap();
    // No description tropes: plain movie-space similarity.
    let ms = k("MoralSociopath");
    for t in c.trope_keys() {
        assert_eq!(e.cooccurrence_score(ms, t).unwrap(), e.movie_similarity(ms, t).unwrap());
    }
    // No movies anywhere near: zero.
    assert_eq!(e.cooccurrence_score(k("ByronicHero"), k("TheCity")).unwrap(), 0.0);
    // Multi-input is the max of single inputs; index score is the product.
    let (a, b) = (k("ByronicHero"), k("ViceCity"));
    for t in c.trope_keys() {
        let multi = e.cooccurrence_score_multi(&[a, b], t).unwrap();
        assert_eq!(multi, e.cooccurrence_score(a, t).unwrap().max(e.cooccurrence_score(b, t).unwrap()));
        assert_eq!(e.cooccurrence_score_multi(&[a], t).unwrap(), e.cooccurrence_score(a, t).unwrap());
        let prod = e.index_score(&[a], t).unwrap() * e.index_score(&[b], t).unwrap();
        assert_eq!(e.index_score(&[a, b], t).unwrap(), prod);
        assert_eq!(e.index_score(&[b, a], t).unwrap(), prod);
    }
    assert!((e.index_score(&[a], a).unwrap() - 1.0).abs() < 1e-9);
}
