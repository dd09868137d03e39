mod common;

use common::*;
use proptest::prelude::*;
use schema_focus::baselines::tokenize_label;
use schema_focus::fca::FormalContext;
use schema_focus::metrics::{self, CueIndex};
use schema_focus::ranking::{self, Metric, RankParams, RankedList, ReferenceRanking};
use schema_focus::schema::{parse_canonical, parse_incidence_csv, to_canonical_json, to_incidence_csv};
use schema_focus::SchemaBuilder;

fn matrix(max_e: usize, max_p: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_e, 1..=max_p).prop_flat_map(|(e, p)| prop::collection::vec(prop::collection::vec(any::<bool>(), p), e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metrics_match_oracle(m in matrix(6, 8)) {
        let s = schema_from_matrix("m", &m);
        let o = oracle(&m);
        let idx = CueIndex::new(&s);
        for i in 0..m.len() {
            prop_assert!((idx.cue_er(&entity_id(i)).unwrap() - o.cue_er[i]).abs() < 1e-12);
            prop_assert!((idx.normalized_cue(&entity_id(i)).unwrap() - o.ncue[i]).abs() < 1e-12);
        }
        prop_assert!((idx.focus_k() - o.focus_k).abs() < 1e-12);
        match o.cue_cr {
            Some(v) => prop_assert!((idx.cue_cr().unwrap() - v).abs() < 1e-12),
            None => prop_assert!(idx.cue_cr().is_err()),
        }
    }

    #[test]
    fn metric_ranges(m in matrix(8, 10)) {
        let s = schema_from_matrix("m", &m);
        let idx = CueIndex::new(&s);
        let fk = idx.focus_k();
        prop_assert!((0.0..=1.0).contains(&fk));
        for e in s.entity_types() {
            let n = idx.normalized_cue(&e.id).unwrap();
            prop_assert!((0.0..=1.0).contains(&n));
            // each property contributes at most 1 and at least 1/|E|
            let c = idx.cue_er(&e.id).unwrap();
            let k = e.properties.len() as f64;
            prop_assert!(c <= k + 1e-12);
            prop_assert!(c + 1e-12 >= k / s.entity_types().len() as f64);
        }
    }

    #[test]
    fn permutation_invariance(m in matrix(6, 8), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = schema_from_matrix("m", &m);
        // shuffle insertion order of entities and properties
        let mut order: Vec<usize> = (0..m.len()).collect();
        order.shuffle(&mut rng);
        let mut b = SchemaBuilder::new("m");
        for &i in &order {
            let mut props: Vec<String> = m[i].iter().enumerate().filter(|(_, on)| **on).map(|(j, _)| property_id(j)).collect();
            props.shuffle(&mut rng);
            b.push_entity(entity_id(i), None, props);
        }
        let t = b.build().unwrap().schema;
        prop_assert_eq!(&s, &t);
        prop_assert_eq!(metrics::metric_report(&s).to_csv(), metrics::metric_report(&t).to_csv());
    }

    #[test]
    fn focus_k_one_iff_disjoint_and_nonempty(m in matrix(6, 8)) {
        let s = schema_from_matrix("m", &m);
        let disjoint = (0..m[0].len()).all(|j| m.iter().filter(|r| r[j]).count() <= 1);
        let nonempty = m.iter().all(|r| r.iter().any(|b| *b));
        prop_assert_eq!(metrics::focus_k(&s) == 1.0, disjoint && nonempty);
    }

    #[test]
    fn canonical_round_trips(m in matrix(6, 8)) {
        let s = schema_from_matrix("m", &m);
        let json = to_canonical_json(&s);
        let back = parse_canonical(json.as_bytes(), "x").unwrap().schema;
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(to_canonical_json(&back), json);
        let csv = to_incidence_csv(&s);
        let back = parse_incidence_csv(csv.as_bytes(), "m").unwrap().schema;
        prop_assert_eq!(metrics::metric_report(&back).to_csv(), metrics::metric_report(&s).to_csv());
    }

    #[test]
    fn rankings_are_sorted_and_complete(m in matrix(7, 8), metric in 0usize..5) {
        let s = schema_from_matrix("m", &m);
        let params = RankParams { query: schema_focus::baselines::QueryTerms::new(["e001"]), ..RankParams::default() };
        let list = ranking::rank_entity_types(&s, Metric::ALL[metric], &params);
        prop_assert_eq!(list.entries().len(), s.entity_types().len());
        for w in list.entries().windows(2) {
            prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].id < w[1].id));
        }
    }

    #[test]
    fn topk_accuracy_bounds(n in 1usize..12, refs in prop::collection::btree_set(0usize..12, 1..8), k in 1usize..12) {
        let entries: Vec<(String, String, f64)> = (0..n).map(|i| (entity_id(i), entity_id(i), (n - i) as f64)).collect();
        let list = RankedList::new("s", "focus", entries);
        let reference = ReferenceRanking { schema: "s".into(), entities: refs.iter().map(|i| entity_id(*i)).collect(), query: None };
        let acc = ranking::topk_overlap_accuracy(&list, &reference, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        let top: Vec<usize> = (0..n.min(k)).collect();
        if refs.len() <= k && refs.iter().all(|r| top.contains(r)) {
            prop_assert_eq!(acc, 1.0);
        }
    }

    #[test]
    fn rank_schemas_ignores_insertion_order(ms in prop::collection::vec(matrix(4, 5), 1..6), rot in 0usize..6) {
        let schemas: Vec<_> = ms.iter().enumerate().map(|(i, m)| schema_from_matrix(&format!("s{i}"), m)).collect();
        let mut rotated = schemas.clone();
        let len = rotated.len();
        rotated.rotate_left(rot % len);
        prop_assert_eq!(ranking::rank_schemas(&schemas), ranking::rank_schemas(&rotated));
    }

    #[test]
    fn cxt_round_trips(m in matrix(6, 8)) {
        let objects: Vec<String> = (0..m.len()).map(entity_id).collect();
        let attributes: Vec<String> = (0..m[0].len()).map(property_id).collect();
        let ctx = FormalContext::new(objects, attributes, m.concat()).unwrap();
        let text = ctx.to_cxt().unwrap();
        prop_assert_eq!(FormalContext::parse_cxt(text.as_bytes()).unwrap(), ctx);
    }

    #[test]
    fn tokens_are_lowercase_and_nonempty(label in "[A-Za-z_ -]{0,24}") {
        for t in tokenize_label(&label) {
            prop_assert!(!t.is_empty());
            prop_assert_eq!(t.to_lowercase(), t);
        }
    }
}

#[test]
fn compare_means_are_arithmetic() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
    let mut schemas = Vec::new();
    let mut refs = Vec::new();
    for i in 0..6 {
        let m = random_matrix(&mut rng, 6, 8, 0.4);
        let s = schema_from_matrix(&format!("s{i}"), &m);
        refs.push(ReferenceRanking {
            schema: s.name().into(),
            entities: vec![entity_id(0)],
            query: None,
        });
        schemas.push(s);
    }
    let table = ranking::compare_rankers(&schemas, &refs, 2, &RankParams::default()).unwrap();
    assert_eq!(table.rows.len(), 6);
    for (mi, metric) in Metric::ALL.iter().enumerate() {
        let mean = table.rows.iter().map(|r| r.accuracy[mi]).sum::<f64>() / 6.0;
        assert!((table.mean(*metric).unwrap() - mean).abs() < 1e-12);
    }
}
