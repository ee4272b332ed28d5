use std::sync::Arc;

use proptest::prelude::*;

use sememe_kb::dataset::load_lexicon;
use sememe_kb::similarity::{sememe_similarity, tree_similarity};
use sememe_kb::{Lang, SimilarityConfig, SimilarityEngine};
use sememe_kb_testkit::{
    brute_force_nearest, fixture_dir, fixture_lines, max_role_multiplicity, oracle_senses, BfsTaxonomy,
    ExhaustiveOracle,
};

fn engine(config: SimilarityConfig) -> SimilarityEngine {
    SimilarityEngine::new(Arc::new(load_lexicon(&fixture_dir()).unwrap()), config)
}

#[test]
fn fixture_multiplicity_is_small() {
    for s in oracle_senses(&fixture_lines("senses.jsonl")) {
        assert!(max_role_multiplicity(&s.def) <= 2, "sense {}", s.id);
    }
}

#[test]
fn pairwise_properties() {
    let e = engine(SimilarityConfig::default());
    let senses = e.lexicon().senses();
    for a in senses {
        assert_eq!(e.sense_similarity(a.id, a.id).unwrap(), 1.0);
        for b in senses {
            let ab = e.sense_similarity(a.id, b.id).unwrap();
            let ba = e.sense_similarity(b.id, a.id).unwrap();
            assert_eq!(ab.to_bits(), ba.to_bits(), "{} {}", a.id, b.id);
            assert!((0.0..=1.0).contains(&ab));
            if a.def == b.def {
                assert_eq!(ab, 1.0);
            }
        }
    }
}

#[test]
fn greedy_matches_exhaustive_on_fixture() {
    let e = engine(SimilarityConfig::default());
    let bfs = BfsTaxonomy::fixture();
    let oracle = ExhaustiveOracle { taxonomy: &bfs, config: SimilarityConfig::default() };
    let senses = oracle_senses(&fixture_lines("senses.jsonl"));
    for a in &senses {
        for b in &senses {
            let got = e.sense_similarity(sememe_kb::SenseId(a.id), sememe_kb::SenseId(b.id)).unwrap();
            let want = oracle.tree(&a.def, &b.def);
            assert!((got - want).abs() < 1e-12, "{} {}: {got} vs {want}", a.id, b.id);
        }
    }
}

#[test]
fn sememe_level_properties() {
    let lex = load_lexicon(&fixture_dir()).unwrap();
    let taxonomy = lex.taxonomy();
    let config = SimilarityConfig::default();
    let zero = SimilarityConfig { cross_tree_sim: 0.0, ..config };
    let ids: Vec<_> = taxonomy.iter().map(|s| s.id).collect();
    for &a in &ids {
        let mut by_distance: Vec<(u32, f64)> = Vec::new();
        for &b in &ids {
            let s = sememe_similarity(a, b, taxonomy, &config).unwrap();
            assert_eq!(s, sememe_similarity(b, a, taxonomy, &config).unwrap());
            assert!((0.0..=1.0).contains(&s));
            assert_eq!(s == 1.0, a == b);
            match taxonomy.path_distance(a, b).unwrap() {
                Some(d) => by_distance.push((d, s)),
                None => assert_eq!(sememe_similarity(a, b, taxonomy, &zero).unwrap(), 0.0),
            }
        }
        by_distance.sort_by_key(|x| x.0);
        for w in by_distance.windows(2) {
            assert!(w[1].1 <= w[0].1, "non-increasing in distance");
        }
    }
}

#[test]
fn nearest_matches_full_scan() {
    let e = engine(SimilarityConfig::default());
    let bfs = BfsTaxonomy::fixture();
    let oracle = ExhaustiveOracle { taxonomy: &bfs, config: SimilarityConfig::default() };
    let senses = oracle_senses(&fixture_lines("senses.jsonl"));
    for k in [1, 3, 5, 100] {
        for s in &senses {
            let got: Vec<u64> =
                e.nearest_senses(sememe_kb::SenseId(s.id), k).unwrap().iter().map(|x| x.sense.id.0).collect();
            let want: Vec<u64> = brute_force_nearest(&oracle, &senses, s.id, k).iter().map(|x| x.0).collect();
            assert_eq!(got, want, "sense {} k {k}", s.id);
            assert_eq!(got.len(), k.min(senses.len() - 1));
        }
    }
}

#[test]
fn word_similarity_pairs() {
    let e = engine(SimilarityConfig::default());
    let senses = oracle_senses(&fixture_lines("senses.jsonl"));
    let words: Vec<&str> = {
        let mut w: Vec<&str> = senses.iter().map(|s| s.en.as_str()).collect();
        w.sort();
        w.dedup();
        w
    };
    for a in &words {
        assert_eq!(e.word_similarity(a, a, Lang::En).unwrap().score, 1.0);
        for b in &words {
            let ab = e.word_similarity(a, b, Lang::En).unwrap();
            let ba = e.word_similarity(b, a, Lang::En).unwrap();
            assert_eq!(ab.score.to_bits(), ba.score.to_bits());
            let m = senses.iter().filter(|s| s.en == *b).count();
            let n = senses.iter().filter(|s| s.en == *a).count();
            assert_eq!(ab.pairs_evaluated, n * m);
            // Brute force over every sense pair.
            let best = senses
                .iter()
                .filter(|s| s.en == *a)
                .flat_map(|x| senses.iter().filter(|s| s.en == *b).map(move |y| (x.id, y.id)))
                .map(|(x, y)| e.sense_similarity(sememe_kb::SenseId(x), sememe_kb::SenseId(y)).unwrap())
                .fold(0.0, f64::max);
            assert_eq!(ab.score, best);
        }
    }
    let apple = e.word_similarity("apple", "tree", Lang::En).unwrap();
    assert_eq!(apple.pairs_evaluated, 4);
    assert_eq!(e.word_similarity("苹果", "树", Lang::Zh).unwrap().pairs_evaluated, 4);
    assert!(e.word_similarity("apple", "unicorn", Lang::En).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_fixture_trees_are_bounded_and_symmetric(
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        use rand::SeedableRng;
        let lex = load_lexicon(&fixture_dir()).unwrap();
        let labels: Vec<String> = lex.taxonomy().iter().map(|s| s.label.to_string()).collect();
        let mut ra = rand_chacha::ChaCha8Rng::seed_from_u64(seed_a);
        let mut rb = rand_chacha::ChaCha8Rng::seed_from_u64(seed_b);
        let a = sememe_kb::parse_def(&sememe_kb_testkit::random_fixture_def(&mut ra, &labels, 4)).unwrap();
        let b = sememe_kb::parse_def(&sememe_kb_testkit::random_fixture_def(&mut rb, &labels, 4)).unwrap();
        let c = SimilarityConfig::default();
        let ab = tree_similarity(&a, &b, lex.taxonomy(), &c).unwrap();
        let ba = tree_similarity(&b, &a, lex.taxonomy(), &c).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(tree_similarity(&a, &a, lex.taxonomy(), &c).unwrap(), 1.0);
    }
}
