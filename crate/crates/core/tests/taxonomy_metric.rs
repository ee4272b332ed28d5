use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sememe_kb::dataset::load_taxonomy;
use sememe_kb::taxonomy::{SememeRecord, Taxonomy, TaxonomyError};
use sememe_kb::{Category, SememeId};
use sememe_kb_testkit::{fixture_dir, fixture_lines, BfsTaxonomy};

#[test]
fn distances_match_bfs() {
    let taxonomy = load_taxonomy(&fixture_dir()).unwrap();
    let bfs = BfsTaxonomy::fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pick = |rng: &mut ChaCha8Rng| SememeId(bfs.ids[rng.random_range(0..bfs.ids.len())]);
    for _ in 0..1000 {
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        assert_eq!(taxonomy.path_distance(a, b).unwrap(), bfs.distance(a.0, b.0), "{a} {b}");
    }
}

#[test]
fn metric_axioms_on_all_triples() {
    let taxonomy = load_taxonomy(&fixture_dir()).unwrap();
    let ids: Vec<SememeId> = taxonomy.iter().map(|s| s.id).collect();
    let d = |a, b| taxonomy.path_distance(a, b).unwrap();
    for &a in &ids {
        assert_eq!(d(a, a), Some(0));
        let root = taxonomy.root_of(a).unwrap().id;
        assert_eq!(d(a, root), Some(taxonomy.depth(a).unwrap()));
        assert_eq!(taxonomy.ancestors(a).unwrap().len() as u32, taxonomy.depth(a).unwrap());
        for &b in &ids {
            assert_eq!(d(a, b), d(b, a));
            if a != b {
                assert_ne!(d(a, b), Some(0));
            }
            for &c in &ids {
                if let (Some(ab), Some(bc), Some(ac)) = (d(a, b), d(b, c), d(a, c)) {
                    assert!(ac <= ab + bc);
                }
            }
        }
    }
}

fn fixture_records() -> Vec<SememeRecord> {
    fixture_lines("taxonomy.jsonl").into_iter().map(|v| serde_json::from_value(v).unwrap()).collect()
}

#[test]
fn mutations_are_rejected() {
    let base = fixture_records();
    assert!(Taxonomy::load(base.clone()).is_ok());

    // Point a root at one of its descendants.
    let mut cycle = base.clone();
    let root = cycle.iter().position(|r| r.id == SememeId(0)).unwrap();
    cycle[root].parent = Some(SememeId(18));
    assert!(matches!(Taxonomy::load(cycle), Err(TaxonomyError::CycleDetected(_))));

    let mut dup = base.clone();
    let mut copy = dup[5].clone();
    copy.id = SememeId(500);
    dup.push(copy);
    assert!(matches!(Taxonomy::load(dup), Err(TaxonomyError::DuplicateRef { id: SememeId(500), .. })));

    let mut cross = base.clone();
    let red = cross.iter().position(|r| r.id == SememeId(62)).unwrap();
    cross[red].parent = Some(SememeId(0));
    assert!(matches!(Taxonomy::load(cross), Err(TaxonomyError::ParentCategoryMismatch { id: SememeId(62), .. })));

    let mut dup_id = base.clone();
    dup_id.push(SememeRecord {
        id: SememeId(3),
        en: "brand".into(),
        zh: "新".into(),
        category: Category::Thing,
        parent: None,
    });
    assert!(matches!(Taxonomy::load(dup_id), Err(TaxonomyError::DuplicateId(SememeId(3)))));

    let mut dangling = base;
    dangling[10].parent = Some(SememeId(4242));
    assert!(matches!(Taxonomy::load(dangling), Err(TaxonomyError::DanglingParent { .. })));
}
