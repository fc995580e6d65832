use clarisim::catalog::{item_utility, oracle_recommend, satisfies, Catalog};
use clarisim::corpus::{builtin_domain, label_underspec, Corpus, IntentDomain, UnderspecLabel};
use clarisim::rng::seeded;
use proptest::prelude::*;

fn domains() -> Vec<IntentDomain> {
    ["movie_rec", "gift_rec", "plant_rec"]
        .iter()
        .map(|i| builtin_domain(i).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn masked_queries_partition_the_goal(seed in any::<u64>(), d in 0usize..3) {
        let domain = &domains()[d];
        let mut rng = seeded(seed);
        let goal = domain.sample_goal("g", &mut rng);
        domain.validate_goal(&goal).unwrap();
        let q = domain.mask(&goal, &mut rng);
        let total = domain.attributes.len();
        prop_assert!(!q.masked.is_empty());
        prop_assert_eq!(q.revealed.len() + q.masked.len(), total);
        for (cat, opts) in &q.revealed {
            prop_assert_eq!(opts, &goal.assignments[cat]);
            prop_assert!(!q.masked.contains(cat));
        }
        prop_assert_eq!(q.label, label_underspec(q.revealed.len(), total).unwrap());
        prop_assert!(q.text.starts_with(domain.opener()));
        prop_assert!(q.text.ends_with(domain.closer()));
        // The text is exactly the opener, the revealed sentences, and the closer.
        let full: Vec<String> = domain.render_sufficient(&goal).lines().map(String::from).collect();
        let lines: Vec<&str> = q.text.lines().collect();
        prop_assert_eq!(lines.len(), q.revealed.len() + 2);
        for (i, attr) in domain.attributes.iter().enumerate() {
            let present = lines.contains(&full[i + 1].as_str());
            prop_assert_eq!(present, q.revealed.contains_key(&attr.category));
        }
    }

    #[test]
    fn goal_selection_sizes_respect_limits(seed in any::<u64>(), d in 0usize..3) {
        let domain = &domains()[d];
        let goal = domain.sample_goal("g", &mut seeded(seed));
        for attr in &domain.attributes {
            let sel = &goal.assignments[&attr.category];
            prop_assert!(!sel.is_empty() && sel.len() <= attr.max_sel_allowed);
            let mut sorted = sel.clone();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), sel.len());
        }
    }

    #[test]
    fn utility_takes_quarter_steps(seed in any::<u64>()) {
        let domain = builtin_domain("movie_rec").unwrap();
        let catalog = Catalog::generate(&domain, 20, seed).unwrap();
        let goal = domain.sample_goal("g", &mut seeded(seed ^ 1));
        for item in catalog.items() {
            let u = item_utility(item, &goal).unwrap();
            prop_assert!((u * 4.0 - (u * 4.0).round()).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&u));
        }
    }

    #[test]
    fn oracle_scores_are_non_increasing(seed in any::<u64>(), m in 1usize..40) {
        let domain = builtin_domain("movie_rec").unwrap();
        let catalog = Catalog::generate(&domain, 60, seed).unwrap();
        let mut rng = seeded(seed.wrapping_add(7));
        let goal = domain.sample_goal("g", &mut rng);
        let q = domain.mask(&goal, &mut rng);
        let recs = oracle_recommend(&catalog, &q.revealed, m, &mut rng).unwrap();
        prop_assert_eq!(recs.len(), m.min(60));
        let score = |i: &clarisim::catalog::Item| {
            q.revealed.iter().filter(|(c, v)| satisfies(i, c, v).unwrap()).count()
        };
        let scores: Vec<usize> = recs.iter().map(|i| score(i)).collect();
        prop_assert!(scores.windows(2).all(|w| w[0] >= w[1]));
        // Nothing left out scores higher than the last item taken.
        let last = *scores.last().unwrap();
        let ids: Vec<u32> = recs.iter().map(|i| i.id).collect();
        for item in catalog.items().iter().filter(|i| !ids.contains(&i.id)) {
            prop_assert!(score(item) <= last);
        }
    }
}

#[test]
fn revealing_a_true_constraint_never_hurts_on_average() {
    let domain = builtin_domain("movie_rec").unwrap();
    let corpus = Corpus::generate(&domain, 300, 21);
    let mut catalog = Catalog::generate(&domain, 400, 22).unwrap();
    catalog.inject_exact_matches(corpus.goals()).unwrap();
    let trials = 20;
    let mut worse = 0;
    for r in &corpus.records {
        let q = &r.masked;
        let mut more = q.revealed.clone();
        let extra = &q.masked[0];
        more.insert(extra.clone(), r.goal.assignments[extra].clone());
        let mean = |constraints: &clarisim::corpus::Assignment| {
            let mut rng = seeded(5);
            (0..trials)
                .map(|_| {
                    let recs = oracle_recommend(&catalog, constraints, 5, &mut rng).unwrap();
                    recs.iter().map(|i| item_utility(i, &r.goal).unwrap()).sum::<f64>() / recs.len() as f64
                })
                .sum::<f64>()
                / trials as f64
        };
        if mean(&more) + 0.05 < mean(&q.revealed) {
            worse += 1;
        }
    }
    assert_eq!(worse, 0);
}

#[test]
fn label_law_across_domains() {
    for domain in domains() {
        let corpus = Corpus::generate(&domain, 4000, 99);
        let n = corpus.records.len() as f64;
        let crit = corpus
            .records
            .iter()
            .filter(|r| r.masked.label == UnderspecLabel::CriticalUnder)
            .count() as f64;
        let total = domain.attributes.len();
        // critical iff at most one attribute revealed, i.e. masked count >= total - 1.
        let expected = 2.0 / total as f64;
        assert!((crit / n - expected).abs() < 0.03, "{}: {}", domain.intent, crit / n);
        assert!(corpus.records.iter().all(|r| r.sufficient.label == UnderspecLabel::Sufficient));
    }
}

#[test]
fn corpus_and_catalog_round_trip_through_files() {
    let domain = builtin_domain("gift_rec").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let corpus = Corpus::generate(&domain, 50, 3);
    corpus.save(&dir.path().join("c.json")).unwrap();
    let back = Corpus::load(&dir.path().join("c.json")).unwrap();
    assert_eq!(back.hash(), corpus.hash());

    let mut catalog = Catalog::generate(&domain, 30, 4).unwrap();
    catalog.inject_exact_matches(corpus.goals()).unwrap();
    catalog.save(&dir.path().join("k.json")).unwrap();
    let back = Catalog::load(&domain, &dir.path().join("k.json")).unwrap();
    assert_eq!(back.hash(), catalog.hash());

    let movie = builtin_domain("movie_rec").unwrap();
    assert!(Catalog::load(&movie, &dir.path().join("k.json")).is_err());
}
