use std::collections::HashMap;
use std::sync::Arc;

use wcfg_core::counting::{exact_counts, weight_spectrum};
use wcfg_core::grammar::{normalize, parse_grammar};
use wcfg_core::sampler::{exact_table, sample_many, word_probability};
use wcfg_core::urns::{analyze, from_spectrum, simulate, Method, SimOptions, Statistic};
use wcfg_core::{BigRational, ExactCountTable};

const GRAMMAR: &str = "\
# words over a, b with a weighted three times b
axiom S
terminal a weight 3
terminal b weight 1
S -> a S | b S | _
";

#[test]
fn parse_count_spectrum_agree() {
    let g = parse_grammar(GRAMMAR).unwrap();
    let ng = normalize(&g).unwrap();
    let w = g.weights();
    let table: ExactCountTable = exact_counts(&ng, &w, 6).unwrap();
    for n in 0..=6 {
        let sp = weight_spectrum(&ng, &w, n, 1 << 10).unwrap();
        // (3 + 1)^n by the binomial theorem
        assert_eq!(sp.total_weight(), BigRational::from_integer(4u32.pow(n as u32).into()));
        assert_eq!(table.total(n), &sp.total_weight());
        assert_eq!(sp.classes.len(), n + 1);
    }
}

#[test]
fn sampled_frequencies_follow_word_weights() {
    let g = parse_grammar(GRAMMAR).unwrap();
    let ng = normalize(&g).unwrap();
    let w = g.weights();
    let draws = 40_000;
    let words = sample_many(Arc::new(exact_table(&ng, &w, 3)), 3, draws, 7).unwrap();
    let mut freq: HashMap<Vec<usize>, usize> = HashMap::new();
    for word in words {
        *freq.entry(word).or_default() += 1;
    }
    assert_eq!(freq.len(), 8);
    let exact = exact_counts(&ng, &w, 3).unwrap();
    for (word, count) in freq {
        let p = wcfg_core::scalar::rational_to_f64(&word_probability(&exact, &word).unwrap());
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        let observed = count as f64 / draws as f64;
        assert!((observed - p).abs() < 5.0 * sd, "{word:?}: {observed} vs {p}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let g = parse_grammar(GRAMMAR).unwrap();
    let ng = normalize(&g).unwrap();
    let table = Arc::new(exact_table(&ng, &g.weights(), 20));
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| sample_many(table.clone(), 20, 5000, 99).unwrap())
    };
    assert_eq!(run(1), run(4));

    let u = from_spectrum(&weight_spectrum(&ng, &g.weights(), 8, 1 << 10).unwrap()).unwrap();
    let sim = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| simulate(&u, Statistic::FirstCollision, SimOptions::new(3000, 5)).unwrap())
    };
    assert_eq!(sim(1), sim(3));
}

#[test]
fn report_is_consistent_with_simulation() {
    let g = parse_grammar(GRAMMAR).unwrap();
    let ng = normalize(&g).unwrap();
    let u = from_spectrum(&weight_spectrum(&ng, &g.weights(), 6, 1 << 10).unwrap()).unwrap();
    let k = 20;
    let rep = analyze(&u, Some(6), k).unwrap();
    for (stat, name) in [
        (Statistic::FirstCollision, "first_collision"),
        (Statistic::Distinct(k), "distinct"),
        (Statistic::Coverage(k), "coverage"),
    ] {
        let predicted = rep.find(name, Method::Exact).unwrap().value.unwrap();
        let sim = simulate(&u, stat, SimOptions::new(20_000, 3)).unwrap();
        assert!(
            (sim.mean - predicted).abs() < 4.0 * sim.stderr,
            "{name}: {} ± {} vs {predicted}",
            sim.mean,
            sim.stderr
        );
    }
}
