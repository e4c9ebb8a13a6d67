//! Acceptance suite: one PASS/FAIL line per criterion, written straight to
//! the process stdout so it shows up without `--nocapture`.
//!
//! Criterion 7 cannot be met together with criterion 6 (see the README); it
//! is evaluated and reported but listed in `KNOWN_FAILING`.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wcfg_core::asymptotics::{collision_envelope, estimate_singularity_ln};
use wcfg_core::counting::{exact_counts, weight_spectrum, CountingError};
use wcfg_core::grammar::{builtin, enumerate_words, normalize, GrammarBuilder, WeightedGrammar};
use wcfg_core::rna::{rna_grammar, structure_counts, RnaModel, WeightConvention};
use wcfg_core::sampler::{exact_distribution, exact_table, sample_many};
use wcfg_core::scalar::rational_to_f64;
use wcfg_core::urns::{
    birthday_asymptotic, birthday_exact, coupon_bounds, coupon_uniform_exact, expected_coverage, expected_distinct,
    expected_occupied_weight, from_spectrum, simulate, BirthdayOptions, SimOptions, Statistic, UrnModel,
};
use wcfg_core::BigRational;

const KNOWN_FAILING: &[u32] = &[7];
const SEED: u64 = 0x5eed_2009;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_weight(rng: &mut ChaCha8Rng) -> BigRational {
    q(rng.gen_range(1..=9), rng.gen_range(1..=4))
}

// 1 ---------------------------------------------------------------------

fn brute_force_occupancy(weights: &[BigRational], k: u32) -> (BigRational, BigRational, BigRational) {
    let m = weights.len();
    let total: BigRational = weights.iter().sum();
    let p: Vec<BigRational> = weights.iter().map(|w| w / &total).collect();
    let (mut distinct, mut coverage, mut occupied) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
    let mut seq = vec![0usize; k as usize];
    loop {
        let prob = seq.iter().fold(BigRational::one(), |acc, &i| acc * &p[i]);
        let mut seen = vec![false; m];
        for &i in &seq {
            seen[i] = true;
        }
        for i in (0..m).filter(|&i| seen[i]) {
            distinct += &prob;
            coverage += &prob * &p[i];
            occupied += &prob * &weights[i];
        }
        // next sequence in base m
        let mut pos = 0;
        loop {
            if pos == seq.len() {
                return (distinct, coverage, occupied);
            }
            seq[pos] += 1;
            if seq[pos] < m {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

fn criterion_1() -> Outcome {
    const MODELS: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = Vec::new();
    for model in 0..MODELS {
        let m = rng.gen_range(1..=5);
        let k = rng.gen_range(0..=6u32);
        let weights: Vec<BigRational> = (0..m).map(|_| random_weight(&mut rng)).collect();
        let u = UrnModel::from_weights(weights.iter().map(|w| (w.clone(), BigUint::one()))).unwrap();
        let (d, c, w) = brute_force_occupancy(&weights, k);
        let got = (
            expected_distinct(&u, k as u64).expected.exact,
            expected_coverage(&u, k as u64).exact,
            expected_occupied_weight(&u, k as u64).exact,
        );
        if got != (Some(d), Some(c), Some(w)) {
            mismatches.push(model);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{MODELS} models, exact rational equality, mismatches {mismatches:?}"),
    )
}

// 2 ---------------------------------------------------------------------

fn criterion_2() -> Outcome {
    const TOL_TWO: f64 = 1e-9;
    const TOL_365: f64 = 0.01;
    const TRIALS: u64 = 100_000;
    let two = birthday_exact(&UrnModel::uniform(2), BirthdayOptions::default())
        .unwrap()
        .value;
    let u = UrnModel::uniform(365);
    let exact = birthday_exact(&u, BirthdayOptions::default()).unwrap().value;
    let asym = birthday_asymptotic(&u);
    let sim = simulate(&u, Statistic::FirstCollision, SimOptions::new(TRIALS, SEED)).unwrap();
    let z = (sim.mean - exact) / sim.stderr;
    let pass = (two - 2.5).abs() <= TOL_TWO
        && (exact - 24.62).abs() <= TOL_365
        && (asym - (365.0 * PI / 2.0).sqrt()).abs() <= 1e-9
        && (asym - 23.94).abs() <= TOL_365
        && z.abs() <= 3.0;
    outcome(
        pass,
        format!(
            "m=2: {two:.12}; m=365: exact {exact:.5}, asymptotic {asym:.5}, MC {:.4} ± {:.4} (z = {z:+.2})",
            sim.mean, sim.stderr
        ),
    )
}

// 3 ---------------------------------------------------------------------

/// Expected full-collection time by the absorbing chain over collected sets.
fn absorbing_chain(p: &[f64]) -> f64 {
    let m = p.len();
    let full = (1usize << m) - 1;
    let mut t = vec![0.0; 1 << m];
    for s in (0..full).rev() {
        let mut stay = 0.0;
        let mut acc = 1.0;
        for (i, &pi) in p.iter().enumerate() {
            if s & (1 << i) != 0 {
                stay += pi;
            } else {
                acc += pi * t[s | (1 << i)];
            }
        }
        t[s] = acc / (1.0 - stay);
    }
    t[0]
}

fn criterion_3() -> Outcome {
    const MODELS: usize = 500;
    const MC_REL: f64 = 0.02;
    const SLACK: f64 = 1e-9;
    let exact3 = coupon_uniform_exact(3) == q(11, 2);
    let sim = simulate(
        &UrnModel::uniform(3),
        Statistic::FullCollection,
        SimOptions::new(100_000, SEED),
    )
    .unwrap();
    let mc_rel = (sim.mean - 5.5).abs() / 5.5;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut outside = 0;
    let mut ratio_range = (f64::INFINITY, 0.0f64);
    for _ in 0..MODELS {
        let m = rng.gen_range(2..=10);
        let weights: Vec<BigRational> = (0..m).map(|_| random_weight(&mut rng)).collect();
        let total: BigRational = weights.iter().sum();
        let p: Vec<f64> = weights.iter().map(|w| rational_to_f64(&(w / &total))).collect();
        let u = UrnModel::from_weights(weights.iter().map(|w| (w.clone(), BigUint::one()))).unwrap();
        let truth = absorbing_chain(&p);
        let b = coupon_bounds(&u);
        let mut ok = truth >= b.lower * (1.0 - SLACK) && truth <= b.upper * (1.0 + SLACK);
        if m >= 3 {
            let (lo, hi) = b.berenbrink.unwrap();
            ok &= truth >= lo * (1.0 - SLACK) && truth <= hi * (1.0 + SLACK);
        }
        ratio_range = (ratio_range.0.min(truth / b.xi), ratio_range.1.max(truth / b.xi));
        if !ok {
            outside += 1;
        }
    }
    outcome(
        exact3 && mc_rel <= MC_REL && outside == 0,
        format!(
            "m·H_m(3) = 11/2: {exact3}; MC {:.4} ({:.2}% off); {MODELS} chains, {outside} outside, E[C]/Ξ in [{:.3}, {:.3}], 3e·log2 log2 3 = {:.2}",
            sim.mean,
            100.0 * mc_rel,
            ratio_range.0,
            ratio_range.1,
            3.0 * E * 3f64.log2().log2()
        ),
    )
}

// 4 ---------------------------------------------------------------------

fn criterion_4() -> Outcome {
    const DRAWS: usize = 100_000;
    // chi-square, one degree of freedom, alpha = 0.001
    const CHI2_CRIT: f64 = 10.828;
    let g = builtin::motzkin(int(2));
    let ng = normalize(&g).unwrap();
    let table = Arc::new(exact_table(&ng, &g.weights(), 2));
    let dots = g.parse_word("..").unwrap();
    let pair = g.parse_word("()").unwrap();
    let dist = exact_distribution(&table, 2, 1000).unwrap();
    let symbolic = dist.len() == 2 && dist.get(&dots) == Some(&q(4, 5)) && dist.get(&pair) == Some(&q(1, 5));

    let words = sample_many(table, 2, DRAWS, SEED).unwrap();
    let observed = words.iter().filter(|w| **w == dots).count() as f64;
    let n = DRAWS as f64;
    let (e_dots, e_pair) = (0.8 * n, 0.2 * n);
    let chi2 = (observed - e_dots).powi(2) / e_dots + ((n - observed) - e_pair).powi(2) / e_pair;
    outcome(
        symbolic && chi2 < CHI2_CRIT,
        format!(
            "P(..) = 4/5, P(()) = 1/5: {symbolic}; {DRAWS} draws, {observed} x '..', chi2 = {chi2:.3} < {CHI2_CRIT}"
        ),
    )
}

// 5 ---------------------------------------------------------------------

fn random_grammar(rng: &mut ChaCha8Rng) -> Option<WeightedGrammar> {
    let nts = ["S", "A", "B"];
    let ts = ["a", "b", "c"];
    let used_nts = &nts[..rng.gen_range(1..=3)];
    let used_ts = &ts[..rng.gen_range(1..=3)];
    let mut b = GrammarBuilder::new("S");
    for t in used_ts {
        b = b.terminal(*t, random_weight(rng));
    }
    for nt in used_nts {
        let base_len = rng.gen_range(0..=2);
        let base: Vec<&str> = (0..base_len)
            .map(|_| used_ts[rng.gen_range(0..used_ts.len())])
            .collect();
        b = b.rule(nt, &base);
        for _ in 0..rng.gen_range(1..=3) {
            let len = rng.gen_range(1..=3);
            let rhs: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        used_ts[rng.gen_range(0..used_ts.len())]
                    } else {
                        used_nts[rng.gen_range(0..used_nts.len())]
                    }
                })
                .collect();
            b = b.rule(nt, &rhs);
        }
    }
    b.build().ok()
}

fn criterion_5() -> Outcome {
    const GRAMMARS: usize = 10;
    const N_MAX: usize = 10;
    const CAP: usize = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut checked = 0;
    let mut rejected = 0;
    let mut cells = 0;
    let mut mismatches = Vec::new();
    while checked < GRAMMARS {
        let Some(g) = random_grammar(&mut rng) else {
            rejected += 1;
            continue;
        };
        let Ok(ng) = normalize(&g) else {
            rejected += 1;
            continue;
        };
        let enumerated: Option<Vec<_>> = (0..=N_MAX).map(|n| enumerate_words(&g, n, CAP).ok()).collect();
        let Some(enumerated) = enumerated else {
            rejected += 1;
            continue;
        };
        if enumerated.iter().all(|words| words.is_empty()) {
            rejected += 1;
            continue;
        }
        let w = g.weights();
        for (n, words) in enumerated.iter().enumerate() {
            let mut oracle: BTreeMap<BigRational, BigUint> = BTreeMap::new();
            for (word, count) in words {
                *oracle.entry(g.word_weight(word)).or_default() += count;
            }
            let spectrum: BTreeMap<BigRational, BigUint> = match weight_spectrum(&ng, &w, n, CAP) {
                Ok(sp) => sp.pairs().into_iter().collect(),
                Err(CountingError::EmptyLanguage(_)) => BTreeMap::new(),
                Err(e) => panic!("{e}"),
            };
            cells += 1;
            if spectrum != oracle {
                mismatches.push((checked, n));
            }
        }
        checked += 1;
    }
    outcome(
        mismatches.is_empty(),
        format!("{GRAMMARS} grammars ({rejected} rejected drafts), {cells} lengths, mismatches {mismatches:?}"),
    )
}

// 6 ---------------------------------------------------------------------

fn criterion_6() -> Outcome {
    const TOL_1: f64 = 0.01;
    const TOL_3: f64 = 0.005;
    let g1 = RnaModel::standard(1, -1.0).unwrap().gamma().unwrap();
    let g3 = RnaModel::standard(3, -3.0).unwrap().gamma().unwrap();
    outcome(
        (g1 - 1.54).abs() <= TOL_1 && (g3 - 1.105).abs() <= TOL_3,
        format!(
            "convention {:?} (w = exp(-E/RT), RT = 0.6163): gamma = {g1:.5} (θ=1,E=-1), {g3:.5} (θ=3,E=-3)",
            WeightConvention::Stabilizing
        ),
    )
}

// 7 ---------------------------------------------------------------------

fn rna_collision(theta: usize, energy: f64) -> f64 {
    let model = RnaModel::standard(theta, energy).unwrap();
    let g = model.grammar();
    let ng = normalize(&g).unwrap();
    collision_envelope(&ng, &g.weights(), 80, 0).unwrap().plug_in
}

fn criterion_7() -> Outcome {
    const TARGET_3: f64 = 93.55;
    const TARGET_1: f64 = 4.7e13;
    const REL_3: f64 = 0.01;
    const REL_1: f64 = 0.05;
    let c3 = rna_collision(3, -3.0);
    let c1 = rna_collision(1, -1.0);
    let r3 = (c3 - TARGET_3).abs() / TARGET_3;
    let r1 = (c1 - TARGET_1).abs() / TARGET_1;
    outcome(
        r3 <= REL_3 && r1 <= REL_1,
        format!(
            "n=80: {c3:.2} (θ=3, target {TARGET_3}, {:.0}% off), {c1:.3e} (θ=1, target {TARGET_1:e}, {:.0}% off)",
            100.0 * r3,
            100.0 * r1
        ),
    )
}

// 8 ---------------------------------------------------------------------

/// Counts structures by (pairs, hairpins): every pair enclosing no other pair
/// must enclose at least `theta` unpaired positions.
fn enumerate_structures(n: usize, theta: usize) -> BTreeMap<(usize, usize), u64> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        pos: usize,
        n: usize,
        theta: usize,
        open: &mut Vec<(usize, bool)>,
        pairs: usize,
        hairpins: usize,
        ok: bool,
        out: &mut BTreeMap<(usize, usize), u64>,
    ) {
        if open.len() > n - pos {
            return;
        }
        if pos == n {
            if ok && open.is_empty() {
                *out.entry((pairs, hairpins)).or_default() += 1;
            }
            return;
        }
        go(pos + 1, n, theta, open, pairs, hairpins, ok, out);
        open.push((pos, false));
        go(pos + 1, n, theta, open, pairs, hairpins, ok, out);
        open.pop();
        if let Some((start, has_inner)) = open.pop() {
            let hairpin = !has_inner;
            let valid = !hairpin || pos - start > theta;
            if let Some(parent) = open.last_mut() {
                let saved = parent.1;
                parent.1 = true;
                go(
                    pos + 1,
                    n,
                    theta,
                    open,
                    pairs + 1,
                    hairpins + hairpin as usize,
                    ok && valid,
                    out,
                );
                open.last_mut().unwrap().1 = saved;
            } else {
                go(
                    pos + 1,
                    n,
                    theta,
                    open,
                    pairs + 1,
                    hairpins + hairpin as usize,
                    ok && valid,
                    out,
                );
            }
            open.push((start, has_inner));
        }
    }
    let mut out = BTreeMap::new();
    go(0, n, theta, &mut Vec::new(), 0, 0, true, &mut out);
    out
}

fn criterion_8() -> Outcome {
    const N_MAX: usize = 14;
    let mut bad = Vec::new();
    let mut cells = 0;
    for theta in [1, 3] {
        let g = rna_grammar(theta, BigRational::one());
        let ng = normalize(&g).unwrap();
        let totals = exact_counts(&ng, &g.weights(), N_MAX).unwrap();
        for n in 0..=N_MAX {
            let oracle = enumerate_structures(n, theta);
            let s = structure_counts(n, theta);
            let mut total = BigUint::zero();
            for (k, row) in s.iter().enumerate() {
                for (i, c) in row.iter().enumerate() {
                    cells += 1;
                    let expect = oracle.get(&(k, i)).copied().unwrap_or(0);
                    if *c != BigUint::from(expect) {
                        bad.push((theta, n, k, i));
                    }
                    total += c;
                }
            }
            let covered = oracle.keys().all(|&(k, i)| k < s.len() && i < s[k].len());
            if !covered || BigRational::from_integer(total.into()) != *totals.total(n) {
                bad.push((theta, n, usize::MAX, usize::MAX));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("θ ∈ {{1,3}}, n ≤ {N_MAX}: {cells} cells, mismatches {bad:?}"),
    )
}

// 9 ---------------------------------------------------------------------

fn criterion_9() -> Outcome {
    const K: u64 = 1000;
    const FLOOR: f64 = 0.40;
    const CEILING: f64 = 0.10;
    let m3 = RnaModel::standard(3, -3.0).unwrap();
    let rows = wcfg_core::rna::rna_sweep(&m3, 1..=28, K).unwrap();
    let (worst_n, worst) = rows
        .iter()
        .map(|r| (r.n, r.expected_coverage))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let m1 = RnaModel::standard(1, -1.0).unwrap();
    let c1 = wcfg_core::rna::rna_sweep(&m1, 28..=28, K).unwrap()[0].expected_coverage;
    outcome(
        worst >= FLOOR && c1 < CEILING,
        format!("θ=3,E=-3: min coverage {worst:.4} at n={worst_n} (≥ {FLOOR}); θ=1,E=-1, n=28: {c1:.3e} (< {CEILING})"),
    )
}

// 10 --------------------------------------------------------------------

fn r_squared(pts: &[(f64, f64)]) -> f64 {
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn criterion_10() -> Outcome {
    const R2_MIN: f64 = 0.99;
    let w = int(2);
    let g = builtin::motzkin(w.clone());
    let ng = normalize(&g).unwrap();
    let weights = g.weights();
    let mut wrong_min = Vec::new();
    let mut series: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for n in 4..=40usize {
        let sp = weight_spectrum(&ng, &weights, n, 1 << 20).unwrap();
        let expect = if n % 2 == 0 { BigRational::one() } else { w.clone() };
        if sp.classes[0].weight != expect {
            wrong_min.push(n);
        }
        let u = from_spectrum(&sp).unwrap();
        let value = rational_to_f64(u.min_probability()) * coupon_bounds(&u).xi;
        series[n % 2].push((n as f64, value));
    }
    let r2_even = r_squared(&series[0]);
    let r2_odd = r_squared(&series[1]);
    outcome(
        wrong_min.is_empty() && r2_even >= R2_MIN && r2_odd >= R2_MIN,
        format!("4 ≤ n ≤ 40: min weight wrong at {wrong_min:?}; R² even {r2_even:.5}, odd {r2_odd:.5} (≥ {R2_MIN})"),
    )
}

// 11 --------------------------------------------------------------------

fn criterion_11() -> Outcome {
    const TERMS: usize = 512;
    const REL: f64 = 0.01;
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for a in [1.5f64, 3.0, 9.0] {
        for b in [0.0f64, 0.5, 1.5] {
            let ln_c: Vec<f64> = (0..TERMS)
                .map(|n| n as f64 * a.ln() - if n == 0 { 0.0 } else { b * (n as f64).ln() })
                .collect();
            let est = estimate_singularity_ln(&ln_c).unwrap();
            let rho_err = (est.rho * a - 1.0).abs();
            // relative for b > 0, absolute against 1 when b = 0
            let k_err = (est.k_exp - b).abs() / b.max(1.0);
            worst = worst.max(rho_err).max(k_err);
            lines.push(format!("({a},{b})"));
        }
    }
    outcome(
        worst <= REL,
        format!(
            "{} inputs a^n n^-b, {TERMS} terms, worst relative error {worst:.2e} (≤ {REL})",
            lines.len()
        ),
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion {
            id: 1,
            name: "exchangeable-formula oracle",
            limit: Duration::from_secs(10),
            run: criterion_1,
        },
        Criterion {
            id: 2,
            name: "birthday",
            limit: Duration::from_secs(30),
            run: criterion_2,
        },
        Criterion {
            id: 3,
            name: "coupon collector",
            limit: Duration::from_secs(60),
            run: criterion_3,
        },
        Criterion {
            id: 4,
            name: "sampler exactness",
            limit: Duration::from_secs(10),
            run: criterion_4,
        },
        Criterion {
            id: 5,
            name: "spectrum oracle",
            limit: Duration::from_secs(60),
            run: criterion_5,
        },
        Criterion {
            id: 6,
            name: "RNA growth constants",
            limit: Duration::from_secs(30),
            run: criterion_6,
        },
        Criterion {
            id: 7,
            name: "RNA first collision at n=80",
            limit: Duration::from_secs(30),
            run: criterion_7,
        },
        Criterion {
            id: 8,
            name: "Narayana counting",
            limit: Duration::from_secs(60),
            run: criterion_8,
        },
        Criterion {
            id: 9,
            name: "coverage figure spot check",
            limit: Duration::from_secs(60),
            run: criterion_9,
        },
        Criterion {
            id: 10,
            name: "figure 1 property",
            limit: Duration::from_secs(120),
            run: criterion_10,
        },
        Criterion {
            id: 11,
            name: "synthetic singularity recovery",
            limit: Duration::from_secs(10),
            run: criterion_11,
        },
    ];
    let mut stdout = std::io::stdout().lock();
    let mut unexpected = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let o = (c.run)();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= c.limit;
        let tag = if pass { "PASS" } else { "FAIL" };
        let known = if !pass && KNOWN_FAILING.contains(&c.id) {
            " [known]"
        } else {
            ""
        };
        writeln!(
            stdout,
            "acceptance {:>2} {tag}{known} {} ({:.2}s / {}s): {}",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            o.detail
        )
        .unwrap();
        if !pass && !KNOWN_FAILING.contains(&c.id) {
            unexpected.push(c.id);
        }
    }
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
}
