//! Monte Carlo estimates of the urn statistics, drawing either urns directly
//! from a model or words from the sampler.

use std::collections::HashSet;
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::{UrnError, UrnModel};
use crate::counting::CountTable;
use crate::grammar::Word;
use crate::sampler::Sampler;
use crate::scalar::{natural_to_rational, rational_to_f64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    FirstCollision,
    FullCollection,
    Distinct(u64),
    Coverage(u64),
}

#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    pub trials: u64,
    pub seed: u64,
    /// Per-trial draw limit.
    pub max_draws: u64,
    /// Largest urn count for which a full collection is simulated.
    pub max_urns: u64,
}

impl SimOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimOptions {
            trials,
            seed,
            max_draws: 1_000_000_000,
            max_urns: 10_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimResult {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

trait Source: Sync {
    type Key: Hash + Eq;
    type State;
    fn state(&self, seed: u64, stream: u64) -> Self::State;
    /// An urn and its probability.
    fn draw(&self, st: &mut Self::State) -> (Self::Key, f64);
    fn urn_count(&self) -> Option<u64>;
}

enum Cumulative {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

struct UrnSource {
    cumulative: Cumulative,
    multiplicities: Vec<u128>,
    probabilities: Vec<f64>,
    urns: Option<u64>,
}

impl UrnSource {
    fn new(u: &UrnModel) -> Result<Self, UrnError> {
        // class masses c_i χ_i scaled to integers
        let masses: Vec<BigRational> = u
            .classes()
            .iter()
            .map(|c| natural_to_rational(&c.multiplicity) * &c.weight)
            .collect();
        let d = masses
            .iter()
            .fold(num_bigint::BigInt::from(1), |acc, m| acc.lcm(m.denom()));
        let mut acc = BigUint::zero();
        let mut big = Vec::with_capacity(masses.len());
        for m in &masses {
            let v = (m * BigRational::from_integer(d.clone())).to_integer();
            acc += v.to_biguint().expect("positive mass");
            big.push(acc.clone());
        }
        let cumulative = match big.iter().map(|x| x.to_u128()).collect::<Option<Vec<u128>>>() {
            Some(small) => Cumulative::Small(small),
            None => Cumulative::Big(big),
        };
        let multiplicities = u
            .classes()
            .iter()
            .map(|c| {
                c.multiplicity.to_u128().ok_or(UrnError::CapExceeded {
                    what: "class size",
                    limit: u128::MAX,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(UrnSource {
            cumulative,
            multiplicities,
            probabilities: u.classes().iter().map(|c| rational_to_f64(&c.probability)).collect(),
            urns: u.urn_count().to_u64(),
        })
    }
}

impl Source for UrnSource {
    type Key = (usize, u128);
    type State = ChaCha20Rng;

    fn state(&self, seed: u64, stream: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    fn draw(&self, rng: &mut ChaCha20Rng) -> ((usize, u128), f64) {
        let class = match &self.cumulative {
            Cumulative::Small(c) => {
                let r = rng.gen_range(0..*c.last().expect("nonempty"));
                c.partition_point(|&x| x <= r)
            }
            Cumulative::Big(c) => {
                let r = rng.gen_biguint_below(c.last().expect("nonempty"));
                c.partition_point(|x| *x <= r)
            }
        };
        let idx = rng.gen_range(0..self.multiplicities[class]);
        ((class, idx), self.probabilities[class])
    }

    fn urn_count(&self) -> Option<u64> {
        self.urns
    }
}

struct WordSource {
    table: Arc<CountTable<BigUint>>,
    n: usize,
    urns: Option<u64>,
}

impl Source for WordSource {
    type Key = Word;
    type State = Sampler<BigUint>;

    fn state(&self, seed: u64, stream: u64) -> Sampler<BigUint> {
        Sampler::with_stream(self.table.clone(), seed, stream)
    }

    fn draw(&self, s: &mut Sampler<BigUint>) -> (Word, f64) {
        let w = s.sample_word(self.n).expect("nonempty language checked");
        let weight: BigUint = w.iter().map(|&t| &self.table.weights()[t]).product();
        let p = BigRational::new(weight.into(), self.table.total(self.n).clone().into());
        (w, rational_to_f64(&p))
    }

    fn urn_count(&self) -> Option<u64> {
        self.urns
    }
}

fn one_trial<S: Source>(src: &S, st: &mut S::State, stat: Statistic, opts: &SimOptions) -> Result<f64, UrnError> {
    let mut seen: HashSet<S::Key> = HashSet::new();
    let too_many = UrnError::CapExceeded {
        what: "draws per trial",
        limit: opts.max_draws as u128,
    };
    match stat {
        Statistic::FirstCollision => {
            for d in 1..=opts.max_draws {
                if !seen.insert(src.draw(st).0) {
                    return Ok(d as f64);
                }
            }
            Err(too_many)
        }
        Statistic::FullCollection => {
            let m = src
                .urn_count()
                .filter(|&m| m <= opts.max_urns)
                .ok_or(UrnError::CapExceeded {
                    what: "urn count for full collection",
                    limit: opts.max_urns as u128,
                })? as usize;
            for d in 1..=opts.max_draws {
                seen.insert(src.draw(st).0);
                if seen.len() == m {
                    return Ok(d as f64);
                }
            }
            Err(too_many)
        }
        Statistic::Distinct(k) => {
            for _ in 0..k {
                seen.insert(src.draw(st).0);
            }
            Ok(seen.len() as f64)
        }
        Statistic::Coverage(k) => {
            let mut mass = 0.0;
            for _ in 0..k {
                let (key, p) = src.draw(st);
                if seen.insert(key) {
                    mass += p;
                }
            }
            Ok(mass)
        }
    }
}

const TRIALS_PER_STREAM: u64 = 64;

fn run<S: Source>(src: &S, stat: Statistic, opts: &SimOptions) -> Result<SimResult, UrnError> {
    if opts.trials == 0 {
        return Err(UrnError::NoTrials);
    }
    let chunks = opts.trials.div_ceil(TRIALS_PER_STREAM);
    let parts: Vec<Result<(f64, f64), UrnError>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut st = src.state(opts.seed, i);
            let len = TRIALS_PER_STREAM.min(opts.trials - i * TRIALS_PER_STREAM);
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..len {
                let x = one_trial(src, &mut st, stat, opts)?;
                sum += x;
                sq += x * x;
            }
            Ok((sum, sq))
        })
        .collect();
    let (mut sum, mut sq) = (0.0, 0.0);
    for p in parts {
        let (a, b) = p?;
        sum += a;
        sq += b;
    }
    let t = opts.trials as f64;
    let mean = sum / t;
    let var = if opts.trials > 1 {
        ((sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SimResult {
        mean,
        stderr: (var / t).sqrt(),
        trials: opts.trials,
    })
}

/// Simulates a statistic on the urn model itself. Urns are identified by
/// (class, index within class), so classes are never expanded.
pub fn simulate(u: &UrnModel, stat: Statistic, opts: SimOptions) -> Result<SimResult, UrnError> {
    run(&UrnSource::new(u)?, stat, &opts)
}

/// Simulates a statistic on words of length `n` drawn by the exact sampler;
/// `word_count` is `|L_n|`, needed only for the full collection.
pub fn simulate_words(
    table: Arc<CountTable<BigUint>>,
    n: usize,
    word_count: Option<u64>,
    stat: Statistic,
    opts: SimOptions,
) -> Result<SimResult, UrnError> {
    if n > table.horizon() || table.total(n).is_zero() {
        return Err(UrnError::EmptySpectrum);
    }
    run(
        &WordSource {
            table,
            n,
            urns: word_count,
        },
        stat,
        &opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{builtin, normalize};
    use crate::sampler::exact_table;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn two_urns_first_collision() {
        let r = simulate(
            &UrnModel::uniform(2),
            Statistic::FirstCollision,
            SimOptions::new(100_000, 11),
        )
        .unwrap();
        assert!((r.mean - 2.5).abs() < 3.0 * r.stderr, "{r:?}");
    }

    #[test]
    fn three_urns_full_collection() {
        let r = simulate(
            &UrnModel::uniform(3),
            Statistic::FullCollection,
            SimOptions::new(100_000, 12),
        )
        .unwrap();
        assert!((r.mean - 5.5).abs() < 3.0 * r.stderr, "{r:?}");
    }

    #[test]
    fn distinct_zero_draws() {
        let r = simulate(&UrnModel::uniform(7), Statistic::Distinct(0), SimOptions::new(10, 1)).unwrap();
        assert_eq!((r.mean, r.stderr), (0.0, 0.0));
    }

    #[test]
    fn weighted_coverage_matches_formula() {
        let u = UrnModel::from_probabilities(&[q(1, 10), q(2, 10), q(7, 10)]).unwrap();
        let exact = super::super::expected_coverage(&u, 3).value;
        let r = simulate(&u, Statistic::Coverage(3), SimOptions::new(50_000, 5)).unwrap();
        assert!((r.mean - exact).abs() < 4.0 * r.stderr, "{r:?} vs {exact}");
    }

    #[test]
    fn deterministic_under_seed() {
        let u = UrnModel::uniform(50);
        let a = simulate(&u, Statistic::FirstCollision, SimOptions::new(1000, 9)).unwrap();
        let b = simulate(&u, Statistic::FirstCollision, SimOptions::new(1000, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_collection_cap() {
        let mut opts = SimOptions::new(1, 1);
        opts.max_urns = 10;
        let e = simulate(&UrnModel::uniform(11), Statistic::FullCollection, opts).unwrap_err();
        assert!(matches!(e, UrnError::CapExceeded { .. }));
        assert_eq!(
            simulate(&UrnModel::uniform(2), Statistic::Distinct(1), SimOptions::new(0, 1)),
            Err(UrnError::NoTrials)
        );
    }

    #[test]
    fn word_level_matches_urn_level() {
        // Motzkin n = 3 with weight 2 on the horizontal step: classes {(1/7, 3), (4/7, 1)}
        let g = normalize(&builtin::motzkin(q(2, 1))).unwrap();
        let t = Arc::new(exact_table(&g, &g.original().weights(), 3));
        let w = simulate_words(t, 3, Some(4), Statistic::FullCollection, SimOptions::new(20_000, 3)).unwrap();
        let u = UrnModel::from_weights([(q(2, 1), BigUint::from(3u32)), (q(8, 1), BigUint::from(1u32))]).unwrap();
        let r = simulate(&u, Statistic::FullCollection, SimOptions::new(20_000, 4)).unwrap();
        assert!((w.mean - r.mean).abs() < 4.0 * (w.stderr + r.stderr), "{w:?} {r:?}");
    }
}
