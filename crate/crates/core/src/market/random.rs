//! Random arbitrage-free trees for property tests and cross-checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::market::model_file::Model;
use crate::market::{EventTree, Market, Payoff, PayoffProcess, PriceProcess};
use crate::scalar::{rat, Rational};

#[derive(Clone, Debug)]
pub struct RandomTreeConfig {
    pub max_horizon: usize,
    pub max_branching: usize,
    /// Probability that a non-terminal node is exercisable.
    pub exercise_prob: f64,
    /// Allow stock delivery (`ζ ≠ 0`) in payoffs.
    pub physical: bool,
}

impl Default for RandomTreeConfig {
    fn default() -> Self {
        RandomTreeConfig {
            max_horizon: 3,
            max_branching: 3,
            exercise_prob: 0.6,
            physical: true,
        }
    }
}

const DOWN: [(i64, i64); 3] = [(3, 5), (4, 5), (9, 10)];
const UP: [(i64, i64); 3] = [(11, 10), (6, 5), (7, 5)];
const MIDDLE: [(i64, i64); 3] = [(4, 5), (1, 1), (6, 5)];
// bid and ask offsets from the mid price; their sum stays within 20%
const HALF_SPREAD: [(i64, i64); 4] = [(0, 1), (0, 1), (1, 20), (1, 10)];
const SHARES: [(i64, i64); 6] = [(-1, 1), (-1, 2), (0, 1), (0, 1), (1, 2), (1, 1)];

fn pick(rng: &mut impl Rng, set: &[(i64, i64)]) -> Rational {
    let &(n, d) = set.choose(rng).expect("nonempty");
    rat(n, d)
}

/// A random tree whose mid prices form a martingale under some equivalent
/// measure, with bid and ask around the mid and a random payoff.
pub fn random_model(rng: &mut impl Rng, cfg: &RandomTreeConfig) -> Model<Rational> {
    let horizon = rng.gen_range(1..=cfg.max_horizon.max(1));
    let mut mids: Vec<Vec<Rational>> = vec![vec![rat(rng.gen_range(8..=20), 1)]];
    let mut succ: Vec<Vec<Vec<usize>>> = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let mut next = Vec::new();
        let mut level = Vec::with_capacity(mids[t].len());
        for m in &mids[t] {
            let b = rng.gen_range(1..=cfg.max_branching.max(1));
            let mut kids = match b {
                1 => vec![m.clone()],
                2 => vec![m * pick(rng, &DOWN), m * pick(rng, &UP)],
                _ => vec![m * pick(rng, &DOWN), m * pick(rng, &MIDDLE), m * pick(rng, &UP)],
            };
            kids.shuffle(rng);
            level.push((next.len()..next.len() + kids.len()).collect());
            next.extend(kids);
        }
        succ.push(level);
        mids.push(next);
    }
    let tree = EventTree::new(succ).expect("generated tree is well formed");
    let one = rat(1, 1);
    let mut bid = Vec::new();
    let mut ask = Vec::new();
    for level in &mids {
        let mut b = Vec::new();
        let mut a = Vec::new();
        for m in level {
            b.push(m * (&one - pick(rng, &HALF_SPREAD)));
            a.push(m * (&one + pick(rng, &HALF_SPREAD)));
        }
        bid.push(b);
        ask.push(a);
    }
    let market = Market::new(tree, PriceProcess { bid, ask }).expect("valid spreads");
    let mut values = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let mut level = Vec::new();
        for _ in 0..market.tree().level_size(t) {
            let exercisable = t == horizon || rng.gen_bool(cfg.exercise_prob);
            level.push(if exercisable {
                let cash = rat(rng.gen_range(-4..=16), 2);
                let shares = if cfg.physical { pick(rng, &SHARES) } else { rat(0, 1) };
                Payoff::Exercisable { cash, shares }
            } else {
                Payoff::NotExercisable
            });
        }
        values.push(level);
    }
    let payoff = PayoffProcess::new(market.tree(), values).expect("shape matches");
    Model { market, payoff }
}
