//! Helpers shared by the integration tests.

use amtc::market::{EventTree, Market, MixedStoppingTime, Payoff, PayoffProcess, PriceProcess};
use amtc::scalar::{rat, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random mixed stopping time that only puts mass where `allowed` holds
/// (and always at the horizon): each allowed node exercises a random
/// fraction of the mass still alive.
#[allow(dead_code)]
pub fn random_chi(rng: &mut impl Rng, tree: &EventTree, allowed: impl Fn(usize, usize) -> bool) -> MixedStoppingTime<Rational> {
    const FRACTIONS: [(i64, i64); 5] = [(0, 1), (0, 1), (1, 4), (1, 2), (1, 1)];
    let horizon = tree.horizon();
    let mut alive = vec![vec![rat(1, 1)]];
    let mut chi: Vec<Vec<Rational>> = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let mut masses = Vec::with_capacity(tree.level_size(t));
        let mut next = vec![rat(0, 1); if t < horizon { tree.level_size(t + 1) } else { 0 }];
        for i in 0..tree.level_size(t) {
            let rem = alive[t][i].clone();
            let mass = if t == horizon {
                rem.clone()
            } else if allowed(t, i) {
                let &(n, d) = FRACTIONS.choose(rng).expect("nonempty");
                &rem * rat(n, d)
            } else {
                rat(0, 1)
            };
            if t < horizon {
                for &j in tree.successors(t, i) {
                    next[j] = &rem - &mass;
                }
            }
            masses.push(mass);
        }
        chi.push(masses);
        alive.push(next);
    }
    MixedStoppingTime::new(tree, chi).expect("masses sum to one on every path")
}

/// The two-step tree with a spread at the up node and a cash payoff of 3
/// at `u`, 9 at `uu`. Level 1: u, d; level 2: uu, ud, du, dd.
#[allow(dead_code)]
pub fn example() -> (Market<Rational>, PayoffProcess<Rational>) {
    let tree = EventTree::new(vec![vec![vec![0, 1]], vec![vec![0, 1], vec![2, 3]]]).unwrap();
    let r = |v: &[i64]| v.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>();
    let prices = PriceProcess {
        bid: vec![r(&[10]), r(&[8, 6]), r(&[16, 10, 10, 4])],
        ask: vec![r(&[10]), r(&[16, 6]), r(&[16, 10, 10, 4])],
    };
    let market = Market::new(tree, prices).unwrap();
    let cash = [vec![0], vec![3, 0], vec![9, 0, 0, 0]];
    let payoff = PayoffProcess::from_fn(market.tree(), |t, i| Payoff::cash(rat(cash[t][i], 1)));
    (market, payoff)
}
