use crate::error::{Error, Result};
use crate::market::{Market, PayoffProcess};
use crate::scalar::Scalar;

/// Frictionless American value `Z_t = max{ξ_t + S_t ζ_t, E*(Z_{t+1} | F_t)}`
/// under the unique risk-neutral weights of a zero-spread market where
/// every node has at most two successors. Works on recombinant lattices.
pub fn snell_envelope<S: Scalar>(market: &Market<S>, payoff: &PayoffProcess<S>) -> Result<S> {
    let tree = market.tree();
    for (t, i) in tree.nodes() {
        if !S::near(market.bid(t, i), market.ask(t, i)) {
            return Err(Error::Unsupported(format!("nonzero spread at ({t}, {i})")));
        }
    }
    let price = |t: usize, i: usize| market.bid(t, i).clone();
    let horizon = tree.horizon();
    let mut z: Vec<Option<S>> = (0..tree.level_size(horizon))
        .map(|i| payoff.at(horizon, i).value_at(&price(horizon, i)))
        .collect();
    for t in (0..horizon).rev() {
        let mut level = Vec::with_capacity(tree.level_size(t));
        for i in 0..tree.level_size(t) {
            let s = price(t, i);
            let succ = tree.successors(t, i);
            let cont = match succ {
                [j] => {
                    if !S::near(&price(t + 1, *j), &s) {
                        return Err(Error::Arbitrage);
                    }
                    z[*j].clone()
                }
                [a, b] => {
                    let (mut lo, mut hi) = (*a, *b);
                    if price(t + 1, lo) > price(t + 1, hi) {
                        std::mem::swap(&mut lo, &mut hi);
                    }
                    let (sl, sh) = (price(t + 1, lo), price(t + 1, hi));
                    if !(sl < s && s < sh) {
                        return Err(Error::Arbitrage);
                    }
                    let q = (s.clone() - sl.clone()) / (sh - sl);
                    match (&z[lo], &z[hi]) {
                        (Some(l), Some(h)) => Some(q.clone() * h.clone() + (S::one() - q) * l.clone()),
                        _ => None,
                    }
                }
                _ => return Err(Error::Unsupported("more than two successors: incomplete market".into())),
            };
            let exercise = payoff.at(t, i).value_at(&s);
            level.push(match (cont, exercise) {
                (Some(c), Some(e)) => Some(if e > c { e } else { c }),
                (c, e) => c.or(e),
            });
        }
        z = level;
    }
    z[0].clone().ok_or(Error::Degenerate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{EventTree, Payoff, PriceProcess};
    use crate::scalar::rat;

    #[test]
    fn one_period_put() {
        let tree = EventTree::new(vec![vec![vec![0, 1]]]).unwrap();
        let s = vec![vec![rat(10, 1)], vec![rat(8, 1), rat(12, 1)]];
        let m = Market::new(tree, PriceProcess { bid: s.clone(), ask: s }).unwrap();
        // cash-settled put struck at 11: exercise now gives 1, waiting ½·3 + ½·0
        let cash = [vec![1], vec![3, 0]];
        let payoff = PayoffProcess::from_fn(m.tree(), |t, i| Payoff::cash(rat(cash[t][i], 1)));
        assert_eq!(snell_envelope(&m, &payoff).unwrap(), rat(3, 2));
        // with delivery the holder must also pay 11 for a share worth 12
        let physical = PayoffProcess::from_fn(m.tree(), |_, _| Payoff::Exercisable { cash: rat(11, 1), shares: rat(-1, 1) });
        assert_eq!(snell_envelope(&m, &physical).unwrap(), rat(1, 1));
        let zero = PayoffProcess::from_fn(m.tree(), |_, _| Payoff::cash(rat(0, 1)));
        assert_eq!(snell_envelope(&m, &zero).unwrap(), rat(0, 1));
    }

    #[test]
    fn rejects_spreads_and_three_successors() {
        let tree = EventTree::new(vec![vec![vec![0, 1, 2]]]).unwrap();
        let s = vec![vec![rat(10, 1)], vec![rat(8, 1), rat(10, 1), rat(12, 1)]];
        let m = Market::new(tree.clone(), PriceProcess { bid: s.clone(), ask: s.clone() }).unwrap();
        let zero = PayoffProcess::from_fn(m.tree(), |_, _| Payoff::cash(rat(0, 1)));
        assert!(matches!(snell_envelope(&m, &zero), Err(Error::Unsupported(_))));
        let mut ask = s.clone();
        ask[0][0] = rat(11, 1);
        let m = Market::new(tree, PriceProcess { bid: s, ask }).unwrap();
        assert!(matches!(snell_envelope(&m, &zero), Err(Error::Unsupported(_))));
    }
}
