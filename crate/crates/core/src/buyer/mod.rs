//! The buyer's (bid) price of an American option.
//!
//! The buyer's value functions are piecewise linear but in general not
//! convex, so there is no dual recursion. A node where the buyer can never
//! reach a solvent exercise has value `+∞`, represented by `None`.

pub mod certificate;
pub mod hedge;

use crate::error::{Error, Result};
use crate::market::{Market, Payoff, PayoffProcess};
use crate::pl::PlFunction;
use crate::scalar::Scalar;

/// A piecewise linear function or the constant `+∞` (`None`).
pub type BuyerFn<S> = Option<PlFunction<S>>;

/// `u(y) = −ξ + (y + ζ)⁻ S^a − (y + ζ)⁺ S^b`: cash the buyer needs with `y`
/// shares to exercise, receive `(ξ, ζ)` and be solvent. `+∞` where exercise
/// is impossible.
pub fn buyer_payoff_fn<S: Scalar>(payoff: &Payoff<S>, bid: &S, ask: &S) -> BuyerFn<S> {
    match payoff {
        Payoff::NotExercisable => None,
        Payoff::Exercisable { cash, shares } => Some(
            PlFunction::from_parts(vec![(-shares.clone(), -cash.clone())], -ask.clone(), -bid.clone())
                .expect("single vertex"),
        ),
    }
}

/// Per-node functions of the buyer's recursion.
#[derive(Clone, Debug)]
pub struct BuyerValueFunctions<S> {
    pub u: Vec<Vec<BuyerFn<S>>>,
    pub z: Vec<Vec<BuyerFn<S>>>,
    pub v: Vec<Vec<BuyerFn<S>>>,
    pub w: Vec<Vec<BuyerFn<S>>>,
}

fn buyer_step<S: Scalar>(
    u: BuyerFn<S>,
    successors: &[&BuyerFn<S>],
    bid: &S,
    ask: &S,
) -> Result<(BuyerFn<S>, BuyerFn<S>, BuyerFn<S>)> {
    let mut w: BuyerFn<S> = Some(PlFunction::Bottom);
    for z in successors {
        w = match (w, z) {
            (Some(acc), Some(z)) => Some(acc.max(z)),
            _ => None,
        };
    }
    let v = match &w {
        Some(f) if f.is_bottom() => Some(PlFunction::Bottom),
        Some(f) => Some(f.gradient_restrict(bid, ask)?),
        None => None,
    };
    let z = match (&v, &u) {
        (Some(v), Some(u)) => Some(v.min(u)),
        (Some(v), None) => Some(v.clone()),
        (None, u) => u.clone(),
    };
    Ok((z, v, w))
}

fn check_payoff<S: Scalar>(market: &Market<S>, payoff: &PayoffProcess<S>) -> Result<()> {
    let tree = market.tree();
    let ok = payoff.levels().len() == tree.horizon() + 1
        && payoff.levels().iter().enumerate().all(|(t, l)| l.len() == tree.level_size(t));
    if ok {
        Ok(())
    } else {
        Err(Error::Shape("payoff does not match the market".into()))
    }
}

fn root_price<S: Scalar>(z0: &BuyerFn<S>) -> Result<S> {
    match z0 {
        Some(f) => f.eval(&S::zero()).map(|v| -v).ok_or(Error::Degenerate),
        None => Err(Error::Degenerate),
    }
}

/// Backward induction for the buyer; the bid price is `−z_0(0)`.
pub fn price_buyer<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
) -> Result<(S, BuyerValueFunctions<S>)> {
    check_payoff(market, payoff)?;
    let tree = market.tree();
    let horizon = tree.horizon();
    let u: Vec<Vec<BuyerFn<S>>> = (0..=horizon)
        .map(|t| {
            (0..tree.level_size(t))
                .map(|i| buyer_payoff_fn(payoff.at(t, i), market.bid(t, i), market.ask(t, i)))
                .collect()
        })
        .collect();
    let mut z = vec![Vec::new(); horizon + 1];
    let mut v = vec![Vec::new(); horizon + 1];
    let mut w = vec![Vec::new(); horizon + 1];
    z[horizon] = u[horizon].clone();
    v[horizon] = u[horizon].clone();
    w[horizon] = u[horizon].clone();
    for t in (0..horizon).rev() {
        for i in 0..tree.level_size(t) {
            let succ: Vec<&BuyerFn<S>> = tree.successors(t, i).iter().map(|&j| &z[t + 1][j]).collect();
            let (zi, vi, wi) = buyer_step(u[t][i].clone(), &succ, market.bid(t, i), market.ask(t, i))?;
            z[t].push(zi);
            v[t].push(vi);
            w[t].push(wi);
        }
    }
    let price = root_price(&z[0][0])?;
    Ok((price, BuyerValueFunctions { u, z, v, w }))
}

/// Bid price only, keeping two levels of functions in memory.
pub fn bid_price<S: Scalar>(market: &Market<S>, payoff: &PayoffProcess<S>) -> Result<S> {
    check_payoff(market, payoff)?;
    let tree = market.tree();
    let horizon = tree.horizon();
    let mut z: Vec<BuyerFn<S>> = (0..tree.level_size(horizon))
        .map(|i| buyer_payoff_fn(payoff.at(horizon, i), market.bid(horizon, i), market.ask(horizon, i)))
        .collect();
    for t in (0..horizon).rev() {
        let mut level = Vec::with_capacity(tree.level_size(t));
        for i in 0..tree.level_size(t) {
            let (bid, ask) = (market.bid(t, i), market.ask(t, i));
            let succ: Vec<&BuyerFn<S>> = tree.successors(t, i).iter().map(|&j| &z[j]).collect();
            let u = buyer_payoff_fn(payoff.at(t, i), bid, ask);
            level.push(buyer_step(u, &succ, bid, ask)?.0);
        }
        z = level;
    }
    root_price(&z[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{EventTree, PriceProcess};
    use crate::pl::parse_pl;
    use crate::scalar::{rat, Rational};

    #[test]
    fn payoff_function_shape() {
        let u = buyer_payoff_fn(&Payoff::Exercisable { cash: rat(3, 1), shares: rat(1, 1) }, &rat(8, 1), &rat(16, 1));
        assert_eq!(u, Some(parse_pl("pl[-16; -1:-3; -8]").unwrap()));
        assert_eq!(buyer_payoff_fn::<Rational>(&Payoff::NotExercisable, &rat(1, 1), &rat(1, 1)), None);
    }

    #[test]
    fn one_period_forward_contract() {
        // receive one share for 10 cash at time 1; bid is the lowest martingale value
        let tree = EventTree::new(vec![vec![vec![0, 1]]]).unwrap();
        let m = Market::new(
            tree,
            PriceProcess {
                bid: vec![vec![rat(10, 1)], vec![rat(8, 1), rat(12, 1)]],
                ask: vec![vec![rat(10, 1)], vec![rat(8, 1), rat(12, 1)]],
            },
        )
        .unwrap();
        let payoff = PayoffProcess::new(
            m.tree(),
            vec![
                vec![Payoff::NotExercisable],
                vec![Payoff::Exercisable { cash: rat(-10, 1), shares: rat(1, 1) }; 2],
            ],
        )
        .unwrap();
        assert_eq!(price_buyer(&m, &payoff).unwrap().0, rat(0, 1));
        assert_eq!(bid_price(&m, &payoff).unwrap(), rat(0, 1));
        let never = PayoffProcess::from_fn(m.tree(), |_, _| Payoff::NotExercisable);
        assert_eq!(bid_price(&m, &never).unwrap_err(), Error::Degenerate);
    }
}
