//! The seller's (ask) price of an American option.
//!
//! The primal recursion works with convex functions of the stock position:
//! `z_t(y)` is the least cash that, held together with `y` shares at time
//! `t`, lets the seller superhedge from then on. The dual recursion works
//! with their concave conjugates, functions of a price, and yields the
//! exercise strategy and martingale certificate in [`certificate`].

pub mod certificate;
pub mod hedge;
pub mod pure;

use crate::error::{Error, Result};
use crate::market::{Market, Payoff, PayoffProcess};
use crate::pl::{concave_cap, ConcavePl, ConvexPl, PlFunction};
use crate::scalar::Scalar;

/// `u(y) = ξ + (y − ζ)⁻ S^a − (y − ζ)⁺ S^b`: cash needed with `y` shares to
/// deliver `(ξ, ζ)` and stay solvent. Bottom where exercise is impossible.
pub fn seller_payoff_fn<S: Scalar>(payoff: &Payoff<S>, bid: &S, ask: &S) -> ConvexPl<S> {
    match payoff {
        Payoff::NotExercisable => ConvexPl::bottom(),
        Payoff::Exercisable { cash, shares } => ConvexPl::new(
            PlFunction::from_parts(vec![(shares.clone(), cash.clone())], -ask.clone(), -bid.clone())
                .expect("single vertex"),
        )
        .expect("ask ≥ bid gives a convex function"),
    }
}

/// Conjugate of [`seller_payoff_fn`]: `x ↦ ξ + xζ` on `[S^b, S^a]`.
pub fn seller_payoff_dual<S: Scalar>(payoff: &Payoff<S>, bid: &S, ask: &S) -> ConcavePl<S> {
    match payoff {
        Payoff::NotExercisable => ConcavePl::bottom(),
        Payoff::Exercisable { cash, shares } => ConcavePl::affine_on(
            bid.clone(),
            ask.clone(),
            cash.clone() + bid.clone() * shares.clone(),
            shares.clone(),
        )
        .expect("ask ≥ bid"),
    }
}

/// Per-node functions of the primal recursion (`w = v = z = u` at the horizon).
#[derive(Clone, Debug)]
pub struct SellerValueFunctions<S> {
    pub u: Vec<Vec<ConvexPl<S>>>,
    pub z: Vec<Vec<ConvexPl<S>>>,
    pub v: Vec<Vec<ConvexPl<S>>>,
    pub w: Vec<Vec<ConvexPl<S>>>,
}

/// Per-node functions of the dual recursion, the conjugates of the primal ones.
#[derive(Clone, Debug)]
pub struct SellerDualFunctions<S> {
    pub u: Vec<Vec<ConcavePl<S>>>,
    pub z: Vec<Vec<ConcavePl<S>>>,
    pub v: Vec<Vec<ConcavePl<S>>>,
    pub w: Vec<Vec<ConcavePl<S>>>,
}

fn primal_step<S: Scalar>(
    u: ConvexPl<S>,
    successors: &[&ConvexPl<S>],
    bid: &S,
    ask: &S,
) -> Result<(ConvexPl<S>, ConvexPl<S>, ConvexPl<S>)> {
    let w = successors
        .iter()
        .fold(ConvexPl::bottom(), |acc, z| acc.max(z));
    let v = w.gradient_restrict(bid, ask)?;
    let z = v.max(&u);
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

/// Primal backward induction; the ask price is `z_0(0)`.
pub fn price_seller_primal<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
) -> Result<(S, SellerValueFunctions<S>)> {
    check_payoff(market, payoff)?;
    let tree = market.tree();
    let horizon = tree.horizon();
    let u: Vec<Vec<ConvexPl<S>>> = (0..=horizon)
        .map(|t| {
            (0..tree.level_size(t))
                .map(|i| seller_payoff_fn(payoff.at(t, i), market.bid(t, i), market.ask(t, i)))
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
            let succ: Vec<&ConvexPl<S>> = tree.successors(t, i).iter().map(|&j| &z[t + 1][j]).collect();
            let (zi, vi, wi) = primal_step(u[t][i].clone(), &succ, market.bid(t, i), market.ask(t, i))?;
            z[t].push(zi);
            v[t].push(vi);
            w[t].push(wi);
        }
    }
    let price = z[0][0].eval(&S::zero()).ok_or(Error::Degenerate)?;
    Ok((price, SellerValueFunctions { u, z, v, w }))
}

/// Ask price only, keeping two levels of functions in memory. Suitable for
/// large recombinant lattices.
pub fn ask_price<S: Scalar>(market: &Market<S>, payoff: &PayoffProcess<S>) -> Result<S> {
    check_payoff(market, payoff)?;
    let tree = market.tree();
    let horizon = tree.horizon();
    let mut z: Vec<ConvexPl<S>> = (0..tree.level_size(horizon))
        .map(|i| seller_payoff_fn(payoff.at(horizon, i), market.bid(horizon, i), market.ask(horizon, i)))
        .collect();
    for t in (0..horizon).rev() {
        let mut level = Vec::with_capacity(tree.level_size(t));
        for i in 0..tree.level_size(t) {
            let (bid, ask) = (market.bid(t, i), market.ask(t, i));
            let succ: Vec<&ConvexPl<S>> = tree.successors(t, i).iter().map(|&j| &z[j]).collect();
            let u = seller_payoff_fn(payoff.at(t, i), bid, ask);
            level.push(primal_step(u, &succ, bid, ask)?.0);
        }
        z = level;
    }
    z[0].eval(&S::zero()).ok_or(Error::Degenerate)
}

/// Dual backward induction; the ask price is `max_x Z_0(x)`.
pub fn price_seller_dual<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
) -> Result<(S, SellerDualFunctions<S>)> {
    check_payoff(market, payoff)?;
    let tree = market.tree();
    let horizon = tree.horizon();
    let u: Vec<Vec<ConcavePl<S>>> = (0..=horizon)
        .map(|t| {
            (0..tree.level_size(t))
                .map(|i| seller_payoff_dual(payoff.at(t, i), market.bid(t, i), market.ask(t, i)))
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
            let succ: Vec<&ConcavePl<S>> = tree.successors(t, i).iter().map(|&j| &z[t + 1][j]).collect();
            let wi = concave_cap(&succ);
            let vi = wi.domain_restrict(market.bid(t, i), market.ask(t, i))?;
            let zi = concave_cap(&[&vi, &u[t][i]]);
            z[t].push(zi);
            v[t].push(vi);
            w[t].push(wi);
        }
    }
    let price = z[0][0].max_value().ok_or(Error::Degenerate)?;
    Ok((price, SellerDualFunctions { u, z, v, w }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{EventTree, PriceProcess};
    use crate::pl::parse_pl;
    use crate::scalar::{rat, Rational};

    #[test]
    fn payoff_functions() {
        let u = seller_payoff_fn(&Payoff::cash(rat(3, 1)), &rat(8, 1), &rat(16, 1));
        assert_eq!(u.as_pl(), &parse_pl("pl[-16; 0:3; -8]").unwrap());
        let flat = seller_payoff_fn(&Payoff::cash(rat(0, 1)), &rat(5, 1), &rat(5, 1));
        assert_eq!(flat.as_pl(), &PlFunction::linear(rat(-5, 1), rat(0, 1)));
        assert!(seller_payoff_fn::<Rational>(&Payoff::NotExercisable, &rat(1, 1), &rat(1, 1)).is_bottom());
        let dual = seller_payoff_dual(&Payoff::Exercisable { cash: rat(3, 1), shares: rat(-1, 1) }, &rat(8, 1), &rat(16, 1));
        assert_eq!(dual.eval(&rat(10, 1)), Some(rat(-7, 1)));
        let u = seller_payoff_fn(&Payoff::Exercisable { cash: rat(3, 1), shares: rat(-1, 1) }, &rat(8, 1), &rat(16, 1));
        assert_eq!(u.dual(), dual);
    }

    #[test]
    fn zero_payoff_has_zero_price() {
        let tree = EventTree::new(vec![vec![vec![0, 1]]]).unwrap();
        let m = Market::new(
            tree,
            PriceProcess {
                bid: vec![vec![rat(10, 1)], vec![rat(8, 1), rat(11, 1)]],
                ask: vec![vec![rat(10, 1)], vec![rat(9, 1), rat(13, 1)]],
            },
        )
        .unwrap();
        let payoff = PayoffProcess::from_fn(m.tree(), |_, _| Payoff::cash(rat(0, 1)));
        assert_eq!(price_seller_primal(&m, &payoff).unwrap().0, rat(0, 1));
        assert_eq!(price_seller_dual(&m, &payoff).unwrap().0, rat(0, 1));
        assert_eq!(ask_price(&m, &payoff).unwrap(), rat(0, 1));
        let never = PayoffProcess::from_fn(m.tree(), |_, _| Payoff::NotExercisable);
        assert_eq!(price_seller_dual(&m, &never).unwrap_err(), Error::Degenerate);
        assert_eq!(price_seller_primal(&m, &never).unwrap_err(), Error::Degenerate);
    }
}
