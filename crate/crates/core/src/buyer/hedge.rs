use crate::buyer::{BuyerFn, BuyerValueFunctions};
use crate::error::{Error, Result};
use crate::market::{liquidation_value, Market, Payoff, PayoffProcess, Portfolio, PureStoppingTime, Strategy};
use crate::scalar::Scalar;
use crate::seller::hedge::rebalance;

/// The buyer's trading strategy together with the exercise time it is built
/// around.
#[derive(Clone, Debug)]
pub struct BuyerHedge<S> {
    pub strategy: Strategy<S>,
    pub stopping: PureStoppingTime,
}

fn in_epigraph<S: Scalar>(f: &BuyerFn<S>, p: &Portfolio<S>) -> bool {
    match f {
        None => false,
        Some(f) => f.eval(&p.shares).is_none_or(|need| S::le_tol(&need, &p.cash)),
    }
}

/// Builds the buyer's strategy and stopping time from the value functions,
/// starting from `initial`, which must lie in the epigraph of `z_0`. The
/// buyer exercises at the first node where the holdings cover the payoff
/// function `u`; from then on the holdings are left unchanged.
pub fn hedge_buyer<S: Scalar>(
    market: &Market<S>,
    fns: &BuyerValueFunctions<S>,
    initial: Portfolio<S>,
) -> Result<BuyerHedge<S>> {
    let tree = market.tree();
    tree.require_tree()?;
    if !in_epigraph(&fns.z[0][0], &initial) {
        return Err(Error::InsufficientEndowment {
            cash: initial.cash.to_f64(),
            shares: initial.shares.to_f64(),
        });
    }
    let horizon = tree.horizon();
    let mut stop: Vec<Vec<bool>> = (0..=horizon).map(|t| vec![false; tree.level_size(t)]).collect();
    // exercised[t][i]: the path to (t, i) has already stopped, at or before t
    let mut exercised: Vec<Vec<bool>> = stop.clone();
    let mut next: Vec<Vec<Portfolio<S>>> = Vec::with_capacity(horizon);
    for t in 0..=horizon {
        let mut level = Vec::with_capacity(tree.level_size(t));
        for i in 0..tree.level_size(t) {
            let entering = if t == 0 {
                initial.clone()
            } else {
                next[t - 1][tree.parent(t, i).expect("tree node has a parent")].clone()
            };
            let before = t > 0 && exercised[t - 1][tree.parent(t, i).expect("tree node has a parent")];
            if !before && (t == horizon || in_epigraph(&fns.u[t][i], &entering)) {
                if fns.u[t][i].is_none() {
                    return Err(Error::Degenerate);
                }
                stop[t][i] = true;
            }
            exercised[t][i] = before || stop[t][i];
            if t == horizon {
                continue;
            }
            if exercised[t][i] {
                level.push(entering);
                continue;
            }
            let w = fns.w[t][i].as_ref().ok_or(Error::Degenerate)?;
            level.push(rebalance(&entering, w, market.bid(t, i), market.ask(t, i)));
        }
        if t < horizon {
            next.push(level);
        }
    }
    Ok(BuyerHedge {
        strategy: Strategy::new(tree, initial, next)?,
        stopping: PureStoppingTime::new(tree, stop)?,
    })
}

/// Nodes where the buyer exercises but the holdings plus the payoff cannot
/// be liquidated at a nonnegative value: `(t, i, liquidation value)`.
pub fn buyer_superhedge_violations<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    hedge: &BuyerHedge<S>,
) -> Result<Vec<(usize, usize, f64)>> {
    let tree = market.tree();
    let mut out = Vec::new();
    for (t, i) in tree.nodes() {
        if !hedge.stopping.stops_at(t, i) {
            continue;
        }
        let Payoff::Exercisable { cash, shares } = payoff.at(t, i) else {
            out.push((t, i, f64::NEG_INFINITY));
            continue;
        };
        let h = hedge.strategy.holding(tree, t, i);
        let v = liquidation_value(
            &(h.cash.clone() + cash.clone()),
            &(h.shares.clone() + shares.clone()),
            market.bid(t, i),
            market.ask(t, i),
        )?;
        if !S::le_tol(&S::zero(), &v) {
            out.push((t, i, v.to_f64()));
        }
    }
    Ok(out)
}
