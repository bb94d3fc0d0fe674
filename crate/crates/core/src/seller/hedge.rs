use crate::error::{Error, Result};
use crate::market::{liquidation_value, Market, Payoff, PayoffProcess, Portfolio, Strategy};
use crate::pl::{PlFunction, Polyline};
use crate::scalar::Scalar;
use crate::seller::SellerValueFunctions;

/// Cash paid to buy `x` shares (negative `x` sells, and the cost is negative).
fn trade_cost<S: Scalar>(x: &S, bid: &S, ask: &S) -> S {
    if *x >= S::zero() {
        ask.clone() * x.clone()
    } else {
        bid.clone() * x.clone()
    }
}

/// Abscissae where the polyline crosses the level `alpha`.
fn level_crossings<S: Scalar>(q: &Polyline<S>, alpha: &S) -> Vec<S> {
    let pts = q.points();
    let mut out = Vec::new();
    let (x0, y0) = &pts[0];
    if !q.left_slope().is_zero_value() {
        let x = x0.clone() + (alpha.clone() - y0.clone()) / q.left_slope().clone();
        if x < *x0 {
            out.push(x);
        }
    }
    for w in pts.windows(2) {
        let ((xa, ya), (xb, yb)) = (&w[0], &w[1]);
        let da = ya.clone() - alpha.clone();
        let db = yb.clone() - alpha.clone();
        if (da < S::zero()) != (db < S::zero()) && da != db {
            out.push(xa.clone() + (alpha.clone() - ya.clone()) * (xb.clone() - xa.clone()) / (yb.clone() - ya.clone()));
        }
    }
    let (xn, yn) = pts.last().expect("nonempty");
    if !q.right_slope().is_zero_value() {
        let x = xn.clone() + (alpha.clone() - yn.clone()) / q.right_slope().clone();
        if x > *xn {
            out.push(x);
        }
    }
    out
}

/// Rebalances `holding` into `{(α', β') : α' ≥ w(β')}` by trading stock at
/// the quoted prices, ending with the stock position of least magnitude
/// (ties go to the smaller trade). `w = Bottom` means any position is
/// acceptable, so the stock is closed out. When no trade is feasible, which
/// only happens through rounding, the trade minimising the shortfall is used.
pub(crate) fn rebalance<S: Scalar>(holding: &Portfolio<S>, w: &PlFunction<S>, bid: &S, ask: &S) -> Portfolio<S> {
    let (alpha, beta) = (&holding.cash, &holding.shares);
    let apply = |x: S| Portfolio::new(alpha.clone() - trade_cost(&x, bid, ask), beta.clone() + x);
    let Some(wf) = w.finite() else {
        return apply(-beta.clone());
    };
    let cost = PlFunction::from_parts(vec![(S::zero(), S::zero())], bid.clone(), ask.clone()).expect("one vertex");
    let q = cost.add(&PlFunction::Finite(wf.clone()).shift(beta));
    let q = q.finite().expect("sum of finite functions").clone();
    let mut candidates = vec![S::zero(), -beta.clone()];
    candidates.extend(q.points().iter().map(|p| p.0.clone()));
    candidates.extend(level_crossings(&q, alpha));
    let value = |x: &S| q.eval(x);
    let feasible: Vec<&S> = candidates.iter().filter(|x| S::le_tol(&value(x), alpha)).collect();
    let best = if feasible.is_empty() {
        candidates
            .iter()
            .min_by(|a, b| value(a).partial_cmp(&value(b)).expect("ordered scalars"))
            .expect("nonempty")
            .clone()
    } else {
        let key = |x: &S| (S::abs(&(beta.clone() + x.clone())), S::abs(x));
        (*feasible
            .iter()
            .min_by(|a, b| key(a).partial_cmp(&key(b)).expect("ordered scalars"))
            .expect("nonempty"))
        .clone()
    };
    apply(best)
}

/// Builds the seller's superhedging strategy from the primal value functions,
/// starting from `initial`, which must lie in the epigraph of `z_0`.
pub fn hedge_seller<S: Scalar>(
    market: &Market<S>,
    fns: &SellerValueFunctions<S>,
    initial: Portfolio<S>,
) -> Result<Strategy<S>> {
    let tree = market.tree();
    tree.require_tree()?;
    match fns.z[0][0].eval(&initial.shares) {
        Some(need) if S::le_tol(&need, &initial.cash) => {}
        _ => {
            return Err(Error::InsufficientEndowment {
                cash: initial.cash.to_f64(),
                shares: initial.shares.to_f64(),
            })
        }
    }
    let mut next: Vec<Vec<Portfolio<S>>> = Vec::with_capacity(tree.horizon());
    for t in 0..tree.horizon() {
        let level = (0..tree.level_size(t))
            .map(|i| {
                let entering = if t == 0 {
                    &initial
                } else {
                    &next[t - 1][tree.parent(t, i).expect("tree node has a parent")]
                };
                rebalance(entering, fns.w[t][i].as_pl(), market.bid(t, i), market.ask(t, i))
            })
            .collect();
        next.push(level);
    }
    Strategy::new(tree, initial, next)
}

/// Nodes where the holdings entering the node cannot cover delivery of the
/// payoff: `(t, i, liquidation value after delivery)`.
pub fn seller_superhedge_violations<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    strategy: &Strategy<S>,
) -> Result<Vec<(usize, usize, f64)>> {
    let tree = market.tree();
    let mut out = Vec::new();
    for (t, i) in tree.nodes() {
        let Payoff::Exercisable { cash, shares } = payoff.at(t, i) else { continue };
        let h = strategy.holding(tree, t, i);
        let v = liquidation_value(
            &(h.cash.clone() - cash.clone()),
            &(h.shares.clone() - shares.clone()),
            market.bid(t, i),
            market.ask(t, i),
        )?;
        if !S::le_tol(&S::zero(), &v) {
            out.push((t, i, v.to_f64()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl::parse_pl;
    use crate::scalar::{rat, Rational};

    fn p(c: Rational, s: Rational) -> Portfolio<Rational> {
        Portfolio::new(c, s)
    }

    #[test]
    fn holds_when_already_flat_and_feasible() {
        let w = parse_pl("pl[-16; 0:0; -8]").unwrap();
        let out = rebalance(&p(rat(5, 1), rat(0, 1)), &w, &rat(10, 1), &rat(10, 1));
        assert_eq!(out, p(rat(5, 1), rat(0, 1)));
    }

    #[test]
    fn bottom_closes_the_position() {
        let out = rebalance(&p(rat(1, 1), rat(2, 1)), &PlFunction::Bottom, &rat(3, 1), &rat(4, 1));
        assert_eq!(out, p(rat(7, 1), rat(0, 1)));
        let out = rebalance(&p(rat(1, 1), rat(-2, 1)), &PlFunction::Bottom, &rat(3, 1), &rat(4, 1));
        assert_eq!(out, p(rat(-7, 1), rat(0, 1)));
    }

    #[test]
    fn sells_stock_it_no_longer_needs() {
        let w = parse_pl("pl[-10; 1/2:-5; 0]").unwrap();
        let out = rebalance(&p(rat(-5, 1), rat(1, 1)), &w, &rat(10, 1), &rat(10, 1));
        assert_eq!(out, p(rat(5, 1), rat(0, 1)));
    }

    #[test]
    fn buys_up_to_the_required_position() {
        // short one share: cover it at the ask
        let w = parse_pl("pl[-12; 0:0; -8]").unwrap();
        let out = rebalance(&p(rat(20, 1), rat(-1, 1)), &w, &rat(8, 1), &rat(12, 1));
        assert_eq!(out, p(rat(8, 1), rat(0, 1)));
    }
}
