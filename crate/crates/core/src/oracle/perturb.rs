use crate::error::{Error, Result};
use crate::market::{
    verify_approx_martingale, Market, MartingalePair, MeasureTag, MixedStoppingTime, PayoffProcess,
};
use crate::scalar::Scalar;
use crate::seller::certificate::stopped_payoff_value;

#[derive(Clone, Debug)]
pub struct Perturbed<S> {
    pub pair: MartingalePair<S>,
    /// Weight of the equivalent martingale in the blend.
    pub epsilon: S,
    /// `E_{P^δ}((ξ + S^δ ζ)_χ)`.
    pub value: S,
}

fn invalid(msg: &str) -> Error {
    Error::InvalidModel(msg.to_string())
}

/// Blends an approximate martingale `(P̄, S̄)` for `chi` with an equivalent
/// martingale `(P, S)`: `P^δ = (1 − ε)P̄ + εP` and `S^δ` the correspondingly
/// weighted average of `S̄` and `S` at each node. The result has strictly
/// positive probabilities and its stopped payoff expectation is within
/// `delta` of the original. `ε` is half the largest weight that guarantees
/// this, and `½` when both expectations agree.
pub fn perturb_to_equivalent<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    chi: &MixedStoppingTime<S>,
    approx: &MartingalePair<S>,
    equivalent: &MartingalePair<S>,
    delta: &S,
) -> Result<Perturbed<S>> {
    let tree = market.tree();
    if *delta <= S::zero() {
        return Err(invalid("the tolerance must be positive"));
    }
    if !verify_approx_martingale(market, approx, chi).ok {
        return Err(invalid("the first pair is not an approximate martingale for the stopping time"));
    }
    if equivalent.tag() != MeasureTag::Equivalent {
        return Err(invalid("the second pair needs strictly positive probabilities"));
    }
    let (p, s) = (equivalent.measure(), equivalent.price());
    for (t, i) in tree.nodes() {
        if !S::le_tol(market.bid(t, i), &s[t][i]) || !S::le_tol(&s[t][i], market.ask(t, i)) {
            return Err(invalid("the second pair leaves the bid-ask band"));
        }
        if t < tree.horizon() {
            let mean = tree
                .successors(t, i)
                .iter()
                .fold(S::zero(), |acc, &j| acc + p[t + 1][j].clone() * s[t + 1][j].clone());
            if !S::near(&mean, &(p[t][i].clone() * s[t][i].clone())) {
                return Err(invalid("the second pair is not a martingale"));
            }
        }
    }
    let original = stopped_payoff_value(market, payoff, chi, approx)
        .ok_or_else(|| invalid("the stopping time exercises where the payoff is not defined"))?;
    let other = stopped_payoff_value(market, payoff, chi, equivalent)
        .ok_or_else(|| invalid("the stopping time exercises where the payoff is not defined"))?;
    let gap = S::abs(&(other.clone() - original.clone()));
    let two = S::from_i64(2);
    let epsilon = if gap.is_zero_value() {
        S::one() / two
    } else {
        let bound = delta.clone() / gap;
        (if bound < S::one() { bound } else { S::one() }) / two
    };
    let keep = S::one() - epsilon.clone();
    let (pb, sb) = (approx.measure(), approx.price());
    let mut measure = Vec::with_capacity(tree.horizon() + 1);
    let mut price = Vec::with_capacity(tree.horizon() + 1);
    for t in 0..=tree.horizon() {
        let mut ml = Vec::with_capacity(tree.level_size(t));
        let mut pl = Vec::with_capacity(tree.level_size(t));
        for i in 0..tree.level_size(t) {
            let a = keep.clone() * pb[t][i].clone();
            let b = epsilon.clone() * p[t][i].clone();
            let m = a.clone() + b.clone();
            pl.push((a * sb[t][i].clone() + b * s[t][i].clone()) / m.clone());
            ml.push(m);
        }
        measure.push(ml);
        price.push(pl);
    }
    let pair = MartingalePair::new(tree, measure, price)?;
    let value = stopped_payoff_value(market, payoff, chi, &pair).expect("checked above");
    Ok(Perturbed { pair, epsilon, value })
}
