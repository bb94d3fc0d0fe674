use crate::error::{invalid_spread, Error, Result};
use crate::market::{EventTree, Market};
use crate::scalar::Scalar;

/// Cash and stock holdings.
#[derive(Clone, Debug, PartialEq)]
pub struct Portfolio<S> {
    pub cash: S,
    pub shares: S,
}

impl<S: Scalar> Portfolio<S> {
    pub fn new(cash: S, shares: S) -> Self {
        Portfolio { cash, shares }
    }

    pub fn zero() -> Self {
        Portfolio::new(S::zero(), S::zero())
    }

    pub fn minus(&self, other: &Self) -> Self {
        Portfolio::new(
            self.cash.clone() - other.cash.clone(),
            self.shares.clone() - other.shares.clone(),
        )
    }
}

/// `γ + S^b δ⁺ − S^a δ⁻`: cash raised by closing the position at once.
pub fn liquidation_value<S: Scalar>(cash: &S, shares: &S, bid: &S, ask: &S) -> Result<S> {
    if bid > ask || *bid <= S::zero() {
        return Err(invalid_spread(bid, ask));
    }
    let price = if *shares >= S::zero() { bid } else { ask };
    Ok(cash.clone() + price.clone() * shares.clone())
}

/// Predictable trading strategy on a tree: the initial holdings and, for
/// every non-terminal node, the holdings chosen there and carried into all of
/// its successors.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy<S> {
    initial: Portfolio<S>,
    next: Vec<Vec<Portfolio<S>>>,
}

impl<S: Scalar> Strategy<S> {
    pub fn new(tree: &EventTree, initial: Portfolio<S>, next: Vec<Vec<Portfolio<S>>>) -> Result<Self> {
        tree.require_tree()?;
        let fits = next.len() == tree.horizon()
            && next.iter().enumerate().all(|(t, l)| l.len() == tree.level_size(t));
        if !fits {
            return Err(Error::Shape("strategy does not match the tree".into()));
        }
        Ok(Strategy { initial, next })
    }

    pub fn initial(&self) -> &Portfolio<S> {
        &self.initial
    }

    /// Holdings entering time `t` at node `(t, i)`, fixed one step earlier.
    pub fn holding(&self, tree: &EventTree, t: usize, i: usize) -> &Portfolio<S> {
        if t == 0 {
            &self.initial
        } else {
            let p = tree.parent(t, i).expect("tree node has a parent");
            &self.next[t - 1][p]
        }
    }

    /// Holdings chosen at node `(t, i)` for the next step.
    pub fn chosen(&self, t: usize, i: usize) -> &Portfolio<S> {
        &self.next[t][i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfFinancingReport {
    pub ok: bool,
    /// Nodes where rebalancing had negative liquidation value, with that value.
    pub violations: Vec<(usize, usize, f64)>,
}

/// Checks `ϑ_t(α_t − α_{t+1}, β_t − β_{t+1}) ≥ 0` at every non-terminal node.
pub fn is_self_financing<S: Scalar>(strategy: &Strategy<S>, market: &Market<S>) -> Result<SelfFinancingReport> {
    let tree = market.tree();
    if strategy.next.len() != tree.horizon() {
        return Err(Error::Shape("strategy does not match the market".into()));
    }
    let mut violations = Vec::new();
    for t in 0..tree.horizon() {
        for i in 0..tree.level_size(t) {
            let d = strategy.holding(tree, t, i).minus(strategy.chosen(t, i));
            let v = liquidation_value(&d.cash, &d.shares, market.bid(t, i), market.ask(t, i))?;
            if !S::le_tol(&S::zero(), &v) {
                violations.push((t, i, v.to_f64()));
            }
        }
    }
    Ok(SelfFinancingReport {
        ok: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::PriceProcess;
    use crate::scalar::{rat, Rational};

    #[test]
    fn liquidation_examples() {
        let v = liquidation_value(&rat(-12, 1), &rat(3, 4), &rat(16, 1), &rat(16, 1)).unwrap();
        assert_eq!(v, rat(0, 1));
        let v = liquidation_value(&rat(9, 5), &rat(-3, 10), &rat(6, 1), &rat(6, 1)).unwrap();
        assert_eq!(v, rat(0, 1));
        let v = liquidation_value(&rat(7, 1), &rat(0, 1), &rat(8, 1), &rat(16, 1)).unwrap();
        assert_eq!(v, rat(7, 1));
        assert!(liquidation_value(&rat(0, 1), &rat(1, 1), &rat(2, 1), &rat(1, 1)).is_err());
    }

    fn market() -> Market<Rational> {
        let tree = EventTree::new(vec![vec![vec![0, 1]]]).unwrap();
        let prices = PriceProcess {
            bid: vec![vec![rat(10, 1)], vec![rat(8, 1), rat(6, 1)]],
            ask: vec![vec![rat(10, 1)], vec![rat(16, 1), rat(6, 1)]],
        };
        Market::new(tree, prices).unwrap()
    }

    #[test]
    fn constant_and_free_cash_strategies() {
        let m = market();
        let tree = m.tree();
        let hold = Strategy::new(tree, Portfolio::new(rat(1, 1), rat(1, 1)), vec![vec![Portfolio::new(rat(1, 1), rat(1, 1))]]).unwrap();
        assert!(is_self_financing(&hold, &m).unwrap().ok);
        let free = Strategy::new(tree, Portfolio::zero(), vec![vec![Portfolio::new(rat(1, 1), rat(0, 1))]]).unwrap();
        let report = is_self_financing(&free, &m).unwrap();
        assert!(!report.ok);
        assert_eq!(report.violations, vec![(0, 0, -1.0)]);
    }
}
