//! Finite market models: event trees, bid/ask prices, payoffs.
//!
//! A node is addressed by `(t, i)`: time step `t` and position `i` within
//! that level. All prices are discounted (the bond is the numeraire).

mod lattice;
mod martingale;
pub mod model_file;
pub mod random;
mod stopping;
mod strategy;

pub use lattice::{american_put_physical, build_binomial, build_trinomial, cash_basket, Lattice, LatticeParams};
pub use martingale::{no_arbitrage_check, verify_approx_martingale, MartingalePair, MartingaleReport, MeasureTag, NoArbitrage};
pub use stopping::{conditional_expectation, expectation, MixedStoppingTime, PureStoppingTime};
pub use strategy::{is_self_financing, liquidation_value, Portfolio, SelfFinancingReport, Strategy};

use crate::error::{invalid_spread, Error, Result};
use crate::scalar::Scalar;

/// Filtration as a rooted graph of atoms, one level per time step.
///
/// Distinct parents may share a successor (recombinant lattices); in that case
/// [`EventTree::is_tree`] is false and path-dependent objects (strategies,
/// stopping times) need [`EventTree::expand`] first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventTree {
    succ: Vec<Vec<Vec<usize>>>,
    parent: Vec<Vec<Option<usize>>>,
    tree: bool,
}

impl EventTree {
    /// `succ[t][i]` lists the successors of node `(t, i)` at level `t + 1`.
    pub fn new(succ: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let mut sizes = vec![1usize];
        for (t, level) in succ.iter().enumerate() {
            if level.len() != sizes[t] {
                return Err(Error::Shape(format!(
                    "level {t} has {} successor lists for {} nodes",
                    level.len(),
                    sizes[t]
                )));
            }
            let width = level.iter().flatten().map(|&j| j + 1).max().unwrap_or(0);
            sizes.push(width);
        }
        let mut parent: Vec<Vec<Option<usize>>> = sizes.iter().map(|&n| vec![None; n]).collect();
        let mut tree = true;
        for (t, level) in succ.iter().enumerate() {
            for (i, children) in level.iter().enumerate() {
                if children.is_empty() {
                    return Err(Error::Shape(format!("node ({t}, {i}) has no successor")));
                }
                for &j in children {
                    match parent[t + 1][j] {
                        None => parent[t + 1][j] = Some(i),
                        Some(_) => tree = false,
                    }
                }
            }
        }
        for (t, level) in parent.iter().enumerate().skip(1) {
            if let Some(j) = level.iter().position(Option::is_none) {
                return Err(Error::Shape(format!("node ({t}, {j}) is unreachable")));
            }
        }
        Ok(EventTree { succ, parent, tree })
    }

    /// Horizon `T`: number of time steps.
    pub fn horizon(&self) -> usize {
        self.succ.len()
    }

    pub fn level_size(&self, t: usize) -> usize {
        self.parent[t].len()
    }

    pub fn node_count(&self) -> usize {
        self.parent.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, t: usize, i: usize) -> &[usize] {
        &self.succ[t][i]
    }

    /// The (first) predecessor of `(t, i)`; unique when the graph is a tree.
    pub fn parent(&self, t: usize, i: usize) -> Option<usize> {
        self.parent[t][i]
    }

    pub fn is_tree(&self) -> bool {
        self.tree
    }

    pub(crate) fn require_tree(&self) -> Result<()> {
        if self.tree {
            Ok(())
        } else {
            Err(Error::NotATree(
                "path-dependent objects need a non-recombinant tree; expand the lattice first".into(),
            ))
        }
    }

    /// Unfolds a recombinant graph into a tree. Returns the tree and, for each
    /// new node, the index of the node it copies. Fails if the result would
    /// have more than `budget` nodes.
    pub fn expand(&self, budget: usize) -> Result<(EventTree, Vec<Vec<usize>>)> {
        let mut origin: Vec<Vec<usize>> = vec![vec![0]];
        let mut succ = Vec::with_capacity(self.horizon());
        let mut total = 1usize;
        for t in 0..self.horizon() {
            let mut next_origin = Vec::new();
            let mut level = Vec::with_capacity(origin[t].len());
            for &o in &origin[t] {
                let mut children = Vec::new();
                for &j in &self.succ[t][o] {
                    children.push(next_origin.len());
                    next_origin.push(j);
                }
                level.push(children);
            }
            total += next_origin.len();
            if total > budget {
                return Err(Error::BudgetExceeded(format!(
                    "expanded tree exceeds {budget} nodes"
                )));
            }
            succ.push(level);
            origin.push(next_origin);
        }
        Ok((EventTree::new(succ)?, origin))
    }

    /// Nodes `(t, i)` in breadth-first order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.horizon()).flat_map(move |t| (0..self.level_size(t)).map(move |i| (t, i)))
    }

    /// Ancestors of leaf `i` from the root down to the leaf (tree only).
    pub fn path_to(&self, t: usize, i: usize) -> Vec<usize> {
        let mut path = vec![0; t + 1];
        let mut cur = i;
        for s in (0..=t).rev() {
            path[s] = cur;
            if s > 0 {
                cur = self.parent[s][cur].expect("non-root node has a parent");
            }
        }
        path
    }
}

/// Discounted bid and ask prices per node.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceProcess<S> {
    pub bid: Vec<Vec<S>>,
    pub ask: Vec<Vec<S>>,
}

/// An event tree with prices satisfying `ask ≥ bid > 0` at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct Market<S> {
    tree: EventTree,
    prices: PriceProcess<S>,
}

impl<S: Scalar> Market<S> {
    pub fn new(tree: EventTree, prices: PriceProcess<S>) -> Result<Self> {
        for t in 0..=tree.horizon() {
            let n = tree.level_size(t);
            if prices.bid.get(t).map(Vec::len) != Some(n) || prices.ask.get(t).map(Vec::len) != Some(n) {
                return Err(Error::Shape(format!("prices at level {t} do not match the tree")));
            }
            for i in 0..n {
                let (b, a) = (&prices.bid[t][i], &prices.ask[t][i]);
                if b > a || *b <= S::zero() {
                    return Err(invalid_spread(b, a));
                }
            }
        }
        if prices.bid.len() != tree.horizon() + 1 {
            return Err(Error::Shape("price levels do not match the horizon".into()));
        }
        Ok(Market { tree, prices })
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn prices(&self) -> &PriceProcess<S> {
        &self.prices
    }

    pub fn horizon(&self) -> usize {
        self.tree.horizon()
    }

    pub fn bid(&self, t: usize, i: usize) -> &S {
        &self.prices.bid[t][i]
    }

    pub fn ask(&self, t: usize, i: usize) -> &S {
        &self.prices.ask[t][i]
    }

    pub fn has_zero_spread(&self) -> bool {
        self.prices
            .bid
            .iter()
            .flatten()
            .zip(self.prices.ask.iter().flatten())
            .all(|(b, a)| b == a)
    }

    /// Copies prices onto an expanded tree (see [`EventTree::expand`]).
    pub fn expand(&self, budget: usize) -> Result<(Market<S>, Vec<Vec<usize>>)> {
        let (tree, origin) = self.tree.expand(budget)?;
        let pick = |src: &Vec<Vec<S>>| -> Vec<Vec<S>> {
            origin
                .iter()
                .enumerate()
                .map(|(t, o)| o.iter().map(|&j| src[t][j].clone()).collect())
                .collect()
        };
        let prices = PriceProcess {
            bid: pick(&self.prices.bid),
            ask: pick(&self.prices.ask),
        };
        Ok((Market { tree, prices }, origin))
    }

    pub fn map_scalar<T: Scalar>(&self, conv: impl Fn(&S) -> T) -> Market<T> {
        let map = |v: &Vec<Vec<S>>| v.iter().map(|l| l.iter().map(&conv).collect()).collect();
        Market {
            tree: self.tree.clone(),
            prices: PriceProcess {
                bid: map(&self.prices.bid),
                ask: map(&self.prices.ask),
            },
        }
    }
}

/// Delivery at exercise: `cash` currency and `shares` of stock, or no
/// exercise possible at this node.
#[derive(Clone, Debug, PartialEq)]
pub enum Payoff<S> {
    Exercisable { cash: S, shares: S },
    NotExercisable,
}

impl<S: Scalar> Payoff<S> {
    pub fn cash(cash: S) -> Self {
        Payoff::Exercisable {
            cash,
            shares: S::zero(),
        }
    }

    pub fn is_exercisable(&self) -> bool {
        matches!(self, Payoff::Exercisable { .. })
    }

    /// `ξ + price·ζ`; `None` for a non-exercisable node.
    pub fn value_at(&self, price: &S) -> Option<S> {
        match self {
            Payoff::Exercisable { cash, shares } => Some(cash.clone() + price.clone() * shares.clone()),
            Payoff::NotExercisable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PayoffProcess<S> {
    values: Vec<Vec<Payoff<S>>>,
}

impl<S: Scalar> PayoffProcess<S> {
    pub fn new(tree: &EventTree, values: Vec<Vec<Payoff<S>>>) -> Result<Self> {
        let ok = values.len() == tree.horizon() + 1
            && values.iter().enumerate().all(|(t, l)| l.len() == tree.level_size(t));
        if !ok {
            return Err(Error::Shape("payoff does not match the tree".into()));
        }
        Ok(PayoffProcess { values })
    }

    pub fn from_fn(tree: &EventTree, f: impl Fn(usize, usize) -> Payoff<S>) -> Self {
        PayoffProcess {
            values: (0..=tree.horizon())
                .map(|t| (0..tree.level_size(t)).map(|i| f(t, i)).collect())
                .collect(),
        }
    }

    pub fn at(&self, t: usize, i: usize) -> &Payoff<S> {
        &self.values[t][i]
    }

    pub fn levels(&self) -> &[Vec<Payoff<S>>] {
        &self.values
    }

    pub fn reindex(&self, origin: &[Vec<usize>]) -> Self {
        PayoffProcess {
            values: origin
                .iter()
                .enumerate()
                .map(|(t, o)| o.iter().map(|&j| self.values[t][j].clone()).collect())
                .collect(),
        }
    }

    pub fn map_scalar<T: Scalar>(&self, conv: impl Fn(&S) -> T) -> PayoffProcess<T> {
        PayoffProcess {
            values: self
                .values
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|p| match p {
                            Payoff::Exercisable { cash, shares } => Payoff::Exercisable {
                                cash: conv(cash),
                                shares: conv(shares),
                            },
                            Payoff::NotExercisable => Payoff::NotExercisable,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn lattice_two_steps() -> EventTree {
        EventTree::new(vec![vec![vec![0, 1]], vec![vec![0, 1], vec![1, 2]]]).unwrap()
    }

    #[test]
    fn recombinant_graph_is_not_a_tree() {
        let g = lattice_two_steps();
        assert!(!g.is_tree());
        assert_eq!(g.node_count(), 6);
        let (tree, origin) = g.expand(100).unwrap();
        assert!(tree.is_tree());
        assert_eq!(tree.node_count(), 7);
        assert_eq!(origin[2], vec![0, 1, 1, 2]);
        assert!(matches!(g.expand(5), Err(Error::BudgetExceeded(_))));
        assert_eq!(tree.path_to(2, 2), vec![0, 1, 2]);
    }

    #[test]
    fn malformed_trees_are_rejected() {
        assert!(EventTree::new(vec![vec![vec![]]]).is_err());
        assert!(EventTree::new(vec![vec![vec![0, 2]]]).is_err());
        assert!(EventTree::new(vec![vec![vec![0]], vec![vec![0], vec![1]]]).is_err());
    }

    #[test]
    fn market_checks_spreads() {
        let tree = EventTree::new(vec![vec![vec![0, 1]]]).unwrap();
        let prices = PriceProcess {
            bid: vec![vec![rat(10, 1)], vec![rat(9, 1), rat(12, 1)]],
            ask: vec![vec![rat(10, 1)], vec![rat(8, 1), rat(12, 1)]],
        };
        assert!(matches!(
            Market::<Rational>::new(tree, prices),
            Err(Error::InvalidSpread { .. })
        ));
    }
}
