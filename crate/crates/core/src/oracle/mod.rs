//! Slow reference computations for small models, independent of the value
//! function recursions: superhedging prices as linear programs over explicit
//! strategies, the frictionless Snell envelope, and the perturbation of an
//! approximate martingale into one with an equivalent measure.

pub mod perturb;
pub mod simplex;
pub mod snell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::market::{EventTree, Market, Payoff, PayoffProcess, Portfolio, PureStoppingTime, Strategy};
use crate::scalar::{rat, Rational};
use simplex::{LinearProgram, LpOutcome};

pub use perturb::perturb_to_equivalent;
pub use snell::snell_envelope;

/// Default limit on tree size for the linear programs.
pub const DEFAULT_NODE_BUDGET: usize = 200;
/// Default limit on the number of enumerated stopping times.
pub const DEFAULT_STOPPING_CAP: usize = 100_000;

/// Variable layout: `x[0]` is the initial cash (the initial stock position
/// can be taken to be zero, since buying stock at time 0 is the same as
/// rebalancing there), then cash and stock chosen at each listed node.
struct Layout {
    slot: Vec<Vec<Option<usize>>>,
    num_vars: usize,
}

impl Layout {
    fn new(tree: &EventTree, trades_at: impl Fn(usize, usize) -> bool) -> Self {
        let mut num_vars = 1;
        let slot = (0..=tree.horizon())
            .map(|t| {
                (0..tree.level_size(t))
                    .map(|i| {
                        (t < tree.horizon() && trades_at(t, i)).then(|| {
                            num_vars += 2;
                            num_vars - 2
                        })
                    })
                    .collect()
            })
            .collect();
        Layout { slot, num_vars }
    }

    /// `(cash variable, stock variable)` entering `(t, i)`; no stock variable
    /// at the root.
    fn entering(&self, tree: &EventTree, t: usize, i: usize) -> (usize, Option<usize>) {
        if t == 0 {
            return (0, None);
        }
        let p = tree.parent(t, i).expect("tree node has a parent");
        let k = self.slot[t - 1][p].expect("parent trades");
        (k, Some(k + 1))
    }

    fn strategy(&self, tree: &EventTree, x: &[Rational]) -> Result<Strategy<Rational>> {
        let initial = Portfolio::new(x[0].clone(), rat(0, 1));
        let mut next: Vec<Vec<Portfolio<Rational>>> = Vec::with_capacity(tree.horizon());
        for t in 0..tree.horizon() {
            let level = (0..tree.level_size(t))
                .map(|i| match self.slot[t][i] {
                    Some(k) => Portfolio::new(x[k].clone(), x[k + 1].clone()),
                    None if t == 0 => initial.clone(),
                    None => next[t - 1][tree.parent(t, i).expect("tree node has a parent")].clone(),
                })
                .collect();
            next.push(level);
        }
        Strategy::new(tree, initial, next)
    }
}

/// `ϑ(γ, δ) ≥ 0` for `γ = cash − c`, `δ = shares − s`; with `ϑ` concave in
/// `δ` this is the pair of linear constraints at the bid and the ask. A
/// missing stock variable stands for a zero position.
fn solvent(lp: &mut LinearProgram, cash: usize, shares: Option<usize>, c: &Rational, s: &Rational, bid: &Rational, ask: &Rational) {
    for price in [bid, ask] {
        let mut coeffs = vec![(cash, rat(1, 1))];
        if let Some(sv) = shares {
            coeffs.push((sv, price.clone()));
        }
        lp.geq(coeffs, c + price * s);
    }
}

/// Self-financing at `(t, i)`: `ϑ(α_t − α_{t+1}, β_t − β_{t+1}) ≥ 0`.
fn self_financing(lp: &mut LinearProgram, layout: &Layout, market: &Market<Rational>, t: usize, i: usize) {
    let (ec, es) = layout.entering(market.tree(), t, i);
    let k = layout.slot[t][i].expect("node trades");
    for price in [market.bid(t, i), market.ask(t, i)] {
        let mut coeffs = vec![(ec, rat(1, 1)), (k, rat(-1, 1)), (k + 1, -price.clone())];
        if let Some(sv) = es {
            coeffs.push((sv, price.clone()));
        }
        lp.geq(coeffs, rat(0, 1));
    }
}

fn check_size(market: &Market<Rational>, budget: usize) -> Result<()> {
    market.tree().require_tree()?;
    let n = market.tree().node_count();
    if n > budget {
        return Err(Error::BudgetExceeded(format!("{n} nodes exceed the oracle budget of {budget}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SellerOracle {
    pub price: Rational,
    /// A cheapest superhedging strategy.
    pub strategy: Strategy<Rational>,
}

/// Least initial cash of a self-financing strategy that can deliver the
/// payoff at every exercisable node, by exact linear programming.
pub fn oracle_seller_price(market: &Market<Rational>, payoff: &PayoffProcess<Rational>, budget: usize) -> Result<SellerOracle> {
    check_size(market, budget)?;
    let tree = market.tree();
    let layout = Layout::new(tree, |_, _| true);
    let mut lp = LinearProgram::new(layout.num_vars);
    lp.objective[0] = rat(1, 1);
    for (t, i) in tree.nodes() {
        if t < tree.horizon() {
            self_financing(&mut lp, &layout, market, t, i);
        }
        if let Payoff::Exercisable { cash, shares } = payoff.at(t, i) {
            let (ec, es) = layout.entering(tree, t, i);
            solvent(&mut lp, ec, es, cash, shares, market.bid(t, i), market.ask(t, i));
        }
    }
    match lp.solve() {
        LpOutcome::Optimal { value, x } => Ok(SellerOracle {
            price: value,
            strategy: layout.strategy(tree, &x)?,
        }),
        LpOutcome::Unbounded => Err(Error::Arbitrage),
        LpOutcome::Infeasible => Err(Error::Degenerate),
    }
}

/// Largest amount the buyer can borrow against exercising at `tau`.
pub fn oracle_buyer_value_for(
    market: &Market<Rational>,
    payoff: &PayoffProcess<Rational>,
    tau: &PureStoppingTime,
) -> Result<Rational> {
    let tree = market.tree();
    // trading only matters strictly before exercise
    let mut before: Vec<Vec<bool>> = (0..=tree.horizon()).map(|t| vec![false; tree.level_size(t)]).collect();
    for (t, i) in tree.nodes() {
        let parent_before = t == 0 || before[t - 1][tree.parent(t, i).expect("tree node has a parent")];
        before[t][i] = parent_before && !tau.stops_at(t, i);
    }
    let layout = Layout::new(tree, |t, i| before[t][i]);
    let mut lp = LinearProgram::new(layout.num_vars);
    lp.objective[0] = rat(1, 1);
    for (t, i) in tree.nodes() {
        if before[t][i] && t < tree.horizon() {
            self_financing(&mut lp, &layout, market, t, i);
        }
        if !tau.stops_at(t, i) {
            continue;
        }
        let Payoff::Exercisable { cash, shares } = payoff.at(t, i) else {
            return Err(Error::Degenerate);
        };
        let (ec, es) = layout.entering(tree, t, i);
        solvent(&mut lp, ec, es, &-cash, &-shares, market.bid(t, i), market.ask(t, i));
    }
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Ok(-value),
        LpOutcome::Unbounded => Err(Error::Arbitrage),
        LpOutcome::Infeasible => Err(Error::Degenerate),
    }
}

#[derive(Clone, Debug)]
pub struct BuyerOracle {
    pub price: Rational,
    pub best: PureStoppingTime,
    /// `false` when the stopping times were sampled rather than enumerated,
    /// in which case `price` is only a lower bound.
    pub exhaustive: bool,
}

/// Samples a pure stopping time that only stops at allowed nodes, or `None`
/// if there is none.
fn sample_stopping_time(tree: &EventTree, allowed: &dyn Fn(usize, usize) -> bool, rng: &mut impl Rng) -> Option<PureStoppingTime> {
    let horizon = tree.horizon();
    // feasible[t][i]: some stopping time of the subtree exists
    let mut feasible: Vec<Vec<bool>> = vec![Vec::new(); horizon + 1];
    feasible[horizon] = (0..tree.level_size(horizon)).map(|i| allowed(horizon, i)).collect();
    for t in (0..horizon).rev() {
        feasible[t] = (0..tree.level_size(t))
            .map(|i| allowed(t, i) || tree.successors(t, i).iter().all(|&j| feasible[t + 1][j]))
            .collect();
    }
    if !feasible[0][0] {
        return None;
    }
    let mut stop: Vec<Vec<bool>> = (0..=horizon).map(|t| vec![false; tree.level_size(t)]).collect();
    let mut frontier = vec![0usize];
    for t in 0..=horizon {
        let mut next = Vec::new();
        for i in frontier {
            let can_continue = t < horizon && tree.successors(t, i).iter().all(|&j| feasible[t + 1][j]);
            if allowed(t, i) && (!can_continue || rng.gen_bool(0.5)) {
                stop[t][i] = true;
            } else {
                next.extend_from_slice(tree.successors(t, i));
            }
        }
        frontier = next;
    }
    PureStoppingTime::new(tree, stop).ok()
}

/// Bid price as the best, over pure stopping times, of the largest amount
/// the buyer can borrow against exercising at that time. Enumerates up to
/// `cap` stopping times; beyond that, samples `cap` of them with a fixed
/// seed and reports a lower bound.
pub fn oracle_buyer_price(
    market: &Market<Rational>,
    payoff: &PayoffProcess<Rational>,
    budget: usize,
    cap: usize,
) -> Result<BuyerOracle> {
    check_size(market, budget)?;
    let tree = market.tree();
    let allowed = |t: usize, i: usize| payoff.at(t, i).is_exercisable();
    let exhaustive = PureStoppingTime::count(tree, allowed) <= cap;
    let taus = if exhaustive {
        PureStoppingTime::enumerate(tree, allowed, cap)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        (0..cap).filter_map(|_| sample_stopping_time(tree, &allowed, &mut rng)).collect()
    };
    let mut best: Option<(Rational, PureStoppingTime)> = None;
    for tau in taus {
        let v = oracle_buyer_value_for(market, payoff, &tau)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, tau));
        }
    }
    let (price, best) = best.ok_or(Error::Degenerate)?;
    Ok(BuyerOracle { price, best, exhaustive })
}
