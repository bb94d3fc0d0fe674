use crate::error::{Error, Result};
use crate::market::{EventTree, Market, Payoff, PayoffProcess, PriceProcess};
use crate::scalar::Scalar;

/// Parameters of a recombinant lattice for a stock with proportional costs.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeParams {
    pub s0: f64,
    pub sigma: f64,
    /// Continuously compounded interest rate.
    pub rate: f64,
    /// Maturity in years.
    pub maturity: f64,
    pub steps: usize,
    /// Proportional cost `k`: bid `(1-k)S`, ask `(1+k)S`.
    pub cost: f64,
    /// Trade at the mid price at time 0.
    pub no_cost_at_time0: bool,
    /// Append a step at which the option pays `(0, 0)`, so that a holder
    /// can effectively decline to exercise.
    pub never_exercise_step: bool,
}

/// A binomial or trinomial lattice with the undiscounted mid prices and
/// discount factors kept alongside the (discounted) market.
#[derive(Clone, Debug)]
pub struct Lattice<S> {
    pub market: Market<S>,
    /// Undiscounted mid price per node.
    pub mid: Vec<Vec<f64>>,
    /// Discount factor per level.
    pub discount: Vec<f64>,
    /// Number of model steps; levels beyond it are the never-exercise step.
    pub steps: usize,
}

fn build<S: Scalar>(p: &LatticeParams, branching: usize) -> Result<Lattice<S>> {
    if !(p.s0 > 0.0) || !(p.sigma > 0.0) || p.steps == 0 || !(p.maturity > 0.0) {
        return Err(Error::InvalidModel(
            "lattice needs s0 > 0, sigma > 0, maturity > 0 and at least one step".into(),
        ));
    }
    if !(0.0..1.0).contains(&p.cost) {
        return Err(Error::InvalidModel(format!("cost {} must lie in [0, 1)", p.cost)));
    }
    let n = p.steps;
    let dt = p.maturity / n as f64;
    let jump = p.sigma * dt.sqrt();
    // level t has branching·t - t + 1 nodes, indexed from the lowest price
    let width = |t: usize| (branching - 1) * t + 1;
    let mut succ = Vec::with_capacity(n + 1);
    let mut mid = Vec::with_capacity(n + 2);
    let mut discount = Vec::with_capacity(n + 2);
    for t in 0..=n {
        mid.push(
            (0..width(t))
                .map(|i| {
                    let net = if branching == 2 {
                        2.0 * i as f64 - t as f64
                    } else {
                        i as f64 - t as f64
                    };
                    p.s0 * (jump * net).exp()
                })
                .collect::<Vec<f64>>(),
        );
        discount.push((-p.rate * t as f64 * dt).exp());
        if t < n {
            succ.push(
                (0..width(t))
                    .map(|i| (0..branching).map(|k| i + k).collect())
                    .collect(),
            );
        }
    }
    if p.never_exercise_step {
        succ.push((0..width(n)).map(|i| vec![i]).collect());
        mid.push(mid[n].clone());
        discount.push(discount[n]);
    }
    let tree = EventTree::new(succ)?;
    let mut bid = Vec::with_capacity(mid.len());
    let mut ask = Vec::with_capacity(mid.len());
    for (t, level) in mid.iter().enumerate() {
        let k = if t == 0 && p.no_cost_at_time0 { 0.0 } else { p.cost };
        // the appended level repeats its parents' discounted prices
        let d = discount[t.min(n)];
        bid.push(level.iter().map(|m| S::from_f64((1.0 - k) * d * m)).collect());
        ask.push(level.iter().map(|m| S::from_f64((1.0 + k) * d * m)).collect());
    }
    let market = Market::new(tree, PriceProcess { bid, ask })?;
    Ok(Lattice {
        market,
        mid,
        discount,
        steps: n,
    })
}

/// Recombinant binomial lattice with factors `e^{±σ√(T/N)}`.
pub fn build_binomial<S: Scalar>(p: &LatticeParams) -> Result<Lattice<S>> {
    build(p, 2)
}

/// Recombinant trinomial lattice with factors `e^{σ√(T/N)}`, 1, `e^{−σ√(T/N)}`.
pub fn build_trinomial<S: Scalar>(p: &LatticeParams) -> Result<Lattice<S>> {
    build(p, 3)
}

impl<S: Scalar> Lattice<S> {
    fn payoff_with(&self, f: impl Fn(usize, usize) -> Payoff<S>) -> PayoffProcess<S> {
        PayoffProcess::from_fn(self.market.tree(), |t, i| {
            if t > self.steps {
                Payoff::Exercisable {
                    cash: S::zero(),
                    shares: S::zero(),
                }
            } else {
                f(t, i)
            }
        })
    }
}

/// American put settled by physical delivery: the holder hands over one
/// share and receives the strike, `(K·disc_t, −1)` in discounted units.
pub fn american_put_physical<S: Scalar>(lattice: &Lattice<S>, strike: f64) -> PayoffProcess<S> {
    lattice.payoff_with(|t, _| Payoff::Exercisable {
        cash: S::from_f64(strike * lattice.discount[t]),
        shares: -S::one(),
    })
}

/// Cash-settled sum of calls `Σ sign·(S_t − K)⁺` on the undiscounted mid price.
pub fn cash_basket<S: Scalar>(lattice: &Lattice<S>, legs: &[(f64, f64)]) -> PayoffProcess<S> {
    lattice.payoff_with(|t, i| {
        let s = lattice.mid[t][i];
        let value: f64 = legs.iter().map(|(k, sign)| sign * (s - k).max(0.0)).sum();
        Payoff::cash(S::from_f64(lattice.discount[t] * value))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(steps: usize, cost: f64) -> LatticeParams {
        LatticeParams {
            s0: 100.0,
            sigma: 0.2,
            rate: 0.1,
            maturity: 0.25,
            steps,
            cost,
            no_cost_at_time0: true,
            never_exercise_step: false,
        }
    }

    #[test]
    fn one_step_binomial_prices() {
        let lat = build_binomial::<f64>(&params(1, 0.0)).unwrap();
        assert!((lat.mid[1][1] - 100.0 * 0.1f64.exp()).abs() < 1e-9);
        assert!((lat.mid[1][1] - 110.517).abs() < 1e-3);
        let m = &lat.market;
        assert!(m.has_zero_spread());
        let disc = (-0.1f64 * 0.25).exp();
        assert!((m.bid(1, 0) - disc * 100.0 * (-0.1f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn trinomial_shape() {
        let lat = build_trinomial::<f64>(&params(1, 0.01)).unwrap();
        let tree = lat.market.tree();
        assert_eq!(tree.successors(0, 0), &[0, 1, 2]);
        assert_eq!(lat.mid[1][1], 100.0);
        assert_eq!(lat.market.bid(0, 0), &100.0);
        let lat = build_trinomial::<f64>(&params(4, 0.0)).unwrap();
        for t in 0..=4 {
            let d = lat.discount[t];
            assert!((lat.market.bid(t, t) - 100.0 * d).abs() < 1e-9);
        }
    }

    #[test]
    fn never_exercise_step_copies_prices() {
        let mut p = params(2, 0.01);
        p.never_exercise_step = true;
        let lat = build_binomial::<f64>(&p).unwrap();
        assert_eq!(lat.market.horizon(), 3);
        assert_eq!(lat.market.prices().ask[3], lat.market.prices().ask[2]);
        let put = american_put_physical(&lat, 100.0);
        assert_eq!(
            put.at(3, 0),
            &Payoff::Exercisable { cash: 0.0, shares: 0.0 }
        );
        assert_eq!(put.at(2, 1), &Payoff::Exercisable { cash: 100.0 * lat.discount[2], shares: -1.0 });
    }

    #[test]
    fn bull_spread_intrinsic_values() {
        let lat = build_binomial::<f64>(&params(2, 0.0)).unwrap();
        let spread = cash_basket(&lat, &[(95.0, 1.0), (105.0, -1.0)]);
        // middle node at t = 2 sits at S0
        let expected = lat.discount[2] * 5.0;
        assert_eq!(spread.at(2, 1).value_at(&0.0), Some(expected));
        let up = lat.mid[2][2];
        assert!(up > 105.0);
        assert!((spread.at(2, 2).value_at(&0.0).unwrap() - lat.discount[2] * 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_cost() {
        assert!(build_binomial::<f64>(&params(2, 1.0)).is_err());
    }
}
