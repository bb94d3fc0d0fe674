use crate::error::{Error, Result};
use crate::market::{EventTree, Market, MixedStoppingTime};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureTag {
    /// Every node has positive probability.
    Equivalent,
    General,
}

/// A probability measure on a tree (unconditional node masses) together
/// with a price process.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingalePair<S> {
    measure: Vec<Vec<S>>,
    price: Vec<Vec<S>>,
    tag: MeasureTag,
}

impl<S: Scalar> MartingalePair<S> {
    pub fn new(tree: &EventTree, measure: Vec<Vec<S>>, price: Vec<Vec<S>>) -> Result<Self> {
        tree.require_tree()?;
        let fits = |v: &Vec<Vec<S>>| {
            v.len() == tree.horizon() + 1
                && v.iter().enumerate().all(|(t, l)| l.len() == tree.level_size(t))
        };
        if !fits(&measure) || !fits(&price) {
            return Err(Error::Shape("measure or price does not match the tree".into()));
        }
        if !S::near(&measure[0][0], &S::one()) {
            return Err(Error::Shape("root probability must be one".into()));
        }
        for (t, i) in tree.nodes() {
            let m = &measure[t][i];
            if !S::le_tol(&S::zero(), m) {
                return Err(Error::Shape(format!("negative probability at ({t}, {i})")));
            }
            if t < tree.horizon() {
                let sum = tree
                    .successors(t, i)
                    .iter()
                    .fold(S::zero(), |acc, &j| acc + measure[t + 1][j].clone());
                if !S::near(&sum, m) {
                    return Err(Error::Shape(format!(
                        "successor probabilities at ({t}, {i}) do not add up"
                    )));
                }
            }
        }
        let positive = measure.iter().flatten().all(|m| *m > S::zero());
        let tag = if positive {
            MeasureTag::Equivalent
        } else {
            MeasureTag::General
        };
        Ok(MartingalePair {
            measure,
            price,
            tag,
        })
    }

    pub fn measure(&self) -> &[Vec<S>] {
        &self.measure
    }

    pub fn price(&self) -> &[Vec<S>] {
        &self.price
    }

    pub fn tag(&self) -> MeasureTag {
        self.tag
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleReport {
    pub ok: bool,
    /// `(t, i, description, amount)` for every failed inequality.
    pub violations: Vec<(usize, usize, String, f64)>,
}

/// Checks that `S` lies in the bid-ask band and that the `χ`-weighted tail of
/// `S` has conditional expectation within `[χ*_{t+1}S^b_t, χ*_{t+1}S^a_t]` at
/// every node of positive probability.
pub fn verify_approx_martingale<S: Scalar>(
    market: &Market<S>,
    pair: &MartingalePair<S>,
    chi: &MixedStoppingTime<S>,
) -> MartingaleReport {
    let tree = market.tree();
    let mut violations = Vec::new();
    for (t, i) in tree.nodes() {
        let s = &pair.price[t][i];
        let (b, a) = (market.bid(t, i), market.ask(t, i));
        if !S::le_tol(b, s) {
            violations.push((t, i, "price below bid".into(), (b.clone() - s.clone()).to_f64()));
        }
        if !S::le_tol(s, a) {
            violations.push((t, i, "price above ask".into(), (s.clone() - a.clone()).to_f64()));
        }
    }
    let alive = chi.chi_star_after(tree);
    let p = &pair.measure;
    // tail[t][i] = E(Σ_{s≥t} χ_s S_s | F_t), meaningful where P > 0
    let horizon = tree.horizon();
    let mut tail: Vec<S> = (0..tree.level_size(horizon))
        .map(|i| chi.mass(horizon, i).clone() * pair.price[horizon][i].clone())
        .collect();
    for t in (0..horizon).rev() {
        let mut level = Vec::with_capacity(tree.level_size(t));
        for i in 0..tree.level_size(t) {
            let own = chi.mass(t, i).clone() * pair.price[t][i].clone();
            if p[t][i].is_zero_value() {
                level.push(own);
                continue;
            }
            let ahead = tree.successors(t, i).iter().fold(S::zero(), |acc, &j| {
                acc + p[t + 1][j].clone() * tail[j].clone()
            }) / p[t][i].clone();
            let lower = alive[t][i].clone() * market.bid(t, i).clone();
            let upper = alive[t][i].clone() * market.ask(t, i).clone();
            if !S::le_tol(&lower, &ahead) {
                violations.push((t, i, "tail expectation below bid band".into(), (lower - ahead.clone()).to_f64()));
            } else if !S::le_tol(&ahead, &upper) {
                violations.push((t, i, "tail expectation above ask band".into(), (ahead.clone() - upper).to_f64()));
            }
            level.push(own + ahead);
        }
        tail = level;
    }
    MartingaleReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Set of martingale prices reachable at a node with strictly positive
/// transition probabilities: an interval with open or closed ends.
#[derive(Clone, Debug)]
struct Band<S> {
    lo: S,
    lo_closed: bool,
    hi: S,
    hi_closed: bool,
}

impl<S: Scalar> Band<S> {
    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn contains(&self, x: &S) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    fn interior_point(&self) -> S {
        (self.lo.clone() + self.hi.clone()) / S::from_i64(2)
    }

    fn clip(self, b: &S, a: &S) -> Self {
        let (lo, lo_closed) = if *b > self.lo {
            (b.clone(), true)
        } else {
            (self.lo, self.lo_closed)
        };
        let (hi, hi_closed) = if *a < self.hi {
            (a.clone(), true)
        } else {
            (self.hi, self.hi_closed)
        };
        Band { lo, lo_closed, hi, hi_closed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoArbitrage<S> {
    pub arbitrage_free: bool,
    /// A martingale pair with strictly positive probabilities and prices in
    /// the band; produced for arbitrage-free trees.
    pub witness: Option<MartingalePair<S>>,
}

/// Decides whether some equivalent measure makes a price process inside the
/// bid-ask band a martingale, by backward recursion of the attainable price
/// intervals.
pub fn no_arbitrage_check<S: Scalar>(market: &Market<S>) -> NoArbitrage<S> {
    let tree = market.tree();
    let horizon = tree.horizon();
    let closed = |t: usize, i: usize| Band {
        lo: market.bid(t, i).clone(),
        lo_closed: true,
        hi: market.ask(t, i).clone(),
        hi_closed: true,
    };
    let mut bands: Vec<Vec<Band<S>>> = vec![Vec::new(); horizon + 1];
    bands[horizon] = (0..tree.level_size(horizon)).map(|i| closed(horizon, i)).collect();
    for t in (0..horizon).rev() {
        let mut level = Vec::with_capacity(tree.level_size(t));
        for i in 0..tree.level_size(t) {
            let kids: Vec<&Band<S>> = tree.successors(t, i).iter().map(|&j| &bands[t + 1][j]).collect();
            let lo = kids.iter().map(|k| &k.lo).fold(&kids[0].lo, |m, x| if x < m { x } else { m }).clone();
            let hi = kids.iter().map(|k| &k.hi).fold(&kids[0].hi, |m, x| if x > m { x } else { m }).clone();
            let band = Band {
                lo_closed: kids.iter().all(|k| k.lo == lo && k.lo_closed),
                hi_closed: kids.iter().all(|k| k.hi == hi && k.hi_closed),
                lo,
                hi,
            }
            .clip(market.bid(t, i), market.ask(t, i));
            if band.is_empty() {
                return NoArbitrage {
                    arbitrage_free: false,
                    witness: None,
                };
            }
            level.push(band);
        }
        bands[t] = level;
    }
    let witness = if tree.is_tree() { build_witness(tree, &bands) } else { None };
    NoArbitrage {
        arbitrage_free: true,
        witness,
    }
}

fn build_witness<S: Scalar>(tree: &EventTree, bands: &[Vec<Band<S>>]) -> Option<MartingalePair<S>> {
    let horizon = tree.horizon();
    let mut price: Vec<Vec<S>> = vec![vec![bands[0][0].interior_point()]];
    let mut measure: Vec<Vec<S>> = vec![vec![S::one()]];
    for t in 0..horizon {
        let n = tree.level_size(t + 1);
        let mut next_price = vec![S::zero(); n];
        let mut next_measure = vec![S::zero(); n];
        for i in 0..tree.level_size(t) {
            let s = &price[t][i];
            let kids = tree.successors(t, i);
            let values: Vec<S> = kids
                .iter()
                .map(|&j| {
                    let b = &bands[t + 1][j];
                    if b.contains(s) {
                        s.clone()
                    } else {
                        b.interior_point()
                    }
                })
                .collect();
            let mut values = values;
            let mut below = values.iter().filter(|v| *v < s).count();
            let mut above = values.iter().filter(|v| *v > s).count();
            // a successor sitting at `s` whose band extends to the empty side moves there
            if below == 0 && above > 0 {
                let k = kids.iter().position(|&j| bands[t + 1][j].lo < *s)?;
                values[k] = (bands[t + 1][kids[k]].lo.clone() + s.clone()) / S::from_i64(2);
                below = 1;
            } else if above == 0 && below > 0 {
                let k = kids.iter().position(|&j| bands[t + 1][j].hi > *s)?;
                values[k] = (bands[t + 1][kids[k]].hi.clone() + s.clone()) / S::from_i64(2);
                above = 1;
            }
            let weights: Vec<S> = values
                .iter()
                .map(|v| {
                    if v < s {
                        S::one() / ((s.clone() - v.clone()) * S::from_i64(below as i64))
                    } else if v > s {
                        S::one() / ((v.clone() - s.clone()) * S::from_i64(above as i64))
                    } else {
                        S::one()
                    }
                })
                .collect();
            let total = weights.iter().fold(S::zero(), |acc, w| acc + w.clone());
            for ((&j, v), w) in kids.iter().zip(values).zip(weights) {
                next_price[j] = v;
                next_measure[j] = measure[t][i].clone() * w / total.clone();
            }
        }
        price.push(next_price);
        measure.push(next_measure);
    }
    MartingalePair::new(tree, measure, price).ok()
}
