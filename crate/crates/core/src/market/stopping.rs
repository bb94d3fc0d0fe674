use crate::error::{Error, Result};
use crate::market::EventTree;
use crate::scalar::Scalar;

/// Randomised stopping time: nonnegative exercise mass per node, summing to
/// one along every path.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedStoppingTime<S> {
    chi: Vec<Vec<S>>,
}

/// Pure stopping time: the set of nodes where exercise happens, one per path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureStoppingTime {
    stop: Vec<Vec<bool>>,
}

impl<S: Scalar> MixedStoppingTime<S> {
    pub fn new(tree: &EventTree, chi: Vec<Vec<S>>) -> Result<Self> {
        tree.require_tree()?;
        let shape_ok = chi.len() == tree.horizon() + 1
            && chi.iter().enumerate().all(|(t, l)| l.len() == tree.level_size(t));
        if !shape_ok {
            return Err(Error::Shape("stopping masses do not match the tree".into()));
        }
        if let Some((t, i)) = tree.nodes().find(|&(t, i)| !S::le_tol(&S::zero(), &chi[t][i])) {
            return Err(Error::Shape(format!("negative exercise mass at ({t}, {i})")));
        }
        let out = MixedStoppingTime { chi };
        let tail = out.chi_star_after(tree);
        let last = tree.horizon();
        if let Some(i) = (0..tree.level_size(last)).find(|&i| !S::near(&tail[last][i], &S::zero())) {
            return Err(Error::Shape(format!(
                "exercise masses along the path to leaf {i} do not sum to one"
            )));
        }
        Ok(out)
    }

    pub fn mass(&self, t: usize, i: usize) -> &S {
        &self.chi[t][i]
    }

    pub fn masses(&self) -> &[Vec<S>] {
        &self.chi
    }

    /// `χ*_t = 1 − Σ_{s<t} χ_s`: mass not yet exercised on arrival at each node.
    pub fn chi_star(&self, tree: &EventTree) -> Vec<Vec<S>> {
        let mut out: Vec<Vec<S>> = Vec::with_capacity(self.chi.len());
        out.push(vec![S::one()]);
        for t in 1..=tree.horizon() {
            let level = (0..tree.level_size(t))
                .map(|i| {
                    let p = tree.parent(t, i).expect("tree node has a parent");
                    out[t - 1][p].clone() - self.chi[t - 1][p].clone()
                })
                .collect();
            out.push(level);
        }
        out
    }

    /// `χ*_{t+1} = χ*_t − χ_t` at every node: mass still alive after time `t`.
    pub fn chi_star_after(&self, tree: &EventTree) -> Vec<Vec<S>> {
        self.chi_star(tree)
            .into_iter()
            .zip(&self.chi)
            .map(|(s, c)| s.into_iter().zip(c).map(|(a, b)| a - b.clone()).collect())
            .collect()
    }

    /// `Σ_s χ_s Z_s` on every leaf path. `value(t, i) = None` means `−∞`,
    /// which only matters where the mass is positive.
    pub fn stopped_value(
        &self,
        tree: &EventTree,
        value: impl Fn(usize, usize) -> Option<S>,
    ) -> Vec<Option<S>> {
        self.tail_value(tree, 0, value)
    }

    /// `Σ_{s≥t} χ_s Z_s` on every leaf path.
    pub fn tail_value(
        &self,
        tree: &EventTree,
        from: usize,
        value: impl Fn(usize, usize) -> Option<S>,
    ) -> Vec<Option<S>> {
        let horizon = tree.horizon();
        (0..tree.level_size(horizon))
            .map(|leaf| {
                let path = tree.path_to(horizon, leaf);
                let mut acc = Some(S::zero());
                for (t, &i) in path.iter().enumerate().skip(from) {
                    let m = &self.chi[t][i];
                    if m.is_zero_value() {
                        continue;
                    }
                    acc = match (acc, value(t, i)) {
                        (Some(a), Some(v)) => Some(a + m.clone() * v),
                        _ => None,
                    };
                }
                acc
            })
            .collect()
    }
}

impl PureStoppingTime {
    pub fn new(tree: &EventTree, stop: Vec<Vec<bool>>) -> Result<Self> {
        tree.require_tree()?;
        let shape_ok = stop.len() == tree.horizon() + 1
            && stop.iter().enumerate().all(|(t, l)| l.len() == tree.level_size(t));
        if !shape_ok {
            return Err(Error::Shape("stopping time does not match the tree".into()));
        }
        let horizon = tree.horizon();
        for leaf in 0..tree.level_size(horizon) {
            let path = tree.path_to(horizon, leaf);
            let hits = path.iter().enumerate().filter(|&(t, &i)| stop[t][i]).count();
            if hits != 1 {
                return Err(Error::Shape(format!(
                    "path to leaf {leaf} stops {hits} times"
                )));
            }
        }
        Ok(PureStoppingTime { stop })
    }

    /// The stopping time that exercises at time `t` on every path.
    pub fn constant(tree: &EventTree, t: usize) -> Self {
        PureStoppingTime {
            stop: (0..=tree.horizon())
                .map(|s| vec![s == t; tree.level_size(s)])
                .collect(),
        }
    }

    pub fn stops_at(&self, t: usize, i: usize) -> bool {
        self.stop[t][i]
    }

    pub fn to_mixed<S: Scalar>(&self) -> MixedStoppingTime<S> {
        MixedStoppingTime {
            chi: self
                .stop
                .iter()
                .map(|l| l.iter().map(|&b| if b { S::one() } else { S::zero() }).collect())
                .collect(),
        }
    }

    /// Number of pure stopping times that only stop at `allowed` nodes,
    /// saturating at `usize::MAX`.
    pub fn count(tree: &EventTree, allowed: impl Fn(usize, usize) -> bool) -> usize {
        let horizon = tree.horizon();
        let mut counts: Vec<usize> = (0..tree.level_size(horizon))
            .map(|i| usize::from(allowed(horizon, i)))
            .collect();
        for t in (0..horizon).rev() {
            counts = (0..tree.level_size(t))
                .map(|i| {
                    let ahead = tree
                        .successors(t, i)
                        .iter()
                        .fold(1usize, |acc, &j| acc.saturating_mul(counts[j]));
                    ahead.saturating_add(usize::from(allowed(t, i)))
                })
                .collect();
        }
        counts[0]
    }

    /// All pure stopping times that only stop at `allowed` nodes. Fails when
    /// there are more than `cap` of them.
    pub fn enumerate(
        tree: &EventTree,
        allowed: impl Fn(usize, usize) -> bool,
        cap: usize,
    ) -> Result<Vec<PureStoppingTime>> {
        tree.require_tree()?;
        let n = Self::count(tree, &allowed);
        if n > cap {
            return Err(Error::BudgetExceeded(format!(
                "{n} pure stopping times exceed the limit of {cap}"
            )));
        }
        // stop sets of each subtree, as lists of nodes
        let horizon = tree.horizon();
        let mut sets: Vec<Vec<Vec<(usize, usize)>>> = (0..tree.level_size(horizon))
            .map(|i| if allowed(horizon, i) { vec![vec![(horizon, i)]] } else { Vec::new() })
            .collect();
        for t in (0..horizon).rev() {
            sets = (0..tree.level_size(t))
                .map(|i| {
                    let mut out: Vec<Vec<(usize, usize)>> = Vec::new();
                    if allowed(t, i) {
                        out.push(vec![(t, i)]);
                    }
                    let mut product: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
                    for &j in tree.successors(t, i) {
                        product = product
                            .iter()
                            .flat_map(|prefix| {
                                sets[j].iter().map(move |tail| {
                                    let mut v = prefix.clone();
                                    v.extend_from_slice(tail);
                                    v
                                })
                            })
                            .collect();
                    }
                    out.extend(product);
                    out
                })
                .collect();
        }
        Ok(sets
            .swap_remove(0)
            .into_iter()
            .map(|nodes| {
                let mut stop: Vec<Vec<bool>> = (0..=horizon).map(|t| vec![false; tree.level_size(t)]).collect();
                for (t, i) in nodes {
                    stop[t][i] = true;
                }
                PureStoppingTime { stop }
            })
            .collect())
    }

    /// Exercise time on the path to each leaf.
    pub fn times(&self, tree: &EventTree) -> Vec<usize> {
        let horizon = tree.horizon();
        (0..tree.level_size(horizon))
            .map(|leaf| {
                let path = tree.path_to(horizon, leaf);
                path.iter()
                    .enumerate()
                    .position(|(t, &i)| self.stop[t][i])
                    .expect("validated")
            })
            .collect()
    }
}

/// `E_P(X | F_t)` for a random variable given per leaf; `None` at nodes of
/// zero probability (and where `X` takes the value `−∞` with positive
/// probability). `measure[t][i]` are unconditional node probabilities.
pub fn conditional_expectation<S: Scalar>(
    tree: &EventTree,
    measure: &[Vec<S>],
    leaf_values: &[Option<S>],
    t: usize,
) -> Vec<Option<S>> {
    let horizon = tree.horizon();
    // integrate level by level from the leaves
    let mut acc: Vec<Option<S>> = leaf_values
        .iter()
        .zip(&measure[horizon])
        .map(|(v, p)| {
            if p.is_zero_value() {
                Some(S::zero())
            } else {
                v.clone().map(|v| v * p.clone())
            }
        })
        .collect();
    for s in (t..horizon).rev() {
        let next: Vec<Option<S>> = (0..tree.level_size(s))
            .map(|i| {
                tree.successors(s, i).iter().try_fold(S::zero(), |sum, &j| {
                    acc[j].clone().map(|v| sum + v)
                })
            })
            .collect();
        acc = next;
    }
    acc.into_iter()
        .zip(&measure[t])
        .map(|(v, p)| if p.is_zero_value() { None } else { v.map(|v| v / p.clone()) })
        .collect()
}

/// `E_P(X)` for a random variable given per leaf.
pub fn expectation<S: Scalar>(tree: &EventTree, measure: &[Vec<S>], leaf_values: &[Option<S>]) -> Option<S> {
    conditional_expectation(tree, measure, leaf_values, 0)
        .into_iter()
        .next()
        .flatten()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn binary(depth: usize) -> EventTree {
        let succ = (0..depth)
            .map(|t| (0..1usize << t).map(|i| vec![2 * i, 2 * i + 1]).collect())
            .collect();
        EventTree::new(succ).unwrap()
    }

    #[test]
    fn pure_time_embeds_as_indicator() {
        let tree = binary(2);
        let tau = PureStoppingTime::constant(&tree, 1);
        let chi = tau.to_mixed::<Rational>();
        let star = chi.chi_star(&tree);
        assert_eq!(star[1], vec![rat(1, 1); 2]);
        assert_eq!(star[2], vec![rat(0, 1); 4]);
        let z = chi.stopped_value(&tree, |t, i| Some(rat((10 * t + i) as i64, 1)));
        assert_eq!(z, vec![Some(rat(10, 1)), Some(rat(10, 1)), Some(rat(11, 1)), Some(rat(11, 1))]);
        assert_eq!(tau.times(&tree), vec![1, 1, 1, 1]);
    }

    #[test]
    fn enumerates_all_stopping_times() {
        let tree = binary(2);
        let all = PureStoppingTime::enumerate(&tree, |_, _| true, 100).unwrap();
        // stop at the root, or at each child independently choose 1 + 1·1 = 2
        assert_eq!(all.len(), 1 + 2 * 2);
        assert_eq!(PureStoppingTime::count(&tree, |_, _| true), 5);
        for tau in &all {
            assert!(PureStoppingTime::new(&tree, tau.stop.clone()).is_ok());
        }
        let late = PureStoppingTime::enumerate(&tree, |t, _| t == 2, 100).unwrap();
        assert_eq!(late, vec![PureStoppingTime::constant(&tree, 2)]);
        assert!(PureStoppingTime::enumerate(&tree, |_, _| true, 4).is_err());
        assert!(PureStoppingTime::enumerate(&tree, |t, _| t == 1, 4).unwrap().len() == 1);
    }

    #[test]
    fn uniform_mass_on_a_path() {
        let tree = EventTree::new(vec![vec![vec![0]], vec![vec![0]]]).unwrap();
        let third = rat(1, 3);
        let chi = MixedStoppingTime::new(&tree, vec![vec![third.clone()]; 3]).unwrap();
        let v = chi.stopped_value(&tree, |t, _| Some(rat(t as i64, 1)));
        assert_eq!(v, vec![Some(rat(1, 1))]);
        let ones = chi.stopped_value(&tree, |_, _| Some(rat(1, 1)));
        assert_eq!(ones, vec![Some(rat(1, 1))]);
        assert!(MixedStoppingTime::new(&tree, vec![vec![third]; 2]).is_err());
    }

    #[test]
    fn stopped_sum_of_one_is_chi_star() {
        let tree = binary(2);
        let chi = MixedStoppingTime::new(
            &tree,
            vec![
                vec![rat(1, 4)],
                vec![rat(1, 2), rat(0, 1)],
                vec![rat(1, 4), rat(1, 4), rat(3, 4), rat(3, 4)],
            ],
        )
        .unwrap();
        let star = chi.chi_star(&tree);
        let tail = chi.tail_value(&tree, 1, |_, _| Some(rat(1, 1)));
        let measure = vec![vec![rat(1, 1)], vec![rat(1, 2); 2], vec![rat(1, 4); 4]];
        let cond = conditional_expectation(&tree, &measure, &tail, 1);
        assert_eq!(cond, star[1].iter().cloned().map(Some).collect::<Vec<_>>());
    }

    #[test]
    fn bad_pure_time_rejected() {
        let tree = binary(1);
        assert!(PureStoppingTime::new(&tree, vec![vec![true], vec![true, false]]).is_err());
        assert!(PureStoppingTime::new(&tree, vec![vec![false], vec![true, false]]).is_err());
    }
}
