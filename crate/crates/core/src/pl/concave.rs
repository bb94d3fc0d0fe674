use crate::error::{invalid_spread, Error, Result};
use crate::pl::convex::ConvexPl;
use crate::pl::function::PlFunction;
use crate::pl::polyline::Polyline;
use crate::scalar::{max_of, min_of, Scalar};

/// Concave polyhedral function on a compact interval, `-∞` outside it.
///
/// Represented by its vertices in increasing abscissa; an empty vertex list is
/// the bottom element. A single vertex is a function whose domain is a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcavePl<S> {
    verts: Vec<(S, S)>,
}

/// One term of a concave-cap decomposition: weight `weight` on function
/// `index` evaluated at `point`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapAtom<S> {
    pub index: usize,
    pub weight: S,
    pub point: S,
}

fn seg_slope<S: Scalar>(p: &(S, S), q: &(S, S)) -> S {
    (q.1.clone() - p.1.clone()) / (q.0.clone() - p.0.clone())
}

/// Upper hull of points sorted by abscissa (ties allowed).
fn upper_hull<S: Scalar>(pts: Vec<(S, S)>) -> Vec<(S, S)> {
    let mut hull: Vec<(S, S)> = Vec::with_capacity(pts.len());
    for p in pts {
        if let Some(last) = hull.last_mut() {
            if S::near(&last.0, &p.0) {
                if p.1 > last.1 {
                    last.1 = p.1;
                }
                // the raised vertex may now break concavity behind it
                while hull.len() >= 3 {
                    let n = hull.len();
                    let into = seg_slope(&hull[n - 3], &hull[n - 2]);
                    let out = seg_slope(&hull[n - 2], &hull[n - 1]);
                    if S::le_tol(&into, &out) {
                        hull.remove(n - 2);
                    } else {
                        break;
                    }
                }
                continue;
            }
        }
        while hull.len() >= 2 {
            let n = hull.len();
            let into = seg_slope(&hull[n - 2], &hull[n - 1]);
            let out = seg_slope(&hull[n - 1], &p);
            if S::le_tol(&into, &out) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

impl<S: Scalar> ConcavePl<S> {
    pub fn bottom() -> Self {
        ConcavePl { verts: Vec::new() }
    }

    /// `x ↦ value + slope·(x - lo)` restricted to `[lo, hi]`.
    pub fn affine_on(lo: S, hi: S, value_at_lo: S, slope: S) -> Result<Self> {
        if lo > hi {
            return Err(invalid_spread(&lo, &hi));
        }
        let hi_value = value_at_lo.clone() + slope * (hi.clone() - lo.clone());
        Ok(Self::from_sorted_hull(vec![(lo, value_at_lo), (hi, hi_value)]))
    }

    /// Builds a concave function from its vertices; fails if the points are
    /// unsorted or the slopes increase somewhere.
    pub fn from_vertices(verts: Vec<(S, S)>) -> Result<Self> {
        if verts.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Shape("vertex abscissae must be strictly increasing".into()));
        }
        let slopes: Vec<S> = verts.windows(2).map(|w| seg_slope(&w[0], &w[1])).collect();
        if slopes.windows(2).any(|w| S::lt_strict(&w[0], &w[1])) {
            return Err(Error::Shape("slopes of a concave function must not increase".into()));
        }
        Ok(Self::from_sorted_hull(verts))
    }

    pub(crate) fn from_sorted_hull(verts: Vec<(S, S)>) -> Self {
        ConcavePl {
            verts: upper_hull(verts),
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn vertices(&self) -> &[(S, S)] {
        &self.verts
    }

    /// Effective domain `[lo, hi]`, `None` for bottom.
    pub fn domain(&self) -> Option<(S, S)> {
        let first = self.verts.first()?;
        let last = self.verts.last()?;
        Some((first.0.clone(), last.0.clone()))
    }

    /// Nearest point of the domain to `x`, if `x` lies inside up to tolerance.
    fn snap(&self, x: &S) -> Option<S> {
        let (lo, hi) = self.domain()?;
        if x < &lo {
            S::near(x, &lo).then_some(lo)
        } else if x > &hi {
            S::near(x, &hi).then_some(hi)
        } else {
            Some(x.clone())
        }
    }

    pub fn contains(&self, x: &S) -> bool {
        self.snap(x).is_some()
    }

    /// Value at `x`; `None` stands for `-∞`. Points within tolerance of the
    /// domain are evaluated at the nearest endpoint.
    pub fn eval(&self, x: &S) -> Option<S> {
        let x = self.snap(x)?;
        let v = &self.verts;
        let j = v.partition_point(|p| p.0 <= x);
        if j == 0 {
            return Some(v[0].1.clone());
        }
        if j == v.len() {
            return Some(v[j - 1].1.clone());
        }
        let (p, q) = (&v[j - 1], &v[j]);
        Some(p.1.clone() + seg_slope(p, q) * (x - p.0.clone()))
    }

    /// Leftmost maximiser and the maximum.
    pub fn argmax(&self) -> Option<(S, S)> {
        let mut best: Option<&(S, S)> = None;
        for p in &self.verts {
            match best {
                Some(b) if !S::lt_strict(&b.1, &p.1) => {}
                _ => best = Some(p),
            }
        }
        best.cloned()
    }

    pub fn max_value(&self) -> Option<S> {
        self.argmax().map(|p| p.1)
    }

    /// Restriction of the domain to `[b, a]`; bottom if they do not meet.
    pub fn domain_restrict(&self, b: &S, a: &S) -> Result<Self> {
        if b > a {
            return Err(invalid_spread(b, a));
        }
        let Some((lo, hi)) = self.domain() else {
            return Ok(Self::bottom());
        };
        let new_lo = max_of(&lo, b);
        let new_hi = min_of(&hi, a);
        if new_lo > new_hi {
            if !S::near(&new_lo, &new_hi) {
                return Ok(Self::bottom());
            }
            // touching within tolerance: keep the single shared point
            let x = if hi < *b { hi } else { lo };
            let y = self.eval(&x).expect("endpoint in domain");
            return Ok(ConcavePl { verts: vec![(x, y)] });
        }
        let mut verts = Vec::new();
        verts.push((new_lo.clone(), self.eval(&new_lo).expect("inside domain")));
        verts.extend(
            self.verts
                .iter()
                .filter(|p| p.0 > new_lo && p.0 < new_hi)
                .cloned(),
        );
        if new_hi > new_lo {
            verts.push((new_hi.clone(), self.eval(&new_hi).expect("inside domain")));
        }
        Ok(Self::from_sorted_hull(verts))
    }

    /// The convex function `y ↦ sup_x (self(x) − x·y)` whose dual is `self`.
    pub fn dual_inverse(&self) -> ConvexPl<S> {
        let v = &self.verts;
        let m = v.len();
        if m == 0 {
            return ConvexPl::bottom();
        }
        let pl = if m == 1 {
            let (x, val) = &v[0];
            PlFunction::linear(-x.clone(), val.clone())
        } else {
            let pts: Vec<(S, S)> = (0..m - 1)
                .rev()
                .map(|j| {
                    let s = seg_slope(&v[j], &v[j + 1]);
                    let val = v[j].1.clone() - v[j].0.clone() * s.clone();
                    (s, val)
                })
                .collect();
            PlFunction::Finite(Polyline::canonical(
                pts,
                -v[m - 1].0.clone(),
                -v[0].0.clone(),
            ))
        };
        ConvexPl::new(pl).expect("dual of a concave function is convex")
    }

    pub fn map_scalar<T: Scalar>(&self, conv: impl Fn(&S) -> T) -> ConcavePl<T> {
        ConcavePl::from_sorted_hull(self.verts.iter().map(|(x, y)| (conv(x), conv(y))).collect())
    }
}

/// Least concave majorant of a family; bottom entries are ignored.
pub fn concave_cap<S: Scalar>(vs: &[&ConcavePl<S>]) -> ConcavePl<S> {
    let mut pts: Vec<(S, S)> = vs.iter().flat_map(|v| v.verts.iter().cloned()).collect();
    pts.sort_by(|p, q| {
        p.0.partial_cmp(&q.0)
            .expect("ordered scalars")
            .then(p.1.partial_cmp(&q.1).expect("ordered scalars"))
    });
    ConcavePl::from_sorted_hull(pts)
}

/// Writes `cap(x)` as a convex combination of values of the family members.
///
/// A single atom is returned when some member attains the cap at `x` (the
/// lowest such index wins). Otherwise the two nearest vertices touching the
/// cap on either side of `x` are combined.
pub fn cap_decompose<S: Scalar>(
    vs: &[&ConcavePl<S>],
    cap: &ConcavePl<S>,
    x: &S,
) -> Result<Vec<CapAtom<S>>> {
    let Some(c) = cap.eval(x) else {
        return Err(Error::OutOfDomain { x: x.to_f64() });
    };
    for (i, v) in vs.iter().enumerate() {
        if let Some(point) = v.snap(x) {
            let value = v.eval(&point).expect("snapped into domain");
            if S::near(&value, &c) {
                return Ok(vec![CapAtom {
                    index: i,
                    weight: S::one(),
                    point,
                }]);
            }
        }
    }
    let mut left: Option<(usize, (S, S))> = None;
    let mut right: Option<(usize, (S, S))> = None;
    for (i, v) in vs.iter().enumerate() {
        for p in &v.verts {
            let Some(cp) = cap.eval(&p.0) else { continue };
            if !S::near(&p.1, &cp) {
                continue;
            }
            if p.0 < *x {
                if left.as_ref().is_none_or(|(_, q)| p.0 > q.0) {
                    left = Some((i, p.clone()));
                }
            } else if p.0 > *x && right.as_ref().is_none_or(|(_, q)| p.0 < q.0) {
                right = Some((i, p.clone()));
            }
        }
    }
    let (Some((il, pl)), Some((ir, pr))) = (left, right) else {
        return Err(Error::OutOfDomain { x: x.to_f64() });
    };
    let wl = (pr.0.clone() - x.clone()) / (pr.0.clone() - pl.0.clone());
    let wr = S::one() - wl.clone();
    Ok(vec![
        CapAtom {
            index: il,
            weight: wl,
            point: pl.0,
        },
        CapAtom {
            index: ir,
            weight: wr,
            point: pr.0,
        },
    ])
}

pub fn domain_restrict<S: Scalar>(v: &ConcavePl<S>, b: &S, a: &S) -> Result<ConcavePl<S>> {
    v.domain_restrict(b, a)
}

pub fn dual_inverse<S: Scalar>(v: &ConcavePl<S>) -> ConvexPl<S> {
    v.dual_inverse()
}
