use crate::error::{invalid_spread, Error, Result};
use crate::pl::concave::ConcavePl;
use crate::pl::function::PlFunction;
use crate::pl::polyline::Polyline;
use crate::scalar::Scalar;

/// A convex member of [`PlFunction`] (bottom included).
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPl<S>(PlFunction<S>);

impl<S: Scalar> ConvexPl<S> {
    pub fn bottom() -> Self {
        ConvexPl(PlFunction::Bottom)
    }

    /// Checks the slope sequence; returns `None` for a non-convex input.
    pub fn new(f: PlFunction<S>) -> Option<Self> {
        f.is_convex().then_some(ConvexPl(f))
    }

    pub fn as_pl(&self) -> &PlFunction<S> {
        &self.0
    }

    pub fn into_pl(self) -> PlFunction<S> {
        self.0
    }

    pub fn is_bottom(&self) -> bool {
        self.0.is_bottom()
    }

    pub fn eval(&self, y: &S) -> Option<S> {
        self.0.eval(y)
    }

    pub fn max(&self, other: &Self) -> Self {
        ConvexPl(self.0.max(&other.0))
    }

    /// Gradient restriction by slope clamping: the slopes of the result are
    /// those of `self` clipped to `[-a, -b]`.
    pub fn gradient_restrict(&self, b: &S, a: &S) -> Result<Self> {
        if b > a {
            return Err(invalid_spread(b, a));
        }
        let f = match &self.0 {
            PlFunction::Bottom => return Ok(Self::bottom()),
            PlFunction::Finite(f) => f,
        };
        let (neg_a, neg_b) = (-a.clone(), -b.clone());
        let slopes = f.slopes();
        let n = f.points().len();
        if S::lt_strict(&neg_b, &slopes[0]) || S::lt_strict(&slopes[n], &neg_a) {
            return Err(Error::UnboundedBelow);
        }
        let (start, left) = if S::le_tol(&neg_a, &slopes[0]) {
            (0, slopes[0].clone())
        } else {
            let i = (0..n).find(|&i| S::le_tol(&neg_a, &slopes[i + 1])).unwrap_or(n - 1);
            (i, neg_a)
        };
        let (end, right) = if S::le_tol(&slopes[n], &neg_b) {
            (n - 1, slopes[n].clone())
        } else {
            let i = (0..n).rev().find(|&i| S::le_tol(&slopes[i], &neg_b)).unwrap_or(0);
            (i, neg_b)
        };
        let (start, end) = if start <= end { (start, end) } else { (end, start) };
        let pts = f.points()[start..=end].to_vec();
        Ok(ConvexPl(PlFunction::Finite(Polyline::canonical(pts, left, right))))
    }

    /// `x ↦ inf_y (self(y) + x·y)`, concave on `[-f'(+∞), -f'(-∞)]`.
    pub fn dual(&self) -> ConcavePl<S> {
        let f = match &self.0 {
            PlFunction::Bottom => return ConcavePl::bottom(),
            PlFunction::Finite(f) => f,
        };
        let pts = f.points();
        let slopes = f.slopes();
        let mut verts = Vec::with_capacity(slopes.len());
        for k in (0..slopes.len()).rev() {
            let (y, v) = &pts[k.saturating_sub(1)];
            let s = &slopes[k];
            verts.push((-s.clone(), v.clone() - s.clone() * y.clone()));
        }
        ConcavePl::from_sorted_hull(verts)
    }
}

/// `h_{[b,a]}(y) = a·y⁻ − b·y⁺`, the cost of acquiring `y` shares at zero cash.
pub fn transaction_kernel<S: Scalar>(b: &S, a: &S) -> Result<ConvexPl<S>> {
    if b > a {
        return Err(invalid_spread(b, a));
    }
    Ok(ConvexPl(PlFunction::Finite(Polyline::canonical(
        vec![(S::zero(), S::zero())],
        -a.clone(),
        -b.clone(),
    ))))
}

pub fn convex_dual<S: Scalar>(f: &ConvexPl<S>) -> ConcavePl<S> {
    f.dual()
}
