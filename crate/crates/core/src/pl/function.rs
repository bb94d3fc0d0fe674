use crate::error::{invalid_spread, Error, Result};
use crate::pl::polyline::Polyline;
use crate::scalar::Scalar;

/// A continuous piecewise linear function with finitely many pieces, or the
/// bottom element that is `-∞` everywhere.
#[derive(Clone, Debug, PartialEq)]
pub enum PlFunction<S> {
    Bottom,
    Finite(Polyline<S>),
}

impl<S: Scalar> PlFunction<S> {
    pub fn linear(slope: S, value_at_zero: S) -> Self {
        PlFunction::Finite(Polyline::linear(slope, value_at_zero))
    }

    pub fn constant(value: S) -> Self {
        Self::linear(S::zero(), value)
    }

    /// Function through the given vertices with the given ray slopes.
    pub fn from_parts(points: Vec<(S, S)>, left_slope: S, right_slope: S) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Shape("a finite function needs at least one vertex".into()));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Shape("vertex abscissae must be strictly increasing".into()));
        }
        Ok(PlFunction::Finite(Polyline::canonical(
            points,
            left_slope,
            right_slope,
        )))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, PlFunction::Bottom)
    }

    pub fn finite(&self) -> Option<&Polyline<S>> {
        match self {
            PlFunction::Bottom => None,
            PlFunction::Finite(p) => Some(p),
        }
    }

    /// Value at `y`; `None` stands for `-∞`.
    pub fn eval(&self, y: &S) -> Option<S> {
        self.finite().map(|p| p.eval(y))
    }

    pub fn max(&self, other: &Self) -> Self {
        match (self, other) {
            (PlFunction::Bottom, g) => g.clone(),
            (f, PlFunction::Bottom) => f.clone(),
            (PlFunction::Finite(f), PlFunction::Finite(g)) => {
                PlFunction::Finite(f.envelope(g, true))
            }
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        match (self, other) {
            (PlFunction::Finite(f), PlFunction::Finite(g)) => {
                PlFunction::Finite(f.envelope(g, false))
            }
            _ => PlFunction::Bottom,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (PlFunction::Finite(f), PlFunction::Finite(g)) => PlFunction::Finite(f.sum(g)),
            _ => PlFunction::Bottom,
        }
    }

    pub fn is_convex(&self) -> bool {
        self.finite().is_none_or(Polyline::is_convex)
    }

    /// The function whose epigraph is `epi h_{[b,a]} + epi self`, computed as an
    /// infimal convolution so it applies to non-convex functions as well.
    pub fn gradient_restrict(&self, b: &S, a: &S) -> Result<Self> {
        if b > a {
            return Err(invalid_spread(b, a));
        }
        let f = match self {
            PlFunction::Bottom => return Ok(PlFunction::Bottom),
            PlFunction::Finite(f) => f,
        };
        // inf over z ≤ y of f(z) + b(z - y) needs the tilted left ray to rise
        // towards -∞, and symmetrically on the right with the ask
        let tilted_left = f.left_slope().clone() + b.clone();
        let tilted_right = f.right_slope().clone() + a.clone();
        if !S::le_tol(&tilted_left, &S::zero()) || !S::le_tol(&S::zero(), &tilted_right) {
            return Err(Error::UnboundedBelow);
        }
        let zero = S::zero();
        let from_left = f.add_affine(&zero, b).prefix_min().add_affine(&zero, &-b.clone());
        let from_right = f.add_affine(&zero, a).suffix_min().add_affine(&zero, &-a.clone());
        Ok(PlFunction::Finite(from_left.envelope(&from_right, false)))
    }

    /// `y ↦ self(y + d)`
    pub fn shift(&self, d: &S) -> Self {
        match self {
            PlFunction::Bottom => PlFunction::Bottom,
            PlFunction::Finite(f) => PlFunction::Finite(f.shift(d)),
        }
    }

    /// `y ↦ self(y) + c0 + c1·y`
    pub fn add_affine(&self, c0: &S, c1: &S) -> Self {
        match self {
            PlFunction::Bottom => PlFunction::Bottom,
            PlFunction::Finite(f) => {
                let g = f.add_affine(c0, c1);
                PlFunction::Finite(Polyline::canonical(
                    g.points().to_vec(),
                    g.left_slope().clone(),
                    g.right_slope().clone(),
                ))
            }
        }
    }

    pub fn map_scalar<T: Scalar>(&self, conv: impl Fn(&S) -> T) -> PlFunction<T> {
        match self {
            PlFunction::Bottom => PlFunction::Bottom,
            PlFunction::Finite(f) => PlFunction::Finite(Polyline::canonical(
                f.points().iter().map(|(x, y)| (conv(x), conv(y))).collect(),
                conv(f.left_slope()),
                conv(f.right_slope()),
            )),
        }
    }
}

pub fn pl_max<S: Scalar>(f: &PlFunction<S>, g: &PlFunction<S>) -> PlFunction<S> {
    f.max(g)
}

pub fn pl_min<S: Scalar>(f: &PlFunction<S>, g: &PlFunction<S>) -> PlFunction<S> {
    f.min(g)
}

pub fn eval<S: Scalar>(f: &PlFunction<S>, y: &S) -> Option<S> {
    f.eval(y)
}
