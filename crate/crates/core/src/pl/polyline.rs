use crate::scalar::Scalar;

/// Finite continuous piecewise linear function on the whole real line.
///
/// Stored as the vertices `pts` (strictly increasing abscissae) plus the slopes
/// of the two unbounded rays. Canonical form keeps only genuine kinks; a
/// linear function keeps a single anchor vertex at `x = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline<S> {
    pts: Vec<(S, S)>,
    left: S,
    right: S,
}

fn seg_slope<S: Scalar>(p: &(S, S), q: &(S, S)) -> S {
    (q.1.clone() - p.1.clone()) / (q.0.clone() - p.0.clone())
}

impl<S: Scalar> Polyline<S> {
    /// Builds the canonical form of the function through `pts` with the given
    /// ray slopes. `pts` must be sorted by abscissa and nonempty.
    pub(crate) fn canonical(pts: Vec<(S, S)>, left: S, right: S) -> Self {
        debug_assert!(!pts.is_empty());
        let mut out: Vec<(S, S)> = Vec::with_capacity(pts.len());
        for p in pts {
            if let Some(last) = out.last() {
                if S::near(&last.0, &p.0) || p.0 <= last.0 {
                    continue;
                }
            }
            out.push(p);
            while out.len() >= 2 {
                let k = out.len() - 2;
                let slope_in = if k == 0 {
                    left.clone()
                } else {
                    seg_slope(&out[k - 1], &out[k])
                };
                let slope_out = seg_slope(&out[k], &out[k + 1]);
                if S::near(&slope_in, &slope_out) {
                    out.remove(k);
                } else {
                    break;
                }
            }
        }
        while let Some(last) = out.last() {
            let n = out.len();
            let slope_in = if n == 1 {
                left.clone()
            } else {
                seg_slope(&out[n - 2], last)
            };
            if !S::near(&slope_in, &right) {
                break;
            }
            if n == 1 {
                let (x, y) = last.clone();
                let anchor = y - right.clone() * x;
                return Polyline {
                    pts: vec![(S::zero(), anchor)],
                    left: right.clone(),
                    right,
                };
            }
            out.pop();
        }
        Polyline { pts: out, left, right }
    }

    pub(crate) fn linear(slope: S, value_at_zero: S) -> Self {
        Polyline {
            pts: vec![(S::zero(), value_at_zero)],
            left: slope.clone(),
            right: slope,
        }
    }

    pub fn points(&self) -> &[(S, S)] {
        &self.pts
    }

    pub fn left_slope(&self) -> &S {
        &self.left
    }

    pub fn right_slope(&self) -> &S {
        &self.right
    }

    /// Slopes from the left ray to the right ray (`points().len() + 1` entries).
    pub fn slopes(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.pts.len() + 1);
        out.push(self.left.clone());
        for w in self.pts.windows(2) {
            out.push(seg_slope(&w[0], &w[1]));
        }
        out.push(self.right.clone());
        out
    }

    pub fn eval(&self, y: &S) -> S {
        let pts = &self.pts;
        let first = &pts[0];
        if *y <= first.0 {
            return first.1.clone() + self.left.clone() * (y.clone() - first.0.clone());
        }
        let last = &pts[pts.len() - 1];
        if *y >= last.0 {
            return last.1.clone() + self.right.clone() * (y.clone() - last.0.clone());
        }
        // first index with x > y; guaranteed in 1..len
        let j = pts.partition_point(|p| p.0 <= *y);
        let (p, q) = (&pts[j - 1], &pts[j]);
        p.1.clone() + seg_slope(p, q) * (y.clone() - p.0.clone())
    }

    /// Evaluates at an ascending sequence of abscissae in one sweep.
    pub(crate) fn eval_sorted(&self, ys: &[S]) -> Vec<S> {
        let pts = &self.pts;
        let n = pts.len();
        let mut j = 0usize;
        let mut out = Vec::with_capacity(ys.len());
        for y in ys {
            while j < n && pts[j].0 <= *y {
                j += 1;
            }
            let v = if j == 0 {
                pts[0].1.clone() + self.left.clone() * (y.clone() - pts[0].0.clone())
            } else if j == n {
                pts[n - 1].1.clone() + self.right.clone() * (y.clone() - pts[n - 1].0.clone())
            } else {
                let (p, q) = (&pts[j - 1], &pts[j]);
                p.1.clone() + seg_slope(p, q) * (y.clone() - p.0.clone())
            };
            out.push(v);
        }
        out
    }

    /// `y ↦ self(y) + c0 + c1·y`
    pub(crate) fn add_affine(&self, c0: &S, c1: &S) -> Self {
        Polyline {
            pts: self
                .pts
                .iter()
                .map(|(x, y)| (x.clone(), y.clone() + c0.clone() + c1.clone() * x.clone()))
                .collect(),
            left: self.left.clone() + c1.clone(),
            right: self.right.clone() + c1.clone(),
        }
    }

    /// `y ↦ self(-y)`
    pub(crate) fn reflect(&self) -> Self {
        Polyline {
            pts: self
                .pts
                .iter()
                .rev()
                .map(|(x, y)| (-x.clone(), y.clone()))
                .collect(),
            left: -self.right.clone(),
            right: -self.left.clone(),
        }
    }

    /// `y ↦ self(y + d)`
    pub(crate) fn shift(&self, d: &S) -> Self {
        Polyline {
            pts: self
                .pts
                .iter()
                .map(|(x, y)| (x.clone() - d.clone(), y.clone()))
                .collect(),
            left: self.left.clone(),
            right: self.right.clone(),
        }
    }

    pub fn is_convex(&self) -> bool {
        self.slopes().windows(2).all(|w| S::le_tol(&w[0], &w[1]))
    }

    fn merged_abscissae(&self, other: &Self) -> Vec<S> {
        let (a, b) = (&self.pts, &other.pts);
        let mut out: Vec<S> = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
            let x = if take_a {
                i += 1;
                a[i - 1].0.clone()
            } else {
                j += 1;
                b[j - 1].0.clone()
            };
            match out.last() {
                Some(last) if S::near(last, &x) => {}
                _ => out.push(x),
            }
        }
        out
    }

    pub(crate) fn sum(&self, other: &Self) -> Self {
        let xs = self.merged_abscissae(other);
        let fa = self.eval_sorted(&xs);
        let fb = other.eval_sorted(&xs);
        let pts = xs
            .into_iter()
            .zip(fa.into_iter().zip(fb))
            .map(|(x, (u, v))| (x, u + v))
            .collect();
        Polyline::canonical(
            pts,
            self.left.clone() + other.left.clone(),
            self.right.clone() + other.right.clone(),
        )
    }

    /// Pointwise maximum (`take_max`) or minimum of two polylines.
    pub(crate) fn envelope(&self, other: &Self, take_max: bool) -> Self {
        let xs = self.merged_abscissae(other);
        let fv = self.eval_sorted(&xs);
        let gv = other.eval_sorted(&xs);
        let n = xs.len();
        let sign = |i: usize| -> i8 {
            if S::near(&fv[i], &gv[i]) {
                0
            } else if fv[i] > gv[i] {
                1
            } else {
                -1
            }
        };
        let pick = |a: &S, b: &S| -> S {
            if (a >= b) == take_max {
                a.clone()
            } else {
                b.clone()
            }
        };
        let mut pts: Vec<(S, S)> = Vec::with_capacity(2 * n + 2);

        // crossing on the left ray
        let dl = self.left.clone() - other.left.clone();
        let s0 = sign(0);
        if s0 != 0 && !S::near(&dl, &S::zero()) && ((dl > S::zero()) == (s0 > 0)) {
            let d0 = fv[0].clone() - gv[0].clone();
            let y = xs[0].clone() - d0 / dl.clone();
            if y < xs[0] {
                let v = fv[0].clone() + self.left.clone() * (y.clone() - xs[0].clone());
                pts.push((y, v));
            }
        }
        for i in 0..n {
            pts.push((xs[i].clone(), pick(&fv[i], &gv[i])));
            if i + 1 < n {
                let (a, b) = (sign(i), sign(i + 1));
                if a * b < 0 {
                    let di = fv[i].clone() - gv[i].clone();
                    let dj = fv[i + 1].clone() - gv[i + 1].clone();
                    let t = di.clone() / (di - dj);
                    let y = xs[i].clone() + (xs[i + 1].clone() - xs[i].clone()) * t.clone();
                    let v = fv[i].clone() + (fv[i + 1].clone() - fv[i].clone()) * t;
                    pts.push((y, v));
                }
            }
        }
        // crossing on the right ray
        let dr = self.right.clone() - other.right.clone();
        let sn = sign(n - 1);
        if sn != 0 && !S::near(&dr, &S::zero()) && ((dr > S::zero()) != (sn > 0)) {
            let dn = fv[n - 1].clone() - gv[n - 1].clone();
            let y = xs[n - 1].clone() - dn / dr.clone();
            if y > xs[n - 1] {
                let v = fv[n - 1].clone() + self.right.clone() * (y.clone() - xs[n - 1].clone());
                pts.push((y, v));
            }
        }

        // far-left: smaller slope dominates from above; far-right: larger slope
        let left = if S::near(&dl, &S::zero()) {
            if (s0 >= 0) == take_max {
                self.left.clone()
            } else {
                other.left.clone()
            }
        } else if (dl < S::zero()) == take_max {
            self.left.clone()
        } else {
            other.left.clone()
        };
        let right = if S::near(&dr, &S::zero()) {
            if (sn >= 0) == take_max {
                self.right.clone()
            } else {
                other.right.clone()
            }
        } else if (dr > S::zero()) == take_max {
            self.right.clone()
        } else {
            other.right.clone()
        };
        Polyline::canonical(pts, left, right)
    }

    /// `y ↦ inf_{z ≤ y} self(z)`. The left ray slope must be `≤ 0` (up to tolerance).
    pub(crate) fn prefix_min(&self) -> Self {
        let pts = &self.pts;
        let mut out: Vec<(S, S)> = Vec::with_capacity(pts.len() * 2);
        let left = if self.left > S::zero() {
            S::zero()
        } else {
            self.left.clone()
        };
        out.push(pts[0].clone());
        let mut following = true;
        let mut m = pts[0].1.clone();
        for w in pts.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            if following {
                if q.1 <= p.1 {
                    m = q.1.clone();
                    out.push(q.clone());
                } else {
                    following = false;
                    out.push((q.0.clone(), m.clone()));
                }
            } else if q.1 < m {
                let z = p.0.clone()
                    + (m.clone() - p.1.clone()) * (q.0.clone() - p.0.clone())
                        / (q.1.clone() - p.1.clone());
                out.push((z, m.clone()));
                out.push(q.clone());
                m = q.1.clone();
                following = true;
            } else {
                out.push((q.0.clone(), m.clone()));
            }
        }
        let right = if following {
            if self.right <= S::zero() {
                self.right.clone()
            } else {
                S::zero()
            }
        } else if self.right < S::zero() {
            let last = &pts[pts.len() - 1];
            let z = last.0.clone() + (m.clone() - last.1.clone()) / self.right.clone();
            out.push((z, m));
            self.right.clone()
        } else {
            S::zero()
        };
        Polyline::canonical(out, left, right)
    }

    /// `y ↦ inf_{z ≥ y} self(z)`. The right ray slope must be `≥ 0` (up to tolerance).
    pub(crate) fn suffix_min(&self) -> Self {
        self.reflect().prefix_min().reflect()
    }
}
