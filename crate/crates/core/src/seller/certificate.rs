//! Optimal mixed stopping time and approximate martingale for the seller,
//! read off the dual value functions by a forward pass.

use crate::error::Result;
use crate::market::{
    verify_approx_martingale, Market, MartingalePair, MixedStoppingTime, Payoff, PayoffProcess,
};
use crate::pl::{cap_decompose, ConcavePl};
use crate::scalar::Scalar;
use crate::seller::SellerDualFunctions;

/// A mixed stopping time `χ̂` and a pair `(P̂, Ŝ)` attaining the ask price,
/// with the intermediate points of the construction.
#[derive(Clone, Debug)]
pub struct SellerCertificate<S> {
    pub stopping: MixedStoppingTime<S>,
    pub pair: MartingalePair<S>,
    /// Conditional probability of stopping at a node given arrival there.
    pub lambda: Vec<Vec<S>>,
    /// Price at which the continuation value is evaluated.
    pub x_hat: Vec<Vec<S>>,
    /// Price at which the node value is evaluated.
    pub y_hat: Vec<Vec<S>>,
    /// `Z(Ŷ)`, `V(X̂)` and `U(Ŝ)` per node; `None` stands for `−∞`.
    pub z_val: Vec<Vec<Option<S>>>,
    pub v_val: Vec<Vec<Option<S>>>,
    pub u_val: Vec<Vec<Option<S>>>,
    /// `E_P̂(ξ_χ̂ + (Ŝζ)_χ̂)`.
    pub value: S,
}

struct NodeSplit<S> {
    lambda: S,
    x: S,
    s: S,
}

/// Splits the node value at `y` into continuation and exercise parts.
fn split_node<S: Scalar>(v: &ConcavePl<S>, u: &ConcavePl<S>, z: &ConcavePl<S>, y: &S) -> Result<NodeSplit<S>> {
    if z.is_bottom() {
        return Ok(NodeSplit { lambda: S::zero(), x: y.clone(), s: y.clone() });
    }
    let atoms = cap_decompose(&[v, u], z, y)?;
    Ok(match atoms.as_slice() {
        [a] if a.index == 0 => NodeSplit {
            lambda: S::zero(),
            x: a.point.clone(),
            s: a.point.clone(),
        },
        [a] => {
            let x = match v.domain() {
                Some((lo, _)) if *y < lo => lo,
                Some((_, hi)) if *y > hi => hi,
                _ => y.clone(),
            };
            NodeSplit { lambda: S::one(), x, s: a.point.clone() }
        }
        [first, second] => {
            let (va, ua) = if first.index == 0 { (first, second) } else { (second, first) };
            NodeSplit {
                lambda: ua.weight.clone(),
                x: va.point.clone(),
                s: ua.point.clone(),
            }
        }
        _ => unreachable!("cap decomposition has one or two atoms"),
    })
}

/// Forward construction of the certificate. The market must be a tree.
pub fn seller_certificate<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    dual: &SellerDualFunctions<S>,
) -> Result<SellerCertificate<S>> {
    let tree = market.tree();
    tree.require_tree()?;
    let horizon = tree.horizon();
    let shape = |t: usize| tree.level_size(t);
    let mut lambda: Vec<Vec<S>> = (0..=horizon).map(|t| vec![S::zero(); shape(t)]).collect();
    let mut x_hat = lambda.clone();
    let mut s_hat = lambda.clone();
    let mut y_hat = lambda.clone();
    let mut prob = lambda.clone();
    let mut z_val: Vec<Vec<Option<S>>> = (0..=horizon).map(|t| vec![None; shape(t)]).collect();
    let mut v_val = z_val.clone();
    let mut u_val = z_val.clone();

    prob[0][0] = S::one();
    y_hat[0][0] = match dual.z[0][0].argmax() {
        Some((x, _)) => x,
        None => return Err(crate::error::Error::Degenerate),
    };
    for t in 0..=horizon {
        for i in 0..shape(t) {
            let y = y_hat[t][i].clone();
            let z = &dual.z[t][i];
            let u = &dual.u[t][i];
            z_val[t][i] = z.eval(&y);
            if t == horizon {
                lambda[t][i] = S::one();
                x_hat[t][i] = y.clone();
                s_hat[t][i] = y.clone();
                u_val[t][i] = u.eval(&y);
                v_val[t][i] = u_val[t][i].clone();
                continue;
            }
            let v = &dual.v[t][i];
            let split = split_node(v, u, z, &y)?;
            v_val[t][i] = v.eval(&split.x);
            u_val[t][i] = u.eval(&split.s);
            lambda[t][i] = split.lambda;
            s_hat[t][i] = split.s;
            x_hat[t][i] = split.x.clone();

            let succ = tree.successors(t, i);
            let w = &dual.w[t][i];
            let zs: Vec<&ConcavePl<S>> = succ.iter().map(|&j| &dual.z[t + 1][j]).collect();
            for &j in succ {
                let zj = &dual.z[t + 1][j];
                y_hat[t + 1][j] = zj
                    .argmax()
                    .map(|p| p.0)
                    .unwrap_or_else(|| market.bid(t + 1, j).clone());
            }
            if w.contains(&split.x) {
                for atom in cap_decompose(&zs, w, &split.x)? {
                    let j = succ[atom.index];
                    prob[t + 1][j] = prob[t][i].clone() * atom.weight;
                    y_hat[t + 1][j] = atom.point;
                }
            } else {
                // nothing can be exercised below this node, so any measure
                // will do: all mass goes to the first successor
                prob[t + 1][succ[0]] = prob[t][i].clone();
            }
        }
    }

    let mut chi: Vec<Vec<S>> = Vec::with_capacity(horizon + 1);
    let mut alive: Vec<Vec<S>> = vec![vec![S::one()]];
    for t in 0..=horizon {
        let level: Vec<S> = (0..shape(t))
            .map(|i| lambda[t][i].clone() * alive[t][i].clone())
            .collect();
        if t < horizon {
            alive.push(
                (0..shape(t + 1))
                    .map(|j| {
                        let p = tree.parent(t + 1, j).expect("tree node has a parent");
                        alive[t][p].clone() - level[p].clone()
                    })
                    .collect(),
            );
        }
        chi.push(level);
    }
    let mut value = S::zero();
    for (t, i) in tree.nodes() {
        let weight = prob[t][i].clone() * chi[t][i].clone();
        if weight.is_zero_value() {
            continue;
        }
        if let Some(v) = payoff.at(t, i).value_at(&s_hat[t][i]) {
            value = value + weight * v;
        }
    }
    let stopping = MixedStoppingTime::new(tree, chi)?;
    let pair = MartingalePair::new(tree, prob, s_hat)?;
    Ok(SellerCertificate {
        stopping,
        pair,
        lambda,
        x_hat,
        y_hat,
        z_val,
        v_val,
        u_val,
        value,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub ok: bool,
    pub violations: Vec<(usize, usize, String, f64)>,
}

fn opt_near<S: Scalar>(a: &Option<S>, b: &Option<S>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => S::near(a, b),
        (None, None) => true,
        _ => false,
    }
}

fn scaled<S: Scalar>(w: &S, v: &Option<S>) -> Option<S> {
    if w.is_zero_value() {
        Some(S::zero())
    } else {
        v.clone().map(|v| w.clone() * v)
    }
}

/// Checks a certificate against the market, the payoff and an ask price: the
/// approximate martingale property, the node identities of the forward
/// construction, and that the certified value equals the price.
pub fn verify_seller_certificate<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    cert: &SellerCertificate<S>,
    ask: &S,
) -> CertificateReport {
    let tree = market.tree();
    let horizon = tree.horizon();
    let mut violations: Vec<(usize, usize, String, f64)> = verify_approx_martingale(market, &cert.pair, &cert.stopping).violations;
    let chi = cert.stopping.masses();
    let alive = cert.stopping.chi_star(tree);
    let after = cert.stopping.chi_star_after(tree);
    let p = cert.pair.measure();
    let s = cert.pair.price();
    for (t, i) in tree.nodes() {
        let mut fail = |what: &str, amount: f64| violations.push((t, i, what.to_string(), amount));
        for (x, name) in [(&cert.x_hat[t][i], "continuation"), (&s[t][i], "exercise")] {
            if !S::le_tol(market.bid(t, i), x) || !S::le_tol(x, market.ask(t, i)) {
                fail(&format!("{name} price outside the band"), x.to_f64());
            }
        }
        let l = &cert.lambda[t][i];
        let mix = (S::one() - l.clone()) * cert.x_hat[t][i].clone() + l.clone() * s[t][i].clone();
        if !S::near(&mix, &cert.y_hat[t][i]) {
            fail("node price is not the stop/continue mixture", (mix - cert.y_hat[t][i].clone()).to_f64());
        }
        let lhs = alive[t][i].clone() * cert.y_hat[t][i].clone();
        let rhs = after[t][i].clone() * cert.x_hat[t][i].clone() + chi[t][i].clone() * s[t][i].clone();
        if !S::near(&lhs, &rhs) {
            fail("price split does not balance", (lhs - rhs).to_f64());
        }
        let lhs = scaled(&alive[t][i], &cert.z_val[t][i]);
        let rhs = match (scaled(&after[t][i], &cert.v_val[t][i]), scaled(&chi[t][i], &cert.u_val[t][i])) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        if !opt_near(&lhs, &rhs) {
            fail("value split does not balance", f64::NAN);
        }
        if t < horizon && !p[t][i].is_zero_value() && cert.v_val[t][i].is_some() {
            let succ = tree.successors(t, i);
            let ey = succ.iter().fold(S::zero(), |acc, &j| acc + p[t + 1][j].clone() * cert.y_hat[t + 1][j].clone())
                / p[t][i].clone();
            if !S::near(&ey, &cert.x_hat[t][i]) {
                fail("continuation price is not the conditional mean", (ey - cert.x_hat[t][i].clone()).to_f64());
            }
            let ez = succ.iter().try_fold(S::zero(), |acc, &j| {
                scaled(&p[t + 1][j], &cert.z_val[t + 1][j]).map(|v| acc + v)
            });
            let ez = ez.map(|v| v / p[t][i].clone());
            if !opt_near(&ez, &cert.v_val[t][i]) {
                fail("continuation value is not the conditional mean", f64::NAN);
            }
        }
        if !p[t][i].is_zero_value() && !chi[t][i].is_zero_value() && !payoff.at(t, i).is_exercisable() {
            fail("exercise mass on a node without exercise", chi[t][i].to_f64());
        }
    }
    if !S::near(&cert.value, ask) {
        violations.push((0, 0, "certified value differs from the ask price".into(), (cert.value.clone() - ask.clone()).to_f64()));
    }
    if !opt_near(&cert.z_val[0][0], &Some(ask.clone())) {
        violations.push((0, 0, "root value differs from the ask price".into(), f64::NAN));
    }
    CertificateReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// `E_P(ξ_χ + (Sζ)_χ)` for an arbitrary stopping time and pair; `None` if
/// exercise is demanded with positive probability where it is impossible.
pub fn stopped_payoff_value<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    chi: &MixedStoppingTime<S>,
    pair: &MartingalePair<S>,
) -> Option<S> {
    let mut value = S::zero();
    for (t, i) in market.tree().nodes() {
        let w = pair.measure()[t][i].clone() * chi.mass(t, i).clone();
        if w.is_zero_value() {
            continue;
        }
        match payoff.at(t, i) {
            Payoff::Exercisable { .. } => {
                value = value + w * payoff.at(t, i).value_at(&pair.price()[t][i]).expect("exercisable");
            }
            Payoff::NotExercisable => return None,
        }
    }
    Some(value)
}
