use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use amtc::buyer::certificate::{buyer_certificate, verify_buyer_certificate, BuyerCertificate};
use amtc::buyer::hedge::{buyer_superhedge_violations, hedge_buyer, BuyerHedge};
use amtc::buyer::{bid_price, price_buyer};
use amtc::market::model_file::{parse_model, Model, ModelSpec, TreeNode};
use amtc::market::{is_self_financing, EventTree, Market, PayoffProcess, Portfolio, PureStoppingTime, Strategy};
use amtc::oracle::{oracle_buyer_price, oracle_seller_price, snell_envelope, DEFAULT_NODE_BUDGET, DEFAULT_STOPPING_CAP};
use amtc::seller::certificate::{seller_certificate, verify_seller_certificate, SellerCertificate};
use amtc::seller::hedge::{hedge_seller, seller_superhedge_violations};
use amtc::seller::pure::check_pure_stopping_gap;
use amtc::seller::{ask_price, price_seller_dual, price_seller_primal};
use amtc::{Error, Rational, Scalar};
use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use crate::preset::{Preset, EXAMPLE4, GRID_COSTS, GRID_STEPS};
use crate::report::{fixed4, fixed4_f64, Check, GridRow, Report};

/// Largest explicit tree a lattice is unfolded into for hedges and
/// certificates.
pub const EXPAND_BUDGET: usize = 20_000;
/// Largest model on which the dual recursion is rerun for verification.
pub const DUAL_BUDGET: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Rational,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        })
    }
}

/// Extra output beyond the ask and bid prices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Outputs {
    pub hedge: bool,
    pub certificate: bool,
    pub pure_gap: bool,
}

impl Outputs {
    pub fn all() -> Self {
        Outputs {
            hedge: true,
            certificate: true,
            pure_gap: true,
        }
    }

    fn any(&self) -> bool {
        self.hedge || self.certificate || self.pure_gap
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Model { name: String, spec: ModelSpec },
    Grid { preset: Preset, steps: Vec<usize>, costs: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub input: Input,
    pub outputs: Outputs,
    /// `None` picks exact arithmetic for explicit trees and floats otherwise.
    pub mode: Option<Mode>,
    pub verify: bool,
}

impl RunSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec = parse_model(&text).map_err(|e| match e {
            Error::Parse { line, column, message } if line > 0 => {
                anyhow!("{}:{line}:{column}: {message}", path.display())
            }
            e => anyhow!("{}: {e}", path.display()),
        })?;
        Ok(RunSpec {
            input: Input::Model {
                name: path.display().to_string(),
                spec,
            },
            outputs: Outputs::default(),
            mode: None,
            verify: false,
        })
    }

    /// Table presets cover the full grid in float arithmetic; `example4`
    /// is exact and dumps everything.
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Example4 => RunSpec {
                input: Input::Model {
                    name: preset.to_string(),
                    spec: parse_model(EXAMPLE4).expect("bundled preset parses"),
                },
                outputs: Outputs::all(),
                mode: Some(Mode::Rational),
                verify: false,
            },
            _ => RunSpec {
                input: Input::Grid {
                    preset,
                    steps: GRID_STEPS.to_vec(),
                    costs: GRID_COSTS.to_vec(),
                },
                outputs: Outputs::default(),
                mode: None,
                verify: false,
            },
        }
    }

    pub fn effective_mode(&self) -> Mode {
        self.mode.unwrap_or(match &self.input {
            Input::Model { spec, .. } if spec.is_explicit_tree() => Mode::Rational,
            _ => Mode::Float,
        })
    }
}

/// Prices, dumps and checks for one model.
struct Piece {
    row: GridRow,
    details: Vec<String>,
    checks: Vec<Check>,
    skipped: Vec<String>,
}

pub fn run(spec: &RunSpec) -> Result<Report> {
    let mode = spec.effective_mode();
    match &spec.input {
        Input::Model { name, spec: model } => {
            let piece = match mode {
                Mode::Rational => price_model::<Rational>(model, &spec.outputs, spec.verify)?,
                Mode::Float => price_model::<f64>(model, &spec.outputs, spec.verify)?,
            };
            let mut report = Report::new(name.clone(), mode);
            if mode == Mode::Rational {
                report.exact = Some((piece.row.ask.clone(), piece.row.bid.clone()));
            }
            report.rows.push(piece.row);
            report.details = piece.details;
            report.checks = piece.checks;
            report.skipped = piece.skipped;
            Ok(report)
        }
        Input::Grid { preset, steps, costs } => {
            if spec.outputs.any() {
                return Err(anyhow!("table presets report prices only"));
            }
            let cells: Vec<(f64, usize)> = costs.iter().flat_map(|&k| steps.iter().map(move |&n| (k, n))).collect();
            let pieces = cells
                .par_iter()
                .map(|&(k, n)| {
                    let model = preset.cell(n, k).expect("grid preset");
                    match mode {
                        Mode::Rational => price_model::<Rational>(&model, &Outputs::default(), spec.verify),
                        Mode::Float => price_model::<f64>(&model, &Outputs::default(), spec.verify),
                    }
                    .with_context(|| format!("N={n}, k={k}"))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut report = Report::new(preset.to_string(), mode);
            for (piece, (k, n)) in pieces.into_iter().zip(cells) {
                let cell = format!("N={n} k={}%", fixed4_f64(100.0 * k));
                report.rows.push(piece.row);
                report.checks.extend(piece.checks.into_iter().map(|mut c| {
                    c.name = format!("{cell}: {}", c.name);
                    c
                }));
                report.skipped.extend(piece.skipped.into_iter().map(|s| format!("{cell}: {s}")));
            }
            Ok(report)
        }
    }
}

fn exact<S: Scalar>(x: &S) -> Result<Rational> {
    x.to_rational().ok_or_else(|| anyhow!("non-finite price {x}"))
}

/// A model on an explicit tree, with a printable label per node.
struct Explicit<S> {
    market: Market<S>,
    payoff: PayoffProcess<S>,
    labels: Vec<Vec<String>>,
}

/// Node ids grouped by level, in file order.
fn tree_labels(nodes: &[TreeNode]) -> Vec<Vec<String>> {
    let mut depth: HashMap<&str, usize> = HashMap::new();
    let mut labels: Vec<Vec<String>> = Vec::new();
    for n in nodes {
        let d = n.parent.as_ref().map_or(0, |p| depth[p.as_str()] + 1);
        depth.insert(n.id.as_str(), d);
        if labels.len() <= d {
            labels.resize(d + 1, Vec::new());
        }
        labels[d].push(n.id.clone());
    }
    labels
}

/// Paths of moves from the root: `d`/`u` on binomial steps, `d`/`m`/`u` on
/// trinomial ones and `-` on a single continuation.
fn path_labels(tree: &EventTree) -> Vec<Vec<String>> {
    let mut labels = vec![vec!["root".to_string()]];
    for t in 0..tree.horizon() {
        let mut next = vec![String::new(); tree.level_size(t + 1)];
        for i in 0..tree.level_size(t) {
            let succ = tree.successors(t, i);
            let prefix = if t == 0 { "" } else { labels[t][i].as_str() };
            for (k, &j) in succ.iter().enumerate() {
                let step = match succ.len() {
                    1 => "-".to_string(),
                    2 => ["d", "u"][k].to_string(),
                    3 => ["d", "m", "u"][k].to_string(),
                    _ => format!("[{k}]"),
                };
                next[j] = format!("{prefix}{step}");
            }
        }
        labels.push(next);
    }
    labels
}

fn explicit_tree<S: Scalar>(spec: &ModelSpec, model: &Model<S>, required: bool) -> Result<Option<Explicit<S>>> {
    match spec {
        ModelSpec::Tree { nodes } => Ok(Some(Explicit {
            market: model.market.clone(),
            payoff: model.payoff.clone(),
            labels: tree_labels(nodes),
        })),
        ModelSpec::Lattice { .. } => match model.market.expand(EXPAND_BUDGET) {
            Ok((market, origin)) => {
                let labels = path_labels(market.tree());
                Ok(Some(Explicit {
                    payoff: model.payoff.reindex(&origin),
                    market,
                    labels,
                }))
            }
            Err(Error::BudgetExceeded(_)) if !required => Ok(None),
            Err(e) => Err(e).context("hedges, certificates and stopping times need the lattice unfolded into a tree"),
        },
    }
}

/// Everything derived on an explicit tree.
struct Solution<S> {
    ask: S,
    seller: Strategy<S>,
    certificate: SellerCertificate<S>,
    buyer: BuyerHedge<S>,
    buyer_certificate: BuyerCertificate<S>,
}

fn solve<S: Scalar>(ex: &Explicit<S>, bid: &S) -> Result<Solution<S>> {
    let (m, p) = (&ex.market, &ex.payoff);
    let (ask, fns) = price_seller_primal(m, p)?;
    let seller = hedge_seller(m, &fns, Portfolio::new(ask.clone(), S::zero()))?;
    let (_, dual) = price_seller_dual(m, p)?;
    let certificate = seller_certificate(m, p, &dual)?;
    let (_, bfns) = price_buyer(m, p)?;
    let buyer = hedge_buyer(m, &bfns, Portfolio::new(-bid.clone(), S::zero()))?;
    let buyer_certificate = buyer_certificate(m, p, &buyer.stopping)?;
    Ok(Solution {
        ask,
        seller,
        certificate,
        buyer,
        buyer_certificate,
    })
}

fn price_model<S: Scalar>(spec: &ModelSpec, outputs: &Outputs, verify: bool) -> Result<Piece> {
    let model = spec.build::<S>()?;
    let (market, payoff) = (&model.market, &model.payoff);
    let (steps, cost) = match spec {
        ModelSpec::Lattice { params, .. } => (params.steps, Some(params.cost)),
        ModelSpec::Tree { .. } => (market.horizon(), None),
    };
    let ask = ask_price(market, payoff)?;
    let bid = bid_price(market, payoff)?;
    let mut piece = Piece {
        row: GridRow {
            steps,
            cost,
            ask: exact(&ask)?,
            bid: exact(&bid)?,
        },
        details: Vec::new(),
        checks: Vec::new(),
        skipped: Vec::new(),
    };
    if verify {
        lattice_checks(&mut piece, market, payoff, &ask, &bid);
    }
    if !outputs.any() && !verify {
        return Ok(piece);
    }
    let Some(ex) = explicit_tree(spec, &model, outputs.any())? else {
        piece
            .skipped
            .push(format!("hedge, certificate and oracle checks: tree would exceed {EXPAND_BUDGET} nodes"));
        return Ok(piece);
    };
    let sol = solve(&ex, &bid)?;
    if outputs.hedge {
        piece.details.push(dump_hedges(&ex, &sol));
    }
    if outputs.certificate {
        piece.details.push(dump_certificates(&ex, &sol));
    }
    if outputs.pure_gap {
        let gap = check_pure_stopping_gap(&ex.market, &ex.payoff, DEFAULT_STOPPING_CAP)?;
        piece.details.push(format!(
            "pure stopping times: best seller value {} = {}, gap to the ask {}\n  best stops at: {}\n",
            fixed4(&exact(&gap.pure_value)?),
            gap.pure_value,
            gap.gap,
            stop_labels(&ex, &gap.best)
        ));
    }
    if verify {
        tree_checks(&mut piece, &ex, &sol, &ask, &bid);
    }
    Ok(piece)
}

fn stop_labels<S: Scalar>(ex: &Explicit<S>, tau: &PureStoppingTime) -> String {
    ex.market
        .tree()
        .nodes()
        .filter(|&(t, i)| tau.stops_at(t, i))
        .map(|(t, i)| ex.labels[t][i].as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn row(out: &mut String, cells: &[String]) {
    let _ = write!(out, "  {:<8}", cells[0]);
    for c in &cells[1..] {
        let _ = write!(out, " {c:>12}");
    }
    out.push('\n');
}

fn dump_strategy<S: Scalar>(out: &mut String, ex: &Explicit<S>, strategy: &Strategy<S>) {
    let tree = ex.market.tree();
    row(out, &["node".into(), "cash".into(), "shares".into()]);
    let init = strategy.initial();
    row(out, &["(start)".into(), init.cash.to_string(), init.shares.to_string()]);
    for t in 0..tree.horizon() {
        for i in 0..tree.level_size(t) {
            let p = strategy.chosen(t, i);
            row(out, &[ex.labels[t][i].clone(), p.cash.to_string(), p.shares.to_string()]);
        }
    }
}

fn dump_hedges<S: Scalar>(ex: &Explicit<S>, sol: &Solution<S>) -> String {
    let mut out = String::from("seller hedge, holdings chosen at each node:\n");
    dump_strategy(&mut out, ex, &sol.seller);
    out.push_str("\nbuyer hedge, holdings chosen at each node:\n");
    dump_strategy(&mut out, ex, &sol.buyer.strategy);
    let _ = writeln!(out, "  buyer exercises at: {}", stop_labels(ex, &sol.buyer.stopping));
    out
}

fn dump_certificates<S: Scalar>(ex: &Explicit<S>, sol: &Solution<S>) -> String {
    let tree = ex.market.tree();
    let cert = &sol.certificate;
    let mut out = format!("seller certificate, expected stopped payoff {}:\n", cert.value);
    row(&mut out, &["node".into(), "chi".into(), "P".into(), "S".into()]);
    for (t, i) in tree.nodes() {
        row(
            &mut out,
            &[
                ex.labels[t][i].clone(),
                cert.stopping.mass(t, i).to_string(),
                cert.pair.measure()[t][i].to_string(),
                cert.pair.price()[t][i].to_string(),
            ],
        );
    }
    let b = &sol.buyer_certificate;
    let _ = writeln!(
        out,
        "\nbuyer certificate, stopping at {}, expected payoff {}:",
        stop_labels(ex, &b.stopping),
        b.value
    );
    row(&mut out, &["node".into(), "P".into(), "S".into()]);
    for (t, i) in tree.nodes() {
        row(
            &mut out,
            &[
                ex.labels[t][i].clone(),
                b.pair.measure()[t][i].to_string(),
                b.pair.price()[t][i].to_string(),
            ],
        );
    }
    out
}

/// Checks that do not need an explicit tree.
fn lattice_checks<S: Scalar>(piece: &mut Piece, market: &Market<S>, payoff: &PayoffProcess<S>, ask: &S, bid: &S) {
    piece.checks.push(Check::new("bid <= ask", S::le_tol(bid, ask), format!("{bid} vs {ask}")));
    if market.tree().node_count() <= DUAL_BUDGET {
        piece.checks.push(match price_seller_dual(market, payoff) {
            Ok((dual, _)) => Check::new("seller primal = dual", S::near(&dual, ask), format!("dual {dual}")),
            Err(e) => Check::new("seller primal = dual", false, e.to_string()),
        });
    } else {
        piece.skipped.push(format!("seller primal = dual: more than {DUAL_BUDGET} nodes"));
    }
    if market.has_zero_spread() {
        match snell_envelope(market, payoff) {
            Ok(v) => piece.checks.push(Check::new(
                "zero spread: ask = bid = Snell envelope",
                S::near(&v, ask) && S::near(&v, bid),
                format!("Snell envelope {v}"),
            )),
            Err(Error::Unsupported(why)) => piece.skipped.push(format!("Snell envelope: {why}")),
            Err(e) => piece.checks.push(Check::new("zero spread: ask = bid = Snell envelope", false, e.to_string())),
        }
    }
}

fn first<T: fmt::Debug>(v: &[T]) -> String {
    v.first().map_or(String::new(), |x| format!("{} violations, first {x:?}", v.len()))
}

fn tree_checks<S: Scalar>(piece: &mut Piece, ex: &Explicit<S>, sol: &Solution<S>, ask: &S, bid: &S) {
    let (m, p) = (&ex.market, &ex.payoff);
    let checks = &mut piece.checks;
    checks.push(Check::new("full and price-only recursions agree", S::near(&sol.ask, ask), sol.ask.to_string()));
    let result = |name: &str, r: amtc::Result<Vec<(usize, usize, f64)>>| match r {
        Ok(v) => Check::new(name, v.is_empty(), first(&v)),
        Err(e) => Check::new(name, false, e.to_string()),
    };
    checks.push(result("seller hedge superhedges", seller_superhedge_violations(m, p, &sol.seller)));
    checks.push(result("seller hedge is self-financing", is_self_financing(&sol.seller, m).map(|r| r.violations)));
    checks.push(result("buyer hedge superhedges", buyer_superhedge_violations(m, p, &sol.buyer)));
    checks.push(result("buyer hedge is self-financing", is_self_financing(&sol.buyer.strategy, m).map(|r| r.violations)));
    let r = verify_seller_certificate(m, p, &sol.certificate, &sol.ask);
    checks.push(Check::new("seller certificate", r.ok, first(&r.violations)));
    let r = verify_buyer_certificate(m, p, &sol.buyer_certificate, bid);
    checks.push(Check::new("buyer certificate", r.ok, first(&r.violations)));
    if m.tree().node_count() > DEFAULT_NODE_BUDGET {
        piece
            .skipped
            .push(format!("oracle prices: more than {DEFAULT_NODE_BUDGET} nodes"));
        return;
    }
    // the oracle works in exact arithmetic whatever the mode
    let conv = |x: &S| x.to_rational().expect("finite model data");
    let (mr, pr) = (m.map_scalar(conv), p.map_scalar(conv));
    checks.push(match oracle_seller_price(&mr, &pr, DEFAULT_NODE_BUDGET) {
        Ok(o) => Check::new("oracle seller price", S::near(&S::from_rational(&o.price), ask), o.price.to_string()),
        Err(e) => Check::new("oracle seller price", false, e.to_string()),
    });
    checks.push(match oracle_buyer_price(&mr, &pr, DEFAULT_NODE_BUDGET, DEFAULT_STOPPING_CAP) {
        Ok(o) => {
            let v = S::from_rational(&o.price);
            // sampled stopping times only bound the bid from below
            let ok = if o.exhaustive { S::near(&v, bid) } else { S::le_tol(&v, bid) };
            Check::new("oracle buyer price", ok, o.price.to_string())
        }
        Err(e) => Check::new("oracle buyer price", false, e.to_string()),
    });
}
