//! Declarative model description (TOML).
//!
//! ```toml
//! format = "amtc-model/1"
//!
//! [model]
//! family = "binomial"          # binomial | trinomial | tree
//! s0 = 100
//! sigma = 0.2
//! rate = 0.1                   # continuously compounded
//! maturity = 0.25              # years
//! steps = 20
//! cost = 0.005                 # proportional: bid (1-k)S, ask (1+k)S
//! no_cost_at_time0 = true      # default true
//! never_exercise_step = false  # default false
//!
//! [instrument]
//! kind = "put"                 # physical delivery of (K, -1)
//! strike = 100
//! # kind = "cash_basket"
//! # legs = [{ strike = 95, sign = 1 }, { strike = 105, sign = -1 }]
//! ```
//!
//! The `tree` family lists nodes explicitly instead; children follow the
//! order of appearance and all leaves must sit at the same depth. Numbers may
//! be written as integers, decimals or quoted fractions (`"9/2"`); explicit
//! trees keep them exact.
//!
//! ```toml
//! [model]
//! family = "tree"
//!
//! [[node]]
//! id = "root"
//! bid = 10
//! ask = 10
//! cash = 0
//! shares = 0
//!
//! [[node]]
//! id = "u"
//! parent = "root"
//! bid = 8
//! ask = 16
//! exercisable = false
//! ```

use std::collections::HashMap;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::market::lattice::{american_put_physical, build_binomial, build_trinomial, cash_basket, LatticeParams};
use crate::market::{EventTree, Market, Payoff, PayoffProcess, PriceProcess};
use crate::scalar::{parse_exact_decimal, rat, Rational, Scalar};

pub const FORMAT: &str = "amtc-model/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeFamily {
    Binomial,
    Trinomial,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instrument {
    /// American put with physical delivery of `(K, −1)`.
    Put { strike: f64 },
    /// Cash-settled `Σ sign·(S − K)⁺`, legs given as `(strike, sign)`.
    CashBasket { legs: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub id: String,
    pub parent: Option<String>,
    pub bid: Rational,
    pub ask: Rational,
    pub payoff: Payoff<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Lattice {
        family: LatticeFamily,
        params: LatticeParams,
        instrument: Instrument,
    },
    Tree { nodes: Vec<TreeNode> },
}

/// A market with a payoff, ready for pricing.
#[derive(Clone, Debug)]
pub struct Model<S> {
    pub market: Market<S>,
    pub payoff: PayoffProcess<S>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format: Spanned<String>,
    model: RawModel,
    instrument: Option<RawInstrument>,
    #[serde(default)]
    node: Vec<RawNode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    family: Spanned<String>,
    s0: Option<Spanned<toml::Value>>,
    sigma: Option<Spanned<toml::Value>>,
    rate: Option<Spanned<toml::Value>>,
    maturity: Option<Spanned<toml::Value>>,
    steps: Option<Spanned<i64>>,
    cost: Option<Spanned<toml::Value>>,
    no_cost_at_time0: Option<bool>,
    never_exercise_step: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstrument {
    kind: Spanned<String>,
    strike: Option<Spanned<toml::Value>>,
    legs: Option<Vec<RawLeg>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLeg {
    strike: Spanned<toml::Value>,
    sign: Spanned<toml::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: Spanned<String>,
    parent: Option<Spanned<String>>,
    bid: Spanned<toml::Value>,
    ask: Spanned<toml::Value>,
    cash: Option<Spanned<toml::Value>>,
    shares: Option<Spanned<toml::Value>>,
    exercisable: Option<bool>,
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn error(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        let before = &self.text[..span.start.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Exact value of a number literal, read from the source text so that
    /// decimals such as `0.005` stay exact.
    fn exact(&self, v: &Spanned<toml::Value>) -> Result<Rational> {
        let span = v.span();
        let parsed = match v.get_ref() {
            toml::Value::Integer(i) => Some(Rational::from_i64(*i)),
            toml::Value::Float(_) => parse_exact_decimal(self.text[span.clone()].trim().replace('_', "").as_str()),
            toml::Value::String(s) => parse_exact_decimal(s.trim()),
            _ => None,
        };
        parsed.ok_or_else(|| self.error(span, "expected a number"))
    }

    fn float(&self, v: &Spanned<toml::Value>) -> Result<f64> {
        Ok(self.exact(v)?.to_f64())
    }

    fn required<'v, T>(&self, v: &'v Option<T>, name: &str) -> Result<&'v T> {
        v.as_ref().ok_or_else(|| Error::Parse {
            line: 0,
            column: 0,
            message: format!("missing field `{name}`"),
        })
    }
}

/// Parses a model description.
pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let src = Source { text };
    let raw: RawFile = toml::from_str(text).map_err(|e| match e.span() {
        Some(span) => src.error(span, e.message().to_string()),
        None => src.error(0..0, e.message().to_string()),
    })?;
    if raw.format.get_ref() != FORMAT {
        return Err(src.error(raw.format.span(), format!("unsupported format, expected `{FORMAT}`")));
    }
    let m = &raw.model;
    match m.family.get_ref().as_str() {
        "binomial" | "trinomial" => {
            let family = if m.family.get_ref() == "binomial" {
                LatticeFamily::Binomial
            } else {
                LatticeFamily::Trinomial
            };
            let steps = src.required(&m.steps, "model.steps")?;
            if *steps.get_ref() < 1 {
                return Err(src.error(steps.span(), "steps must be positive"));
            }
            let params = LatticeParams {
                s0: src.float(src.required(&m.s0, "model.s0")?)?,
                sigma: src.float(src.required(&m.sigma, "model.sigma")?)?,
                rate: m.rate.as_ref().map_or(Ok(0.0), |v| src.float(v))?,
                maturity: src.float(src.required(&m.maturity, "model.maturity")?)?,
                steps: *steps.get_ref() as usize,
                cost: m.cost.as_ref().map_or(Ok(0.0), |v| src.float(v))?,
                no_cost_at_time0: m.no_cost_at_time0.unwrap_or(true),
                never_exercise_step: m.never_exercise_step.unwrap_or(false),
            };
            let inst = src.required(&raw.instrument, "instrument")?;
            let instrument = match inst.kind.get_ref().as_str() {
                "put" => Instrument::Put {
                    strike: src.float(src.required(&inst.strike, "instrument.strike")?)?,
                },
                "cash_basket" => {
                    let legs = src.required(&inst.legs, "instrument.legs")?;
                    Instrument::CashBasket {
                        legs: legs
                            .iter()
                            .map(|l| Ok((src.float(&l.strike)?, src.float(&l.sign)?)))
                            .collect::<Result<_>>()?,
                    }
                }
                other => {
                    return Err(src.error(inst.kind.span(), format!("unknown instrument kind `{other}`")))
                }
            };
            if !raw.node.is_empty() {
                return Err(src.error(raw.node[0].id.span(), "explicit nodes need family = \"tree\""));
            }
            Ok(ModelSpec::Lattice {
                family,
                params,
                instrument,
            })
        }
        "tree" => {
            if raw.node.is_empty() {
                return Err(src.error(m.family.span(), "a tree model needs [[node]] entries"));
            }
            let nodes = raw
                .node
                .iter()
                .map(|n| {
                    let exercisable = n.exercisable.unwrap_or(true);
                    let payoff = if exercisable {
                        let zero = rat(0, 1);
                        Payoff::Exercisable {
                            cash: n.cash.as_ref().map_or(Ok(zero.clone()), |v| src.exact(v))?,
                            shares: n.shares.as_ref().map_or(Ok(zero), |v| src.exact(v))?,
                        }
                    } else {
                        Payoff::NotExercisable
                    };
                    Ok(TreeNode {
                        id: n.id.get_ref().clone(),
                        parent: n.parent.as_ref().map(|p| p.get_ref().clone()),
                        bid: src.exact(&n.bid)?,
                        ask: src.exact(&n.ask)?,
                        payoff,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            // validate the shape now so errors point at the file
            tree_levels(&nodes).map_err(|(idx, msg)| src.error(raw.node[idx].id.span(), msg))?;
            Ok(ModelSpec::Tree { nodes })
        }
        other => Err(src.error(m.family.span(), format!("unknown model family `{other}`"))),
    }
}

type Levels = (Vec<Vec<usize>>, Vec<Vec<Vec<usize>>>);

/// Groups explicit nodes into levels. Returns node indices per level and the
/// successor lists, or the offending node index with a message.
fn tree_levels(nodes: &[TreeNode]) -> std::result::Result<Levels, (usize, String)> {
    let mut index: HashMap<&str, (usize, usize)> = HashMap::new();
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut succ: Vec<Vec<Vec<usize>>> = Vec::new();
    for (k, n) in nodes.iter().enumerate() {
        if index.contains_key(n.id.as_str()) {
            return Err((k, format!("duplicate node id `{}`", n.id)));
        }
        let (t, pos) = match &n.parent {
            None if k == 0 => (0, 0),
            None => return Err((k, "only the first node may omit `parent`".into())),
            Some(p) => {
                let &(pt, pi) = index
                    .get(p.as_str())
                    .ok_or_else(|| (k, format!("parent `{p}` must appear earlier")))?;
                let t = pt + 1;
                if levels.len() <= t {
                    levels.push(Vec::new());
                    succ.push(Vec::new());
                }
                let pos = levels[t].len();
                let lists = &mut succ[pt];
                while lists.len() <= pi {
                    lists.push(Vec::new());
                }
                lists[pi].push(pos);
                (t, pos)
            }
        };
        if t == 0 {
            levels.push(Vec::new());
        }
        levels[t].push(k);
        index.insert(n.id.as_str(), (t, pos));
    }
    let horizon = levels.len() - 1;
    succ.truncate(horizon);
    for t in 0..horizon {
        succ[t].resize(levels[t].len(), Vec::new());
        if let Some(i) = succ[t].iter().position(Vec::is_empty) {
            return Err((levels[t][i], "all leaves must sit at the final level".into()));
        }
    }
    Ok((levels, succ))
}

impl ModelSpec {
    /// Builds the market and payoff in the requested arithmetic.
    pub fn build<S: Scalar>(&self) -> Result<Model<S>> {
        match self {
            ModelSpec::Lattice {
                family,
                params,
                instrument,
            } => {
                let lattice = match family {
                    LatticeFamily::Binomial => build_binomial::<S>(params)?,
                    LatticeFamily::Trinomial => build_trinomial::<S>(params)?,
                };
                let payoff = match instrument {
                    Instrument::Put { strike } => american_put_physical(&lattice, *strike),
                    Instrument::CashBasket { legs } => cash_basket(&lattice, legs),
                };
                Ok(Model {
                    market: lattice.market,
                    payoff,
                })
            }
            ModelSpec::Tree { nodes } => {
                let (levels, succ) = tree_levels(nodes).map_err(|(_, m)| Error::InvalidModel(m))?;
                let tree = EventTree::new(succ)?;
                let conv = |x: &Rational| S::from_rational(x);
                let pick = |f: &dyn Fn(&TreeNode) -> S| -> Vec<Vec<S>> {
                    levels.iter().map(|l| l.iter().map(|&k| f(&nodes[k])).collect()).collect()
                };
                let prices = PriceProcess {
                    bid: pick(&|n| conv(&n.bid)),
                    ask: pick(&|n| conv(&n.ask)),
                };
                let market = Market::new(tree, prices)?;
                let payoff = PayoffProcess::new(
                    market.tree(),
                    levels
                        .iter()
                        .map(|l| {
                            l.iter()
                                .map(|&k| match &nodes[k].payoff {
                                    Payoff::Exercisable { cash, shares } => Payoff::Exercisable {
                                        cash: conv(cash),
                                        shares: conv(shares),
                                    },
                                    Payoff::NotExercisable => Payoff::NotExercisable,
                                })
                                .collect()
                        })
                        .collect(),
                )?;
                Ok(Model { market, payoff })
            }
        }
    }

    /// Small models are explicit trees; lattices are priced in float by default.
    pub fn is_explicit_tree(&self) -> bool {
        matches!(self, ModelSpec::Tree { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PUT: &str = r#"
format = "amtc-model/1"

[model]
family = "binomial"
s0 = 100
sigma = 0.2
rate = 0.1
maturity = 0.25
steps = 3
cost = 0.005
never_exercise_step = true

[instrument]
kind = "put"
strike = 100
"#;

    #[test]
    fn lattice_spec_round_trip() {
        let spec = parse_model(PUT).unwrap();
        let ModelSpec::Lattice { params, .. } = &spec else {
            panic!("expected a lattice")
        };
        assert_eq!(params.cost, 0.005);
        assert!(params.never_exercise_step && params.no_cost_at_time0);
        let model = spec.build::<f64>().unwrap();
        assert_eq!(model.market.horizon(), 4);
    }

    #[test]
    fn explicit_tree_is_exact() {
        let text = r#"
format = "amtc-model/1"
[model]
family = "tree"
[[node]]
id = "r"
bid = 10
ask = 10
[[node]]
id = "a"
parent = "r"
bid = 0.5
ask = "9/2"
cash = 1.25
exercisable = true
[[node]]
id = "b"
parent = "r"
bid = 20
ask = 20
exercisable = false
"#;
        let model = parse_model(text).unwrap().build::<Rational>().unwrap();
        assert_eq!(model.market.bid(1, 0), &rat(1, 2));
        assert_eq!(model.market.ask(1, 0), &rat(9, 2));
        assert_eq!(model.payoff.at(1, 0), &Payoff::cash(rat(5, 4)));
        assert_eq!(model.payoff.at(1, 1), &Payoff::NotExercisable);
    }

    #[test]
    fn errors_carry_positions() {
        let bad = PUT.replace("\"put\"", "\"straddle\"");
        match parse_model(&bad) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (15, 8)),
            other => panic!("unexpected {other:?}"),
        }
        let bad = PUT.replace("s0 = 100", "s0 = [1]");
        assert!(matches!(parse_model(&bad), Err(Error::Parse { line: 6, .. })));
        let bad = PUT.replace("amtc-model/1", "amtc-model/9");
        assert!(matches!(parse_model(&bad), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn ragged_tree_rejected() {
        let text = r#"
format = "amtc-model/1"
[model]
family = "tree"
[[node]]
id = "r"
bid = 1
ask = 1
[[node]]
id = "a"
parent = "r"
bid = 1
ask = 1
[[node]]
id = "b"
parent = "a"
bid = 1
ask = 1
[[node]]
id = "c"
parent = "r"
bid = 1
ask = 1
"#;
        assert!(matches!(parse_model(text), Err(Error::Parse { line: 20, .. })));
    }
}
