//! Comparison of the ask price with the best the seller can certify using
//! pure stopping times only.

use crate::error::Result;
use crate::market::{Market, Payoff, PayoffProcess, PureStoppingTime};
use crate::scalar::Scalar;
use crate::seller::ask_price;

#[derive(Clone, Debug)]
pub struct PureStoppingGap<S> {
    pub ask: S,
    /// `max_τ max_{(P,S)} E_P(ξ_τ + S_τ ζ_τ)` over pure stopping times.
    pub pure_value: S,
    pub gap: S,
    /// A maximising pure stopping time.
    pub best: PureStoppingTime,
}

/// The payoff that can be exercised only where `tau` stops.
pub fn restrict_payoff<S: Scalar>(payoff: &PayoffProcess<S>, market: &Market<S>, tau: &PureStoppingTime) -> PayoffProcess<S> {
    PayoffProcess::from_fn(market.tree(), |t, i| {
        if tau.stops_at(t, i) {
            payoff.at(t, i).clone()
        } else {
            Payoff::NotExercisable
        }
    })
}

/// Value of the option to the seller when the buyer is committed to the pure
/// stopping time `tau`.
pub fn pure_stopping_value<S: Scalar>(market: &Market<S>, payoff: &PayoffProcess<S>, tau: &PureStoppingTime) -> Result<S> {
    ask_price(market, &restrict_payoff(payoff, market, tau))
}

/// Enumerates pure stopping times (at most `cap`) and reports how far the
/// best of them falls below the ask price.
pub fn check_pure_stopping_gap<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    cap: usize,
) -> Result<PureStoppingGap<S>> {
    let ask = ask_price(market, payoff)?;
    let taus = PureStoppingTime::enumerate(market.tree(), |t, i| payoff.at(t, i).is_exercisable(), cap)?;
    let mut best: Option<(S, PureStoppingTime)> = None;
    for tau in taus {
        let v = pure_stopping_value(market, payoff, &tau)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, tau));
        }
    }
    let (pure_value, best) = best.ok_or(crate::error::Error::Degenerate)?;
    Ok(PureStoppingGap {
        gap: ask.clone() - pure_value.clone(),
        ask,
        pure_value,
        best,
    })
}
