//! The buyer's approximate martingale, obtained by running the seller's
//! dual construction on the reflected payoff that can only be exercised at
//! the buyer's stopping time.

use crate::error::Result;
use crate::market::{verify_approx_martingale, Market, MartingalePair, Payoff, PayoffProcess, PureStoppingTime};
use crate::scalar::Scalar;
use crate::seller::certificate::{seller_certificate, stopped_payoff_value};
use crate::seller::price_seller_dual;

#[derive(Clone, Debug)]
pub struct BuyerCertificate<S> {
    pub stopping: PureStoppingTime,
    pub pair: MartingalePair<S>,
    /// `E_P̌(ξ_τ + Š_τ ζ_τ)`.
    pub value: S,
}

/// `(−ξ, −ζ)` where `tau` stops, not exercisable elsewhere.
pub fn reflected_payoff<S: Scalar>(market: &Market<S>, payoff: &PayoffProcess<S>, tau: &PureStoppingTime) -> PayoffProcess<S> {
    PayoffProcess::from_fn(market.tree(), |t, i| match payoff.at(t, i) {
        Payoff::Exercisable { cash, shares } if tau.stops_at(t, i) => Payoff::Exercisable {
            cash: -cash.clone(),
            shares: -shares.clone(),
        },
        _ => Payoff::NotExercisable,
    })
}

/// `min_{(P,S)} E_P(ξ_τ + S_τ ζ_τ)` over approximate martingales for the
/// pure stopping time `tau`, with a minimiser.
pub fn buyer_certificate<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    tau: &PureStoppingTime,
) -> Result<BuyerCertificate<S>> {
    let reflected = reflected_payoff(market, payoff, tau);
    let (price, dual) = price_seller_dual(market, &reflected)?;
    let cert = seller_certificate(market, &reflected, &dual)?;
    Ok(BuyerCertificate {
        stopping: tau.clone(),
        pair: cert.pair,
        value: -price,
    })
}

/// Approximate martingale violations and whether the certified value
/// equals `bid`.
pub fn verify_buyer_certificate<S: Scalar>(
    market: &Market<S>,
    payoff: &PayoffProcess<S>,
    cert: &BuyerCertificate<S>,
    bid: &S,
) -> crate::seller::certificate::CertificateReport {
    let chi = cert.stopping.to_mixed::<S>();
    let mut violations = verify_approx_martingale(market, &cert.pair, &chi).violations;
    match stopped_payoff_value(market, payoff, &chi, &cert.pair) {
        Some(v) if S::near(&v, &cert.value) => {}
        other => violations.push((0, 0, "stopped payoff expectation differs from the certified value".into(), other.map_or(f64::NAN, |v| v.to_f64()))),
    }
    if !S::near(&cert.value, bid) {
        violations.push((0, 0, "certified value differs from the bid price".into(), (cert.value.clone() - bid.clone()).to_f64()));
    }
    crate::seller::certificate::CertificateReport {
        ok: violations.is_empty(),
        violations,
    }
}
