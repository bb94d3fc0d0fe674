//! Seller's price, hedge and certificate on random trees.

mod common;

use amtc::market::random::{random_model, RandomTreeConfig};
use amtc::market::{
    american_put_physical, build_binomial, no_arbitrage_check, verify_approx_martingale, LatticeParams, Market, Payoff, PayoffProcess,
};
use amtc::scalar::{rat, Rational};
use amtc::seller::certificate::{seller_certificate, stopped_payoff_value, verify_seller_certificate};
use amtc::seller::pure::check_pure_stopping_gap;
use amtc::seller::{ask_price, price_seller_dual};
use common::random_chi;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn certificates_attain_the_ask_price() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cfg = RandomTreeConfig::default();
    for case in 0..100 {
        let model = random_model(&mut rng, &cfg);
        let (m, p) = (&model.market, &model.payoff);
        let (ask, dual) = price_seller_dual(m, p).unwrap();
        let cert = seller_certificate(m, p, &dual).unwrap();
        assert_eq!(cert.value, ask, "case {case}");
        assert!(verify_approx_martingale(m, &cert.pair, &cert.stopping).ok, "case {case}");
        assert_eq!(stopped_payoff_value(m, p, &cert.stopping, &cert.pair), Some(ask.clone()));
        let report = verify_seller_certificate(m, p, &cert, &ask);
        assert!(report.ok, "case {case}: {:?}", report.violations);
    }
}

#[test]
fn witness_expectations_never_exceed_the_ask_price() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let cfg = RandomTreeConfig::default();
    for case in 0..20 {
        let model = random_model(&mut rng, &cfg);
        let (m, p) = (&model.market, &model.payoff);
        let ask = ask_price(m, p).unwrap();
        let witness = no_arbitrage_check(m).witness.unwrap();
        for _ in 0..100 {
            let chi = random_chi(&mut rng, m.tree(), |t, i| p.at(t, i).is_exercisable());
            let e = stopped_payoff_value(m, p, &chi, &witness).unwrap();
            assert!(e <= ask, "case {case}: {e} > {ask}");
        }
    }
}

fn with_cash(m: &Market<Rational>, p: &PayoffProcess<Rational>, f: impl Fn(usize, usize) -> Rational) -> PayoffProcess<Rational> {
    let levels = p
        .levels()
        .iter()
        .enumerate()
        .map(|(t, l)| {
            l.iter()
                .enumerate()
                .map(|(i, x)| match x {
                    Payoff::Exercisable { cash, shares } => Payoff::Exercisable {
                        cash: cash + f(t, i),
                        shares: shares.clone(),
                    },
                    Payoff::NotExercisable => Payoff::NotExercisable,
                })
                .collect()
        })
        .collect();
    PayoffProcess::new(m.tree(), levels).unwrap()
}

#[test]
fn ask_price_is_monotone_and_cash_translates() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let cfg = RandomTreeConfig::default();
    for case in 0..100 {
        let model = random_model(&mut rng, &cfg);
        let (m, p) = (&model.market, &model.payoff);
        let ask = ask_price(m, p).unwrap();
        let c = rat(rng.gen_range(1..8), 3);
        let shifted = with_cash(m, p, |_, _| c.clone());
        assert_eq!(ask_price(m, &shifted).unwrap(), &ask + &c, "case {case}");
        let nodes: Vec<_> = m.tree().nodes().collect();
        let (bt, bi) = nodes[rng.gen_range(0..nodes.len())];
        let bumped = with_cash(m, p, |t, i| if (t, i) == (bt, bi) { c.clone() } else { rat(0, 1) });
        assert!(ask_price(m, &bumped).unwrap() >= ask, "case {case}");
    }
}

#[test]
fn pure_stopping_never_beats_mixed_stopping() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let cfg = RandomTreeConfig::default();
    for case in 0..40 {
        let model = random_model(&mut rng, &cfg);
        let gap = check_pure_stopping_gap(&model.market, &model.payoff, 100_000).unwrap();
        assert!(gap.gap >= rat(0, 1), "case {case}");
        if model.market.horizon() == 1 {
            assert_eq!(gap.gap, rat(0, 1), "single period, case {case}");
        }
    }
}

#[test]
fn pure_stopping_suffices_without_costs() {
    let p = LatticeParams {
        s0: 100.0,
        sigma: 0.2,
        rate: 0.1,
        maturity: 0.25,
        steps: 3,
        cost: 0.0,
        no_cost_at_time0: true,
        never_exercise_step: false,
    };
    let lat = build_binomial::<Rational>(&p).unwrap();
    let put = american_put_physical(&lat, 100.0);
    let (m, origin) = lat.market.expand(1000).unwrap();
    let gap = check_pure_stopping_gap(&m, &put.reindex(&origin), 100_000).unwrap();
    assert_eq!(gap.gap, rat(0, 1));
}
