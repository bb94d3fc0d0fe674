//! Two-step cash-settled example with exact prices and strategies.

use amtc::buyer::certificate::{buyer_certificate, verify_buyer_certificate};
use amtc::buyer::hedge::{buyer_superhedge_violations, hedge_buyer};
use amtc::buyer::{bid_price, price_buyer};
use amtc::market::{is_self_financing, EventTree, Market, Payoff, PayoffProcess, Portfolio, PriceProcess, PureStoppingTime};
use amtc::scalar::{rat, Rational};
use amtc::seller::certificate::{seller_certificate, verify_seller_certificate};
use amtc::seller::hedge::{hedge_seller, seller_superhedge_violations};
use amtc::seller::pure::{check_pure_stopping_gap, pure_stopping_value};
use amtc::seller::{ask_price, price_seller_dual, price_seller_primal};

// level 1: u, d; level 2: uu, ud, du, dd
fn example() -> (Market<Rational>, PayoffProcess<Rational>) {
    let tree = EventTree::new(vec![vec![vec![0, 1]], vec![vec![0, 1], vec![2, 3]]]).unwrap();
    let r = |v: &[i64]| v.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>();
    let prices = PriceProcess {
        bid: vec![r(&[10]), r(&[8, 6]), r(&[16, 10, 10, 4])],
        ask: vec![r(&[10]), r(&[16, 6]), r(&[16, 10, 10, 4])],
    };
    let market = Market::new(tree, prices).unwrap();
    let cash = [vec![0], vec![3, 0], vec![9, 0, 0, 0]];
    let payoff = PayoffProcess::from_fn(market.tree(), |t, i| Payoff::cash(rat(cash[t][i], 1)));
    (market, payoff)
}

#[test]
fn ask_price_is_four_and_a_half() {
    let (m, p) = example();
    assert_eq!(price_seller_primal(&m, &p).unwrap().0, rat(9, 2));
    assert_eq!(price_seller_dual(&m, &p).unwrap().0, rat(9, 2));
    assert_eq!(ask_price(&m, &p).unwrap(), rat(9, 2));
    let (_, dual) = price_seller_dual(&m, &p).unwrap();
    assert_eq!(dual.z[0][0].vertices(), &[(rat(10, 1), rat(9, 2))]);
}

#[test]
fn seller_hedge_matches_the_reference_strategy() {
    let (m, p) = example();
    let (price, fns) = price_seller_primal(&m, &p).unwrap();
    let s = hedge_seller(&m, &fns, Portfolio::new(price, rat(0, 1))).unwrap();
    assert_eq!(s.chosen(0, 0), &Portfolio::new(rat(-3, 1), rat(3, 4)));
    assert_eq!(s.chosen(1, 0), &Portfolio::new(rat(-3, 1), rat(3, 4)));
    assert_eq!(s.chosen(1, 1), &Portfolio::new(rat(3, 2), rat(0, 1)));
    assert!(is_self_financing(&s, &m).unwrap().ok);
    assert!(seller_superhedge_violations(&m, &p, &s).unwrap().is_empty());
    assert!(hedge_seller(&m, &fns, Portfolio::new(rat(4, 1), rat(0, 1))).is_err());
}

#[test]
fn seller_certificate_matches_the_reference_one() {
    let (m, p) = example();
    let (price, dual) = price_seller_dual(&m, &p).unwrap();
    let cert = seller_certificate(&m, &p, &dual).unwrap();
    let chi = cert.stopping.masses();
    assert_eq!(chi[0], vec![rat(0, 1)]);
    assert_eq!(chi[1], vec![rat(3, 4), rat(0, 1)]);
    assert_eq!(chi[2], vec![rat(1, 4), rat(1, 4), rat(1, 1), rat(1, 1)]);
    let r = |v: &[i64]| v.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>();
    assert_eq!(cert.pair.measure(), &[r(&[1]), r(&[1, 0]), r(&[1, 0, 0, 0])]);
    assert_eq!(cert.pair.price(), &[r(&[10]), r(&[8, 6]), r(&[16, 10, 10, 4])]);
    assert_eq!(cert.x_hat[1][0], rat(16, 1));
    assert_eq!(cert.y_hat[1][0], rat(10, 1));
    assert_eq!(cert.value, rat(9, 2));
    let report = verify_seller_certificate(&m, &p, &cert, &price);
    assert!(report.ok, "{:?}", report.violations);
}

#[test]
fn pure_stopping_times_fall_short() {
    let (m, p) = example();
    let gap = check_pure_stopping_gap(&m, &p, 1000).unwrap();
    assert_eq!(gap.pure_value, rat(18, 5));
    assert_eq!(gap.ask, rat(9, 2));
    assert!(gap.gap > rat(0, 1));
    // the maximiser may stop early on the branch where the payoff is zero
    let at_two = PureStoppingTime::constant(m.tree(), 2);
    assert_eq!(pure_stopping_value(&m, &p, &at_two).unwrap(), rat(18, 5));
    assert_eq!(pure_stopping_value(&m, &p, &gap.best).unwrap(), rat(18, 5));
}

#[test]
fn bid_price_is_one_and_a_fifth() {
    let (m, p) = example();
    assert_eq!(price_buyer(&m, &p).unwrap().0, rat(6, 5));
    assert_eq!(bid_price(&m, &p).unwrap(), rat(6, 5));
}

#[test]
fn buyer_hedge_matches_the_reference_strategy() {
    let (m, p) = example();
    let (price, fns) = price_buyer(&m, &p).unwrap();
    let h = hedge_buyer(&m, &fns, Portfolio::new(-price, rat(0, 1))).unwrap();
    assert_eq!(h.stopping, PureStoppingTime::constant(m.tree(), 1));
    let after = Portfolio::new(rat(9, 5), rat(-3, 10));
    assert_eq!(h.strategy.chosen(0, 0), &after);
    assert_eq!(h.strategy.chosen(1, 0), &after);
    assert_eq!(h.strategy.chosen(1, 1), &after);
    assert!(is_self_financing(&h.strategy, &m).unwrap().ok);
    assert!(buyer_superhedge_violations(&m, &p, &h).unwrap().is_empty());
}

#[test]
fn buyer_certificate_matches_the_reference_one() {
    let (m, p) = example();
    let tau = PureStoppingTime::constant(m.tree(), 1);
    let cert = buyer_certificate(&m, &p, &tau).unwrap();
    assert_eq!(cert.value, rat(6, 5));
    let r = |v: &[(i64, i64)]| v.iter().map(|&(a, b)| rat(a, b)).collect::<Vec<_>>();
    assert_eq!(
        cert.pair.measure(),
        &[r(&[(1, 1)]), r(&[(2, 5), (3, 5)]), r(&[(2, 5), (0, 1), (3, 5), (0, 1)])]
    );
    assert_eq!(cert.pair.price()[1], r(&[(16, 1), (6, 1)]));
    assert_eq!(cert.pair.price()[2], r(&[(16, 1), (10, 1), (10, 1), (4, 1)]));
    assert!(verify_buyer_certificate(&m, &p, &cert, &rat(6, 5)).ok);
}
