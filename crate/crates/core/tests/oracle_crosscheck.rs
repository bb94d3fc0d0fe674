//! The backward recursions against linear programming over explicit
//! strategies, on the worked example and on random small trees.

mod common;

use amtc::buyer::hedge::{buyer_superhedge_violations, hedge_buyer};
use amtc::buyer::price_buyer;
use amtc::market::random::{random_model, RandomTreeConfig};
use amtc::market::{is_self_financing, no_arbitrage_check, Payoff, PayoffProcess, Portfolio};
use amtc::oracle::{oracle_buyer_price, oracle_seller_price, DEFAULT_NODE_BUDGET, DEFAULT_STOPPING_CAP};
use amtc::scalar::rat;
use amtc::seller::hedge::{hedge_seller, seller_superhedge_violations};
use amtc::seller::{price_seller_dual, price_seller_primal};
use common::example;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn oracles_reproduce_the_worked_example() {
    let (m, p) = example();
    let seller = oracle_seller_price(&m, &p, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(seller.price, rat(9, 2));
    assert!(is_self_financing(&seller.strategy, &m).unwrap().ok);
    assert!(seller_superhedge_violations(&m, &p, &seller.strategy).unwrap().is_empty());
    let buyer = oracle_buyer_price(&m, &p, DEFAULT_NODE_BUDGET, DEFAULT_STOPPING_CAP).unwrap();
    assert_eq!(buyer.price, rat(6, 5));
    assert!(buyer.exhaustive);
}

#[test]
fn oracles_give_zero_for_a_zero_payoff() {
    let (m, _) = example();
    let zero = PayoffProcess::from_fn(m.tree(), |_, _| Payoff::cash(rat(0, 1)));
    assert_eq!(oracle_seller_price(&m, &zero, DEFAULT_NODE_BUDGET).unwrap().price, rat(0, 1));
    assert_eq!(oracle_buyer_price(&m, &zero, DEFAULT_NODE_BUDGET, DEFAULT_STOPPING_CAP).unwrap().price, rat(0, 1));
}

#[test]
fn oracle_respects_the_node_budget() {
    let (m, p) = example();
    assert!(oracle_seller_price(&m, &p, 5).is_err());
}

#[test]
fn recursions_match_linear_programs_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = RandomTreeConfig::default();
    for case in 0..50 {
        let model = random_model(&mut rng, &cfg);
        let (m, p) = (&model.market, &model.payoff);
        assert!(no_arbitrage_check(m).arbitrage_free, "case {case}");
        let (ask, fns) = price_seller_primal(m, p).unwrap();
        assert_eq!(price_seller_dual(m, p).unwrap().0, ask, "case {case}");
        let lp = oracle_seller_price(m, p, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(lp.price, ask, "seller, case {case}");
        assert!(is_self_financing(&lp.strategy, m).unwrap().ok);
        assert!(seller_superhedge_violations(m, p, &lp.strategy).unwrap().is_empty());
        let hedge = hedge_seller(m, &fns, Portfolio::new(ask.clone(), rat(0, 1))).unwrap();
        assert!(is_self_financing(&hedge, m).unwrap().ok, "case {case}");
        assert!(seller_superhedge_violations(m, p, &hedge).unwrap().is_empty(), "case {case}");

        let (bid, bfns) = price_buyer(m, p).unwrap();
        let lp = oracle_buyer_price(m, p, DEFAULT_NODE_BUDGET, DEFAULT_STOPPING_CAP).unwrap();
        assert!(lp.exhaustive);
        assert_eq!(lp.price, bid, "buyer, case {case}");
        assert!(bid <= ask, "case {case}");
        let bh = hedge_buyer(m, &bfns, Portfolio::new(-bid.clone(), rat(0, 1))).unwrap();
        assert!(is_self_financing(&bh.strategy, m).unwrap().ok, "case {case}");
        assert!(buyer_superhedge_violations(m, p, &bh).unwrap().is_empty(), "case {case}");
    }
}
