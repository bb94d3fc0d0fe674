//! One-dimensional polyhedral functions.
//!
//! Three families are used by the pricing recursions:
//!
//! * [`PlFunction`]: continuous piecewise linear functions on the real line
//!   plus the bottom element `-∞`. Abscissa is a stock position, ordinate cash.
//! * [`ConvexPl`]: the convex members, with the slope-clamping gradient
//!   restriction and the convex dual.
//! * [`ConcavePl`]: concave functions on a compact interval (the duals), with
//!   the concave cap and domain restriction.

mod concave;
mod convex;
mod function;
mod polyline;
mod text;

pub use concave::{cap_decompose, concave_cap, domain_restrict, dual_inverse, CapAtom, ConcavePl};
pub use convex::{convex_dual, transaction_kernel, ConvexPl};
pub use function::{eval, pl_max, pl_min, PlFunction};
pub use polyline::Polyline;
pub use text::{parse_concave, parse_pl};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use crate::Error;

    fn r(n: i64) -> Rational {
        rat(n, 1)
    }

    fn pl(text: &str) -> PlFunction<Rational> {
        parse_pl(text).unwrap()
    }

    fn cpl(text: &str) -> ConcavePl<Rational> {
        parse_concave(text).unwrap()
    }

    fn abs() -> PlFunction<Rational> {
        pl("pl[-1; 0:0; 1]")
    }

    #[test]
    fn kernel_values() {
        let h = transaction_kernel(&r(8), &r(16)).unwrap();
        assert_eq!(h.eval(&r(1)), Some(r(-8)));
        assert_eq!(h.eval(&r(-1)), Some(r(16)));
        assert_eq!(h.as_pl().to_string(), "pl[-16; 0:0; -8]");
        let flat = transaction_kernel(&r(10), &r(10)).unwrap();
        assert_eq!(flat.as_pl(), &PlFunction::linear(r(-10), r(0)));
        assert!(matches!(
            transaction_kernel(&r(2), &r(1)),
            Err(Error::InvalidSpread { .. })
        ));
        assert_eq!(PlFunction::<Rational>::Bottom.eval(&r(0)), None);
    }

    #[test]
    fn max_and_min_of_lines() {
        let id = PlFunction::linear(r(1), r(0));
        let neg = PlFunction::linear(r(-1), r(0));
        assert_eq!(pl_max(&id, &neg), abs());
        assert_eq!(pl_min(&id, &neg), pl("pl[1; 0:0; -1]"));
        assert_eq!(pl_max(&abs(), &PlFunction::Bottom), abs());
        assert_eq!(pl_min(&abs(), &PlFunction::Bottom), PlFunction::Bottom);
    }

    #[test]
    fn max_finds_ray_crossings() {
        let zero = PlFunction::constant(r(0));
        let g = pl("pl[-2; 0:-1; 1]");
        assert_eq!(pl_max(&zero, &g), pl("pl[-2; -1/2:0, 1:0; 1]"));
        assert_eq!(pl_min(&zero, &g), pl("pl[0; -1/2:0, 0:-1, 1:0; 0]"));
        let m = pl_max(&zero, &pl("pl[-1; -1:1; -1]"));
        assert_eq!(m, pl("pl[-1; 0:0; 0]"));
    }

    #[test]
    fn gradient_restrict_examples() {
        let (b, a) = (rat(3, 10), rat(1, 2));
        let h = transaction_kernel(&b, &a).unwrap().into_pl();
        assert_eq!(abs().gradient_restrict(&b, &a).unwrap(), h);
        assert_eq!(h.gradient_restrict(&b, &a).unwrap(), h);
        let cvx = ConvexPl::new(abs()).unwrap();
        assert_eq!(cvx.gradient_restrict(&b, &a).unwrap().as_pl(), &h);
        assert_eq!(
            PlFunction::<Rational>::Bottom.gradient_restrict(&b, &a).unwrap(),
            PlFunction::Bottom
        );
        // a line with slope outside [-a, -b] is unbounded after restriction
        let steep = PlFunction::linear(r(-2), r(0));
        assert_eq!(steep.gradient_restrict(&b, &a), Err(Error::UnboundedBelow));
        assert_eq!(
            ConvexPl::new(steep).unwrap().gradient_restrict(&b, &a),
            Err(Error::UnboundedBelow)
        );
    }

    #[test]
    fn gradient_restrict_nonconvex() {
        // w-shaped with a bump: min of two vees is not convex
        let f = pl_min(&pl("pl[-1; -2:0; 1]"), &pl("pl[-1; 2:0; 1]"));
        let g = f.gradient_restrict(&r(0), &r(0)).unwrap();
        // zero kernel with zero spread flattens to the global minimum
        assert_eq!(g, PlFunction::constant(r(0)));
        let g = f.gradient_restrict(&rat(1, 2), &rat(1, 2)).unwrap();
        // inf_z f(z) + (z - y)/2 is attained at z = -2: y ↦ -1 - y/2
        assert_eq!(g, PlFunction::linear(rat(-1, 2), r(-1)));
    }

    #[test]
    fn duals_of_simple_functions() {
        let h = transaction_kernel(&r(8), &r(16)).unwrap();
        assert_eq!(h.dual(), cpl("cpl[8:0, 16:0]"));
        assert_eq!(cpl("cpl[8:0, 16:0]").dual_inverse(), h);
        let u0 = cpl("cpl[10:0]");
        assert_eq!(u0.dual_inverse().as_pl(), &PlFunction::linear(r(-10), r(0)));
        assert!(ConcavePl::<Rational>::bottom().dual_inverse().is_bottom());
        assert!(ConvexPl::<Rational>::bottom().dual().is_bottom());
        // u(y) = 3 + 16y⁻ − 8y⁺ has dual 3 on [8, 16]
        let u = ConvexPl::new(pl("pl[-16; 0:3; -8]")).unwrap();
        assert_eq!(u.dual(), cpl("cpl[8:3, 16:3]"));
    }

    #[test]
    fn cap_and_decomposition() {
        let v1 = cpl("cpl[0:0, 1:0]");
        let v2 = cpl("cpl[2:1]");
        let bottom = ConcavePl::bottom();
        let cap = concave_cap(&[&v1, &v2]);
        // the least concave majorant runs along the chord from (0,0) to (2,1)
        assert_eq!(cap.eval(&rat(3, 2)), Some(rat(3, 4)));
        assert_eq!(concave_cap(&[&v1, &bottom]), v1);
        assert!(concave_cap::<Rational>(&[&bottom]).is_bottom());
        let atoms = cap_decompose(&[&v1, &v2], &cap, &rat(3, 2)).unwrap();
        assert_eq!(
            atoms,
            vec![
                CapAtom { index: 0, weight: rat(1, 4), point: r(0) },
                CapAtom { index: 1, weight: rat(3, 4), point: r(2) },
            ]
        );
        let single = cap_decompose(&[&v1], &v1, &rat(1, 3)).unwrap();
        assert_eq!(single, vec![CapAtom { index: 0, weight: r(1), point: rat(1, 3) }]);
        assert!(matches!(
            cap_decompose(&[&v1], &v1, &r(5)),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn domain_restriction() {
        let v = cpl("cpl[2:0, 3:1]");
        assert!(v.domain_restrict(&r(0), &r(1)).unwrap().is_bottom());
        assert!(ConcavePl::<Rational>::bottom()
            .domain_restrict(&r(0), &r(1))
            .unwrap()
            .is_bottom());
        assert_eq!(
            v.domain_restrict(&rat(5, 2), &r(9)).unwrap(),
            cpl("cpl[5/2:1/2, 3:1]")
        );
        assert_eq!(v.domain_restrict(&r(3), &r(3)).unwrap(), cpl("cpl[3:1]"));
    }

    #[test]
    fn text_round_trip() {
        let f = pl("pl[-16; -1:2, 0:3, 5/2:1; -8]");
        assert_eq!(pl(&f.to_string()), f);
        let v = cpl("cpl[8:3, 10:4, 16:3]");
        assert_eq!(cpl(&v.to_string()), v);
        assert_eq!(pl("bottom"), PlFunction::Bottom);
        assert!(parse_pl::<Rational>("pl[1; 0:0]").is_err());
    }

    #[test]
    fn float_mode_merges_near_duplicates() {
        let f: PlFunction<f64> =
            PlFunction::from_parts(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0 + 1e-12)], 1.0, 1.0)
                .unwrap();
        assert_eq!(f.finite().unwrap().points().len(), 1);
        assert!((f.eval(&3.0).unwrap() - 3.0).abs() < 1e-9);
    }
}
