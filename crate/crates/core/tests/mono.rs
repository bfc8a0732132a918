use dtcore::lambda::LambdaRing;
use dtcore::mring::{gl_class, sigma, MonoFrac, MotExpr};
use num_rational::BigRational;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

#[test]
fn inv_gl_times_gl_is_one() {
    for n in 1..=4 {
        let g = MonoFrac::from_mot(&gl_class(n)).unwrap();
        let prod = g.mul(&MonoFrac::inv_gl(n)).reduce();
        assert_eq!(prod, MonoFrac::one(), "n={n}");
        assert!(prod.den().is_empty());
        assert_eq!(prod.to_mot().unwrap(), MotExpr::one());
    }
}

#[test]
fn equality_by_cross_multiplication() {
    // 1/(1-u^-2) = (1+u^-2)/(1-u^-4)
    let a = MonoFrac::inv_den(&[1]);
    let b = MonoFrac::one()
        .add(&MonoFrac::u_pow(-2))
        .mul(&MonoFrac::inv_den(&[2]));
    assert_eq!(a, b);
    assert_ne!(a, MonoFrac::inv_den(&[2]));
}

#[test]
fn sigma_agrees_with_cauchy_rule_on_mu_free_polynomials() {
    let x = MotExpr::u_pow(2)
        .scale(&q(3))
        .sub(&MotExpr::u_pow(-1))
        .add(&MotExpr::int(2));
    let m = MonoFrac::from_mot(&x).unwrap();
    for n in 0..=5 {
        let lhs = LambdaRing::sigma(&m, n).unwrap().to_mot().unwrap();
        assert_eq!(lhs, sigma(n, &x).unwrap(), "n={n}");
    }
}

#[test]
fn sigma_of_geometric_series() {
    // σ_t(u^{-2}/(1-u^{-2})) = Π_{i≥1} 1/(1 - u^{-2i} t), so σ² = u^{-4}/((1-u^{-2})(1-u^{-4}))
    let x = MonoFrac::u_pow(-2).mul(&MonoFrac::inv_den(&[1]));
    let s2 = LambdaRing::sigma(&x, 2).unwrap();
    let expect = MonoFrac::u_pow(-4).mul(&MonoFrac::inv_den(&[1, 2]));
    assert_eq!(s2, expect);
}

#[test]
fn psi_moves_atoms_to_higher_levels() {
    let p = MonoFrac::atom(3, 1).mul(&MonoFrac::u_pow(-1));
    let p2 = p.psi(2);
    assert_eq!(p2, MonoFrac::atom(3, 2).mul(&MonoFrac::u_pow(-2)));
    assert!(p2.to_mot().is_err());
    assert_eq!(
        p.to_mot().unwrap(),
        MotExpr::one()
            .sub(&MotExpr::mu(3))
            .mul(&MotExpr::u_pow(-1))
            .unwrap()
    );
}

#[test]
fn expand_matches_mring_expansion() {
    let x = MonoFrac::mu(2)
        .mul(&MonoFrac::u_pow(-2))
        .mul(&MonoFrac::inv_den(&[1]));
    let e = x.expand(-12).unwrap();
    assert_eq!(e.floor(), Some(-12));
    assert_eq!(e.coeff(-4, 2), q(1));
    assert_eq!(e.coeff(-10, 1), q(0));
}
