use dtcore::error::Error;
use dtcore::mring::{
    burnside_sigma, chi_spec, expand_rational, forget_monodromy_eval, gl_class, sigma, MotExpr,
};
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}
fn qr(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}
fn l() -> MotExpr {
    MotExpr::lefschetz()
}
fn one() -> MotExpr {
    MotExpr::one()
}
fn mu(k: u32) -> MotExpr {
    MotExpr::mu(k)
}

#[test]
fn add_identities() {
    let x = MotExpr::term(q(3), 5, 2);
    assert_eq!(MotExpr::zero().add(&x), x);
    let a = MotExpr::term(q(1), 2, 1);
    let b = MotExpr::term(q(-1), 2, 1);
    assert!(a.add(&b).is_zero());
    assert_eq!(one().sub(&mu(3)).add(&mu(3)), one());
}

#[test]
fn mu_one_is_unit() {
    assert_eq!(mu(1), one());
}

#[test]
fn mul_examples() {
    let u3 = MotExpr::u_pow(3);
    let um1 = MotExpr::u_pow(-1);
    assert_eq!(u3.mul(&um1).unwrap(), MotExpr::u_pow(2));
    let lhs = one().sub(&mu(2)).mul(&MotExpr::u_pow(2)).unwrap();
    let rhs = MotExpr::u_pow(2).sub(&MotExpr::term(q(1), 2, 2));
    assert_eq!(lhs, rhs);
    assert_eq!(mu(2).mul(&mu(3)), Err(Error::OutsideSymbolicSubring));
}

#[test]
fn gl_class_examples() {
    assert_eq!(gl_class(1), l().sub(&one()));
    let l2 = l().mul(&l()).unwrap();
    let expect = l2.sub(&one()).mul(&l2.sub(&l())).unwrap();
    assert_eq!(gl_class(2), expect);
    let (v, b) = forget_monodromy_eval(&gl_class(2), &q(3)).unwrap();
    assert_eq!(v, q(48));
    assert_eq!(b, 0.0);
}

#[test]
fn burnside_examples() {
    assert_eq!(burnside_sigma(2, 2), one().add(&mu(2)));
    assert_eq!(burnside_sigma(3, 2), mu(2).scale(&q(2)));
    assert_eq!(burnside_sigma(2, 3), mu(3).scale(&q(2)));
    assert_eq!(burnside_sigma(0, 5), one());
}

#[test]
fn burnside_orbit_consistency() {
    for k in 1..=6u32 {
        for n in 0..=6usize {
            let b = burnside_sigma(n, k);
            let total: BigRational = b
                .terms()
                .map(|t| t.coeff.clone() * q(t.mu.max(1) as i64))
                .sum();
            let multisets = binom(k as i64 + n as i64 - 1, n as i64);
            assert_eq!(total, q(multisets), "n={n} k={k}");
            assert_eq!(chi_spec(&b).unwrap(), q(multisets));
        }
    }
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || n < k {
        return if k == 0 { 1 } else { 0 };
    }
    let mut r = 1i64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

#[test]
fn sigma_examples() {
    assert_eq!(sigma(2, &l()).unwrap(), l().mul(&l()).unwrap());
    let m1 = one().neg();
    assert_eq!(sigma(1, &m1).unwrap(), m1);
    assert!(sigma(2, &m1).unwrap().is_zero());
    assert!(sigma(3, &m1).unwrap().is_zero());
    assert_eq!(sigma(0, &mu(7)).unwrap(), one());
    assert_eq!(sigma(2, &mu(2)).unwrap(), one().add(&mu(2)));
    // the Cauchy expansion of σ²(1 − μ₂) needs μ₂·μ₂
    assert_eq!(
        sigma(2, &one().sub(&mu(2))),
        Err(Error::OutsideSymbolicSubring)
    );
}

#[test]
fn sigma_multiset_counts() {
    for m in 0..=5i64 {
        for n in 0..=5usize {
            let s = sigma(n, &MotExpr::int(m)).unwrap();
            assert_eq!(s, MotExpr::int(binom(m + n as i64 - 1, n as i64)));
        }
    }
}

#[test]
fn sigma_rejects_fractions() {
    let x = MotExpr::rat(qr(1, 2));
    assert!(matches!(sigma(2, &x), Err(Error::NonIntegerCoefficient(_))));
}

#[test]
fn sigma_u_rule_on_half_powers() {
    // u is a line element: σⁿ(u) = uⁿ, and 𝕃^{1/2} = −u gives σ²(𝕃^{1/2}) = 0.
    let u = MotExpr::u_pow(1);
    assert_eq!(sigma(3, &u).unwrap(), MotExpr::u_pow(3));
    assert!(sigma(2, &MotExpr::half_l()).unwrap().is_zero());
}

#[test]
fn expand_rational_geometric() {
    let e = expand_rational(&MotExpr::u_pow(-2), &[1], -9);
    let expect = [-2, -4, -6, -8]
        .iter()
        .fold(MotExpr::zero(), |acc, &j| acc.add(&MotExpr::u_pow(j)));
    assert_eq!(e.floor(), Some(-9));
    assert!(e.exact_part_eq(&expect));
}

#[test]
fn expand_rational_diagonal_coefficient() {
    // (𝕃^{-1/2}+𝕃^{-3/2})/(𝕃^{1/2}-𝕃^{-1/2}) = (𝕃+1)/(𝕃(𝕃-1)) = (𝕃^{-1}+𝕃^{-2})/(1-𝕃^{-1})
    let num = MotExpr::u_pow(-2).add(&MotExpr::u_pow(-4));
    let e = expand_rational(&num, &[1], -12);
    let expect = MotExpr::u_pow(-2)
        .add(&MotExpr::u_pow(-4).scale(&q(2)))
        .add(&MotExpr::u_pow(-6).scale(&q(2)))
        .add(&MotExpr::u_pow(-8).scale(&q(2)))
        .add(&MotExpr::u_pow(-10).scale(&q(2)));
    assert!(e.exact_part_eq(&expect));
}

#[test]
fn expand_rational_floor_above_everything() {
    let e = expand_rational(&MotExpr::u_pow(-2), &[1], 5);
    assert!(e.terms().next().is_none());
    assert_eq!(e.floor(), Some(5));
}

#[test]
fn expand_rational_times_denominator() {
    let num = one().sub(&mu(3)).mul(&MotExpr::u_pow(-2)).unwrap();
    let floor = -20;
    let e = expand_rational(&num, &[1, 2], floor);
    let den = one()
        .sub(&MotExpr::u_pow(-2))
        .mul(&one().sub(&MotExpr::u_pow(-4)))
        .unwrap();
    let back = e.exact_part().mul(&den).unwrap();
    // agreement above floor + max degree of the denominator
    for t in back.terms().chain(num.terms()) {
        if t.u_exp > floor {
            assert_eq!(
                back.coeff(t.u_exp, t.mu),
                num.coeff(t.u_exp, t.mu),
                "deg {}",
                t.u_exp
            );
        }
    }
}

#[test]
fn tail_bound_is_certified() {
    // 1/(𝕃-1) at q=5 is 1/4; truncation error must be within the certified bound
    let e = expand_rational(&MotExpr::u_pow(-2), &[1], -10);
    let (v, bound) = forget_monodromy_eval(&e, &q(5)).unwrap();
    let err = (qr(1, 4) - v).to_string();
    let errf: f64 = {
        let r = qr(1, 4) - forget_monodromy_eval(&e, &q(5)).unwrap().0;
        num_traits::ToPrimitive::to_f64(&r).unwrap().abs()
    };
    assert!(errf <= bound, "{err} vs {bound}");
    assert!(bound < 1e-3);
}

#[test]
fn chi_examples() {
    for d in 1..=4u32 {
        let om = MotExpr::half_l()
            .inv_monomial()
            .mul(&one().sub(&mu(d + 1)))
            .unwrap();
        assert_eq!(chi_spec(&om).unwrap(), q(d as i64));
    }
    assert_eq!(chi_spec(&gl_class(1)).unwrap(), q(0));
    let p1 = l().add(&one());
    let lm32 = MotExpr::half_l().inv_monomial().pow_int(3);
    assert_eq!(chi_spec(&p1.mul(&lm32).unwrap()).unwrap(), q(-2));
}

#[test]
fn forget_monodromy_examples() {
    let x = l().mul(&l()).unwrap().sub(&one());
    assert_eq!(forget_monodromy_eval(&x, &q(5)).unwrap().0, q(24));
    assert_eq!(
        forget_monodromy_eval(&MotExpr::u_pow(1), &q(4)),
        Err(Error::OddHalfPower)
    );
    let num = one().sub(&mu(2));
    let v = dtcore::mring::eval_fraction(&num, &[1], &q(5)).unwrap();
    // num/(1-𝕃^{-1}) = 𝕃(1-μ)/(𝕃-1); divided by 𝕃 gives (1-μ)/(𝕃-1)
    assert_eq!(v / q(5), qr(-1, 4));
}

#[test]
fn render_parse_roundtrip() {
    let x = one()
        .sub(&mu(3))
        .mul(&MotExpr::u_pow(-1))
        .unwrap()
        .add(&MotExpr::rat(qr(-7, 3)).mul(&MotExpr::u_pow(4)).unwrap());
    let s = x.render();
    assert_eq!(MotExpr::parse(&s).unwrap(), x);
    assert_eq!(
        MotExpr::parse(&MotExpr::zero().render()).unwrap(),
        MotExpr::zero()
    );
    let t = expand_rational(&one(), &[1], -7);
    let back = MotExpr::parse(&t.render()).unwrap();
    assert_eq!(back.floor(), Some(-7));
    assert!(back.exact_part_eq(&t.exact_part()));
}

fn small_expr() -> impl Strategy<Value = MotExpr> {
    prop::collection::vec((-3i64..=3, -3i64..=3), 0..4).prop_map(|v| {
        v.into_iter().fold(MotExpr::zero(), |acc, (c, j)| {
            acc.add(&MotExpr::term(q(c), j, 1))
        })
    })
}

fn mu_linear() -> impl Strategy<Value = MotExpr> {
    (small_expr(), -2i64..=2, 2u32..=4).prop_map(|(x, c, k)| x.add(&MotExpr::term(q(c), 0, k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sigma_of_sum_is_product(a in small_expr(), b in small_expr()) {
        let n = 4;
        let sa: Vec<MotExpr> = (0..=n).map(|i| sigma(i, &a).unwrap()).collect();
        let sb: Vec<MotExpr> = (0..=n).map(|i| sigma(i, &b).unwrap()).collect();
        let s = a.add(&b);
        for m in 0..=n {
            let mut rhs = MotExpr::zero();
            for i in 0..=m {
                rhs = rhs.add(&sa[i].mul(&sb[m - i]).unwrap());
            }
            prop_assert_eq!(sigma(m, &s).unwrap(), rhs);
        }
    }

    #[test]
    fn mul_ring_laws(a in mu_linear(), b in small_expr(), c in small_expr()) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&MotExpr::one()).unwrap(), a.clone());
        prop_assert_eq!(a.mul(&b.add(&c)).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()));
    }

    #[test]
    fn roundtrip_random(a in mu_linear()) {
        prop_assert_eq!(MotExpr::parse(&a.render()).unwrap(), a);
    }
}
