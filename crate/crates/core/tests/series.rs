use dtcore::mring::{sigma, MonoFrac, MotExpr};
use dtcore::series::{DimVector, EvSeries};
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}
fn dv(a: u32, b: u32) -> DimVector {
    DimVector::new(a, b)
}
fn mo(x: MotExpr) -> EvSeries<MotExpr> {
    EvSeries::zero(&MotExpr::one(), 4).with(dv(0, 0), x)
}

#[test]
fn mul_examples() {
    let one = EvSeries::one(&MotExpr::one(), 4);
    let a = MotExpr::u_pow(3);
    let b = MotExpr::int(5);
    let s1 = one.clone().with(dv(0, 1), a.clone());
    let s2 = one.clone().with(dv(1, 0), b.clone());
    assert!(s1.mul(&one).unwrap().eq_by(&s1, |x, y| x == y));
    let p = s1.mul(&s2).unwrap();
    assert_eq!(p.coeff(dv(1, 1)), a.mul(&b).unwrap());
    assert_eq!(p.coeff(dv(0, 1)), a);
    assert_eq!(p.coeff(dv(1, 0)), b);
    assert!(mo(MotExpr::zero()).coeff(dv(0, 0)).is_zero());
}

#[test]
fn sym_examples() {
    let a = MotExpr::u_pow(2).add(&MotExpr::int(3));
    let b = MotExpr::u_pow(-1);
    let s = EvSeries::zero(&MotExpr::one(), 4).with(dv(0, 1), a.clone());
    assert_eq!(s.sym().unwrap().coeff(dv(0, 2)), sigma(2, &a).unwrap());
    let t = s.clone().with(dv(1, 0), b.clone());
    assert_eq!(t.sym().unwrap().coeff(dv(1, 1)), a.mul(&b).unwrap());
    let l = EvSeries::zero(&MotExpr::one(), 3).with(dv(1, 0), MotExpr::lefschetz());
    assert_eq!(l.sym().unwrap().coeff(dv(2, 0)), MotExpr::u_pow(4));
}

#[test]
fn power_of_geometric_series() {
    // (1−T)^{−m} has σ²(m) at T²
    let m = MotExpr::u_pow(2).sub(&MotExpr::int(2));
    let mut geo = EvSeries::one(&MotExpr::one(), 4);
    for i in 1..=4 {
        geo.set(dv(i, 0), MotExpr::one());
    }
    let pw = geo.power(&m).unwrap();
    assert_eq!(pw.coeff(dv(2, 0)), sigma(2, &m).unwrap());
    let p0 = geo.power(&MotExpr::zero()).unwrap();
    assert!(p0.eq_by(&EvSeries::one(&MotExpr::one(), 4), |x, y| x == y));
    let p1 = geo.power(&MotExpr::one()).unwrap();
    assert!(p1.eq_by(&geo, |x, y| x == y));
}

#[test]
fn log_of_one_is_zero() {
    let one = EvSeries::one(&MotExpr::one(), 4);
    assert_eq!(one.log_sym().unwrap().iter().count(), 0);
}

#[test]
fn json_roundtrip() {
    let s = EvSeries::one(&MotExpr::one(), 3).with(
        dv(1, 2),
        MotExpr::one()
            .sub(&MotExpr::mu(3))
            .mul(&MotExpr::u_pow(-1))
            .unwrap(),
    );
    let j = s.to_json(|c| c.render());
    assert_eq!(j["trunc"], 3);
    let back = EvSeries::from_json(&j, &MotExpr::one(), MotExpr::parse).unwrap();
    assert!(back.eq_by(&s, |x, y| x == y));
}

#[test]
fn dimvector_parse_and_order() {
    assert_eq!("(2,1)".parse::<DimVector>().unwrap(), dv(2, 1));
    assert!("(2,x)".parse::<DimVector>().is_err());
    assert_eq!(
        DimVector::up_to(2),
        vec![dv(1, 0), dv(0, 1), dv(2, 0), dv(1, 1), dv(0, 2)]
    );
    assert_eq!(dv(4, 6).primitive(), (2, dv(2, 3)));
}

#[test]
fn log_of_rational_function_series() {
    // Euler identity over MonoFrac
    let mut s = EvSeries::one(&MonoFrac::one(), 4);
    for n in 1..=4 {
        s.set(
            dv(n, 0),
            MonoFrac::inv_gl(n as usize).mul(&MonoFrac::u_pow(2 * (n * n) as i64)),
        );
    }
    // Σ_n 𝕃^{n²}/[GL_n] T^n = Π_{i≥0} 1/(1 − 𝕃^{-i} T) = Sym(T/(1 − 𝕃^{-1}))
    let log = s.log_sym().unwrap();
    assert_eq!(log.coeff(dv(1, 0)), MonoFrac::inv_den(&[1]));
    for n in 2..=4 {
        assert!(log.coeff(dv(n, 0)).reduce().is_zero(), "n={n}");
    }
}

fn small_expr() -> impl Strategy<Value = MotExpr> {
    prop::collection::vec((-2i64..=2, -2i64..=2), 0..3).prop_map(|v| {
        v.into_iter().fold(MotExpr::zero(), |acc, (c, j)| {
            acc.add(&MotExpr::term(q(c), j, 1))
        })
    })
}

fn small_series() -> impl Strategy<Value = EvSeries<MotExpr>> {
    prop::collection::vec(small_expr(), 5).prop_map(|cs| {
        let mut s = EvSeries::zero(&MotExpr::one(), 3);
        for (n, c) in DimVector::up_to(2).into_iter().zip(cs) {
            s.set(n, c);
        }
        s
    })
}

fn with_one(s: &EvSeries<MotExpr>) -> EvSeries<MotExpr> {
    s.clone().with(dv(0, 0), MotExpr::one())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sym_is_a_homomorphism(a in small_series(), b in small_series()) {
        let lhs = a.add(&b).sym().unwrap();
        let rhs = a.sym().unwrap().mul(&b.sym().unwrap()).unwrap();
        prop_assert!(lhs.eq_by(&rhs, |x, y| x == y));
    }

    #[test]
    fn log_inverts_sym(a in small_series()) {
        let s = a.sym().unwrap();
        prop_assert!(s.log_sym().unwrap().eq_by(&a, |x, y| x == y));
        prop_assert!(s.log_sym().unwrap().sym().unwrap().eq_by(&s, |x, y| x == y));
    }

    #[test]
    fn power_structure_axioms(a in small_series(), b in small_series(), m in -2i64..=3, n in -2i64..=2) {
        let (a, b) = (with_one(&a), with_one(&b));
        let (mm, nn) = (MotExpr::int(m), MotExpr::int(n));
        let ab = a.mul(&b).unwrap();
        prop_assert!(ab.power(&mm).unwrap().eq_by(&a.power(&mm).unwrap().mul(&b.power(&mm).unwrap()).unwrap(), |x, y| x == y));
        prop_assert!(a.power(&MotExpr::int(m + n)).unwrap().eq_by(&a.power(&mm).unwrap().mul(&a.power(&nn).unwrap()).unwrap(), |x, y| x == y));
        prop_assert!(a.power(&mm).unwrap().power(&nn).unwrap().eq_by(&a.power(&MotExpr::int(m * n)).unwrap(), |x, y| x == y));
        // (1+T)^m ≡ 1 + mT mod T²
        let t = EvSeries::one(&MotExpr::one(), 1).with(dv(1, 0), MotExpr::u_pow(2));
        let tm = t.power(&mm).unwrap();
        prop_assert_eq!(tm.coeff(dv(1, 0)), MotExpr::u_pow(2).scale(&q(m)));
        // substitution T -> T^2 commutes with powers
        let mut single = EvSeries::one(&MotExpr::one(), 4);
        let mut doubled = EvSeries::one(&MotExpr::one(), 4);
        for i in 1..=2u32 {
            single.set(dv(i, 0), a.coeff(dv(i, 0)));
            doubled.set(dv(2 * i, 0), a.coeff(dv(i, 0)));
        }
        let lhs = doubled.power(&mm).unwrap();
        let rhs = single.power(&mm).unwrap();
        for i in 1..=2u32 {
            prop_assert_eq!(lhs.coeff(dv(2 * i, 0)), rhs.coeff(dv(i, 0)));
            prop_assert!(lhs.coeff(dv(2 * i - 1, 0)).is_zero());
        }
    }
}
