use dtcore::ff::Mat;
use dtcore::quiver::*;
use dtcore::series::DimVector;
use num_rational::BigRational;

fn r(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}
fn dv(a: u32, b: u32) -> DimVector {
    DimVector::new(a, b)
}

#[test]
fn ncderiv_examples() {
    let w = Potential::from_terms(&[(r(1, 1), "XY")]);
    assert_eq!(
        ncderiv(&w, 'X').into_iter().collect::<Vec<_>>(),
        vec![("Y".to_string(), r(1, 1))]
    );
    for d in 1..=4u32 {
        let (_, w) = build_one_loop(d);
        let der = ncderiv(&w, 'X');
        let xd: String = std::iter::repeat('X').take(d as usize).collect();
        assert_eq!(der.len(), 1);
        assert_eq!(der[&xd], r(1, 1));
    }
    let (_, w) = build_minus2(1);
    let dc = ncderiv(&w, 'C');
    assert_eq!(dc["AX"], r(-1, 1));
    assert_eq!(dc["YA"], r(1, 1));
}

#[test]
fn ncderiv_respects_rotation() {
    let a = Potential::from_terms(&[(r(2, 1), "XCAY")]);
    let b = Potential::from_terms(&[(r(2, 1), "AYXC")]);
    assert_eq!(a, b);
    assert_eq!(ncderiv(&a, 'C'), ncderiv(&b, 'C'));
}

#[test]
fn minus2_potential_shape() {
    let (q, w) = build_minus2(1);
    assert_eq!(q.arrows.len(), 6);
    w.check(&q).unwrap();
    let words: Vec<String> = w.terms().map(|(k, _)| k.clone()).collect();
    for expect in ["XX", "YY", "AXC", "BXD", "ACY", "BDY"] {
        assert!(words.contains(&expect.to_string()), "{expect} in {words:?}");
    }
    for d in 1..=4 {
        build_minus2(d).1.check(&q).unwrap();
    }
}

#[test]
fn relations_match_up_to_sign() {
    for d in 1..=3 {
        for (name, hit) in match_relations(d) {
            assert!(hit.is_some(), "d={d}: {name}");
        }
    }
}

#[test]
fn conifold_words() {
    let (q, w) = build_conifold();
    w.check(&q).unwrap();
    assert_eq!(w.coeff("ACBD"), r(1, 1));
    assert_eq!(w.coeff("CBDA"), r(1, 1));
    assert_eq!(w.coeff("ADBC"), r(-1, 1));
}

#[test]
fn splitting_identity_vanishes() {
    for d in 1..=6 {
        let res = splitting_identity(d);
        assert!(res.is_zero(), "d={d}: {}", res.render());
    }
}

#[test]
fn potential_text_roundtrip() {
    for d in 1..=3 {
        let (_, w) = build_minus2(d);
        assert_eq!(Potential::parse(&w.render()).unwrap(), w);
    }
    assert!(Potential::parse("1*").is_err());
    assert_eq!(Potential::parse("0").unwrap(), Potential::zero());
}

#[test]
fn slopes() {
    let g = Stability::standard();
    assert!(slope_less(&g, &dv(0, 1), &dv(1, 0)));
    assert!(!slope_less(&g, &dv(1, 1), &dv(1, 1)));
    assert!(slope_less(&g, &dv(1, 2), &dv(1, 1)));
    assert!(slope_less(&g, &dv(1, 1), &dv(2, 1)));
    assert!(Stability::new(&[(1, 1), (2, 2)]).is_err());
    assert!(Stability::new(&[(1, -1), (2, 2)]).is_err());
    let parsed = Stability::parse("-1+1i,1+1i").unwrap();
    assert_eq!(parsed, g);
    assert!(Stability::parse("-1+2i,2+1i").is_ok());
}

#[test]
fn hn_type_enumeration() {
    let g = Stability::standard();
    let support = [dv(0, 1), dv(1, 0), dv(1, 1)];
    let t = hn_types(&support, dv(1, 1), &g);
    assert_eq!(t.len(), 2);
    assert!(t.contains(&HnType {
        parts: vec![dv(1, 0), dv(0, 1)]
    }));
    assert!(t.contains(&HnType {
        parts: vec![dv(1, 1)]
    }));
    assert_eq!(hn_types(&support, dv(0, 1), &g).len(), 1);
}

#[test]
fn subreps() {
    let q = minus2_quiver();
    let mut rep = Rep::zero(&q, &[1, 1]);
    rep.mats[0] = Mat::from_slice(1, 1, &[1]);
    let s = subrep_dimvectors(&q, &rep, 2).unwrap();
    assert_eq!(
        s.into_iter().collect::<Vec<_>>(),
        vec![dv(0, 0), dv(0, 1), dv(1, 1)]
    );
    let z = Rep::zero(&q, &[0, 0]);
    assert_eq!(subrep_dimvectors(&q, &z, 2).unwrap().len(), 1);
    let s01 = Rep::zero(&q, &[0, 1]);
    assert_eq!(
        subrep_dimvectors(&q, &s01, 3)
            .unwrap()
            .into_iter()
            .collect::<Vec<_>>(),
        vec![dv(0, 0), dv(0, 1)]
    );
}

#[test]
fn nilpotency_examples() {
    let q = minus2_quiver();
    assert!(Rep::zero(&q, &[2, 1]).is_nilpotent(&q, 3));
    let mut r1 = Rep::zero(&q, &[1, 0]);
    r1.mats[4] = Mat::from_slice(1, 1, &[1]);
    assert!(!r1.is_nilpotent(&q, 3));
    let mut j = Rep::zero(&q, &[2, 0]);
    j.mats[4] = Mat::from_slice(2, 2, &[0, 1, 0, 0]);
    assert!(j.is_nilpotent(&q, 3));
    // A·C cycle with nonzero product is not nilpotent
    let mut ac = Rep::zero(&q, &[1, 1]);
    ac.mats[0] = Mat::from_slice(1, 1, &[1]);
    ac.mats[2] = Mat::from_slice(1, 1, &[1]);
    assert!(!ac.is_nilpotent(&q, 2));
}

#[test]
fn conifold_jacobi_points_match() {
    let (q, w) = build_minus2(1);
    let (qc, wc) = build_conifold();
    for p in [2, 3] {
        let a = jacobi_point_count(&q, &w, &[1, 1], p).unwrap();
        let b = jacobi_point_count(&qc, &wc, &[1, 1], p).unwrap();
        assert_eq!(a, b, "p={p}");
    }
}
