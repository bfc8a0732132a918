use dtcore::dt::*;
use dtcore::fqcount::{CommutingFlags, Sector};
use dtcore::mring::{chi_spec, MonoFrac, MotExpr};
use dtcore::quiver::{build_minus2, Potential, Stability};
use dtcore::realize::{phi_normalize, RealClass};
use dtcore::series::DimVector;
use num_rational::BigRational;

fn v(a: u32, b: u32) -> DimVector {
    DimVector::new(a, b)
}

fn all(d: u32) -> SectorSpec {
    SectorSpec::new(Sector::All, d)
}

fn nilp(d: u32) -> SectorSpec {
    SectorSpec::new(Sector::Nilpotent, d)
}

#[test]
fn lhs_vertex_one() {
    // (0,1): counts of −y²/2 over F_5, divided by q − 1
    let l = lhs_coefficient(&all(1), v(0, 1), 5).unwrap();
    let mut counts = vec![0i64; 5];
    for y in 0..5i64 {
        counts[((-(y * y) * 3) % 5 + 5) as usize % 5] += 1;
    }
    let expect = RealClass::new(
        5,
        counts
            .iter()
            .map(|&c| BigRational::new(c.into(), 4.into()))
            .collect(),
    );
    assert_eq!(l, expect);
    assert_eq!(
        lhs_coefficient(&all(1), v(0, 0), 5).unwrap(),
        RealClass::delta(5)
    );
}

#[test]
fn full_and_kron_routes_agree() {
    for (d, n, p) in [
        (1, v(1, 1), 5),
        (1, v(1, 1), 3),
        (1, v(2, 1), 3),
        (1, v(1, 2), 3),
        (2, v(1, 1), 5),
    ] {
        let a = lhs_coefficient_via(&all(d), n, p, LhsRoute::Full, &NoCache).unwrap();
        let b = lhs_coefficient_via(&all(d), n, p, LhsRoute::Kron, &NoCache).unwrap();
        assert_eq!(a, b, "d={d} n={n} p={p}");
    }
}

#[test]
fn rhs_series_coefficients() {
    let s = rhs_series(&nilp(2), 4);
    let l = MonoFrac::u_pow(2);
    let lm1 = l.sub(&MonoFrac::one());
    // (1−[μ₃])/(𝕃−1)
    assert_eq!(s.coeff(v(1, 2)).mul(&lm1), MonoFrac::atom(3, 1));
    // (𝕃+1)/(𝕃(𝕃−1))
    assert_eq!(s.coeff(v(2, 2)).mul(&lm1).mul(&l), l.add(&MonoFrac::one()));
    let f = rhs_series(&all(2), 4);
    assert_eq!(f.coeff(v(1, 1)).mul(&lm1), l.add(&MonoFrac::one()).mul(&l));
    assert_eq!(f.coeff(v(0, 1)), s.coeff(v(0, 1)));
    assert!(f.coeff(v(0, 2)).is_zero());
}

#[test]
fn exact_and_truncated_rhs_agree() {
    let (e, _) = rhs_realized(&all(1), v(1, 1), 5, RhsRoute::Exact).unwrap();
    let (t, b) = rhs_realized(&all(1), v(1, 1), 5, RhsRoute::Truncated(-80)).unwrap();
    assert!(b > 0.0 && b < 1e-20);
    assert!(dtcore::realize::distance(&e, &t) <= b + 1e-12);
}

#[test]
fn compare_all_sector_small() {
    let dims = [
        v(0, 1),
        v(1, 0),
        v(0, 2),
        v(2, 0),
        v(1, 1),
        v(2, 1),
        v(1, 2),
    ];
    for r in compare(&all(1), 5, &dims, None).unwrap() {
        assert!(
            r.pass,
            "n={} exact={} bound={}",
            r.n, r.exact_pass, r.tail_bound
        );
        assert!(r.tail_bound < 1e-6 * class_scale(&r.lhs));
    }
}

#[test]
fn compare_nilpotent_tower_d2() {
    for r in compare(&nilp(2), 13, &[v(0, 1), v(0, 2), v(2, 0)], None).unwrap() {
        assert!(r.pass, "n={}", r.n);
    }
}

#[test]
fn nilpotent_off_tower_is_unsupported() {
    assert!(lhs_coefficient(&nilp(1), v(1, 1), 5).is_err());
}

#[test]
fn perturbed_d_is_flagged() {
    let r = compare_one(&all(1), &all(2), 13, v(0, 1), None, &NoCache).unwrap();
    assert!(!r.pass);
    let r = compare_one(&all(1), &all(2), 13, v(1, 1), None, &NoCache).unwrap();
    assert!(!r.pass);
}

#[test]
fn perturbed_normalization_is_flagged() {
    let spec = all(1);
    let (q, w) = build_minus2(1);
    let cv = dtcore::fqcount::fiber_counts(
        &q,
        &w,
        &[1, 1],
        5,
        Sector::All,
        dtcore::fqcount::Route::Auto,
    )
    .unwrap();
    let good = phi_normalize(&RealClass::from_counts(&cv), 6, &[1, 1], false).unwrap();
    let bad = phi_normalize(&RealClass::from_counts(&cv), 8, &[1, 1], false).unwrap();
    let (rhs, _) = rhs_realized(&spec, v(1, 1), 5, RhsRoute::Exact).unwrap();
    assert_eq!(good.to_cyc(), rhs);
    assert_ne!(bad.to_cyc(), rhs);
}

#[test]
fn tail_too_large_with_shallow_floor() {
    let r = compare(&all(1), 5, &[v(1, 1)], Some(0));
    assert!(matches!(r, Err(dtcore::error::Error::TailTooLarge { .. })));
}

#[test]
fn calibration_finds_the_predicted_twist() {
    for (d, p) in [(1, 5), (1, 13), (2, 13), (3, 13)] {
        for n in [v(0, 1), v(1, 0)] {
            let c = calibrate(d, p, n).unwrap();
            assert!(c.ok(d, p), "d={d} p={p} n={n} {c:?}");
            assert!(!c.eps_observable);
        }
    }
}

#[test]
fn omega_values() {
    for d in 1..=3 {
        for sector in [Sector::Nilpotent, Sector::All] {
            let t = omega_table(&SectorSpec::new(sector, d), 4).unwrap();
            for n in DimVector::up_to(4) {
                let expect = if n.n0.abs_diff(n.n1) <= 1 {
                    expected_omega(sector, d, n)
                } else {
                    MotExpr::zero()
                };
                let got = t.get(&n).cloned().unwrap_or_else(MotExpr::zero);
                assert_eq!(got, expect, "d={d} {sector} n={n}");
            }
            let chi_off = chi_spec(&t[&v(0, 1)]).unwrap();
            assert_eq!(chi_off, BigRational::from_integer((d as i64).into()));
            assert_eq!(
                chi_spec(&t[&v(1, 1)]).unwrap(),
                BigRational::from_integer((-2).into())
            );
        }
    }
}

#[test]
fn assembly_over_slopes() {
    for d in 1..=2 {
        assert_eq!(nilpotent_assembly(d, 4).unwrap(), vec![], "d={d}");
    }
}

#[test]
fn one_loop_block() {
    for d in 1..=3 {
        let p = one_loop_prime(d);
        for a in 1..=3 {
            assert!(one_loop_check(d, a, p).unwrap(), "d={d} a={a} p={p}");
        }
    }
}

#[test]
fn proof_steps_small() {
    let g = Stability::standard();
    for (d, p, n) in [
        (1, 5, v(1, 1)),
        (1, 3, v(2, 1)),
        (1, 3, v(1, 2)),
        (2, 5, v(1, 1)),
    ] {
        for s in proofstep_suite(d, p, n, &g).unwrap() {
            assert_eq!(
                s.status,
                StepStatus::Pass,
                "d={d} p={p} n={n} {}: {}",
                s.name,
                s.detail
            );
        }
    }
}

#[test]
fn hn_step_with_second_stability() {
    let g = Stability::parse("-2+1i,1+2i").unwrap();
    let r = step_hn(1, 3, v(2, 1), &g).unwrap().unwrap();
    assert!(r.0, "{}", r.1);
}

#[test]
fn sign_flip_in_potential_is_flagged() {
    let (q, w) = build_minus2(1);
    assert!(step_c_elimination(3, v(1, 1), &w).unwrap().unwrap().0);
    let half = BigRational::new(1.into(), 2.into());
    let r = |n: i64| BigRational::from_integer(n.into());
    let bad = Potential::from_terms(&[
        (half.clone(), "XX"),
        (-half, "YY"),
        (r(-1), "XCA"),
        (r(-1), "XDB"),
        (r(1), "YAC"),
        (r(-1), "YBD"),
    ]);
    let cv = dtcore::fqcount::fiber_counts(
        &q,
        &bad,
        &[1, 1],
        5,
        Sector::All,
        dtcore::fqcount::Route::Auto,
    )
    .unwrap();
    let lhs = phi_normalize(&RealClass::from_counts(&cv), 6, &[1, 1], false).unwrap();
    let (rhs, _) = rhs_realized(&all(1), v(1, 1), 5, RhsRoute::Exact).unwrap();
    assert_ne!(lhs.to_cyc(), rhs);
}

#[test]
fn diagonal_chain() {
    let items = diagonal_sector_suite(3, &[2, 3]).unwrap();
    for it in &items {
        assert_eq!(it.holds, it.expected, "{}: {}", it.name, it.detail);
    }
    assert!(items.iter().any(|i| !i.expected));
}

#[test]
fn feit_fine_low_degrees() {
    let ff = feit_fine_series(2);
    let poly = commuting_poly(2, CommutingFlags::BothFree).unwrap();
    let c2 = MonoFrac::from_qpoly(&poly).mul(&MonoFrac::inv_gl(2));
    assert_eq!(ff[2], c2);
    // 𝒞_1 = 𝕃²/(𝕃−1)
    assert_eq!(ff[1], MonoFrac::inv_den(&[1]).mul(&MonoFrac::u_pow(2)));
}
