//! Rational functions in u with Adams operations.
//!
//! The numerator is a polynomial in u^{±1} and the atoms P_{k,r} = ψ^r(1 − [μ_k]);
//! the denominator is a product of factors (1 − u^{−2b}). ψ^s sends u ↦ u^s,
//! P_{k,r} ↦ P_{k,rs} and b ↦ bs, so σ follows from Newton's identities.

use super::MotExpr;
use crate::error::{Error, Result};
use crate::lambda::{sigma_from_adams, Adams, LambdaRing};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// u-exponent together with the atom powers {(k, r) ↦ e}.
pub type Monomial = (i64, BTreeMap<(u32, u32), u32>);

#[derive(Clone, Debug, Default)]
pub struct MonoFrac {
    num: BTreeMap<Monomial, BigRational>,
    den: BTreeMap<u32, u32>,
}

fn add_into(map: &mut BTreeMap<Monomial, BigRational>, k: Monomial, c: BigRational) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(k.clone()).or_insert_with(BigRational::zero);
    *e += c;
    if e.is_zero() {
        map.remove(&k);
    }
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut atoms = a.1.clone();
    for (&k, &e) in &b.1 {
        *atoms.entry(k).or_insert(0) += e;
    }
    (a.0 + b.0, atoms)
}

fn poly_mul(
    a: &BTreeMap<Monomial, BigRational>,
    b: &BTreeMap<Monomial, BigRational>,
) -> BTreeMap<Monomial, BigRational> {
    let mut out = BTreeMap::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            add_into(&mut out, mono_mul(ka, kb), ca * cb);
        }
    }
    out
}

/// (1 − u^{−2b})^e as a polynomial.
fn den_poly(b: u32, e: u32) -> BTreeMap<Monomial, BigRational> {
    let mut f = BTreeMap::new();
    f.insert((0, BTreeMap::new()), BigRational::one());
    let mut g = BTreeMap::new();
    g.insert((0, BTreeMap::new()), BigRational::one());
    g.insert((-2 * b as i64, BTreeMap::new()), -BigRational::one());
    for _ in 0..e {
        f = poly_mul(&f, &g);
    }
    f
}

impl MonoFrac {
    pub fn zero() -> MonoFrac {
        MonoFrac::default()
    }

    pub fn one() -> MonoFrac {
        MonoFrac::monomial(BigRational::one(), 0)
    }

    pub fn int(c: i64) -> MonoFrac {
        MonoFrac::monomial(BigRational::from_integer(c.into()), 0)
    }

    pub fn monomial(c: BigRational, u_exp: i64) -> MonoFrac {
        let mut r = MonoFrac::zero();
        add_into(&mut r.num, (u_exp, BTreeMap::new()), c);
        r
    }

    pub fn u_pow(j: i64) -> MonoFrac {
        MonoFrac::monomial(BigRational::one(), j)
    }

    /// ψ^r(1 − [μ_k])
    pub fn atom(k: u32, r: u32) -> MonoFrac {
        if k == 1 {
            return MonoFrac::zero();
        }
        let mut atoms = BTreeMap::new();
        atoms.insert((k, r), 1);
        let mut m = MonoFrac::zero();
        m.num.insert((0, atoms), BigRational::one());
        m
    }

    /// [μ_k] = 1 − P_{k,1}
    pub fn mu(k: u32) -> MonoFrac {
        MonoFrac::one().sub(&MonoFrac::atom(k, 1))
    }

    /// 1 / Π_b (1 − u^{−2b})
    pub fn inv_den(bs: &[u32]) -> MonoFrac {
        let mut r = MonoFrac::one();
        for &b in bs {
            *r.den.entry(b).or_insert(0) += 1;
        }
        r
    }

    /// 1/[GL_n] = u^{−2n²} / Π_{i=1}^{n}(1 − u^{−2i})
    pub fn inv_gl(n: usize) -> MonoFrac {
        let bs: Vec<u32> = (1..=n as u32).collect();
        MonoFrac::u_pow(-2 * (n * n) as i64).mul(&MonoFrac::inv_den(&bs))
    }

    /// μ-free Laurent polynomial part of an exact MotExpr; [μ_k] becomes 1 − P_{k,1}.
    pub fn from_mot(x: &MotExpr) -> Result<MonoFrac> {
        if x.floor().is_some() {
            return Err(Error::Truncated("from_mot"));
        }
        let mut r = MonoFrac::zero();
        for t in x.terms() {
            let base = if t.mu > 1 {
                MonoFrac::mu(t.mu)
            } else {
                MonoFrac::one()
            };
            r = r.add(&base.mul(&MonoFrac::monomial(t.coeff, t.u_exp)));
        }
        Ok(r)
    }

    pub fn num(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.num
    }

    pub fn den(&self) -> &BTreeMap<u32, u32> {
        &self.den
    }

    pub fn den_list(&self) -> Vec<u32> {
        self.den
            .iter()
            .flat_map(|(&b, &e)| std::iter::repeat(b).take(e as usize))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn add(&self, o: &MonoFrac) -> MonoFrac {
        let mut den = self.den.clone();
        for (&b, &e) in &o.den {
            let x = den.entry(b).or_insert(0);
            *x = (*x).max(e);
        }
        let lift = |f: &MonoFrac| {
            let mut n = f.num.clone();
            for (&b, &e) in &den {
                let have = f.den.get(&b).copied().unwrap_or(0);
                if e > have {
                    n = poly_mul(&n, &den_poly(b, e - have));
                }
            }
            n
        };
        let mut num = lift(self);
        for (k, c) in lift(o) {
            add_into(&mut num, k, c);
        }
        MonoFrac { num, den }
    }

    pub fn neg(&self) -> MonoFrac {
        MonoFrac {
            num: self.num.iter().map(|(k, c)| (k.clone(), -c)).collect(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &MonoFrac) -> MonoFrac {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &BigRational) -> MonoFrac {
        if s.is_zero() {
            return MonoFrac::zero();
        }
        MonoFrac {
            num: self.num.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &MonoFrac) -> MonoFrac {
        let mut den = self.den.clone();
        for (&b, &e) in &o.den {
            *den.entry(b).or_insert(0) += e;
        }
        MonoFrac {
            num: poly_mul(&self.num, &o.num),
            den,
        }
    }

    pub fn psi(&self, s: u32) -> MonoFrac {
        let s64 = s as i64;
        let mut num = BTreeMap::new();
        for ((j, atoms), c) in &self.num {
            let a2 = atoms.iter().map(|(&(k, r), &e)| ((k, r * s), e)).collect();
            add_into(&mut num, (j * s64, a2), c.clone());
        }
        let den = self.den.iter().map(|(&b, &e)| (b * s, e)).collect();
        MonoFrac { num, den }
    }

    /// Cancels denominator factors that divide the numerator exactly.
    pub fn reduce(&self) -> MonoFrac {
        let mut r = self.clone();
        if r.num.is_empty() {
            r.den.clear();
            return r;
        }
        loop {
            let mut changed = false;
            let bs: Vec<u32> = r.den.keys().copied().collect();
            for b in bs {
                if let Some(q) = div_exact(&r.num, b) {
                    r.num = q;
                    let e = r.den.get_mut(&b).unwrap();
                    *e -= 1;
                    if *e == 0 {
                        r.den.remove(&b);
                    }
                    changed = true;
                }
            }
            if !changed {
                return r;
            }
        }
    }

    /// True when no atom occurs.
    pub fn is_mu_free(&self) -> bool {
        self.num.keys().all(|(_, a)| a.is_empty())
    }

    /// Highest and lowest u-exponent of the numerator.
    pub fn num_degree_range(&self) -> Option<(i64, i64)> {
        let js = self.num.keys().map(|(j, _)| *j);
        Some((js.clone().max()?, js.min()?))
    }

    /// The numerator as a MotExpr, provided every monomial has at most one atom of the
    /// form P_{k,1} to the first power.
    pub fn num_to_mot(&self) -> Result<MotExpr> {
        let mut out = MotExpr::zero();
        for ((j, atoms), c) in &self.num {
            let mut base = MotExpr::one();
            match atoms.len() {
                0 => {}
                1 => {
                    let (&(k, r), &e) = atoms.iter().next().unwrap();
                    if r != 1 || e != 1 {
                        return Err(Error::OutsideSymbolicSubring);
                    }
                    base = MotExpr::one().sub(&MotExpr::mu(k));
                }
                _ => return Err(Error::OutsideSymbolicSubring),
            }
            out = out.add(&base.scale(c).shift(*j));
        }
        Ok(out)
    }

    /// Laurent expansion in descending u-degree, exact above `floor`.
    pub fn expand(&self, floor: i64) -> Result<MotExpr> {
        let r = self.reduce();
        Ok(super::expand_rational(
            &r.num_to_mot()?,
            &r.den_list(),
            floor,
        ))
    }

    /// Σ c_i q^i with q = 𝕃 = u².
    pub fn from_qpoly(coeffs: &[BigRational]) -> MonoFrac {
        let mut r = MonoFrac::zero();
        for (i, c) in coeffs.iter().enumerate() {
            r = r.add(&MonoFrac::monomial(c.clone(), 2 * i as i64));
        }
        r
    }

    /// Value at 𝕃 = q for μ-free fractions with even u-exponents.
    pub fn eval_q(&self, q: &BigRational) -> Result<BigRational> {
        let mut num = BigRational::zero();
        for ((j, atoms), c) in &self.num {
            if !atoms.is_empty() {
                return Err(Error::OutsideSymbolicSubring);
            }
            if j % 2 != 0 {
                return Err(Error::OddHalfPower);
            }
            num += c * super::pow_rat(q, j / 2);
        }
        let mut den = BigRational::one();
        for (&b, &m) in &self.den {
            let f = BigRational::one() - super::pow_rat(q, -(b as i64));
            for _ in 0..m {
                den *= &f;
            }
        }
        Ok(num / den)
    }

    /// Exact MotExpr when the denominator cancels completely.
    pub fn to_mot(&self) -> Result<MotExpr> {
        let r = self.reduce();
        if !r.den.is_empty() {
            return Err(Error::Unsupported("denominator does not cancel".into()));
        }
        r.num_to_mot()
    }
}

/// Quotient of `num` by (1 − u^{−2b}) if exact.
fn div_exact(
    num: &BTreeMap<Monomial, BigRational>,
    b: u32,
) -> Option<BTreeMap<Monomial, BigRational>> {
    let step = 2 * b as i64;
    let mut groups: BTreeMap<BTreeMap<(u32, u32), u32>, BTreeMap<i64, BigRational>> =
        BTreeMap::new();
    for ((j, a), c) in num {
        groups.entry(a.clone()).or_default().insert(*j, c.clone());
    }
    let mut out = BTreeMap::new();
    for (atoms, poly) in groups {
        let hi = *poly.keys().next_back().unwrap();
        let lo = *poly.keys().next().unwrap();
        if hi - lo < step {
            return None;
        }
        let mut q: BTreeMap<i64, BigRational> = BTreeMap::new();
        let mut j = hi;
        while j >= lo + step {
            let v = poly.get(&j).cloned().unwrap_or_else(BigRational::zero)
                + q.get(&(j + step))
                    .cloned()
                    .unwrap_or_else(BigRational::zero);
            q.insert(j, v);
            j -= 1;
        }
        // remainder check on the bottom 2b degrees
        for j in lo..lo + step {
            let n = poly.get(&j).cloned().unwrap_or_else(BigRational::zero);
            let qj = q
                .get(&(j + step))
                .cloned()
                .unwrap_or_else(BigRational::zero);
            if n + qj != BigRational::zero() {
                return None;
            }
        }
        for (j, c) in q {
            add_into(&mut out, (j, atoms.clone()), c);
        }
    }
    Some(out)
}

impl PartialEq for MonoFrac {
    fn eq(&self, o: &MonoFrac) -> bool {
        let mut a = self.num.clone();
        for (&b, &e) in &o.den {
            a = poly_mul(&a, &den_poly(b, e));
        }
        let mut c = o.num.clone();
        for (&b, &e) in &self.den {
            c = poly_mul(&c, &den_poly(b, e));
        }
        a == c
    }
}

impl LambdaRing for MonoFrac {
    fn zero_like(&self) -> Self {
        MonoFrac::zero()
    }
    fn one_like(&self) -> Self {
        MonoFrac::one()
    }
    fn is_zero(&self) -> bool {
        MonoFrac::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        MonoFrac::add(self, o)
    }
    fn neg(&self) -> Self {
        MonoFrac::neg(self)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        Ok(MonoFrac::mul(self, o))
    }
    fn scale(&self, c: &BigRational) -> Self {
        MonoFrac::scale(self, c)
    }
    fn sigma(&self, n: usize) -> Result<Self> {
        Ok(sigma_from_adams(self, n)?.reduce())
    }
}

impl Adams for MonoFrac {
    fn psi(&self, k: usize) -> Result<Self> {
        Ok(MonoFrac::psi(self, k as u32))
    }
}
