//! Symbolic coefficients: Laurent polynomials in u = −𝕃^{1/2} whose terms carry
//! at most one monodromic class [μ_k].

pub mod mono;

use crate::error::{Error, Result};
use crate::ff::rat_abs_f64;
use crate::lambda::{mobius, LambdaRing};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

pub use mono::MonoFrac;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// A term c·u^j·[μ_k]; `mu == 1` is the unit.
#[derive(Clone, Debug, PartialEq)]
pub struct MotTerm {
    pub coeff: BigRational,
    pub u_exp: i64,
    pub mu: u32,
}

/// Majorant for the dropped part of a truncated expansion:
/// Σ_{m ≥ m0} coeff·C(m+K−1, K−1)·|u|^{top−2m}·Π|μ|, where m0 is the first m with
/// top − 2m ≤ floor. With K = 0 only m = 0 contributes.
#[derive(Clone, Debug, PartialEq)]
pub struct TailBlock {
    pub coeff: BigRational,
    pub top: i64,
    pub floor: i64,
    pub factors: u32,
    pub mus: Vec<u32>,
}

impl TailBlock {
    fn first_m(&self) -> Option<i64> {
        if self.factors == 0 {
            return if self.top <= self.floor {
                Some(0)
            } else {
                None
            };
        }
        Some(((self.top - self.floor + 1).div_euclid(2)).max(0))
    }

    /// Highest u-degree this block can reach.
    pub fn reach(&self) -> Option<i64> {
        self.first_m().map(|m| self.top - 2 * m)
    }

    /// Upper bound on the absolute value of the dropped terms at |u| = `abs_u` > 1.
    pub fn bound(&self, abs_u: f64, mu_abs: &dyn Fn(u32) -> f64) -> f64 {
        let Some(m0) = self.first_m() else { return 0.0 };
        let mut c = rat_abs_f64(&self.coeff);
        for &k in &self.mus {
            c *= mu_abs(k);
        }
        if self.factors == 0 {
            return c * abs_u.powi(self.top as i32);
        }
        let k = self.factors as i64;
        let y = abs_u.powi(-2);
        let mut binom = 1.0f64;
        for i in 1..k {
            binom *= (m0 + i) as f64 / i as f64;
        }
        c * binom * abs_u.powf((self.top - 2 * m0) as f64) / (1.0 - y).powi(k as i32)
    }

    fn shifted(&self, c: &BigRational, j: i64, mu: u32) -> TailBlock {
        let mut mus = self.mus.clone();
        if mu > 1 {
            mus.push(mu);
        }
        TailBlock {
            coeff: &self.coeff * c.abs(),
            top: self.top + j,
            floor: self.floor + j,
            factors: self.factors,
            mus,
        }
    }

    fn times(&self, o: &TailBlock) -> Option<TailBlock> {
        let (m1, m2) = (self.first_m()?, o.first_m()?);
        let top = self.top + o.top;
        let mut mus = self.mus.clone();
        mus.extend_from_slice(&o.mus);
        Some(TailBlock {
            coeff: &self.coeff * &o.coeff,
            top,
            floor: top - 2 * (m1 + m2),
            factors: self.factors + o.factors,
            mus,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MotExpr {
    terms: BTreeMap<(i64, u32), BigRational>,
    floor: Option<i64>,
    tail: Vec<TailBlock>,
}

impl MotExpr {
    pub fn zero() -> MotExpr {
        MotExpr::default()
    }

    pub fn one() -> MotExpr {
        MotExpr::int(1)
    }

    pub fn int(c: i64) -> MotExpr {
        MotExpr::term(rat(c), 0, 1)
    }

    pub fn rat(c: BigRational) -> MotExpr {
        MotExpr::term(c, 0, 1)
    }

    pub fn u_pow(j: i64) -> MotExpr {
        MotExpr::term(rat(1), j, 1)
    }

    pub fn lefschetz() -> MotExpr {
        MotExpr::u_pow(2)
    }

    /// 𝕃^{1/2} = −u
    pub fn half_l() -> MotExpr {
        MotExpr::term(rat(-1), 1, 1)
    }

    pub fn mu(k: u32) -> MotExpr {
        MotExpr::term(rat(1), 0, k)
    }

    pub fn term(c: BigRational, u_exp: i64, mu: u32) -> MotExpr {
        assert!(mu >= 1, "mu order must be positive");
        let mut e = MotExpr::zero();
        if !c.is_zero() {
            e.terms.insert((u_exp, mu), c);
        }
        e
    }

    fn insert(&mut self, key: (i64, u32), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = MotTerm> + '_ {
        self.terms.iter().rev().map(|(&(u_exp, mu), c)| MotTerm {
            coeff: c.clone(),
            u_exp,
            mu,
        })
    }

    pub fn coeff(&self, u_exp: i64, mu: u32) -> BigRational {
        self.terms
            .get(&(u_exp, mu))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn floor(&self) -> Option<i64> {
        self.floor
    }

    pub fn tail(&self) -> &[TailBlock] {
        &self.tail
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.floor.is_none()
    }

    pub fn has_mu(&self) -> bool {
        self.terms.keys().any(|&(_, m)| m > 1)
    }

    pub fn max_u_exp(&self) -> Option<i64> {
        self.terms.keys().map(|&(j, _)| j).max()
    }

    pub fn min_u_exp(&self) -> Option<i64> {
        self.terms.keys().map(|&(j, _)| j).min()
    }

    pub fn exact_part(&self) -> MotExpr {
        MotExpr {
            terms: self.terms.clone(),
            floor: None,
            tail: vec![],
        }
    }

    /// Agreement with `o` in every degree above this expression's floor.
    pub fn exact_part_eq(&self, o: &MotExpr) -> bool {
        let above = |j: i64| self.floor.map_or(true, |f| j > f);
        let keys: Vec<(i64, u32)> = self.terms.keys().chain(o.terms.keys()).copied().collect();
        keys.into_iter()
            .filter(|&(j, _)| above(j))
            .all(|(j, m)| self.coeff(j, m) == o.coeff(j, m))
    }

    /// Drops everything at or below `floor`, turning the dropped terms into tail blocks.
    pub fn truncate(&self, floor: i64) -> MotExpr {
        let mut out = MotExpr {
            terms: BTreeMap::new(),
            floor: Some(floor),
            tail: self.tail.clone(),
        };
        if let Some(f) = self.floor {
            out.floor = Some(f.max(floor));
        }
        for (&(j, m), c) in &self.terms {
            if j > floor {
                out.terms.insert((j, m), c.clone());
            } else {
                out.tail.push(TailBlock {
                    coeff: c.abs(),
                    top: j,
                    floor,
                    factors: 0,
                    mus: if m > 1 { vec![m] } else { vec![] },
                });
            }
        }
        out
    }

    pub fn add(&self, o: &MotExpr) -> MotExpr {
        let mut r = self.clone();
        for (&k, c) in &o.terms {
            r.insert(k, c.clone());
        }
        r.floor = match (self.floor, o.floor) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        r.tail.extend(o.tail.iter().cloned());
        r
    }

    pub fn neg(&self) -> MotExpr {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = -c.clone();
        }
        r
    }

    pub fn sub(&self, o: &MotExpr) -> MotExpr {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &BigRational) -> MotExpr {
        if s.is_zero() && self.floor.is_none() {
            return MotExpr::zero();
        }
        let mut r = MotExpr {
            terms: BTreeMap::new(),
            floor: self.floor,
            tail: vec![],
        };
        for (&k, c) in &self.terms {
            r.insert(k, c * s);
        }
        r.tail = self.tail.iter().map(|b| b.shifted(s, 0, 1)).collect();
        r
    }

    pub fn mul(&self, o: &MotExpr) -> Result<MotExpr> {
        let mut r = MotExpr::zero();
        for (&(j1, m1), c1) in &self.terms {
            for (&(j2, m2), c2) in &o.terms {
                if m1 > 1 && m2 > 1 {
                    return Err(Error::OutsideSymbolicSubring);
                }
                r.insert((j1 + j2, m1.max(m2)), c1 * c2);
            }
        }
        if self.floor.is_none() && o.floor.is_none() {
            return Ok(r);
        }
        for b in &self.tail {
            for (&(j, m), c) in &o.terms {
                r.tail.push(b.shifted(c, j, m));
            }
            for b2 in &o.tail {
                r.tail.extend(b.times(b2));
            }
        }
        for b in &o.tail {
            for (&(j, m), c) in &self.terms {
                r.tail.push(b.shifted(c, j, m));
            }
        }
        r.tail.retain(|b| b.reach().is_some() && !b.coeff.is_zero());
        let reach = r.tail.iter().filter_map(|b| b.reach()).max();
        r.floor = reach.or(self.floor).or(o.floor);
        let f = r.floor.unwrap();
        // terms at or below the floor are not trustworthy once a tail is present
        let low: Vec<(i64, u32)> = r.terms.keys().filter(|&&(j, _)| j <= f).copied().collect();
        for k in low {
            let c = r.terms.remove(&k).unwrap();
            r.tail.push(TailBlock {
                coeff: c.abs(),
                top: k.0,
                floor: f,
                factors: 0,
                mus: if k.1 > 1 { vec![k.1] } else { vec![] },
            });
        }
        Ok(r)
    }

    /// Power of an expression whose products stay μ-linear. Panics otherwise.
    pub fn pow_int(&self, e: u32) -> MotExpr {
        let mut r = MotExpr::one();
        for _ in 0..e {
            r = r.mul(self).expect("power leaves the symbolic subring");
        }
        r
    }

    /// Inverse of a μ-free monomial c·u^j.
    pub fn inv_monomial(&self) -> MotExpr {
        assert!(
            self.floor.is_none() && self.terms.len() == 1,
            "not a monomial"
        );
        let (&(j, m), c) = self.terms.iter().next().unwrap();
        assert!(m == 1, "monodromic monomials are not invertible here");
        MotExpr::term(c.recip(), -j, 1)
    }

    /// Multiplies by u^j.
    pub fn shift(&self, j: i64) -> MotExpr {
        let mut r = MotExpr {
            terms: BTreeMap::new(),
            floor: self.floor.map(|f| f + j),
            tail: vec![],
        };
        for (&(e, m), c) in &self.terms {
            r.terms.insert((e + j, m), c.clone());
        }
        r.tail = self.tail.iter().map(|b| b.shifted(&rat(1), j, 1)).collect();
        r
    }

    /// Bound on the absolute value of the discarded tail.
    pub fn tail_bound(&self, abs_u: f64, mu_abs: &dyn Fn(u32) -> f64) -> f64 {
        // padded against floating-point rounding
        self.tail
            .iter()
            .map(|b| b.bound(abs_u, mu_abs))
            .sum::<f64>()
            * (1.0 + 1e-9)
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .terms()
            .map(|t| {
                let mut s = format!("{}*u^{}", t.coeff, t.u_exp);
                if t.mu > 1 {
                    s.push_str(&format!("*mu({})", t.mu));
                }
                s
            })
            .collect();
        if let Some(f) = self.floor {
            parts.push(format!("O(u^{f})"));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Parses the output of [`MotExpr::render`]. Tail bounds are not part of the text,
    /// so a parsed truncated expression carries its floor but no certified tail.
    pub fn parse(s: &str) -> Result<MotExpr> {
        let bad = |m: &str| Error::Parse(format!("{m}: {s:?}"));
        let s = s.trim();
        let mut out = MotExpr::zero();
        if s == "0" {
            return Ok(out);
        }
        for part in s.split(" + ") {
            let part = part.trim();
            if let Some(rest) = part.strip_prefix("O(u^") {
                let f = rest.strip_suffix(')').ok_or_else(|| bad("floor"))?;
                out.floor = Some(f.parse().map_err(|_| bad("floor"))?);
                continue;
            }
            let mut it = part.split('*');
            let c: BigRational = it
                .next()
                .ok_or_else(|| bad("coeff"))?
                .parse()
                .map_err(|_| bad("coeff"))?;
            let u = it
                .next()
                .and_then(|x| x.strip_prefix("u^"))
                .ok_or_else(|| bad("u"))?;
            let j: i64 = u.parse().map_err(|_| bad("u"))?;
            let mut m = 1u32;
            if let Some(mu) = it.next() {
                let k = mu
                    .strip_prefix("mu(")
                    .and_then(|x| x.strip_suffix(')'))
                    .ok_or_else(|| bad("mu"))?;
                m = k.parse().map_err(|_| bad("mu"))?;
                if m == 0 {
                    return Err(bad("mu order"));
                }
            }
            if it.next().is_some() {
                return Err(bad("trailing factor"));
            }
            out.insert((j, m), c);
        }
        Ok(out)
    }
}

/// [GL_n] = Π_{i<n}(𝕃ⁿ − 𝕃ⁱ).
pub fn gl_class(n: usize) -> MotExpr {
    let mut r = MotExpr::one();
    for i in 0..n {
        let f = MotExpr::u_pow(2 * n as i64).sub(&MotExpr::u_pow(2 * i as i64));
        r = r.mul(&f).unwrap();
    }
    r
}

fn binom_big(n: i64, k: i64) -> BigInt {
    if k < 0 || n < k {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Class of Symⁿ(μ_k) split into rotation orbits: an orbit of size r gives [μ_r].
pub fn burnside_sigma(n: usize, k: u32) -> MotExpr {
    let k = k as i64;
    let n = n as i64;
    let divs: Vec<i64> = (1..=k).filter(|e| k % e == 0).collect();
    // multisets fixed by the subgroup of order e
    let fix = |e: i64| -> BigInt {
        if n % e != 0 {
            BigInt::zero()
        } else {
            binom_big(k / e + n / e - 1, n / e)
        }
    };
    let mut out = MotExpr::zero();
    for &e in &divs {
        let mut exact = BigInt::zero();
        for &f in divs.iter().filter(|&&f| f % e == 0) {
            exact += fix(f) * mobius((f / e) as usize);
        }
        let size = k / e;
        let (orbits, r) = exact.div_rem(&BigInt::from(size));
        debug_assert!(r.is_zero());
        out = out.add(&MotExpr::term(
            BigRational::from_integer(orbits),
            0,
            size as u32,
        ));
    }
    out
}

fn series_mul(a: &[MotExpr], b: &[MotExpr], n: usize) -> Result<Vec<MotExpr>> {
    let mut out = vec![MotExpr::zero(); n + 1];
    for i in 0..=n {
        for j in 0..=n - i {
            if a[i].is_zero() || b[j].is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&a[i].mul(&b[j])?);
        }
    }
    Ok(out)
}

fn series_inv(a: &[MotExpr], n: usize) -> Result<Vec<MotExpr>> {
    let mut inv = vec![MotExpr::one()];
    for m in 1..=n {
        let mut acc = MotExpr::zero();
        for i in 1..=m {
            if a[i].is_zero() {
                continue;
            }
            acc = acc.add(&a[i].mul(&inv[m - i])?);
        }
        inv.push(acc.neg());
    }
    Ok(inv)
}

/// σⁿ by the u-rule on monomials, orbit decomposition on [μ_k], and the Cauchy rule on sums.
pub fn sigma(n: usize, x: &MotExpr) -> Result<MotExpr> {
    if x.floor.is_some() {
        return Err(Error::Truncated("sigma"));
    }
    let mut total = vec![MotExpr::zero(); n + 1];
    total[0] = MotExpr::one();
    for (&(j, m), c) in &x.terms {
        if !c.is_integer() {
            return Err(Error::NonIntegerCoefficient(c.to_string()));
        }
        let base: Vec<MotExpr> = (0..=n)
            .map(|i| {
                let s = if m > 1 {
                    burnside_sigma(i, m)
                } else {
                    MotExpr::one()
                };
                s.shift(j * i as i64)
            })
            .collect();
        let cnt = c.to_integer();
        let reps = cnt
            .abs()
            .to_u64()
            .ok_or_else(|| Error::NonIntegerCoefficient(c.to_string()))?;
        let factor = if cnt.is_negative() {
            series_inv(&base, n)?
        } else {
            base
        };
        for _ in 0..reps {
            total = series_mul(&total, &factor, n)?;
        }
    }
    Ok(total.pop().unwrap())
}

/// Expansion of num / Π_b (1 − u^{−2b}) in descending u-degree, exact above `floor`.
pub fn expand_rational(num: &MotExpr, dens: &[u32], floor: i64) -> MotExpr {
    assert!(num.floor.is_none(), "numerator must be exact");
    let top = num.max_u_exp().unwrap_or(floor);
    let depth = ((top - floor).max(0) / 2 + 1) as usize;
    // coefficients of Π 1/(1 − x^b) in x = u^{−2}
    let mut a = vec![BigInt::zero(); depth + 1];
    a[0] = BigInt::one();
    for &b in dens {
        let b = b as usize;
        for i in b..=depth {
            let prev = a[i - b].clone();
            a[i] += prev;
        }
    }
    let mut out = MotExpr {
        terms: BTreeMap::new(),
        floor: Some(floor),
        tail: vec![],
    };
    for (&(j, m), c) in &num.terms {
        for (i, ai) in a.iter().enumerate() {
            let e = j - 2 * i as i64;
            if e <= floor {
                break;
            }
            out.insert((e, m), c * BigRational::from_integer(ai.clone()));
        }
        out.tail.push(TailBlock {
            coeff: c.abs(),
            top: j,
            floor,
            factors: dens.len() as u32,
            mus: if m > 1 { vec![m] } else { vec![] },
        });
    }
    out
}

/// Euler characteristic: u ↦ 1, [μ_k] ↦ k.
pub fn chi_spec(x: &MotExpr) -> Result<BigRational> {
    if x.floor.is_some() {
        return Err(Error::Truncated("chi_spec"));
    }
    Ok(x.terms.iter().map(|(&(_, m), c)| c * rat(m as i64)).sum())
}

/// Evaluation at 𝕃 = q with [μ_k] ↦ k. Returns the value of the exact part and a
/// bound on the dropped tail.
pub fn forget_monodromy_eval(x: &MotExpr, q: &BigRational) -> Result<(BigRational, f64)> {
    let mut v = BigRational::zero();
    for (&(j, m), c) in &x.terms {
        if j % 2 != 0 {
            return Err(Error::OddHalfPower);
        }
        v += c * rat(m as i64) * pow_rat(q, j / 2);
    }
    let abs_u = rat_abs_f64(q).sqrt();
    let bound = x.tail_bound(abs_u, &|k| k as f64);
    Ok((v, bound))
}

pub fn pow_rat(q: &BigRational, e: i64) -> BigRational {
    let p = num_traits::pow(q.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Exact value of num / Π_b (1 − q^{−b}) with [μ_k] ↦ k.
pub fn eval_fraction(num: &MotExpr, dens: &[u32], q: &BigRational) -> Result<BigRational> {
    let (mut v, _) = forget_monodromy_eval(&num.exact_part(), q)?;
    for &b in dens {
        v /= BigRational::one() - pow_rat(q, -(b as i64));
    }
    Ok(v)
}

impl LambdaRing for MotExpr {
    fn zero_like(&self) -> Self {
        MotExpr::zero()
    }
    fn one_like(&self) -> Self {
        MotExpr::one()
    }
    fn is_zero(&self) -> bool {
        MotExpr::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        MotExpr::add(self, o)
    }
    fn neg(&self) -> Self {
        MotExpr::neg(self)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        MotExpr::mul(self, o)
    }
    fn scale(&self, c: &BigRational) -> Self {
        MotExpr::scale(self, c)
    }
    fn sigma(&self, n: usize) -> Result<Self> {
        sigma(n, self)
    }
}
