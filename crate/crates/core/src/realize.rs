//! Classes over A¹ realized as fiber-count vectors modulo constants.
//!
//! A count vector v is identified with Σ_t v_t ζ^t in Q(ζ_p); constants die because
//! 1 + ζ + … + ζ^{p−1} = 0, and convolution becomes multiplication. λ-operations are
//! realized through Adams levels: level r of x is the realization of ψ^r(x), which for
//! a one-variable model [A¹ → c z^k] is the exponential sum over F_{p^r}.

use crate::error::{Error, Result};
use crate::ff::{is_prime, rat_abs_f64, ExtField};
use crate::fqcount::{gl_order, CountVector};
use crate::lambda::{sigma_from_adams, Adams, LambdaRing};
use crate::mring::{MonoFrac, MotExpr};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::json;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Element of Q(ζ_p) in the basis 1, ζ, …, ζ^{p−2}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycNum {
    p: u32,
    c: Vec<BigRational>,
}

impl CycNum {
    /// From coefficients of ζ^0..ζ^{p−1}.
    pub fn from_full(p: u32, mut full: Vec<BigRational>) -> CycNum {
        assert_eq!(full.len(), p as usize);
        let top = full.pop().unwrap();
        if !top.is_zero() {
            for x in full.iter_mut() {
                *x -= &top;
            }
        }
        CycNum { p, c: full }
    }

    pub fn zero(p: u32) -> CycNum {
        CycNum {
            p,
            c: vec![BigRational::zero(); p as usize - 1],
        }
    }

    pub fn rat(p: u32, r: BigRational) -> CycNum {
        let mut z = CycNum::zero(p);
        z.c[0] = r;
        z
    }

    pub fn one(p: u32) -> CycNum {
        CycNum::rat(p, BigRational::one())
    }

    pub fn zeta(p: u32, t: u32) -> CycNum {
        let mut full = vec![BigRational::zero(); p as usize];
        full[(t % p) as usize] = BigRational::one();
        CycNum::from_full(p, full)
    }

    pub fn from_counts(p: u32, v: &[BigRational]) -> CycNum {
        CycNum::from_full(p, v.to_vec())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    fn full(&self) -> Vec<BigRational> {
        let mut f = self.c.clone();
        f.push(BigRational::zero());
        f
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    /// The rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.c[1..]
            .iter()
            .all(|x| x.is_zero())
            .then(|| self.c[0].clone())
    }

    pub fn add(&self, o: &CycNum) -> CycNum {
        assert_eq!(self.p, o.p);
        CycNum {
            p: self.p,
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> CycNum {
        CycNum {
            p: self.p,
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn sub(&self, o: &CycNum) -> CycNum {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &BigRational) -> CycNum {
        if s.is_zero() {
            return CycNum::zero(self.p);
        }
        CycNum {
            p: self.p,
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, o: &CycNum) -> CycNum {
        assert_eq!(self.p, o.p);
        if let Some(r) = self.as_rational() {
            return o.scale(&r);
        }
        if let Some(r) = o.as_rational() {
            return self.scale(&r);
        }
        let p = self.p as usize;
        let mut full = vec![BigRational::zero(); p];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                full[(i + j) % p] += a * b;
            }
        }
        CycNum::from_full(self.p, full)
    }

    pub fn pow(&self, e: u32) -> CycNum {
        let mut r = CycNum::one(self.p);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// The Galois conjugate ζ ↦ ζ^j.
    pub fn galois(&self, j: u32) -> CycNum {
        let p = self.p as usize;
        let mut full = vec![BigRational::zero(); p];
        for (t, a) in self.full().into_iter().enumerate() {
            full[t * j as usize % p] += a;
        }
        CycNum::from_full(self.p, full)
    }

    /// The complex embeddings ζ ↦ e^{2πij/p}, j = 1..p−1.
    pub fn embeddings(&self) -> Vec<(f64, f64)> {
        let p = self.p as usize;
        let cf: Vec<f64> = self
            .c
            .iter()
            .map(|x| x.to_f64().unwrap_or(f64::NAN))
            .collect();
        (1..p)
            .map(|j| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, a) in cf.iter().enumerate() {
                    if *a == 0.0 {
                        continue;
                    }
                    let th = 2.0 * std::f64::consts::PI * ((t * j) % p) as f64 / p as f64;
                    re += a * th.cos();
                    im += a * th.sin();
                }
                (re, im)
            })
            .collect()
    }

    /// max_j |τ_j(x)|.
    pub fn abs_max(&self) -> f64 {
        if let Some(r) = self.as_rational() {
            return rat_abs_f64(&r);
        }
        self.embeddings()
            .into_iter()
            .map(|(a, b)| a.hypot(b))
            .fold(0.0, f64::max)
    }

    /// Coefficients as strings, for reports.
    pub fn render(&self) -> Vec<String> {
        self.c.iter().map(|x| x.to_string()).collect()
    }
}

/// Record of the normalization applied to a realized class.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Normalization {
    /// Twice the applied power of q.
    pub q_exp2: i64,
    pub gl_ranks: Vec<usize>,
    /// A half-power of q left symbolic.
    pub deferred_half: bool,
}

#[derive(Clone, Debug)]
pub struct RealClass {
    pub p: u32,
    pub vec: Vec<BigRational>,
    pub meta: Normalization,
}

impl PartialEq for RealClass {
    /// Equality modulo constant vectors.
    fn eq(&self, o: &RealClass) -> bool {
        self.p == o.p && self.to_cyc() == o.to_cyc()
    }
}

impl RealClass {
    pub fn new(p: u32, vec: Vec<BigRational>) -> RealClass {
        assert_eq!(vec.len(), p as usize);
        RealClass {
            p,
            vec,
            meta: Normalization::default(),
        }
    }

    pub fn from_counts(cv: &CountVector) -> RealClass {
        RealClass::new(
            cv.p,
            cv.counts
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn delta(p: u32) -> RealClass {
        let mut v = vec![BigRational::zero(); p as usize];
        v[0] = BigRational::one();
        RealClass::new(p, v)
    }

    pub fn zero(p: u32) -> RealClass {
        RealClass::new(p, vec![BigRational::zero(); p as usize])
    }

    /// The vector with zero last entry representing a cyclotomic number.
    pub fn from_cyc(x: &CycNum) -> RealClass {
        RealClass::new(x.p, x.full())
    }

    pub fn to_cyc(&self) -> CycNum {
        CycNum::from_counts(self.p, &self.vec)
    }

    pub fn add(&self, o: &RealClass) -> Result<RealClass> {
        if self.p != o.p {
            return Err(Error::PrimeMismatch(self.p, o.p));
        }
        Ok(RealClass::new(
            self.p,
            self.vec.iter().zip(&o.vec).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn scale(&self, s: &BigRational) -> RealClass {
        RealClass {
            p: self.p,
            vec: self.vec.iter().map(|a| a * s).collect(),
            meta: self.meta.clone(),
        }
    }

    /// (a∗b)_t = Σ_s a_s b_{t−s}.
    pub fn convolve(&self, o: &RealClass) -> Result<RealClass> {
        if self.p != o.p {
            return Err(Error::PrimeMismatch(self.p, o.p));
        }
        let p = self.p as usize;
        let mut out = vec![BigRational::zero(); p];
        for (s, a) in self.vec.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (t, b) in o.vec.iter().enumerate() {
                out[(s + t) % p] += a * b;
            }
        }
        Ok(RealClass::new(self.p, out))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "p": self.p,
            "counts": self.vec.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "normalization": {
                "qExponentTimesTwo": self.meta.q_exp2,
                "glRanks": self.meta.gl_ranks,
                "deferredHalfPower": self.meta.deferred_half,
            }
        })
    }
}

/// Σ_t vec_t ζ^{jt}.
pub fn fourier(a: &RealClass, j: u32) -> CycNum {
    let p = a.p as usize;
    let mut full = vec![BigRational::zero(); p];
    for (t, x) in a.vec.iter().enumerate() {
        full[t * j as usize % p] += x;
    }
    CycNum::from_full(a.p, full)
}

fn g_m_power_counts(k: u32, c: u32, p: u32) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); p as usize];
    for z in 1..p as u64 {
        let t = c as u64 * crate::ff::pow_mod(z, k as u64, p as u64) % p as u64;
        v[t as usize] += BigRational::one();
    }
    v
}

/// [μ_k] as the negated fiber counts of z ↦ c·z^k on G_m, so that 1 − [μ_k] is the
/// class of z ↦ c·z^k on A¹.
pub fn realize_mu_twisted(k: u32, p: u32, c: u32) -> RealClass {
    let v = g_m_power_counts(k, c, p).into_iter().map(|x| -x).collect();
    RealClass::new(p, v)
}

pub fn realize_mu(k: u32, p: u32) -> RealClass {
    realize_mu_twisted(k, p, 1)
}

/// 𝕃^{1/2} ↦ ε·(fiber counts of z ↦ z² on A¹).
pub fn realize_half_l(p: u32, eps: i8) -> Result<RealClass> {
    if !is_prime(p as u64) || p % 4 != 1 {
        return Err(Error::BadPrime {
            p,
            reason: "𝕃^{1/2} needs p ≡ 1 mod 4".into(),
        });
    }
    let mut v = g_m_power_counts(2, 1, p);
    v[0] += BigRational::one();
    Ok(RealClass::new(
        p,
        v.into_iter().map(|x| x * rat(eps as i64)).collect(),
    ))
}

type SumKey = (u32, u32, u32, usize);

fn sum_cache() -> &'static Mutex<HashMap<SumKey, CycNum>> {
    static C: OnceLock<Mutex<HashMap<SumKey, CycNum>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// S_r(c, k) = Σ_{z ∈ F_{p^r}} ζ^{Tr(c·z^k)}.
pub fn exp_sum(p: u32, c: u32, k: u32, r: usize) -> CycNum {
    let key = (p, c, k, r);
    if let Some(v) = sum_cache().lock().unwrap().get(&key) {
        return v.clone();
    }
    let f = ExtField::new(p, r);
    let cf = f.from_base(c);
    let mut hist = vec![0u64; p as usize];
    for idx in 0..f.size() {
        let z = f.element(idx);
        let t = f.trace(&f.mul(&cf, &f.pow(&z, k)));
        hist[t as usize] += 1;
    }
    let v = CycNum::from_full(p, hist.into_iter().map(|h| rat(h as i64)).collect());
    sum_cache().lock().unwrap().insert(key, v.clone());
    v
}

/// Realization context: the prime, the sign of 𝕃^{1/2}, a twist c per μ_k, and an
/// optional injected sign fault at one Adams level.
#[derive(Clone, Debug)]
pub struct Realizer {
    pub p: u32,
    pub eps: i8,
    pub twists: BTreeMap<u32, u32>,
    pub fault_level: Option<usize>,
}

impl Realizer {
    pub fn new(p: u32) -> Result<Realizer> {
        if !is_prime(p as u64) {
            return Err(Error::BadPrime {
                p,
                reason: "not prime".into(),
            });
        }
        Ok(Realizer {
            p,
            eps: 1,
            twists: BTreeMap::new(),
            fault_level: None,
        })
    }

    pub fn with_twist(mut self, k: u32, c: u32) -> Realizer {
        self.twists.insert(k, c % self.p);
        self
    }

    pub fn with_eps(mut self, eps: i8) -> Realizer {
        self.eps = eps;
        self
    }

    pub fn twist(&self, k: u32) -> u32 {
        self.twists.get(&k).copied().unwrap_or(1)
    }

    fn q_pow(&self, e: i64) -> BigRational {
        crate::mring::pow_rat(&rat(self.p as i64), e)
    }

    /// u^j at level r, that is (−εG)^{jr} with G the quadratic Gauss sum.
    pub fn u_level(&self, j: i64, r: usize) -> Result<CycNum> {
        let e = j * r as i64;
        if e % 2 == 0 {
            return Ok(CycNum::rat(self.p, self.q_pow(e / 2)));
        }
        if self.p % 4 != 1 {
            return Err(Error::BadPrime {
                p: self.p,
                reason: "odd power of 𝕃^{1/2} needs p ≡ 1 mod 4".into(),
            });
        }
        let mut sign = -(self.eps as i64);
        if self.fault_level == Some(r) {
            sign = -sign;
        }
        let g = exp_sum(self.p, 1, 2, 1).scale(&rat(sign));
        Ok(g.scale(&self.q_pow((e - 1) / 2)))
    }

    /// ψ^r of P_{k,s} = ψ^s(1 − [μ_k]), i.e. S_{rs}(c_k, k).
    pub fn atom_level(&self, k: u32, s: u32, r: usize) -> CycNum {
        exp_sum(self.p, self.twist(k), k, r * s as usize)
    }

    pub fn mu_level(&self, k: u32, r: usize) -> CycNum {
        if k == 1 {
            return CycNum::one(self.p);
        }
        CycNum::one(self.p).sub(&self.atom_level(k, 1, r))
    }

    /// Weil bound on |[μ_k]| at level r.
    pub fn mu_abs(&self, k: u32, r: usize) -> f64 {
        if k == 1 {
            1.0
        } else {
            1.0 + (k - 1) as f64 * (self.p as f64).powf(r as f64 / 2.0)
        }
    }

    /// Level-r realization of a MotExpr with a bound on the dropped tail.
    pub fn mot_level(&self, x: &MotExpr, r: usize) -> Result<(CycNum, f64)> {
        let mut acc = CycNum::zero(self.p);
        for t in x.terms() {
            let v = self
                .u_level(t.u_exp, r)?
                .mul(&self.mu_level(t.mu, r))
                .scale(&t.coeff);
            acc = acc.add(&v);
        }
        let abs_u = (self.p as f64).powf(r as f64 / 2.0);
        let bound = if x.tail().is_empty() {
            0.0
        } else {
            x.tail_bound(abs_u, &|k| self.mu_abs(k, r))
        };
        Ok((acc, bound))
    }

    pub fn leveled_mot(&self, x: &MotExpr, levels: usize) -> Result<Leveled> {
        let mut vals = Vec::new();
        let mut errs = Vec::new();
        for r in 1..=levels {
            let (v, e) = self.mot_level(x, r)?;
            vals.push(v);
            errs.push(e);
        }
        Ok(Leveled {
            p: self.p,
            vals,
            errs,
        })
    }

    /// Exact level-r realization of a rational function.
    pub fn mono_level(&self, x: &MonoFrac, r: usize) -> Result<CycNum> {
        let mut acc = CycNum::zero(self.p);
        for ((j, atoms), c) in x.num() {
            let mut v = self.u_level(*j, r)?.scale(c);
            for (&(k, s), &e) in atoms {
                v = v.mul(&self.atom_level(k, s, r).pow(e));
            }
            acc = acc.add(&v);
        }
        let mut den = BigRational::one();
        for (&b, &m) in x.den() {
            let f = BigRational::one() - self.q_pow(-(b as i64) * r as i64);
            for _ in 0..m {
                den *= &f;
            }
        }
        Ok(acc.scale(&den.recip()))
    }

    pub fn leveled_mono(&self, x: &MonoFrac, levels: usize) -> Result<Leveled> {
        let vals = (1..=levels)
            .map(|r| self.mono_level(x, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Leveled {
            p: self.p,
            errs: vec![0.0; vals.len()],
            vals,
        })
    }
}

/// Realizations of ψ^1(x), …, ψ^L(x), each with an error bound.
#[derive(Clone, Debug)]
pub struct Leveled {
    pub p: u32,
    pub vals: Vec<CycNum>,
    pub errs: Vec<f64>,
}

impl Leveled {
    pub fn levels(&self) -> usize {
        self.vals.len()
    }

    pub fn constant(p: u32, c: BigRational, levels: usize) -> Leveled {
        Leveled {
            p,
            vals: vec![CycNum::rat(p, c); levels],
            errs: vec![0.0; levels],
        }
    }

    /// Level 1 as a class with its error bound.
    pub fn level1(&self) -> Result<(CycNum, f64)> {
        if self.vals.is_empty() {
            return Err(Error::Levels { need: 1, have: 0 });
        }
        Ok((self.vals[0].clone(), self.errs[0]))
    }
}

impl LambdaRing for Leveled {
    fn zero_like(&self) -> Self {
        Leveled::constant(self.p, BigRational::zero(), self.levels())
    }

    fn one_like(&self) -> Self {
        Leveled::constant(self.p, BigRational::one(), self.levels())
    }

    fn is_zero(&self) -> bool {
        self.vals.iter().all(|v| v.is_zero()) && self.errs.iter().all(|e| *e == 0.0)
    }

    fn add(&self, o: &Self) -> Self {
        let n = self.levels().min(o.levels());
        Leveled {
            p: self.p,
            vals: (0..n).map(|i| self.vals[i].add(&o.vals[i])).collect(),
            errs: (0..n).map(|i| self.errs[i] + o.errs[i]).collect(),
        }
    }

    fn neg(&self) -> Self {
        Leveled {
            p: self.p,
            vals: self.vals.iter().map(|v| v.neg()).collect(),
            errs: self.errs.clone(),
        }
    }

    fn mul(&self, o: &Self) -> Result<Self> {
        let n = self.levels().min(o.levels());
        let mut vals = Vec::with_capacity(n);
        let mut errs = Vec::with_capacity(n);
        for i in 0..n {
            vals.push(self.vals[i].mul(&o.vals[i]));
            let (ea, eb) = (self.errs[i], o.errs[i]);
            errs.push(if ea == 0.0 && eb == 0.0 {
                0.0
            } else {
                self.vals[i].abs_max() * eb + o.vals[i].abs_max() * ea + ea * eb
            });
        }
        Ok(Leveled {
            p: self.p,
            vals,
            errs,
        })
    }

    fn scale(&self, c: &BigRational) -> Self {
        let a = rat_abs_f64(c);
        Leveled {
            p: self.p,
            vals: self.vals.iter().map(|v| v.scale(c)).collect(),
            errs: self.errs.iter().map(|e| e * a).collect(),
        }
    }

    fn sigma(&self, n: usize) -> Result<Self> {
        if n > self.levels() {
            return Err(Error::Levels {
                need: n,
                have: self.levels(),
            });
        }
        sigma_from_adams(self, n)
    }
}

impl Adams for Leveled {
    fn psi(&self, k: usize) -> Result<Self> {
        let n = self.levels() / k;
        Ok(Leveled {
            p: self.p,
            vals: (1..=n).map(|r| self.vals[r * k - 1].clone()).collect(),
            errs: (1..=n).map(|r| self.errs[r * k - 1]).collect(),
        })
    }
}

/// Realized class of x at level 1 with its tail bound.
pub fn realize_expr(x: &MotExpr, re: &Realizer) -> Result<(RealClass, f64)> {
    let (v, b) = re.mot_level(x, 1)?;
    Ok((RealClass::from_cyc(&v), b))
}

/// σⁿ(x) realized through Adams levels.
pub fn realize_sigma(n: usize, x: &MotExpr, re: &Realizer) -> Result<(RealClass, f64)> {
    if n == 0 {
        return Ok((RealClass::delta(re.p), 0.0));
    }
    let l = re.leveled_mot(x, n)?;
    let (v, b) = l.sigma(n)?.level1()?;
    Ok((RealClass::from_cyc(&v), b))
}

/// The orbit-counting composite: symbolic σ first, then realize.
pub fn realize_sigma_burnside(n: usize, x: &MotExpr, re: &Realizer) -> Result<(RealClass, f64)> {
    realize_expr(&crate::mring::sigma(n, x)?, re)
}

/// Multiply by q^{(Σr² − ambient)/2} / Π |GL_r(F_q)|.
pub fn phi_normalize(
    a: &RealClass,
    ambient: i64,
    ranks: &[usize],
    defer_half: bool,
) -> Result<RealClass> {
    let net2: i64 = ranks.iter().map(|&r| (r * r) as i64).sum::<i64>() - ambient;
    let mut deferred = false;
    let e = if net2 % 2 != 0 {
        if !defer_half {
            return Err(Error::HalfPowerResidue);
        }
        deferred = true;
        (net2 - 1) / 2
    } else {
        net2 / 2
    };
    let q = rat(a.p as i64);
    let mut f = crate::mring::pow_rat(&q, e);
    for &r in ranks {
        f /= BigRational::from_integer(BigInt::from(gl_order(r, a.p as u64)));
    }
    let mut out = a.scale(&f);
    out.meta = Normalization {
        q_exp2: net2 - deferred as i64,
        gl_ranks: ranks.to_vec(),
        deferred_half: deferred,
    };
    Ok(out)
}

/// N_{λt} = N_t for all λ in the image of z ↦ z^k (torus-weight consistency).
pub fn is_coset_constant(cv: &CountVector, k: u32) -> bool {
    let p = cv.p as u64;
    (1..p).all(|z| {
        let l = crate::ff::pow_mod(z, k as u64, p);
        (0..p).all(|t| cv.counts[t as usize] == cv.counts[(l * t % p) as usize])
    })
}

/// Largest |τ_j(a − b)|, for reporting.
pub fn distance(a: &CycNum, b: &CycNum) -> f64 {
    a.sub(b).abs_max()
}
