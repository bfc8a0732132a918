//! Truncated power series in the symbols ê_𝐧, 𝐧 ∈ ℕ², over a λ-ring.

use crate::error::Result;
use crate::lambda::LambdaRing;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DimVector {
    pub n0: u32,
    pub n1: u32,
}

impl DimVector {
    pub const fn new(n0: u32, n1: u32) -> DimVector {
        DimVector { n0, n1 }
    }

    pub fn total(&self) -> u32 {
        self.n0 + self.n1
    }

    pub fn is_zero(&self) -> bool {
        self.total() == 0
    }

    pub fn times(&self, m: u32) -> DimVector {
        DimVector::new(self.n0 * m, self.n1 * m)
    }

    pub fn plus(&self, o: &DimVector) -> DimVector {
        DimVector::new(self.n0 + o.n0, self.n1 + o.n1)
    }

    /// `self − o` if nonnegative.
    pub fn minus(&self, o: &DimVector) -> Option<DimVector> {
        Some(DimVector::new(
            self.n0.checked_sub(o.n0)?,
            self.n1.checked_sub(o.n1)?,
        ))
    }

    /// All vectors with total degree between 1 and `d`, ordered by degree.
    pub fn up_to(d: u32) -> Vec<DimVector> {
        let mut v = Vec::new();
        for t in 1..=d {
            for n0 in (0..=t).rev() {
                v.push(DimVector::new(n0, t - n0));
            }
        }
        v
    }

    /// Largest m with self = m·v for some v, and that v.
    pub fn primitive(&self) -> (u32, DimVector) {
        let g = num_integer::gcd(self.n0, self.n1).max(1);
        (g, DimVector::new(self.n0 / g, self.n1 / g))
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n0, self.n1)
    }
}

impl std::str::FromStr for DimVector {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<DimVector> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut it = t.split(',').map(|x| x.trim().parse::<u32>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => Ok(DimVector::new(a, b)),
            _ => Err(crate::error::Error::Parse(format!(
                "dimension vector {s:?}"
            ))),
        }
    }
}

/// Σ c_𝐧 ê_𝐧 with |𝐧| ≤ trunc. `unit` carries the ring context.
#[derive(Clone, Debug)]
pub struct EvSeries<R: LambdaRing> {
    trunc: u32,
    unit: R,
    coeffs: BTreeMap<DimVector, R>,
}

impl<R: LambdaRing> EvSeries<R> {
    /// The series 1.
    pub fn one(unit: &R, trunc: u32) -> Self {
        let mut s = EvSeries::zero(unit, trunc);
        s.coeffs.insert(DimVector::new(0, 0), unit.one_like());
        s
    }

    pub fn zero(unit: &R, trunc: u32) -> Self {
        EvSeries {
            trunc,
            unit: unit.one_like(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn unit(&self) -> &R {
        &self.unit
    }

    pub fn set(&mut self, n: DimVector, c: R) {
        if n.total() > self.trunc {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, c);
        }
    }

    pub fn with(mut self, n: DimVector, c: R) -> Self {
        self.set(n, c);
        self
    }

    pub fn coeff(&self, n: DimVector) -> R {
        self.coeffs
            .get(&n)
            .cloned()
            .unwrap_or_else(|| self.unit.zero_like())
    }

    pub fn get(&self, n: DimVector) -> Option<&R> {
        self.coeffs.get(&n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DimVector, &R)> {
        self.coeffs.iter()
    }

    pub fn map<S: LambdaRing>(&self, unit: &S, f: impl Fn(&R) -> Result<S>) -> Result<EvSeries<S>> {
        let mut out = EvSeries::zero(unit, self.trunc);
        for (n, c) in &self.coeffs {
            out.set(*n, f(c)?);
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = EvSeries::zero(&self.unit, self.trunc.min(o.trunc));
        for n in self.coeffs.keys().chain(o.coeffs.keys()) {
            out.set(*n, self.coeff(*n).add(&o.coeff(*n)));
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = EvSeries::zero(&self.unit, self.trunc);
        for (n, v) in &self.coeffs {
            out.set(*n, v.scale(c));
        }
        out
    }

    /// Coefficientwise product with a ring element.
    pub fn times(&self, m: &R) -> Result<Self> {
        let mut out = EvSeries::zero(&self.unit, self.trunc);
        for (n, v) in &self.coeffs {
            out.set(*n, v.mul(m)?);
        }
        Ok(out)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let d = self.trunc.min(o.trunc);
        let mut out = EvSeries::zero(&self.unit, d);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &o.coeffs {
                let n = a.plus(b);
                if n.total() > d {
                    continue;
                }
                let prod = ca.mul(cb)?;
                let cur = out.coeff(n);
                out.set(n, cur.add(&prod));
            }
        }
        Ok(out)
    }

    pub fn constant_term(&self) -> R {
        self.coeff(DimVector::new(0, 0))
    }

    /// Sym(S) = Π_𝐯 Σ_m σ^m(c_𝐯) ê_{m𝐯}; the constant term of S is ignored.
    pub fn sym(&self) -> Result<Self> {
        let mut out = EvSeries::one(&self.unit, self.trunc);
        for (v, c) in &self.coeffs {
            if v.is_zero() {
                continue;
            }
            let mut f = EvSeries::one(&self.unit, self.trunc);
            let mut m = 1;
            while v.total() * m <= self.trunc {
                f.set(v.times(m), c.sigma(m as usize)?);
                m += 1;
            }
            out = out.mul(&f)?;
        }
        Ok(out)
    }

    /// The zero-constant-term series L with sym(L) = S.
    pub fn log_sym(&self) -> Result<Self> {
        let mut log = EvSeries::zero(&self.unit, self.trunc);
        for deg in 1..=self.trunc {
            let partial = log.sym()?;
            for n in DimVector::up_to(self.trunc)
                .into_iter()
                .filter(|n| n.total() == deg)
            {
                let c = self.coeff(n).sub(&partial.coeff(n));
                log.set(n, c);
            }
        }
        Ok(log)
    }

    /// S^m = sym(m · log_sym(S)).
    pub fn power(&self, m: &R) -> Result<Self> {
        self.log_sym()?.times(m)?.sym()
    }

    /// Equality coefficientwise up to the smaller truncation.
    pub fn eq_by(&self, o: &Self, eq: impl Fn(&R, &R) -> bool) -> bool {
        let d = self.trunc.min(o.trunc);
        let mut keys: Vec<DimVector> = self.coeffs.keys().chain(o.coeffs.keys()).copied().collect();
        keys.retain(|n| n.total() <= d);
        keys.iter().all(|n| eq(&self.coeff(*n), &o.coeff(*n)))
    }

    pub fn to_json(&self, render: impl Fn(&R) -> String) -> serde_json::Value {
        let coeffs: Vec<serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(n, c)| serde_json::json!({"n": [n.n0, n.n1], "value": render(c)}))
            .collect();
        serde_json::json!({"trunc": self.trunc, "coeffs": coeffs})
    }

    pub fn from_json(
        v: &serde_json::Value,
        unit: &R,
        parse: impl Fn(&str) -> Result<R>,
    ) -> Result<Self> {
        let bad = || crate::error::Error::Parse("series json".into());
        let trunc = v["trunc"].as_u64().ok_or_else(bad)? as u32;
        let mut out = EvSeries::zero(unit, trunc);
        for c in v["coeffs"].as_array().ok_or_else(bad)? {
            let n = c["n"].as_array().ok_or_else(bad)?;
            let n0 = n.first().and_then(|x| x.as_u64()).ok_or_else(bad)? as u32;
            let n1 = n.get(1).and_then(|x| x.as_u64()).ok_or_else(bad)? as u32;
            out.set(
                DimVector::new(n0, n1),
                parse(c["value"].as_str().ok_or_else(bad)?)?,
            );
        }
        Ok(out)
    }
}
