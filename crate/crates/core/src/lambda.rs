//! The minimal coefficient-ring contract used by the series engine.

use crate::error::Result;
use num_rational::BigRational;

/// A commutative ring with σ-operations. Constants are produced from an
/// existing element so that rings carrying context (a prime, a level count)
/// fit the same contract.
pub trait LambdaRing: Clone + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Result<Self>;
    fn scale(&self, c: &BigRational) -> Self;
    fn sigma(&self, n: usize) -> Result<Self>;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

/// Rings with Adams operations over Q, where σ is recovered by Newton's identity
/// n·σⁿ = Σ_{k=1}^{n} ψ^k · σ^{n−k}.
pub trait Adams: LambdaRing {
    fn psi(&self, k: usize) -> Result<Self>;
}

pub fn sigma_from_adams<R: Adams>(x: &R, n: usize) -> Result<R> {
    let mut s = vec![x.one_like()];
    let psis: Vec<R> = (1..=n).map(|k| x.psi(k)).collect::<Result<_>>()?;
    for m in 1..=n {
        let mut acc = x.zero_like();
        for k in 1..=m {
            acc = acc.add(&psis[k - 1].mul(&s[m - k])?);
        }
        s.push(acc.scale(&BigRational::new(1.into(), (m as i64).into())));
    }
    Ok(s.pop().unwrap())
}

/// Möbius function.
pub fn mobius(n: usize) -> i64 {
    let mut n = n;
    let mut res = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            res = -res;
        }
        d += 1;
    }
    if n > 1 {
        res = -res;
    }
    res
}
