//! Exhaustive counting over prime fields: fiber counts of tr(W), the Kronecker
//! locus, one-loop and commuting-matrix counts, polynomial interpolation.

use crate::error::{Error, Result};
use crate::ff::{
    charpoly_e, checked_pow, class_table, digits, is_prime, kernel_basis, power_sum_from_e, rank,
    rat_mod, Mat,
};
use crate::quiver::{ncderiv, Potential, Quiver, Rep};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Enumeration budget in states.
pub const STATE_LIMIT: f64 = 1.0e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    All,
    Nilpotent,
}

impl std::str::FromStr for Sector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Sector> {
        match s {
            "all" => Ok(Sector::All),
            "nilpotent" | "nilp" => Ok(Sector::Nilpotent),
            _ => Err(Error::Config(format!("unknown sector {s:?}"))),
        }
    }
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sector::All => "all",
            Sector::Nilpotent => "nilpotent",
        })
    }
}

/// t ↦ number of points with value t.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountVector {
    pub p: u32,
    pub counts: Vec<u128>,
}

impl CountVector {
    pub fn zero(p: u32) -> CountVector {
        CountVector {
            p,
            counts: vec![0; p as usize],
        }
    }

    pub fn delta(p: u32, c: u128) -> CountVector {
        let mut v = CountVector::zero(p);
        v.counts[0] = c;
        v
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    pub fn add(&self, o: &CountVector) -> CountVector {
        assert_eq!(self.p, o.p);
        CountVector {
            p: self.p,
            counts: self
                .counts
                .iter()
                .zip(&o.counts)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: u128) -> CountVector {
        CountVector {
            p: self.p,
            counts: self
                .counts
                .iter()
                .map(|a| a.checked_mul(s).expect("count overflow"))
                .collect(),
        }
    }

    pub fn convolve(&self, o: &CountVector) -> CountVector {
        assert_eq!(self.p, o.p);
        let p = self.p as usize;
        let mut out = vec![0u128; p];
        for (i, a) in self.counts.iter().enumerate() {
            for (j, b) in o.counts.iter().enumerate() {
                out[(i + j) % p] += a * b;
            }
        }
        CountVector {
            p: self.p,
            counts: out,
        }
    }

    /// Equality modulo constant vectors.
    pub fn eq_mod_const(&self, o: &CountVector) -> bool {
        if self.p != o.p {
            return false;
        }
        let d0 = self.counts[0] as i128 - o.counts[0] as i128;
        self.counts
            .iter()
            .zip(&o.counts)
            .all(|(a, b)| *a as i128 - *b as i128 == d0)
    }

    pub fn to_csv(&self) -> String {
        self.counts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv(p: u32, s: &str) -> Result<CountVector> {
        let counts: Vec<u128> = s
            .trim()
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u128>()
                    .map_err(|_| Error::Parse(format!("count {x:?}")))
            })
            .collect::<Result<_>>()?;
        if counts.len() != p as usize {
            return Err(Error::Parse(format!(
                "expected {p} counts, got {}",
                counts.len()
            )));
        }
        Ok(CountVector { p, counts })
    }
}

pub fn pow_u128(p: u32, e: usize) -> u128 {
    (p as u128).checked_pow(e as u32).expect("count overflow")
}

fn check_size(p: u32, entries: usize) -> Result<u64> {
    let est = (p as f64).powi(entries as i32);
    if est > STATE_LIMIT {
        return Err(Error::SizeLimit {
            estimate: est,
            limit: STATE_LIMIT,
        });
    }
    Ok(checked_pow(p, entries).unwrap())
}

pub fn check_prime(p: u32) -> Result<()> {
    if !is_prime(p as u64) {
        return Err(Error::BadPrime {
            p,
            reason: "not prime".into(),
        });
    }
    Ok(())
}

/// A potential with words resolved to arrow indices and coefficients reduced mod p.
#[derive(Clone, Debug)]
pub struct CompiledPotential {
    pub terms: Vec<(u32, Vec<usize>)>,
}

impl CompiledPotential {
    pub fn new(q: &Quiver, w: &Potential, p: u32) -> Result<CompiledPotential> {
        let mut terms = Vec::new();
        for (word, c) in w.terms() {
            terms.push((rat_mod(c, p)?, q.word_indices(word)?));
        }
        Ok(CompiledPotential { terms })
    }

    pub fn trace(&self, rep: &Rep, q: &Quiver, p: u32) -> u32 {
        let mut s = 0u64;
        for (c, idx) in &self.terms {
            if *c == 0 {
                continue;
            }
            s += *c as u64 * rep.path(q, idx, p).trace(p) as u64;
        }
        (s % p as u64) as u32
    }
}

/// Decode an index into matrices for the given arrows, other arrows untouched.
fn fill(rep: &mut Rep, q: &Quiver, arrows: &[usize], idx: u64, p: u32, buf: &mut [u32]) {
    let total: usize = arrows
        .iter()
        .map(|&a| rep.dims[q.arrows[a].src] * rep.dims[q.arrows[a].tgt])
        .sum();
    digits(idx, p, total, buf);
    let mut off = 0;
    for &a in arrows {
        let (r, c) = (rep.dims[q.arrows[a].src], rep.dims[q.arrows[a].tgt]);
        rep.mats[a] = Mat::from_slice(r, c, &buf[off..off + r * c]);
        off += r * c;
    }
}

fn entries(q: &Quiver, dims: &[usize], arrows: &[usize]) -> usize {
    arrows
        .iter()
        .map(|&a| dims[q.arrows[a].src] * dims[q.arrows[a].tgt])
        .sum()
}

/// Parallel histogram over all assignments of `arrows`, adding `weight(rep)` at
/// `value(rep)` when `value` returns Some.
pub fn enumerate<F>(q: &Quiver, dims: &[usize], p: u32, arrows: &[usize], f: F) -> Result<Vec<u128>>
where
    F: Fn(&Rep) -> Option<(u32, u128)> + Sync,
{
    let n = entries(q, dims, arrows);
    let total = check_size(p, n)?;
    let chunks = 256u64.min(total.max(1));
    let per = total.div_ceil(chunks);
    let parts: Vec<Vec<u128>> = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut hist = vec![0u128; p as usize];
            let mut rep = Rep::zero(q, dims);
            let mut buf = vec![0u32; n.max(1)];
            let lo = ch * per;
            let hi = ((ch + 1) * per).min(total);
            for idx in lo..hi {
                fill(&mut rep, q, arrows, idx, p, &mut buf);
                if let Some((t, w)) = f(&rep) {
                    hist[t as usize] += w;
                }
            }
            hist
        })
        .collect();
    let mut out = vec![0u128; p as usize];
    for h in parts {
        for (o, x) in out.iter_mut().zip(h) {
            *o += x;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Route {
    Naive,
    /// Integrate out the named arrows, which must each occur at most once per word.
    Eliminate(Vec<char>),
    Auto,
}

/// Arrows of `s` that can be integrated out jointly: no word contains two of them.
pub fn eliminable(w: &Potential, s: &[char]) -> bool {
    w.terms()
        .all(|(word, _)| word.chars().filter(|c| s.contains(c)).count() <= 1)
}

/// N_t = #{reps in the sector with tr W = t}.
pub fn fiber_counts(
    q: &Quiver,
    w: &Potential,
    dims: &[usize],
    p: u32,
    sector: Sector,
    route: Route,
) -> Result<CountVector> {
    check_prime(p)?;
    let cw = CompiledPotential::new(q, w, p)?;
    let all: Vec<usize> = (0..q.arrows.len()).collect();
    let route = match route {
        Route::Auto => auto_route(q, w, dims, sector),
        r => r,
    };
    match route {
        Route::Naive => {
            let counts = enumerate(q, dims, p, &all, |rep| {
                if sector == Sector::Nilpotent && !rep.is_nilpotent(q, p) {
                    return None;
                }
                Some((cw.trace(rep, q, p), 1))
            })?;
            Ok(CountVector { p, counts })
        }
        Route::Eliminate(s) => {
            if !eliminable(w, &s) {
                return Err(Error::Unsupported(format!(
                    "arrows {s:?} are not jointly linear"
                )));
            }
            let s_idx: Vec<usize> = s
                .iter()
                .map(|&c| q.arrow(c).expect("unknown arrow"))
                .collect();
            let s_entries = entries(q, dims, &s_idx);
            if sector == Sector::Nilpotent && s_entries > 0 {
                return Err(Error::Unsupported(
                    "elimination changes the nilpotent sector".into(),
                ));
            }
            eliminate(q, w, dims, p, &s_idx, sector, true)
        }
        Route::Auto => unreachable!(),
    }
}

fn auto_route(q: &Quiver, w: &Potential, dims: &[usize], sector: Sector) -> Route {
    if sector == Sector::Nilpotent {
        return Route::Naive;
    }
    // largest jointly linear set among arrows that are not loops
    let mut best: (usize, Vec<char>) = (0, vec![]);
    let names: Vec<char> = q.arrows.iter().map(|a| a.name).collect();
    for mask in 1u32..(1 << names.len()) {
        let s: Vec<char> = names
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, c)| *c)
            .collect();
        if !eliminable(w, &s)
            || s.iter()
                .any(|c| w.terms().any(|(word, _)| word.matches(*c).count() > 1))
        {
            continue;
        }
        let idx: Vec<usize> = s.iter().map(|&c| q.arrow(c).unwrap()).collect();
        let e = entries(q, dims, &idx);
        if e > best.0 {
            best = (e, s);
        }
    }
    if best.0 == 0 {
        Route::Naive
    } else {
        Route::Eliminate(best.1)
    }
}

/// Sum over assignments of the non-eliminated arrows. When every ∂_E W (E eliminated)
/// acts as zero, the eliminated arrows contribute p^{entries} at the remaining value;
/// otherwise tr W is a nonconstant affine function of them and spreads uniformly.
/// With `uniform = false` the spread part is dropped, giving p^{entries}·[locus → tr(W∖S)].
pub fn eliminate(
    q: &Quiver,
    w: &Potential,
    dims: &[usize],
    p: u32,
    s_idx: &[usize],
    sector: Sector,
    uniform: bool,
) -> Result<CountVector> {
    let s_names: Vec<char> = s_idx.iter().map(|&i| q.arrows[i].name).collect();
    let mut rest_w = Potential::zero();
    for (word, c) in w.terms() {
        if !word.chars().any(|ch| s_names.contains(&ch)) {
            rest_w.add_term(c.clone(), word);
        }
    }
    let cw = CompiledPotential::new(q, &rest_w, p)?;
    let derivs: Vec<(usize, Vec<(u32, Vec<usize>)>)> = s_idx
        .iter()
        .map(|&i| {
            let d = ncderiv(w, q.arrows[i].name);
            let terms = d
                .iter()
                .map(|(word, c)| Ok((rat_mod(c, p)?, q.word_indices(word)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((i, terms))
        })
        .collect::<Result<_>>()?;
    let keep: Vec<usize> = (0..q.arrows.len()).filter(|i| !s_idx.contains(i)).collect();
    let s_entries = entries(q, dims, s_idx);
    let full = pow_u128(p, s_entries);
    let spread = if s_entries > 0 {
        pow_u128(p, s_entries - 1)
    } else {
        0
    };
    let counts = enumerate(q, dims, p, &keep, |rep| {
        if sector == Sector::Nilpotent && !rep.is_nilpotent(q, p) {
            return None;
        }
        let linear = derivs.iter().any(|(e, terms)| {
            let a = &q.arrows[*e];
            let (r, c) = (dims[a.tgt], dims[a.src]);
            if r * c == 0 {
                return false;
            }
            let mut acc = Mat::zeros(r, c);
            for (coef, idx) in terms {
                if *coef == 0 {
                    continue;
                }
                acc = acc.add(&rep.path(q, idx, p).scale(*coef, p), p);
            }
            !acc.is_zero()
        });
        if linear {
            None
        } else {
            Some((cw.trace(rep, q, p), 1))
        }
    });
    let hist = counts?;
    let mut out = CountVector {
        p,
        counts: hist.iter().map(|&h| h * full).collect(),
    };
    if uniform && s_entries > 0 {
        let on_locus: u128 = hist.iter().sum();
        // the nilpotent sector never reaches here with s_entries > 0
        let off = pow_u128(p, entries(q, dims, &keep)) - on_locus;
        for c in out.counts.iter_mut() {
            *c += off * spread;
        }
    }
    Ok(out)
}

/// A ↦ XA − AY on n0×n1 matrices (row-vector convention: M(X)M(A) − M(A)M(Y)); kernel dimension.
pub fn sylvester_kernel_dim(x: &Mat, y: &Mat, p: u32) -> usize {
    let (n0, n1) = (x.r, y.r);
    let n = n0 * n1;
    if n == 0 {
        return 0;
    }
    let mut rows = vec![vec![0u32; n]; n];
    // column k of the operator = image of the k-th unit matrix
    for k in 0..n {
        let mut a = Mat::zeros(n0, n1);
        a.a[k] = 1;
        let img = x.mul(&a, p).sub(&a.mul(y, p), p);
        for (i, row) in rows.iter_mut().enumerate() {
            row[k] = img.a[i];
        }
    }
    n - rank(&rows, p)
}

fn matrices(n: usize, p: u32, filter: impl Fn(&Mat) -> bool) -> Vec<(Mat, u64)> {
    if n <= 2 {
        class_table(n, p, filter)
    } else {
        let total = checked_pow(p, n * n).unwrap();
        let mut dig = [0u32; 16];
        (0..total)
            .filter_map(|i| {
                digits(i, p, n * n, &mut dig);
                let m = Mat::from_slice(n, n, &dig);
                filter(&m).then_some((m, 1))
            })
            .collect()
    }
}

fn value_xy(x: &Mat, y: &Mat, d: u32, p: u32) -> Result<u32> {
    let inv = rat_mod(&BigRational::new(1.into(), (d as i64 + 1).into()), p)?;
    let tx = if x.r > 0 { x.pow(d + 1, p).trace(p) } else { 0 };
    let ty = if y.r > 0 { y.pow(d + 1, p).trace(p) } else { 0 };
    Ok(((tx + p - ty) as u64 * inv as u64 % p as u64) as u32)
}

/// Fiber counts of tr(X^{d+1} − Y^{d+1})/(d+1) on {AX = YA, BX = YB}.
pub fn kron_locus_counts(
    d: u32,
    n0: usize,
    n1: usize,
    p: u32,
    nilpotent_xy: bool,
) -> Result<CountVector> {
    check_prime(p)?;
    rat_mod(&BigRational::new(1.into(), (d as i64 + 1).into()), p)?;
    let est = (p as f64).powi((n0 * n0 + n1 * n1) as i32);
    if n0.max(n1) > 2 && est > STATE_LIMIT / 10.0 {
        return Err(Error::SizeLimit {
            estimate: est,
            limit: STATE_LIMIT / 10.0,
        });
    }
    let filt = |m: &Mat| !nilpotent_xy || m.is_nilpotent(p);
    let xs = matrices(n0, p, filt);
    let ys = matrices(n1, p, filt);
    let parts: Vec<Vec<u128>> = xs
        .par_iter()
        .map(|(x, cx)| {
            let mut h = vec![0u128; p as usize];
            for (y, cy) in &ys {
                let k = sylvester_kernel_dim(x, y, p);
                let t = value_xy(x, y, d, p).unwrap();
                h[t as usize] += *cx as u128 * *cy as u128 * pow_u128(p, 2 * k);
            }
            h
        })
        .collect();
    let mut out = CountVector::zero(p);
    for h in parts {
        out = out.add(&CountVector { p, counts: h });
    }
    Ok(out)
}

/// Histogram of characteristic polynomials of n×n matrices (n ≤ 3): (e1, e2, e3) ↦ count,
/// where the polynomial is x^n − e1·x^{n−1} + e2·x^{n−2} − e3.
/// For f = Π g_i^{m_i} the class has |GL_n(q)|·Π q_i^{m_i² − m_i}/|GL_{m_i}(q_i)| elements, q_i = q^{deg g_i}.
pub fn charpoly_histogram(n: usize, p: u32) -> Result<std::collections::BTreeMap<[u32; 3], u128>> {
    assert!(n <= 3);
    check_prime(p)?;
    let pp = p as u64;
    let mut out = std::collections::BTreeMap::new();
    let total = checked_pow(p, n).unwrap();
    let mut e = [0u32; 3];
    for idx in 0..total {
        let mut dig = [0u32; 3];
        digits(idx, p, n, &mut dig);
        e[..n].copy_from_slice(&dig[..n]);
        // coefficients low to high of the monic polynomial
        let mut c: Vec<u64> = vec![0; n + 1];
        c[n] = 1;
        for k in 1..=n {
            let v = e[k - 1] as u64 % pp;
            c[n - k] = if k % 2 == 1 { (pp - v) % pp } else { v };
        }
        let mut roots: std::collections::BTreeMap<u64, u32> = std::collections::BTreeMap::new();
        let mut r = 0;
        while r < pp && c.len() > 1 {
            let eval = c.iter().rev().fold(0, |acc, &x| (acc * r + x) % pp);
            if eval == 0 {
                // synthetic division by (x − r)
                let deg = c.len() - 1;
                let mut q = vec![0u64; deg];
                let mut carry = 0;
                for i in (0..deg).rev() {
                    carry = (c[i + 1] + carry * r) % pp;
                    q[i] = carry;
                }
                c = q;
                *roots.entry(r).or_insert(0) += 1;
            } else {
                r += 1;
            }
        }
        let mut count = gl_order(n, pp);
        let mut den: u128 = 1;
        for &m in roots.values() {
            count *= (pp as u128).pow(m * m - m);
            den *= gl_order(m as usize, pp);
        }
        let rest = c.len() - 1;
        if rest > 0 {
            den *= gl_order(1, pp.pow(rest as u32));
        }
        *out.entry(e).or_insert(0) += count / den;
    }
    Ok(out)
}

/// Brute-force version of `charpoly_histogram`.
pub fn charpoly_histogram_brute(
    n: usize,
    p: u32,
) -> Result<std::collections::BTreeMap<[u32; 3], u128>> {
    assert!(n <= 3);
    let total = check_size(p, n * n)?;
    let chunks = 256u64.min(total.max(1));
    let per = total.div_ceil(chunks);
    let parts: Vec<std::collections::BTreeMap<[u32; 3], u128>> = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut h = std::collections::BTreeMap::new();
            let mut dig = [0u32; 16];
            for idx in ch * per..((ch + 1) * per).min(total) {
                digits(idx, p, n * n, &mut dig);
                let m = Mat::from_slice(n, n, &dig);
                *h.entry(charpoly_e(&m, p)).or_insert(0) += 1;
            }
            h
        })
        .collect();
    let mut out = std::collections::BTreeMap::new();
    for h in parts {
        for (k, v) in h {
            *out.entry(k).or_insert(0) += v;
        }
    }
    Ok(out)
}

/// Fiber counts of c·tr(M^{k}) over all n×n matrices, c given as a rational.
pub fn power_trace_counts(n: usize, k: u32, c: &BigRational, p: u32) -> Result<CountVector> {
    check_prime(p)?;
    let cm = rat_mod(c, p)?;
    if n == 0 {
        return Ok(CountVector::delta(p, 1));
    }
    let hist = charpoly_histogram(n, p)?;
    let mut out = CountVector::zero(p);
    for (e, cnt) in hist {
        let t = power_sum_from_e(e, n, k as usize, p) as u64 * cm as u64 % p as u64;
        out.counts[t as usize] += cnt;
    }
    Ok(out)
}

/// Fiber counts of tr(X^{d+1})/(d+1) on a×a matrices.
pub fn one_loop_counts(d: u32, a: usize, p: u32) -> Result<CountVector> {
    power_trace_counts(
        a,
        d + 1,
        &BigRational::new(1.into(), (d as i64 + 1).into()),
        p,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutingFlags {
    BothFree,
    FirstNilpotent,
    BothNilpotent,
}

/// Pairs of commuting n×n matrices, grouped by the class of the first.
pub fn commuting_counts(n: usize, p: u32, flags: CommutingFlags) -> Result<u128> {
    check_prime(p)?;
    if n == 0 {
        return Ok(1);
    }
    let est = (p as f64).powi((n * n) as i32);
    if est > STATE_LIMIT / 100.0 {
        return Err(Error::SizeLimit {
            estimate: est,
            limit: STATE_LIMIT / 100.0,
        });
    }
    let first_nilp = flags != CommutingFlags::BothFree;
    let xs = matrices(n, p, |m| !first_nilp || m.is_nilpotent(p));
    let total: u128 = xs
        .par_iter()
        .map(|(x, cx)| {
            let basis = centralizer_basis(x, p);
            let c = if flags == CommutingFlags::BothNilpotent {
                count_nilpotent_in_span(&basis, n, p)
            } else {
                pow_u128(p, basis.len())
            };
            *cx as u128 * c
        })
        .sum();
    Ok(total)
}

fn centralizer_basis(x: &Mat, p: u32) -> Vec<Vec<u32>> {
    let n = x.r;
    let nn = n * n;
    let mut rows = vec![vec![0u32; nn]; nn];
    for k in 0..nn {
        let mut y = Mat::zeros(n, n);
        y.a[k] = 1;
        let img = x.mul(&y, p).sub(&y.mul(x, p), p);
        for (i, row) in rows.iter_mut().enumerate() {
            row[k] = img.a[i];
        }
    }
    kernel_basis(&rows, nn, p)
}

fn count_nilpotent_in_span(basis: &[Vec<u32>], n: usize, p: u32) -> u128 {
    let k = basis.len();
    let total = checked_pow(p, k).unwrap();
    let mut dig = vec![0u32; k.max(1)];
    let mut cnt = 0u128;
    for idx in 0..total {
        digits(idx, p, k, &mut dig);
        let mut m = Mat::zeros(n, n);
        for (c, b) in dig.iter().zip(basis) {
            if *c == 0 {
                continue;
            }
            let bm = Mat::from_slice(n, n, b);
            m = m.add(&bm.scale(*c, p), p);
        }
        if m.is_nilpotent(p) {
            cnt += 1;
        }
    }
    cnt
}

pub fn gl_order(n: usize, q: u64) -> u128 {
    let qn = (q as u128).pow(n as u32);
    (0..n).map(|i| qn - (q as u128).pow(i as u32)).product()
}

/// Integer-coefficient polynomial through (p, f(p)) for the first degree+1 primes,
/// checked at the remaining ones. Coefficients low to high.
pub fn poly_interpolate_counts(
    counter: impl Fn(u32) -> Result<BigInt>,
    degree: usize,
    primes: &[u32],
) -> Result<Vec<BigRational>> {
    if primes.len() < degree + 2 {
        return Err(Error::Config(format!(
            "need at least {} primes, got {}",
            degree + 2,
            primes.len()
        )));
    }
    let vals: Vec<(BigRational, BigRational)> = primes
        .iter()
        .map(|&p| {
            Ok((
                BigRational::from_integer(p.into()),
                BigRational::from_integer(counter(p)?),
            ))
        })
        .collect::<Result<_>>()?;
    let (fit, check) = vals.split_at(degree + 1);
    let mut coeffs = vec![BigRational::zero(); degree + 1];
    for (i, (xi, yi)) in fit.iter().enumerate() {
        // Lagrange basis polynomial for xi
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for (j, (xj, _)) in fit.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] += b.clone();
                next[k] -= b * xj;
            }
            basis = next;
            denom *= xi - xj;
        }
        for (k, b) in basis.iter().enumerate() {
            coeffs[k] += b * yi / &denom;
        }
    }
    for (x, y) in check {
        if eval_poly(&coeffs, x) != *y {
            return Err(Error::NotPolynomial {
                p: x.to_integer().try_into().unwrap_or(0),
            });
        }
    }
    while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
        coeffs.pop();
    }
    Ok(coeffs)
}

pub fn eval_poly(c: &[BigRational], x: &BigRational) -> BigRational {
    c.iter()
        .rev()
        .fold(BigRational::zero(), |acc, a| acc * x + a)
}

/// Is (A, B) a semistable Kronecker module for a stability with arg γ(0,1) < arg γ(1,0)?
/// Destabilizing subobjects are generated by U₀ ⊂ V₀ with U₁ = U₀A + U₀B.
pub fn kronecker_semistable(
    a: &Mat,
    b: &Mat,
    g: &crate::quiver::Stability,
    p: u32,
    subs0: &[Vec<Vec<u32>>],
) -> bool {
    use crate::series::DimVector;
    let n = DimVector::new(a.r as u32, a.c as u32);
    for u in subs0 {
        if u.is_empty() {
            continue;
        }
        let mut img = crate::ff::image_rows(u, a, p);
        img.extend(crate::ff::image_rows(u, b, p));
        let m1 = if a.c == 0 { 0 } else { rank(&img, p) };
        let m = DimVector::new(u.len() as u32, m1 as u32);
        if crate::quiver::slope_less(g, &n, &m) {
            return false;
        }
    }
    true
}

/// Fiber counts of tr(X^{d+1} − Y^{d+1})/(d+1) on the Kronecker locus restricted to
/// semistable (A, B).
pub fn kron_semistable_counts(
    d: u32,
    n0: usize,
    n1: usize,
    p: u32,
    g: &crate::quiver::Stability,
) -> Result<CountVector> {
    check_prime(p)?;
    rat_mod(&BigRational::new(1.into(), (d as i64 + 1).into()), p)?;
    let subs0 = crate::ff::all_subspaces(n0, p);
    let xs = matrices(n0, p, |_| true);
    let ys = matrices(n1, p, |_| true);
    let est = xs.len() as f64 * ys.len() as f64 * (p as f64).powi((2 * n0 * n1) as i32);
    if est > STATE_LIMIT {
        return Err(Error::SizeLimit {
            estimate: est,
            limit: STATE_LIMIT,
        });
    }
    let parts: Vec<Vec<u128>> = xs
        .par_iter()
        .map(|(x, cx)| {
            let mut h = vec![0u128; p as usize];
            for (y, cy) in &ys {
                let t = value_xy(x, y, d, p).unwrap() as usize;
                let ker = sylvester_basis(x, y, p);
                let k = ker.len();
                let total = checked_pow(p, 2 * k).unwrap();
                let mut dig = vec![0u32; (2 * k).max(1)];
                let mut cnt = 0u128;
                for idx in 0..total {
                    digits(idx, p, 2 * k, &mut dig);
                    let a = combine(&ker, &dig[..k], n0, n1, p);
                    let b = combine(&ker, &dig[k..2 * k], n0, n1, p);
                    if kronecker_semistable(&a, &b, g, p, &subs0) {
                        cnt += 1;
                    }
                }
                h[t] += *cx as u128 * *cy as u128 * cnt;
            }
            h
        })
        .collect();
    let mut out = CountVector::zero(p);
    for h in parts {
        out = out.add(&CountVector { p, counts: h });
    }
    Ok(out)
}

fn sylvester_basis(x: &Mat, y: &Mat, p: u32) -> Vec<Vec<u32>> {
    let (n0, n1) = (x.r, y.r);
    let n = n0 * n1;
    if n == 0 {
        return vec![];
    }
    let mut rows = vec![vec![0u32; n]; n];
    for k in 0..n {
        let mut a = Mat::zeros(n0, n1);
        a.a[k] = 1;
        let img = x.mul(&a, p).sub(&a.mul(y, p), p);
        for (i, row) in rows.iter_mut().enumerate() {
            row[k] = img.a[i];
        }
    }
    kernel_basis(&rows, n, p)
}

fn combine(basis: &[Vec<u32>], coeffs: &[u32], r: usize, c: usize, p: u32) -> Mat {
    let mut m = Mat::zeros(r, c);
    for (k, b) in coeffs.iter().zip(basis) {
        if *k == 0 {
            continue;
        }
        m = m.add(&Mat::from_slice(r, c, b).scale(*k, p), p);
    }
    m
}
