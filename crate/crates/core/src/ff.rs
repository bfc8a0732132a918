//! Prime-field arithmetic, small dense matrices, subspace enumeration and
//! extension fields used by the counting oracle.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

/// Inverse modulo a prime. Panics on zero.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero mod {p}");
    pow_mod(a, p - 2, p)
}

pub fn neg_mod(a: u32, p: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

/// Reduce a rational number modulo p.
pub fn rat_mod(r: &BigRational, p: u32) -> Result<u32> {
    let pb = BigInt::from(p);
    let den = r.denom().mod_floor(&pb);
    if den.is_zero() {
        return Err(Error::BadPrime {
            p,
            reason: format!("{p} divides the denominator of {r}"),
        });
    }
    let num = r.numer().mod_floor(&pb).to_u64().unwrap();
    let den = den.to_u64().unwrap();
    Ok((num * inv_mod(den, p as u64) % p as u64) as u32)
}

pub fn int_mod(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

/// Dense matrix with at most 16 entries, row-major, entries reduced mod p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    pub r: usize,
    pub c: usize,
    pub a: [u32; 16],
}

impl Mat {
    pub fn zeros(r: usize, c: usize) -> Mat {
        assert!(r * c <= 16, "matrix {r}x{c} too large");
        Mat { r, c, a: [0; 16] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.a[i * n + i] = 1;
        }
        m
    }

    pub fn from_slice(r: usize, c: usize, v: &[u32]) -> Mat {
        let mut m = Mat::zeros(r, c);
        m.a[..r * c].copy_from_slice(&v[..r * c]);
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.a[i * self.c + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.a[i * self.c + j] = v;
    }

    pub fn entries(&self) -> &[u32] {
        &self.a[..self.r * self.c]
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(|&x| x == 0)
    }

    #[inline]
    pub fn mul(&self, o: &Mat, p: u32) -> Mat {
        debug_assert_eq!(self.c, o.r);
        let mut m = Mat::zeros(self.r, o.c);
        let p = p as u64;
        for i in 0..self.r {
            for j in 0..o.c {
                let mut s = 0u64;
                for k in 0..self.c {
                    s += self.a[i * self.c + k] as u64 * o.a[k * o.c + j] as u64;
                }
                m.a[i * o.c + j] = (s % p) as u32;
            }
        }
        m
    }

    pub fn add(&self, o: &Mat, p: u32) -> Mat {
        let mut m = *self;
        for i in 0..self.r * self.c {
            m.a[i] = (self.a[i] + o.a[i]) % p;
        }
        m
    }

    pub fn sub(&self, o: &Mat, p: u32) -> Mat {
        let mut m = *self;
        for i in 0..self.r * self.c {
            m.a[i] = (self.a[i] + p - o.a[i]) % p;
        }
        m
    }

    pub fn scale(&self, s: u32, p: u32) -> Mat {
        let mut m = *self;
        for i in 0..self.r * self.c {
            m.a[i] = ((self.a[i] as u64 * s as u64) % p as u64) as u32;
        }
        m
    }

    pub fn trace(&self, p: u32) -> u32 {
        let mut s = 0u64;
        for i in 0..self.r.min(self.c) {
            s += self.a[i * self.c + i] as u64;
        }
        (s % p as u64) as u32
    }

    pub fn pow(&self, e: u32, p: u32) -> Mat {
        let mut r = Mat::identity(self.r);
        for _ in 0..e {
            r = r.mul(self, p);
        }
        r
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        (0..self.r)
            .map(|i| self.a[i * self.c..(i + 1) * self.c].to_vec())
            .collect()
    }

    pub fn is_nilpotent(&self, p: u32) -> bool {
        self.pow(self.r as u32, p).is_zero()
    }
}

/// Decode a base-p index into `len` digits, least significant first.
pub fn digits(mut idx: u64, p: u32, len: usize, out: &mut [u32]) {
    for d in out.iter_mut().take(len) {
        *d = (idx % p as u64) as u32;
        idx /= p as u64;
    }
}

pub fn checked_pow(p: u32, e: usize) -> Option<u64> {
    (p as u64).checked_pow(e as u32)
}

/// Row-reduce in place; returns the rank. Rows are vectors over F_p.
pub fn row_reduce(rows: &mut Vec<Vec<u32>>, p: u32) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let pp = p as u64;
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = inv_mod(rows[rank][col] as u64, pp);
        for v in rows[rank].iter_mut() {
            *v = (*v as u64 * inv % pp) as u32;
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != 0 {
                let f = rows[i][col] as u64;
                for j in 0..ncols {
                    let sub = f * rows[rank][j] as u64 % pp;
                    rows[i][j] = ((rows[i][j] as u64 + pp - sub) % pp) as u32;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    rank
}

pub fn rank(rows: &[Vec<u32>], p: u32) -> usize {
    let mut r = rows.to_vec();
    row_reduce(&mut r, p)
}

/// Basis of the null space {x : M x = 0} where M is given by rows of length `ncols`.
pub fn kernel_basis(rows: &[Vec<u32>], ncols: usize, p: u32) -> Vec<Vec<u32>> {
    let mut r = rows.to_vec();
    let rk = row_reduce(&mut r, p);
    let mut pivots = Vec::with_capacity(rk);
    for row in &r {
        pivots.push(row.iter().position(|&x| x != 0).unwrap());
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![0u32; ncols];
        v[free] = 1;
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = neg_mod(row[free], p);
        }
        basis.push(v);
    }
    basis
}

/// All k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// All subspaces of F_p^n as reduced row-echelon bases (including 0 and the whole space).
pub fn all_subspaces(n: usize, p: u32) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    for k in 0..=n {
        for piv in combinations(n, k) {
            let mut free = Vec::new();
            for (i, &pc) in piv.iter().enumerate() {
                for j in pc + 1..n {
                    if !piv.contains(&j) {
                        free.push((i, j));
                    }
                }
            }
            let total = (p as u64).pow(free.len() as u32);
            let mut dig = vec![0u32; free.len()];
            for idx in 0..total {
                digits(idx, p, free.len(), &mut dig);
                let mut rows = vec![vec![0u32; n]; k];
                for (i, &pc) in piv.iter().enumerate() {
                    rows[i][pc] = 1;
                }
                for (f, &(i, j)) in free.iter().enumerate() {
                    rows[i][j] = dig[f];
                }
                out.push(rows);
            }
        }
    }
    out
}

/// Image of a row space under right multiplication: span{v M : v in rows}.
pub fn image_rows(rows: &[Vec<u32>], m: &Mat, p: u32) -> Vec<Vec<u32>> {
    let pp = p as u64;
    rows.iter()
        .map(|v| {
            (0..m.c)
                .map(|j| {
                    let mut s = 0u64;
                    for (i, &x) in v.iter().enumerate() {
                        s += x as u64 * m.get(i, j) as u64;
                    }
                    (s % pp) as u32
                })
                .collect()
        })
        .collect()
}

/// Coefficients (e1, e2, e3) of the characteristic polynomial of an n x n matrix, n <= 3.
/// Unused entries are zero.
pub fn charpoly_e(m: &Mat, p: u32) -> [u32; 3] {
    let pp = p as u64;
    let g = |i: usize, j: usize| m.a[i * m.c + j] as u64;
    match m.r {
        0 => [0, 0, 0],
        1 => [m.a[0], 0, 0],
        2 => {
            let e1 = (g(0, 0) + g(1, 1)) % pp;
            let e2 = (g(0, 0) * g(1, 1) + pp * pp - g(0, 1) * g(1, 0)) % pp;
            [e1 as u32, e2 as u32, 0]
        }
        3 => {
            let e1 = (g(0, 0) + g(1, 1) + g(2, 2)) % pp;
            let minor = |i: usize, j: usize| (g(i, i) * g(j, j) + pp * pp - g(i, j) * g(j, i)) % pp;
            let e2 = (minor(0, 1) + minor(0, 2) + minor(1, 2)) % pp;
            let t1 = g(0, 0) * ((g(1, 1) * g(2, 2) + pp * pp - g(1, 2) * g(2, 1)) % pp) % pp;
            let t2 = g(0, 1) * ((g(1, 0) * g(2, 2) + pp * pp - g(1, 2) * g(2, 0)) % pp) % pp;
            let t3 = g(0, 2) * ((g(1, 0) * g(2, 1) + pp * pp - g(1, 1) * g(2, 0)) % pp) % pp;
            let e3 = (t1 + pp - t2 + t3) % pp;
            [e1 as u32, e2 as u32, e3 as u32]
        }
        _ => panic!("charpoly_e supports n <= 3"),
    }
}

/// Power sum tr(M^k) from elementary symmetric functions via Newton's identities.
pub fn power_sum_from_e(e: [u32; 3], n: usize, k: usize, p: u32) -> u32 {
    let pp = p as i64;
    let ev = |i: usize| -> i64 {
        if i == 0 || i > n || i > 3 {
            0
        } else {
            e[i - 1] as i64
        }
    };
    let mut ps = vec![0i64; k + 1];
    for m in 1..=k {
        let mut s = 0i64;
        for i in 1..m {
            let sign = if (i - 1) % 2 == 0 { 1 } else { -1 };
            s = (s + sign * ev(i) * ps[m - i]).rem_euclid(pp);
        }
        let sign = if (m - 1) % 2 == 0 { 1 } else { -1 };
        s = (s + sign * (m as i64 % pp) * ev(m)).rem_euclid(pp);
        ps[m] = s;
    }
    ps[k] as u32
}

/// Conjugacy-invariant key for n <= 2; for larger n every matrix is its own class.
pub fn conj_key(m: &Mat, p: u32) -> Vec<u32> {
    match m.r {
        0 => vec![],
        1 => vec![m.a[0]],
        2 => {
            let scalar = m.get(0, 1) == 0 && m.get(1, 0) == 0 && m.get(0, 0) == m.get(1, 1);
            let e = charpoly_e(m, p);
            vec![scalar as u32, e[0], e[1]]
        }
        _ => m.entries().to_vec(),
    }
}

/// Conjugacy classes of n x n matrices (n <= 2) passing a filter, as
/// (representative, class size). For n > 2 each matrix is listed with size 1.
pub fn class_table(n: usize, p: u32, filter: impl Fn(&Mat) -> bool) -> Vec<(Mat, u64)> {
    use std::collections::BTreeMap;
    let total = checked_pow(p, n * n).expect("class table too large");
    let mut map: BTreeMap<Vec<u32>, (Mat, u64)> = BTreeMap::new();
    let mut dig = [0u32; 16];
    let mut list = Vec::new();
    for idx in 0..total {
        digits(idx, p, n * n, &mut dig);
        let m = Mat::from_slice(n, n, &dig);
        if !filter(&m) {
            continue;
        }
        if n <= 2 {
            map.entry(conj_key(&m, p)).or_insert((m, 0)).1 += 1;
        } else {
            list.push((m, 1));
        }
    }
    if n <= 2 {
        map.into_values().collect()
    } else {
        list
    }
}

/// The field F_{p^r} with a fixed irreducible modulus, for exponential sums.
#[derive(Clone, Debug)]
pub struct ExtField {
    pub p: u32,
    pub r: usize,
    /// monic modulus coefficients c_0..c_{r-1} of x^r + sum c_i x^i
    modulus: Vec<u32>,
    /// Tr(x^i) for i < r
    trace_basis: Vec<u32>,
}

impl ExtField {
    pub fn new(p: u32, r: usize) -> ExtField {
        assert!(r >= 1);
        let modulus = find_irreducible(p, r);
        let mut f = ExtField {
            p,
            r,
            modulus,
            trace_basis: vec![],
        };
        let tb = (0..r)
            .map(|i| {
                let mut e = vec![0u32; r];
                e[i] = 1;
                let mut t = 0u64;
                for j in 0..r {
                    let mut b = vec![0u32; r];
                    b[j] = 1;
                    t += f.mul(&e, &b)[j] as u64;
                }
                (t % p as u64) as u32
            })
            .collect();
        f.trace_basis = tb;
        f
    }

    pub fn size(&self) -> u64 {
        (self.p as u64).pow(self.r as u32)
    }

    pub fn element(&self, idx: u64) -> Vec<u32> {
        let mut v = vec![0u32; self.r];
        digits(idx, self.p, self.r, &mut v);
        v
    }

    pub fn from_base(&self, c: u32) -> Vec<u32> {
        let mut v = vec![0u32; self.r];
        v[0] = c % self.p;
        v
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let r = self.r;
        let mut prod = vec![0u64; 2 * r];
        for i in 0..r {
            if a[i] == 0 {
                continue;
            }
            for j in 0..r {
                prod[i + j] += a[i] as u64 * b[j] as u64;
            }
        }
        for v in prod.iter_mut() {
            *v %= p;
        }
        for d in (r..2 * r - 1).rev() {
            let top = prod[d];
            if top == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..r {
                prod[d - r + i] = (prod[d - r + i] + (p - top) * self.modulus[i] as u64) % p;
            }
        }
        prod[..r].iter().map(|&x| x as u32).collect()
    }

    pub fn pow(&self, a: &[u32], e: u32) -> Vec<u32> {
        let mut r = self.from_base(1);
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    pub fn trace(&self, a: &[u32]) -> u32 {
        let mut t = 0u64;
        for i in 0..self.r {
            t += a[i] as u64 * self.trace_basis[i] as u64;
        }
        (t % self.p as u64) as u32
    }
}

fn poly_rem_is_zero(f: &[u32], g: &[u32], p: u32) -> bool {
    // f, g coefficient vectors low-to-high, g monic
    let mut r: Vec<u64> = f.iter().map(|&x| x as u64).collect();
    let pp = p as u64;
    let dg = g.len() - 1;
    if r.len() < g.len() {
        return r.iter().all(|&x| x == 0);
    }
    for d in (dg..r.len()).rev() {
        let c = r[d] % pp;
        if c == 0 {
            continue;
        }
        for i in 0..=dg {
            r[d - dg + i] = (r[d - dg + i] + (pp - c) * g[i] as u64) % pp;
        }
    }
    r[..dg].iter().all(|&x| x % pp == 0)
}

fn find_irreducible(p: u32, r: usize) -> Vec<u32> {
    if r == 1 {
        return vec![0];
    }
    let total = (p as u64).pow(r as u32);
    let mut low = vec![0u32; r];
    'cand: for idx in 0..total {
        digits(idx, p, r, &mut low);
        if low[0] == 0 {
            continue;
        }
        let mut f = low.clone();
        f.push(1);
        for deg in 1..=r / 2 {
            let cnt = (p as u64).pow(deg as u32);
            let mut g = vec![0u32; deg];
            for gi in 0..cnt {
                digits(gi, p, deg, &mut g);
                let mut gm = g.clone();
                gm.push(1);
                if poly_rem_is_zero(&f, &gm, p) {
                    continue 'cand;
                }
            }
        }
        return low;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Absolute value of a rational as f64 (for bounds only).
pub fn rat_abs_f64(r: &BigRational) -> f64 {
    r.abs().to_f64().unwrap_or(f64::INFINITY)
}
