//! Quivers, cyclic potentials, noncommutative derivatives and slope stability.
//!
//! Words are written in composition order: the word e₁e₂…e_L means e_L first, so
//! with matrices acting on row vectors its path matrix is M(e_L)·…·M(e₁). Each
//! arrow matrix has shape n(source) × n(target).

use crate::error::{Error, Result};
use crate::ff::{all_subspaces, image_rows, rank, Mat};
use crate::series::DimVector;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: char,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    pub vertices: usize,
    pub arrows: Vec<Arrow>,
}

impl Quiver {
    pub fn new(vertices: usize, arrows: &[(char, usize, usize)]) -> Quiver {
        let arrows: Vec<Arrow> = arrows
            .iter()
            .map(|&(name, src, tgt)| Arrow { name, src, tgt })
            .collect();
        let names: BTreeSet<char> = arrows.iter().map(|a| a.name).collect();
        assert_eq!(names.len(), arrows.len(), "arrow names must be unique");
        Quiver { vertices, arrows }
    }

    pub fn arrow(&self, name: char) -> Option<usize> {
        self.arrows.iter().position(|a| a.name == name)
    }

    /// Arrow indices of a word, checked to form a path.
    pub fn word_indices(&self, w: &str) -> Result<Vec<usize>> {
        let idx: Vec<usize> = w
            .chars()
            .map(|c| {
                self.arrow(c)
                    .ok_or_else(|| Error::Parse(format!("unknown arrow {c} in {w}")))
            })
            .collect::<Result<_>>()?;
        for pair in idx.windows(2) {
            if self.arrows[pair[1]].tgt != self.arrows[pair[0]].src {
                return Err(Error::Parse(format!("{w} is not a path")));
            }
        }
        Ok(idx)
    }

    pub fn is_cycle(&self, w: &str) -> bool {
        match self.word_indices(w) {
            Ok(idx) if !idx.is_empty() => {
                self.arrows[idx[0]].tgt == self.arrows[*idx.last().unwrap()].src
            }
            _ => false,
        }
    }

    /// Σ_a n(s(a))·n(t(a)).
    pub fn rep_dim(&self, dims: &[usize]) -> usize {
        self.arrows.iter().map(|a| dims[a.src] * dims[a.tgt]).sum()
    }

    /// Euler form χ(m, n) = Σ_i m_i n_i − Σ_a m_{s(a)} n_{t(a)}.
    pub fn euler_form(&self, m: &[usize], n: &[usize]) -> i64 {
        let v: i64 = (0..self.vertices).map(|i| (m[i] * n[i]) as i64).sum();
        v - self
            .arrows
            .iter()
            .map(|a| (m[a.src] * n[a.tgt]) as i64)
            .sum::<i64>()
    }
}

/// Lexicographically minimal rotation.
pub fn canonical_rotation(w: &str) -> String {
    let c: Vec<char> = w.chars().collect();
    (0..c.len().max(1))
        .map(|i| c[i..].iter().chain(c[..i].iter()).collect::<String>())
        .min()
        .unwrap_or_default()
}

/// Linear combination of cyclic words, stored by canonical rotation.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Potential {
    terms: BTreeMap<String, BigRational>,
}

impl Potential {
    pub fn zero() -> Potential {
        Potential::default()
    }

    pub fn from_terms(terms: &[(BigRational, &str)]) -> Potential {
        let mut p = Potential::zero();
        for (c, w) in terms {
            p.add_term(c.clone(), w);
        }
        p
    }

    pub fn add_term(&mut self, c: BigRational, w: &str) {
        let k = canonical_rotation(w);
        let e = self
            .terms
            .entry(k.clone())
            .or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&String, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &str) -> BigRational {
        self.terms
            .get(&canonical_rotation(w))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Potential) -> Potential {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(c.clone(), w);
        }
        r
    }

    pub fn scale(&self, s: &BigRational) -> Potential {
        let mut r = Potential::zero();
        for (w, c) in &self.terms {
            r.add_term(c * s, w);
        }
        r
    }

    pub fn sub(&self, o: &Potential) -> Potential {
        self.add(&o.scale(&-BigRational::one()))
    }

    /// Every word closes up in `q`.
    pub fn check(&self, q: &Quiver) -> Result<()> {
        for w in self.terms.keys() {
            if !q.is_cycle(w) {
                return Err(Error::Parse(format!("{w} is not a cycle")));
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(w, c)| format!("{c}*{w}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn parse(s: &str) -> Result<Potential> {
        let s = s.trim();
        let mut p = Potential::zero();
        if s == "0" {
            return Ok(p);
        }
        for part in s.split(" + ") {
            let (c, w) = part
                .trim()
                .split_once('*')
                .ok_or_else(|| Error::Parse(format!("potential term {part:?}")))?;
            let c: BigRational = c
                .parse()
                .map_err(|_| Error::Parse(format!("coefficient {c:?}")))?;
            if w.is_empty() || !w.chars().all(|x| x.is_ascii_alphabetic()) {
                return Err(Error::Parse(format!("word {w:?}")));
            }
            p.add_term(c, w);
        }
        Ok(p)
    }
}

/// Linear combination of (not necessarily cyclic) path words.
pub type PathSum = BTreeMap<String, BigRational>;

fn push_path(s: &mut PathSum, w: String, c: BigRational) {
    let e = s.entry(w.clone()).or_insert_with(BigRational::zero);
    *e += c;
    if e.is_zero() {
        s.remove(&w);
    }
}

/// ∂W/∂E: for every occurrence of E, the word read cyclically from just after E
/// back to just before it.
pub fn ncderiv(w: &Potential, e: char) -> PathSum {
    let mut out = PathSum::new();
    for (word, c) in w.terms() {
        let ch: Vec<char> = word.chars().collect();
        for i in 0..ch.len() {
            if ch[i] == e {
                let rest: String = ch[i + 1..].iter().chain(ch[..i].iter()).collect();
                push_path(&mut out, rest, c.clone());
            }
        }
    }
    out
}

fn frac(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn pow_word(c: char, n: usize) -> String {
    std::iter::repeat(c).take(n).collect()
}

/// Q₋₂: A,B: 0→1; C,D: 1→0; X loop at 0; Y loop at 1.
pub fn minus2_quiver() -> Quiver {
    Quiver::new(
        2,
        &[
            ('A', 0, 1),
            ('B', 0, 1),
            ('C', 1, 0),
            ('D', 1, 0),
            ('X', 0, 0),
            ('Y', 1, 1),
        ],
    )
}

/// W_d = X^{d+1}/(d+1) − Y^{d+1}/(d+1) − XCA + XDB + YAC − YBD.
pub fn build_minus2(d: u32) -> (Quiver, Potential) {
    assert!(d >= 1);
    let k = d as i64 + 1;
    let w = Potential::from_terms(&[
        (frac(1, k), &pow_word('X', k as usize)),
        (frac(-1, k), &pow_word('Y', k as usize)),
        (frac(-1, 1), "XCA"),
        (frac(1, 1), "XDB"),
        (frac(1, 1), "YAC"),
        (frac(-1, 1), "YBD"),
    ]);
    (minus2_quiver(), w)
}

/// Q₋₂ without loops, W = ACBD − ADBC.
pub fn build_conifold() -> (Quiver, Potential) {
    let q = Quiver::new(2, &[('A', 0, 1), ('B', 0, 1), ('C', 1, 0), ('D', 1, 0)]);
    let w = Potential::from_terms(&[(frac(1, 1), "ACBD"), (frac(-1, 1), "ADBC")]);
    (q, w)
}

/// One vertex with loops B, C, D, X, Y.
pub fn five_loop_quiver() -> Quiver {
    Quiver::new(
        1,
        &[
            ('B', 0, 0),
            ('C', 0, 0),
            ('D', 0, 0),
            ('X', 0, 0),
            ('Y', 0, 0),
        ],
    )
}

/// W°_d = X^{d+1}/(d+1) − Y^{d+1}/(d+1) − XC + XDB + YC − YBD on the five-loop quiver.
pub fn build_five_loop(d: u32) -> (Quiver, Potential) {
    let k = d as i64 + 1;
    let w = Potential::from_terms(&[
        (frac(1, k), &pow_word('X', k as usize)),
        (frac(-1, k), &pow_word('Y', k as usize)),
        (frac(-1, 1), "XC"),
        (frac(1, 1), "XDB"),
        (frac(1, 1), "YC"),
        (frac(-1, 1), "YBD"),
    ]);
    (five_loop_quiver(), w)
}

/// One loop X with W = X^{d+1}/(d+1).
pub fn build_one_loop(d: u32) -> (Quiver, Potential) {
    let k = d as i64 + 1;
    let q = Quiver::new(1, &[('X', 0, 0)]);
    (
        q,
        Potential::from_terms(&[(frac(1, k), &pow_word('X', k as usize))]),
    )
}

fn path_product(a: &PathSum, b: &PathSum) -> PathSum {
    let mut out = PathSum::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            push_path(&mut out, format!("{wa}{wb}"), ca * cb);
        }
    }
    out
}

/// W°_d minus the expansion of XDB − XBD + (X−Y)(BD − C + (X^d + X^{d−1}Y + … + Y^d)/(d+1)).
pub fn splitting_identity(d: u32) -> Potential {
    let k = d as i64 + 1;
    let mut left = PathSum::new();
    push_path(&mut left, "X".into(), frac(1, 1));
    push_path(&mut left, "Y".into(), frac(-1, 1));
    let mut right = PathSum::new();
    push_path(&mut right, "BD".into(), frac(1, 1));
    push_path(&mut right, "C".into(), frac(-1, 1));
    for i in 0..=d as usize {
        let w = format!("{}{}", pow_word('X', d as usize - i), pow_word('Y', i));
        push_path(&mut right, w, frac(1, k));
    }
    let mut expansion = Potential::from_terms(&[(frac(1, 1), "XDB"), (frac(-1, 1), "XBD")]);
    for (w, c) in path_product(&left, &right) {
        expansion.add_term(c, &w);
    }
    build_five_loop(d).1.sub(&expansion)
}

/// The six relations AX = YA, BX = YB, XC = CY, XD = DY, X^d = CA − DB, Y^d = AC − BD
/// as path sums (left minus right).
pub fn expected_relations(d: u32) -> Vec<(String, PathSum)> {
    let mk = |pos: &[&str], neg: &[&str]| {
        let mut s = PathSum::new();
        for w in pos {
            push_path(&mut s, (*w).into(), frac(1, 1));
        }
        for w in neg {
            push_path(&mut s, (*w).into(), frac(-1, 1));
        }
        s
    };
    let xd = pow_word('X', d as usize);
    let yd = pow_word('Y', d as usize);
    vec![
        ("AX = YA".into(), mk(&["AX"], &["YA"])),
        ("BX = YB".into(), mk(&["BX"], &["YB"])),
        ("XC = CY".into(), mk(&["XC"], &["CY"])),
        ("XD = DY".into(), mk(&["XD"], &["DY"])),
        (format!("X^{d} = CA - DB"), mk(&[&xd, "DB"], &["CA"])),
        (format!("Y^{d} = AC - BD"), mk(&[&yd, "BD"], &["AC"])),
    ]
}

/// For each expected relation, the arrow whose derivative equals it up to sign.
pub fn match_relations(d: u32) -> Vec<(String, Option<char>)> {
    let (q, w) = build_minus2(d);
    let derivs: Vec<(char, PathSum)> = q
        .arrows
        .iter()
        .map(|a| (a.name, ncderiv(&w, a.name)))
        .collect();
    expected_relations(d)
        .into_iter()
        .map(|(name, rel)| {
            let neg: PathSum = rel.iter().map(|(k, c)| (k.clone(), -c)).collect();
            let hit = derivs
                .iter()
                .find(|(_, dv)| *dv == rel || *dv == neg)
                .map(|(e, _)| *e);
            (name, hit)
        })
        .collect()
}

/// Gaussian-rational central charges per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Stability {
    pub values: Vec<(BigRational, BigRational)>,
}

impl Stability {
    pub fn new(values: &[(i64, i64)]) -> Result<Stability> {
        let s = Stability {
            values: values
                .iter()
                .map(|&(a, b)| (frac(a, 1), frac(b, 1)))
                .collect(),
        };
        s.validate()?;
        Ok(s)
    }

    /// The default choice γ = (−1+i, 1+i).
    pub fn standard() -> Stability {
        Stability::new(&[(-1, 1), (1, 1)]).unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        for (re, im) in &self.values {
            if !(im.is_positive() || (im.is_zero() && re.is_negative())) {
                return Err(Error::Config(format!(
                    "central charge {re}+{im}i not in the upper half plane"
                )));
            }
        }
        if self.values.len() == 2 && cross(&self.values[0], &self.values[1]).is_zero() {
            return Err(Error::Config("stability is not generic".into()));
        }
        Ok(())
    }

    /// Parses "a+bi,c+di" style lists, e.g. "-1+1i,1+1i".
    pub fn parse(s: &str) -> Result<Stability> {
        let bad = || Error::Config(format!("cannot parse stability {s:?}"));
        let mut vals = Vec::new();
        for part in s.split(',') {
            let t = part.trim().strip_suffix('i').ok_or_else(bad)?;
            let split = t
                .char_indices()
                .skip(1)
                .filter(|&(_, c)| c == '+' || c == '-')
                .last()
                .ok_or_else(bad)?
                .0;
            let re: BigRational = t[..split].parse().map_err(|_| bad())?;
            let im_s = t[split..].trim_start_matches('+');
            let im: BigRational = im_s.parse().map_err(|_| bad())?;
            vals.push((re, im));
        }
        let st = Stability { values: vals };
        st.validate()?;
        Ok(st)
    }

    pub fn charge(&self, n: &DimVector) -> (BigRational, BigRational) {
        let n0 = frac(n.n0 as i64, 1);
        let n1 = frac(n.n1 as i64, 1);
        (
            &self.values[0].0 * &n0 + &self.values[1].0 * &n1,
            &self.values[0].1 * &n0 + &self.values[1].1 * &n1,
        )
    }
}

fn cross(a: &(BigRational, BigRational), b: &(BigRational, BigRational)) -> BigRational {
    &a.0 * &b.1 - &a.1 * &b.0
}

/// arg γ(m) < arg γ(n), exactly.
pub fn slope_less(g: &Stability, m: &DimVector, n: &DimVector) -> bool {
    cross(&g.charge(m), &g.charge(n)).is_positive()
}

pub fn slope_equal(g: &Stability, m: &DimVector, n: &DimVector) -> bool {
    cross(&g.charge(m), &g.charge(n)).is_zero()
}

/// Ordered parts with strictly decreasing slope.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HnType {
    pub parts: Vec<DimVector>,
}

/// All HN types of `target` whose parts are positive multiples of support vectors.
pub fn hn_types(support: &[DimVector], target: DimVector, g: &Stability) -> Vec<HnType> {
    let mut parts: BTreeSet<DimVector> = BTreeSet::new();
    for v in support {
        if v.is_zero() {
            continue;
        }
        let mut m = 1;
        while v.n0 * m <= target.n0 && v.n1 * m <= target.n1 {
            parts.insert(v.times(m));
            m += 1;
        }
    }
    let parts: Vec<DimVector> = parts.into_iter().collect();
    let mut out = BTreeSet::new();
    fn rec(
        rest: DimVector,
        last: Option<DimVector>,
        parts: &[DimVector],
        g: &Stability,
        cur: &mut Vec<DimVector>,
        out: &mut BTreeSet<HnType>,
    ) {
        if rest.is_zero() {
            out.insert(HnType { parts: cur.clone() });
            return;
        }
        for p in parts {
            if let Some(l) = last {
                if !slope_less(g, p, &l) {
                    continue;
                }
            }
            if let Some(r) = rest.minus(p) {
                cur.push(*p);
                rec(r, Some(*p), parts, g, cur, out);
                cur.pop();
            }
        }
    }
    rec(target, None, &parts, g, &mut Vec::new(), &mut out);
    out.into_iter().collect()
}

/// A representation: one matrix per arrow, in arrow order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rep {
    pub dims: Vec<usize>,
    pub mats: Vec<Mat>,
}

impl Rep {
    pub fn zero(q: &Quiver, dims: &[usize]) -> Rep {
        Rep {
            dims: dims.to_vec(),
            mats: q
                .arrows
                .iter()
                .map(|a| Mat::zeros(dims[a.src], dims[a.tgt]))
                .collect(),
        }
    }

    /// Path matrix of a word given as arrow indices: M(e_L)·…·M(e₁).
    pub fn path(&self, _q: &Quiver, idx: &[usize], p: u32) -> Mat {
        let last = *idx.last().expect("empty word");
        let mut m = self.mats[last];
        for &i in idx[..idx.len() - 1].iter().rev() {
            m = m.mul(&self.mats[i], p);
        }
        m
    }

    /// Path matrix of a path sum; zero of the given shape when empty.
    pub fn path_sum(&self, q: &Quiver, s: &PathSum, p: u32, shape: (usize, usize)) -> Result<Mat> {
        let mut acc = Mat::zeros(shape.0, shape.1);
        for (w, c) in s {
            let idx = q.word_indices(w)?;
            let m = self.path(q, &idx, p);
            acc = acc.add(&m.scale(crate::ff::rat_mod(c, p)?, p), p);
        }
        Ok(acc)
    }

    /// Does every ∂W/∂E act as zero?
    pub fn satisfies_relations(&self, q: &Quiver, w: &Potential, p: u32) -> Result<bool> {
        for a in &q.arrows {
            let d = ncderiv(w, a.name);
            // ∂W/∂E is a path from t(E) back to s(E)
            let m = self.path_sum(q, &d, p, (self.dims[a.tgt], self.dims[a.src]))?;
            if !m.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// V_{k+1} = Σ_a V_k(s(a))·M(a) reaches zero.
    pub fn is_nilpotent(&self, q: &Quiver, p: u32) -> bool {
        let total: usize = self.dims.iter().sum();
        let mut cur: Vec<Vec<Vec<u32>>> = self
            .dims
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|i| (0..n).map(|j| (i == j) as u32).collect())
                    .collect()
            })
            .collect();
        for _ in 0..=total {
            if cur.iter().all(|v| v.is_empty()) {
                return true;
            }
            let mut next: Vec<Vec<Vec<u32>>> = vec![Vec::new(); self.dims.len()];
            for (ai, a) in q.arrows.iter().enumerate() {
                if cur[a.src].is_empty() || self.dims[a.tgt] == 0 {
                    continue;
                }
                next[a.tgt].extend(image_rows(&cur[a.src], &self.mats[ai], p));
            }
            for v in next.iter_mut() {
                crate::ff::row_reduce(v, p);
            }
            cur = next;
        }
        cur.iter().all(|v| v.is_empty())
    }
}

/// Number of F_p-points of the representation variety of the Jacobi algebra.
pub fn jacobi_point_count(q: &Quiver, w: &Potential, dims: &[usize], p: u32) -> Result<u128> {
    let n = q.rep_dim(dims);
    let total = (p as u128)
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or(Error::SizeLimit {
            estimate: (p as f64).powi(n as i32),
            limit: (1u64 << 24) as f64,
        })?;
    let mut rep = Rep::zero(q, dims);
    let mut count = 0;
    for idx in 0..total {
        let mut x = idx;
        for m in rep.mats.iter_mut() {
            for i in 0..m.r {
                for j in 0..m.c {
                    m.set(i, j, (x % p as u128) as u32);
                    x /= p as u128;
                }
            }
        }
        if rep.satisfies_relations(q, w, p)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Dimension vectors of all subrepresentations (two-vertex quivers).
pub fn subrep_dimvectors(q: &Quiver, rep: &Rep, p: u32) -> Result<BTreeSet<DimVector>> {
    let total: usize = rep.dims.iter().sum();
    if total > 4 || p > 3 {
        return Err(Error::SizeLimit {
            estimate: (p as f64).powi((total * total) as i32),
            limit: 3f64.powi(16),
        });
    }
    let subs: Vec<Vec<Vec<Vec<u32>>>> = rep.dims.iter().map(|&n| all_subspaces(n, p)).collect();
    let mut out = BTreeSet::new();
    let mut choice = vec![0usize; rep.dims.len()];
    loop {
        let ok = q.arrows.iter().enumerate().all(|(ai, a)| {
            let u = &subs[a.src][choice[a.src]];
            let t = &subs[a.tgt][choice[a.tgt]];
            if u.is_empty() {
                return true;
            }
            let img = image_rows(u, &rep.mats[ai], p);
            let mut all = t.clone();
            all.extend(img);
            rank(&all, p) == t.len()
        });
        if ok {
            let dim = |v: usize| subs.get(v).map_or(0, |s| s[choice[v]].len()) as u32;
            out.insert(DimVector::new(dim(0), dim(1)));
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(out);
            }
            choice[i] += 1;
            if choice[i] < subs[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// γ-stable: every proper nonzero subrepresentation has strictly smaller slope.
pub fn is_stable(q: &Quiver, rep: &Rep, g: &Stability, p: u32) -> Result<bool> {
    let n = DimVector::new(
        rep.dims[0] as u32,
        rep.dims.get(1).copied().unwrap_or(0) as u32,
    );
    for m in subrep_dimvectors(q, rep, p)? {
        if m.is_zero() || m == n {
            continue;
        }
        if !slope_less(g, &m, &n) {
            return Ok(false);
        }
    }
    Ok(true)
}
