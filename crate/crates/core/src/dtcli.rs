//! Command-line driver: configuration, count cache, reports, and the self-test.

use crate::dt::{
    check_admissible, compare_cached, compare_one, congruence_ok, omega_table, proofstep_suite,
    rhs_realized, CompareResult, CountCache, CountJob, NoCache, RhsRoute, SectorSpec, StepStatus,
};
use crate::error::{Error, Result};
use crate::fqcount::{fiber_counts, CountVector, Route, Sector};
use crate::lambda::LambdaRing;
use crate::mring::{chi_spec, MonoFrac, MotExpr};
use crate::quiver::{build_minus2, Potential, Rep, Stability};
use crate::realize::{fourier, phi_normalize, RealClass, Realizer};
use crate::series::{DimVector, EvSeries};
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Bumped whenever a counting algorithm changes, invalidating cached counts.
pub const ORACLE_VERSION: u32 = 3;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIZE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "dtcli",
    about = "DT series of the (-2)-curve quiver against finite-field counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Compare counted and closed-form series, or run the proof steps with --steps.
    Verify(Flags),
    /// Emit Ω tables with their Euler characteristics.
    Table(Flags),
    /// Property suites and negative controls.
    Selftest(SelftestFlags),
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// key=value file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub sector: Option<String>,
    #[arg(long)]
    pub primes: Option<String>,
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub floor: Option<i64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub steps: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub n: Option<String>,
    /// Largest total degree in tables.
    #[arg(long)]
    pub dmax: Option<u32>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct SelftestFlags {
    /// Flip the sign of 𝕃^{1/2} at Adams level 3; the self-test must then fail.
    #[arg(long)]
    pub inject_fault: bool,
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub d: u32,
    pub sector: Sector,
    pub primes: Vec<u32>,
    pub dims: Vec<DimVector>,
    pub floor: Option<i64>,
    pub out: PathBuf,
    pub jobs: usize,
    pub cache: Option<PathBuf>,
    pub steps: bool,
    pub gamma: Stability,
    pub p: Option<u32>,
    pub n: Option<DimVector>,
    pub dmax: u32,
}

pub fn parse_dims(s: &str) -> Result<Vec<DimVector>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while let Some(open) = rest.find('(') {
        let close = rest[open..]
            .find(')')
            .ok_or_else(|| Error::Config(format!("unbalanced dims {s:?}")))?
            + open;
        out.push(rest[open..=close].parse()?);
        rest = &rest[close + 1..];
    }
    if out.is_empty() || !rest.trim().is_empty() {
        return Err(Error::Config(format!(
            "dims must look like \"(0,1),(1,1)\", got {s:?}"
        )));
    }
    Ok(out)
}

pub fn parse_primes(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("bad prime {x:?}")))
        })
        .collect()
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut m = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        m.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(m)
}

/// Default primes: those up to 13 passing the congruence gate.
pub fn default_primes(d: u32) -> Vec<u32> {
    (2..=13)
        .filter(|&p| crate::ff::is_prime(p as u64) && congruence_ok(d, p))
        .collect()
}

pub fn default_dims() -> Vec<DimVector> {
    [
        (0, 1),
        (1, 0),
        (0, 2),
        (2, 0),
        (1, 1),
        (1, 2),
        (2, 1),
        (2, 2),
    ]
    .iter()
    .map(|&(a, b)| DimVector::new(a, b))
    .collect()
}

impl RunConfig {
    pub fn resolve(f: &Flags) -> Result<RunConfig> {
        let file = match &f.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());
        let num = |flag: Option<u64>, key: &str| -> Result<Option<u64>> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => file
                    .get(key)
                    .map(|s| {
                        s.parse::<u64>().map_err(|_| {
                            Error::Config(format!("{key} must be a number, got {s:?}"))
                        })
                    })
                    .transpose(),
            }
        };
        for k in file.keys() {
            if ![
                "d", "sector", "primes", "dims", "floor", "jobs", "out", "cache", "steps", "gamma",
                "p", "n", "dmax",
            ]
            .contains(&k.as_str())
            {
                return Err(Error::Config(format!("unknown config key {k:?}")));
            }
        }
        let d = num(f.d.map(u64::from), "d")?.unwrap_or(1) as u32;
        if d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        let sector = pick(f.sector.clone(), "sector")
            .unwrap_or_else(|| "all".into())
            .parse()?;
        let primes = match pick(f.primes.clone(), "primes") {
            Some(s) => parse_primes(&s)?,
            None => default_primes(d),
        };
        let dims = match pick(f.dims.clone(), "dims") {
            Some(s) => parse_dims(&s)?,
            None => default_dims(),
        };
        let floor = match f.floor {
            Some(v) => Some(v),
            None => file
                .get("floor")
                .map(|s| {
                    s.parse::<i64>()
                        .map_err(|_| Error::Config(format!("floor must be an integer, got {s:?}")))
                })
                .transpose()?,
        };
        let jobs = num(f.jobs.map(|j| j as u64), "jobs")?
            .map(|j| j as usize)
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            });
        let out = pick(f.out.as_ref().map(|p| p.display().to_string()), "out")
            .unwrap_or_else(|| "dtcli-out".into());
        let cache =
            pick(f.cache.as_ref().map(|p| p.display().to_string()), "cache").map(PathBuf::from);
        let steps = f.steps || file.get("steps").map(|s| s == "true").unwrap_or(false);
        let gamma = match pick(f.gamma.clone(), "gamma") {
            Some(s) => Stability::parse(&s).map_err(|e| Error::Config(format!("gamma: {e}")))?,
            None => Stability::standard(),
        };
        let p = num(f.p.map(u64::from), "p")?.map(|v| v as u32);
        let n = pick(f.n.clone(), "n")
            .map(|s| s.trim().parse::<DimVector>())
            .transpose()?;
        let dmax = num(f.dmax.map(u64::from), "dmax")?.unwrap_or(4) as u32;
        Ok(RunConfig {
            d,
            sector,
            primes,
            dims,
            floor,
            out: PathBuf::from(out),
            jobs: jobs.max(1),
            cache,
            steps,
            gamma,
            p,
            n,
            dmax,
        })
    }

    /// Congruence gate: p ≡ 1 mod lcm(4, d+1).
    pub fn validate(&self) -> Result<()> {
        let m = num_integer::lcm(4, self.d + 1);
        let primes: Vec<u32> = if self.steps {
            self.p.into_iter().collect()
        } else {
            self.primes.clone()
        };
        if primes.is_empty() {
            return Err(Error::Config(if self.steps {
                "--steps needs --p".into()
            } else {
                "no primes given".into()
            }));
        }
        for &p in &primes {
            check_admissible(self.d, p).map_err(|e| Error::Config(e.to_string()))?;
            if !self.steps && !congruence_ok(self.d, p) {
                return Err(Error::Config(format!(
                    "prime {p} is not ≡ 1 mod {m} (required for d = {})",
                    self.d
                )));
            }
        }
        if self.steps && self.n.is_none() {
            return Err(Error::Config("--steps needs --n \"(a,b)\"".into()));
        }
        Ok(())
    }
}

fn sha_hex(s: &[u8]) -> String {
    hex::encode(Sha256::digest(s))
}

/// Count vectors on disk keyed by a hash of the job. Each file carries a checksum of its
/// body and is written through a temporary file and a rename.
pub struct FileCache {
    pub dir: PathBuf,
}

impl FileCache {
    pub fn new(dir: &Path) -> Result<FileCache> {
        std::fs::create_dir_all(dir)?;
        Ok(FileCache {
            dir: dir.to_path_buf(),
        })
    }

    pub fn key(job: &CountJob) -> String {
        let s = format!(
            "{}|{}|{:?}|{}|{}|{}|v{}",
            job.quiver, job.potential, job.dims, job.p, job.sector, job.method, ORACLE_VERSION
        );
        sha_hex(s.as_bytes())
    }

    pub fn path(&self, job: &CountJob) -> PathBuf {
        self.dir.join(format!("{}.csv", FileCache::key(job)))
    }

    pub fn read(&self, job: &CountJob) -> Result<Option<CountVector>> {
        let path = self.path(job);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let corrupt = || Error::CacheCorrupt(path.display().to_string());
        let (head, body) = text.split_once('\n').ok_or_else(corrupt)?;
        let sum = head.strip_prefix("checksum=").ok_or_else(corrupt)?;
        if sum != sha_hex(body.as_bytes()) {
            return Err(corrupt());
        }
        CountVector::from_csv(job.p, body)
            .map(Some)
            .map_err(|_| corrupt())
    }

    pub fn write(&self, job: &CountJob, cv: &CountVector) -> Result<()> {
        let body = format!("{}\n", cv.to_csv());
        let text = format!("checksum={}\n{}", sha_hex(body.as_bytes()), body);
        let path = self.path(job);
        let nonce = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0);
        let tmp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            FileCache::key(job),
            std::process::id(),
            nonce
        ));
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }
}

impl CountCache for FileCache {
    fn get_or_compute(
        &self,
        job: &CountJob,
        f: &dyn Fn() -> Result<CountVector>,
    ) -> Result<CountVector> {
        if let Some(cv) = self.read(job)? {
            return Ok(cv);
        }
        let cv = f()?;
        self.write(job, &cv)?;
        Ok(cv)
    }
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::SizeLimit { .. } => EXIT_SIZE,
        Error::Config(_) | Error::BadPrime { .. } | Error::Parse(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_MISMATCH,
    }
}

pub fn report_json(d: u32, p: u32, sector: Sector, results: &[CompareResult]) -> serde_json::Value {
    serde_json::json!({
        "d": d,
        "p": p,
        "sector": sector.to_string(),
        "results": results.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    })
}

pub fn summary_csv(d: u32, sector: Sector, all: &[(u32, Vec<CompareResult>)]) -> String {
    let mut s = String::from("d,p,sector,n0,n1,verdict,route,floor,tailBound\n");
    for (p, rs) in all {
        for r in rs {
            s.push_str(&format!(
                "{d},{p},{sector},{},{},{},{},{},{:e}\n",
                r.n.n0,
                r.n.n1,
                if r.pass { "pass" } else { "mismatch" },
                r.route,
                r.floor,
                r.tail_bound
            ));
        }
    }
    s
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Runs the comparison grid and writes one JSON per prime plus a CSV summary.
pub fn cmd_verify(cfg: &RunConfig) -> i32 {
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return EXIT_CONFIG;
    }
    if cfg.steps {
        return cmd_steps(cfg);
    }
    let cache: Box<dyn CountCache> = match &cfg.cache {
        Some(dir) => match FileCache::new(dir) {
            Ok(c) => Box::new(c),
            Err(e) => {
                eprintln!("cache: {e}");
                return EXIT_CONFIG;
            }
        },
        None => Box::new(NoCache),
    };
    let spec = SectorSpec::new(cfg.sector, cfg.d);
    let jobs: Vec<(u32, DimVector)> = cfg
        .primes
        .iter()
        .flat_map(|&p| cfg.dims.iter().map(move |&n| (p, n)))
        .collect();
    let results: Vec<Result<CompareResult>> = with_pool(cfg.jobs, || {
        jobs.par_iter()
            .map(|&(p, n)| {
                compare_cached(&spec, p, &[n], cfg.floor, cache.as_ref()).map(|mut v| v.remove(0))
            })
            .collect()
    });
    let mut by_prime: BTreeMap<u32, Vec<CompareResult>> = BTreeMap::new();
    let mut code = EXIT_PASS;
    for ((p, n), r) in jobs.iter().zip(results) {
        match r {
            Ok(r) => {
                if !r.pass {
                    code = code.max(EXIT_MISMATCH);
                }
                println!(
                    "d={} p={p} n={n}: {} (bound {:.2e}, {})",
                    cfg.d,
                    if r.pass { "pass" } else { "MISMATCH" },
                    r.tail_bound,
                    r.route
                );
                by_prime.entry(*p).or_default().push(r);
            }
            Err(e) => {
                eprintln!("d={} p={p} n={n}: {e}", cfg.d);
                code = code.max(exit_for(&e));
            }
        }
    }
    if let Err(e) = write_reports(cfg, &by_prime) {
        eprintln!("writing reports: {e}");
        return EXIT_CONFIG;
    }
    code
}

fn write_reports(cfg: &RunConfig, by_prime: &BTreeMap<u32, Vec<CompareResult>>) -> Result<()> {
    std::fs::create_dir_all(&cfg.out)?;
    for (p, rs) in by_prime {
        let j = report_json(cfg.d, *p, cfg.sector, rs);
        let path = cfg
            .out
            .join(format!("verify_d{}_{}_p{}.json", cfg.d, cfg.sector, p));
        std::fs::write(path, serde_json::to_string_pretty(&j).unwrap() + "\n")?;
    }
    let all: Vec<(u32, Vec<CompareResult>)> =
        by_prime.iter().map(|(p, r)| (*p, r.clone())).collect();
    std::fs::write(
        cfg.out
            .join(format!("verify_d{}_{}.csv", cfg.d, cfg.sector)),
        summary_csv(cfg.d, cfg.sector, &all),
    )?;
    Ok(())
}

fn cmd_steps(cfg: &RunConfig) -> i32 {
    let (p, n) = (cfg.p.unwrap(), cfg.n.unwrap());
    let steps = match with_pool(cfg.jobs, || proofstep_suite(cfg.d, p, n, &cfg.gamma)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return exit_for(&e);
        }
    };
    let mut code = EXIT_PASS;
    let mut rows = Vec::new();
    for s in &steps {
        let status = match &s.status {
            StepStatus::Pass => "pass".to_string(),
            StepStatus::Fail => {
                code = EXIT_MISMATCH;
                "FAIL".to_string()
            }
            StepStatus::Skipped(why) => format!("skipped ({why})"),
        };
        println!("{}: {status}", s.name);
        rows.push(serde_json::json!({"step": s.name, "status": status, "detail": s.detail}));
    }
    let j = serde_json::json!({"d": cfg.d, "p": p, "n": [n.n0, n.n1], "steps": rows});
    let write = || -> Result<()> {
        std::fs::create_dir_all(&cfg.out)?;
        let path = cfg
            .out
            .join(format!("steps_d{}_p{}_{}_{}.json", cfg.d, p, n.n0, n.n1));
        std::fs::write(path, serde_json::to_string_pretty(&j).unwrap() + "\n")?;
        Ok(())
    };
    if let Err(e) = write() {
        eprintln!("writing report: {e}");
        return EXIT_CONFIG;
    }
    code
}

/// Rows (sector, n, Ω, χ) for both sectors.
pub fn omega_rows(d: u32, dmax: u32) -> Result<Vec<(Sector, DimVector, MotExpr, BigRational)>> {
    let mut rows = Vec::new();
    for sector in [Sector::Nilpotent, Sector::All] {
        for (n, om) in omega_table(&SectorSpec::new(sector, d), dmax)? {
            let chi = chi_spec(&om)?;
            rows.push((sector, n, om, chi));
        }
    }
    Ok(rows)
}

pub fn cmd_table(cfg: &RunConfig) -> i32 {
    let rows = match omega_rows(cfg.d, cfg.dmax) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return exit_for(&e);
        }
    };
    let mut csv = String::from("d,sector,n0,n1,omega,chi\n");
    for (sector, n, om, chi) in &rows {
        println!(
            "d={} {sector:<9} {n}: Ω = {}   χ = {chi}",
            cfg.d,
            om.render()
        );
        csv.push_str(&format!(
            "{},{sector},{},{},\"{}\",{chi}\n",
            cfg.d,
            n.n0,
            n.n1,
            om.render()
        ));
    }
    let write = || -> Result<()> {
        std::fs::create_dir_all(&cfg.out)?;
        std::fs::write(cfg.out.join(format!("omega_d{}.csv", cfg.d)), &csv)?;
        Ok(())
    };
    if let Err(e) = write() {
        eprintln!("writing table: {e}");
        return EXIT_CONFIG;
    }
    EXIT_PASS
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

fn check(name: &'static str, r: Result<bool>) -> Check {
    match r {
        Ok(ok) => Check {
            name,
            ok,
            detail: String::new(),
        },
        Err(e) => Check {
            name,
            ok: false,
            detail: e.to_string(),
        },
    }
}

fn small_mono() -> Vec<MonoFrac> {
    vec![
        MonoFrac::u_pow(2),
        MonoFrac::int(3),
        MonoFrac::int(-1),
        MonoFrac::u_pow(-2).mul(&MonoFrac::inv_den(&[1])),
        MonoFrac::atom(2, 1).mul(&MonoFrac::u_pow(2)),
    ]
}

fn lambda_axioms() -> Result<bool> {
    let xs = small_mono();
    for a in &xs {
        for b in &xs {
            for n in 1..=3 {
                // σⁿ(a+b) = Σ σ^i(a)σ^{n−i}(b)
                let lhs = a.add(b).sigma(n)?;
                let mut rhs = MonoFrac::zero();
                for i in 0..=n {
                    rhs = rhs.add(&a.sigma(i)?.mul(&b.sigma(n - i)?));
                }
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn power_axioms() -> Result<bool> {
    let unit = MonoFrac::one();
    let f = EvSeries::one(&unit, 3)
        .with(
            DimVector::new(1, 0),
            MonoFrac::u_pow(2).add(&MonoFrac::one()),
        )
        .with(DimVector::new(0, 1), MonoFrac::int(2))
        .with(DimVector::new(1, 1), MonoFrac::u_pow(-2));
    let a = MonoFrac::u_pow(2);
    let b = MonoFrac::int(-3).add(&MonoFrac::u_pow(-4));
    let eq = |x: &EvSeries<MonoFrac>, y: &EvSeries<MonoFrac>| x.eq_by(y, |s, t| s == t);
    let sum = f.power(&a.add(&b))?;
    let prod = f.power(&a)?.mul(&f.power(&b)?)?;
    let nested = f.power(&a)?.power(&b)?;
    let direct = f.power(&a.mul(&b))?;
    let one = f.power(&MonoFrac::one())?;
    Ok(eq(&sum, &prod) && eq(&nested, &direct) && eq(&one, &f))
}

fn convolution_laws() -> Result<bool> {
    let p = 7;
    let mk = |s: u32| {
        RealClass::new(
            p,
            (0..p)
                .map(|t| BigRational::from_integer((((t * s + 3) % 5) as i64 - 1).into()))
                .collect(),
        )
    };
    let (a, b, c) = (mk(1), mk(2), mk(4));
    let ab = a.convolve(&b)?;
    let comm = ab == b.convolve(&a)?;
    let assoc = ab.convolve(&c)? == a.convolve(&b.convolve(&c)?)?;
    let dist = a.convolve(&b.add(&c)?)? == ab.add(&a.convolve(&c)?)?;
    let fourier_ok = (1..p).all(|j| fourier(&ab, j) == fourier(&a, j).mul(&fourier(&b, j)));
    Ok(comm && assoc && dist && fourier_ok)
}

/// Symbolic σ through orbit counting agrees with the Adams route on μ-free classes.
fn burnside_vs_multiset() -> Result<bool> {
    let xs = [
        MotExpr::u_pow(2),
        MotExpr::int(3).add(&MotExpr::u_pow(-2)),
        MotExpr::u_pow(4).scale(&BigRational::from_integer(2.into())),
    ];
    for x in &xs {
        for n in 1..=4 {
            let a = crate::mring::sigma(n, x)?;
            let b = MonoFrac::from_mot(x)?.sigma(n)?;
            if MonoFrac::from_mot(&a)? != b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Subspace iteration against every composable path of length dim.
fn nilpotency_definitions() -> Result<bool> {
    let (q, _) = build_minus2(1);
    let p = 2;
    let dims = [1usize, 1];
    let total_entries = q.rep_dim(&dims);
    let len = dims.iter().sum::<usize>();
    let arrows = q.arrows.len();
    for idx in 0..(1u64 << total_entries) {
        let mut rep = Rep::zero(&q, &dims);
        let mut bit = 0;
        for m in rep.mats.iter_mut() {
            for i in 0..m.r {
                for j in 0..m.c {
                    m.set(i, j, ((idx >> bit) & 1) as u32);
                    bit += 1;
                }
            }
        }
        let mut all_zero = true;
        for w in 0..arrows.pow(len as u32) {
            let word: Vec<usize> = (0..len)
                .map(|k| w / arrows.pow(k as u32) % arrows)
                .collect();
            if word
                .windows(2)
                .any(|e| q.arrows[e[0]].tgt != q.arrows[e[1]].src)
            {
                continue;
            }
            if !rep.path(&q, &word, p).is_zero() {
                all_zero = false;
            }
        }
        if all_zero != rep.is_nilpotent(&q, p) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn oracle_consistency() -> Result<bool> {
    let (q, w) = build_minus2(1);
    let naive = fiber_counts(&q, &w, &[1, 1], 3, Sector::All, Route::Naive)?;
    let auto = fiber_counts(&q, &w, &[1, 1], 3, Sector::All, Route::Auto)?;
    let spec = SectorSpec::new(Sector::All, 1);
    let full = crate::dt::lhs_coefficient_via(
        &spec,
        DimVector::new(1, 1),
        5,
        crate::dt::LhsRoute::Full,
        &NoCache,
    )?;
    let kron = crate::dt::lhs_coefficient_via(
        &spec,
        DimVector::new(1, 1),
        5,
        crate::dt::LhsRoute::Kron,
        &NoCache,
    )?;
    Ok(naive == auto && full == kron)
}

/// σ³(u) = u³ at p = 5, realized through Adams levels.
fn u_rule(fault: Option<usize>) -> Result<bool> {
    let mut re = Realizer::new(5)?;
    re.fault_level = fault;
    let l = re.leveled_mono(&MonoFrac::u_pow(1), 3)?;
    let (s3, _) = l.sigma(3)?.level1()?;
    Ok(s3 == re.u_level(3, 1)?)
}

fn small_comparison() -> Result<bool> {
    let spec = SectorSpec::new(Sector::All, 1);
    let dims = [
        DimVector::new(0, 1),
        DimVector::new(1, 1),
        DimVector::new(0, 2),
    ];
    Ok(compare_cached(&spec, 5, &dims, None, &NoCache)?
        .iter()
        .all(|r| r.pass))
}

fn negative_controls() -> Result<bool> {
    let n = DimVector::new(1, 1);
    let wrong_d = compare_one(
        &SectorSpec::new(Sector::All, 1),
        &SectorSpec::new(Sector::All, 2),
        13,
        n,
        None,
        &NoCache,
    )?;
    let (q, w) = build_minus2(1);
    let mut flipped = Potential::zero();
    for (word, c) in w.terms() {
        let c = if word.contains('D') && word.contains('X') {
            -c.clone()
        } else {
            c.clone()
        };
        flipped.add_term(c, word);
    }
    let (rhs, _) = rhs_realized(&SectorSpec::new(Sector::All, 1), n, 5, RhsRoute::Exact)?;
    let cv = fiber_counts(&q, &flipped, &[1, 1], 5, Sector::All, Route::Auto)?;
    let sign = phi_normalize(&RealClass::from_counts(&cv), 6, &[1, 1], false)?.to_cyc() != rhs;
    let good = fiber_counts(&q, &w, &[1, 1], 5, Sector::All, Route::Auto)?;
    let norm = phi_normalize(&RealClass::from_counts(&good), 8, &[1, 1], false)?.to_cyc() != rhs;
    Ok(!wrong_d.pass && sign && norm)
}

fn cache_poisoning(dir: &Path) -> Result<bool> {
    let cache = FileCache::new(dir)?;
    let job = CountJob {
        quiver: "selftest".into(),
        potential: "XX".into(),
        dims: vec![1],
        p: 3,
        sector: Sector::All,
        method: "poison".into(),
    };
    let cv = CountVector {
        p: 3,
        counts: vec![1, 2, 0],
    };
    cache.write(&job, &cv)?;
    let back = cache.read(&job)?;
    let path = cache.path(&job);
    let text = std::fs::read_to_string(&path)?;
    std::fs::write(&path, text.replace("1,2,0", "1,2,1"))?;
    let detected = matches!(cache.read(&job), Err(Error::CacheCorrupt(_)));
    std::fs::remove_file(&path)?;
    Ok(back == Some(cv) && detected)
}

/// Runs every property check; `fault` injects a sign error at one Adams level.
pub fn selftest_checks(fault: Option<usize>, cache_dir: &Path) -> Vec<Check> {
    vec![
        check("λ-ring axioms", lambda_axioms()),
        check("power-structure axioms", power_axioms()),
        check("convolution and Fourier laws", convolution_laws()),
        check(
            "orbit-counting σ vs multiset σ on μ-free classes",
            burnside_vs_multiset(),
        ),
        check("nilpotency definitions agree", nilpotency_definitions()),
        check("count oracles agree", oracle_consistency()),
        check("σ³(u) = u³ through Adams levels", u_rule(fault)),
        check("small comparison grid", small_comparison()),
        check("negative controls are flagged", negative_controls()),
        check("cache poisoning is detected", cache_poisoning(cache_dir)),
    ]
}

pub fn cmd_selftest(f: &SelftestFlags) -> i32 {
    let dir = f.cache.clone().unwrap_or_else(|| {
        std::env::temp_dir().join(format!("dtcli-selftest-{}", std::process::id()))
    });
    let fault = if f.inject_fault { Some(3) } else { None };
    let checks = selftest_checks(fault, &dir);
    let mut code = EXIT_PASS;
    for c in &checks {
        println!(
            "{} {}{}",
            if c.ok { "ok  " } else { "FAIL" },
            c.name,
            if c.detail.is_empty() {
                String::new()
            } else {
                format!(": {}", c.detail)
            }
        );
        if !c.ok {
            code = EXIT_MISMATCH;
        }
    }
    if f.cache.is_none() {
        let _ = std::fs::remove_dir_all(&dir);
    }
    code
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_PASS
            };
        }
    };
    match cli.cmd {
        Cmd::Verify(f) => match RunConfig::resolve(&f) {
            Ok(cfg) => cmd_verify(&cfg),
            Err(e) => {
                eprintln!("config error: {e}");
                EXIT_CONFIG
            }
        },
        Cmd::Table(f) => match RunConfig::resolve(&f) {
            Ok(cfg) => cmd_table(&cfg),
            Err(e) => {
                eprintln!("config error: {e}");
                EXIT_CONFIG
            }
        },
        Cmd::Selftest(f) => cmd_selftest(&f),
    }
}
