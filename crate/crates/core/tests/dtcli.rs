use dtcore::dt::{CountCache, CountJob};
use dtcore::dtcli::*;
use dtcore::error::Error;
use dtcore::fqcount::{CountVector, Sector};
use dtcore::series::DimVector;

fn run_args(args: &[&str]) -> i32 {
    let mut v = vec!["dtcli"];
    v.extend_from_slice(args);
    run(v)
}

#[test]
fn congruence_gate_rejects_bad_prime() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run_args(&["verify", "--d", "2", "--primes", "5", "--out", out]),
        EXIT_CONFIG
    );
    assert_eq!(
        run_args(&["verify", "--d", "1", "--primes", "7", "--out", out]),
        EXIT_CONFIG
    );
    assert_eq!(
        run_args(&["verify", "--d", "1", "--primes", "9", "--out", out]),
        EXIT_CONFIG
    );
    assert_eq!(run_args(&["verify", "--nonsense"]), EXIT_CONFIG);
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cache = dir.path().join("cache");
    let args = [
        "verify",
        "--d",
        "1",
        "--primes",
        "5",
        "--dims",
        "(0,1),(1,1)",
        "--jobs",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--cache",
        cache.to_str().unwrap(),
    ];
    assert_eq!(run_args(&args), EXIT_PASS);
    let j: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verify_d1_all_p5.json")).unwrap())
            .unwrap();
    assert_eq!(j["p"], 5);
    assert_eq!(j["results"].as_array().unwrap().len(), 2);
    assert_eq!(j["results"][1]["verdict"], "pass");
    let csv = std::fs::read_to_string(out.join("verify_d1_all.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(std::fs::read_dir(&cache).unwrap().count() > 0);
    // second run reads the cache and reports the same numbers
    let first = std::fs::read_to_string(out.join("verify_d1_all_p5.json")).unwrap();
    assert_eq!(run_args(&args), EXIT_PASS);
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("runtimeMs"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip(&first),
        strip(&std::fs::read_to_string(out.join("verify_d1_all_p5.json")).unwrap())
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# comment\nd = 2\nprimes = 13\ndims = (0,1)\nsector = nilpotent\n",
    )
    .unwrap();
    let flags = Flags {
        config: Some(cfg.clone()),
        ..Default::default()
    };
    let c = RunConfig::resolve(&flags).unwrap();
    assert_eq!(
        (c.d, c.sector, c.primes.clone()),
        (2, Sector::Nilpotent, vec![13])
    );
    assert_eq!(c.dims, vec![DimVector::new(0, 1)]);
    let flags = Flags {
        config: Some(cfg.clone()),
        d: Some(1),
        primes: Some("5,13".into()),
        ..Default::default()
    };
    let c = RunConfig::resolve(&flags).unwrap();
    assert_eq!((c.d, c.primes), (1, vec![5, 13]));
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert!(RunConfig::resolve(&Flags {
        config: Some(cfg),
        ..Default::default()
    })
    .is_err());
}

#[test]
fn dims_parsing() {
    assert_eq!(
        parse_dims("(0,1),(2, 1)").unwrap(),
        vec![DimVector::new(0, 1), DimVector::new(2, 1)]
    );
    assert!(parse_dims("0,1").is_err());
    assert!(parse_dims("(0,1").is_err());
    assert_eq!(default_primes(1), vec![5, 13]);
    assert_eq!(default_primes(2), vec![13]);
}

#[test]
fn cache_round_trip_and_poisoning() {
    let dir = tempfile::tempdir().unwrap();
    let cache = FileCache::new(dir.path()).unwrap();
    let job = CountJob {
        quiver: "q".into(),
        potential: "XX".into(),
        dims: vec![1, 1],
        p: 5,
        sector: Sector::All,
        method: "t".into(),
    };
    let cv = CountVector {
        p: 5,
        counts: vec![5, 0, 10, 10, 0],
    };
    let got = cache.get_or_compute(&job, &|| Ok(cv.clone())).unwrap();
    assert_eq!(got, cv);
    // served from disk now
    let again = cache
        .get_or_compute(&job, &|| panic!("recomputed"))
        .unwrap();
    assert_eq!(again, cv);
    let path = cache.path(&job);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replace("5,0,10", "5,0,11")).unwrap();
    assert!(matches!(cache.read(&job), Err(Error::CacheCorrupt(_))));
    let other = CountJob {
        p: 7,
        ..job.clone()
    };
    assert_ne!(FileCache::key(&job), FileCache::key(&other));
}

#[test]
fn selftest_passes_and_catches_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let checks = selftest_checks(None, dir.path());
    for c in &checks {
        assert!(c.ok, "{}: {}", c.name, c.detail);
    }
    let faulty = selftest_checks(Some(3), dir.path());
    assert!(faulty.iter().any(|c| !c.ok));
    let d = dir.path().to_str().unwrap();
    assert_eq!(run_args(&["selftest", "--cache", d]), EXIT_PASS);
    assert_eq!(
        run_args(&["selftest", "--inject-fault", "--cache", d]),
        EXIT_MISMATCH
    );
}

#[test]
fn table_and_steps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run_args(&["table", "--d", "1", "--dmax", "3", "--out", out]),
        EXIT_PASS
    );
    let csv = std::fs::read_to_string(dir.path().join("omega_d1.csv")).unwrap();
    assert!(csv
        .lines()
        .any(|l| l.starts_with("1,all,1,1,") && l.ends_with(",-2")));
    assert_eq!(
        run_args(&["verify", "--steps", "--d", "1", "--p", "5", "--n", "(1,1)", "--out", out]),
        EXIT_PASS
    );
    let j: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("steps_d1_p5_1_1.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(j["steps"].as_array().unwrap().len(), 5);
    // steps need an admissible prime
    assert_eq!(
        run_args(&["verify", "--steps", "--d", "2", "--p", "3", "--n", "(1,1)", "--out", out]),
        EXIT_CONFIG
    );
}

#[test]
fn size_limit_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run_args(&["verify", "--d", "1", "--primes", "13", "--dims", "(4,4)", "--out", out]),
        EXIT_SIZE
    );
}
