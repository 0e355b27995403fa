use steklov_core::experiments::{
    self, load_field, read_manifest, run_ground, run_sweep, suites, Purpose, RunConfig, SWEEP_COLUMNS,
};
use steklov_core::Error;

fn config(text: &str, purpose: Purpose) -> RunConfig {
    RunConfig::parse(text, None, purpose, &[]).unwrap()
}

#[test]
fn ground_manifest_replays_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("name = nav\nsigma = 1\np = 3\ng = const 1\nn = 48\n", Purpose::Ground);
    let out = run_ground(&cfg, dir.path()).unwrap();
    assert!(out.failure.is_none());
    assert!(out.lines[0].contains("positive=1") && out.lines[0].contains("decreasing=1"));
    let first = dir.path().join("nav.manifest");
    let text = std::fs::read_to_string(&first).unwrap();

    let replay_dir = dir.path().join("replay");
    let cfg2 = experiments::load_config(&first, Purpose::Ground, &[]).unwrap();
    assert_eq!(cfg, cfg2);
    run_ground(&cfg2, &replay_dir).unwrap();
    let again = std::fs::read_to_string(replay_dir.join("nav.manifest")).unwrap();
    assert_eq!(text, again);

    let u = load_field(&read_manifest(&first).unwrap()).unwrap();
    assert_eq!(u.grid().n(), 48);
    assert!(experiments::run_verify(&first).unwrap().failure.is_none());
}

#[test]
fn ground_refuses_sigma_below_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sigma = -2\np = 3\ng = const 1\nn = 32\n", Purpose::Ground);
    let err = run_ground(&cfg, dir.path()).unwrap_err();
    assert!(matches!(err, Error::Indefinite { .. }), "{err}");
    assert!(err.to_string().contains("sigma* = -1.000000"));
    assert!(err.is_usage());
}

#[test]
fn unconverged_runs_are_reported_not_hidden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sigma = 0\np = 3\ng = const 1\nn = 32\nmax_iter = 2\n", Purpose::Ground);
    let out = run_ground(&cfg, dir.path()).unwrap();
    assert!(out.failure.unwrap().contains("not converged"));
    assert!(out.lines[0].contains("converged=0"));
}

#[test]
fn sweep_csv_has_the_documented_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "name = s\np = 3\ng = const 1\nn = 32\nsigmas = 0.9, -3, 0.99\nreferences = navier\n",
        Purpose::Sweep,
    );
    let out = run_sweep(&cfg, dir.path()).unwrap();
    // σ = −3 is refused, recorded and the run continues
    assert!(out.failure.unwrap().contains("1 of 3"));
    let mut rdr = csv::Reader::from_path(dir.path().join("s.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, SWEEP_COLUMNS);
    assert_eq!(
        header.join(","),
        "sigma,p,n,energy,hsigma_sq,h2_norm,linf_norm,uprime1,nehari_res,pde_res,pohozaev_res,positive,decreasing,iters,converged"
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let sigmas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(sigmas, vec![0.9, -3.0, 0.99]);
    assert_eq!(&rows[1][14], "0");
    assert_eq!(&rows[0][14], "1");

    let mut dist = csv::Reader::from_path(dir.path().join("s_distances.csv")).unwrap();
    let d: Vec<csv::StringRecord> = dist.records().map(Result::unwrap).collect();
    let d0: f64 = d[0][1].parse().unwrap();
    let d2: f64 = d[2][1].parse().unwrap();
    assert!(d2 < d0);
    assert_eq!(&d[1][1], "");
}

#[test]
fn canned_suites_parse() {
    for name in suites::NAMES {
        let cfg = RunConfig::parse(suites::canned(name).unwrap(), None, Purpose::Sweep, &[]).unwrap();
        assert_eq!(cfg.name, name);
        assert!(!cfg.sigmas.is_empty());
    }
    assert!(suites::canned("paper-suite-nothing").is_none());
}

#[test]
fn identity_suite_passes_on_coarse_and_fine_grids() {
    for n in [8, 16, 64] {
        let report = experiments::identity_suite(n).unwrap();
        assert!(report.passed(), "n = {n}: {:?}", report.checks);
    }
    assert!(experiments::identity_suite(4).is_err());
}
