use bmap_lab::experiments::{run_local, run_qstar, run_scaling, run_tail};
use bmap_lab::report::body;
use bmap_lab::{ExperimentCfg, LabError};

fn cfg(text: &str) -> ExperimentCfg {
    ExperimentCfg::parse(text).unwrap()
}

#[test]
fn scaling_needs_two_grid_points() {
    let c = cfg("weights = stable 1.25\norder = 256\ngrid = 64\nsamples = 4\n");
    assert!(matches!(run_scaling(&c), Err(LabError::GridTooSmall)));
}

#[test]
fn scaling_rejects_non_dense_weights() {
    let c = cfg("weights = zero\norder = 256\ngrid = 16 32\nsamples = 4\n");
    assert!(matches!(run_scaling(&c), Err(LabError::WrongRegime(_))));
    let c = cfg("weights = stable 1.75\norder = 256\ngrid = 16 32\nsamples = 4\n");
    assert!(matches!(run_scaling(&c), Err(LabError::WrongRegime(_))));
}

#[test]
fn small_dense_scaling_run() {
    let c = cfg("weights = stable 1.25\norder = 512\ngrid = 2^5..2^8\nsamples = 64\nseed = 2\n");
    let out = run_scaling(&c).unwrap();
    assert_eq!(out.rows.len(), 4);
    assert!((out.target - 0.75).abs() < 1e-12);
    assert!(out.rows.windows(2).all(|w| w[1].mean_diam > w[0].mean_diam));
    assert!(out.fit.slope > 0.3 && out.fit.slope < 1.0, "{}", out.fit.slope);
}

#[test]
fn report_reproduces_from_its_own_header() {
    let c = cfg("weights = stable 1.25\norder = 512\ngrid = 32 64\nsamples = 40\nseed = 17\n");
    let first = run_scaling(&c).unwrap().report.render().unwrap();
    let again = ExperimentCfg::parse(&first).unwrap();
    assert_eq!(again.canonical(), c.canonical());
    assert_eq!(again.hash().unwrap(), c.hash().unwrap());
    let second = run_scaling(&again).unwrap().report.render().unwrap();
    assert_eq!(first, second);
}

#[test]
fn thread_count_does_not_change_results() {
    let mut c = cfg("weights = stable 1.75\norder = 512\ngrid = 128\nsamples = 50\nseed = 8\n");
    c.threads = 1;
    let a = run_tail(&c).unwrap().report.render().unwrap();
    c.threads = 3;
    let b = run_tail(&c).unwrap().report.render().unwrap();
    assert_eq!(body(&a), body(&b));
}

#[test]
fn subcritical_loop_variances_match_closed_forms() {
    let c = cfg("weights = explicit 0 0.0625\norder = 512\ngrid = 1024\nsamples = 200\nseed = 21\n");
    let out = run_tail(&c).unwrap();
    assert_eq!(out.target, None);
    let v = out.variance.expect("finite variance");
    // closed forms for q = (0, 1/16): 16/9 and 1.1247
    assert!((v.nu_closed - 16.0 / 9.0).abs() < 1e-6, "{}", v.nu_closed);
    assert!((v.nu_empirical / v.nu_closed - 1.0).abs() < 0.05, "{v:?}");
    assert!((v.loop_empirical / v.loop_closed - 1.0).abs() < 0.05, "{v:?}");
}

#[test]
fn zero_weights_local_law_is_the_kesten_limit() {
    let c = cfg("weights = zero\norder = 256\ngrid = 512\nsamples = 2000\nradius = 1\nseed = 4\n");
    let out = run_local(&c).unwrap();
    let row = &out.rows[0];
    assert!(row.tv < 0.05, "{row:?}");
}

#[test]
fn qstar_checks_pass() {
    let out = run_qstar(&cfg("weights = qstar\norder = 2048\n")).unwrap();
    assert!(out.select("qstar", "F_k").iter().all(|c| c.pass));
    assert!(out.select("qstar", "F_r")[0].pass);
    assert!(out.select("qstar", "m_nu")[0].pass);
}

#[test]
fn config_errors_carry_line_numbers() {
    let e = ExperimentCfg::parse("weights = zero\nsamples = many\n").unwrap_err();
    assert!(matches!(e, LabError::Config { line: 2, .. }), "{e}");
    let e = ExperimentCfg::parse("weights = zero\nweights = qstar\n").unwrap_err();
    assert!(matches!(e, LabError::Config { line: 2, .. }), "{e}");
    assert!(ExperimentCfg::parse("order = 64\n").is_err());
    assert!(ExperimentCfg::parse("weights = zero\ngrid = 64 32\n").is_err());
}
