use artbh_core::config::*;
use artbh_core::metric::FourierB;
use artbh_core::Error;

#[test]
fn fourier_expressions() {
    let cases = [
        ("0.5", FourierB { b0: 0.5, b1: 0.0, c1: 0.0 }),
        ("cos(theta)", FourierB { b0: 0.0, b1: 1.0, c1: 0.0 }),
        ("0.5*cos(theta)", FourierB { b0: 0.0, b1: 0.5, c1: 0.0 }),
        ("0.5 + 0.1*cos(θ) - 0.2*sin(theta)", FourierB { b0: 0.5, b1: 0.1, c1: -0.2 }),
        ("-sin(theta) + 1e-3 + 2.5e+1*cos(theta)", FourierB { b0: 1e-3, b1: 25.0, c1: -1.0 }),
        ("0.25 + 0.25", FourierB { b0: 0.5, b1: 0.0, c1: 0.0 }),
    ];
    for (src, want) in cases {
        assert_eq!(parse_fourier(src).unwrap(), want, "{src}");
    }
    for bad in ["", "0.5 +", "cos(x)", "tan(theta)", "a*cos(theta)"] {
        assert!(matches!(parse_fourier(bad), Err(Error::Config(_))), "{bad:?} should fail");
    }
}

#[test]
fn defaults_are_valid() {
    let cfg = RunConfig::from_toml("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert!(matches!(cfg.metric, MetricConfig::Bathtub { .. }));
}

#[test]
fn b_forms_agree() {
    let a = RunConfig::from_toml("[metric]\nfamily = \"bathtub\"\nA = 1.0\nB = \"0.5 + 0.1*cos(theta)\"\n").unwrap();
    let b = RunConfig::from_toml("[metric]\nfamily = \"bathtub\"\nA = 1.0\nB = { b0 = 0.5, b1 = 0.1 }\n").unwrap();
    assert_eq!(a.resolve().unwrap(), b.resolve().unwrap());
}

#[test]
fn resolved_config_round_trips() {
    let src = r#"
seed = 3
[metric]
family = "kerr_cyl"
m = 1.0
a = 0.6
[wavesim]
h = 0.03125
experiment = "boundedness"
"#;
    let cfg = RunConfig::from_toml(src).unwrap().resolve().unwrap();
    let text = cfg.to_toml().unwrap();
    let back = RunConfig::from_toml(&text).unwrap();
    assert_eq!(cfg, back);
    assert_eq!(back.to_toml().unwrap(), text);
}

#[test]
fn unknown_keys_are_rejected() {
    for src in [
        "colour = 1",
        "[metric]\nfamily = \"flat\"\nradius = 2.0",
        "[wavesim]\nhh = 0.1",
        "[metric]\nfamily = \"wormhole\"",
    ] {
        assert!(matches!(RunConfig::from_toml(src), Err(Error::Config(_))), "{src:?}");
    }
}

#[test]
fn ranges_are_validated() {
    for src in [
        "tol = -1.0",
        "[wavesim]\nflow_order = 3",
        "[wavesim]\ndissipation = 2.0",
        "[rays]\nrandom_radii = [2.0, 1.0]",
        "[stability]\neps = [0.0, -0.1]",
        "[metric]\nfamily = \"bathtub\"\nA = 1.0\nB = \"sin(2*theta)\"",
    ] {
        assert!(matches!(RunConfig::from_toml(src), Err(Error::Config(_))), "{src:?}");
    }
}

#[test]
fn metric_configs_build() {
    for src in [
        "[metric]\nfamily = \"flat\"\ndim = 3",
        "[metric]\nfamily = \"acoustic\"\nvelocity = [0.3, 0.0]",
        "[metric]\nfamily = \"gordon\"\nn_refr = 1.5\nw = [0.1, 0.0]",
        "[metric]\nfamily = \"kerr\"\nm = 1.0\na = 0.9",
        "[metric]\nfamily = \"perturbation\"\neps_max = 0.2\neps = 0.1\nbase = { A = 1.0 }\ndelta = { B = \"cos(theta)\" }",
    ] {
        let cfg = RunConfig::from_toml(src).unwrap();
        cfg.metric.build().unwrap();
    }
    let bad = RunConfig::from_toml("[metric]\nfamily = \"kerr\"\nm = 1.0\na = 2.0").unwrap();
    assert!(bad.metric.build().is_err());
}
