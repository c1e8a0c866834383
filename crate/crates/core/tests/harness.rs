use std::path::Path;
use std::process::Command;

use charflow::harness::output::read_snapshots_bin;
use charflow::harness::*;
use charflow::interior::{Grading, SpaceGrid};
use num_complex::Complex64;

fn charflow(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_charflow")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn run(cmd: &str, config: &str, out: &Path) -> (i32, String) {
    charflow(&[cmd, "--config", config, "--out", out.to_str().unwrap()])
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SCALAR: &str = r#"
name = "scalar"
[operator]
n = 1
d = 0
T = 0.5
A = [[[1.0]]]
B = [[[0.3]]]
hyperbolicity = "symmetric"
[asymptotics]
delta = 0.0
theta = 1.5
entries = [{ re = -0.5, mult = 1 }]
[grid]
grading = { kind = "geometric", x_min = 1e-6, log_step = 0.1 }
"#;

#[test]
fn builtins_parse_and_validate() {
    for name in BUILTIN_NAMES {
        let sc = Scenario::load(&format!("builtin:{name}")).unwrap();
        assert_eq!(sc.name, name);
        assert!(!sc.oracle.is_empty(), "{name} documents its oracle");
        sc.validate().unwrap();
    }
    assert!(matches!(Scenario::builtin("nope"), Err(HarnessError::ConfigParse(_))));
}

#[test]
fn malformed_and_invalid_configs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "name = [unclosed");
    let (code, err) = run("solve", &bad, &dir.path().join("o1"));
    assert_eq!(code, 2);
    let rec: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(rec["error"], "ConfigParse");
    assert_eq!(rec["exit_code"], 2);

    let unknown = write(dir.path(), "unknown.toml", &format!("{SCALAR}\nbogus = 1\n"));
    assert_eq!(run("solve", &unknown, &dir.path().join("o2")).0, 2);

    // pair outside the asymptotic type
    let outside = format!("{SCALAR}\n[[data.u0]]\nkind = \"potential\"\np_re = -0.25\nw = [1.0]\n");
    let p = write(dir.path(), "outside.toml", &outside);
    let (code, err) = run("solve", &p, &dir.path().join("o3"));
    assert_eq!(code, 3, "{err}");

    // x^{0.7} is neither the stored exponent nor flat (flat needs > 1)
    let mid = format!("{SCALAR}\n[[data.u0]]\nkind = \"power\"\nexponent = 0.7\nw = [1.0]\n");
    assert_eq!(run("solve", &write(dir.path(), "mid.toml", &mid), &dir.path().join("o4")).0, 3);

    let mismatch = SCALAR.replace("delta = 0.0\ntheta", "delta = 0.1\ntheta");
    assert_eq!(run("solve", &write(dir.path(), "delta.toml", &mismatch), &dir.path().join("o5")).0, 3);

    let ok = write(dir.path(), "ok.toml", SCALAR);
    let (code, _) = charflow(&["convergence", "--config", &ok, "--out", dir.path().join("o6").to_str().unwrap(), "--levels", "1"]);
    assert_eq!(code, 3);
}

#[test]
fn zero_data_gives_zero_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zero.toml", SCALAR);
    let out = dir.path().join("solve");
    assert_eq!(run("solve", &cfg, &out).0, 0);
    let snaps = read_snapshots_bin(&out.join("snapshots.bin")).unwrap();
    assert!(snaps.values.iter().flatten().all(|v| v.norm() == 0.0));
    assert!(out.join("energy.csv").exists() && out.join("plot/plot.py").exists());

    let (code, _) = run("verify-traces", &cfg, &dir.path().join("vt"));
    assert_eq!(code, 0);
    let sc = Scenario::from_toml(SCALAR).unwrap();
    let conv = convergence(&sc, 2).unwrap();
    assert!(conv.levels.iter().all(|l| l.trace_error == 0.0));
    assert_eq!(conv.trace_orders, vec![None]);
    assert!(verify_energy(&sc).unwrap().verdict.trivial);
}

#[test]
fn empty_type_is_vacuous_pass() {
    let flat = SCALAR.replace("entries = [{ re = -0.5, mult = 1 }]", "entries = []")
        + "\n[[data.u0]]\nkind = \"power\"\nexponent = 1.5\nw = [1.0]\n";
    let r = verify_traces(&Scenario::from_toml(&flat).unwrap().validate().unwrap(), 0).unwrap();
    assert!(r.vacuous && r.pass && r.comparisons.is_empty());
}

#[test]
fn taylor_d0_artifact_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    assert_eq!(run("solve", "builtin:taylor_d0", &out).0, 0);
    let sc = Scenario::builtin("taylor_d0").unwrap();
    let grid = SpaceGrid::new(sc.grid.x_max, sc.grid.grading, sc.grid.ny).unwrap();
    let snaps = read_snapshots_bin(&out.join("snapshots.bin")).unwrap();
    assert_eq!(snaps.x, grid.x);
    assert_eq!(snaps.ncomp, 2);
    assert_eq!(snaps.t.first(), Some(&0.0));
    assert!((snaps.t.last().unwrap() - sc.operator.t_final).abs() < 1e-12);
    assert!(snaps.values.iter().all(|v| v.len() == grid.nx() * 2));
    let mut rdr = csv::Reader::from_path(out.join("snapshots.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().len(), 3 + 4);
    assert_eq!(rdr.records().count(), snaps.t.len() * grid.nx());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "solve");
    // defaults are recorded
    assert_eq!(report["scenario"]["solver"]["cfl"], 0.4);
    assert!(report["result"]["norms"].as_array().unwrap().iter().all(|n| n["gamma"] == 0.0));

    let tr = dir.path().join("tr");
    assert_eq!(run("traces", "builtin:taylor_d0", &tr).0, 0);
    let files = std::fs::read_dir(tr.join("traces")).unwrap().count();
    assert_eq!(files, 2);
}

#[test]
fn reports_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 4] {
        let mut sc = Scenario::builtin("taylor_d1_symmetric").unwrap();
        sc.threads = Some(threads);
        let cfg = write(dir.path(), &format!("s{threads}.json"), &serde_json::to_string(&sc).unwrap());
        let out = dir.path().join(format!("o{threads}"));
        assert_eq!(run("verify-traces", &cfg, &out).0, 0);
        assert_eq!(run("solve", &cfg, &out).0, 0);
        let mut rep: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        rep["scenario"]["threads"] = serde_json::Value::Null;
        outputs.push((rep, std::fs::read(out.join("snapshots.bin")).unwrap()));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert!(outputs[0].1 == outputs[1].1, "snapshot bytes differ");
}

#[test]
fn exit_codes_of_checks() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("verify-traces", "builtin:log_pair_d0", &dir.path().join("a")).0, 0);
    assert_eq!(run("verify-traces", "builtin:negcontrol_log_pair_d0", &dir.path().join("b")).0, 0);
    // the flipped cascade without the negative-control flag is a failed check
    let mut sc = Scenario::builtin("negcontrol_log_pair_d0").unwrap();
    sc.checks.expect_failure = false;
    let cfg = write(dir.path(), "flip.json", &serde_json::to_string(&sc).unwrap());
    let (code, err) = run("verify-traces", &cfg, &dir.path().join("c"));
    assert_eq!(code, 5);
    assert!(err.contains("AcceptanceFailure"));
    assert_eq!(run("symbol-check", "builtin:strict_d1", &dir.path().join("d")).0, 0);
    assert_eq!(run("verify-energy", "builtin:taylor_d1_symmetric", &dir.path().join("e")).0, 0);
}

#[test]
fn exact_family_matches_closed_form() {
    let sc = Scenario::builtin("log_pair_d0").unwrap();
    let prep = sc.validate().unwrap();
    let fam = ExactFamily::detect(&sc.operator, &sc.data).unwrap();
    let t: f64 = 0.7;
    let u = fam.interior(&sc.data, &prep.grid, t);
    // u0 = phi(2x) (x^{1/2} w0 - x^{1/2} log x w1) + phi(x) x^2 c, transported along x e^{-t}, damped by e^{-b t}
    let (w0, w1, c2, b) = (1.0, 0.5, 0.7, 0.5);
    for (i, &x) in prep.grid.x.iter().enumerate().skip(1).step_by(23) {
        let xs = x * (-t).exp();
        let u0 = charflow::mellin::phi(2.0 * xs) * (xs.sqrt() * w0 - xs.sqrt() * xs.ln() * w1)
            + charflow::mellin::phi(xs) * xs * xs * c2;
        let want = (-b * t).exp() * u0;
        assert!((u.values[i] - Complex64::new(want, 0.0)).norm() <= 1e-13 * want.abs().max(1.0), "x={x}");
    }
    let tr = fam.traces(&sc.data, &prep.ptype, &prep.grid.y, &[t]);
    let g0 = charflow::trace_cascade::find_trace(&tr, &charflow::asymtype::Pair::real(-0.5, 0)).unwrap();
    let want = (-(0.5 + b) * t).exp() * (w0 + t * w1);
    assert!((g0.slice(0)[0].re - want).abs() < 1e-14);

    let forced = Scenario::builtin("taylor_d0").unwrap();
    assert!(matches!(ExactFamily::detect(&forced.operator, &forced.data), Err(HarnessError::UnsupportedExactFamily(_))));
}

#[test]
fn fourier_exact_family_against_solver() {
    // A = I, constant A1 and B coupling the components: per-mode matrix exponential
    let src = r#"
name = "fourier"
[operator]
n = 2
d = 1
T = 0.5
A = [[[1.0, 0.0], [0.0, 1.0]]]
A1 = [[[0.0, 1.0], [1.0, 0.0]]]
B = [[[0.0, 0.5], [-0.5, 0.0]]]
hyperbolicity = "symmetric"
[asymptotics]
delta = 0.0
theta = 1.5
entries = [{ re = -0.5, mult = 1 }]
[grid]
ny = 16
grading = { kind = "geometric", x_min = 1e-8, log_step = 0.02 }
[[data.u0]]
kind = "power"
exponent = 0.5
w = ["cos(y)", "0.5*sin(2*y)"]
"#;
    let sc = Scenario::from_toml(src).unwrap();
    let r = verify_traces(&sc.validate().unwrap(), 0).unwrap();
    assert!(r.interior_rel_err.unwrap() < 2e-3, "{:?}", r.interior_rel_err);
    assert!(r.cascade_vs_exact.iter().all(|c| c.rel_err_l2 < 1e-7), "{:?}", r.cascade_vs_exact);
}

#[test]
fn manufactured_data_examples() {
    let zero = Scenario::from_toml(SCALAR).unwrap();
    let prep = zero.validate().unwrap();
    let m = manufactured(&zero.operator, &prep.ptype, &zero.data, &prep.grid, &[0.0, 0.5]).unwrap();
    assert!(m.u0.values.iter().all(|v| v.norm() == 0.0));
    assert!(m.interior.iter().flat_map(|f| &f.values).all(|v| v.norm() == 0.0));
    assert!(m.traces.iter().flat_map(|t| &t.values).all(|v| v.norm() == 0.0));

    // conjugate exponents with conjugate coefficients give real data
    let conj = SCALAR.replace(
        "entries = [{ re = -0.5, mult = 1 }]",
        "entries = [{ re = -0.5, im = 1.0, mult = 1 }, { re = -0.5, im = -1.0, mult = 1 }]",
    ) + r#"
[[data.u0]]
kind = "potential"
p_re = -0.5
p_im = 1.0
w = ["1 + 0.5*i"]
[[data.u0]]
kind = "potential"
p_re = -0.5
p_im = -1.0
w = ["1 - 0.5*i"]
"#;
    let sc = Scenario::from_toml(&conj).unwrap();
    let prep = sc.validate().unwrap();
    let m = manufactured(&sc.operator, &prep.ptype, &sc.data, &prep.grid, &[0.3]).unwrap();
    let scale = m.u0.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(scale > 0.1);
    assert!(m.u0.values.iter().all(|v| v.im.abs() <= 1e-15 * scale));
    assert!(m.interior[0].values.iter().all(|v| v.im.abs() <= 1e-14 * scale));
}

#[test]
fn refinement_halves_steps() {
    let sc = Scenario::builtin("power_d0").unwrap();
    let r = sc.refined(2);
    assert_eq!(r.grid.grading, Grading::Geometric { x_min: 1e-8, log_step: 0.01 });
    let mut w = Scenario::builtin("taylor_d1_symmetric").unwrap();
    w.fit.refine_window = true;
    assert_eq!(w.refined(1).fit.options.window, Some((4e-8, 0.025)));
}
