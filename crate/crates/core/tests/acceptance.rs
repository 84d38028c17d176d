//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::process::Command;
use std::time::Instant;

use common::{bin, config_path, run_config};
use schauder_lab::commutant::{commutant_obstruction, DEFAULT_BOUND};
use schauder_lab::constructions::{design_case4_weights, eigenvalue_exclusion_check};
use schauder_lab::opcore::{OperatorExpr, TruncationWindow, C64};
use schauder_lab::schauder::{basis_const_estimate, blowup, unconditional_const_estimate, SchauderSystem};
use schauder_lab::seqcore::{ScalarSeq, SeqDomain};
use schauder_lab::spectral::{fredholm_kernel, kernel_residual, shift_spectrum, spectral_radius_estimate, SpectrumShape};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn circle_case() -> Check {
    let mut worst = 0.0f64;
    for c in [0.5, 1.0, 2.0] {
        let t = Instant::now();
        let w = ScalarSeq::constant_bilateral(c);
        let s = shift_spectrum(&w).map_err(err)?;
        ensure(
            s.shape == SpectrumShape::Annulus { r_in: c, r_out: c },
            format!("c={c}: spectrum {:?}", s.shape),
        )?;
        let r = spectral_radius_estimate(&OperatorExpr::weighted_shift(w), TruncationWindow::symmetric(256), 32)
            .map_err(err)?;
        ensure(
            r.estimate >= 0.9 * c && r.estimate <= c,
            format!("c={c}: radius estimate {} outside [0.9c, c]", r.estimate),
        )?;
        let secs = t.elapsed().as_secs_f64();
        ensure(secs < 30.0, format!("c={c}: {secs:.1}s"))?;
        worst = worst.max(secs);
    }
    Ok(format!("annulus(c,c) and radius in [0.9c,c] for c in {{1/2,1,2}}, slowest {worst:.2}s"))
}

fn kernel_case() -> Check {
    let t = Instant::now();
    let w = ScalarSeq::two_sided(ScalarSeq::constant(2.0), ScalarSeq::constant(0.5)).map_err(err)?;
    let k = fredholm_kernel(&w, C64::new(1.0, 0.0), TruncationWindow::symmetric(64)).map_err(err)?;
    let mut coef_err = 0.0f64;
    for n in -64..=64i64 {
        let x = k.get(n).ok_or(format!("missing coefficient {n}"))?;
        coef_err = coef_err.max((x - C64::new(2f64.powi(-(n.abs() as i32)), 0.0)).norm());
    }
    ensure(coef_err <= 1e-12, format!("coefficient error {coef_err:e}"))?;
    let residual = kernel_residual(&w, &k).map_err(err)?;
    ensure(residual <= 1e-10, format!("residual {residual:e}"))?;
    let norm_err = (k.window_norm_sq() - 5.0 / 3.0).abs();
    ensure(norm_err <= 1e-10, format!("||x||^2 off by {norm_err:e}"))?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 5.0, format!("{secs:.1}s"))?;
    Ok(format!("coef err {coef_err:.1e}, residual {residual:.1e}, |norm^2-5/3| {norm_err:.1e}, {secs:.2}s"))
}

fn structural_identities() -> Check {
    let t = Instant::now();
    let case1 = run_config("case1", "case1.json");
    ensure(case1.pass == Some(true), "case1 block identity or connectedness failed")?;
    let mismatches = &case1.report["block_identity"]["evidence"]["values"]["mismatches"];
    ensure(mismatches.as_f64() == Some(0.0), format!("case1 mismatches {mismatches}"))?;
    let case2 = run_config("case2", "case2.json");
    ensure(case2.pass == Some(true), "case2 factorization failed")?;
    // the dyadic λ as a second shipped example
    let lambda = ScalarSeq::two_sided(ScalarSeq::geometric(1.0, 0.5).map_err(err)?, ScalarSeq::geometric(1.0, 0.5).map_err(err)?)
        .map_err(err)?;
    let m = schauder_lab::constructions::build_case2_model(lambda).map_err(err)?;
    ensure(m.factorization_identity(128).map_err(err)?.pass, "dyadic case2 factorization failed")?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 10.0, format!("{secs:.1}s"))?;
    Ok(format!("case1 and case2 forms agree exactly on +-128, {secs:.2}s"))
}

fn case4() -> Check {
    let t = Instant::now();
    let d = design_case4_weights(0.5, 1.0, 2.0, 100).map_err(err)?;
    ensure(d.profile_ok, "design reports profile failure")?;
    // independent recomputation of P_n from the schedule
    let mut p = 1.0f64;
    for n in 1..=100usize {
        p *= d.gamma[n - 1] / d.eta_sq;
        ensure(p >= 1.0 / (n as f64).sqrt(), format!("P_{n} = {p} < 1/sqrt({n})"))?;
    }
    let c = eigenvalue_exclusion_check(&d, 1_000_000);
    let sum = c.get("partial_sum").unwrap();
    let threshold = 0.9 * 1e6f64.ln();
    ensure(c.pass && sum >= threshold, format!("partial sum {sum} < {threshold}"))?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 20.0, format!("{secs:.1}s"))?;
    Ok(format!("P_n >= 1/sqrt(n) for n <= 100, partial sum {sum:.3} >= {threshold:.3}, {secs:.2}s"))
}

fn commutant() -> Check {
    let g = ScalarSeq::geometric(1.0, 0.5).map_err(err)?;
    let dyadic = ScalarSeq::two_sided(g.clone(), g).map_err(err)?;
    let c = commutant_obstruction(&dyadic, 1, 30, DEFAULT_BOUND).map_err(err)?;
    let max = c.evidence.max_ratio.map(|n| n.0).unwrap_or(0.0);
    ensure(c.pass && max >= 1e9, format!("dyadic max ratio {max}"))?;
    let cross = c.get("max_cross_check_rel_error").unwrap();
    ensure(cross <= 1e-12, format!("cross-check error {cross:e}"))?;
    let constant = commutant_obstruction(&ScalarSeq::constant_bilateral(1.0), 1, 30, DEFAULT_BOUND).map_err(err)?;
    ensure(!constant.pass, "constant weights passed")?;
    ensure(
        constant.get("max_cross_check_rel_error").unwrap() <= 1e-12,
        "constant cross-check error",
    )?;
    Ok(format!("dyadic max ratio {max:e} (pass), constant weights fail, cross-check {cross:.1e}"))
}

fn basis_constants() -> Check {
    let w = TruncationWindow::prefix(16);
    let onb = basis_const_estimate(&SchauderSystem::onb(), 8, w).map_err(err)?;
    ensure(onb.m == 1.0, format!("ONB M = {}", onb.m))?;
    let skew = SchauderSystem::skew_pair();
    let m = basis_const_estimate(&skew, 2, w).map_err(err)?.m;
    let u = unconditional_const_estimate(&skew, 2, w, 0, 0).map_err(err)?;
    let s2 = std::f64::consts::SQRT_2;
    ensure(u.exhaustive, "skew search not exhaustive")?;
    ensure((m - s2).abs() <= 1e-12 && (u.value - s2).abs() <= 1e-12, format!("skew M {m}, M_ub {}", u.value))?;
    let base = SchauderSystem::example35(ScalarSeq::loglog(1.0).map_err(err)?).map_err(err)?;
    let w = TruncationWindow::prefix(60);
    let reference = basis_const_estimate(&base, 24, w).map_err(err)?;
    let diagonals = [
        ScalarSeq::constant(3.0),
        ScalarSeq::constant(-0.25),
        ScalarSeq::geometric(1.0, 0.5).map_err(err)?,
        ScalarSeq::harmonic_shift(2.0, 1.0).map_err(err)?,
        ScalarSeq::periodic(vec![1.0, -2.0, 0.5], 0, SeqDomain::Unilateral).map_err(err)?,
    ];
    for d in diagonals {
        let scaled = SchauderSystem::scaled(d.clone(), base.clone()).map_err(err)?;
        let r = basis_const_estimate(&scaled, 24, w).map_err(err)?;
        ensure(r.norms == reference.norms, format!("scaling by {d:?} changed the basis constants"))?;
    }
    Ok(format!("ONB M = 1, skew M = M_ub = sqrt2 (err {:.1e}), 5 scalings exact", (u.value - s2).abs()))
}

fn conditional_example() -> Check {
    let t = Instant::now();
    let sys = SchauderSystem::example35(ScalarSeq::loglog(1.0).map_err(err)?).map_err(err)?;
    let worst = (0..=200).map(|n| sys.biorthogonality_residual(n)).fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("biorthogonality residual {worst:e}"))?;
    let r = basis_const_estimate(&sys, 128, TruncationWindow::new(0, 260).map_err(err)?).map_err(err)?;
    let even: Vec<f64> = (1..=64).map(|k| r.norms[2 * k - 1]).collect();
    ensure(even.windows(2).all(|p| p[0] <= p[1]), "||Q_2k|| not nondecreasing")?;
    let w = TruncationWindow::new(0, 100).map_err(err)?;
    let u10 = unconditional_const_estimate(&sys, 10, w, 2000, 7).map_err(err)?.value;
    let u40 = unconditional_const_estimate(&sys, 40, w, 2000, 7).map_err(err)?.value;
    ensure(u40 > u10, format!("uncond K=40 {u40} <= K=10 {u10}"))?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("{secs:.1}s"))?;
    Ok(format!("biorth {worst:.1e}, ||Q_2k|| nondecreasing, uncond {u10:.4} -> {u40:.4}, {secs:.2}s"))
}

fn blowing_up() -> Check {
    // α_n = 2^{-n} for n ≥ 1, stored from index 0
    let alpha = ScalarSeq::geometric(0.5, 0.5).map_err(err)?;
    let r = blowup(&SchauderSystem::onb(), &alpha, TruncationWindow::prefix(64), 20).map_err(err)?;
    for n in 0..=20usize {
        let exact = 2f64.powi(-(n as i32 + 1));
        ensure(r.errors[n] == exact, format!("n={n}: error {} != {exact}", r.errors[n]))?;
        let tail = 2f64.powi(-(n as i32));
        ensure(r.errors[n] <= tail && r.bounds[n] >= r.errors[n], format!("n={n}: bound {}", r.bounds[n]))?;
    }
    ensure(r.pass, "report flags failure")?;
    Ok("||T - K_n|| = 2^-(n+1) exactly and <= 2^-n for n <= 20".into())
}

fn sandwich() -> Check {
    let mut checked = 0;
    for file in ["disturb_identity.json", "disturb_scalar.json", "disturb_patch.json"] {
        for system in [r#"{"structure":"onb"}"#, r#"{"structure":"example35","alpha":{"kind":"loglog","c":1.0}}"#] {
            let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(config_path(file)).unwrap()).unwrap();
            cfg["system"] = serde_json::from_str(system).unwrap();
            let tmp = tempfile::NamedTempFile::new().map_err(err)?;
            std::fs::write(tmp.path(), cfg.to_string()).map_err(err)?;
            let cli = <schauder_lab::cli::Cli as clap::Parser>::try_parse_from([
                "schauder-lab",
                "disturb",
                "--config",
                tmp.path().to_str().unwrap(),
            ])
            .map_err(err)?;
            let out = schauder_lab::cli::execute(&cli.command, &cfg.to_string()).map_err(err)?;
            let v = &out.report["certificate"]["evidence"]["values"]["violations"];
            ensure(out.pass == Some(true), format!("{file} on {system}: violations {v}"))?;
            let q = &out.report["certificate"]["evidence"]["series"]["q_norms"];
            ensure(q.as_array().map(Vec::len) == Some(64), format!("{file}: expected 64 values of k"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (X, system) pairs hold for all k <= 64 with delta = 0.1"))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut compared = 0;
    for (cmd, file) in [
        ("uncond", "uncond_example35.json"),
        ("basisconst", "basisconst_example35.json"),
        ("spectrum", "spectrum_constant.json"),
        ("commutant-cert", "commutant_dyadic.json"),
    ] {
        let mut reports = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{cmd}-{run}.json"));
            let status = Command::new(bin())
                .args([cmd, "--config", config_path(file).to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7"])
                .status()
                .map_err(err)?;
            ensure(status.code() == Some(0), format!("{cmd}: exit {status}"))?;
            reports.push(std::fs::read(&out).map_err(err)?);
        }
        ensure(reports[0] == reports[1], format!("{cmd}: reports differ"))?;
        compared += 1;
    }
    Ok(format!("{compared} commands byte-identical across two runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("circle case spectrum", circle_case),
        ("kernel in the gap", kernel_case),
        ("case 1/2 structural identities", structural_identities),
        ("case 4 design and exclusion", case4),
        ("commutant obstruction", commutant),
        ("basis constants", basis_constants),
        ("conditional example evidence", conditional_example),
        ("blowing-up operator", blowing_up),
        ("small-disturbance sandwich", sandwich),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
