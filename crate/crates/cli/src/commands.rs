//! Subcommand implementations: each resolves the config, runs estimators
//! from the library, writes CSV/JSON artifacts, and prints a JSON summary.

use serde_json::json;

use nasym::bernoulli::{
    entropy, equilibrium_from_potential, expected_potential, gibbs_ratio, lln_diagnostic,
    pressure_window_estimate, sample_path, Verdict,
};
use nasym::expansive::{
    falsify_expansiveness_shift, planted_meet, pressure_via_orbits, semiconjugacy_residual,
    step_potential, sue_modulus_shift, CodingMap,
};
use nasym::potentials::PotentialSeq;
use nasym::pressure::{critical_s, separated_value, sn_sequence, CriticalBracket, MeasureKind};
use nasym::seqspace::Word;
use nasym::Error;

use crate::config::{Resolved, SystemKind};
use crate::output::{fmt_f64, OutDir};
use crate::CliError;

fn critical_json(
    r: Result<CriticalBracket, Error>,
) -> Result<(serde_json::Value, bool), CliError> {
    match r {
        Ok(b) => Ok((
            json!({ "status": "bracketed", "lo": b.lo, "hi": b.hi, "evaluations": b.evaluations }),
            false,
        )),
        Err(Error::Undetermined(msg)) => {
            Ok((json!({ "status": "undetermined", "detail": msg }), true))
        }
        Err(e) => Err(CliError::Config(format!("critical exponent: {e}"))),
    }
}

/// `pressure` (and `entropy`, which forces the zero potential): capacity
/// sums with window brackets plus cover/packing critical-exponent
/// bisections at the configured truncation depth.
pub fn cmd_pressure(cfg: &Resolved, out: &OutDir, force_zero: bool) -> Result<i32, CliError> {
    let m = cfg.alphabet()?;
    let f = if force_zero {
        PotentialSeq::zero(&m)
    } else {
        cfg.potential(&m)?
    };
    let policy = cfg.policy()?;
    let n_hi = cfg.file.run.n_hi.unwrap_or(200);
    let window = cfg.window(n_hi);
    let est = sn_sequence(&m, &f, policy, window).map_err(CliError::from)?;

    let mut csv = String::from("n,s_n,tail_inf,tail_sup\n");
    for &(n, s) in &est.s_values {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            n,
            fmt_f64(s),
            fmt_f64(est.tail_inf(n)),
            fmt_f64(est.tail_sup(n))
        ));
    }
    out.write("pressure.csv", &csv)?;

    let depth_max = cfg.file.run.depth_max.unwrap_or(12);
    let rank_min = cfg.file.run.rank_min.unwrap_or(2);
    let tol = cfg.file.run.tol.unwrap_or(1e-3);
    let empty = Word::empty(0);
    let (cover, cover_undet) = critical_json(critical_s(
        MeasureKind::Cover,
        &m,
        &f,
        rank_min,
        depth_max,
        &empty,
        tol,
    ))?;
    let (packing, packing_undet) = critical_json(critical_s(
        MeasureKind::Packing,
        &m,
        &f,
        rank_min,
        depth_max,
        &empty,
        tol,
    ))?;

    // truncated outer-measure values at the window estimate, with the
    // optimizing cylinder families spelled out
    let probe_s = 0.5 * (est.liminf_bracket + est.limsup_bracket);
    let serialize = |r: &nasym::pressure::OuterMeasureResult| {
        json!({
            "s": r.s,
            "value": r.value,
            "rank_min": r.rank_min,
            "depth_max": r.depth_max,
            "optimizer": r.optimizer.words.iter()
                .map(|w| w.symbols().iter().map(u32::to_string).collect::<Vec<_>>().join(""))
                .collect::<Vec<_>>(),
        })
    };
    let probe_depth = depth_max.min(10);
    let cover_probe = nasym::pressure::bowen_outer_measure(
        &m,
        &f,
        nasym::pressure::SumSide::Upper,
        probe_s,
        rank_min.min(probe_depth),
        probe_depth,
        &empty,
    )
    .map_err(CliError::from)?;
    let packing_probe = nasym::pressure::packing_content(
        &m,
        &f,
        nasym::pressure::SumSide::Upper,
        probe_s,
        rank_min.min(probe_depth),
        probe_depth,
        &empty,
    )
    .map_err(CliError::from)?;
    let outer = json!({
        "command": if force_zero { "entropy" } else { "pressure" },
        "config_sha256": cfg.hash,
        "cover_measure": serialize(&cover_probe),
        "packing_content": serialize(&packing_probe),
    });
    out.write(
        "outer_measure.json",
        &format!("{}\n", serde_json::to_string_pretty(&outer).expect("serializable")),
    )?;

    let summary = json!({
        "command": if force_zero { "entropy" } else { "pressure" },
        "config_sha256": cfg.hash,
        "window": [window.0, window.1],
        "bracket": [est.liminf_bracket, est.limsup_bracket],
        "cauchy_gap": est.cauchy_gap,
        "s_n_hi": est.s_at(window.1),
        "critical_s": { "cover": cover, "packing": packing,
                        "depth_max": depth_max, "rank_min": rank_min, "tol": tol },
    });
    let text = serde_json::to_string_pretty(&summary).expect("serializable");
    out.write("summary.json", &format!("{text}\n"))?;
    println!("{text}");
    Ok(if cover_undet || packing_undet { 3 } else { 0 })
}

/// `measure`: entropy/pressure window brackets for the configured
/// Bernoulli measure, the law-of-large-numbers verdict, a Gibbs-ratio
/// scan along sampled points, and the hypothesis report.
pub fn cmd_measure(cfg: &Resolved, out: &OutDir) -> Result<i32, CliError> {
    let m = cfg.alphabet()?;
    let mu = cfg.measure(&m)?;
    let has_potential = cfg.file.potential.is_some();
    let f = cfg.potential(&m)?;
    let policy = cfg.policy()?;
    let seed = cfg.seed()?;
    let n_hi = cfg.file.run.n_hi.unwrap_or(200);
    let window = cfg.window(n_hi);
    let samples = cfg.file.run.samples.unwrap_or(1000);
    let lln_horizon = cfg.file.run.lln_horizon.unwrap_or(10_000);
    let gibbs_n = cfg.file.run.gibbs_n.unwrap_or(1000);

    let ent = pressure_window_estimate(&m, &mu, None, window).map_err(CliError::from)?;
    let pre = if has_potential {
        Some(pressure_window_estimate(&m, &mu, Some(&f), window).map_err(CliError::from)?)
    } else {
        None
    };

    let lln = lln_diagnostic(
        &m,
        &mu,
        if has_potential { Some(&f) } else { None },
        lln_horizon,
        samples,
        seed,
    )
    .map_err(CliError::from)?;
    let verdict = match lln.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    };

    // Gibbs ratios against the capacity proxy n * s_n
    let est = sn_sequence(&m, &f, policy, (1, gibbs_n)).map_err(CliError::from)?;
    let mut worst_dev: f64 = 0.0;
    let mut gibbs_csv = String::from("omega_seed,n,ratio\n");
    for i in 0..10u64 {
        let omega = sample_path(&mu, seed.wrapping_add(i), gibbs_n);
        for n in [gibbs_n / 100, gibbs_n / 10, gibbs_n] {
            let n = n.max(1);
            let proxy = n as f64 * est.s_at(n).expect("within range");
            let r = gibbs_ratio(&m, &mu, &f, &omega, n, proxy).map_err(CliError::from)?;
            worst_dev = worst_dev.max((r - 1.0).abs());
            gibbs_csv.push_str(&format!("{},{},{}\n", seed.wrapping_add(i), n, fmt_f64(r)));
        }
    }
    out.write("gibbs.csv", &gibbs_csv)?;

    // which pressure-formula hypothesis the inputs satisfy: (a) needs a
    // uniformly positive vector family, (b) a potential whose level values
    // converge pointwise (representable here as an eventually constant
    // periodic part)
    let clause_a = mu.p_star() > 0.0;
    let clause_b = f.eventually_constant_value().is_some();
    let summary = json!({
        "command": "measure",
        "config_sha256": cfg.hash,
        "seed": seed,
        "p_star": mu.p_star(),
        "hypotheses": {
            "p_star_positive": clause_a,
            "f_sup_norm": f.sup_norm(),
            "f_eventually_constant": clause_b,
            "applicable_clauses": match (clause_a, clause_b) {
                (true, true) => "a and b",
                (true, false) => "a",
                (false, true) => "b",
                (false, false) => "none",
            },
        },
        "entropy_bracket": [ent.liminf_bracket, ent.limsup_bracket],
        "pressure_bracket": pre.as_ref().map(|p| vec![p.liminf_bracket, p.limsup_bracket]),
        "entropy_level_0": entropy(&mu, 0),
        "mean_potential_level_0": if has_potential { Some(expected_potential(&m, &mu, &f, 0)) } else { None },
        "lln": {
            "horizon": lln.horizon, "samples": lln.samples,
            "mean": lln.mean, "expected": lln.expected,
            "distance": lln.distance, "std_err": lln.std_err,
            "verdict": verdict,
        },
        "gibbs": { "proxy": "n * s_n", "n_max": gibbs_n, "max_abs_deviation": worst_dev },
    });
    let text = serde_json::to_string_pretty(&summary).expect("serializable");
    out.write("measure.json", &format!("{text}\n"))?;
    println!("{text}");
    Ok(if lln.verdict == Verdict::Fail { 1 } else { 0 })
}

/// `equilibrium`: derive the softmax Bernoulli spec from the potential and
/// verify the defining identity H(p_j) + E(f_j) = log-weight(j).
pub fn cmd_equilibrium(cfg: &Resolved, out: &OutDir) -> Result<i32, CliError> {
    let m = cfg.alphabet()?;
    if cfg.file.potential.is_none() {
        return Err(CliError::Config(
            "equilibrium needs a potential section".into(),
        ));
    }
    let f = cfg.potential(&m)?;
    let policy = cfg.policy()?;
    let mu = equilibrium_from_potential(&m, &f, policy).map_err(CliError::from)?;
    let table = f.reduce(&m, policy);
    let span = m.transient_len() + m.period_len();
    let mut worst: f64 = 0.0;
    for j in 0..span.max(4) {
        let lhs = entropy(&mu, j) + expected_potential(&m, &mu, &f, j);
        worst = worst.max((lhs - table.log_weight(j)).abs());
    }
    let summary = json!({
        "command": "equilibrium",
        "config_sha256": cfg.hash,
        "vectors": { "head": mu.head_rows(), "period": mu.cycle_rows() },
        "p_star": mu.p_star(),
        "identity_residual": worst,
        "identity_ok": worst <= 1e-12,
    });
    let text = serde_json::to_string_pretty(&summary).expect("serializable");
    out.write("equilibrium.json", &format!("{text}\n"))?;
    println!("{text}");
    Ok(if worst <= 1e-12 { 0 } else { 1 })
}

/// `code`: on the interval system, itinerary coding round trips, the
/// semiconjugacy residual, and the orbit-pressure comparison against the
/// coded symbolic system; on the shift, the expansiveness falsifier and
/// the uniform-expansiveness modulus.
pub fn cmd_code(cfg: &Resolved, out: &OutDir) -> Result<i32, CliError> {
    let m = cfg.alphabet()?;
    let seed = cfg.seed()?;
    match cfg.system(&m)? {
        SystemKind::Interval(sys) => {
            let depth = cfg.file.run.code_depth.unwrap_or(50);
            let steps = cfg.file.run.code_steps.unwrap_or(20);
            let points = cfg.file.run.points.unwrap_or(1000);
            let code = CodingMap::new(&sys, 0);
            let mut worst_residual: f64 = 0.0;
            let mut worst_roundtrip: f64 = 0.0;
            let mut csv = String::from("x,residual,roundtrip_error,roundtrip_bound\n");
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..points {
                let x: f64 = rng.gen();
                let w = code.encode(x, depth).map_err(CliError::from)?;
                let r = semiconjugacy_residual(&sys, &w, steps).map_err(CliError::from)?;
                let decoded = code.decode(&w).map_err(CliError::from)?;
                let err = (decoded.value - x).abs();
                worst_residual = worst_residual.max(r);
                worst_roundtrip = worst_roundtrip.max(err - decoded.truncation_bound);
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(x),
                    fmt_f64(r),
                    fmt_f64(err),
                    fmt_f64(decoded.truncation_bound)
                ));
            }
            out.write("coding.csv", &csv)?;

            let n = cfg.file.run.n_hi.unwrap_or(10).min(24);
            let eps = cfg
                .file
                .system
                .as_ref()
                .and_then(|s| s.eps)
                .unwrap_or(0.2);
            let grid = cfg
                .file
                .system
                .as_ref()
                .and_then(|s| s.grid)
                .unwrap_or(1 << 13);
            let table = cfg.potential(&m)?.reduce(&m, cfg.policy()?);
            let step = step_potential(&m, &table);
            let orbit = pressure_via_orbits(&sys, &step, n, eps, grid).map_err(CliError::from)?;
            let symbolic = separated_value(&m, &cfg.potential(&m)?, n, eps)
                .map(|v| v.ln() / n as f64)
                .ok();

            let summary = json!({
                "command": "code",
                "config_sha256": cfg.hash,
                "seed": seed,
                "system": "interval_expanding",
                "points": points, "depth": depth, "steps": steps,
                "max_residual": worst_residual,
                "roundtrip_within_bound": worst_roundtrip <= 0.0,
                "orbit_pressure": {
                    "n": orbit.n, "eps": orbit.eps, "count": orbit.count,
                    "separated_rate": orbit.separated_rate,
                    "coded_symbolic_rate": symbolic,
                },
            });
            let text = serde_json::to_string_pretty(&summary).expect("serializable");
            out.write("code.json", &format!("{text}\n"))?;
            println!("{text}");
            Ok(0)
        }
        SystemKind::Shift => {
            let delta = cfg
                .file
                .system
                .as_ref()
                .and_then(|s| s.delta)
                .unwrap_or((-1.0f64).exp());
            let horizon = cfg
                .file
                .system
                .as_ref()
                .and_then(|s| s.horizon)
                .unwrap_or(40);
            let pairs = cfg.file.run.pairs.unwrap_or(10_000);
            let rep = falsify_expansiveness_shift(&m, delta, horizon, pairs, seed)
                .map_err(CliError::from)?;
            let mut meets_match = true;
            for s in &rep.separations {
                let meet = planted_meet(&s.a, &s.b, horizon + 8);
                if s.first_separating != meet {
                    meets_match = false;
                    break;
                }
            }
            let r_max = cfg.file.run.eps_r_max.unwrap_or(6);
            let ladder: Vec<f64> = (1..=r_max).map(|r| (-(r as f64)).exp()).collect();
            let moduli = sue_modulus_shift(delta, &ladder).map_err(CliError::from)?;
            let summary = json!({
                "command": "code",
                "config_sha256": cfg.hash,
                "seed": seed,
                "system": "shift",
                "delta": delta,
                "pairs_checked": rep.pairs_checked,
                "counterexamples": rep.counterexamples.len(),
                "separation_index_equals_meet": meets_match,
                "sue_modulus": moduli.iter().map(|(e, n)| json!({ "eps": e, "n": n })).collect::<Vec<_>>(),
            });
            let text = serde_json::to_string_pretty(&summary).expect("serializable");
            out.write("code.json", &format!("{text}\n"))?;
            println!("{text}");
            Ok(if rep.no_counterexample() && meets_match {
                0
            } else {
                1
            })
        }
    }
}
