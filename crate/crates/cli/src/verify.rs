//! The `verify` subcommand: a machine-readable property suite covering
//! oracle equivalences, certificates, identities, and coding residuals at
//! small sizes.  Each property reports pass/fail plus a counterexample
//! dump on failure.  A named fault can be injected to confirm that the
//! detectors detect.

use serde_json::json;

use nasym::bernoulli::{
    cylinder_measure, entropy, expected_potential, gibbs_ratio, lln_diagnostic, sample_path,
    BernoulliSpec, Verdict,
};
use nasym::expansive::{
    falsify_expansiveness_shift, generator_from_net, intersection_diameters, planted_meet,
    semiconjugacy_residual, sue_modulus, BaseMetric, CodingMap, IntervalNds,
};
use nasym::potentials::{birkhoff_sum, EnvelopePolicy, PotentialSeq};
use nasym::pressure::{
    bowen_outer_measure, packing_content, rank_uniformize, separated_value, sn_sequence,
    CylinderCover, RankDirection, SumSide,
};
use nasym::seqspace::{
    bowen_ball_rank, net_relation, words_of_rank, AlphabetSeq, BallSpec, NetRelation, PointPrefix,
    Word,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct PropertyResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Prop = (&'static str, fn(Option<&str>) -> Result<(), String>);

fn m2() -> AlphabetSeq {
    AlphabetSeq::constant(2).unwrap()
}

fn m23() -> AlphabetSeq {
    AlphabetSeq::cycle(vec![2, 3]).unwrap()
}

fn prop_net_oracle(_: Option<&str>) -> Result<(), String> {
    use std::collections::HashSet;
    let m = m23();
    let depth = 4;
    let mut words = vec![Word::empty(0)];
    for rank in 1..=depth {
        words.extend(words_of_rank(&m, 0, rank));
    }
    let extensions = |w: &Word| -> HashSet<Vec<u32>> {
        let tail = depth - w.len();
        words_of_rank(&m, w.len(), tail)
            .map(|suffix| {
                let mut v = w.symbols().to_vec();
                v.extend_from_slice(suffix.symbols());
                v
            })
            .collect()
    };
    for u in &words {
        for v in &words {
            let eu = extensions(u);
            let ev = extensions(v);
            let expected = if eu == ev {
                NetRelation::Equal
            } else if ev.is_subset(&eu) {
                NetRelation::FirstContainsSecond
            } else if eu.is_subset(&ev) {
                NetRelation::SecondContainsFirst
            } else if eu.is_disjoint(&ev) {
                NetRelation::Disjoint
            } else {
                return Err(format!("cylinders {u:?} and {v:?} overlap without nesting"));
            };
            let got = net_relation(u, v).map_err(|e| e.to_string())?;
            if got != expected {
                return Err(format!("net_relation({u:?}, {v:?}) = {got:?}, oracle {expected:?}"));
            }
        }
    }
    Ok(())
}

fn prop_ball_ranks(_: Option<&str>) -> Result<(), String> {
    for n in 1..=10usize {
        for r in 1..=5usize {
            let eps = (-(r as f64)).exp();
            let open = bowen_ball_rank(&BallSpec { n, eps, closed: false }).map_err(|e| e.to_string())?;
            let closed = bowen_ball_rank(&BallSpec { n, eps, closed: true }).map_err(|e| e.to_string())?;
            if open.rank != closed.rank + 1 {
                return Err(format!("ladder ranks at n={n}, r={r}: open {} closed {}", open.rank, closed.rank));
            }
        }
    }
    Ok(())
}

fn prop_birkhoff_recurrence(_: Option<&str>) -> Result<(), String> {
    let m = m23();
    let f = PotentialSeq::first_coord(&m, vec![], vec![vec![0.4, -0.1], vec![0.2, 0.0, -0.5]])
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let syms: Vec<u32> = (0..52).map(|j| rng.gen_range(1..=m.size(j))).collect();
        let omega = PointPrefix::finite(0, syms);
        let n = rng.gen_range(0..50usize);
        let s_n = birkhoff_sum(&m, &f, &omega, n).map_err(|e| e.to_string())?;
        let s_n1 = birkhoff_sum(&m, &f, &omega, n + 1).map_err(|e| e.to_string())?;
        let mut shifted = omega.clone();
        for _ in 0..n {
            shifted = shifted.shift().unwrap();
        }
        let term = f.value(&m, n, shifted.curtail(1).unwrap().symbols());
        if s_n1 != s_n + term {
            return Err(format!("S_(n+1) != S_n + term at n={n}"));
        }
    }
    Ok(())
}

fn prop_dp_oracle(_: Option<&str>) -> Result<(), String> {
    // exhaustive covers at depth 3 against the tree optimizers
    let m = m2();
    let empty = Word::empty(0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    fn all_covers(m: &AlphabetSeq, u: &Word, n_min: usize, depth: usize) -> Vec<Vec<Word>> {
        let mut out = Vec::new();
        if u.len() >= n_min.max(1) {
            out.push(vec![u.clone()]);
        }
        if u.len() < depth {
            let mut combos: Vec<Vec<Word>> = vec![Vec::new()];
            for i in 1..=m.size(u.len()) {
                let child = all_covers(m, &u.extended(i), n_min, depth);
                let mut next = Vec::new();
                for c in &combos {
                    for cc in &child {
                        let mut v = c.clone();
                        v.extend(cc.iter().cloned());
                        next.push(v);
                    }
                }
                combos = next;
            }
            out.extend(combos);
        }
        out
    }
    for _ in 0..6 {
        let s: f64 = rng.gen_range(-0.5..1.5);
        let rows = vec![vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]];
        let f = PotentialSeq::first_coord(&m, vec![], rows).map_err(|e| e.to_string())?;
        let table = f.reduce(&m, EnvelopePolicy::Upper);
        let weight = |w: &Word| -> f64 {
            let acc: f64 = w.symbols().iter().enumerate().map(|(j, &sym)| table.value(j, sym)).sum();
            (acc - w.len() as f64 * s).exp()
        };
        let covers = all_covers(&m, &Word::empty(0), 1, 3);
        let brute_min = covers
            .iter()
            .map(|c| c.iter().map(&weight).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let brute_max = covers
            .iter()
            .map(|c| c.iter().map(&weight).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let dp_min = bowen_outer_measure(&m, &f, SumSide::Upper, s, 1, 3, &empty)
            .map_err(|e| e.to_string())?
            .value;
        let dp_max = packing_content(&m, &f, SumSide::Upper, s, 1, 3, &empty)
            .map_err(|e| e.to_string())?
            .value;
        if (dp_min - brute_min).abs() / brute_min.max(1.0) > 1e-12 {
            return Err(format!("cover dp {dp_min} vs brute {brute_min} at s={s}"));
        }
        if (dp_max - brute_max).abs() / brute_max.max(1.0) > 1e-12 {
            return Err(format!("packing dp {dp_max} vs brute {brute_max} at s={s}"));
        }
    }
    Ok(())
}

fn prop_rank_certificates(_: Option<&str>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let m = m23();
        let mut words = Vec::new();
        let mut stack = vec![Word::empty(0)];
        while let Some(u) = stack.pop() {
            if u.is_empty() || (u.len() < 4 && rng.gen_bool(0.5)) {
                for i in 1..=m.size(u.len()) {
                    stack.push(u.extended(i));
                }
            } else {
                words.push(u);
            }
        }
        let cover = CylinderCover::new(words).unwrap();
        let f = PotentialSeq::first_coord(
            &m,
            vec![],
            vec![
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            ],
        )
        .map_err(|e| e.to_string())?;
        let s = rng.gen_range(-1.0..1.5);
        for dir in [RankDirection::Lower, RankDirection::Upper] {
            let cert = rank_uniformize(&m, &cover, &f, s, dir).map_err(|e| e.to_string())?;
            let ok = match dir {
                RankDirection::Lower => cert.uniform_sum <= cert.cover_sum,
                RankDirection::Upper => cert.uniform_sum >= cert.cover_sum,
            };
            if !ok {
                return Err(format!(
                    "certificate violated: dir {dir:?} cover {} uniform {} at rank {}",
                    cert.cover_sum, cert.uniform_sum, cert.n_star
                ));
            }
        }
    }
    Ok(())
}

fn prop_separated_counts(_: Option<&str>) -> Result<(), String> {
    let m = m2();
    let zero = PotentialSeq::zero(&m);
    let eps = (-1.0f64).exp();
    for n in 1..=10usize {
        let p = separated_value(&m, &zero, n, eps).map_err(|e| e.to_string())?;
        if p != (1u64 << n) as f64 {
            return Err(format!("separated count {p} != 2^{n}"));
        }
    }
    Ok(())
}

fn equilibrium_vectors(m: &AlphabetSeq, f: &PotentialSeq, inject: Option<&str>) -> Result<BernoulliSpec, String> {
    let table = f.reduce(m, EnvelopePolicy::Midpoint);
    // denominator fault: scales the softmax normalizer, breaking the
    // equilibrium identity and the Gibbs ratio band
    let denom_scale = if inject == Some("softmax-denominator") { 1.01 } else { 1.0 };
    let softmax = |row: &[f64]| -> Vec<f64> {
        let z: f64 = row.iter().map(|a| a.exp()).sum::<f64>() * denom_scale;
        row.iter().map(|a| a.exp() / z).collect()
    };
    let head: Vec<Vec<f64>> = table.head_rows().iter().map(|r| softmax(r)).collect();
    let cycle: Vec<Vec<f64>> = table.cycle_rows().iter().map(|r| softmax(r)).collect();
    if denom_scale == 1.0 {
        BernoulliSpec::new(m, head, cycle).map_err(|e| e.to_string())
    } else {
        BernoulliSpec::new_unnormalized(m, head, cycle).map_err(|e| e.to_string())
    }
}

fn prop_equilibrium_identity(inject: Option<&str>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..25 {
        let m = m23();
        let f = PotentialSeq::first_coord(
            &m,
            vec![],
            vec![
                vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            ],
        )
        .map_err(|e| e.to_string())?;
        let mu = equilibrium_vectors(&m, &f, inject)?;
        let table = f.reduce(&m, EnvelopePolicy::Midpoint);
        for j in 0..4 {
            let lhs = entropy(&mu, j) + expected_potential(&m, &mu, &f, j);
            let rhs = table.log_weight(j);
            if (lhs - rhs).abs() > 1e-12 {
                return Err(format!("identity residual {} at level {j}", lhs - rhs));
            }
        }
    }
    Ok(())
}

fn prop_gibbs_ratio(inject: Option<&str>) -> Result<(), String> {
    let m = m2();
    let f = PotentialSeq::first_coord(&m, vec![], vec![vec![0.0, std::f64::consts::LN_2]])
        .map_err(|e| e.to_string())?;
    let mu = equilibrium_vectors(&m, &f, inject)?;
    let est = sn_sequence(&m, &f, EnvelopePolicy::Midpoint, (1, 400)).map_err(|e| e.to_string())?;
    for seed in 0..10u64 {
        let omega = sample_path(&mu, seed, 400);
        for n in [40usize, 400] {
            let proxy = n as f64 * est.s_at(n).unwrap();
            let r = gibbs_ratio(&m, &mu, &f, &omega, n, proxy).map_err(|e| e.to_string())?;
            if (r - 1.0).abs() > 1e-10 {
                return Err(format!("gibbs ratio {r} at n={n}, seed {seed}"));
            }
        }
    }
    Ok(())
}

fn prop_additivity(_: Option<&str>) -> Result<(), String> {
    let m = m23();
    let mu = BernoulliSpec::new(&m, vec![], vec![vec![0.3, 0.7], vec![0.2, 0.45, 0.35]])
        .map_err(|e| e.to_string())?;
    for rank in 0..7 {
        for w in words_of_rank(&m, 0, rank) {
            let parent = cylinder_measure(&mu, &w);
            let children: f64 = (1..=m.size(rank)).map(|i| cylinder_measure(&mu, &w.extended(i))).sum();
            if (parent - children).abs() > 1e-12 {
                return Err(format!("additivity off by {} below {w:?}", parent - children));
            }
        }
    }
    Ok(())
}

fn prop_lln_degenerate(_: Option<&str>) -> Result<(), String> {
    let m = m2();
    let mu = BernoulliSpec::uniform(&m);
    let stats = lln_diagnostic(&m, &mu, None, 200, 64, 5).map_err(|e| e.to_string())?;
    if stats.distance != 0.0 || stats.verdict != Verdict::Pass {
        return Err(format!("uniform case: distance {}, verdict {:?}", stats.distance, stats.verdict));
    }
    let a = lln_diagnostic(&m, &mu, None, 200, 64, 5).map_err(|e| e.to_string())?;
    if a.mean.to_bits() != stats.mean.to_bits() {
        return Err("reruns with one seed disagree".into());
    }
    Ok(())
}

fn prop_coding_roundtrip(_: Option<&str>) -> Result<(), String> {
    let sys = IntervalNds::new(m23(), BaseMetric::Circle);
    let code = CodingMap::new(&sys, 0);
    for i in 0..50u64 {
        let w = code.encode_fraction(i * 13 + 1, 997, 40).map_err(|e| e.to_string())?;
        let d = code.decode(&w).map_err(|e| e.to_string())?;
        let x = (i * 13 + 1) as f64 / 997.0;
        if (d.value - x).abs() > d.truncation_bound + 1e-15 {
            return Err(format!("roundtrip error {} exceeds bound {}", (d.value - x).abs(), d.truncation_bound));
        }
    }
    Ok(())
}

fn prop_coding_residual(_: Option<&str>) -> Result<(), String> {
    let sys = IntervalNds::new(m23(), BaseMetric::Circle);
    let code = CodingMap::new(&sys, 0);
    for i in 1..40u64 {
        let w = code.encode_fraction(i, 41, 50).map_err(|e| e.to_string())?;
        let r = semiconjugacy_residual(&sys, &w, 20).map_err(|e| e.to_string())?;
        if r > 1e-9 {
            return Err(format!("residual {r} at {i}/41"));
        }
    }
    Ok(())
}

fn prop_shift_separation(_: Option<&str>) -> Result<(), String> {
    let m = m23();
    let rep = falsify_expansiveness_shift(&m, (-1.0f64).exp(), 30, 300, 2).map_err(|e| e.to_string())?;
    if !rep.no_counterexample() {
        return Err(format!("{} counterexamples", rep.counterexamples.len()));
    }
    for s in &rep.separations {
        let meet = planted_meet(&s.a, &s.b, 38);
        if s.first_separating != meet {
            return Err(format!("separation {:?} != meet {:?}", s.first_separating, meet));
        }
    }
    Ok(())
}

fn prop_generator_diameters(_: Option<&str>) -> Result<(), String> {
    let sys = IntervalNds::new(m2(), BaseMetric::Circle);
    let cover = generator_from_net(&sys, 0.3, 0.07, 2).map_err(|e| e.to_string())?;
    if !cover.verify_lebesgue(&sys, 256) {
        return Err("declared Lebesgue number fails on the grid".into());
    }
    let diams = intersection_diameters(&sys, &cover, 8, 10, 16).map_err(|e| e.to_string())?;
    for w in diams.windows(2) {
        if w[1] > w[0] + 1e-12 {
            return Err("intersection diameters increased".into());
        }
    }
    let moduli = sue_modulus(&sys, 0.3, &[0.05], 512, 32).map_err(|e| e.to_string())?;
    let n = moduli[0].1.ok_or("no modulus at delta = 0.3")?;
    if n > 16 || diams[n - 1] > 0.05 + 1e-9 {
        return Err(format!("diameter {} at modulus {n}", diams[n.min(16) - 1]));
    }
    Ok(())
}

const PROPS: &[Prop] = &[
    ("net-relation-oracle", prop_net_oracle),
    ("bowen-ball-ranks", prop_ball_ranks),
    ("birkhoff-recurrence", prop_birkhoff_recurrence),
    ("cover-packing-dp-oracle", prop_dp_oracle),
    ("rank-uniformization-certificates", prop_rank_certificates),
    ("separated-counts", prop_separated_counts),
    ("equilibrium-identity", prop_equilibrium_identity),
    ("gibbs-ratio", prop_gibbs_ratio),
    ("measure-additivity", prop_additivity),
    ("lln-degenerate", prop_lln_degenerate),
    ("coding-roundtrip", prop_coding_roundtrip),
    ("semiconjugacy-residual", prop_coding_residual),
    ("shift-separation-index", prop_shift_separation),
    ("generator-diameters", prop_generator_diameters),
];

/// Runs the suite (filtered by substring when `only` is given), printing a
/// JSON report.  Exit 1 on any failure, exit 2 on an empty selection.
pub fn run_suite(only: Option<&str>, inject: Option<&str>) -> i32 {
    let selected: Vec<&Prop> = PROPS
        .iter()
        .filter(|(name, _)| only.map(|o| name.contains(o)).unwrap_or(true))
        .collect();
    if selected.is_empty() {
        eprintln!("verify: no properties match {:?}", only.unwrap_or(""));
        return 2;
    }
    let mut results = Vec::new();
    let mut all_pass = true;
    for (name, f) in selected {
        let outcome = f(inject);
        let pass = outcome.is_ok();
        all_pass &= pass;
        results.push(PropertyResult {
            name,
            pass,
            detail: outcome.err().unwrap_or_default(),
        });
    }
    let report = json!({
        "command": "verify",
        "injected_fault": inject,
        "properties": results.iter().map(|r| json!({
            "name": r.name,
            "pass": r.pass,
            "counterexample": if r.detail.is_empty() { serde_json::Value::Null } else { json!(r.detail) },
        })).collect::<Vec<_>>(),
        "all_pass": all_pass,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    if all_pass {
        0
    } else {
        1
    }
}
