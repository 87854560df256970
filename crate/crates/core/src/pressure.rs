//! Finite-window pressure estimators: capacity sums, spanning/separated
//! weights, exact cover/packing optimization over the cylinder tree, the
//! critical-exponent bisection, and rank uniformization certificates.

use crate::potentials::{EnvelopePolicy, FirstCoordTable, PotentialSeq};
use crate::seqspace::{
    bowen_ball_rank, neg_log_snapped, net_relation, words_of_rank, AlphabetSeq, BallSpec,
    NetRelation, Word,
};
use crate::{Error, Result};

/// Largest rank the exhaustive tree optimizers accept.
pub const MAX_TREE_DEPTH: usize = 14;
const MAX_TREE_LEAVES: u64 = 1 << 23;

/// A finite window of capacity sums s_n together with bracket values for
/// liminf/limsup.  The brackets are window statistics, not limits: the
/// lower bracket is the smallest s_n over the window, the upper bracket
/// the largest, and `cauchy_gap` the spread over the window's tail half.
#[derive(Debug, Clone)]
pub struct PressureEstimate {
    pub s_values: Vec<(usize, f64)>,
    pub window: (usize, usize),
    pub liminf_bracket: f64,
    pub limsup_bracket: f64,
    pub cauchy_gap: f64,
}

impl PressureEstimate {
    pub fn s_at(&self, n: usize) -> Option<f64> {
        self.s_values
            .iter()
            .find(|(k, _)| *k == n)
            .map(|(_, v)| *v)
    }

    /// Running tail infimum of s_n over n' in [n, window end].
    pub fn tail_inf(&self, n: usize) -> f64 {
        self.s_values[n - 1..]
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn tail_sup(&self, n: usize) -> f64 {
        self.s_values[n - 1..]
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Averages of per-level terms t_j into s_n = (1/n) sum_{j<n} t_j and the
/// window brackets.  Shared by the capacity route (t_j = log-weight) and
/// the measure-theoretic route (t_j = entropy + mean potential).
pub(crate) fn estimate_from_terms(
    term: impl Fn(usize) -> f64,
    window: (usize, usize),
) -> Result<PressureEstimate> {
    let (lo, hi) = window;
    if lo < 1 || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "window {lo}..{hi} must satisfy 1 <= lo <= hi"
        )));
    }
    let mut s_values = Vec::with_capacity(hi);
    let mut acc = 0.0;
    for n in 1..=hi {
        acc += term(n - 1);
        s_values.push((n, acc / n as f64));
    }
    let in_window = &s_values[lo - 1..];
    let liminf_bracket = in_window
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let limsup_bracket = in_window
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mid = lo + (hi - lo) / 2;
    let tail = &s_values[mid - 1..];
    let cauchy_gap = tail
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    Ok(PressureEstimate {
        s_values,
        window,
        liminf_bracket,
        limsup_bracket,
        cauchy_gap,
    })
}

/// Capacity sums s_n = (1/n) sum_{j<n} log(sum_i exp(a(j, i))) for the
/// potential reduced to a first-coordinate table by `policy`.
pub fn sn_sequence(
    m: &AlphabetSeq,
    f: &PotentialSeq,
    policy: EnvelopePolicy,
    window: (usize, usize),
) -> Result<PressureEstimate> {
    let table = f.reduce(m, policy);
    estimate_from_terms(|j| table.log_weight(j), window)
}

/// `sn_sequence` with the default window [max(1, n_hi/2), n_hi].
pub fn sn_sequence_to(
    m: &AlphabetSeq,
    f: &PotentialSeq,
    policy: EnvelopePolicy,
    n_hi: usize,
) -> Result<PressureEstimate> {
    sn_sequence(m, f, policy, ((n_hi / 2).max(1), n_hi))
}

fn reduce_row_value(table: &FirstCoordTable, k: usize, policy: EnvelopePolicy) -> f64 {
    let row = table.row(k);
    let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    match policy {
        EnvelopePolicy::Lower => min,
        EnvelopePolicy::Upper => max,
        EnvelopePolicy::Midpoint => 0.5 * (min + max),
    }
}

/// Infimum of sum exp(S_n f) over (n, eps)-spanning sets of the full
/// space.  The closed Bowen ball of radius eps is the cylinder of rank
/// R = n + ceil(-log eps) - 1, so a minimal spanning set holds one point
/// per rank-R cylinder; representatives inside each cylinder are weighted
/// by `policy` (the true infimum is the lower envelope).
pub fn spanning_value(
    m: &AlphabetSeq,
    f: &PotentialSeq,
    policy: EnvelopePolicy,
    n: usize,
    eps: f64,
) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let rank = bowen_ball_rank(&BallSpec {
        n,
        eps,
        closed: true,
    })?
    .rank;
    let table = f.reduce(m, policy);
    let mut prod = 1.0f64;
    for j in 0..n.min(rank) {
        prod *= table.weight(j);
    }
    // cylinders longer than the Birkhoff horizon only multiply the count
    for j in n..rank {
        prod *= m.size(j) as f64;
    }
    // Birkhoff terms past the cylinder rank are free: the representative
    // picks the policy value of each remaining level
    for j in rank..n {
        prod *= reduce_row_value(&table, j, policy).exp();
    }
    Ok(prod)
}

/// Supremum of sum exp(S_n f) over (n, eps)-separated sets of the full
/// space.  Two points are (n, eps)-separated exactly when their prefixes
/// of rank n + ceil(-log eps) - 1 differ, so a maximal family holds one
/// point per such cylinder, weighted by the upper envelope.  Radii are
/// restricted to eps <= e^-1 (the ladder used everywhere).
pub fn separated_value(m: &AlphabetSeq, f: &PotentialSeq, n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let x = neg_log_snapped(eps)?;
    if x < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "separated sums need eps <= e^-1, got {eps}"
        )));
    }
    let rank = n + x.ceil() as usize - 1;
    let table = f.reduce(m, EnvelopePolicy::Upper);
    let mut prod = 1.0f64;
    for j in 0..n {
        prod *= table.weight(j);
    }
    for j in n..rank {
        prod *= m.size(j) as f64;
    }
    Ok(prod)
}

/// A finite family of cylinders at one level, given by their base words.
#[derive(Debug, Clone)]
pub struct CylinderCover {
    pub words: Vec<Word>,
}

impl CylinderCover {
    pub fn new(words: Vec<Word>) -> Result<Self> {
        if let Some(first) = words.first() {
            let level = first.level();
            if let Some(w) = words.iter().find(|w| w.level() != level) {
                return Err(Error::LevelMismatch(level, w.level()));
            }
        }
        Ok(Self { words })
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// True when no member's cylinder contains another's (prefix-free).
    pub fn is_antichain(&self) -> bool {
        for (i, u) in self.words.iter().enumerate() {
            for v in &self.words[i + 1..] {
                if !matches!(net_relation(u, v), Ok(NetRelation::Disjoint)) {
                    return false;
                }
            }
        }
        true
    }

    /// Checks that the members are pairwise disjoint and their cylinders
    /// cover the whole level space, by exact extension counting.
    pub fn verify_complete(&self, m: &AlphabetSeq) -> Result<()> {
        if self.words.is_empty() {
            return Err(Error::InvalidCover("cover is empty".into()));
        }
        if !self.is_antichain() {
            return Err(Error::InvalidCover("members are not pairwise disjoint".into()));
        }
        let level = self.words[0].level();
        let deepest = self.words.iter().map(Word::len).max().unwrap();
        let total = m.count_admissible(level, deepest);
        let covered: num::BigUint = self
            .words
            .iter()
            .map(|w| m.count_admissible(level + w.len(), deepest - w.len()))
            .sum();
        if covered != total {
            return Err(Error::InvalidCover(format!(
                "cylinders cover {covered} of {total} rank-{deepest} strings"
            )));
        }
        Ok(())
    }
}

/// Which envelope weighs a cylinder in cover/packing sums: the weight of a
/// rank-n cylinder [u] is exp(-n s + S) with S the extreme of S_n f over
/// the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumSide {
    Lower,
    #[default]
    Upper,
}

impl SumSide {
    fn policy(self) -> EnvelopePolicy {
        match self {
            SumSide::Lower => EnvelopePolicy::Lower,
            SumSide::Upper => EnvelopePolicy::Upper,
        }
    }
}

/// Result of an exact optimization over prefix-free cylinder families with
/// ranks in [rank_min, depth_max].  The truncation parameters are part of
/// the result; nothing here claims the N -> infinity limit.
#[derive(Debug, Clone)]
pub struct OuterMeasureResult {
    pub s: f64,
    pub value: f64,
    pub optimizer: CylinderCover,
    pub rank_min: usize,
    pub depth_max: usize,
}

struct TreeCtx<'a> {
    m: &'a AlphabetSeq,
    table: &'a FirstCoordTable,
    s: f64,
    rank_min: usize,
    depth_max: usize,
    minimize: bool,
}

impl TreeCtx<'_> {
    fn weight(&self, rank: usize, acc: f64) -> f64 {
        (acc - rank as f64 * self.s).exp()
    }

    /// Optimal cover (min) or packing (max) weight of the subtree below a
    /// rank-k node with Birkhoff prefix sum `acc`.  The net property makes
    /// this recursion exact over all prefix-free families.
    fn solve(&self, k: usize, acc: f64) -> f64 {
        let take = if k >= self.rank_min {
            self.weight(k, acc)
        } else if self.minimize {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        if k == self.depth_max {
            return take;
        }
        let mut children = 0.0;
        for i in 1..=self.m.size(k) {
            children += self.solve(k + 1, acc + self.table.value(k, i));
        }
        if self.minimize {
            take.min(children)
        } else {
            take.max(children)
        }
    }

    fn collect(&self, k: usize, acc: f64, prefix: &mut Vec<u32>, out: &mut Vec<Word>) {
        let take = if k >= self.rank_min {
            Some(self.weight(k, acc))
        } else {
            None
        };
        if k == self.depth_max {
            out.push(Word::raw(0, prefix.clone()));
            return;
        }
        let mut children = 0.0;
        for i in 1..=self.m.size(k) {
            children += self.solve(k + 1, acc + self.table.value(k, i));
        }
        let take_wins = match take {
            None => false,
            // prefer the shallower family on ties
            Some(w) => {
                if self.minimize {
                    w <= children
                } else {
                    w >= children
                }
            }
        };
        if take_wins {
            out.push(Word::raw(0, prefix.clone()));
        } else {
            for i in 1..=self.m.size(k) {
                prefix.push(i);
                self.collect(k + 1, acc + self.table.value(k, i), prefix, out);
                prefix.pop();
            }
        }
    }
}

fn tree_optimize(
    m: &AlphabetSeq,
    f: &PotentialSeq,
    side: SumSide,
    s: f64,
    rank_min: usize,
    depth_max: usize,
    target: &Word,
    minimize: bool,
) -> Result<OuterMeasureResult> {
    if target.level() != 0 {
        return Err(Error::InvalidParameter(
            "optimization targets are level-0 cylinders".into(),
        ));
    }
    if depth_max > MAX_TREE_DEPTH {
        return Err(Error::DepthBound(format!(
            "depth_max {depth_max} exceeds the exhaustive limit {MAX_TREE_DEPTH}"
        )));
    }
    if rank_min > depth_max || target.len() > depth_max {
        return Err(Error::DepthBound(format!(
            "need rank_min ({rank_min}) and target rank ({}) <= depth_max ({depth_max})",
            target.len()
        )));
    }
    m.count_admissible_capped(0, depth_max, MAX_TREE_LEAVES)?;
    let table = f.reduce(m, side.policy());
    let ctx = TreeCtx {
        m,
        table: &table,
        s,
        rank_min,
        depth_max,
        minimize,
    };
    // Birkhoff prefix of the target itself
    let mut prefix_sums = vec![0.0f64];
    for (j, &sym) in target.symbols().iter().enumerate() {
        prefix_sums.push(prefix_sums[j] + table.value(j, sym));
    }
    let base = *prefix_sums.last().unwrap();
    let mut best = ctx.solve(target.len(), base);
    // a single ancestor cylinder [target|k], rank_min <= k < |target|,
    // also covers the target; packings stay inside it
    let mut best_ancestor: Option<usize> = None;
    if minimize {
        for k in rank_min..target.len() {
            let w = ctx.weight(k, prefix_sums[k]);
            if w < best {
                best = w;
                best_ancestor = Some(k);
            }
        }
    }
    let words = match best_ancestor {
        Some(k) => vec![Word::raw(0, target.symbols()[..k].to_vec())],
        None => {
            let mut words = Vec::new();
            let mut prefix = target.symbols().to_vec();
            ctx.collect(target.len(), base, &mut prefix, &mut words);
            words
        }
    };
    Ok(OuterMeasureResult {
        s,
        value: best,
        optimizer: CylinderCover { words },
        rank_min,
        depth_max,
    })
}

/// Exact infimum of sum exp(-n(v) s + S(v)) over prefix-free cylinder
/// covers of [target] with ranks in [rank_min, depth_max].
pub fn bowen_outer_measure(
    m: &AlphabetSeq,
    f: &PotentialSeq,
    side: SumSide,
    s: f64,
    rank_min: usize,
    depth_max: usize,
    target: &Word,
) -> Result<OuterMeasureResult> {
    tree_optimize(m, f, side, s, rank_min, depth_max, target, true)
}

/// Exact supremum of the same weights over prefix-free packings of
/// [target] with ranks in [rank_min, depth_max].
pub fn packing_content(
    m: &AlphabetSeq,
    f: &PotentialSeq,
    side: SumSide,
    s: f64,
    rank_min: usize,
    depth_max: usize,
    target: &Word,
) -> Result<OuterMeasureResult> {
    tree_optimize(m, f, side, s, rank_min, depth_max, target, false)
}

/// Full rank-n sum: sum over all rank-n words of exp(-n s + sum_j a(j, u_j)),
/// evaluated as a product of per-level weights.
pub fn fixed_rank_sum(table: &FirstCoordTable, s: f64, n: usize) -> f64 {
    let mut prod = (-(n as f64) * s).exp();
    for j in 0..n {
        prod *= table.weight(j);
    }
    prod
}

/// Which truncated measure the critical-exponent search drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Cover,
    Packing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trend {
    Decreasing,
    Flat,
    Increasing,
}

/// Bracket [lo, hi] around the critical exponent, with hi - lo <= tol.
#[derive(Debug, Clone, Copy)]
pub struct CriticalBracket {
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Bisection for the critical exponent of the truncated cover/packing
/// measure, using the depth trend (value at depth_max against depth_max-2)
/// as the 0-versus-infinity proxy.  For covers the zero side shows a
/// strictly decreasing trend; for packings the infinite side shows a
/// strictly increasing one.  A trend that stays flat on both probe ends is
/// reported as undetermined, not guessed.
pub fn critical_s(
    kind: MeasureKind,
    m: &AlphabetSeq,
    f: &PotentialSeq,
    rank_min: usize,
    depth_max: usize,
    target: &Word,
    tol: f64,
) -> Result<CriticalBracket> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if depth_max < rank_min + 2 || depth_max < 3 {
        return Err(Error::InvalidParameter(
            "depth_max must be at least rank_min + 2 for a depth trend".into(),
        ));
    }
    let mut evaluations = 0usize;
    let mut trend_at = |s: f64| -> Result<Trend> {
        let run = |d: usize| -> Result<f64> {
            let r = match kind {
                MeasureKind::Cover => bowen_outer_measure(m, f, SumSide::Upper, s, rank_min, d, target)?,
                MeasureKind::Packing => packing_content(m, f, SumSide::Upper, s, rank_min, d, target)?,
            };
            Ok(r.value)
        };
        let deep = run(depth_max)?;
        let shallow = run(depth_max - 2)?;
        evaluations += 2;
        if !(deep.is_finite() && shallow.is_finite() && deep > 0.0 && shallow > 0.0) {
            return Err(Error::Undetermined(format!(
                "measure values ({shallow}, {deep}) left the representable range at s = {s}"
            )));
        }
        let ratio = deep / shallow;
        Ok(if ratio < 1.0 - 1e-9 {
            Trend::Decreasing
        } else if ratio > 1.0 + 1e-9 {
            Trend::Increasing
        } else {
            Trend::Flat
        })
    };
    let zero_side = |t: Trend| match kind {
        MeasureKind::Cover => t == Trend::Decreasing,
        MeasureKind::Packing => t != Trend::Increasing,
    };

    // start from the rank-uniform capacity estimate at depth_max
    let table = f.reduce(m, SumSide::Upper.policy());
    let s0 = (0..depth_max).map(|j| table.log_weight(j)).sum::<f64>() / depth_max as f64;
    let mut lo = s0 - 0.5;
    let mut hi = s0 + 0.5;
    let mut guard = 0;
    while !zero_side(trend_at(hi)?) {
        hi += 0.5;
        guard += 1;
        if guard > 80 {
            return Err(Error::Undetermined(
                "no zero-trend side found; trend is flat at this depth".into(),
            ));
        }
    }
    while zero_side(trend_at(lo)?) {
        lo -= 0.5;
        guard += 1;
        if guard > 160 {
            return Err(Error::Undetermined(
                "no infinite-trend side found; trend is flat at this depth".into(),
            ));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if zero_side(trend_at(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalBracket {
        lo,
        hi,
        evaluations,
    })
}

/// Direction of the rank uniformization inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankDirection {
    /// Find n* with cover sum >= full rank-n* sum.
    Lower,
    /// Find n* with cover sum <= full rank-n* sum.
    Upper,
}

/// Certificate for the rank uniformization inequality: the cover sum and
/// the full-rank sum at the returned rank, both computed by canonical
/// (lexicographic) enumeration so ties are reproducible.
#[derive(Debug, Clone, Copy)]
pub struct RankCertificate {
    pub n_star: usize,
    pub cover_sum: f64,
    pub uniform_sum: f64,
}

fn word_weight(table: &FirstCoordTable, s: f64, w: &Word) -> f64 {
    let mut acc = 0.0;
    for (j, &sym) in w.symbols().iter().enumerate() {
        acc += table.value(j, sym);
    }
    (acc - w.len() as f64 * s).exp()
}

/// Given a finite disjoint cover of the full space by cylinders and a
/// first-coordinate potential, finds the smallest rank n* in
/// [n_min, n_max] whose full rank-n* sum bounds the cover sum from below
/// (direction Lower) or above (direction Upper).
pub fn rank_uniformize(
    m: &AlphabetSeq,
    cover: &CylinderCover,
    f: &PotentialSeq,
    s: f64,
    direction: RankDirection,
) -> Result<RankCertificate> {
    let table = match f {
        PotentialSeq::FirstCoord(t) => t,
        PotentialSeq::DepthD { .. } => {
            return Err(Error::InvalidPotential(
                "rank uniformization needs a first-coordinate potential".into(),
            ))
        }
    };
    cover.verify_complete(m)?;
    if cover.words[0].level() != 0 {
        return Err(Error::InvalidCover("cover must live at level 0".into()));
    }
    let n_min = cover.words.iter().map(Word::len).min().unwrap();
    let n_max = cover.words.iter().map(Word::len).max().unwrap();

    let mut sorted: Vec<&Word> = cover.words.iter().collect();
    sorted.sort_by(|a, b| a.symbols().cmp(b.symbols()).then(a.len().cmp(&b.len())));
    let cover_sum: f64 = sorted.iter().map(|w| word_weight(table, s, w)).sum();

    for n in n_min..=n_max {
        m.count_admissible_capped(0, n, 1 << 20)?;
        let uniform_sum: f64 = words_of_rank(m, 0, n)
            .map(|w| word_weight(table, s, &w))
            .sum();
        let ok = match direction {
            RankDirection::Lower => uniform_sum <= cover_sum,
            RankDirection::Upper => uniform_sum >= cover_sum,
        };
        if ok {
            return Ok(RankCertificate {
                n_star: n,
                cover_sum,
                uniform_sum,
            });
        }
    }
    Err(Error::Undetermined(
        "no qualifying rank found in [n_min, n_max]".into(),
    ))
}

/// Comparison of the capacity sums restricted to a cylinder [u] against
/// the full space.  `diffs[n-1]` is s_n - s_n^[u]; past rank |u| the
/// difference is constant/n with the measured constant reported.
#[derive(Debug, Clone)]
pub struct HomogeneityReport {
    pub word_rank: usize,
    pub constant: f64,
    pub diffs: Vec<(usize, f64)>,
    pub max_tail_diff: f64,
}

/// Capacity-sum homogeneity: cylinders (and with them all sets with
/// nonempty interior) carry the same pressure as the whole space, with the
/// finite-n difference decaying like a constant over n.
pub fn homogeneity_check(
    m: &AlphabetSeq,
    f: &PotentialSeq,
    policy: EnvelopePolicy,
    u: &Word,
    n_hi: usize,
) -> Result<HomogeneityReport> {
    if u.level() != 0 {
        return Err(Error::InvalidParameter(
            "restriction cylinders live at level 0".into(),
        ));
    }
    if n_hi < 1 {
        return Err(Error::InvalidParameter("n_hi must be at least 1".into()));
    }
    let table = f.reduce(m, policy);
    // per-level difference between the full log-weight and the restricted
    // contribution; zero (exactly) once past the fixed prefix
    let mut acc = 0.0f64;
    let mut diffs = Vec::with_capacity(n_hi);
    for n in 1..=n_hi {
        let j = n - 1;
        if j < u.len() {
            acc += table.log_weight(j) - table.value(j, u.symbols()[j]);
        }
        diffs.push((n, acc / n as f64));
    }
    let constant = acc;
    let max_tail_diff = diffs
        .iter()
        .filter(|(n, _)| *n > u.len())
        .map(|(_, d)| d.abs())
        .fold(0.0f64, f64::max);
    Ok(HomogeneityReport {
        word_rank: u.len(),
        constant,
        diffs,
        max_tail_diff,
    })
}
