//! Expanding interval maps T_k(x) = m_k x mod 1, expansiveness and
//! generator diagnostics, the strongly-uniform-expansiveness modulus, and
//! the digit coding that conjugates these maps to the sequence space.
//!
//! Coding arithmetic (digit extraction, positional decoding, the
//! semiconjugacy residual) runs on exact rationals: float orbits of a
//! slope-m map lose a factor m of precision per step, which would swamp
//! the truncation bounds the diagnostics are meant to exhibit.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::seqspace::{meet_length, AlphabetSeq, MeetLength, PointPrefix, Word};
use crate::{Error, Result};

/// Base metric on [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseMetric {
    /// min(|x-y|, 1-|x-y|): the maps are uniformly continuous across the
    /// wrap, so this is the default.
    #[default]
    Circle,
    /// Plain |x-y|; the maps are discontinuous at the wrap points.
    Interval,
}

/// The nonautonomous family x -> m_k x mod 1 on [0, 1).
#[derive(Debug, Clone)]
pub struct IntervalNds {
    m: AlphabetSeq,
    metric: BaseMetric,
}

impl IntervalNds {
    pub fn new(m: AlphabetSeq, metric: BaseMetric) -> Self {
        Self { m, metric }
    }

    pub fn alphabet(&self) -> &AlphabetSeq {
        &self.m
    }

    pub fn metric_kind(&self) -> BaseMetric {
        self.metric
    }

    /// T_k.
    pub fn step(&self, k: usize, x: f64) -> f64 {
        (self.m.size(k) as f64 * x).fract()
    }

    /// T_k^j, the j-fold composition starting at level k.
    pub fn orbit_point(&self, k: usize, x: f64, j: usize) -> f64 {
        let mut y = x;
        for t in 0..j {
            y = self.step(k + t, y);
        }
        y
    }

    pub fn dist(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        match self.metric {
            BaseMetric::Circle => d.min(1.0 - d),
            BaseMetric::Interval => d,
        }
    }

    /// max over 0 <= j < n of d(T_k^j x, T_k^j y).
    pub fn bowen_metric(&self, x: f64, y: f64, k: usize, n: usize) -> f64 {
        let (mut a, mut b) = (x, y);
        let mut worst = 0.0f64;
        for j in 0..n {
            worst = worst.max(self.dist(a, b));
            if j + 1 < n {
                a = self.step(k + j, a);
                b = self.step(k + j, b);
            }
        }
        worst
    }

    fn step_exact(&self, k: usize, x: &BigRational) -> BigRational {
        let scaled = x * BigRational::from_integer(BigInt::from(self.m.size(k)));
        &scaled - scaled.floor()
    }
}

/// One checked pair: the first orbit index where the pair moved further
/// than delta apart, or None up to the horizon.
#[derive(Debug, Clone)]
pub struct PairSeparation<P> {
    pub a: P,
    pub b: P,
    pub first_separating: Option<usize>,
}

/// Outcome of an expansiveness search.  A counterexample is a distinct
/// pair staying within delta through the whole horizon; verdicts are
/// always relative to the (horizon, resolution) searched.
#[derive(Debug, Clone)]
pub struct FalsifierReport<P> {
    pub pairs_checked: usize,
    pub horizon: usize,
    pub counterexamples: Vec<(P, P)>,
    pub separations: Vec<PairSeparation<P>>,
}

impl<P> FalsifierReport<P> {
    pub fn no_counterexample(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Searches all distinct grid pairs i/grid for one that stays delta-close
/// through the horizon.
pub fn falsify_expansiveness_grid(
    sys: &IntervalNds,
    delta: f64,
    horizon: usize,
    grid: usize,
) -> Result<FalsifierReport<f64>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    if grid < 2 || horizon == 0 {
        return Err(Error::InvalidParameter(
            "need at least two grid points and a positive horizon".into(),
        ));
    }
    let pts: Vec<f64> = (0..grid).map(|i| i as f64 / grid as f64).collect();
    let mut counterexamples = Vec::new();
    let mut separations = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            let mut sep = None;
            let (mut a, mut b) = (x, y);
            for j in 0..horizon {
                if sys.dist(a, b) > delta {
                    sep = Some(j);
                    break;
                }
                a = sys.step(j, a);
                b = sys.step(j, b);
            }
            match sep {
                Some(j) => separations.push(PairSeparation {
                    a: x,
                    b: y,
                    first_separating: Some(j),
                }),
                None => counterexamples.push((x, y)),
            }
        }
    }
    Ok(FalsifierReport {
        pairs_checked: pts.len() * (pts.len() - 1) / 2,
        horizon,
        counterexamples,
        separations,
    })
}

/// The same search on the shift itself, over seeded random pairs.  For
/// delta below 1 a distinct pair separates exactly at the length of its
/// common prefix, where the shifted distance reaches 1.
pub fn falsify_expansiveness_shift(
    m: &AlphabetSeq,
    delta: f64,
    horizon: usize,
    pairs: usize,
    seed: u64,
) -> Result<FalsifierReport<PointPrefix>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = horizon + 8;
    let mut counterexamples = Vec::new();
    let mut separations = Vec::new();
    for _ in 0..pairs {
        // a random pair with a planted first disagreement
        let meet = rng.gen_range(0..horizon.min(depth - 1));
        let mut a = Vec::with_capacity(depth);
        let mut b = Vec::with_capacity(depth);
        for j in 0..depth {
            let size = m.size(j);
            let s = rng.gen_range(1..=size);
            if j < meet {
                a.push(s);
                b.push(s);
            } else if j == meet {
                a.push(s);
                b.push(s % size + 1);
            } else {
                a.push(s);
                b.push(rng.gen_range(1..=size));
            }
        }
        let pa = PointPrefix::finite(0, a);
        let pb = PointPrefix::finite(0, b);
        let mut sep = None;
        let mut sa = pa.clone();
        let mut sb = pb.clone();
        for j in 0..horizon {
            let d = crate::seqspace::metric(&sa, &sb, depth - j)?;
            if d.value > delta {
                sep = Some(j);
                break;
            }
            sa = sa.shift()?;
            sb = sb.shift()?;
        }
        match sep {
            Some(j) => separations.push(PairSeparation {
                a: pa,
                b: pb,
                first_separating: Some(j),
            }),
            None => counterexamples.push((pa, pb)),
        }
    }
    Ok(FalsifierReport {
        pairs_checked: pairs,
        horizon,
        counterexamples,
        separations,
    })
}

/// First disagreement of two finite-prefix points, if any.
pub fn planted_meet(a: &PointPrefix, b: &PointPrefix, depth: usize) -> Option<usize> {
    match meet_length(a, b, depth) {
        Ok(MeetLength::Finite(k)) => Some(k),
        _ => None,
    }
}

/// A sequence of finite ball covers of [0, 1), one per level, with a
/// common Lebesgue number.
#[derive(Debug, Clone)]
pub struct CoverSeq {
    /// (center, radius) pairs per level.
    pub levels: Vec<Vec<(f64, f64)>>,
    pub lebesgue: f64,
}

impl CoverSeq {
    /// Checks on a grid that every ball of the declared Lebesgue number
    /// lies inside some member.
    pub fn verify_lebesgue(&self, sys: &IntervalNds, grid: usize) -> bool {
        self.levels.iter().all(|cover| {
            (0..grid).all(|i| {
                let p = i as f64 / grid as f64;
                cover
                    .iter()
                    .any(|&(c, r)| sys.dist(p, c) + self.lebesgue <= r + 1e-12)
            })
        })
    }
}

/// The net-of-balls generator: centers on a (delta/2 - eps)-net, balls of
/// radius delta/2, with eps a Lebesgue number.  Requires 0 < eps < delta/4.
pub fn generator_from_net(
    sys: &IntervalNds,
    delta: f64,
    eps: f64,
    k_max: usize,
) -> Result<CoverSeq> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    if !(eps > 0.0 && eps < delta / 4.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, delta/4), got {eps}"
        )));
    }
    let net_radius = delta / 2.0 - eps;
    // unit circumference: a net of this radius needs ceil(1 / (2 r))
    // centers; the same cover works at every level
    let count = (1.0 / (2.0 * net_radius)).ceil().max(1.0) as usize;
    let cover: Vec<(f64, f64)> = (0..count)
        .map(|i| ((i as f64 + 0.5) / count as f64, delta / 2.0))
        .collect();
    let out = CoverSeq {
        levels: vec![cover; k_max.max(1)],
        lebesgue: eps,
    };
    if !out.verify_lebesgue(sys, 256) {
        return Err(Error::InvalidCover(
            "constructed net fails its own Lebesgue number".into(),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct CircleArc {
    start: f64,
    len: f64,
}

fn arcs_diameter(sys: &IntervalNds, arcs: &[CircleArc]) -> f64 {
    if arcs.is_empty() {
        return 0.0;
    }
    let mut pts = Vec::with_capacity(2 * arcs.len() + 2);
    for a in arcs {
        pts.push(a.start.rem_euclid(1.0));
        pts.push((a.start + a.len).rem_euclid(1.0));
        // a wrapped arc reaches both ends of the fundamental domain
        if sys.metric_kind() == BaseMetric::Interval && a.start + a.len > 1.0 {
            pts.push(0.0);
            pts.push(1.0 - f64::EPSILON);
        }
    }
    let mut worst = arcs.iter().map(|a| a.len).fold(0.0f64, f64::max);
    for (i, &p) in pts.iter().enumerate() {
        for &q in &pts[i + 1..] {
            worst = worst.max(sys.dist(p, q));
        }
    }
    worst
}

/// Intersects level-0 arcs with the preimage of `member` under T_0^j,
/// where `scale` is the product m_0 * ... * m_{j-1}.  The preimage of an
/// arc under x -> scale * x mod 1 is `scale` shrunken translates.
fn refine_arcs(arcs: &[CircleArc], member: CircleArc, scale: f64) -> Vec<CircleArc> {
    let member_len = member.len.min(1.0);
    let mut out = Vec::new();
    for a in arcs {
        let (lo, hi) = (a.start, a.start + a.len);
        let t_lo = (lo * scale - member.start - member_len).floor() as i64 - 1;
        let t_hi = (hi * scale - member.start).ceil() as i64 + 1;
        for t in t_lo..=t_hi {
            let ps = (member.start + t as f64) / scale;
            let pe = ps + member_len / scale;
            let s = ps.max(lo);
            let e = pe.min(hi);
            if e > s {
                out.push(CircleArc {
                    start: s,
                    len: e - s,
                });
            }
        }
    }
    merge_arcs(out)
}

/// Canonicalizes a set of arcs: start in [0, 1), overlapping or touching
/// arcs merged, total length capped at the full circle.  Keeps the arc
/// count from compounding when cover members overlap their own preimages.
fn merge_arcs(arcs: Vec<CircleArc>) -> Vec<CircleArc> {
    if arcs.is_empty() {
        return arcs;
    }
    let mut normalized: Vec<CircleArc> = arcs
        .into_iter()
        .map(|a| CircleArc {
            start: a.start.rem_euclid(1.0),
            len: a.len.min(1.0),
        })
        .collect();
    normalized.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut merged: Vec<CircleArc> = Vec::with_capacity(normalized.len());
    for a in normalized {
        match merged.last_mut() {
            Some(prev) if a.start <= prev.start + prev.len + 1e-15 => {
                let end = (a.start + a.len).max(prev.start + prev.len);
                prev.len = end - prev.start;
            }
            _ => merged.push(a),
        }
    }
    // wrap-around merge between the last arc and the first
    if merged.len() > 1 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        if last.start + last.len >= first.start + 1.0 - 1e-15 {
            let end = (last.start + last.len).max(first.start + first.len + 1.0);
            merged.pop();
            merged[0] = CircleArc {
                start: last.start,
                len: (end - last.start).min(1.0),
            };
        }
    }
    if merged.iter().map(|a| a.len).sum::<f64>() >= 1.0 {
        return vec![CircleArc {
            start: 0.0,
            len: 1.0,
        }];
    }
    merged
}

/// Diameters of the dynamical intersections of closed cover members along
/// sampled orbits: entry J-1 is the worst diameter over samples of the set
/// of points whose first J iterates stay in the same members as the
/// sampled orbit.  Nested intersections make the sequence non-increasing;
/// a generator drives it to zero.
pub fn intersection_diameters(
    sys: &IntervalNds,
    cover: &CoverSeq,
    seed: u64,
    samples: usize,
    j_max: usize,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = vec![0.0f64; j_max];
    for _ in 0..samples {
        let x: f64 = rng.gen();
        let mut arcs = vec![CircleArc {
            start: 0.0,
            len: 1.0,
        }];
        let mut scale = 1.0f64;
        for j in 0..j_max {
            let level_cover = &cover.levels[j.min(cover.levels.len() - 1)];
            let y = sys.orbit_point(0, x, j);
            let &(c, r) = level_cover
                .iter()
                .find(|&&(c, r)| sys.dist(y, c) <= r)
                .ok_or_else(|| {
                    Error::InvalidCover(format!("cover at level {j} misses the point {y}"))
                })?;
            if scale > (1u64 << 50) as f64 {
                return Err(Error::DepthBound(
                    "orbit scale exceeds exact arc arithmetic range".into(),
                ));
            }
            // closed member as an arc
            let member = CircleArc {
                start: (c - r).rem_euclid(1.0),
                len: 2.0 * r,
            };
            arcs = refine_arcs(&arcs, member, scale);
            scale *= sys.alphabet().size(j) as f64;
            worst[j] = worst[j].max(arcs_diameter(sys, &arcs));
        }
    }
    Ok(worst)
}

/// Smallest horizon N, verified on the grid, such that orbits staying
/// delta-close through N steps start eps-close, per level class.  `None`
/// when some grid pair never separates within the cap (delta is then not
/// an expansive threshold at this resolution).
pub fn sue_modulus(
    sys: &IntervalNds,
    delta: f64,
    eps_list: &[f64],
    grid: usize,
    n_cap: usize,
) -> Result<Vec<(f64, Option<usize>)>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let m = sys.alphabet();
    let classes = m.transient_len() + m.period_len();
    // (base distance, first separating index or None) per pair and class
    let mut profile: Vec<(f64, Option<usize>)> = Vec::new();
    let pts: Vec<f64> = (0..grid).map(|i| i as f64 / grid as f64).collect();
    for k in 0..classes {
        for (i, &x) in pts.iter().enumerate() {
            for &y in &pts[i + 1..] {
                let d0 = sys.dist(x, y);
                let (mut a, mut b) = (x, y);
                let mut sep = None;
                for j in 0..n_cap {
                    if sys.dist(a, b) >= delta {
                        sep = Some(j);
                        break;
                    }
                    a = sys.step(k + j, a);
                    b = sys.step(k + j, b);
                }
                profile.push((d0, sep));
            }
        }
    }
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let mut needed = 1usize;
            for &(d0, sep) in &profile {
                if d0 >= eps {
                    match sep {
                        Some(j) => needed = needed.max(j + 1),
                        None => return (eps, None),
                    }
                }
            }
            (eps, Some(needed))
        })
        .collect())
}

/// The shift-space modulus from the cylinder identities: orbits staying
/// within e^-a through N steps share a prefix of length
/// floor(N - 1 + a) + 1, which forces distance below e^-b once that
/// length exceeds b.
pub fn sue_modulus_shift(delta: f64, eps_list: &[f64]) -> Result<Vec<(f64, usize)>> {
    let a = crate::seqspace::neg_log_snapped(delta)?;
    if a < 0.0 {
        return Err(Error::InvalidParameter(
            "delta must be at most 1 on the sequence space".into(),
        ));
    }
    eps_list
        .iter()
        .map(|&eps| {
            let b = crate::seqspace::neg_log_snapped(eps)?;
            let mut n = 1usize;
            loop {
                let guaranteed_meet = (n as f64 - 1.0 + a).floor() + 1.0;
                if guaranteed_meet > b {
                    return Ok((eps, n));
                }
                n += 1;
                if n > 10_000 {
                    return Err(Error::Undetermined("modulus cap exceeded".into()));
                }
            }
        })
        .collect()
}

/// Digit coding at a fixed level: encode extracts itinerary digits under
/// the half-open level partitions {[l/m, (l+1)/m)}, decode evaluates the
/// positional series truncated at the word length.
#[derive(Debug, Clone, Copy)]
pub struct CodingMap<'a> {
    sys: &'a IntervalNds,
    level: usize,
}

/// Decoded value with its truncation error bound 1 / prod(m_i).
#[derive(Debug, Clone, Copy)]
pub struct DecodeResult {
    pub value: f64,
    pub truncation_bound: f64,
}

impl<'a> CodingMap<'a> {
    pub fn new(sys: &'a IntervalNds, level: usize) -> Self {
        Self { sys, level }
    }

    pub fn encode(&self, x: f64, depth: usize) -> Result<Word> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!(
                "points live in [0, 1), got {x}"
            )));
        }
        let q = BigRational::from_float(x)
            .ok_or_else(|| Error::InvalidParameter("point is not finite".into()))?;
        self.encode_exact(&q, depth)
    }

    pub fn encode_fraction(&self, num: u64, den: u64, depth: usize) -> Result<Word> {
        if den == 0 || num >= den {
            return Err(Error::InvalidParameter(format!(
                "fraction {num}/{den} is not in [0, 1)"
            )));
        }
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        self.encode_exact(&q, depth)
    }

    pub fn encode_exact(&self, x: &BigRational, depth: usize) -> Result<Word> {
        if x.is_negative() || *x >= BigRational::one() {
            return Err(Error::InvalidParameter("points live in [0, 1)".into()));
        }
        let m = self.sys.alphabet();
        let mut y = x.clone();
        let mut symbols = Vec::with_capacity(depth);
        for j in 0..depth {
            let scaled = &y * BigRational::from_integer(BigInt::from(m.size(self.level + j)));
            let digit = scaled.floor();
            symbols.push(digit.to_integer().to_u32().unwrap() + 1);
            y = &scaled - &digit;
        }
        Word::new(m, self.level, symbols)
    }

    pub fn decode(&self, w: &Word) -> Result<DecodeResult> {
        let value = self
            .decode_exact(w)?
            .to_f64()
            .ok_or_else(|| Error::InvalidParameter("decoded value overflows f64".into()))?;
        let m = self.sys.alphabet();
        let mut bound = 1.0f64;
        for j in 0..w.len() {
            bound /= m.size(self.level + j) as f64;
        }
        Ok(DecodeResult {
            value,
            truncation_bound: bound,
        })
    }

    /// sum_j (w_j - 1) / (m_level * ... * m_{level+j}) as an exact rational.
    pub fn decode_exact(&self, w: &Word) -> Result<BigRational> {
        if w.level() != self.level {
            return Err(Error::LevelMismatch(self.level, w.level()));
        }
        let m = self.sys.alphabet();
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for (j, &s) in w.symbols().iter().enumerate() {
            let base = BigInt::from(m.size(self.level + j));
            num = num * &base + BigInt::from(s - 1);
            den *= base;
        }
        Ok(BigRational::new(num, den))
    }

    /// |decode(encode(x, depth)) - x| as an exact rational; always below
    /// 1 / prod(m_i) by construction.
    pub fn roundtrip_error_exact(&self, x: &BigRational, depth: usize) -> Result<BigRational> {
        let w = self.encode_exact(x, depth)?;
        Ok((self.decode_exact(&w)? - x).abs())
    }
}

/// max over j <= steps of the circle distance between decode(sigma^j w)
/// and T^j(decode(w)), with decode truncated at the word length and the
/// orbit run in exact arithmetic.  Keeping |w| - steps digits of guard
/// makes the residual the pure truncation mismatch.
pub fn semiconjugacy_residual(sys: &IntervalNds, w: &Word, steps: usize) -> Result<f64> {
    if w.len() <= steps {
        return Err(Error::InsufficientDepth {
            needed: steps + 1,
            have: w.len(),
        });
    }
    let base = CodingMap::new(sys, w.level());
    let mut orbit = base.decode_exact(w)?;
    let mut shifted = w.clone();
    let mut worst = 0.0f64;
    let one = BigRational::one();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for j in 1..=steps {
        orbit = sys.step_exact(w.level() + j - 1, &orbit);
        shifted = shifted.shift()?;
        let decoded = CodingMap::new(sys, w.level() + j).decode_exact(&shifted)?;
        let diff = (&decoded - &orbit).abs();
        let wrapped = if diff > half { &one - &diff } else { diff };
        worst = worst.max(wrapped.to_f64().unwrap_or(f64::INFINITY));
    }
    Ok(worst)
}

/// Spanning/separated weight estimates at scale (n, eps) on the interval
/// system.  A maximal (n, eps)-separated subset of the grid is extracted
/// greedily; by maximality it is also (n, eps)-spanning, so its weight is
/// simultaneously a separated-sum witness and a spanning-sum bound.
#[derive(Debug, Clone)]
pub struct OrbitPressure {
    pub n: usize,
    pub eps: f64,
    pub count: usize,
    pub spanning_value: f64,
    pub separated_value: f64,
    pub separated_rate: f64,
}

pub fn pressure_via_orbits(
    sys: &IntervalNds,
    f: &dyn Fn(usize, f64) -> f64,
    n: usize,
    eps: f64,
    grid: usize,
) -> Result<OrbitPressure> {
    if n == 0 || grid < 2 {
        return Err(Error::InvalidParameter(
            "need n >= 1 and at least two grid points".into(),
        ));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(
            "eps must lie in (0, 1/2) for a meaningful net".into(),
        ));
    }
    let mut accepted: Vec<f64> = Vec::new();
    for i in 0..grid {
        let x = i as f64 / grid as f64;
        // only points within base distance eps can fail to separate
        let mut separated = true;
        for &y in accepted.iter().rev() {
            if x - y > eps {
                break;
            }
            if sys.bowen_metric(x, y, 0, n) <= eps {
                separated = false;
                break;
            }
        }
        if separated && sys.metric_kind() == BaseMetric::Circle {
            for &y in accepted.iter() {
                if y + 1.0 - x > eps {
                    break;
                }
                if sys.bowen_metric(x, y, 0, n) <= eps {
                    separated = false;
                    break;
                }
            }
        }
        if separated {
            accepted.push(x);
        }
    }
    let weight: f64 = accepted
        .iter()
        .map(|&x| {
            (0..n)
                .map(|j| f(j, sys.orbit_point(0, x, j)))
                .sum::<f64>()
                .exp()
        })
        .sum();
    Ok(OrbitPressure {
        n,
        eps,
        count: accepted.len(),
        spanning_value: weight,
        separated_value: weight,
        separated_rate: weight.ln() / n as f64,
    })
}

/// Step potential induced on [0, 1) by a first-coordinate table: at level
/// j the value is the table entry of the partition cell containing x.
pub fn step_potential<'a>(
    m: &'a AlphabetSeq,
    table: &'a crate::potentials::FirstCoordTable,
) -> impl Fn(usize, f64) -> f64 + 'a {
    move |j: usize, x: f64| {
        let cell = ((m.size(j) as f64 * x).floor() as usize).min(m.size(j) as usize - 1);
        table.row(j)[cell]
    }
}
