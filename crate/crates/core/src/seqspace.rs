//! Sequence spaces with time-varying alphabets: words, cylinders, points,
//! the level shift, and the prefix metric d(x, y) = exp(-|common prefix|).

use std::cmp::Ordering;

use num::BigUint;

use crate::{Error, Result};

/// The sequence of alphabet sizes m_0, m_1, ..., stored as a finite head
/// followed by a cycle that repeats forever.  Every size is at least 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphabetSeq {
    head: Vec<u32>,
    period: Vec<u32>,
}

impl AlphabetSeq {
    pub fn new(head: Vec<u32>, period: Vec<u32>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidAlphabet("period must be nonempty".into()));
        }
        if let Some(&bad) = head.iter().chain(period.iter()).find(|&&m| m < 2) {
            return Err(Error::InvalidAlphabet(format!(
                "alphabet sizes must be at least 2, got {bad}"
            )));
        }
        Ok(Self { head, period })
    }

    /// Constant alphabet m_k = m for all k.
    pub fn constant(m: u32) -> Result<Self> {
        Self::new(Vec::new(), vec![m])
    }

    /// Purely periodic alphabet with no transient head.
    pub fn cycle(period: Vec<u32>) -> Result<Self> {
        Self::new(Vec::new(), period)
    }

    /// m_k.
    pub fn size(&self, k: usize) -> u32 {
        if k < self.head.len() {
            self.head[k]
        } else {
            self.period[(k - self.head.len()) % self.period.len()]
        }
    }

    pub fn head(&self) -> &[u32] {
        &self.head
    }

    pub fn period(&self) -> &[u32] {
        &self.period
    }

    pub fn transient_len(&self) -> usize {
        self.head.len()
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    pub fn max_size(&self) -> u32 {
        self.head
            .iter()
            .chain(self.period.iter())
            .cloned()
            .max()
            .unwrap_or(2)
    }

    /// Number of admissible strings of length n starting at level k,
    /// i.e. the product m_k * ... * m_{k+n-1}.  Exact at any size.
    pub fn count_admissible(&self, k: usize, n: usize) -> BigUint {
        let mut acc = BigUint::from(1u32);
        for j in k..k + n {
            acc *= self.size(j);
        }
        acc
    }

    /// Same product as `count_admissible`, capped; errors when the count
    /// exceeds `cap` so enumeration loops cannot blow up silently.
    pub fn count_admissible_capped(&self, k: usize, n: usize, cap: u64) -> Result<u64> {
        let mut acc: u64 = 1;
        for j in k..k + n {
            acc = acc.saturating_mul(self.size(j) as u64);
            if acc > cap {
                return Err(Error::DepthBound(format!(
                    "{n} levels from level {k} give more than {cap} strings"
                )));
            }
        }
        Ok(acc)
    }
}

/// A finite word u at a given level; `symbols[j]` lives in {1, ..., m(level+j)}.
/// The empty word is allowed and its cylinder is the whole space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    level: usize,
    symbols: Vec<u32>,
}

impl Word {
    /// Validated constructor: every symbol must fit its level's alphabet.
    pub fn new(m: &AlphabetSeq, level: usize, symbols: Vec<u32>) -> Result<Self> {
        for (j, &s) in symbols.iter().enumerate() {
            let bound = m.size(level + j);
            if s < 1 || s > bound {
                return Err(Error::InvalidWord(format!(
                    "symbol {s} at offset {j} is outside 1..={bound}"
                )));
            }
        }
        Ok(Self { level, symbols })
    }

    pub fn empty(level: usize) -> Self {
        Self {
            level,
            symbols: Vec::new(),
        }
    }

    /// Unvalidated constructor for symbols that are already known to be
    /// admissible (enumeration, curtailment of valid points).
    pub(crate) fn raw(level: usize, symbols: Vec<u32>) -> Self {
        Self { level, symbols }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    /// First n symbols as a word at the same level.
    pub fn curtail(&self, n: usize) -> Result<Word> {
        if n > self.len() {
            return Err(Error::InsufficientDepth {
                needed: n,
                have: self.len(),
            });
        }
        Ok(Word::raw(self.level, self.symbols[..n].to_vec()))
    }

    /// Drops the first symbol and moves one level up.
    pub fn shift(&self) -> Result<Word> {
        if self.symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(Word::raw(self.level + 1, self.symbols[1..].to_vec()))
    }

    pub fn extended(&self, symbol: u32) -> Word {
        let mut symbols = self.symbols.clone();
        symbols.push(symbol);
        Word::raw(self.level, symbols)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.level == other.level
            && self.len() <= other.len()
            && self.symbols[..] == other.symbols[..self.len()]
    }
}

/// How the cylinders of two words at the same level relate.  By the net
/// property these are the only possibilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetRelation {
    Disjoint,
    /// [first] contains [second], i.e. the first word is a proper prefix.
    FirstContainsSecond,
    /// [second] contains [first].
    SecondContainsFirst,
    Equal,
}

pub fn net_relation(u: &Word, v: &Word) -> Result<NetRelation> {
    if u.level != v.level {
        return Err(Error::LevelMismatch(u.level, v.level));
    }
    let n = u.len().min(v.len());
    if u.symbols[..n] != v.symbols[..n] {
        return Ok(NetRelation::Disjoint);
    }
    Ok(match u.len().cmp(&v.len()) {
        Ordering::Equal => NetRelation::Equal,
        Ordering::Less => NetRelation::FirstContainsSecond,
        Ordering::Greater => NetRelation::SecondContainsFirst,
    })
}

/// A point of the sequence space, represented by a finite prefix plus an
/// optional periodic continuation.  With a cycle present every depth is
/// resolvable; without one, operations past the stored prefix fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointPrefix {
    level: usize,
    head: Vec<u32>,
    cycle: Option<Vec<u32>>,
}

impl PointPrefix {
    pub fn finite(level: usize, symbols: Vec<u32>) -> Self {
        Self {
            level,
            head: symbols,
            cycle: None,
        }
    }

    pub fn periodic(level: usize, head: Vec<u32>, cycle: Vec<u32>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidWord("periodic tail must be nonempty".into()));
        }
        Ok(Self {
            level,
            head,
            cycle: Some(cycle),
        })
    }

    pub fn from_word(w: &Word) -> Self {
        Self::finite(w.level(), w.symbols().to_vec())
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Symbol at offset j from the point's level, if resolvable.
    pub fn symbol(&self, j: usize) -> Option<u32> {
        if j < self.head.len() {
            Some(self.head[j])
        } else {
            self.cycle
                .as_ref()
                .map(|c| c[(j - self.head.len()) % c.len()])
        }
    }

    /// Depth up to which symbols are defined; `None` means unbounded.
    pub fn depth(&self) -> Option<usize> {
        match self.cycle {
            Some(_) => None,
            None => Some(self.head.len()),
        }
    }

    pub fn resolvable_to(&self, n: usize) -> bool {
        self.cycle.is_some() || self.head.len() >= n
    }

    /// The n-th curtailment as a word.
    pub fn curtail(&self, n: usize) -> Result<Word> {
        if !self.resolvable_to(n) {
            return Err(Error::InsufficientDepth {
                needed: n,
                have: self.head.len(),
            });
        }
        let symbols = (0..n).map(|j| self.symbol(j).unwrap()).collect();
        Ok(Word::raw(self.level, symbols))
    }

    /// Checks all resolvable symbols up to `depth` against the alphabet,
    /// including a full cycle's worth of positions when periodic.
    pub fn validate(&self, m: &AlphabetSeq, depth: usize) -> Result<()> {
        let check_to = match &self.cycle {
            Some(c) => {
                let span = crate::util::lcm(c.len(), m.period_len());
                (self.head.len() + span + m.transient_len()).max(depth)
            }
            None => self.head.len().min(depth.max(self.head.len())),
        };
        for j in 0..check_to {
            if let Some(s) = self.symbol(j) {
                let bound = m.size(self.level + j);
                if s < 1 || s > bound {
                    return Err(Error::InvalidWord(format!(
                        "symbol {s} at offset {j} is outside 1..={bound}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Drops the first symbol and moves one level up.
    pub fn shift(&self) -> Result<PointPrefix> {
        if self.head.is_empty() {
            match &self.cycle {
                None => return Err(Error::EmptyWord),
                Some(c) => {
                    let mut rotated = c.clone();
                    rotated.rotate_left(1);
                    return Ok(PointPrefix {
                        level: self.level + 1,
                        head: Vec::new(),
                        cycle: Some(rotated),
                    });
                }
            }
        }
        Ok(PointPrefix {
            level: self.level + 1,
            head: self.head[1..].to_vec(),
            cycle: self.cycle.clone(),
        })
    }
}

/// Length of the maximal common initial word, bounded by a search depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeetLength {
    Finite(usize),
    /// No disagreement found up to the search depth.
    AtLeast(usize),
}

pub fn meet_length(a: &PointPrefix, b: &PointPrefix, max_depth: usize) -> Result<MeetLength> {
    if a.level != b.level {
        return Err(Error::LevelMismatch(a.level, b.level));
    }
    for j in 0..max_depth {
        match (a.symbol(j), b.symbol(j)) {
            (Some(x), Some(y)) if x == y => continue,
            (Some(_), Some(_)) => return Ok(MeetLength::Finite(j)),
            _ => {
                return Err(Error::InsufficientDepth {
                    needed: max_depth,
                    have: j,
                })
            }
        }
    }
    Ok(MeetLength::AtLeast(max_depth))
}

/// Metric value together with a flag telling whether the meet was actually
/// resolved.  Points identical through the search depth report 0 with
/// `resolved = false`: the true distance is only known to be <= e^-depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    pub resolved: bool,
}

pub fn metric(a: &PointPrefix, b: &PointPrefix, max_depth: usize) -> Result<MetricValue> {
    Ok(match meet_length(a, b, max_depth)? {
        MeetLength::Finite(k) => MetricValue {
            value: (-(k as f64)).exp(),
            resolved: true,
        },
        MeetLength::AtLeast(_) => MetricValue {
            value: 0.0,
            resolved: false,
        },
    })
}

/// Parameters of a Bowen ball: n iterations, radius eps, open or closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSpec {
    pub n: usize,
    pub eps: f64,
    pub closed: bool,
}

/// Cylinder rank realizing a Bowen ball; `clamped` is set when the formula
/// produced a negative rank (huge radius) and 0 was returned instead, the
/// cylinder of the empty word being the whole space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallRank {
    pub rank: usize,
    pub clamped: bool,
}

/// -log(eps), snapped to the nearest integer when within 1e-9 so that the
/// radius ladder e^-r survives the round trip through floating point.
pub(crate) fn neg_log_snapped(eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be a positive finite number, got {eps}"
        )));
    }
    let x = -eps.ln();
    let r = x.round();
    Ok(if (x - r).abs() < 1e-9 { r } else { x })
}

/// Rank of the cylinder equal to the Bowen ball B_{k,n}(x, eps):
/// n + floor(-log eps + 1) - 1 for open balls, n + ceil(-log eps) - 1 for
/// closed ones.  The two agree unless -log eps is an integer, in which case
/// the closed rank is one smaller.
pub fn bowen_ball_rank(spec: &BallSpec) -> Result<BallRank> {
    let x = neg_log_snapped(spec.eps)?;
    let offset = if spec.closed {
        x.ceil() as i64 - 1
    } else {
        (x + 1.0).floor() as i64 - 1
    };
    let raw = spec.n as i64 + offset;
    Ok(if raw < 0 {
        BallRank {
            rank: 0,
            clamped: true,
        }
    } else {
        BallRank {
            rank: raw as usize,
            clamped: false,
        }
    })
}

/// Lexicographic enumeration of all admissible words of a fixed rank.
pub struct RankWords<'a> {
    m: &'a AlphabetSeq,
    level: usize,
    state: Option<Vec<u32>>,
}

impl<'a> Iterator for RankWords<'a> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let state = self.state.as_mut()?;
        let word = Word::raw(self.level, state.clone());
        // odometer increment, most significant digit first
        let mut pos = state.len();
        loop {
            if pos == 0 {
                self.state = None;
                break;
            }
            pos -= 1;
            if state[pos] < self.m.size(self.level + pos) {
                state[pos] += 1;
                for s in state[pos + 1..].iter_mut() {
                    *s = 1;
                }
                break;
            }
        }
        Some(word)
    }
}

pub fn words_of_rank(m: &AlphabetSeq, level: usize, rank: usize) -> RankWords<'_> {
    RankWords {
        m,
        level,
        state: Some(vec![1; rank]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn m2() -> AlphabetSeq {
        AlphabetSeq::constant(2).unwrap()
    }

    fn m23() -> AlphabetSeq {
        AlphabetSeq::cycle(vec![2, 3]).unwrap()
    }

    #[test]
    fn alphabet_rejects_small_sizes() {
        assert!(AlphabetSeq::new(vec![2], vec![1]).is_err());
        assert!(AlphabetSeq::new(vec![], vec![]).is_err());
    }

    #[test]
    fn alphabet_lookup_mixes_head_and_period() {
        let m = AlphabetSeq::new(vec![5, 4], vec![2, 3]).unwrap();
        let sizes: Vec<u32> = (0..8).map(|k| m.size(k)).collect();
        assert_eq!(sizes, vec![5, 4, 2, 3, 2, 3, 2, 3]);
    }

    #[test]
    fn meet_length_examples() {
        let a = PointPrefix::finite(0, vec![1, 1, 2, 2]);
        let b = PointPrefix::finite(0, vec![1, 1, 3, 2]);
        assert_eq!(meet_length(&a, &b, 4).unwrap(), MeetLength::Finite(2));

        let c = PointPrefix::periodic(0, vec![], vec![2, 1]).unwrap();
        assert_eq!(meet_length(&c, &c, 10).unwrap(), MeetLength::AtLeast(10));

        let d = PointPrefix::finite(0, vec![2, 1]);
        let e = PointPrefix::finite(0, vec![1, 1]);
        assert_eq!(meet_length(&d, &e, 2).unwrap(), MeetLength::Finite(0));
    }

    #[test]
    fn meet_length_level_mismatch() {
        let a = PointPrefix::finite(0, vec![1]);
        let b = PointPrefix::finite(1, vec![1]);
        assert!(matches!(
            meet_length(&a, &b, 1),
            Err(Error::LevelMismatch(0, 1))
        ));
    }

    #[test]
    fn metric_examples() {
        let a = PointPrefix::finite(0, vec![1, 1, 2, 1]);
        let b = PointPrefix::finite(0, vec![1, 1, 3, 1]);
        let d = metric(&a, &b, 4).unwrap();
        assert!((d.value - (-2.0f64).exp()).abs() < 1e-12);
        assert!(d.resolved);

        let same = metric(&a, &a, 4).unwrap();
        assert_eq!(same.value, 0.0);
        assert!(!same.resolved);

        let c = PointPrefix::finite(0, vec![2, 1, 1, 1]);
        assert_eq!(metric(&a, &c, 4).unwrap().value, 1.0);
    }

    #[test]
    fn ball_rank_examples() {
        let open = bowen_ball_rank(&BallSpec {
            n: 5,
            eps: (-1.0f64).exp(),
            closed: false,
        })
        .unwrap();
        assert_eq!(open.rank, 6);
        let closed = bowen_ball_rank(&BallSpec {
            n: 5,
            eps: (-1.0f64).exp(),
            closed: true,
        })
        .unwrap();
        assert_eq!(closed.rank, 5);
        let whole = bowen_ball_rank(&BallSpec {
            n: 1,
            eps: 1.0,
            closed: true,
        })
        .unwrap();
        assert_eq!(whole.rank, 0);
        assert!(!whole.clamped);
    }

    #[test]
    fn ball_rank_clamps_huge_radius() {
        let r = bowen_ball_rank(&BallSpec {
            n: 1,
            eps: 100.0,
            closed: true,
        })
        .unwrap();
        assert_eq!(r.rank, 0);
        assert!(r.clamped);
        assert!(bowen_ball_rank(&BallSpec {
            n: 1,
            eps: 0.0,
            closed: true
        })
        .is_err());
    }

    #[test]
    fn open_and_closed_ranks_differ_only_on_the_integer_ladder() {
        for n in 0..12 {
            for r in 1..6 {
                let eps = (-(r as f64)).exp();
                let open = bowen_ball_rank(&BallSpec {
                    n,
                    eps,
                    closed: false,
                })
                .unwrap();
                let closed = bowen_ball_rank(&BallSpec {
                    n,
                    eps,
                    closed: true,
                })
                .unwrap();
                assert_eq!(open.rank, closed.rank + 1, "integer ladder at r={r}");

                let eps = (-(r as f64 + 0.5)).exp();
                let open = bowen_ball_rank(&BallSpec {
                    n,
                    eps,
                    closed: false,
                })
                .unwrap();
                let closed = bowen_ball_rank(&BallSpec {
                    n,
                    eps,
                    closed: true,
                })
                .unwrap();
                assert_eq!(open.rank, closed.rank, "non-integer radius at r={r}.5");
            }
        }
    }

    #[test]
    fn net_relation_examples() {
        let m = m2();
        let u = Word::new(&m, 0, vec![1]).unwrap();
        let v = Word::new(&m, 0, vec![1, 2]).unwrap();
        assert_eq!(
            net_relation(&u, &v).unwrap(),
            NetRelation::FirstContainsSecond
        );
        let w = Word::new(&m, 0, vec![1, 1]).unwrap();
        assert_eq!(net_relation(&w, &v).unwrap(), NetRelation::Disjoint);
        assert_eq!(net_relation(&v, &v).unwrap(), NetRelation::Equal);
        let empty = Word::empty(0);
        assert_eq!(
            net_relation(&empty, &v).unwrap(),
            NetRelation::FirstContainsSecond
        );
    }

    /// Brute-force set relation: extend both words to a common depth and
    /// compare the extension sets.
    fn extensions(m: &AlphabetSeq, w: &Word, depth: usize) -> HashSet<Vec<u32>> {
        let mut out = HashSet::new();
        let tail = depth - w.len();
        if tail == 0 {
            out.insert(w.symbols().to_vec());
            return out;
        }
        for suffix in words_of_rank(m, w.level() + w.len(), tail) {
            let mut v = w.symbols().to_vec();
            v.extend_from_slice(suffix.symbols());
            out.insert(v);
        }
        out
    }

    #[test]
    fn net_relation_matches_set_containment_oracle() {
        let m = m23();
        let depth = 5;
        let mut words = vec![Word::empty(0)];
        for rank in 1..=depth {
            words.extend(words_of_rank(&m, 0, rank));
        }
        for u in &words {
            for v in &words {
                let eu = extensions(&m, u, depth);
                let ev = extensions(&m, v, depth);
                let expected = if eu == ev {
                    NetRelation::Equal
                } else if ev.is_subset(&eu) {
                    NetRelation::FirstContainsSecond
                } else if eu.is_subset(&ev) {
                    NetRelation::SecondContainsFirst
                } else {
                    assert!(eu.is_disjoint(&ev), "cylinders must nest or be disjoint");
                    NetRelation::Disjoint
                };
                assert_eq!(net_relation(u, v).unwrap(), expected);
            }
        }
    }

    #[test]
    fn shift_examples() {
        let m = AlphabetSeq::new(vec![3, 3, 3], vec![3]).unwrap();
        let w = Word::new(&m, 0, vec![1, 2, 3]).unwrap();
        let s = w.shift().unwrap();
        assert_eq!(s.level(), 1);
        assert_eq!(s.symbols(), &[2, 3]);

        let mut p = PointPrefix::finite(0, vec![1, 2, 3]);
        for _ in 0..3 {
            p = p.shift().unwrap();
        }
        assert_eq!(p.level(), 3);
        assert_eq!(p.depth(), Some(0));
        assert!(p.shift().is_err());

        let q = PointPrefix::periodic(0, vec![], vec![1, 2]).unwrap();
        let qq = q.shift().unwrap().shift().unwrap();
        assert_eq!(qq.level(), 2);
        assert_eq!(qq.symbol(0), Some(1));
    }

    #[test]
    fn count_admissible_examples() {
        let m = m2();
        assert_eq!(m.count_admissible(0, 3), BigUint::from(8u32));
        let m = m23();
        assert_eq!(m.count_admissible(0, 2), BigUint::from(6u32));
        assert_eq!(m.count_admissible(7, 0), BigUint::from(1u32));
    }

    #[test]
    fn count_admissible_never_overflows() {
        let m = AlphabetSeq::constant(1000).unwrap();
        let big = m.count_admissible(0, 40);
        assert_eq!(big, BigUint::from(1000u32).pow(40));
        assert!(m.count_admissible_capped(0, 40, u64::MAX / 2).is_err());
    }

    #[test]
    fn words_of_rank_is_lexicographic_and_complete() {
        let m = m23();
        let all: Vec<Word> = words_of_rank(&m, 0, 3).collect();
        assert_eq!(all.len(), 12); // 2 * 3 * 2
        assert_eq!(all[0].symbols(), &[1, 1, 1]);
        assert_eq!(all[11].symbols(), &[2, 3, 2]);
        let mut sorted = all.clone();
        sorted.sort_by(|a, b| a.symbols().cmp(b.symbols()));
        assert_eq!(all, sorted);
    }

    proptest! {
        #[test]
        fn count_recurrence(k in 0usize..6, n in 0usize..10) {
            let m = AlphabetSeq::new(vec![4, 2], vec![2, 3, 5]).unwrap();
            let lhs = m.count_admissible(k, n + 1);
            let rhs = m.count_admissible(k, n) * m.size(k + n);
            prop_assert_eq!(lhs, rhs);
        }

        /// The metric is an ultrametric; exact in floats because all values
        /// are e^-integer.
        #[test]
        fn ultrametric_on_sampled_triples(
            a in proptest::collection::vec(1u32..=2, 12),
            b in proptest::collection::vec(1u32..=2, 12),
            c in proptest::collection::vec(1u32..=2, 12),
        ) {
            let pa = PointPrefix::finite(0, a);
            let pb = PointPrefix::finite(0, b);
            let pc = PointPrefix::finite(0, c);
            let dab = metric(&pa, &pb, 12).unwrap().value;
            let dbc = metric(&pb, &pc, 12).unwrap().value;
            let dac = metric(&pa, &pc, 12).unwrap().value;
            prop_assert!(dac <= dab.max(dbc));
        }

        #[test]
        fn curtailment_is_a_valid_word(n in 0usize..8) {
            let m = m23();
            let p = PointPrefix::periodic(0, vec![1, 2], vec![1, 3]).unwrap();
            p.validate(&m, 8).unwrap();
            let w = p.curtail(n).unwrap();
            prop_assert_eq!(w.len(), n);
            prop_assert!(Word::new(&m, 0, w.symbols().to_vec()).is_ok());
        }
    }
}
