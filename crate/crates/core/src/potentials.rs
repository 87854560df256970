//! Potential sequences f = (f_k), their Birkhoff sums, first-coordinate
//! envelopes, and bounded-variation diagnostics.
//!
//! Two representations are supported.  A first-coordinate potential stores
//! a value a(k, i) per level k and symbol i; a depth-D potential stores a
//! value per D-symbol prefix.  Both are eventually periodic in k.

use crate::seqspace::{AlphabetSeq, PointPrefix};
use crate::util::{lcm, log_sum_exp};
use crate::{Error, Result};

/// Which representative of the first-coordinate interval
/// [inf f, sup f] to use when a general potential is reduced to a
/// first-coordinate table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvelopePolicy {
    Lower,
    #[default]
    Midpoint,
    Upper,
}

/// Table of values a(k, i), i in {1..m_k}, eventually periodic in k.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstCoordTable {
    head: Vec<Vec<f64>>,
    cycle: Vec<Vec<f64>>,
}

impl FirstCoordTable {
    pub fn new(m: &AlphabetSeq, head: Vec<Vec<f64>>, cycle: Vec<Vec<f64>>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidPotential(
                "periodic part must be nonempty".into(),
            ));
        }
        let table = Self { head, cycle };
        let span = table.head.len().max(m.transient_len())
            + lcm(table.cycle.len(), m.period_len());
        for k in 0..span {
            let row = table.row(k);
            if row.len() != m.size(k) as usize {
                return Err(Error::InvalidPotential(format!(
                    "row for level {k} has {} entries, alphabet needs {}",
                    row.len(),
                    m.size(k)
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidPotential(format!(
                    "non-finite entry {bad} at level {k}"
                )));
            }
        }
        Ok(table)
    }

    pub fn row(&self, k: usize) -> &[f64] {
        if k < self.head.len() {
            &self.head[k]
        } else {
            &self.cycle[(k - self.head.len()) % self.cycle.len()]
        }
    }

    /// a(k, i) for a 1-based symbol i.
    pub fn value(&self, k: usize, symbol: u32) -> f64 {
        self.row(k)[symbol as usize - 1]
    }

    pub fn head_rows(&self) -> &[Vec<f64>] {
        &self.head
    }

    pub fn cycle_rows(&self) -> &[Vec<f64>] {
        &self.cycle
    }

    pub fn sup_norm(&self) -> f64 {
        self.head
            .iter()
            .chain(self.cycle.iter())
            .flat_map(|r| r.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// log(sum_i exp(a(k, i))), stabilized.
    pub fn log_weight(&self, k: usize) -> f64 {
        log_sum_exp(self.row(k))
    }

    /// sum_i exp(a(k, i)), plain.
    pub fn weight(&self, k: usize) -> f64 {
        self.row(k).iter().map(|a| a.exp()).sum()
    }
}

/// Lower and upper first-coordinate envelopes of a potential.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    pub lower: FirstCoordTable,
    pub upper: FirstCoordTable,
}

impl EnvelopePair {
    pub fn select(&self, policy: EnvelopePolicy) -> FirstCoordTable {
        match policy {
            EnvelopePolicy::Lower => self.lower.clone(),
            EnvelopePolicy::Upper => self.upper.clone(),
            EnvelopePolicy::Midpoint => {
                let mid = |lo: &[Vec<f64>], hi: &[Vec<f64>]| -> Vec<Vec<f64>> {
                    lo.iter()
                        .zip(hi)
                        .map(|(l, h)| l.iter().zip(h).map(|(a, b)| 0.5 * (a + b)).collect())
                        .collect()
                };
                FirstCoordTable {
                    head: mid(&self.lower.head, &self.upper.head),
                    cycle: mid(&self.lower.cycle, &self.upper.cycle),
                }
            }
        }
    }
}

/// A potential sequence: either first-coordinate or finite-depth.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSeq {
    FirstCoord(FirstCoordTable),
    DepthD {
        depth: usize,
        head: Vec<Vec<f64>>,
        cycle: Vec<Vec<f64>>,
    },
}

impl PotentialSeq {
    pub fn first_coord(m: &AlphabetSeq, head: Vec<Vec<f64>>, cycle: Vec<Vec<f64>>) -> Result<Self> {
        Ok(PotentialSeq::FirstCoord(FirstCoordTable::new(m, head, cycle)?))
    }

    /// Depth-D potential: the row for level k has one entry per admissible
    /// D-prefix (w_0, ..., w_{D-1}), w_j in {1..m(k+j)}, indexed in mixed
    /// radix with w_0 most significant.
    pub fn depth_d(
        m: &AlphabetSeq,
        depth: usize,
        head: Vec<Vec<f64>>,
        cycle: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidPotential("depth must be at least 1".into()));
        }
        if cycle.is_empty() {
            return Err(Error::InvalidPotential(
                "periodic part must be nonempty".into(),
            ));
        }
        let pot = PotentialSeq::DepthD { depth, head, cycle };
        let (h, c) = match &pot {
            PotentialSeq::DepthD { head, cycle, .. } => (head.len(), cycle.len()),
            _ => unreachable!(),
        };
        let span = h.max(m.transient_len()) + lcm(c, m.period_len()) + depth;
        for k in 0..span {
            let row = pot.raw_row(k);
            let expect = m.count_admissible_capped(k, depth, 1 << 24)?;
            if row.len() as u64 != expect {
                return Err(Error::InvalidPotential(format!(
                    "row for level {k} has {} entries, expected {expect}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidPotential(format!(
                    "non-finite entry {bad} at level {k}"
                )));
            }
        }
        Ok(pot)
    }

    /// The constant potential f_k = c.
    pub fn constant(m: &AlphabetSeq, c: f64) -> Self {
        let head = (0..m.transient_len())
            .map(|k| vec![c; m.size(k) as usize])
            .collect();
        let cycle = (m.transient_len()..m.transient_len() + m.period_len())
            .map(|k| vec![c; m.size(k) as usize])
            .collect();
        PotentialSeq::FirstCoord(FirstCoordTable { head, cycle })
    }

    pub fn zero(m: &AlphabetSeq) -> Self {
        Self::constant(m, 0.0)
    }

    pub fn depth(&self) -> usize {
        match self {
            PotentialSeq::FirstCoord(_) => 1,
            PotentialSeq::DepthD { depth, .. } => *depth,
        }
    }

    fn raw_row(&self, k: usize) -> &[f64] {
        match self {
            PotentialSeq::FirstCoord(t) => t.row(k),
            PotentialSeq::DepthD { head, cycle, .. } => {
                if k < head.len() {
                    &head[k]
                } else {
                    &cycle[(k - head.len()) % cycle.len()]
                }
            }
        }
    }

    /// f_k evaluated on a point whose first `depth` symbols from level k
    /// are `symbols`.
    pub fn value(&self, m: &AlphabetSeq, k: usize, symbols: &[u32]) -> f64 {
        match self {
            PotentialSeq::FirstCoord(t) => t.value(k, symbols[0]),
            PotentialSeq::DepthD { depth, .. } => {
                let mut idx = 0usize;
                for j in 0..*depth {
                    idx = idx * m.size(k + j) as usize + (symbols[j] as usize - 1);
                }
                self.raw_row(k)[idx]
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            PotentialSeq::FirstCoord(t) => t.sup_norm(),
            PotentialSeq::DepthD { head, cycle, .. } => head
                .iter()
                .chain(cycle.iter())
                .flat_map(|r| r.iter())
                .fold(0.0f64, |acc, v| acc.max(v.abs())),
        }
    }

    /// Lower and upper envelopes over first-coordinate cylinders:
    /// a_*(k, i) = inf over [i]_k of f_k and a^*(k, i) = sup over [i]_k.
    /// A first-coordinate potential is its own envelope on both sides.
    pub fn envelopes(&self, m: &AlphabetSeq) -> EnvelopePair {
        match self {
            PotentialSeq::FirstCoord(t) => EnvelopePair {
                lower: t.clone(),
                upper: t.clone(),
            },
            PotentialSeq::DepthD { depth, head, cycle } => {
                let h = head.len().max(m.transient_len());
                let l = lcm(cycle.len(), m.period_len());
                let mut lo_rows = Vec::with_capacity(h + l);
                let mut hi_rows = Vec::with_capacity(h + l);
                for k in 0..h + l {
                    let row = self.raw_row(k);
                    let syms = m.size(k) as usize;
                    // entries with first symbol i occupy a contiguous block
                    let block = row.len() / syms;
                    let mut lo = Vec::with_capacity(syms);
                    let mut hi = Vec::with_capacity(syms);
                    for i in 0..syms {
                        let slice = &row[i * block..(i + 1) * block];
                        lo.push(slice.iter().cloned().fold(f64::INFINITY, f64::min));
                        hi.push(slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
                    }
                    lo_rows.push(lo);
                    hi_rows.push(hi);
                }
                let _ = depth;
                EnvelopePair {
                    lower: FirstCoordTable {
                        head: lo_rows[..h].to_vec(),
                        cycle: lo_rows[h..].to_vec(),
                    },
                    upper: FirstCoordTable {
                        head: hi_rows[..h].to_vec(),
                        cycle: hi_rows[h..].to_vec(),
                    },
                }
            }
        }
    }

    /// Envelope pair collapsed to a single table by the given policy.
    pub fn reduce(&self, m: &AlphabetSeq, policy: EnvelopePolicy) -> FirstCoordTable {
        self.envelopes(m).select(policy)
    }

    /// The single value the potential is eventually pinned to, when the
    /// whole periodic part is one constant.  For such potentials the
    /// level-k values converge pointwise along every orbit, which is the
    /// one representable case of the alternative pressure hypothesis.
    pub fn eventually_constant_value(&self) -> Option<f64> {
        let rows: &[Vec<f64>] = match self {
            PotentialSeq::FirstCoord(t) => &t.cycle,
            PotentialSeq::DepthD { cycle, .. } => cycle,
        };
        let c = *rows.first()?.first()?;
        rows.iter()
            .all(|r| r.iter().all(|v| *v == c))
            .then_some(c)
    }
}

/// S_n f along a point: sum of f_{k+j} over the shifted orbit, j < n,
/// where k is the point's level.  Needs the point resolvable to depth
/// n + D - 1.
pub fn birkhoff_sum(
    m: &AlphabetSeq,
    f: &PotentialSeq,
    omega: &PointPrefix,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let d = f.depth();
    let need = n + d - 1;
    let w = omega.curtail(need)?;
    let syms = w.symbols();
    let mut acc = 0.0;
    for j in 0..n {
        acc += f.value(m, omega.level() + j, &syms[j..j + d]);
    }
    Ok(acc)
}

/// Bounded-variation diagnostic.  `oscillations[j]` is the worst gap
/// between the upper and lower envelope at level j; the cumulative sum
/// bounds |S_n f^* - S_n f_*| on every rank-n cylinder.  A summable tail
/// of oscillations is evidence of strongly bounded variation, reported via
/// `tail_nonincreasing`.
#[derive(Debug, Clone)]
pub struct SbvReport {
    pub bound: f64,
    pub oscillations: Vec<f64>,
    pub tail_nonincreasing: bool,
}

pub fn sbv_bound(m: &AlphabetSeq, f: &PotentialSeq, n_max: usize) -> Result<SbvReport> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let env = f.envelopes(m);
    let oscillations: Vec<f64> = (0..n_max)
        .map(|j| {
            let lo = env.lower.row(j);
            let hi = env.upper.row(j);
            lo.iter()
                .zip(hi)
                .map(|(a, b)| b - a)
                .fold(0.0f64, f64::max)
        })
        .collect();
    let bound = oscillations.iter().sum();
    let tail = &oscillations[n_max / 2..];
    let tail_nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(SbvReport {
        bound,
        oscillations,
        tail_nonincreasing,
    })
}
