//! Finite-horizon reals, slaloms and the three combinatorial relations.
//!
//! Every object here is a prefix of an element of Baire space cut off at a
//! common horizon `N`. "For all but finitely many `l`" becomes "for all `l`
//! in the tail `[k, N)`", and every relation query returns the least such
//! `k` together with a flag saying whether the tail was empty.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatoricsError {
    #[error("HorizonMismatch: left horizon {left}, right horizon {right}")]
    HorizonMismatch { left: usize, right: usize },
    #[error("WrongTarget: relation `{relation}` needs a {expected} target")]
    WrongTarget {
        relation: RelationKind,
        expected: &'static str,
    },
    #[error("UnsupportedRelation: `{relation}` is not available in {context}")]
    UnsupportedRelation {
        relation: RelationKind,
        context: &'static str,
    },
    #[error("WidthExceeded: |cells({position})| = {size} exceeds width {width}")]
    WidthExceeded {
        position: usize,
        size: usize,
        width: usize,
    },
    #[error("HorizonMismatch: family declares horizon {declared} but member {member} has horizon {actual}")]
    MemberHorizon {
        declared: usize,
        member: usize,
        actual: usize,
    },
}

/// A finite prefix `f(0), ..., f(N-1)` of a function `ω → ω`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FinFunc(pub Vec<u64>);

impl FinFunc {
    pub fn new(values: Vec<u64>) -> Self {
        FinFunc(values)
    }

    pub fn zeros(horizon: usize) -> Self {
        FinFunc(vec![0; horizon])
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, n: usize) -> Option<u64> {
        self.0.get(n).copied()
    }

    /// Pointwise successor `n ↦ f(n) + 1`.
    pub fn successor(&self) -> FinFunc {
        FinFunc(self.0.iter().map(|v| v + 1).collect())
    }

    pub fn truncated(&self, horizon: usize) -> FinFunc {
        FinFunc(self.0.iter().take(horizon).copied().collect())
    }

    pub fn is_prefix_of(&self, other: &FinFunc) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<u64>> for FinFunc {
    fn from(values: Vec<u64>) -> Self {
        FinFunc(values)
    }
}

impl std::ops::Index<usize> for FinFunc {
    type Output = u64;
    fn index(&self, n: usize) -> &u64 {
        &self.0[n]
    }
}

/// Width bounds `h(0), h(1), ...` for an `h`-slalom. Monotonicity is not required.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WidthProfile(pub Vec<usize>);

impl WidthProfile {
    pub fn new(widths: Vec<usize>) -> Self {
        WidthProfile(widths)
    }

    /// `h(n) = n`, the width profile of ordinary slaloms.
    pub fn identity(horizon: usize) -> Self {
        WidthProfile((0..horizon).collect())
    }

    pub fn constant(width: usize, horizon: usize) -> Self {
        WidthProfile(vec![width; horizon])
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    pub fn width(&self, n: usize) -> usize {
        self.0[n]
    }

    pub fn widths(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Deserialize)]
struct RawSlalom {
    width: Vec<usize>,
    cells: Vec<Vec<u64>>,
}

/// A finite-horizon `h`-slalom: `|cells(n)| ≤ width(n)` for every `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSlalom")]
pub struct Slalom {
    width: WidthProfile,
    cells: Vec<BTreeSet<u64>>,
}

impl TryFrom<RawSlalom> for Slalom {
    type Error = CombinatoricsError;

    fn try_from(raw: RawSlalom) -> Result<Self, Self::Error> {
        let cells = raw
            .cells
            .into_iter()
            .map(|c| c.into_iter().collect())
            .collect();
        Slalom::new(WidthProfile(raw.width), cells)
    }
}

impl Slalom {
    pub fn new(width: WidthProfile, cells: Vec<BTreeSet<u64>>) -> Result<Self, CombinatoricsError> {
        if width.horizon() != cells.len() {
            return Err(CombinatoricsError::HorizonMismatch {
                left: width.horizon(),
                right: cells.len(),
            });
        }
        for (n, cell) in cells.iter().enumerate() {
            if cell.len() > width.width(n) {
                return Err(CombinatoricsError::WidthExceeded {
                    position: n,
                    size: cell.len(),
                    width: width.width(n),
                });
            }
        }
        Ok(Slalom { width, cells })
    }

    /// Slalom with `h(n) = n`; in particular `cells(0)` must be empty.
    pub fn identity(cells: Vec<BTreeSet<u64>>) -> Result<Self, CombinatoricsError> {
        let width = WidthProfile::identity(cells.len());
        Slalom::new(width, cells)
    }

    pub fn from_cells<I, C>(width: WidthProfile, cells: I) -> Result<Self, CombinatoricsError>
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = u64>,
    {
        let cells = cells.into_iter().map(|c| c.into_iter().collect()).collect();
        Slalom::new(width, cells)
    }

    pub fn horizon(&self) -> usize {
        self.cells.len()
    }

    pub fn width(&self) -> &WidthProfile {
        &self.width
    }

    pub fn cell(&self, n: usize) -> &BTreeSet<u64> {
        &self.cells[n]
    }

    pub fn cells(&self) -> &[BTreeSet<u64>] {
        &self.cells
    }
}

#[derive(Deserialize)]
struct RawFamily {
    horizon: usize,
    functions: Vec<FinFunc>,
}

/// A finite stand-in for the basic reals. Members share the horizon and may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct Family {
    horizon: usize,
    functions: Vec<FinFunc>,
}

impl TryFrom<RawFamily> for Family {
    type Error = CombinatoricsError;

    fn try_from(raw: RawFamily) -> Result<Self, Self::Error> {
        Family::new(raw.horizon, raw.functions)
    }
}

impl Family {
    pub fn new(horizon: usize, functions: Vec<FinFunc>) -> Result<Self, CombinatoricsError> {
        for (i, f) in functions.iter().enumerate() {
            if f.horizon() != horizon {
                return Err(CombinatoricsError::MemberHorizon {
                    declared: horizon,
                    member: i,
                    actual: f.horizon(),
                });
            }
        }
        Ok(Family { horizon, functions })
    }

    pub fn empty(horizon: usize) -> Self {
        Family {
            horizon,
            functions: Vec::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn members(&self) -> &[FinFunc] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Appends a member, keeping duplicates.
    pub fn with_member(&self, f: FinFunc) -> Result<Family, CombinatoricsError> {
        let mut functions = self.functions.clone();
        functions.push(f);
        Family::new(self.horizon, functions)
    }

    /// Multiset inclusion: every member of `self` is matched by a distinct equal member of `other`.
    pub fn is_submultiset_of(&self, other: &Family) -> bool {
        let mut pool: Vec<&FinFunc> = other.functions.iter().collect();
        for f in &self.functions {
            match pool.iter().position(|g| *g == f) {
                Some(i) => {
                    pool.swap_remove(i);
                }
                None => return false,
            }
        }
        true
    }

    /// Pointwise sum over the family; the empty sum is constantly 0.
    pub fn pointwise_sum(&self) -> FinFunc {
        let mut sum = vec![0u64; self.horizon];
        for f in &self.functions {
            for (s, v) in sum.iter_mut().zip(f.values()) {
                *s += v;
            }
        }
        FinFunc(sum)
    }

    pub fn truncated(&self, horizon: usize) -> Family {
        let horizon = horizon.min(self.horizon);
        Family {
            horizon,
            functions: self.functions.iter().map(|f| f.truncated(horizon)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    /// `f(l) ≤ g(l)`
    Leq,
    /// `f(l) ≠ g(l)`
    Neq,
    /// `f(l) ∈ σ(l)`
    In,
    /// `f(l) = g(l)`, used for hit counts.
    Eq,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationKind::Leq => "leq",
            RelationKind::Neq => "neq",
            RelationKind::In => "in",
            RelationKind::Eq => "eq",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leq" => Ok(RelationKind::Leq),
            "neq" => Ok(RelationKind::Neq),
            "in" => Ok(RelationKind::In),
            "eq" => Ok(RelationKind::Eq),
            other => Err(format!("unknown relation `{other}`")),
        }
    }
}

/// Right-hand side of a relation: another function, or a slalom for `∈`.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Func(&'a FinFunc),
    Slalom(&'a Slalom),
}

impl<'a> From<&'a FinFunc> for Target<'a> {
    fn from(f: &'a FinFunc) -> Self {
        Target::Func(f)
    }
}

impl<'a> From<&'a Slalom> for Target<'a> {
    fn from(s: &'a Slalom) -> Self {
        Target::Slalom(s)
    }
}

impl Target<'_> {
    fn horizon(&self) -> usize {
        match self {
            Target::Func(g) => g.horizon(),
            Target::Slalom(s) => s.horizon(),
        }
    }
}

/// Least tail start witnessing a relation. `vacuous` iff the tail is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub threshold: usize,
    pub vacuous: bool,
}

impl ThresholdReport {
    fn new(threshold: usize, horizon: usize) -> Self {
        ThresholdReport {
            threshold,
            vacuous: threshold == horizon,
        }
    }
}

fn check_horizon(f: &FinFunc, target: Target<'_>) -> Result<usize, CombinatoricsError> {
    let n = f.horizon();
    if n != target.horizon() {
        return Err(CombinatoricsError::HorizonMismatch {
            left: n,
            right: target.horizon(),
        });
    }
    Ok(n)
}

/// Pointwise predicate of `rel` at position `l`. Shapes must already be checked.
fn holds_at(rel: RelationKind, f: &FinFunc, target: Target<'_>, l: usize) -> Result<bool, CombinatoricsError> {
    match (rel, target) {
        (RelationKind::Leq, Target::Func(g)) => Ok(f[l] <= g[l]),
        (RelationKind::Neq, Target::Func(g)) => Ok(f[l] != g[l]),
        (RelationKind::Eq, Target::Func(g)) => Ok(f[l] == g[l]),
        (RelationKind::In, Target::Slalom(s)) => Ok(s.cell(l).contains(&f[l])),
        (RelationKind::In, Target::Func(_)) => Err(CombinatoricsError::WrongTarget {
            relation: rel,
            expected: "slalom",
        }),
        (_, Target::Slalom(_)) => Err(CombinatoricsError::WrongTarget {
            relation: rel,
            expected: "function",
        }),
    }
}

/// Least `k ∈ [0, N]` such that the pointwise property of `rel` holds on `[k, N)`.
pub fn least_threshold<'a>(
    rel: RelationKind,
    f: &FinFunc,
    target: impl Into<Target<'a>>,
) -> Result<ThresholdReport, CombinatoricsError> {
    let target = target.into();
    if rel == RelationKind::Eq {
        return Err(CombinatoricsError::UnsupportedRelation {
            relation: rel,
            context: "least_threshold",
        });
    }
    let n = check_horizon(f, target)?;
    holds_at_shape(rel, target)?;
    let mut k = n;
    while k > 0 && holds_at(rel, f, target, k - 1)? {
        k -= 1;
    }
    Ok(ThresholdReport::new(k, n))
}

fn holds_at_shape(rel: RelationKind, target: Target<'_>) -> Result<(), CombinatoricsError> {
    match (rel, target) {
        (RelationKind::In, Target::Slalom(_)) => Ok(()),
        (RelationKind::In, Target::Func(_)) => Err(CombinatoricsError::WrongTarget {
            relation: rel,
            expected: "slalom",
        }),
        (_, Target::Func(_)) => Ok(()),
        (_, Target::Slalom(_)) => Err(CombinatoricsError::WrongTarget {
            relation: rel,
            expected: "function",
        }),
    }
}

/// Number of positions where `f(l) = g(l)` (`Eq`) or `f(l) ∈ σ(l)` (`In`).
pub fn hit_count<'a>(
    rel: RelationKind,
    f: &FinFunc,
    target: impl Into<Target<'a>>,
) -> Result<usize, CombinatoricsError> {
    let target = target.into();
    if !matches!(rel, RelationKind::Eq | RelationKind::In) {
        return Err(CombinatoricsError::UnsupportedRelation {
            relation: rel,
            context: "hit_count",
        });
    }
    let n = check_horizon(f, target)?;
    holds_at_shape(rel, target)?;
    let mut hits = 0;
    for l in 0..n {
        if holds_at(rel, f, target, l)? {
            hits += 1;
        }
    }
    Ok(hits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportMode {
    /// The witness bounds every member: per-member thresholds of `member R witness`.
    Bounding,
    /// The witness escapes every member: per-member counts of positions where
    /// `witness R member` fails pointwise.
    Evading,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relation: RelationKind,
    pub mode: ReportMode,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub thresholds: Vec<ThresholdReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub hits: Vec<usize>,
    /// 0 for an empty family.
    pub max_threshold: usize,
    /// `None` stands for +∞ (empty family or bounding mode).
    pub min_hits: Option<usize>,
}

/// Per-member relation report of a witness against a family.
///
/// Bounding mode accepts `leq`, `neq` and `in` (a slalom witness for `in`).
/// Evading mode accepts `leq`, `neq` and `eq` with a function witness; for
/// `neq` and `eq` the hits are the agreement positions.
pub fn family_report<'a>(
    rel: RelationKind,
    witness: impl Into<Target<'a>>,
    family: &Family,
    mode: ReportMode,
) -> Result<RelationReport, CombinatoricsError> {
    let witness = witness.into();
    if witness.horizon() != family.horizon() {
        return Err(CombinatoricsError::HorizonMismatch {
            left: witness.horizon(),
            right: family.horizon(),
        });
    }
    let mut report = RelationReport {
        relation: rel,
        mode,
        thresholds: Vec::new(),
        hits: Vec::new(),
        max_threshold: 0,
        min_hits: None,
    };
    match mode {
        ReportMode::Bounding => {
            if rel == RelationKind::Eq {
                return Err(CombinatoricsError::UnsupportedRelation {
                    relation: rel,
                    context: "bounding reports",
                });
            }
            holds_at_shape(rel, witness)?;
            for member in family.members() {
                let t = least_threshold(rel, member, witness)?;
                report.max_threshold = report.max_threshold.max(t.threshold);
                report.thresholds.push(t);
            }
        }
        ReportMode::Evading => {
            let Target::Func(w) = witness else {
                return Err(CombinatoricsError::UnsupportedRelation {
                    relation: rel,
                    context: "evading reports with a slalom witness",
                });
            };
            let pointwise = match rel {
                RelationKind::Leq => RelationKind::Leq,
                RelationKind::Neq | RelationKind::Eq => RelationKind::Neq,
                RelationKind::In => {
                    return Err(CombinatoricsError::UnsupportedRelation {
                        relation: rel,
                        context: "evading reports",
                    })
                }
            };
            for member in family.members() {
                let mut fails = 0;
                for l in 0..w.horizon() {
                    if !holds_at(pointwise, w, Target::Func(member), l)? {
                        fails += 1;
                    }
                }
                report.min_hits = Some(report.min_hits.map_or(fails, |m| m.min(fails)));
                report.hits.push(fails);
            }
        }
    }
    Ok(report)
}
