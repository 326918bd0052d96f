//! Witness-building constructions behind the provable inclusions of the diagram.
//!
//! Each function turns finite surrogate data (a slalom, a family of basic
//! reals, a block partition) into the real or slalom that witnesses an
//! inclusion between two nodes. Conventions used throughout: `max ∅ = 0`
//! and `Σ ∅ = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::combinatorics::{least_threshold, Family, FinFunc, RelationKind, Slalom, ThresholdReport, WidthProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("EmptyFamily: the construction needs at least one member")]
    EmptyFamily,
    #[error("ZeroWidth: h({block}) = 0, every block needs at least one cell")]
    ZeroWidth { block: usize },
    #[error("HorizonTooShort: need horizon {needed}, got {actual}")]
    HorizonTooShort { needed: usize, actual: usize },
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("NoAdmissibleString: σ({position}) covers every binary string of length {position}")]
    NoAdmissibleString { position: usize },
    #[error("PositionTooLarge: strings of length {position} do not fit 64-bit indices")]
    PositionTooLarge { position: usize },
}

/// A partial function `ω ⇀ ω` with finite domain.
pub type PartialFunc = BTreeMap<usize, u64>;

fn max_or_zero(cell: &BTreeSet<u64>) -> u64 {
    cell.last().copied().unwrap_or(0)
}

/// `z(n) = max σ(n) + 1`. Eventually dominates everything `σ` eventually captures.
pub fn slalom_dominator(sigma: &Slalom) -> FinFunc {
    FinFunc(sigma.cells().iter().map(|c| max_or_zero(c) + 1).collect())
}

/// `z(n) = 1 + Σ σ(n)`. No value `≥ z(n)` lies in `σ(n)`.
pub fn sum_evader_bound(sigma: &Slalom) -> FinFunc {
    FinFunc(sigma.cells().iter().map(|c| 1 + c.iter().sum::<u64>()).collect())
}

/// `d(n) = 1 + max_f f(n)`; every member is below `d` from position 0.
pub fn family_dominator(family: &Family) -> FinFunc {
    FinFunc(
        (0..family.horizon())
            .map(|n| 1 + family.members().iter().map(|f| f[n]).max().unwrap_or(0))
            .collect(),
    )
}

/// `g(n) = f_{n mod |F|}(n)`: meets each member at least `⌊N/|F|⌋` times.
pub fn round_robin_ioe(family: &Family) -> Result<FinFunc, ConstructionError> {
    let members = family.members();
    if members.is_empty() {
        return Err(ConstructionError::EmptyFamily);
    }
    Ok(FinFunc((0..family.horizon()).map(|n| members[n % members.len()][n]).collect()))
}

/// The 1-slalom `n ↦ {g(n)}`.
pub fn singleton_slalom(g: &FinFunc) -> Slalom {
    Slalom::from_cells(
        WidthProfile::constant(1, g.horizon()),
        g.values().iter().map(|&v| [v]),
    )
    .expect("singleton cells fit width 1")
}

/// Identity-width slalom with `cells(n) = {f_i(n) : i < min(n, |F|)}`.
///
/// Member `i` is captured from position `i + 1` on; the returned reports are
/// the actual least capture thresholds, which never exceed `min(i + 1, N)`.
pub fn family_slalom(family: &Family) -> (Slalom, Vec<ThresholdReport>) {
    let members = family.members();
    let cells: Vec<BTreeSet<u64>> = (0..family.horizon())
        .map(|n| members.iter().take(n).map(|f| f[n]).collect())
        .collect();
    let sigma = Slalom::identity(cells).expect("cell n holds at most n values");
    let reports = members
        .iter()
        .map(|f| least_threshold(RelationKind::In, f, &sigma).expect("shared horizon"))
        .collect();
    (sigma, reports)
}

/// Disjoint nonempty position sets `J_{n,k}`, `k = 1..=h(n)`, covering `[0, covered)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition")]
pub struct BlockPartition {
    width: WidthProfile,
    /// `cells[n][k - 1]` is `J_{n,k}`.
    cells: Vec<Vec<BTreeSet<usize>>>,
    #[serde(skip)]
    covered: usize,
}

#[derive(Deserialize)]
struct RawPartition {
    width: WidthProfile,
    cells: Vec<Vec<BTreeSet<usize>>>,
}

impl TryFrom<RawPartition> for BlockPartition {
    type Error = ConstructionError;

    fn try_from(raw: RawPartition) -> Result<Self, Self::Error> {
        BlockPartition::from_cells(raw.width, raw.cells)
    }
}

impl BlockPartition {
    /// Checks disjointness, nonemptiness, `h(n)` cells per block and that the
    /// union is an initial segment of ω.
    pub fn from_cells(width: WidthProfile, cells: Vec<Vec<BTreeSet<usize>>>) -> Result<Self, ConstructionError> {
        if width.horizon() < cells.len() {
            return Err(ConstructionError::ShapeMismatch(format!(
                "{} blocks but only {} widths",
                cells.len(),
                width.horizon()
            )));
        }
        let mut seen = BTreeSet::new();
        for (n, block) in cells.iter().enumerate() {
            if width.width(n) == 0 {
                return Err(ConstructionError::ZeroWidth { block: n });
            }
            if block.len() != width.width(n) {
                return Err(ConstructionError::ShapeMismatch(format!(
                    "block {n} has {} cells, h({n}) = {}",
                    block.len(),
                    width.width(n)
                )));
            }
            for (k, cell) in block.iter().enumerate() {
                if cell.is_empty() {
                    return Err(ConstructionError::ShapeMismatch(format!("J_{{{n},{}}} is empty", k + 1)));
                }
                for &x in cell {
                    if !seen.insert(x) {
                        return Err(ConstructionError::ShapeMismatch(format!("position {x} is in two cells")));
                    }
                }
            }
        }
        let covered = seen.len();
        if seen.last().is_some_and(|&m| m + 1 != covered) {
            return Err(ConstructionError::ShapeMismatch(
                "cells do not cover an initial segment of positions".into(),
            ));
        }
        let width = WidthProfile(width.widths()[..cells.len()].to_vec());
        Ok(BlockPartition { width, cells, covered })
    }

    /// Singleton cells assigned to consecutive positions.
    pub fn singletons(h: &WidthProfile, block_count: usize) -> Result<Self, ConstructionError> {
        Self::intervals(h, block_count, 1)
    }

    /// Cells of `cell_len` consecutive positions each.
    pub fn intervals(h: &WidthProfile, block_count: usize, cell_len: usize) -> Result<Self, ConstructionError> {
        if h.horizon() < block_count {
            return Err(ConstructionError::ShapeMismatch(format!(
                "{block_count} blocks requested but only {} widths",
                h.horizon()
            )));
        }
        if cell_len == 0 {
            return Err(ConstructionError::ShapeMismatch("cells must be nonempty".into()));
        }
        let mut next = 0usize;
        let mut cells = Vec::with_capacity(block_count);
        for n in 0..block_count {
            let width = h.width(n);
            if width == 0 {
                return Err(ConstructionError::ZeroWidth { block: n });
            }
            let block = (0..width)
                .map(|_| {
                    let cell: BTreeSet<usize> = (next..next + cell_len).collect();
                    next += cell_len;
                    cell
                })
                .collect();
            cells.push(block);
        }
        Ok(BlockPartition {
            width: WidthProfile(h.widths()[..block_count].to_vec()),
            cells,
            covered: next,
        })
    }

    pub fn width(&self) -> &WidthProfile {
        &self.width
    }

    pub fn block_count(&self) -> usize {
        self.cells.len()
    }

    pub fn covered_horizon(&self) -> usize {
        self.covered
    }

    /// `J_{n,k}` with `k` 1-indexed.
    pub fn cell(&self, n: usize, k: usize) -> &BTreeSet<usize> {
        &self.cells[n][k - 1]
    }

    pub fn cells_of(&self, n: usize) -> &[BTreeSet<usize>] {
        &self.cells[n]
    }

    /// `J_n = ⋃_k J_{n,k}`.
    pub fn block(&self, n: usize) -> BTreeSet<usize> {
        self.cells[n].iter().flatten().copied().collect()
    }
}

/// `f'(n) = f ↾ J_n` for each block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockFunc {
    pub entries: Vec<PartialFunc>,
}

/// Per block `n`, at most `h(n)` partial functions on `J_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSlalom {
    pub width: WidthProfile,
    pub entries: Vec<Vec<PartialFunc>>,
}

impl BlockSlalom {
    /// Entry `n` padded with constantly-0 functions up to `h(n)` members.
    pub fn padded_entry(&self, n: usize, partition: &BlockPartition) -> Vec<PartialFunc> {
        let mut entry = self.entries[n].clone();
        let zero: PartialFunc = partition.block(n).into_iter().map(|x| (x, 0)).collect();
        entry.resize(partition.width().width(n), zero);
        entry
    }

    /// Index `k` (1-based, after padding) of the first member extensionally equal to `f`.
    pub fn position_of(&self, n: usize, f: &PartialFunc, partition: &BlockPartition) -> Option<usize> {
        self.padded_entry(n, partition)
            .iter()
            .position(|w| w == f)
            .map(|i| i + 1)
    }
}

pub fn block_encode(f: &FinFunc, partition: &BlockPartition) -> Result<BlockFunc, ConstructionError> {
    if f.horizon() < partition.covered_horizon() {
        return Err(ConstructionError::HorizonTooShort {
            needed: partition.covered_horizon(),
            actual: f.horizon(),
        });
    }
    let entries = (0..partition.block_count())
        .map(|n| partition.block(n).into_iter().map(|x| (x, f[x])).collect())
        .collect();
    Ok(BlockFunc { entries })
}

/// `g = ⋃_n ⋃_k w^n_k ↾ J_{n,k}`, padding short entries with the constantly-0 function.
pub fn weave(sigma: &BlockSlalom, partition: &BlockPartition) -> Result<FinFunc, ConstructionError> {
    if sigma.entries.len() != partition.block_count() {
        return Err(ConstructionError::ShapeMismatch(format!(
            "block slalom has {} entries, partition has {} blocks",
            sigma.entries.len(),
            partition.block_count()
        )));
    }
    if sigma.width.widths().get(..partition.block_count()) != Some(partition.width().widths()) {
        return Err(ConstructionError::ShapeMismatch("width profiles differ".into()));
    }
    let mut g = vec![0u64; partition.covered_horizon()];
    for n in 0..partition.block_count() {
        let h = partition.width().width(n);
        if sigma.entries[n].len() > h {
            return Err(ConstructionError::ShapeMismatch(format!(
                "entry {n} has {} members, h({n}) = {h}",
                sigma.entries[n].len()
            )));
        }
        let block = partition.block(n);
        for (i, w) in sigma.entries[n].iter().enumerate() {
            if !w.keys().copied().eq(block.iter().copied()) {
                return Err(ConstructionError::ShapeMismatch(format!(
                    "w^{n}_{} is not defined exactly on J_{n}",
                    i + 1
                )));
            }
        }
        let padded = sigma.padded_entry(n, partition);
        for (k, w) in padded.iter().enumerate() {
            for &x in partition.cell(n, k + 1) {
                g[x] = w[&x];
            }
        }
    }
    Ok(FinFunc(g))
}

/// `k`-th greatest element (1-indexed) of a finite set, 0 when `|set| < k`.
fn kth_greatest(set: &BTreeSet<u64>, k: usize) -> u64 {
    set.iter().rev().nth(k - 1).copied().unwrap_or(0)
}

/// `w^n_k(l)` = the `k`-th greatest element of `σ(l)` for `l ∈ J_n`, 0 if absent.
pub fn columns_slalom(
    sigma: &Slalom,
    h: &WidthProfile,
    partition: &BlockPartition,
) -> Result<BlockSlalom, ConstructionError> {
    if h.widths().get(..partition.block_count()) != Some(partition.width().widths()) {
        return Err(ConstructionError::ShapeMismatch(
            "partition was not built from this width profile".into(),
        ));
    }
    if sigma.horizon() < partition.covered_horizon() {
        return Err(ConstructionError::HorizonTooShort {
            needed: partition.covered_horizon(),
            actual: sigma.horizon(),
        });
    }
    let entries = (0..partition.block_count())
        .map(|n| {
            let block = partition.block(n);
            (1..=partition.width().width(n))
                .map(|k| block.iter().map(|&l| (l, kth_greatest(sigma.cell(l), k))).collect())
                .collect()
        })
        .collect();
    Ok(BlockSlalom {
        width: partition.width().clone(),
        entries,
    })
}

/// `weave(columns_slalom(σ, h, P), P)`: on `J_{n,k}` it equals the `k`-th greatest element of `σ`.
pub fn avoider_witness(
    sigma: &Slalom,
    h: &WidthProfile,
    partition: &BlockPartition,
) -> Result<FinFunc, ConstructionError> {
    let columns = columns_slalom(sigma, h, partition)?;
    weave(&columns, partition)
}

/// A finite binary string; serialized as `{"bits": "0101"}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("`{other}` is not a binary digit")),
            })
            .collect::<Result<_, _>>()
            .map(BitString)
    }
}

#[derive(Serialize, Deserialize)]
struct BitsRepr {
    bits: String,
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BitsRepr { bits: self.to_string() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = BitsRepr::deserialize(deserializer)?;
        repr.bits.parse().map_err(D::Error::custom)
    }
}

/// Length-then-lexicographic enumeration `τ_0 = ε, τ_1 = 0, τ_2 = 1, τ_3 = 00, ...` of `2^{<ω}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StringEnumeration;

impl StringEnumeration {
    /// Strings of length `n` occupy `[2^n - 1, 2^{n+1} - 1)`.
    pub fn index_of(&self, s: &BitString) -> Result<u64, ConstructionError> {
        if s.len() >= 64 {
            return Err(ConstructionError::PositionTooLarge { position: s.len() });
        }
        let value = s.0.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        Ok((1u64 << s.len()) - 1 + value)
    }

    pub fn string_of(&self, index: u64) -> BitString {
        // index + 1 written in binary, leading 1 dropped.
        let shifted = u128::from(index) + 1;
        let len = 127 - shifted.leading_zeros() as usize;
        BitString((0..len).rev().map(|i| (shifted >> i) & 1 == 1).collect())
    }

    /// Index range of length-`n` strings, or `None` when it leaves 64 bits.
    pub fn length_range(&self, n: usize) -> Option<std::ops::Range<u64>> {
        if n >= 64 {
            return None;
        }
        let start = (1u64 << n) - 1;
        let end = start.checked_add(1u64 << n)?;
        Some(start..end)
    }
}

/// `ĝ(n) = k` where `g(n) = τ_k`.
pub fn string_encode(g: &[BitString], enumeration: &StringEnumeration) -> Result<FinFunc, ConstructionError> {
    g.iter()
        .map(|s| enumeration.index_of(s))
        .collect::<Result<Vec<_>, _>>()
        .map(FinFunc)
}

/// `f_σ(n) = τ_k` for the least `k ∉ σ(n)` with `|τ_k| = n`.
pub fn evasion_target(sigma: &Slalom, enumeration: &StringEnumeration) -> Result<Vec<BitString>, ConstructionError> {
    (0..sigma.horizon())
        .map(|n| {
            let range = enumeration
                .length_range(n)
                .ok_or(ConstructionError::PositionTooLarge { position: n })?;
            let cell = sigma.cell(n);
            // σ(n) is finite, so scanning |σ(n)| + 1 candidates suffices.
            range
                .take(cell.len() + 1)
                .find(|k| !cell.contains(k))
                .map(|k| enumeration.string_of(k))
                .ok_or(ConstructionError::NoAdmissibleString { position: n })
        })
        .collect()
}
