//! Forcing conditions, their orders, and the fusion orders on tree forcings.
//!
//! `leq(kind, a, b)` always asks whether `a` is stronger than `b` (`a ≤ b`).
//! Functions attached to conditions are finite prefixes at a shared working
//! horizon; trees are finite prefix-closed sets of node paths.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{Family, FinFunc};

/// A node of `ω^{<ω}`, written as its path from the root.
pub type Node = Vec<u32>;

/// Length first, then lexicographic.
pub fn length_lex(a: &Node, b: &Node) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

pub fn node_label(node: &Node) -> String {
    if node.is_empty() {
        return "ε".to_string();
    }
    node.iter().map(u32::to_string).collect::<Vec<_>>().join(".")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosetKind {
    Cohen,
    Hechler,
    E,
    Loc,
    Sacks,
    Laver,
    Product,
}

impl fmt::Display for PosetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PosetKind::Cohen => "cohen",
            PosetKind::Hechler => "hechler",
            PosetKind::E => "e",
            PosetKind::Loc => "loc",
            PosetKind::Sacks => "sacks",
            PosetKind::Laver => "laver",
            PosetKind::Product => "product",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for PosetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cohen" => Ok(PosetKind::Cohen),
            "hechler" => Ok(PosetKind::Hechler),
            "e" => Ok(PosetKind::E),
            "loc" => Ok(PosetKind::Loc),
            "sacks" => Ok(PosetKind::Sacks),
            "laver" => Ok(PosetKind::Laver),
            "product" => Ok(PosetKind::Product),
            other => Err(format!("unknown poset kind `{other}`")),
        }
    }
}

/// A broken definitional clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub position: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

impl Violation {
    fn new(clause: &str) -> Self {
        Violation {
            clause: clause.to_string(),
            position: None,
            detail: None,
        }
    }

    fn at(clause: &str, n: usize) -> Self {
        Violation {
            position: Some(n),
            ..Violation::new(clause)
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.clause)?;
        if let Some(n) = self.position {
            write!(f, " at n={n}")?;
        }
        if let Some(d) = &self.detail {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("KindMismatch: expected {expected}, got {found}")]
    KindMismatch { expected: String, found: String },
    #[error("InvalidCondition: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidCondition { violations: Vec<Violation> },
    #[error("HorizonMismatch: side functions have horizons {left} and {right}")]
    HorizonMismatch { left: usize, right: usize },
}

/// Cohen condition: a finite stem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohenCond {
    pub stem: FinFunc,
}

/// Simplified Hechler condition: a stem and one side function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HechlerCond {
    pub stem: FinFunc,
    pub side: FinFunc,
}

impl HechlerCond {
    /// The maximal condition at a working horizon.
    pub fn top(horizon: usize) -> Self {
        HechlerCond {
            stem: FinFunc::default(),
            side: FinFunc::zeros(horizon),
        }
    }
}

/// Eventually different forcing: a stem and a finite family it must avoid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ECond {
    pub stem: FinFunc,
    pub side: Family,
}

impl ECond {
    pub fn top(horizon: usize) -> Self {
        ECond {
            stem: FinFunc::default(),
            side: Family::empty(horizon),
        }
    }
}

/// Localization condition `(s, ℱ)` with `|s(n)| ≤ n` and `|ℱ| ≤ |s|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocCond {
    pub prefix: Vec<BTreeSet<u64>>,
    pub side: Family,
}

impl LocCond {
    pub fn top(horizon: usize) -> Self {
        LocCond {
            prefix: Vec::new(),
            side: Family::empty(horizon),
        }
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }
}

/// A finite prefix-closed set of nodes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree(pub BTreeSet<Node>);

impl Tree {
    pub fn from_nodes<I: IntoIterator<Item = Node>>(nodes: I) -> Self {
        Tree(nodes.into_iter().collect())
    }

    /// All binary strings of length `≤ depth`.
    pub fn full_binary(depth: usize) -> Self {
        let mut nodes = BTreeSet::new();
        for len in 0..=depth {
            for bits in 0u64..(1 << len) {
                nodes.insert((0..len).map(|i| ((bits >> (len - 1 - i)) & 1) as u32).collect());
            }
        }
        Tree(nodes)
    }

    pub fn nodes(&self) -> &BTreeSet<Node> {
        &self.0
    }

    pub fn contains(&self, node: &Node) -> bool {
        self.0.contains(node)
    }

    pub fn is_subset(&self, other: &Tree) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Labels `k` with `node⌢k` in the tree, ascending.
    pub fn children(&self, node: &Node) -> Vec<u32> {
        self.0
            .range(node.clone()..)
            .take_while(|m| m.starts_with(node))
            .filter(|m| m.len() == node.len() + 1)
            .map(|m| m[node.len()])
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.0.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn splits(&self, node: &Node) -> bool {
        self.children(node).len() >= 2
    }

    /// End of the maximal linearly ordered initial segment.
    pub fn stem(&self) -> Node {
        let mut node = Vec::new();
        loop {
            let kids = self.children(&node);
            if kids.len() != 1 {
                return node;
            }
            node.push(kids[0]);
        }
    }

    /// Every splitting node with its number of splitting proper predecessors.
    pub fn splitting_levels(&self) -> BTreeMap<Node, usize> {
        let splitting: BTreeSet<&Node> = self.0.iter().filter(|n| self.splits(n)).collect();
        splitting
            .iter()
            .map(|&node| {
                let below = (0..node.len())
                    .filter(|&l| splitting.contains(&node[..l].to_vec()))
                    .count();
                (node.clone(), below)
            })
            .collect()
    }

    fn has_splitting_descendant(&self, node: &Node) -> bool {
        self.0
            .range(node.clone()..)
            .take_while(|m| m.starts_with(node))
            .any(|m| self.splits(m))
    }

    fn structural_violations(&self, label_bound: Option<u32>, alphabet_clause: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.0.contains(&Vec::new()) {
            out.push(Violation::new("root ε belongs to the tree"));
        }
        for node in &self.0 {
            if let Some((_, parent)) = node.split_last() {
                if !self.0.contains(parent) {
                    out.push(Violation::new("prefix-closed").with_detail(format!("parent of {} missing", node_label(node))));
                }
            }
            if let (Some(bound), Some(&last)) = (label_bound, node.last()) {
                if last >= bound {
                    out.push(Violation::new(alphabet_clause).with_detail(node_label(node)));
                }
            }
        }
        out
    }
}

/// Sacks condition: a binary tree that is perfect up to its working depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SacksTree {
    pub nodes: Tree,
}

/// Laver condition: a stem followed by branching bounded by `budget`.
/// With `miller` set, the tree is read as a rational perfect (Miller) tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaverTree {
    pub nodes: Tree,
    pub budget: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub miller: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductCond {
    pub sacks: SacksTree,
    pub laver: LaverTree,
}

/// Tagged union of all conditions; JSON `{"kind": "...", ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Condition {
    Cohen(CohenCond),
    Hechler(HechlerCond),
    E(ECond),
    Loc(LocCond),
    Sacks(SacksTree),
    Laver(LaverTree),
    Product(ProductCond),
}

impl Condition {
    pub fn kind(&self) -> PosetKind {
        match self {
            Condition::Cohen(_) => PosetKind::Cohen,
            Condition::Hechler(_) => PosetKind::Hechler,
            Condition::E(_) => PosetKind::E,
            Condition::Loc(_) => PosetKind::Loc,
            Condition::Sacks(_) => PosetKind::Sacks,
            Condition::Laver(_) => PosetKind::Laver,
            Condition::Product(_) => PosetKind::Product,
        }
    }
}

fn validate_sacks(t: &SacksTree) -> Vec<Violation> {
    let tree = &t.nodes;
    let mut out = tree.structural_violations(Some(2), "binary alphabet");
    for node in tree.nodes() {
        if !tree.children(node).is_empty() && !tree.has_splitting_descendant(node) {
            out.push(Violation::new("perfect up to working depth").with_detail(format!("{} has no splitting extension", node_label(node))));
        }
    }
    out
}

fn validate_laver(t: &LaverTree) -> Vec<Violation> {
    let tree = &t.nodes;
    let mut out = Vec::new();
    if t.budget == 0 {
        out.push(Violation::new("branching budget ≥ 1"));
    }
    out.extend(tree.structural_violations(Some(t.budget), "labels below branching budget"));
    if t.miller {
        for node in tree.nodes() {
            if !tree.children(node).is_empty() && !tree.has_splitting_descendant(node) {
                out.push(Violation::new("splitting above every node").with_detail(node_label(node)));
            }
        }
    } else {
        let depth = tree.depth();
        for node in tree.nodes() {
            if node.len() < depth && tree.children(node).is_empty() {
                out.push(Violation::new("branching above the stem").with_detail(format!("{} is a leaf below depth {depth}", node_label(node))));
            }
        }
    }
    out
}

/// Empty iff every definitional clause of the condition's kind holds.
pub fn validate(c: &Condition) -> Vec<Violation> {
    match c {
        Condition::Cohen(_) => Vec::new(),
        Condition::Hechler(h) => {
            if h.stem.horizon() > h.side.horizon() {
                vec![Violation::new("|stem| ≤ |side|")]
            } else {
                Vec::new()
            }
        }
        Condition::E(e) => {
            if e.stem.horizon() > e.side.horizon() {
                vec![Violation::new("|stem| ≤ family horizon")]
            } else {
                Vec::new()
            }
        }
        Condition::Loc(l) => {
            let mut out = Vec::new();
            for (n, cell) in l.prefix.iter().enumerate() {
                if cell.len() > n {
                    out.push(Violation::at("|s(n)| ≤ n", n));
                }
            }
            if l.side.len() > l.prefix.len() {
                out.push(Violation::new("|ℱ| ≤ |s|").with_detail(format!("|ℱ| = {}, |s| = {}", l.side.len(), l.prefix.len())));
            }
            if l.side.horizon() < l.prefix.len() {
                out.push(Violation::new("family horizon ≥ |s|"));
            }
            out
        }
        Condition::Sacks(t) => validate_sacks(t),
        Condition::Laver(t) => validate_laver(t),
        Condition::Product(p) => {
            let mut out: Vec<Violation> = validate_sacks(&p.sacks)
                .into_iter()
                .map(|mut v| {
                    v.clause = format!("sacks part: {}", v.clause);
                    v
                })
                .collect();
            out.extend(validate_laver(&p.laver).into_iter().map(|mut v| {
                v.clause = format!("laver part: {}", v.clause);
                v
            }));
            out
        }
    }
}

fn ensure_valid(c: &Condition) -> Result<(), PosetError> {
    let violations = validate(c);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(PosetError::InvalidCondition { violations })
    }
}

fn ensure_kind(kind: PosetKind, c: &Condition) -> Result<(), PosetError> {
    if c.kind() == kind {
        Ok(())
    } else {
        Err(PosetError::KindMismatch {
            expected: kind.to_string(),
            found: c.kind().to_string(),
        })
    }
}

pub fn cohen_leq(q: &CohenCond, p: &CohenCond) -> bool {
    p.stem.is_prefix_of(&q.stem)
}

/// `(q, g) ≤ (p, f)`: `q ⊇ p`, `q(n) ≥ f(n)` on new positions, `g ≥ f` everywhere.
pub fn hechler_leq(q: &HechlerCond, p: &HechlerCond) -> Result<bool, PosetError> {
    if q.side.horizon() != p.side.horizon() {
        return Err(PosetError::HorizonMismatch {
            left: q.side.horizon(),
            right: p.side.horizon(),
        });
    }
    if !p.stem.is_prefix_of(&q.stem) {
        return Ok(false);
    }
    let new_ok = (p.stem.horizon()..q.stem.horizon()).all(|n| q.stem[n] >= p.side[n]);
    let side_ok = q.side.values().iter().zip(p.side.values()).all(|(g, f)| g >= f);
    Ok(new_ok && side_ok)
}

/// `(q, 𝒢) ≤ (p, ℱ)`: `q ⊇ p`, `𝒢 ⊇ ℱ`, new stem values differ from every `f ∈ ℱ`.
pub fn e_leq(q: &ECond, p: &ECond) -> bool {
    p.stem.is_prefix_of(&q.stem)
        && p.side.is_submultiset_of(&q.side)
        && (p.stem.horizon()..q.stem.horizon()).all(|n| p.side.members().iter().all(|f| q.stem[n] != f[n]))
}

/// `(t, 𝒢) ≤ (s, ℱ)`: `t ⊇ s`, `𝒢 ⊇ ℱ`, `f(n) ∈ t(n)` for `f ∈ ℱ` and new `n`.
pub fn loc_leq(q: &LocCond, p: &LocCond) -> bool {
    q.prefix.starts_with(&p.prefix)
        && p.side.is_submultiset_of(&q.side)
        && (p.prefix.len()..q.prefix.len()).all(|n| p.side.members().iter().all(|f| q.prefix[n].contains(&f[n])))
}

pub fn sacks_leq(q: &SacksTree, p: &SacksTree) -> bool {
    q.nodes.is_subset(&p.nodes)
}

pub fn laver_leq(q: &LaverTree, p: &LaverTree) -> bool {
    q.nodes.is_subset(&p.nodes)
}

/// Whether `a ≤ b` in the poset `kind`.
pub fn leq(kind: PosetKind, a: &Condition, b: &Condition) -> Result<bool, PosetError> {
    ensure_kind(kind, a)?;
    ensure_kind(kind, b)?;
    ensure_valid(a)?;
    ensure_valid(b)?;
    Ok(match (a, b) {
        (Condition::Cohen(q), Condition::Cohen(p)) => cohen_leq(q, p),
        (Condition::Hechler(q), Condition::Hechler(p)) => hechler_leq(q, p)?,
        (Condition::E(q), Condition::E(p)) => e_leq(q, p),
        (Condition::Loc(q), Condition::Loc(p)) => loc_leq(q, p),
        (Condition::Sacks(q), Condition::Sacks(p)) => sacks_leq(q, p),
        (Condition::Laver(q), Condition::Laver(p)) => laver_leq(q, p),
        (Condition::Product(q), Condition::Product(p)) => sacks_leq(&q.sacks, &p.sacks) && laver_leq(&q.laver, &p.laver),
        _ => unreachable!("kinds checked above"),
    })
}

/// Splitting nodes of `t` with exactly `n` splitting proper predecessors, in length-lex order.
///
/// Only the structural clauses (root, prefix closure, binary labels) are
/// required; perfectness is not needed to read off splitting levels.
pub fn splitting_nodes(t: &SacksTree, n: usize) -> Result<Vec<Node>, PosetError> {
    let violations = t.nodes.structural_violations(Some(2), "binary alphabet");
    if !violations.is_empty() {
        return Err(PosetError::InvalidCondition { violations });
    }
    let mut out: Vec<Node> = t
        .nodes
        .splitting_levels()
        .into_iter()
        .filter(|&(_, level)| level == n)
        .map(|(node, _)| node)
        .collect();
    out.sort_by(length_lex);
    Ok(out)
}

/// Nodes strictly above the stem in canonical order, `s_1, s_2, ...`.
pub fn canonical_enum(t: &LaverTree) -> Result<Vec<Node>, PosetError> {
    ensure_valid(&Condition::Laver(t.clone()))?;
    Ok(canonical_nodes(&t.nodes))
}

fn canonical_nodes(tree: &Tree) -> Vec<Node> {
    let stem = tree.stem();
    let mut out: Vec<Node> = tree
        .nodes()
        .iter()
        .filter(|m| m.len() > stem.len() && m.starts_with(&stem))
        .cloned()
        .collect();
    out.sort_by(length_lex);
    out
}

/// `q ≤_n p` for Sacks trees: `q ⊆ p` and, for every `m ≤ n`, each `m`-th
/// splitting node of `q` is an `m`-th splitting node of `p`.
pub fn sacks_fusion_leq(q: &SacksTree, p: &SacksTree, n: usize) -> bool {
    if !sacks_leq(q, p) {
        return false;
    }
    let p_levels = p.nodes.splitting_levels();
    q.nodes
        .splitting_levels()
        .iter()
        .filter(|&(_, &level)| level <= n)
        .all(|(node, level)| p_levels.get(node) == Some(level))
}

/// `q ≤_n p` for Laver trees: `q ⊆ p` and `s_i^q = s_i^p` for `i = 1, ..., n + 1`.
pub fn laver_fusion_leq(q: &LaverTree, p: &LaverTree, n: usize) -> bool {
    if !laver_leq(q, p) {
        return false;
    }
    let eq = canonical_nodes(&q.nodes);
    let ep = canonical_nodes(&p.nodes);
    eq.iter().take(n + 1).eq(ep.iter().take(n + 1))
}

/// Fusion order `a ≤_n b` for `sacks`, `laver` and the product (componentwise).
pub fn fusion_leq(kind: PosetKind, a: &Condition, b: &Condition, n: usize) -> Result<bool, PosetError> {
    if !matches!(kind, PosetKind::Sacks | PosetKind::Laver | PosetKind::Product) {
        return Err(PosetError::KindMismatch {
            expected: "sacks, laver or product".into(),
            found: kind.to_string(),
        });
    }
    ensure_kind(kind, a)?;
    ensure_kind(kind, b)?;
    ensure_valid(a)?;
    ensure_valid(b)?;
    Ok(match (a, b) {
        (Condition::Sacks(q), Condition::Sacks(p)) => sacks_fusion_leq(q, p, n),
        (Condition::Laver(q), Condition::Laver(p)) => laver_fusion_leq(q, p, n),
        (Condition::Product(q), Condition::Product(p)) => {
            sacks_fusion_leq(&q.sacks, &p.sacks, n) && laver_fusion_leq(&q.laver, &p.laver, n)
        }
        _ => unreachable!("kinds checked above"),
    })
}
