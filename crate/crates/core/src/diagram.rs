//! The eight-node inclusion diagram, its cuts, emptiness propagation and the
//! knowledge base of forcing profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagramNode {
    Empty,
    BIn,
    BLeq,
    BNeq,
    DNeq,
    DLeq,
    DIn,
    AllNew,
}

use DiagramNode::*;

impl DiagramNode {
    pub const ALL: [DiagramNode; 8] = [Empty, BIn, BLeq, BNeq, DNeq, DLeq, DIn, AllNew];
    pub const NON_EMPTY: [DiagramNode; 7] = [BIn, BLeq, BNeq, DNeq, DLeq, DIn, AllNew];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Empty => "∅",
            BIn => "B(∈*)",
            BLeq => "B(≤*)",
            BNeq => "B(≠*)",
            DNeq => "D(≠*)",
            DLeq => "D(≤*)",
            DIn => "D(∈*)",
            AllNew => "ω^ω \\ (ω^ω)^W",
        }
    }

    pub fn successors(self) -> impl Iterator<Item = DiagramNode> {
        EDGES.iter().filter(move |(a, _)| *a == self).map(|&(_, b)| b)
    }

    pub fn predecessors(self) -> impl Iterator<Item = DiagramNode> {
        EDGES.iter().filter(move |(_, b)| *b == self).map(|&(a, _)| a)
    }
}

impl fmt::Display for DiagramNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for DiagramNode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DiagramNode::ALL
            .into_iter()
            .find(|n| format!("{n:?}") == s)
            .ok_or_else(|| format!("unknown diagram node `{s}`"))
    }
}

/// Inclusions `a ⊆ b`, one per arrow.
pub const EDGES: [(DiagramNode, DiagramNode); 9] = [
    (Empty, BIn),
    (BIn, BLeq),
    (BLeq, BNeq),
    (BIn, DNeq),
    (BLeq, DLeq),
    (BNeq, DIn),
    (DNeq, DLeq),
    (DLeq, DIn),
    (DIn, AllNew),
];

pub fn diagram_spec() -> (Vec<DiagramNode>, Vec<(DiagramNode, DiagramNode)>) {
    (DiagramNode::ALL.to_vec(), EDGES.to_vec())
}

/// Reflexive-transitive closure of the edge relation, indexed by node.
pub fn reachability() -> [[bool; 8]; 8] {
    let mut r = [[false; 8]; 8];
    for n in DiagramNode::ALL {
        r[n.index()][n.index()] = true;
    }
    for (a, b) in EDGES {
        r[a.index()][b.index()] = true;
    }
    for k in 0..8 {
        for i in 0..8 {
            for j in 0..8 {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

pub fn reaches(a: DiagramNode, b: DiagramNode) -> bool {
    reachability()[a.index()][b.index()]
}

/// Number of distinct edge paths from `a` to `b`.
pub fn path_count(a: DiagramNode, b: DiagramNode) -> usize {
    if a == b {
        return 1;
    }
    a.successors().map(|s| path_count(s, b)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emptiness {
    Empty,
    Nonempty,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramState {
    pub emptiness: BTreeMap<DiagramNode, Emptiness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<Vec<DiagramNode>>>,
    /// Pairs of nodes in different classes whose distinctness is open.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unknown: Vec<(DiagramNode, DiagramNode)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
}

impl DiagramState {
    pub fn unknown_everywhere() -> Self {
        DiagramState {
            emptiness: DiagramNode::ALL.iter().map(|&n| (n, Emptiness::Unknown)).collect(),
            classes: None,
            unknown: Vec::new(),
            citation: None,
        }
    }

    pub fn with(mut self, node: DiagramNode, value: Emptiness) -> Self {
        self.emptiness.insert(node, value);
        self
    }

    pub fn get(&self, node: DiagramNode) -> Emptiness {
        self.emptiness.get(&node).copied().unwrap_or(Emptiness::Unknown)
    }

    pub fn nonempty_set(&self) -> BTreeSet<DiagramNode> {
        DiagramNode::ALL
            .into_iter()
            .filter(|&n| self.get(n) == Emptiness::Nonempty)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram state serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DiagramError> {
        serde_json::from_str(text).map_err(|e| DiagramError::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("UnknownForcing: `{0}`")]
    UnknownForcing(String),
    #[error("InvalidProfile: {name}: {reason}")]
    InvalidProfile { name: String, reason: String },
    #[error("malformed diagram JSON: {0}")]
    Parse(String),
}

/// A node forced both empty and nonempty, with the inclusion chain that did it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub node: DiagramNode,
    pub chain: Vec<DiagramNode>,
}

impl fmt::Display for Contradiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let chain: Vec<String> = self.chain.iter().map(ToString::to_string).collect();
        write!(f, "Contradiction at {}: {}", self.node, chain.join("→"))
    }
}

fn implication_graph(state: &DiagramState) -> Vec<Vec<DiagramNode>> {
    let mut succ: Vec<Vec<DiagramNode>> = vec![Vec::new(); 8];
    for (a, b) in EDGES {
        succ[a.index()].push(b);
    }
    for class in state.classes.iter().flatten() {
        for &a in class {
            for &b in class {
                if a != b {
                    succ[a.index()].push(b);
                }
            }
        }
    }
    for s in &mut succ {
        s.sort();
        s.dedup();
    }
    succ
}

fn closure(
    sources: &[DiagramNode],
    next: &[Vec<DiagramNode>],
) -> BTreeMap<DiagramNode, Option<DiagramNode>> {
    fn visit(
        x: DiagramNode,
        next: &[Vec<DiagramNode>],
        parent: &mut BTreeMap<DiagramNode, Option<DiagramNode>>,
    ) {
        // larger nodes first
        for &y in next[x.index()].iter().rev() {
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(y) {
                e.insert(Some(x));
                visit(y, next, parent);
            }
        }
    }
    let mut parent = BTreeMap::new();
    for &s in sources {
        if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(s) {
            e.insert(None);
            visit(s, next, &mut parent);
        }
    }
    parent
}

fn chain_to(node: DiagramNode, parent: &BTreeMap<DiagramNode, Option<DiagramNode>>) -> Vec<DiagramNode> {
    let mut chain = vec![node];
    let mut cur = node;
    while let Some(Some(p)) = parent.get(&cur) {
        chain.push(*p);
        cur = *p;
    }
    chain.reverse();
    chain
}

/// Closes a state under the inclusions (and class equalities).
///
/// Nonempty flows forward along arrows, empty flows backward. The `Empty`
/// node is always empty.
pub fn propagate(state: &DiagramState) -> Result<DiagramState, Contradiction> {
    if state.get(Empty) == Emptiness::Nonempty {
        return Err(Contradiction {
            node: Empty,
            chain: vec![Empty],
        });
    }
    let succ = implication_graph(state);
    let mut pred: Vec<Vec<DiagramNode>> = vec![Vec::new(); 8];
    for a in DiagramNode::ALL {
        for &b in &succ[a.index()] {
            pred[b.index()].push(a);
        }
    }
    for p in &mut pred {
        p.sort();
    }

    let given_nonempty: Vec<DiagramNode> = DiagramNode::ALL
        .into_iter()
        .filter(|&n| state.get(n) == Emptiness::Nonempty)
        .collect();
    let mut given_empty: Vec<DiagramNode> = DiagramNode::ALL
        .into_iter()
        .filter(|&n| state.get(n) == Emptiness::Empty)
        .collect();
    if !given_empty.contains(&Empty) {
        given_empty.insert(0, Empty);
    }

    let up = closure(&given_nonempty, &succ);
    let down = closure(&given_empty, &pred);

    let conflict = given_empty
        .iter()
        .find(|n| up.contains_key(n))
        .or_else(|| given_nonempty.iter().find(|n| down.contains_key(n)))
        .or_else(|| up.keys().find(|n| down.contains_key(n)));
    if let Some(&node) = conflict {
        let mut chain = chain_to(node, &up);
        let mut tail = chain_to(node, &down);
        tail.reverse();
        chain.extend(tail.into_iter().skip(1));
        return Err(Contradiction { node, chain });
    }

    let mut out = state.clone();
    for n in DiagramNode::ALL {
        let v = if up.contains_key(&n) {
            Emptiness::Nonempty
        } else if down.contains_key(&n) {
            Emptiness::Empty
        } else {
            Emptiness::Unknown
        };
        out.emptiness.insert(n, v);
    }
    Ok(out)
}

/// An upward-closed set of nonempty nodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cut {
    pub nonempty: BTreeSet<DiagramNode>,
}

impl Cut {
    pub fn is_upward_closed(set: &BTreeSet<DiagramNode>) -> bool {
        set.iter().all(|a| a.successors().all(|b| set.contains(&b)))
    }
}

/// A cut together with the knowledge-base entry realizing it, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutEntry {
    pub nonempty: Vec<DiagramNode>,
    pub case: Option<String>,
    pub forcing: Option<String>,
}

/// Up-sets of the non-`Empty` nodes, generated from their antichains of minimal elements.
pub fn enumerate_cuts() -> Vec<Cut> {
    let r = reachability();
    let nodes = DiagramNode::NON_EMPTY;
    let mut cuts = BTreeSet::new();
    for mask in 0u32..(1 << nodes.len()) {
        let chosen: Vec<DiagramNode> = (0..nodes.len()).filter(|i| mask >> i & 1 == 1).map(|i| nodes[i]).collect();
        let antichain = chosen
            .iter()
            .all(|a| chosen.iter().all(|b| a == b || !r[a.index()][b.index()]));
        if !antichain {
            continue;
        }
        let nonempty: BTreeSet<DiagramNode> = nodes
            .into_iter()
            .filter(|n| chosen.iter().any(|a| r[a.index()][n.index()]))
            .collect();
        cuts.insert(Cut { nonempty });
    }
    let mut cuts: Vec<Cut> = cuts.into_iter().collect();
    cuts.sort_by(|a, b| b.nonempty.len().cmp(&a.nonempty.len()).then_with(|| a.cmp(b)));
    cuts
}

/// Cuts paired with their realizing profiles, ordered by case letter where known.
pub fn cut_entries() -> Vec<CutEntry> {
    let kb = knowledge_base();
    let mut entries: Vec<CutEntry> = enumerate_cuts()
        .into_iter()
        .map(|cut| {
            let profile = kb.profiles.iter().find(|p| p.state.nonempty_set() == cut.nonempty);
            CutEntry {
                nonempty: cut.nonempty.into_iter().collect(),
                case: profile.map(|p| p.case.clone()),
                forcing: profile.map(|p| p.name.clone()),
            }
        })
        .collect();
    entries.sort_by(|a, b| match (&a.case, &b.case) {
        (Some(x), Some(y)) => x.cmp(y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => b.nonempty.len().cmp(&a.nonempty.len()),
    });
    entries
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcingProfile {
    pub name: String,
    pub case: String,
    pub state: DiagramState,
}

impl ForcingProfile {
    pub fn citation(&self) -> &str {
        self.state.citation.as_deref().unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductProfile {
    pub factors: Vec<String>,
    pub state: DiagramState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub version: u32,
    pub profiles: Vec<ForcingProfile>,
    pub products: Vec<ProductProfile>,
}

#[derive(Deserialize)]
struct RawEntry {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    case: Option<String>,
    #[serde(default)]
    factors: Vec<String>,
    citation: String,
    empty: Vec<DiagramNode>,
    classes: Vec<Vec<DiagramNode>>,
    unknown: Vec<(DiagramNode, DiagramNode)>,
}

#[derive(Deserialize)]
struct RawKb {
    version: u32,
    profiles: Vec<RawEntry>,
    products: Vec<RawEntry>,
}

impl RawEntry {
    fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.factors.join("×"))
    }

    fn into_state(self) -> Result<DiagramState, DiagramError> {
        let label = self.label();
        let invalid = |reason: String| DiagramError::InvalidProfile {
            name: label.clone(),
            reason,
        };
        let empty: BTreeSet<DiagramNode> = self.empty.iter().copied().chain([Empty]).collect();
        let state = DiagramState {
            emptiness: DiagramNode::ALL
                .into_iter()
                .map(|n| (n, if empty.contains(&n) { Emptiness::Empty } else { Emptiness::Nonempty }))
                .collect(),
            classes: Some(self.classes),
            unknown: self.unknown,
            citation: Some(self.citation),
        };
        check_state(&state).map_err(invalid)?;
        Ok(state)
    }
}

/// Structural checks shared by every recorded profile.
pub fn check_state(state: &DiagramState) -> Result<(), String> {
    let nonempty = state.nonempty_set();
    if !Cut::is_upward_closed(&nonempty) {
        return Err("nonempty set is not upward closed".into());
    }
    if let Some(classes) = &state.classes {
        let mut seen = BTreeSet::new();
        for class in classes {
            if class.is_empty() {
                return Err("empty equality class".into());
            }
            for &n in class {
                if n == Empty || !seen.insert(n) {
                    return Err(format!("classes do not partition the nodes (at {n})"));
                }
            }
            if class.iter().any(|&n| state.get(n) != state.get(class[0])) {
                return Err("a class mixes emptiness values".into());
            }
        }
        if seen.len() != 7 {
            return Err("classes do not cover the seven nodes".into());
        }
        let empty_classes = classes.iter().filter(|c| state.get(c[0]) == Emptiness::Empty).count();
        if empty_classes > 1 {
            return Err("empty nodes are split across classes".into());
        }
        let class_of = |n: DiagramNode| classes.iter().position(|c| c.contains(&n));
        for &(a, b) in &state.unknown {
            if class_of(a).is_none() || class_of(a) == class_of(b) {
                return Err(format!("unknown separation {a}/{b} is not between two classes"));
            }
        }
    }
    match propagate(state) {
        Err(c) => Err(c.to_string()),
        Ok(p) if p.emptiness != state.emptiness => Err("not a fixpoint of propagation".into()),
        Ok(_) => Ok(()),
    }
}

pub fn load_knowledge_base(text: &str) -> Result<KnowledgeBase, DiagramError> {
    let raw: RawKb = serde_json::from_str(text).map_err(|e| DiagramError::Parse(e.to_string()))?;
    let mut profiles = Vec::new();
    for entry in raw.profiles {
        let name = entry.name.clone().ok_or_else(|| DiagramError::Parse("profile without name".into()))?;
        let case = entry.case.clone().unwrap_or_default();
        profiles.push(ForcingProfile {
            name,
            case,
            state: entry.into_state()?,
        });
    }
    let mut products = Vec::new();
    for entry in raw.products {
        let factors = entry.factors.clone();
        for f in &factors {
            if !profiles.iter().any(|p| &p.name == f) {
                return Err(DiagramError::UnknownForcing(f.clone()));
            }
        }
        products.push(ProductProfile {
            factors,
            state: entry.into_state()?,
        });
    }
    Ok(KnowledgeBase {
        version: raw.version,
        profiles,
        products,
    })
}

pub const KB_SOURCE: &str = include_str!("../data/kb.json");

pub fn knowledge_base() -> &'static KnowledgeBase {
    static KB: OnceLock<KnowledgeBase> = OnceLock::new();
    KB.get_or_init(|| load_knowledge_base(KB_SOURCE).expect("bundled knowledge base is valid"))
}

pub fn kb_names() -> Vec<&'static str> {
    knowledge_base().profiles.iter().map(|p| p.name.as_str()).collect()
}

pub fn kb_lookup(name: &str) -> Result<&'static ForcingProfile, DiagramError> {
    knowledge_base()
        .profiles
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| DiagramError::UnknownForcing(name.to_string()))
}

/// Recorded product entry if one matches the factors, otherwise the per-node join.
pub fn compose_profiles(names: &[&str]) -> Result<DiagramState, DiagramError> {
    let profiles = names.iter().map(|n| kb_lookup(n)).collect::<Result<Vec<_>, _>>()?;
    let mut wanted: Vec<&str> = names.to_vec();
    wanted.sort_unstable();
    for product in &knowledge_base().products {
        let mut factors: Vec<&str> = product.factors.iter().map(String::as_str).collect();
        factors.sort_unstable();
        if factors == wanted {
            return Ok(product.state.clone());
        }
    }
    let emptiness = DiagramNode::ALL
        .into_iter()
        .map(|n| {
            let values: Vec<Emptiness> = profiles.iter().map(|p| p.state.get(n)).collect();
            let v = if n == Empty || values.iter().all(|&v| v == Emptiness::Empty) {
                Emptiness::Empty
            } else if values.contains(&Emptiness::Nonempty) {
                Emptiness::Nonempty
            } else {
                Emptiness::Unknown
            };
            (n, v)
        })
        .collect();
    Ok(DiagramState {
        emptiness,
        classes: None,
        unknown: Vec::new(),
        citation: Some(format!("join of {}", names.join(", "))),
    })
}

fn dot_id(n: DiagramNode) -> String {
    format!("\"{n}\"")
}

/// Graphviz rendering: shaded empty nodes, dashed unknown ones, one cluster per
/// equality class with two or more members.
pub fn emit_dot(state: &DiagramState) -> String {
    let mut out = String::new();
    out.push_str("digraph cichon {\n  rankdir=BT;\n  node [shape=box];\n");
    for n in DiagramNode::ALL {
        let style = match state.get(n) {
            Emptiness::Empty => "style=filled, fillcolor=gray80",
            Emptiness::Nonempty => "style=solid",
            Emptiness::Unknown => "style=dashed",
        };
        let _ = writeln!(out, "  {} [label=\"{}\", {style}];", dot_id(n), n.label());
    }
    if let Some(classes) = &state.classes {
        for (i, class) in classes.iter().filter(|c| c.len() >= 2).enumerate() {
            let members: Vec<String> = class.iter().map(|&n| dot_id(n)).collect();
            let _ = writeln!(
                out,
                "  subgraph cluster_{i} {{ rank=same; style=rounded; {}; }}",
                members.join("; ")
            );
        }
    }
    for (a, b) in EDGES {
        let _ = writeln!(out, "  {} -> {};", dot_id(a), dot_id(b));
    }
    out.push_str("}\n");
    out
}

pub fn emit_json(state: &DiagramState) -> String {
    state.to_json()
}
