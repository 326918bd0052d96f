//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are still run and still reported as
//! `[FAIL]` with their counterexample; they only do not abort the run. If one
//! of them starts passing the run aborts, so the list cannot go stale.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use cichon::combinatorics::{hit_count, least_threshold, Family, FinFunc, RelationKind, Slalom, WidthProfile};
use cichon::constructions::{
    avoider_witness, block_encode, evasion_target, family_dominator, family_slalom, round_robin_ioe,
    slalom_dominator, string_encode, sum_evader_bound, weave, BlockPartition, BlockSlalom, PartialFunc,
    StringEnumeration,
};
use cichon::diagram::{
    cut_entries, diagram_spec, enumerate_cuts, kb_lookup, kb_names, knowledge_base, propagate, DiagramNode,
    Emptiness,
};
use cichon::posets::{
    fusion_leq, leq, validate, CohenCond, Condition, ECond, HechlerCond, LaverTree, LocCond, PosetKind,
    ProductCond, SacksTree, Tree,
};
use cichon::projections::{
    lift_loc_to_d, lift_loc_to_e, proj_loc_to_d, proj_loc_to_e, reduce_e, ProjectionError,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5EED_C1C0;

const KNOWN_UNATTAINABLE: &[&str] = &["projection laws: LOC→D order preservation"];

type Outcome = Result<String, String>;

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

// ---------- oracles ----------

fn threshold_oracle(n: usize, holds: impl Fn(usize) -> bool) -> usize {
    (0..=n).find(|&k| (k..n).all(&holds)).unwrap()
}

fn kth_greatest_oracle(set: &BTreeSet<u64>, k: usize) -> u64 {
    let mut v: Vec<u64> = set.iter().copied().collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v.get(k - 1).copied().unwrap_or(0)
}

fn multiset_included(small: &[FinFunc], big: &[FinFunc]) -> bool {
    let mut counts: BTreeMap<&FinFunc, i64> = BTreeMap::new();
    for f in big {
        *counts.entry(f).or_default() += 1;
    }
    for f in small {
        *counts.entry(f).or_default() -= 1;
    }
    counts.values().all(|&c| c >= 0)
}

fn oracle_loc_leq(t: &LocCond, s: &LocCond) -> bool {
    if t.prefix.len() < s.prefix.len() || (0..s.prefix.len()).any(|n| t.prefix[n] != s.prefix[n]) {
        return false;
    }
    if !multiset_included(s.side.members(), t.side.members()) {
        return false;
    }
    (s.prefix.len()..t.prefix.len()).all(|n| s.side.members().iter().all(|f| t.prefix[n].contains(&f.values()[n])))
}

fn oracle_hechler_leq(q: &HechlerCond, p: &HechlerCond) -> bool {
    let (qs, ps) = (q.stem.values(), p.stem.values());
    qs.len() >= ps.len()
        && qs[..ps.len()] == *ps
        && (ps.len()..qs.len()).all(|n| qs[n] >= p.side.values()[n])
        && q.side.values().iter().zip(p.side.values()).all(|(g, f)| g >= f)
}

fn oracle_e_leq(q: &ECond, p: &ECond) -> bool {
    let (qs, ps) = (q.stem.values(), p.stem.values());
    qs.len() >= ps.len()
        && qs[..ps.len()] == *ps
        && multiset_included(p.side.members(), q.side.members())
        && (ps.len()..qs.len()).all(|n| p.side.members().iter().all(|f| f.values()[n] != qs[n]))
}

fn oracle_closure(edges: &[(DiagramNode, DiagramNode)], from: DiagramNode, avoid: Option<DiagramNode>) -> BTreeSet<DiagramNode> {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &(a, b) in edges {
            if a == x && Some(b) != avoid && seen.insert(b) {
                queue.push_back(b);
            }
        }
    }
    seen
}

// ---------- generators ----------

fn rand_func(r: &mut ChaCha8Rng, n: usize, bound: u64) -> FinFunc {
    FinFunc((0..n).map(|_| r.gen_range(0..bound)).collect())
}

fn rand_set(r: &mut ChaCha8Rng, size: usize, bound: u64) -> BTreeSet<u64> {
    (0..size).map(|_| r.gen_range(0..bound)).collect()
}

fn rand_slalom(r: &mut ChaCha8Rng, n: usize, max_width: usize, bound: u64) -> Slalom {
    let widths: Vec<usize> = (0..n).map(|_| r.gen_range(0..=max_width)).collect();
    let cells = widths
        .iter()
        .map(|&w| {
            let size = r.gen_range(0..=w);
            rand_set(r, size, bound)
        })
        .collect();
    Slalom::new(WidthProfile(widths), cells).unwrap()
}

fn rand_family(r: &mut ChaCha8Rng, members: usize, n: usize, bound: u64) -> Family {
    Family::new(n, (0..members).map(|_| rand_func(r, n, bound)).collect()).unwrap()
}

fn rand_partition(r: &mut ChaCha8Rng) -> (WidthProfile, BlockPartition) {
    let blocks = r.gen_range(1..=6);
    let h = WidthProfile((0..blocks).map(|_| r.gen_range(1..=3)).collect());
    let p = if r.gen_bool(0.5) {
        BlockPartition::singletons(&h, blocks).unwrap()
    } else {
        BlockPartition::intervals(&h, blocks, r.gen_range(1..=3)).unwrap()
    };
    (h, p)
}

const LOC_HORIZON: usize = 9;

fn rand_loc(r: &mut ChaCha8Rng, strict_family: bool) -> LocCond {
    let len = r.gen_range(1..=5);
    let max_members = if strict_family { len - 1 } else { len };
    let members = r.gen_range(0..=max_members.min(3));
    let prefix = (0..len)
        .map(|n| {
            let size = r.gen_range(0..=n);
            rand_set(r, size, 8)
        })
        .collect();
    LocCond {
        prefix,
        side: rand_family(r, members, LOC_HORIZON, 6),
    }
}

fn rand_loc_extension(r: &mut ChaCha8Rng, b: &LocCond) -> LocCond {
    let len = b.prefix.len();
    let new = r.gen_range(0..=3).min(LOC_HORIZON - len);
    let mut prefix = b.prefix.clone();
    for n in len..len + new {
        let mut cell: BTreeSet<u64> = b.side.members().iter().map(|f| f.values()[n]).collect();
        let target = r.gen_range(cell.len()..=n);
        while cell.len() < target {
            cell.insert(r.gen_range(0..10));
        }
        prefix.push(cell);
    }
    let mut side = b.side.clone();
    let extra = r.gen_range(0..=(prefix.len() - side.len()).min(2));
    for _ in 0..extra {
        side = side.with_member(rand_func(r, LOC_HORIZON, 6)).unwrap();
    }
    LocCond { prefix, side }
}

fn rand_sacks(r: &mut ChaCha8Rng) -> Tree {
    fn grow(r: &mut ChaCha8Rng, node: Vec<u32>, left: usize, out: &mut BTreeSet<Vec<u32>>) {
        out.insert(node.clone());
        if left == 0 {
            return;
        }
        let labels: Vec<u32> = if r.gen_bool(0.6) { vec![0, 1] } else { vec![r.gen_range(0..2)] };
        for l in labels {
            let mut child = node.clone();
            child.push(l);
            grow(r, child, left - 1, out);
        }
    }
    for _ in 0..200 {
        let mut nodes = BTreeSet::new();
        let depth = r.gen_range(1..=4);
        grow(r, Vec::new(), depth, &mut nodes);
        let t = Tree(nodes);
        if validate(&Condition::Sacks(SacksTree { nodes: t.clone() })).is_empty() {
            return t;
        }
    }
    Tree::full_binary(3)
}

/// Random valid subtree: at splitting nodes, sometimes keep one side only.
fn prune(r: &mut ChaCha8Rng, t: &Tree, valid: impl Fn(&Tree) -> bool) -> Tree {
    for _ in 0..50 {
        let mut dropped: Vec<Vec<u32>> = Vec::new();
        for node in t.nodes() {
            let kids = t.children(node);
            if kids.len() >= 2 && r.gen_bool(0.35) {
                let drop_count = r.gen_range(1..kids.len());
                let mut chosen = kids.clone();
                chosen.shuffle(r);
                for &k in &chosen[..drop_count] {
                    let mut c = node.clone();
                    c.push(k);
                    dropped.push(c);
                }
            }
        }
        let nodes: BTreeSet<Vec<u32>> = t
            .nodes()
            .iter()
            .filter(|n| !dropped.iter().any(|d| n.starts_with(d)))
            .cloned()
            .collect();
        let q = Tree(nodes);
        if valid(&q) {
            return q;
        }
    }
    t.clone()
}

fn sacks_valid(t: &Tree) -> bool {
    validate(&Condition::Sacks(SacksTree { nodes: t.clone() })).is_empty()
}

fn rand_laver(r: &mut ChaCha8Rng, budget: u32) -> LaverTree {
    let depth = r.gen_range(1..=3);
    let mut nodes = BTreeSet::from([Vec::new()]);
    let mut frontier = vec![Vec::new()];
    let stem_len = r.gen_range(0..=1).min(depth - 1);
    for level in 0..depth {
        let mut next = Vec::new();
        for node in &frontier {
            let labels: Vec<u32> = if level < stem_len {
                vec![r.gen_range(0..budget)]
            } else {
                let mut all: Vec<u32> = (0..budget).collect();
                all.shuffle(r);
                all.truncate(r.gen_range(1..=budget as usize));
                all
            };
            for l in labels {
                let mut c: Vec<u32> = node.clone();
                c.push(l);
                nodes.insert(c.clone());
                next.push(c);
            }
        }
        frontier = next;
    }
    LaverTree {
        nodes: Tree(nodes),
        budget,
        miller: false,
    }
}

fn laver_valid(budget: u32) -> impl Fn(&Tree) -> bool {
    move |t| {
        validate(&Condition::Laver(LaverTree {
            nodes: t.clone(),
            budget,
            miller: false,
        }))
        .is_empty()
    }
}

// ---------- criteria ----------

fn cut_enumeration() -> Outcome {
    let start = Instant::now();
    let cuts = enumerate_cuts();
    let elapsed = start.elapsed();
    let (_, edges) = diagram_spec();
    let nodes = DiagramNode::NON_EMPTY;
    let mut brute = BTreeSet::new();
    for mask in 0u32..128 {
        let set: BTreeSet<DiagramNode> = (0..7).filter(|i| mask >> i & 1 == 1).map(|i| nodes[i]).collect();
        if set.iter().all(|&a| edges.iter().all(|&(x, y)| x != a || set.contains(&y))) {
            brute.insert(set);
        }
    }
    let got: BTreeSet<BTreeSet<DiagramNode>> = cuts.iter().map(|c| c.nonempty.clone()).collect();
    if cuts.len() != 11 || got.len() != 11 {
        return Err(format!("{} cuts", cuts.len()));
    }
    if got != brute {
        return Err(format!("differs from brute force ({} up-sets)", brute.len()));
    }
    let cases: BTreeSet<String> = cut_entries().into_iter().filter_map(|e| e.case).collect();
    let expected: BTreeSet<String> = ('a'..='k').map(String::from).collect();
    if cases != expected {
        return Err(format!("cases realized: {cases:?}"));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("11 cuts, brute force over 128 subsets agrees, {elapsed:?}"))
}

fn diagram_shape() -> Outcome {
    use DiagramNode::*;
    let (nodes, edges) = diagram_spec();
    let expected: BTreeSet<(DiagramNode, DiagramNode)> = [
        (Empty, BIn),
        (BIn, BLeq),
        (BLeq, BNeq),
        (BIn, DNeq),
        (BLeq, DLeq),
        (BNeq, DIn),
        (DNeq, DLeq),
        (DLeq, DIn),
        (DIn, AllNew),
    ]
    .into_iter()
    .collect();
    if nodes.len() != 8 || edges.len() != 9 || edges.iter().copied().collect::<BTreeSet<_>>() != expected {
        return Err(format!("{} nodes, edges {edges:?}", nodes.len()));
    }
    for b in [BIn, BLeq, BNeq] {
        let reach = oracle_closure(&edges, b, None);
        let should = b == BIn;
        if reach.contains(&DNeq) != should {
            return Err(format!("{b} reaches DNeq: {}", reach.contains(&DNeq)));
        }
        if b != BIn && oracle_closure(&edges, b, Some(BIn)).contains(&DNeq) {
            return Err(format!("{b} reaches DNeq avoiding BIn"));
        }
        if cichon::diagram::reaches(b, DNeq) != should {
            return Err(format!("library reachability disagrees at {b}"));
        }
    }
    Ok("8 nodes, 9 edges, DNeq reachable from the B column only through BIn".into())
}

fn knowledge_base_soundness() -> Outcome {
    use DiagramNode::*;
    // (name, case, empty nodes, classes) as read off the per-forcing diagrams and the cut list
    let table: Vec<(&str, &str, Vec<DiagramNode>, Vec<Vec<DiagramNode>>)> = vec![
        ("loc", "a", vec![], vec![vec![BIn], vec![BLeq], vec![BNeq], vec![DNeq], vec![DLeq], vec![DIn], vec![AllNew]]),
        ("hechler", "b", vec![BIn], vec![vec![BIn], vec![BLeq, BNeq], vec![DNeq, DLeq, DIn, AllNew]]),
        ("laver", "c", vec![BIn, DNeq], vec![vec![BIn, DNeq], vec![BLeq, BNeq, DLeq, DIn, AllNew]]),
        ("e", "d", vec![BIn, BLeq], vec![vec![BIn, BLeq], vec![BNeq], vec![DNeq, DLeq, DIn, AllNew]]),
        ("b-then-pt", "e", vec![BIn, BLeq, DNeq], vec![vec![BIn, BLeq, DNeq], vec![BNeq], vec![DLeq], vec![DIn], vec![AllNew]]),
        ("miller", "f", vec![BIn, BLeq, BNeq, DNeq], vec![vec![BIn, BLeq, BNeq, DNeq], vec![DLeq, DIn, AllNew]]),
        ("cohen", "g", vec![BIn, BLeq, BNeq], vec![vec![BIn, BLeq, BNeq], vec![DNeq, DLeq, DIn, AllNew]]),
        ("random", "h", vec![BIn, BLeq, DNeq, DLeq], vec![vec![BIn, BLeq, DNeq, DLeq], vec![BNeq, DIn, AllNew]]),
        ("ee", "i", vec![BIn, BLeq, BNeq, DNeq, DLeq], vec![vec![BIn, BLeq, BNeq, DNeq, DLeq], vec![DIn], vec![AllNew]]),
        ("sacks", "j", vec![BIn, BLeq, BNeq, DNeq, DLeq, DIn], vec![vec![BIn, BLeq, BNeq, DNeq, DLeq, DIn], vec![AllNew]]),
        ("trivial", "k", vec![BIn, BLeq, BNeq, DNeq, DLeq, DIn, AllNew], vec![vec![BIn, BLeq, BNeq, DNeq, DLeq, DIn, AllNew]]),
    ];
    let names: BTreeSet<&str> = kb_names().into_iter().collect();
    if names.len() != 11 || knowledge_base().profiles.len() != 11 {
        return Err(format!("{} profiles", names.len()));
    }
    for (name, case, empty, classes) in table {
        let p = kb_lookup(name).map_err(|e| e.to_string())?;
        let propagated = propagate(&p.state).map_err(|c| format!("{name}: {c}"))?;
        if propagated.emptiness != p.state.emptiness {
            return Err(format!("{name}: not a propagation fixpoint"));
        }
        let nonempty = p.state.nonempty_set();
        if nonempty.iter().any(|a| a.successors().any(|b| !nonempty.contains(&b))) {
            return Err(format!("{name}: nonempty set not upward closed"));
        }
        if p.case != case {
            return Err(format!("{name}: case {} expected {case}", p.case));
        }
        for n in DiagramNode::NON_EMPTY {
            let want = if empty.contains(&n) { Emptiness::Empty } else { Emptiness::Nonempty };
            if p.state.get(n) != want {
                return Err(format!("{name}: {n} is {:?}", p.state.get(n)));
            }
        }
        let got: BTreeSet<BTreeSet<DiagramNode>> = p
            .state
            .classes
            .iter()
            .flatten()
            .map(|c| c.iter().copied().collect())
            .collect();
        let want: BTreeSet<BTreeSet<DiagramNode>> = classes.iter().map(|c| c.iter().copied().collect()).collect();
        if got != want {
            return Err(format!("{name}: classes {got:?}"));
        }
    }
    let loc = &kb_lookup("loc").unwrap().state;
    if loc.unknown != vec![(DNeq, DLeq), (DLeq, DIn)] {
        return Err(format!("loc open separations {:?}", loc.unknown));
    }
    Ok("11 profiles propagate cleanly and match the region table".into())
}

fn inclusion_analogues() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut nontrivial = [0usize; 4];
    for i in 0..1000 {
        let n = r.gen_range(0..=64);
        // slalom bound dominates whatever the slalom captures
        let sigma = rand_slalom(&mut r, n, 4, 256);
        let f = FinFunc(
            (0..n)
                .map(|l| {
                    let cell: Vec<u64> = sigma.cell(l).iter().copied().collect();
                    if !cell.is_empty() && r.gen_bool(0.85) {
                        *cell.choose(&mut r).unwrap()
                    } else {
                        r.gen_range(0..256)
                    }
                })
                .collect(),
        );
        let z = slalom_dominator(&sigma);
        let t_leq = least_threshold(RelationKind::Leq, &f, &z).unwrap();
        let t_in = least_threshold(RelationKind::In, &f, &sigma).unwrap();
        let o_leq = threshold_oracle(n, |l| f.values()[l] <= z.values()[l]);
        let o_in = threshold_oracle(n, |l| sigma.cell(l).contains(&f.values()[l]));
        if (t_leq.threshold, t_in.threshold) != (o_leq, o_in) {
            return Err(format!("instance {i}: thresholds disagree with brute force"));
        }
        if o_leq > o_in {
            return Err(format!("instance {i}: dominator threshold {o_leq} > capture threshold {o_in}"));
        }
        if o_in < n {
            nontrivial[0] += 1;
        }

        // successor trick
        let f = rand_func(&mut r, n, 256);
        let g = FinFunc(f.values().iter().map(|&v| if r.gen_bool(0.8) { v + r.gen_range(0..3) } else { r.gen_range(0..256) }).collect());
        let t_neq = least_threshold(RelationKind::Neq, &f, &g).unwrap().threshold;
        let t_succ = least_threshold(RelationKind::Leq, &f.successor(), &g).unwrap().threshold;
        if t_neq != threshold_oracle(n, |l| f.values()[l] != g.values()[l]) || t_neq > t_succ {
            return Err(format!("instance {i}: ≠ threshold {t_neq} vs successor ≤ threshold {t_succ}"));
        }
        if t_succ < n {
            nontrivial[1] += 1;
        }

        // a function bounded from k on never meets g + 1 there
        let k = least_threshold(RelationKind::Leq, &f, &g).unwrap().threshold;
        let g1 = g.successor();
        let tail_hits = (k..n).filter(|&l| f.values()[l] == g1.values()[l]).count();
        if tail_hits != 0 {
            return Err(format!("instance {i}: {tail_hits} agreements with g+1 beyond {k}"));
        }
        let total = hit_count(RelationKind::Eq, &f, &g1).unwrap();
        if total != (0..n).filter(|&l| f.values()[l] == g1.values()[l]).count() {
            return Err(format!("instance {i}: hit count disagrees with brute force"));
        }
        if k < n {
            nontrivial[2] += 1;
        }

        // sum bound avoidance
        let sigma = rand_slalom(&mut r, n, 3, 64);
        let bound = sum_evader_bound(&sigma);
        let f = rand_func(&mut r, n, 256);
        for l in 0..n {
            if f.values()[l] >= bound.values()[l] {
                nontrivial[3] += 1;
                if sigma.cell(l).contains(&f.values()[l]) {
                    return Err(format!("instance {i}: f({l}) = {} ≥ bound but captured", f.values()[l]));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    if nontrivial.contains(&0) {
        return Err(format!("degenerate sample {nontrivial:?}"));
    }
    Ok(format!("1000 instances × 4 properties, non-vacuous counts {nontrivial:?}, {elapsed:?}"))
}

fn weave_agreement() -> Outcome {
    let mut r = rng(5);
    let mut matches = 0;
    for i in 0..600 {
        let (h, p) = rand_partition(&mut r);
        let extra = r.gen_range(0..3);
        let f = rand_func(&mut r, p.covered_horizon() + extra, 4);
        let encoded = block_encode(&f, &p).map_err(|e| e.to_string())?;
        let entries: Vec<Vec<PartialFunc>> = (0..p.block_count())
            .map(|n| {
                let block = p.block(n);
                let m = r.gen_range(0..=h.width(n));
                let mut entry: Vec<PartialFunc> = (0..m)
                    .map(|_| block.iter().map(|&x| (x, r.gen_range(0..4))).collect())
                    .collect();
                if m > 0 && r.gen_bool(0.5) {
                    let slot = r.gen_range(0..m);
                    entry[slot] = encoded.entries[n].clone();
                }
                entry
            })
            .collect();
        let sigma = BlockSlalom {
            width: h.clone(),
            entries,
        };
        let g = weave(&sigma, &p).map_err(|e| format!("instance {i}: {e}"))?;
        for n in 0..p.block_count() {
            let mut padded = sigma.entries[n].clone();
            let zero: PartialFunc = p.block(n).into_iter().map(|x| (x, 0)).collect();
            padded.resize(h.width(n), zero);
            for (idx, w) in padded.iter().enumerate() {
                if *w != encoded.entries[n] {
                    continue;
                }
                matches += 1;
                let k = idx + 1;
                if !p.cell(n, k).iter().any(|&x| g.values()[x] == f.values()[x]) {
                    return Err(format!("instance {i}: block {n} member {k} matches f but woven g never agrees on J_{n},{k}"));
                }
            }
        }
    }
    if matches == 0 {
        return Err("no matching blocks generated".into());
    }
    Ok(format!("600 triples, {matches} matching block members checked"))
}

fn column_rank_invariant() -> Outcome {
    let mut r = rng(6);
    let mut positions = 0;
    for i in 0..600 {
        let (h, p) = rand_partition(&mut r);
        let extra = r.gen_range(0..2);
        let sigma = rand_slalom(&mut r, p.covered_horizon() + extra, 4, 16);
        let g = avoider_witness(&sigma, &h, &p).map_err(|e| format!("instance {i}: {e}"))?;
        for n in 0..p.block_count() {
            for k in 1..=h.width(n) {
                for &x in p.cell(n, k) {
                    positions += 1;
                    let want = kth_greatest_oracle(sigma.cell(x), k);
                    if g.values()[x] != want {
                        return Err(format!("instance {i}: g({x}) = {} but rank-{k} element is {want}", g.values()[x]));
                    }
                    // any f(x) ∈ σ(x) of rank k in σ(x) agrees with g at x
                    for &v in sigma.cell(x) {
                        let rank = sigma.cell(x).iter().filter(|&&u| u >= v).count();
                        if rank == k && v != g.values()[x] {
                            return Err(format!("instance {i}: value {v} of rank {k} at {x} differs from g"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("600 triples, {positions} positions checked"))
}

fn projection_order_d() -> Outcome {
    let mut r = rng(71);
    for i in 0..600 {
        let b = rand_loc(&mut r, false);
        let a = rand_loc_extension(&mut r, &b);
        if !oracle_loc_leq(&a, &b) || !leq(PosetKind::Loc, &Condition::Loc(a.clone()), &Condition::Loc(b.clone())).unwrap() {
            return Err(format!("pair {i}: generator produced a non-extension"));
        }
        let (pa, pb) = (proj_loc_to_d(&a).unwrap(), proj_loc_to_d(&b).unwrap());
        if !oracle_hechler_leq(&pa, &pb) {
            let n = (pb.stem.horizon()..pa.stem.horizon())
                .find(|&n| pa.stem.values()[n] < pb.side.values()[n])
                .unwrap_or(0);
            return Err(format!(
                "pair {i}: a = {} ≤ b = {} but at n={n} max t(n) = {} < Σℱ(n) = {}",
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap(),
                pa.stem.values().get(n).copied().unwrap_or(0),
                pb.side.values()[n]
            ));
        }
    }
    Ok("600 pairs".into())
}

fn projection_order_e() -> Outcome {
    let mut r = rng(72);
    let mut strict = 0;
    for i in 0..600 {
        let b = rand_loc(&mut r, false);
        let a = rand_loc_extension(&mut r, &b);
        if !oracle_loc_leq(&a, &b) {
            return Err(format!("pair {i}: generator produced a non-extension"));
        }
        if a.prefix.len() > b.prefix.len() {
            strict += 1;
        }
        let (pa, pb) = (proj_loc_to_e(&a).unwrap(), proj_loc_to_e(&b).unwrap());
        if !oracle_e_leq(&pa, &pb) {
            return Err(format!("pair {i}: {} projects outside the order", serde_json::to_string(&a).unwrap()));
        }
        if !leq(PosetKind::E, &Condition::E(pa), &Condition::E(pb)).unwrap() {
            return Err(format!("pair {i}: library E order disagrees with brute force"));
        }
    }
    Ok(format!("600 pairs, {strict} with new positions"))
}

fn lift_laws_d() -> Outcome {
    let mut r = rng(73);
    for i in 0..250 {
        let c = rand_loc(&mut r, true);
        let p = proj_loc_to_d(&c).unwrap();
        let sum = c.side.pointwise_sum();
        let side = FinFunc(sum.values().iter().map(|&s| s + 1 + r.gen_range(0..4)).collect());
        let len = c.prefix.len();
        let new = r.gen_range(0..=3).min(LOC_HORIZON - len);
        let mut stem = p.stem.values().to_vec();
        for n in len..len + new {
            stem.push(n as u64 + sum.values()[n] + 1 + r.gen_range(0..5));
        }
        let q = HechlerCond { stem: FinFunc(stem), side };
        if !oracle_hechler_leq(&q, &p) {
            return Err(format!("instance {i}: generator produced q not below the projection"));
        }
        let lifted = lift_loc_to_d(&c, &q).map_err(|e| format!("instance {i}: {e}"))?;
        if !validate(&Condition::Loc(lifted.clone())).is_empty() {
            return Err(format!("instance {i}: lift is not a valid condition"));
        }
        if !oracle_loc_leq(&lifted, &c) {
            return Err(format!("instance {i}: lift is not below c"));
        }
        if proj_loc_to_d(&lifted).unwrap() != q {
            return Err(format!("instance {i}: re-projection differs from q"));
        }
    }
    Ok("250 instances".into())
}

fn lift_laws_e() -> Outcome {
    let mut r = rng(74);
    let mut new_positions = 0;
    for i in 0..250 {
        let c = rand_loc(&mut r, true);
        let p = proj_loc_to_e(&c).unwrap();
        let len = c.prefix.len();
        let mut side = c.side.clone();
        for _ in 0..r.gen_range(0..=(len - 1 - side.len())) {
            side = side.with_member(rand_func(&mut r, LOC_HORIZON, 6)).unwrap();
        }
        let new = r.gen_range(0..=3).min(LOC_HORIZON - len);
        new_positions += new;
        let mut stem = p.stem.values().to_vec();
        stem.extend((0..new).map(|_| r.gen_range(0..12)));
        let q = reduce_e(&ECond { stem: FinFunc(stem), side }, len);
        if !oracle_e_leq(&q, &p) {
            return Err(format!("instance {i}: reduced target not below the projection"));
        }
        let lifted = lift_loc_to_e(&c, &q).map_err(|e| format!("instance {i}: {e}"))?;
        if !validate(&Condition::Loc(lifted.clone())).is_empty() {
            return Err(format!("instance {i}: lift is not a valid condition"));
        }
        if !oracle_loc_leq(&lifted, &c) {
            return Err(format!("instance {i}: lift is not below c"));
        }
        if proj_loc_to_e(&lifted).unwrap().stem != q.stem {
            return Err(format!("instance {i}: re-projected stem differs from q"));
        }
    }
    Ok(format!("250 instances, {new_positions} new positions"))
}

fn rank_regression() -> Outcome {
    let c = LocCond {
        prefix: vec![BTreeSet::new()],
        side: Family::empty(2),
    };
    let q = ECond {
        stem: FinFunc(vec![0, 3]),
        side: Family::empty(2),
    };
    match lift_loc_to_e(&c, &q) {
        Err(ProjectionError::RankTooLarge { position: 1, rank: 3 }) => Ok("RankTooLarge at n=1, rank 3".into()),
        other => Err(format!("got {other:?}")),
    }
}

fn check_fusion_nesting(kind: PosetKind, a: &Condition, b: &Condition, depth: usize) -> Result<bool, String> {
    let plain = leq(kind, a, b).map_err(|e| e.to_string())?;
    let mut prev = plain;
    let mut any = false;
    for n in 0..=depth {
        let f = fusion_leq(kind, a, b, n).map_err(|e| e.to_string())?;
        if f && !prev {
            return Err(format!("{kind}: ≤_{n} holds but the coarser relation does not"));
        }
        any |= f;
        prev = f;
    }
    Ok(any)
}

fn fusion_orders() -> Outcome {
    let mut r = rng(8);
    let mut nontrivial = BTreeMap::new();
    for i in 0..250 {
        let p = rand_sacks(&mut r);
        let q = if r.gen_bool(0.8) { prune(&mut r, &p, sacks_valid) } else { rand_sacks(&mut r) };
        let (qc, pc) = (Condition::Sacks(SacksTree { nodes: q }), Condition::Sacks(SacksTree { nodes: p }));
        if check_fusion_nesting(PosetKind::Sacks, &qc, &pc, 6).map_err(|e| format!("pair {i}: {e}"))? {
            *nontrivial.entry("sacks").or_insert(0) += 1;
        }

        let budget = r.gen_range(2..=3);
        let lp = rand_laver(&mut r, budget);
        let lq = if r.gen_bool(0.8) {
            LaverTree {
                nodes: prune(&mut r, &lp.nodes, laver_valid(budget)),
                ..lp.clone()
            }
        } else {
            rand_laver(&mut r, budget)
        };
        let (qc, pc) = (Condition::Laver(lq.clone()), Condition::Laver(lp.clone()));
        if check_fusion_nesting(PosetKind::Laver, &qc, &pc, 8).map_err(|e| format!("pair {i}: {e}"))? {
            *nontrivial.entry("laver").or_insert(0) += 1;
        }

        let sp = rand_sacks(&mut r);
        let sq = prune(&mut r, &sp, sacks_valid);
        let prod_p = Condition::Product(ProductCond {
            sacks: SacksTree { nodes: sp },
            laver: lp,
        });
        let prod_q = Condition::Product(ProductCond {
            sacks: SacksTree { nodes: sq },
            laver: lq,
        });
        if check_fusion_nesting(PosetKind::Product, &prod_q, &prod_p, 6).map_err(|e| format!("pair {i}: {e}"))? {
            *nontrivial.entry("product").or_insert(0) += 1;
        }
    }
    if nontrivial.len() != 3 {
        return Err(format!("some kind never satisfied a fusion order: {nontrivial:?}"));
    }

    // reflexivity and transitivity on descending chains and on unrelated triples
    for i in 0..200 {
        for (kind, chain) in random_chains(&mut r) {
            for c in &chain {
                if !leq(kind, c, c).map_err(|e| e.to_string())? {
                    return Err(format!("triple {i}: {kind} not reflexive"));
                }
            }
            let (a, b, c) = (&chain[2], &chain[1], &chain[0]);
            let ab = leq(kind, a, b).map_err(|e| e.to_string())?;
            let bc = leq(kind, b, c).map_err(|e| e.to_string())?;
            let ac = leq(kind, a, c).map_err(|e| e.to_string())?;
            if ab && bc && !ac {
                return Err(format!("triple {i}: {kind} not transitive"));
            }
        }
    }
    Ok(format!("250 pairs per kind, fusion witnessed {nontrivial:?}; 200 triples per kind for reflexivity and transitivity"))
}

/// For each kind, three conditions `c0 ≥ c1 ≥ c2` built by extension (sometimes replaced by unrelated ones).
fn random_chains(r: &mut ChaCha8Rng) -> Vec<(PosetKind, Vec<Condition>)> {
    let mut out = Vec::new();
    let horizon = 8;

    let len = r.gen_range(0..3);
    let mut stem = rand_func(r, len, 5).values().to_vec();
    let mut cohen = Vec::new();
    for _ in 0..3 {
        cohen.push(Condition::Cohen(CohenCond { stem: FinFunc(stem.clone()) }));
        stem.extend((0..r.gen_range(0..3)).map(|_| r.gen_range(0..5)));
    }
    out.push((PosetKind::Cohen, cohen));

    let mut h = HechlerCond {
        stem: FinFunc(vec![]),
        side: rand_func(r, horizon, 5),
    };
    let mut hechler = Vec::new();
    for _ in 0..3 {
        hechler.push(Condition::Hechler(h.clone()));
        let mut stem = h.stem.values().to_vec();
        for _ in 0..r.gen_range(0..3) {
            if stem.len() < horizon {
                stem.push(h.side.values()[stem.len()] + r.gen_range(0..3));
            }
        }
        let side = FinFunc(h.side.values().iter().map(|v| v + r.gen_range(0..2)).collect());
        h = HechlerCond { stem: FinFunc(stem), side };
    }
    out.push((PosetKind::Hechler, hechler));

    let members = r.gen_range(0..2);
    let mut e = ECond {
        stem: FinFunc(vec![]),
        side: rand_family(r, members, horizon, 4),
    };
    let mut ecs = Vec::new();
    for _ in 0..3 {
        ecs.push(Condition::E(e.clone()));
        let mut stem = e.stem.values().to_vec();
        for _ in 0..r.gen_range(0..3) {
            let n = stem.len();
            if n < horizon {
                let used: BTreeSet<u64> = e.side.members().iter().map(|f| f.values()[n]).collect();
                stem.push((0..).find(|v| !used.contains(v)).unwrap());
            }
        }
        let mut side = e.side.clone();
        if r.gen_bool(0.5) {
            side = side.with_member(rand_func(r, horizon, 4)).unwrap();
        }
        e = ECond { stem: FinFunc(stem), side };
    }
    out.push((PosetKind::E, ecs));

    let mut l = rand_loc(r, false);
    let mut locs = Vec::new();
    for _ in 0..3 {
        locs.push(Condition::Loc(l.clone()));
        l = rand_loc_extension(r, &l);
    }
    out.push((PosetKind::Loc, locs));

    let mut s = rand_sacks(r);
    let mut sacks = Vec::new();
    for _ in 0..3 {
        sacks.push(Condition::Sacks(SacksTree { nodes: s.clone() }));
        s = prune(r, &s, sacks_valid);
    }
    out.push((PosetKind::Sacks, sacks.clone()));

    let budget = r.gen_range(2..=3);
    let mut lt = rand_laver(r, budget);
    let mut lavers = Vec::new();
    for _ in 0..3 {
        lavers.push(lt.clone());
        lt = LaverTree {
            nodes: prune(r, &lt.nodes, laver_valid(budget)),
            ..lt
        };
    }
    out.push((PosetKind::Laver, lavers.iter().cloned().map(Condition::Laver).collect()));

    let product = sacks
        .iter()
        .zip(&lavers)
        .map(|(s, l)| match s {
            Condition::Sacks(s) => Condition::Product(ProductCond {
                sacks: s.clone(),
                laver: l.clone(),
            }),
            _ => unreachable!(),
        })
        .collect();
    out.push((PosetKind::Product, product));

    // unrelated triples exercise the implication with false premises too
    for (_, chain) in out.iter_mut() {
        if r.gen_bool(0.2) {
            chain.swap(0, 2);
        }
    }
    out
}

fn constructions_meet_bounds() -> Outcome {
    let mut r = rng(9);
    let mut escapes = 0;
    for i in 0..500 {
        let n = r.gen_range(1..=40);
        let members = r.gen_range(1..=6);
        let fam = rand_family(&mut r, members, n, 64);

        let d = family_dominator(&fam);
        for (j, f) in fam.members().iter().enumerate() {
            if threshold_oracle(n, |l| f.values()[l] <= d.values()[l]) != 0 {
                return Err(format!("instance {i}: dominator misses member {j}"));
            }
        }

        let g = round_robin_ioe(&fam).map_err(|e| e.to_string())?;
        for (j, f) in fam.members().iter().enumerate() {
            let hits = (0..n).filter(|&l| f.values()[l] == g.values()[l]).count();
            if hits < n / members {
                return Err(format!("instance {i}: member {j} met {hits} times, need {}", n / members));
            }
        }

        let (sigma, reports) = family_slalom(&fam);
        for (j, f) in fam.members().iter().enumerate() {
            let t = threshold_oracle(n, |l| sigma.cell(l).contains(&f.values()[l]));
            if t > j + 1 || reports[j].threshold != t {
                return Err(format!("instance {i}: member {j} captured from {t}, reported {}", reports[j].threshold));
            }
        }

        let m = r.gen_range(1..=16);
        // identity width keeps |σ(n)| ≤ n < 2^n, so an admissible string always exists
        let cells = (0..m)
            .map(|l| {
                let size = r.gen_range(0..=l.min(3));
                rand_set(&mut r, size, 40)
            })
            .collect();
        let slalom = Slalom::identity(cells).unwrap();
        let enumeration = StringEnumeration;
        let strings = evasion_target(&slalom, &enumeration).map_err(|e| format!("instance {i}: {e}"))?;
        let hat = string_encode(&strings, &enumeration).map_err(|e| e.to_string())?;
        for l in 0..m {
            if strings[l].len() != l {
                return Err(format!("instance {i}: string at {l} has length {}", strings[l].len()));
            }
            if slalom.cell(l).contains(&hat.values()[l]) {
                return Err(format!("instance {i}: encoded value {} captured at {l}", hat.values()[l]));
            }
            escapes += 1;
        }
    }
    Ok(format!("500 families, {escapes} evasion positions"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("cut enumeration", cut_enumeration),
        ("diagram shape", diagram_shape),
        ("knowledge-base soundness", knowledge_base_soundness),
        ("inclusion analogues", inclusion_analogues),
        ("weave agreement", weave_agreement),
        ("column rank invariant", column_rank_invariant),
        ("projection laws: LOC→D order preservation", projection_order_d),
        ("projection laws: LOC→E order preservation", projection_order_e),
        ("projection laws: LOC→D lift", lift_laws_d),
        ("projection laws: LOC→E lift", lift_laws_e),
        ("projection laws: rank regression", rank_regression),
        ("fusion orders", fusion_orders),
        ("constructions meet bounds", constructions_meet_bounds),
    ];
    let mut unexpected = Vec::new();
    for (name, check) in criteria {
        let known = KNOWN_UNATTAINABLE.contains(&name);
        match check() {
            Ok(detail) => {
                println!("[PASS] {name}: {detail}");
                if known {
                    unexpected.push(format!("{name} passed but is listed as unattainable"));
                }
            }
            Err(detail) => {
                let tag = if known { " (known unattainable)" } else { "" };
                println!("[FAIL] {name}{tag}: {detail}");
                if !known {
                    unexpected.push(name.to_string());
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results: {unexpected:?}");
        std::process::exit(1);
    }
}
