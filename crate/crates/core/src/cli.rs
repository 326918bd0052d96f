//! Command-line front end. `run` returns the process exit code:
//! 0 on success or when the checked relation holds, 1 when a relation or law
//! fails, 2 on malformed input or a violated precondition.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::combinatorics::{
    family_report, hit_count, least_threshold, Family, FinFunc, RelationKind, ReportMode, Slalom,
};
use crate::constructions::{
    evasion_target, family_dominator, family_slalom, round_robin_ioe, string_encode, sum_evader_bound,
    StringEnumeration,
};
use crate::diagram::{
    compose_profiles, cut_entries, emit_dot, emit_json, kb_lookup, kb_names, propagate, DiagramState,
};
use crate::posets::{fusion_leq, leq, Condition, ECond, HechlerCond, LocCond, PosetKind};
use crate::projections::{lift_loc_to_d, lift_loc_to_e, proj_loc_to_d, proj_loc_to_e, reduce_e};

#[derive(Debug, Parser)]
#[command(name = "cichon", version, about = "Finite-horizon Cichon diagram toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DiagramFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CutsFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckRelation {
    Leq,
    Neq,
    In,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructKind {
    Dominator,
    Ioe,
    Evdiff,
    Slalom,
    Evader,
    RandomFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PosetOp {
    Leq,
    Fusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProjectionMap {
    LocD,
    LocE,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the diagram, optionally shaded by one or more forcings.
    Diagram {
        /// Knowledge-base entry; repeat to compose several.
        #[arg(long)]
        forcing: Vec<String>,
        #[arg(long, value_enum, default_value = "dot")]
        format: DiagramFormat,
    },
    /// List every upward-closed cut with its realizing forcing.
    Cuts {
        #[arg(long, value_enum, default_value = "text")]
        format: CutsFormat,
    },
    /// Least threshold of `f R g` on the finite horizon.
    Check {
        #[arg(long, value_enum)]
        relation: CheckRelation,
        #[arg(long)]
        f: PathBuf,
        /// A function, or a slalom for `in`.
        #[arg(long)]
        g: PathBuf,
    },
    /// Build a witness from a family and report the law it must satisfy.
    Construct {
        #[arg(long, value_enum)]
        kind: ConstructKind,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 3)]
        members: usize,
        #[arg(long, default_value_t = 16)]
        max_value: u64,
    },
    /// Compare two conditions of one poset.
    Poset {
        #[arg(long, value_parser = parse_kind)]
        kind: PosetKind,
        #[arg(long, value_enum)]
        op: PosetOp,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Project a localization condition, or lift a target back along the projection.
    Project {
        #[arg(long, value_enum)]
        map: ProjectionMap,
        /// A localization condition or a pair file `{"loc": ..., "target": ...}`.
        #[arg(long)]
        cond: PathBuf,
        #[arg(long)]
        lift: Option<PathBuf>,
        /// Repair unliftable stem values of the target first (loc-e only).
        #[arg(long)]
        reduce: bool,
    },
    /// Query the forcing knowledge base.
    Kb {
        #[arg(long)]
        list: bool,
        name: Option<String>,
    },
}

fn parse_kind(s: &str) -> Result<PosetKind, String> {
    s.parse()
}

/// Outcome of a command: what to print and the exit code.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }

    fn verdict(text: String, holds: bool) -> Self {
        Outcome {
            text,
            code: if holds { 0 } else { 1 },
        }
    }
}

type CmdResult = Result<Outcome, String>;

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed JSON in {}: {e}", path.display()))
}

fn from_value<T: DeserializeOwned>(value: Value, what: &str) -> Result<T, String> {
    serde_json::from_value(value).map_err(|e| format!("malformed {what}: {e}"))
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => {
            let _ = out.write_all(outcome.text.as_bytes());
            outcome.code
        }
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            2
        }
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Diagram { forcing, format } => diagram(&forcing, format),
        Command::Cuts { format } => cuts(format),
        Command::Check { relation, f, g } => check(relation, &f, &g),
        Command::Construct {
            kind,
            family,
            horizon,
            seed,
            members,
            max_value,
        } => construct(kind, family.as_deref(), horizon, seed, members, max_value),
        Command::Poset { kind, op, a, b, n } => poset(kind, op, &a, &b, n),
        Command::Project {
            map,
            cond,
            lift,
            reduce,
        } => project(map, &cond, lift.as_deref(), reduce),
        Command::Kb { list, name } => kb(list, name.as_deref()),
    }
}

fn diagram(forcing: &[String], format: DiagramFormat) -> CmdResult {
    let state = match forcing {
        [] => propagate(&DiagramState::unknown_everywhere()).map_err(|c| c.to_string())?,
        [one] => kb_lookup(one).map_err(|e| e.to_string())?.state.clone(),
        many => {
            let names: Vec<&str> = many.iter().map(String::as_str).collect();
            compose_profiles(&names).map_err(|e| e.to_string())?
        }
    };
    Ok(Outcome::ok(match format {
        DiagramFormat::Dot => emit_dot(&state),
        DiagramFormat::Json => {
            let mut s = emit_json(&state);
            s.push('\n');
            s
        }
    }))
}

fn cuts(format: CutsFormat) -> CmdResult {
    let entries = cut_entries();
    Ok(Outcome::ok(match format {
        CutsFormat::Json => pretty(&entries),
        CutsFormat::Text => {
            let mut s = String::new();
            for e in &entries {
                let nodes: Vec<String> = e.nonempty.iter().map(ToString::to_string).collect();
                s.push_str(&format!(
                    "{}) {:<10} {{{}}}\n",
                    e.case.as_deref().unwrap_or("?"),
                    e.forcing.as_deref().unwrap_or("-"),
                    nodes.join(", ")
                ));
            }
            s
        }
    }))
}

fn check(relation: CheckRelation, f: &Path, g: &Path) -> CmdResult {
    let f: FinFunc = read_json(f)?;
    let (report, hits, rel) = match relation {
        CheckRelation::In => {
            let sigma: Slalom = read_json(g)?;
            let report = least_threshold(RelationKind::In, &f, &sigma).map_err(|e| e.to_string())?;
            let hits = hit_count(RelationKind::In, &f, &sigma).map_err(|e| e.to_string())?;
            (report, Some(hits), RelationKind::In)
        }
        other => {
            let g: FinFunc = read_json(g)?;
            let rel = if other == CheckRelation::Leq {
                RelationKind::Leq
            } else {
                RelationKind::Neq
            };
            (least_threshold(rel, &f, &g).map_err(|e| e.to_string())?, None, rel)
        }
    };
    let mut body = json!({
        "relation": rel,
        "threshold": report.threshold,
        "vacuous": report.vacuous,
        "holds": !report.vacuous,
    });
    if let Some(h) = hits {
        body["hits"] = json!(h);
    }
    Ok(Outcome::verdict(pretty(&body), !report.vacuous))
}

fn random_family(seed: u64, members: usize, max_value: u64, horizon: usize) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let functions = (0..members)
        .map(|_| FinFunc((0..horizon).map(|_| rng.gen_range(0..=max_value)).collect()))
        .collect();
    Family::new(horizon, functions).expect("members share the horizon")
}

fn construct(
    kind: ConstructKind,
    family: Option<&Path>,
    horizon: Option<usize>,
    seed: Option<u64>,
    members: usize,
    max_value: u64,
) -> CmdResult {
    if kind == ConstructKind::RandomFamily {
        let horizon = horizon.ok_or("random-family needs --horizon")?;
        let fam = random_family(seed.unwrap_or(0), members, max_value, horizon);
        return Ok(Outcome::ok(pretty(&fam)));
    }
    let path = family.ok_or("--family is required")?;
    let mut fam: Family = read_json(path)?;
    if let Some(h) = horizon {
        if h > fam.horizon() {
            return Err(format!("--horizon {h} exceeds the family horizon {}", fam.horizon()));
        }
        fam = fam.truncated(h);
    }
    let n = fam.horizon();
    let err = |e: crate::combinatorics::CombinatoricsError| e.to_string();
    let (body, holds) = match kind {
        ConstructKind::Dominator => {
            let w = family_dominator(&fam);
            let report = family_report(RelationKind::Leq, &w, &fam, ReportMode::Bounding).map_err(err)?;
            let holds = report.thresholds.iter().all(|t| t.threshold == 0);
            (json!({ "witness": w, "report": report }), holds)
        }
        ConstructKind::Ioe => {
            let w = round_robin_ioe(&fam).map_err(|e| e.to_string())?;
            let report = family_report(RelationKind::Eq, &w, &fam, ReportMode::Evading).map_err(err)?;
            let floor = n / fam.len();
            let holds = report.hits.iter().all(|&h| h >= floor);
            (json!({ "witness": w, "report": report, "required_hits": floor }), holds)
        }
        ConstructKind::Slalom => {
            let (sigma, captures) = family_slalom(&fam);
            let holds = captures.iter().enumerate().all(|(i, t)| t.threshold <= i + 1);
            (json!({ "slalom": sigma, "captures": captures }), holds)
        }
        ConstructKind::Evdiff => {
            let (sigma, captures) = family_slalom(&fam);
            let w = sum_evader_bound(&sigma);
            let report = family_report(RelationKind::Neq, &w, &fam, ReportMode::Bounding).map_err(err)?;
            let holds = report
                .thresholds
                .iter()
                .zip(&captures)
                .all(|(t, c)| t.threshold <= c.threshold);
            (json!({ "witness": w, "report": report }), holds)
        }
        ConstructKind::Evader => {
            let (sigma, _) = family_slalom(&fam);
            let enumeration = StringEnumeration;
            let strings = evasion_target(&sigma, &enumeration).map_err(|e| e.to_string())?;
            let encoded = string_encode(&strings, &enumeration).map_err(|e| e.to_string())?;
            let escapes: Vec<usize> = (0..n).filter(|&i| !sigma.cell(i).contains(&encoded[i])).collect();
            let holds = escapes.len() == n;
            (json!({ "strings": strings, "encoded": encoded, "slalom": sigma }), holds)
        }
        ConstructKind::RandomFamily => unreachable!("handled above"),
    };
    Ok(Outcome::verdict(pretty(&body), holds))
}

fn poset(kind: PosetKind, op: PosetOp, a: &Path, b: &Path, n: Option<usize>) -> CmdResult {
    let a: Condition = read_json(a)?;
    let b: Condition = read_json(b)?;
    let holds = match op {
        PosetOp::Leq => leq(kind, &a, &b),
        PosetOp::Fusion => fusion_leq(kind, &a, &b, n.ok_or("fusion needs --n")?),
    }
    .map_err(|e| e.to_string())?;
    let mut body = json!({ "kind": kind.to_string(), "op": if op == PosetOp::Leq { "leq" } else { "fusion" }, "holds": holds });
    if let (PosetOp::Fusion, Some(n)) = (op, n) {
        body["n"] = json!(n);
    }
    Ok(Outcome::verdict(pretty(&body), holds))
}

fn parse_loc(value: Value) -> Result<LocCond, String> {
    if value.get("kind").is_some() {
        match from_value::<Condition>(value, "condition")? {
            Condition::Loc(c) => Ok(c),
            other => Err(format!("KindMismatch: expected loc, got {}", other.kind())),
        }
    } else {
        from_value(value, "localization condition")
    }
}

fn strip_kind(mut value: Value) -> Value {
    if let Some(obj) = value.as_object_mut() {
        obj.remove("kind");
    }
    value
}

fn project(map: ProjectionMap, cond: &Path, lift: Option<&Path>, reduce: bool) -> CmdResult {
    let raw: Value = read_json(cond)?;
    let (loc, paired_target) = match raw.get("loc") {
        Some(_) => {
            let mut obj = raw;
            let loc = parse_loc(obj["loc"].take())?;
            let target = obj.get_mut("target").map(Value::take);
            (loc, target)
        }
        None => (parse_loc(raw)?, None),
    };
    let target = match lift {
        Some(path) => Some(read_json::<Value>(path)?),
        None => paired_target,
    };
    if reduce && map == ProjectionMap::LocD {
        return Err("--reduce applies to loc-e only".into());
    }

    let Some(target) = target else {
        let projected = match map {
            ProjectionMap::LocD => Condition::Hechler(proj_loc_to_d(&loc).map_err(|e| e.to_string())?),
            ProjectionMap::LocE => Condition::E(proj_loc_to_e(&loc).map_err(|e| e.to_string())?),
        };
        return Ok(Outcome::ok(pretty(&projected)));
    };

    let base = Condition::Loc(loc.clone());
    let (lifted, reprojects, target_json) = match map {
        ProjectionMap::LocD => {
            let q: HechlerCond = from_value(strip_kind(target), "Hechler condition")?;
            let r = lift_loc_to_d(&loc, &q).map_err(|e| e.to_string())?;
            let back = proj_loc_to_d(&r).map_err(|e| e.to_string())?;
            (r, back == q, serde_json::to_value(Condition::Hechler(q)).expect("serializable"))
        }
        ProjectionMap::LocE => {
            let mut q: ECond = from_value(strip_kind(target), "E condition")?;
            if reduce {
                q = reduce_e(&q, loc.len());
            }
            let r = lift_loc_to_e(&loc, &q).map_err(|e| e.to_string())?;
            let back = proj_loc_to_e(&r).map_err(|e| e.to_string())?;
            (r, back.stem.truncated(q.stem.horizon()) == q.stem, serde_json::to_value(Condition::E(q)).expect("serializable"))
        }
    };
    let lifted_cond = Condition::Loc(lifted);
    let below = leq(PosetKind::Loc, &lifted_cond, &base).map_err(|e| e.to_string())?;
    let body = json!({
        "lift": lifted_cond,
        "target": target_json,
        "below_original": below,
        "reprojects": reprojects,
    });
    Ok(Outcome::verdict(pretty(&body), below && reprojects))
}

fn kb(list: bool, name: Option<&str>) -> CmdResult {
    match (list, name) {
        (_, Some(name)) => {
            let profile = kb_lookup(name).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(pretty(profile)))
        }
        (true, None) => Ok(Outcome::ok(kb_names().iter().map(|n| format!("{n}\n")).collect())),
        (false, None) => Err("kb needs --list or a forcing name".into()),
    }
}
