//! Projections from localization forcing onto Hechler and eventually
//! different forcing, with the lifts that witness them on finite conditions.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::combinatorics::{Family, FinFunc};
use crate::posets::{e_leq, hechler_leq, validate, Condition, ECond, HechlerCond, LocCond, PosetError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectionError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("NotBelowProjection: {0}")]
    NotBelowProjection(String),
    #[error("GrowthTooSmall: at n={position} the stem value {stem} is not above n + Σℱ(n) = {bound}")]
    GrowthTooSmall { position: usize, stem: u64, bound: u64 },
    #[error("SideTooSmall: at n={position} the side value {side} is not above Σℱ(n) = {sum}")]
    SideTooSmall { position: usize, side: u64, sum: u64 },
    #[error("FamilyTooLarge: {0}")]
    FamilyTooLarge(String),
    #[error("RankTooLarge: at n={position} the stem value has rank {rank} among values outside the side family")]
    RankTooLarge { position: usize, rank: u64 },
    #[error("StemCapturedBySide: at n={position} the stem value {value} equals a side value")]
    StemCapturedBySide { position: usize, value: u64 },
}

fn ensure_valid(c: Condition) -> Result<(), ProjectionError> {
    let violations = validate(&c);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(PosetError::InvalidCondition { violations }.into())
    }
}

/// The `k`-th (from 0) natural number outside `set`.
pub fn kth_non_member(set: &BTreeSet<u64>, k: u64) -> u64 {
    let mut remaining = k;
    let mut v = 0u64;
    loop {
        if !set.contains(&v) {
            if remaining == 0 {
                return v;
            }
            remaining -= 1;
        }
        v += 1;
    }
}

/// Position of `m` among the naturals outside `set`; `None` when `m ∈ set`.
pub fn rank_outside(set: &BTreeSet<u64>, m: u64) -> Option<u64> {
    if set.contains(&m) {
        None
    } else {
        Some(m - set.range(..m).count() as u64)
    }
}

fn values_at(family: &Family, n: usize) -> BTreeSet<u64> {
    family.members().iter().map(|f| f[n]).collect()
}

/// `(s, ℱ) ↦ (n ↦ max s(n), Σℱ)`.
pub fn proj_loc_to_d(c: &LocCond) -> Result<HechlerCond, ProjectionError> {
    ensure_valid(Condition::Loc(c.clone()))?;
    let stem = c.prefix.iter().map(|cell| cell.iter().next_back().copied().unwrap_or(0)).collect();
    Ok(HechlerCond {
        stem: FinFunc(stem),
        side: c.side.pointwise_sum(),
    })
}

/// Extends `c` to a condition projecting exactly onto `q`.
///
/// New cells hold the old family's values, the target stem value, and the
/// least unused values below it until the cell has `n` elements. The added
/// family member is `q.side − Σℱ`.
pub fn lift_loc_to_d(c: &LocCond, q: &HechlerCond) -> Result<LocCond, ProjectionError> {
    ensure_valid(Condition::Hechler(q.clone()))?;
    let p = proj_loc_to_d(c)?;
    match hechler_leq(q, &p) {
        Ok(true) => {}
        Ok(false) => return Err(ProjectionError::NotBelowProjection("target is not below the projection in the Hechler order".into())),
        Err(e) => return Err(ProjectionError::NotBelowProjection(e.to_string())),
    }
    if c.side.len() >= c.prefix.len() {
        return Err(ProjectionError::FamilyTooLarge(format!("|ℱ| = {} is not below |s| = {}", c.side.len(), c.prefix.len())));
    }
    let sum = &p.side;
    for n in 0..sum.horizon() {
        if q.side[n] <= sum[n] {
            return Err(ProjectionError::SideTooSmall {
                position: n,
                side: q.side[n],
                sum: sum[n],
            });
        }
    }
    for n in c.prefix.len()..q.stem.horizon() {
        let bound = n as u64 + sum[n];
        if q.stem[n] <= bound {
            return Err(ProjectionError::GrowthTooSmall {
                position: n,
                stem: q.stem[n],
                bound,
            });
        }
    }

    let extra = FinFunc(q.side.values().iter().zip(sum.values()).map(|(g, s)| g - s).collect());
    let mut prefix = c.prefix.clone();
    for n in c.prefix.len()..q.stem.horizon() {
        let top = q.stem[n];
        let mut cell = values_at(&c.side, n);
        cell.insert(top);
        let mut v = 0;
        while cell.len() < n {
            cell.insert(v);
            v += 1;
        }
        debug_assert!(cell.iter().all(|&x| x <= top));
        prefix.push(cell);
    }
    let side = c
        .side
        .with_member(extra)
        .map_err(|e| ProjectionError::NotBelowProjection(e.to_string()))?;
    Ok(LocCond { prefix, side })
}

/// `stem(n)` is the `k`-th natural outside `s(n)` with `k = Σs(n) mod n`; `stem(0) = 0`.
pub fn proj_loc_to_e(c: &LocCond) -> Result<ECond, ProjectionError> {
    ensure_valid(Condition::Loc(c.clone()))?;
    let stem = c
        .prefix
        .iter()
        .enumerate()
        .map(|(n, cell)| {
            if n == 0 {
                0
            } else {
                let k = cell.iter().sum::<u64>() % n as u64;
                kth_non_member(cell, k)
            }
        })
        .collect();
    Ok(ECond {
        stem: FinFunc(stem),
        side: c.side.clone(),
    })
}

/// Extends `c` to a condition whose projection carries `q`'s stem.
///
/// Each new cell holds the side values at `n` plus padding above every value
/// already in play: one residue-fixing value, then multiples of `n`.
pub fn lift_loc_to_e(c: &LocCond, q: &ECond) -> Result<LocCond, ProjectionError> {
    ensure_valid(Condition::E(q.clone()))?;
    let p = proj_loc_to_e(c)?;
    if !e_leq(q, &p) {
        return Err(ProjectionError::NotBelowProjection(
            "target is not below the projection in the eventually different order".into(),
        ));
    }
    let old = c.prefix.len();
    let new_len = q.stem.horizon().max(old);
    if q.side.len() > new_len {
        return Err(ProjectionError::FamilyTooLarge(format!(
            "|side| = {} exceeds the lifted prefix length {new_len}",
            q.side.len()
        )));
    }
    for n in old.max(1)..q.stem.horizon() {
        if q.side.len() >= n {
            return Err(ProjectionError::FamilyTooLarge(format!("|side| = {} is not below n={n}", q.side.len())));
        }
    }

    let mut prefix = c.prefix.clone();
    for n in old..q.stem.horizon() {
        let m = q.stem[n];
        if n == 0 {
            if m != 0 {
                return Err(ProjectionError::RankTooLarge { position: 0, rank: m });
            }
            prefix.push(BTreeSet::new());
            continue;
        }
        let captured = values_at(&q.side, n);
        let rank = rank_outside(&captured, m).ok_or(ProjectionError::StemCapturedBySide { position: n, value: m })?;
        if rank >= n as u64 {
            return Err(ProjectionError::RankTooLarge { position: n, rank });
        }
        let modulus = n as u64;
        let base = captured.iter().copied().chain([m]).max().unwrap_or(0);
        let side_sum: u64 = captured.iter().sum();
        let residue = (rank + modulus - side_sum % modulus) % modulus;
        let first = least_above_with_residue(base, residue, modulus);
        let mut cell = captured;
        cell.insert(first);
        let mut v = least_above_with_residue(base, 0, modulus);
        while cell.len() < n {
            if v != first {
                cell.insert(v);
            }
            v += modulus;
        }
        prefix.push(cell);
    }
    Ok(LocCond {
        prefix,
        side: q.side.clone(),
    })
}

fn least_above_with_residue(base: u64, residue: u64, modulus: u64) -> u64 {
    let start = base + 1;
    start + (residue + modulus - start % modulus) % modulus
}

/// Replaces stem values at positions `≥ from` that a lift cannot encode
/// (captured by the side, or of rank `≥ n`) with the least value outside the
/// side family. Position 0 is set to 0.
pub fn reduce_e(q: &ECond, from: usize) -> ECond {
    let mut stem = q.stem.0.clone();
    for (n, value) in stem.iter_mut().enumerate().skip(from) {
        if n == 0 {
            *value = 0;
            continue;
        }
        let captured = values_at(&q.side, n);
        let liftable = matches!(rank_outside(&captured, *value), Some(r) if r < n as u64);
        if !liftable {
            *value = kth_non_member(&captured, 0);
        }
    }
    ECond {
        stem: FinFunc(stem),
        side: q.side.clone(),
    }
}

/// `n ↦ d(n) mod 2`.
pub fn parity_map(d: &FinFunc) -> FinFunc {
    FinFunc(d.values().iter().map(|v| v % 2).collect())
}
