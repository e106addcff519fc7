//! Dyadic grid levels and the greedy selection rule of the adaptive grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::monotone::{Certainty, DesignState, UnitPoint};
use crate::oracle::Domain;

/// Which family of dyadic grids a strategy refines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridFamily {
    /// `{0, 2^-l, ..., 1}^p`, starting at `l = 0` (the corners).
    Full,
    /// `{2^-l, ..., 1 - 2^-l}^p`, starting at `l = 1` (the centre).
    Inner,
}

impl GridFamily {
    pub fn first_level(self) -> u32 {
        match self {
            GridFamily::Full => 0,
            GridFamily::Inner => 1,
        }
    }

    pub fn axis_values(self, level: u32) -> Vec<f64> {
        let side = (1u64 << level) as f64;
        let z = 1u64 << level;
        match self {
            GridFamily::Full => (0..=z).map(|k| k as f64 / side).collect(),
            GridFamily::Inner => (1..z).map(|k| k as f64 / side).collect(),
        }
    }

    /// Number of points on the level, saturating.
    pub fn level_size(self, level: u32, p: usize) -> u128 {
        if level >= 64 {
            return u128::MAX;
        }
        let per_axis = match self {
            GridFamily::Full => (1u128 << level) + 1,
            GridFamily::Inner => (1u128 << level) - 1,
        };
        let mut total: u128 = 1;
        for _ in 0..p {
            total = total.saturating_mul(per_axis);
        }
        total
    }
}

/// Lawful axis values of a grid level.
fn level_axes(family: GridFamily, level: u32, p: usize, domain: Option<&Domain>) -> Vec<Vec<f64>> {
    let axis = family.axis_values(level);
    match domain {
        None => vec![axis; p],
        Some(d) => d
            .axes()
            .iter()
            .map(|lawful| match lawful {
                None => axis.clone(),
                Some(values) => axis
                    .iter()
                    .copied()
                    .filter(|a| values.iter().any(|v| (v - a).abs() <= 1e-12))
                    .collect(),
            })
            .collect(),
    }
}

/// The points of the grid level, lexicographically ordered, restricted to
/// the domain.
pub fn level_points(family: GridFamily, level: u32, p: usize, domain: Option<&Domain>) -> Vec<UnitPoint> {
    product(&level_axes(family, level, p, domain))
}

fn product(axes: &[Vec<f64>]) -> Vec<UnitPoint> {
    if axes.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        out.push(UnitPoint::from_unchecked(
            idx.iter().zip(axes).map(|(&i, a)| a[i]).collect(),
        ));
        for k in (0..axes.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// Unknown points of the product of `axes` inside the index box `lo..=hi`,
/// skipping sub-boxes whose top corner is certainly negative or whose bottom
/// corner is certainly positive.
fn unknown_in_box(
    state: &DesignState,
    axes: &[Vec<f64>],
    lo: &mut [usize],
    hi: &mut [usize],
    out: &mut Vec<UnitPoint>,
) -> Result<()> {
    let corner = |idx: &[usize]| UnitPoint::from_unchecked(idx.iter().zip(axes).map(|(&i, a)| a[i]).collect());
    let top = corner(hi);
    if state.classify_unchecked(&top)? == Certainty::CertainNegative {
        return Ok(());
    }
    if lo == hi {
        if state.classify_unchecked(&top)?.is_unknown() {
            out.push(top);
        }
        return Ok(());
    }
    if state.classify_unchecked(&corner(lo))? == Certainty::CertainPositive {
        return Ok(());
    }
    let k = (0..lo.len()).max_by_key(|&k| (hi[k] - lo[k], std::cmp::Reverse(k))).expect("non-empty box");
    let mid = lo[k] + (hi[k] - lo[k]) / 2;
    let saved = hi[k];
    hi[k] = mid;
    unknown_in_box(state, axes, lo, hi, out)?;
    hi[k] = saved;
    let saved = lo[k];
    lo[k] = mid + 1;
    unknown_in_box(state, axes, lo, hi, out)?;
    lo[k] = saved;
    Ok(())
}

/// Result of regenerating the candidate pool.
#[derive(Clone, Debug, PartialEq)]
pub struct Regenerated {
    pub level: u32,
    /// Level points (lawful ones, for lattice domains).
    pub level_points: usize,
    pub candidates: Vec<UnitPoint>,
}

/// Fills `state.candidates` with the unknown points of grid level
/// `state.level`, then increments the level.
pub fn next_candidate_set(
    state: &mut DesignState,
    family: GridFamily,
    domain: Option<&Domain>,
) -> Result<Regenerated> {
    if !state.candidates.is_empty() {
        return Err(Error::usage("candidate pool is not empty"));
    }
    let level = state.level.max(family.first_level());
    let axes = level_axes(family, level, state.dimension(), domain);
    let level_points = axes.iter().map(Vec::len).product();
    let mut candidates = Vec::new();
    if level_points > 0 {
        let mut lo = vec![0; axes.len()];
        let mut hi: Vec<usize> = axes.iter().map(|a| a.len() - 1).collect();
        unknown_in_box(state, &axes, &mut lo, &mut hi, &mut candidates)?;
        candidates.sort_by(|a, b| a.lex_cmp(b));
    }
    state.candidates = candidates.clone();
    state.level = level + 1;
    Ok(Regenerated {
        level,
        level_points,
        candidates,
    })
}

/// The candidate maximizing `min(|A_x|, |B_x|)`, then `max(|A_x|, |B_x|)`,
/// then lexicographically largest, where `A_x` and `B_x` are the candidates
/// below and above `x` (both containing `x`).
pub fn ag_select(candidates: &[UnitPoint]) -> Result<UnitPoint> {
    if candidates.is_empty() {
        return Err(Error::usage("cannot select from an empty candidate set"));
    }
    let score = |x: &UnitPoint| {
        let (mut below, mut above) = (0usize, 0usize);
        for y in candidates {
            if y.leq(x) {
                below += 1;
            }
            if x.leq(y) {
                above += 1;
            }
        }
        (below.min(above), below.max(above))
    };
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].lex_cmp(&candidates[b]));
    let best = if candidates.len() > 512 {
        order
            .par_iter()
            .enumerate()
            .map(|(rank, &i)| (score(&candidates[i]), rank))
            .max()
    } else {
        order
            .iter()
            .enumerate()
            .map(|(rank, &i)| (score(&candidates[i]), rank))
            .max()
    };
    let (_, rank) = best.expect("non-empty");
    Ok(candidates[order[rank]].clone())
}
