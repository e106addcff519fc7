//! Volumes of the certainly-negative, certainly-positive and uncertain
//! regions of a [`DesignState`].
//!
//! The certain regions are unions of origin-anchored boxes `[0, x]` and of
//! corner-anchored boxes `[x, 1]`. Their exact measure is computed by a slab
//! sweep over the last coordinate that recurses into one fewer dimension.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::{Certainty, DesignState, UnitPoint};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Exact,
    DyadicCells,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub v_negative: f64,
    pub v_positive: f64,
    pub v_uncertain: f64,
    pub method: VolumeMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_stderr: Option<f64>,
}

/// Largest dimension handled by the exact sweep in [`uncertain_volume_auto`].
pub const EXACT_MAX_DIMENSION: usize = 6;
/// Largest combined frontier size handled exactly in [`uncertain_volume_auto`].
pub const EXACT_MAX_FRONTIER: usize = 500;
/// Sample count used when [`uncertain_volume_auto`] falls back to Monte Carlo.
pub const AUTO_MC_SAMPLES: u64 = 1_000_000;

/// Lebesgue measure of `∪ [0, x]` over the anchors.
pub fn volume_union_down(anchors: &[UnitPoint]) -> f64 {
    let Some(first) = anchors.first() else {
        return 0.0;
    };
    let d = first.dimension();
    let rows: Vec<&[f64]> = anchors.iter().map(|a| a.coords()).collect();
    union_down(rows, d)
}

/// Lebesgue measure of `∪ [x, 1]` over the anchors.
pub fn volume_union_up(anchors: &[UnitPoint]) -> f64 {
    let reflected: Vec<UnitPoint> = anchors.iter().map(UnitPoint::reflect).collect();
    volume_union_down(&reflected)
}

fn leq_prefix(a: &[f64], b: &[f64], d: usize) -> bool {
    a[..d].iter().zip(&b[..d]).all(|(x, y)| x <= y)
}

/// Union volume of boxes `[0, r[..d]]`.
fn union_down(mut rows: Vec<&[f64]>, d: usize) -> f64 {
    match (rows.len(), d) {
        (0, _) => 0.0,
        (_, 1) => rows.iter().map(|r| r[0]).fold(0.0, f64::max),
        (1, _) => rows[0][..d].iter().product(),
        (_, 2) => union_down_2d(rows),
        _ => {
            let last = d - 1;
            rows.sort_by(|a, b| b[last].total_cmp(&a[last]));
            let mut total = 0.0;
            let mut active: Vec<&[f64]> = Vec::new();
            let mut i = 0;
            while i < rows.len() {
                let level = rows[i][last];
                // merge ties before measuring the slab
                while i < rows.len() && rows[i][last] == level {
                    let r = rows[i];
                    if !active.iter().any(|a| leq_prefix(r, a, last)) {
                        active.retain(|a| !leq_prefix(a, r, last));
                        active.push(r);
                    }
                    i += 1;
                }
                let below = if i < rows.len() { rows[i][last] } else { 0.0 };
                if level > below {
                    total += (level - below) * union_down(active.clone(), last);
                }
            }
            total
        }
    }
}

fn union_down_2d(mut rows: Vec<&[f64]>) -> f64 {
    rows.sort_by(|a, b| b[0].total_cmp(&a[0]));
    let mut area = 0.0;
    let mut height: f64 = 0.0;
    let mut i = 0;
    while i < rows.len() {
        let x = rows[i][0];
        while i < rows.len() && rows[i][0] == x {
            height = height.max(rows[i][1]);
            i += 1;
        }
        let next = if i < rows.len() { rows[i][0] } else { 0.0 };
        area += (x - next) * height;
    }
    area
}

/// Exact volumes of the two certain regions and of the uncertain area.
pub fn uncertain_volume(state: &DesignState) -> Result<VolumeReport> {
    let v_negative = volume_union_down(state.negative_frontier());
    let v_positive = volume_union_up(state.positive_frontier());
    let v_uncertain = 1.0 - v_negative - v_positive;
    if v_uncertain < -1e-12 {
        let point = state
            .negative_frontier()
            .first()
            .cloned()
            .unwrap_or_else(|| UnitPoint::from_unchecked(vec![0.0; state.dimension()]));
        return Err(Error::CorruptState { point });
    }
    Ok(VolumeReport {
        v_negative,
        v_positive,
        v_uncertain: v_uncertain.max(0.0),
        method: VolumeMethod::Exact,
        mc_samples: None,
        mc_stderr: None,
    })
}

/// Fraction of `samples` uniform points whose label is still unknown.
pub fn uncertain_volume_mc(state: &DesignState, samples: u64, seed: u64) -> Result<VolumeReport> {
    if samples == 0 {
        return Err(Error::usage("Monte Carlo volume needs at least one sample"));
    }
    let mut rng = rng::seeded(seed);
    let p = state.dimension();
    let (mut neg, mut pos) = (0u64, 0u64);
    let mut coords = vec![0.0; p];
    for _ in 0..samples {
        for c in coords.iter_mut() {
            *c = rng.gen::<f64>();
        }
        let q = UnitPoint::from_unchecked(coords.clone());
        match state.classify_unchecked(&q)? {
            Certainty::CertainNegative => neg += 1,
            Certainty::CertainPositive => pos += 1,
            Certainty::Unknown => {}
        }
    }
    let n = samples as f64;
    let v_negative = neg as f64 / n;
    let v_positive = pos as f64 / n;
    let v_uncertain = (samples - neg - pos) as f64 / n;
    Ok(VolumeReport {
        v_negative,
        v_positive,
        v_uncertain,
        method: VolumeMethod::MonteCarlo,
        mc_samples: Some(samples),
        mc_stderr: Some((v_uncertain * (1.0 - v_uncertain) / n).sqrt()),
    })
}

/// Counts the cells of side `2^-level` that are entirely certain.
///
/// Exact whenever every frontier coordinate is a multiple of `2^-level`;
/// otherwise it under-counts the certain regions.
pub fn uncertain_volume_cells(state: &DesignState, level: u32) -> Result<VolumeReport> {
    let p = state.dimension();
    let side = 1u64 << level;
    let total = (side as u128).checked_pow(p as u32).filter(|t| *t <= 1 << 26);
    let Some(total) = total else {
        return Err(Error::usage(format!(
            "{side}^{p} cells is too many for the cell count"
        )));
    };
    let h = 1.0 / side as f64;
    let mut index = vec![0u64; p];
    let (mut neg, mut pos) = (0u64, 0u64);
    for _ in 0..total {
        let lower = UnitPoint::from_unchecked(index.iter().map(|&i| i as f64 * h).collect());
        let upper = UnitPoint::from_unchecked(index.iter().map(|&i| (i + 1) as f64 * h).collect());
        if state.negative_frontier().iter().any(|f| upper.leq(f)) {
            neg += 1;
        } else if state.positive_frontier().iter().any(|f| f.leq(&lower)) {
            pos += 1;
        }
        for k in 0..p {
            index[k] += 1;
            if index[k] < side {
                break;
            }
            index[k] = 0;
        }
    }
    let cell = (h).powi(p as i32);
    let v_negative = neg as f64 * cell;
    let v_positive = pos as f64 * cell;
    Ok(VolumeReport {
        v_negative,
        v_positive,
        v_uncertain: (total as u64 - neg - pos) as f64 * cell,
        method: VolumeMethod::DyadicCells,
        mc_samples: None,
        mc_stderr: None,
    })
}

/// Rough operation count of the exact sweep for `n` anchors in dimension `p`.
fn sweep_cost(n: usize, p: usize) -> f64 {
    let n = n.max(2) as f64;
    n.powi(p.saturating_sub(2) as i32) * n.log2()
}

/// Exact volume when the sweep is affordable, Monte Carlo otherwise.
pub fn uncertain_volume_auto(state: &DesignState, seed: u64) -> Result<VolumeReport> {
    let p = state.dimension();
    let n = state.negative_frontier().len() + state.positive_frontier().len();
    let affordable = p <= EXACT_MAX_DIMENSION
        && n <= EXACT_MAX_FRONTIER
        && sweep_cost(state.negative_frontier().len(), p) <= 2e8
        && sweep_cost(state.positive_frontier().len(), p) <= 2e8;
    if affordable {
        uncertain_volume(state)
    } else {
        uncertain_volume_mc(state, AUTO_MC_SAMPLES, seed)
    }
}
