//! Reinsertion planning: when and where the outgoing UAV joins the main lane,
//! and which speeds everybody flies while it gets there.
//!
//! Main-lane UAVs inside the insertion patch are indexed `1..=m` from the
//! downstream end, so UAV 1 has the smallest distance-to-go. Gap `i` is the
//! distance between UAV `i` and UAV `i + 1`, with gap 0 measured from the
//! patch start `d_p_min` and gap `m` running to the patch end `d_p_max`.

use crate::error::{invalid, Error, Result};
use crate::geometry::CorridorLayout;
use crate::scalar::Scalar;

/// The main-lane speed band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBand<T> {
    pub v_min: T,
    pub v_m: T,
    pub v_max: T,
}

impl<T: Scalar> SpeedBand<T> {
    pub fn contains(&self, v: T) -> bool {
        v >= self.v_min && v <= self.v_max
    }
}

/// Snapshot of the main-lane UAVs inside the insertion patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchState<T> {
    d_p_min: T,
    d_p_max: T,
    s: Vec<T>,
    v: Vec<T>,
    gaps: Vec<T>,
}

impl<T: Scalar> PatchState<T> {
    /// Builds a patch from distances-to-go `s` (any order) and speeds `v`.
    pub fn new(d_p_min: T, d_p_max: T, s: Vec<T>, v: Vec<T>) -> Result<Self> {
        if !(d_p_min <= d_p_max) {
            return Err(Error::InvalidPatch(format!("d_p_min {d_p_min} exceeds d_p_max {d_p_max}")));
        }
        if s.len() != v.len() {
            return Err(Error::InvalidPatch(format!("{} positions but {} speeds", s.len(), v.len())));
        }
        let mut pairs: Vec<(T, T)> = s.into_iter().zip(v).collect();
        if pairs.iter().any(|(s, _)| !s.is_finite()) {
            return Err(Error::InvalidPatch("non-finite position".into()));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        if let (Some(first), Some(last)) = (pairs.first(), pairs.last()) {
            if first.0 < d_p_min || last.0 > d_p_max {
                return Err(Error::InvalidPatch(format!(
                    "positions [{}, {}] outside patch [{d_p_min}, {d_p_max}]",
                    first.0, last.0
                )));
            }
        }
        let (s, v): (Vec<T>, Vec<T>) = pairs.into_iter().unzip();
        let gaps = gaps_of(d_p_min, d_p_max, &s);
        Ok(Self { d_p_min, d_p_max, s, v, gaps })
    }

    /// Builds a patch from its `m + 1` gaps, starting at `d_p_min`. Every UAV
    /// flies `v`.
    pub fn from_gaps(d_p_min: T, gaps: &[T], v: T) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::InvalidPatch("need at least one gap".into()));
        }
        if gaps.iter().any(|g| !(*g >= T::zero())) {
            return Err(Error::InvalidPatch("gaps must be non-negative".into()));
        }
        let mut s = Vec::with_capacity(gaps.len() - 1);
        let mut at = d_p_min;
        for g in &gaps[..gaps.len() - 1] {
            at = at + *g;
            s.push(at);
        }
        let d_p_max = at + gaps[gaps.len() - 1];
        let v = vec![v; s.len()];
        Ok(Self { d_p_min, d_p_max, s, v, gaps: gaps.to_vec() })
    }

    pub fn m(&self) -> usize {
        self.s.len()
    }

    pub fn d_p_min(&self) -> T {
        self.d_p_min
    }

    pub fn d_p_max(&self) -> T {
        self.d_p_max
    }

    /// Distances-to-go, ascending.
    pub fn positions(&self) -> &[T] {
        &self.s
    }

    pub fn speeds(&self) -> &[T] {
        &self.v
    }

    /// All `m + 1` gaps.
    pub fn gaps(&self) -> &[T] {
        &self.gaps
    }

    /// Patch length covered by the gaps.
    pub fn length(&self) -> T {
        self.gaps.iter().fold(T::zero(), |a, g| a + *g)
    }
}

/// Gaps `d[0][1] .. d[m][m+1]` for sorted distances-to-go.
pub fn gaps_of<T: Scalar>(d_p_min: T, d_p_max: T, s: &[T]) -> Vec<T> {
    let mut gaps = Vec::with_capacity(s.len() + 1);
    let mut prev = d_p_min;
    for &x in s {
        gaps.push(x - prev);
        prev = x;
    }
    gaps.push(d_p_max - prev);
    gaps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Loiter,
}

/// The patch can take one more UAV only if `Δd_P >= m·d_s`.
pub fn check_feasibility<T: Scalar>(patch: &PatchState<T>, d_safe: T, patch_length: T) -> Feasibility {
    if patch_length < T::from_count(patch.m()) * d_safe {
        Feasibility::Loiter
    } else {
        Feasibility::Feasible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionCase {
    /// Some gap already admits the outgoing UAV.
    FreeGap,
    /// Main-lane UAVs must open a gap.
    NeedsCooperation,
}

pub fn classify_case<T: Scalar>(patch: &PatchState<T>, d_safe: T) -> InsertionCase {
    let gaps = patch.gaps();
    let m = patch.m();
    let interior_free = (1..m).any(|i| gaps[i] > T::two() * d_safe);
    if interior_free || gaps[0] > d_safe || gaps[m] > d_safe {
        InsertionCase::FreeGap
    } else {
        InsertionCase::NeedsCooperation
    }
}

/// Which rule produced the reinsertion time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanBranch {
    /// Gap 0 is wider than `d_s`; aim at `d_p_min`.
    StripStart,
    /// Interior gap `i` is wider than `2·d_s`; aim at its midpoint.
    Interior(usize),
    /// Gap `m` is wider than `d_s`; aim at `d_p_max`.
    StripEnd,
    /// No gap is wide enough; open one at segment `h`.
    Cooperative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanOutcome<T> {
    Insert {
        /// Time from departure at D to arrival at Q.
        t_out: T,
        /// Distance-to-go (at departure) of the main-lane point to merge beside.
        target_s: T,
        h: Option<usize>,
        branch: PlanBranch,
    },
    Loiter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReinsertionPlan<T> {
    pub outcome: PlanOutcome<T>,
    pub requires_cooperation: bool,
}

impl<T: Scalar> ReinsertionPlan<T> {
    pub fn t_out(&self) -> Option<T> {
        match self.outcome {
            PlanOutcome::Insert { t_out, .. } => Some(t_out),
            PlanOutcome::Loiter => None,
        }
    }

    pub fn h(&self) -> Option<usize> {
        match self.outcome {
            PlanOutcome::Insert { h, .. } => h,
            PlanOutcome::Loiter => None,
        }
    }

    pub fn target_s(&self) -> Option<T> {
        match self.outcome {
            PlanOutcome::Insert { target_s, .. } => Some(target_s),
            PlanOutcome::Loiter => None,
        }
    }
}

/// Chooses the reinsertion time and, when no gap is free, the segment to open.
///
/// Gaps are scanned from the strip start and the first admissible one wins.
/// With no admissible gap the widest gap (lowest index on ties) becomes `h`
/// and the target sits `d_s` ahead of UAVs `h..=m` packed against `d_p_max`,
/// but never ahead of `d_p_min`.
pub fn plan_reinsertion<T: Scalar>(
    patch: &PatchState<T>,
    d_p_min: T,
    d_p_max: T,
    d_safe: T,
    v_m: T,
) -> Result<ReinsertionPlan<T>> {
    if !(d_safe > T::zero()) {
        return Err(invalid("d_safe", "must be positive"));
    }
    if !(v_m > T::zero()) {
        return Err(invalid("v_m", "must be positive"));
    }
    if !(d_p_min <= d_p_max) {
        return Err(Error::InvalidPatch(format!("d_p_min {d_p_min} exceeds d_p_max {d_p_max}")));
    }
    if check_feasibility(patch, d_safe, d_p_max - d_p_min) == Feasibility::Loiter {
        return Ok(ReinsertionPlan { outcome: PlanOutcome::Loiter, requires_cooperation: false });
    }

    let m = patch.m();
    let gaps = patch.gaps();
    let s = patch.positions();
    let insert = |target: T, branch| ReinsertionPlan {
        outcome: PlanOutcome::Insert { t_out: target / v_m, target_s: target, h: None, branch },
        requires_cooperation: false,
    };

    for (i, &gap) in gaps.iter().enumerate() {
        if i == 0 {
            if gap > d_safe {
                return Ok(insert(d_p_min, PlanBranch::StripStart));
            }
        } else if i == m {
            if gap > d_safe {
                return Ok(insert(d_p_max, PlanBranch::StripEnd));
            }
        } else if gap > T::two() * d_safe {
            return Ok(insert((s[i - 1] + s[i]) * T::half(), PlanBranch::Interior(i)));
        }
    }

    let mut h = 0;
    for (i, &gap) in gaps.iter().enumerate() {
        if gap > gaps[h] {
            h = i;
        }
    }
    let target = (d_p_max - T::from_count(m + 1 - h) * d_safe).max(d_p_min);
    Ok(ReinsertionPlan {
        outcome: PlanOutcome::Insert {
            t_out: target / v_m,
            target_s: target,
            h: Some(h),
            branch: PlanBranch::Cooperative,
        },
        requires_cooperation: true,
    })
}

/// Transit speed that brings the outgoing UAV to Q after `t_out`.
pub fn outgoing_speed<T: Scalar>(t_out: T, layout: &CorridorLayout<T>) -> Result<T> {
    if !(t_out > T::zero()) {
        return Err(invalid("t_out", format!("must be positive, got {t_out}")));
    }
    Ok(layout.outgoing_length() / t_out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedCommandSet<T> {
    pub v_out: T,
    /// Speed of main-lane UAV `i` at index `i - 1`.
    pub v_main: Vec<T>,
}

/// Speed of every patch UAV given the current gaps and the chosen segment.
pub fn main_lane_speeds<T: Scalar>(gaps: &[T], h: Option<usize>, d_safe: T, band: &SpeedBand<T>) -> Vec<T> {
    let m = gaps.len() - 1;
    let Some(h) = h else {
        return vec![band.v_m; m];
    };
    (1..=m)
        .map(|i| {
            if i < h && ((i > 1 && gaps[i - 1] > d_safe) || (i == 1 && gaps[0] > T::zero())) {
                band.v_max
            } else if i >= h && ((i < m && gaps[i] > d_safe) || (i == m && gaps[m] > T::zero())) {
                band.v_min
            } else {
                band.v_m
            }
        })
        .collect()
}

/// Outgoing and main-lane speed commands for an insertion plan.
pub fn assign_speeds<T: Scalar>(
    patch: &PatchState<T>,
    plan: &ReinsertionPlan<T>,
    layout: &CorridorLayout<T>,
    d_safe: T,
    band: &SpeedBand<T>,
) -> Result<SpeedCommandSet<T>> {
    let PlanOutcome::Insert { t_out, h, .. } = plan.outcome else {
        return Err(invalid("plan", "cannot assign speeds for a loiter outcome"));
    };
    let raw = outgoing_speed(t_out, layout)?;
    // Endpoint plans land on the band limits up to rounding.
    let slack = T::lit(1e-9) * band.v_max;
    if raw < band.v_min - slack || raw > band.v_max + slack {
        return Err(Error::SpeedOutOfRange {
            v: raw.to_f64().unwrap_or(f64::NAN),
            v_min: band.v_min.to_f64().unwrap_or(f64::NAN),
            v_max: band.v_max.to_f64().unwrap_or(f64::NAN),
        });
    }
    let v_out = raw.max(band.v_min).min(band.v_max);
    Ok(SpeedCommandSet { v_out, v_main: main_lane_speeds(patch.gaps(), h, d_safe, band) })
}
