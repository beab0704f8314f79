//! Scenario files: flat TOML with a schema version.
//!
//! ```toml
//! schema_version = 1
//! v_min = 15.0
//! v_max = 35.0
//! v_m = 25.0
//! n_slots = 6
//! d_safe = 50.0
//! r_transit = 80.0
//! patch_length = 420.0          # or d_loiter = ...
//! main_lane_gaps = [25.0, 90.0] # or main_lane_s = [...]
//! departure_time = 12.32        # or phase0 = ...
//! outgoing_slot = 1
//! loiter_slots = [1, 2, 3, 4, 5, 6]
//! ```
//!
//! `main_lane_s` lists distances-to-go at `t = 0`. `main_lane_gaps` instead
//! places UAVs at the moment of departure: the first gap is measured from the
//! patch start `d_p_min`, each next one from the previous UAV.

use std::f64::consts::PI;
use std::path::Path;

use corridor_core::geometry::{build_layout, patch_bounds, patch_length, CorridorParams, LoiterSizing};
use corridor_core::sim::{PathFollower, Scenario};
use corridor_core::{Error as CoreError, SlotRing};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance for `d_loiter` / `patch_length` given together.
pub const SIZING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.into() }
}

impl From<CoreError> for ConfigError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { name, reason } => invalid(name, reason),
            CoreError::InfeasibleSeparation(_) => invalid("patch_length", e.to_string()),
            CoreError::SlotIndex { .. } => invalid("outgoing_slot", e.to_string()),
            CoreError::SlotOccupied(_) | CoreError::SlotEmpty(_) => invalid("loiter_slots", e.to_string()),
            other => invalid("scenario", other.to_string()),
        }
    }
}

fn default_outgoing_slot() -> usize {
    1
}

fn default_dt() -> f64 {
    0.01
}

fn default_max_time() -> f64 {
    60.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub v_min: f64,
    pub v_max: f64,
    pub v_m: f64,
    /// Defaults to `v_m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_s: Option<f64>,
    pub n_slots: usize,
    pub d_safe: f64,
    pub r_transit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_loiter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub departure_time: Option<f64>,
    #[serde(default = "default_outgoing_slot")]
    pub outgoing_slot: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_max_time")]
    pub max_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_slew_limit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub main_lane_s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub main_lane_gaps: Option<Vec<f64>>,
    /// Occupied slots; defaults to just the outgoing one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loiter_slots: Option<Vec<usize>>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

/// Parses, validates and completes a scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg: ScenarioConfig = toml::from_str(text)?;
    cfg.complete()?;
    Ok(cfg)
}

pub fn write_config(cfg: &ScenarioConfig) -> String {
    toml::to_string(cfg).expect("scenario config serializes")
}

impl ScenarioConfig {
    /// Validates the scenario and fills `v_s`, `d_loiter`, `patch_length`
    /// and `loiter_slots`.
    pub fn complete(&mut self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.v_min >= self.v_max {
            return Err(invalid("v_min", format!("v_min {} must be below v_max {}", self.v_min, self.v_max)));
        }
        let v_s = *self.v_s.get_or_insert(self.v_m);

        let sizing = match (self.d_loiter, self.patch_length) {
            (None, None) => return Err(invalid("d_loiter", "one of d_loiter or patch_length is required")),
            (Some(d), None) => LoiterSizing::Separation(d),
            (_, Some(p)) => LoiterSizing::PatchLength(p),
        };
        let params = CorridorParams {
            v_min: self.v_min,
            v_max: self.v_max,
            v_m: self.v_m,
            v_s,
            n_slots: self.n_slots,
            d_safe: self.d_safe,
            r_transit: self.r_transit,
            sizing,
        };
        params.validate()?;
        let r_l = params.r_loiter()?;
        match (self.d_loiter, self.patch_length) {
            (Some(d), Some(p)) => {
                let implied = patch_length(d, self.v_m, self.v_min, self.v_max, self.r_transit, r_l);
                if ((implied - p) / p).abs() > SIZING_TOLERANCE {
                    return Err(invalid(
                        "patch_length",
                        format!("inconsistent with d_loiter {d}: expected {implied}, got {p}"),
                    ));
                }
            }
            (Some(_), None) => self.patch_length = Some(params.patch_length()?),
            (None, Some(_)) => self.d_loiter = Some(params.d_loiter()?),
            (None, None) => unreachable!(),
        }

        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.max_time > 0.0 && self.max_time.is_finite()) {
            return Err(invalid("max_time", "must be positive"));
        }
        if let Some(rate) = self.speed_slew_limit {
            if !(rate > 0.0) {
                return Err(invalid("speed_slew_limit", "must be positive"));
            }
        }
        if self.outgoing_slot == 0 || self.outgoing_slot > self.n_slots {
            return Err(invalid("outgoing_slot", format!("must lie in 1..={}", self.n_slots)));
        }
        let slots = self.loiter_slots.get_or_insert_with(|| vec![self.outgoing_slot]);
        if slots.iter().any(|&s| s == 0 || s > self.n_slots) {
            return Err(invalid("loiter_slots", format!("indices must lie in 1..={}", self.n_slots)));
        }
        let mut sorted = slots.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != slots.len() {
            return Err(invalid("loiter_slots", "duplicate slot"));
        }
        if !slots.contains(&self.outgoing_slot) {
            return Err(invalid("loiter_slots", "must include outgoing_slot"));
        }

        match (&self.phase0, &self.departure_time) {
            (Some(_), Some(_)) => return Err(invalid("phase0", "give phase0 or departure_time, not both")),
            (None, None) => return Err(invalid("departure_time", "one of phase0 or departure_time is required")),
            (Some(p), None) if !p.is_finite() => return Err(invalid("phase0", "must be finite")),
            (None, Some(t)) if !(*t >= 0.0 && t.is_finite()) => {
                return Err(invalid("departure_time", "must be non-negative"))
            }
            _ => {}
        }

        match (&self.main_lane_s, &self.main_lane_gaps) {
            (Some(_), Some(_)) => return Err(invalid("main_lane_s", "give main_lane_s or main_lane_gaps, not both")),
            (Some(s), None) => {
                if s.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("main_lane_s", "positions must be finite"));
                }
                if s.windows(2).any(|w| w[0] > w[1]) {
                    return Err(invalid("main_lane_s", "positions must be sorted ascending"));
                }
            }
            (None, Some(g)) => {
                if g.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                    return Err(invalid("main_lane_gaps", "gaps must be non-negative"));
                }
            }
            (None, None) => self.main_lane_s = Some(Vec::new()),
        }
        Ok(())
    }

    pub fn params(&self) -> CorridorParams<f64> {
        let sizing = match (self.d_loiter, self.patch_length) {
            (_, Some(p)) => LoiterSizing::PatchLength(p),
            (Some(d), None) => LoiterSizing::Separation(d),
            (None, None) => LoiterSizing::PatchLength(f64::NAN),
        };
        CorridorParams {
            v_min: self.v_min,
            v_max: self.v_max,
            v_m: self.v_m,
            v_s: self.v_s.unwrap_or(self.v_m),
            n_slots: self.n_slots,
            d_safe: self.d_safe,
            r_transit: self.r_transit,
            sizing,
        }
    }

    /// Time at which the outgoing slot first reaches the exit point.
    pub fn departure_time(&self) -> Result<f64, ConfigError> {
        let params = self.params();
        if let Some(t) = self.departure_time {
            return Ok(t);
        }
        let ring = SlotRing::new(self.n_slots, params.v_s, params.r_loiter()?, self.phase0.unwrap_or(0.0))?;
        Ok(ring.next_departure_time(self.outgoing_slot, 0.0, PI)?)
    }

    /// Simulation input for a completed config.
    pub fn to_scenario(&self) -> Result<Scenario<f64>, ConfigError> {
        let params = self.params();
        let layout = build_layout(&params)?;
        let r_l = layout.r_loiter;
        let phase0 = match (self.phase0, self.departure_time) {
            (Some(p), _) => p,
            (None, Some(t)) => SlotRing::phase_for_departure(self.n_slots, params.v_s, r_l, self.outgoing_slot, t, PI),
            (None, None) => return Err(invalid("departure_time", "one of phase0 or departure_time is required")),
        };
        let main_lane_s = match (&self.main_lane_s, &self.main_lane_gaps) {
            (Some(s), _) => s.clone(),
            (None, Some(gaps)) => {
                let (d_p_min, _) = patch_bounds(&layout, &params);
                let shift = self.v_m * self.departure_time()?;
                let mut at = d_p_min;
                gaps.iter()
                    .map(|g| {
                        at += g;
                        at + shift
                    })
                    .collect()
            }
            (None, None) => Vec::new(),
        };
        Ok(Scenario {
            params,
            main_lane_s,
            phase0,
            outgoing_slot: self.outgoing_slot,
            loiter_slots: self.loiter_slots.clone().unwrap_or_else(|| vec![self.outgoing_slot]),
            dt: self.dt,
            max_time: self.max_time,
            speed_slew_limit: self.speed_slew_limit,
            follower: PathFollower::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const REFERENCE: &str = r#"
schema_version = 1
v_min = 15.0
v_max = 35.0
v_m = 25.0
n_slots = 6
d_safe = 50.0
r_transit = 80.0
patch_length = 420.0
departure_time = 12.32
"#;

    fn with(extra: &str) -> String {
        format!("{REFERENCE}{extra}\n")
    }

    #[test]
    fn fills_loiter_separation() {
        let cfg = parse_config(REFERENCE).unwrap();
        assert_abs_diff_eq!(cfg.d_loiter.unwrap(), 215.336_293_856_4, epsilon = 1e-9);
        assert_eq!(cfg.v_s, Some(25.0));
        assert_eq!(cfg.loiter_slots, Some(vec![1]));
        assert_eq!(cfg.main_lane_s, Some(vec![]));
    }

    #[test]
    fn rejects_inverted_speed_band() {
        let text = REFERENCE.replace("v_min = 15.0", "v_min = 40.0");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "v_min"), "{err}");
    }

    #[test]
    fn rejects_inconsistent_sizing() {
        let err = parse_config(&with("d_loiter = 215.330")).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "patch_length"), "{err}");
        let ok = parse_config(&with("d_loiter = 215.33629385640825")).unwrap();
        assert_eq!(ok.patch_length, Some(420.0));
    }

    #[test]
    fn separation_only_fills_patch_length() {
        let text = REFERENCE.replace("patch_length = 420.0", "d_loiter = 215.330");
        let cfg = parse_config(&text).unwrap();
        assert_abs_diff_eq!(cfg.patch_length.unwrap(), 419.994, epsilon = 1e-3);
    }

    #[test]
    fn field_level_errors() {
        let cases = [
            ("outgoing_slot = 9", "outgoing_slot"),
            ("loiter_slots = [2, 3]", "loiter_slots"),
            ("loiter_slots = [1, 1]", "loiter_slots"),
            ("phase0 = 0.5", "phase0"),
            ("main_lane_s = [500.0, 400.0]", "main_lane_s"),
            ("main_lane_gaps = [-1.0]", "main_lane_gaps"),
            ("dt = 0.0", "dt"),
        ];
        for (extra, field) in cases {
            match parse_config(&with(extra)) {
                Err(ConfigError::Invalid { field: f, .. }) => assert_eq!(f, field, "{extra}"),
                other => panic!("{extra}: {other:?}"),
            }
        }
        assert!(matches!(parse_config("schema_version = 1\nv_min = "), Err(ConfigError::Parse(_))));
        assert!(matches!(parse_config(&with("unknown_key = 1")), Err(ConfigError::Parse(_))));
        let v2 = REFERENCE.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(parse_config(&v2), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn gaps_are_placed_at_departure() {
        let cfg = parse_config(&with("main_lane_gaps = [25.0, 90.0]")).unwrap();
        let sc = cfg.to_scenario().unwrap();
        let shift = 25.0 * 12.32;
        assert_abs_diff_eq!(sc.main_lane_s[0], 340.0 + shift, epsilon = 1e-6);
        assert_abs_diff_eq!(sc.main_lane_s[1], 430.0 + shift, epsilon = 1e-6);
    }

    #[test]
    fn phase_and_departure_time_agree() {
        let cfg = parse_config(REFERENCE).unwrap();
        let sc = cfg.to_scenario().unwrap();
        let text = REFERENCE.replace("departure_time = 12.32", &format!("phase0 = {}", sc.phase0));
        let by_phase = parse_config(&text).unwrap();
        assert_abs_diff_eq!(by_phase.departure_time().unwrap(), 12.32, epsilon = 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn write_then_parse_round_trips(
            gaps in proptest::collection::vec(0.0f64..200.0, 0..6),
            t_dep in 0.0f64..40.0,
            dt in 0.001f64..0.05,
            slew in proptest::option::of(0.5f64..10.0),
        ) {
            let mut cfg = parse_config(&with("main_lane_gaps = [1.0]")).unwrap();
            cfg.main_lane_gaps = Some(gaps);
            cfg.departure_time = Some(t_dep);
            cfg.dt = dt;
            cfg.speed_slew_limit = slew;
            cfg.loiter_slots = Some(vec![1, 3, 5]);
            let back = parse_config(&write_config(&cfg)).unwrap();
            proptest::prop_assert_eq!(back, cfg);
        }
    }
}
