//! Fixed-step kinematic simulation of a corridor reinsertion.
//!
//! Every UAV is a variable-speed unicycle (`ẋ = V cos θ`, `ẏ = V sin θ`,
//! `a = V θ̇`) integrated with classical RK4. Lateral acceleration comes from
//! a path follower; speed is a direct input. Steps are split at the departure,
//! transit-link and merge instants so those events land exactly.

use crate::error::{invalid, Error, Result};
use crate::geometry::{build_layout, CorridorLayout, CorridorParams, Path, Vec2};
use crate::guidance::{
    assign_speeds, gaps_of, main_lane_speeds, plan_reinsertion, PatchState, PlanOutcome, ReinsertionPlan, SpeedBand,
};
use crate::scalar::{wrap_pi, Scalar};
use crate::slots::{SlotRing, UavId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lane {
    Main,
    Loiter,
    OutgoingTransit,
}

impl Lane {
    pub fn as_str(self) -> &'static str {
        match self {
            Lane::Main => "main",
            Lane::Loiter => "loiter",
            Lane::OutgoingTransit => "outgoing-transit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState<T> {
    pub x: T,
    pub y: T,
    /// Flight path angle, in `(-π, π]`.
    pub theta: T,
    pub v: T,
    pub lane: Lane,
    /// Arc length flown along the current lane's path.
    pub path_s: T,
}

impl<T: Scalar> UavState<T> {
    pub fn position(&self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceCommand<T> {
    pub v_cmd: T,
    /// Lateral acceleration, positive turning left.
    pub a_cmd: T,
}

/// Speed-limited unicycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unicycle<T> {
    pub v_min: T,
    pub v_max: T,
}

fn rk4<T: Scalar, const N: usize>(y: [T; N], h: T, f: impl Fn([T; N]) -> [T; N]) -> [T; N] {
    let axpy = |a: [T; N], k: [T; N], s: T| -> [T; N] { std::array::from_fn(|i| a[i] + k[i] * s) };
    let half = h * T::half();
    let k1 = f(y);
    let k2 = f(axpy(y, k1, half));
    let k3 = f(axpy(y, k2, half));
    let k4 = f(axpy(y, k3, h));
    let sixth = h / T::lit(6.0);
    std::array::from_fn(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * T::two() + k4[i]) * sixth)
}

impl<T: Scalar> Unicycle<T> {
    /// Advances `state` by `dt` holding `cmd`. The speed jumps to `v_cmd`.
    pub fn step(&self, state: &UavState<T>, cmd: GuidanceCommand<T>, dt: T) -> Result<UavState<T>> {
        if !(dt >= T::zero()) {
            return Err(invalid("dt", format!("must be non-negative, got {dt}")));
        }
        if !(cmd.v_cmd >= self.v_min && cmd.v_cmd <= self.v_max) {
            return Err(Error::SpeedOutOfRange {
                v: cmd.v_cmd.to_f64().unwrap_or(f64::NAN),
                v_min: self.v_min.to_f64().unwrap_or(f64::NAN),
                v_max: self.v_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        if dt == T::zero() {
            return Ok(*state);
        }
        let v = cmd.v_cmd;
        let turn_rate = cmd.a_cmd / v;
        let [x, y, theta] =
            rk4([state.x, state.y, state.theta], dt, |[_, _, th]| [v * th.cos(), v * th.sin(), turn_rate]);
        Ok(UavState { x, y, theta: wrap_pi(theta), v, lane: state.lane, path_s: state.path_s + v * dt })
    }
}

/// Curvature feedforward plus second-order heading / cross-track feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathFollower<T> {
    /// Natural frequency of the lateral error dynamics (rad/s).
    pub natural_frequency: T,
    pub damping: T,
}

impl<T: Scalar> Default for PathFollower<T> {
    fn default() -> Self {
        Self { natural_frequency: T::one(), damping: T::one() }
    }
}

/// Signed lateral offset (positive left of the path) and heading error.
pub fn tracking_error<T: Scalar>(state: &UavState<T>, path: &Path<T>) -> (T, T) {
    let sample = reference_sample(state, path);
    let offset = state.position() - sample.position;
    let lateral = sample.tangent.cross(offset);
    let heading = wrap_pi(state.theta - sample.tangent.angle());
    (lateral, heading)
}

fn reference_sample<T: Scalar>(state: &UavState<T>, path: &Path<T>) -> crate::geometry::PathSample<T> {
    let s = if path.is_closed() { state.path_s } else { state.path_s.max(T::zero()).min(path.length()) };
    path.point_at(s).expect("clamped arc length")
}

impl<T: Scalar> PathFollower<T> {
    pub fn follow_path(&self, state: &UavState<T>, path: &Path<T>, v_cmd: T) -> GuidanceCommand<T> {
        let sample = reference_sample(state, path);
        let (lateral, heading) = tracking_error(state, path);
        let wn = self.natural_frequency;
        let a_cmd =
            v_cmd * v_cmd * sample.curvature - T::two() * self.damping * wn * v_cmd * heading - wn * wn * lateral;
        GuidanceCommand { v_cmd, a_cmd }
    }
}

/// Running separation statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyReport<T> {
    pub d_safe: T,
    pub min_separation: T,
    /// Pair and time of the overall minimum.
    pub closest_pair: Option<(UavId, UavId, T)>,
    /// First pair and time seen closer than `d_safe`.
    pub violating_pair: Option<(UavId, UavId, T)>,
    /// `(t, minimum pairwise distance at t)` per observed step.
    pub series: Vec<(T, T)>,
}

impl<T: Scalar> SafetyReport<T> {
    pub fn new(d_safe: T) -> Self {
        Self { d_safe, min_separation: T::infinity(), closest_pair: None, violating_pair: None, series: Vec::new() }
    }

    /// Folds one time step of positions into the report.
    pub fn observe(&mut self, t: T, uavs: &[(UavId, Vec2<T>)]) {
        let mut step_min = T::infinity();
        for (i, (a, pa)) in uavs.iter().enumerate() {
            for (b, pb) in &uavs[i + 1..] {
                let d = pa.distance(*pb);
                if d < step_min {
                    step_min = d;
                }
                if d < self.min_separation {
                    self.min_separation = d;
                    self.closest_pair = Some((*a, *b, t));
                }
                if d < self.d_safe && self.violating_pair.is_none() {
                    self.violating_pair = Some((*a, *b, t));
                }
            }
        }
        self.series.push((t, step_min));
    }

    pub fn is_safe(&self) -> bool {
        self.violating_pair.is_none()
    }
}

/// One-shot separation check over a set of positions.
pub fn monitor_safety<T: Scalar>(t: T, uavs: &[(UavId, Vec2<T>)], d_safe: T) -> SafetyReport<T> {
    let mut report = SafetyReport::new(d_safe);
    report.observe(t, uavs);
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    SlotDepartureAtD,
    PlanComputed,
    CooperationStarted,
    EnterTransitLink,
    MergedAtQ,
    SpeedsRestored,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::SlotDepartureAtD => "slot-departure-at-D",
            EventKind::PlanComputed => "plan-computed",
            EventKind::CooperationStarted => "cooperation-started",
            EventKind::EnterTransitLink => "enter-transit-link",
            EventKind::MergedAtQ => "merged-at-Q",
            EventKind::SpeedsRestored => "speeds-restored",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent<T> {
    pub time: T,
    pub kind: EventKind,
    pub uav: Option<UavId>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub t: T,
    pub uav: UavId,
    pub x: T,
    pub y: T,
    pub theta: T,
    pub v: T,
    pub a: T,
    pub lane: Lane,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UavInfo {
    pub id: UavId,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioOutcome {
    Merged,
    LoiterContinues,
    /// `max_time` ran out before the merge.
    Incomplete,
}

impl ScenarioOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioOutcome::Merged => "merged",
            ScenarioOutcome::LoiterContinues => "loiter-continues",
            ScenarioOutcome::Incomplete => "incomplete",
        }
    }
}

/// Main-lane clearance around the merge point at the merge instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeClearance<T> {
    /// Distance to the nearest main-lane UAV at or past Q.
    pub ahead: Option<T>,
    /// Distance to the nearest main-lane UAV still upstream of Q.
    pub behind: Option<T>,
}

impl<T: Scalar> MergeClearance<T> {
    /// Length of the main-lane gap containing the merge point.
    pub fn gap(&self) -> T {
        self.ahead.unwrap_or(T::infinity()) + self.behind.unwrap_or(T::infinity())
    }
}

/// Inputs of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub params: CorridorParams<T>,
    /// Main-lane distances-to-go at `t = 0`.
    pub main_lane_s: Vec<T>,
    /// Angular position of slot 1 at `t = 0`.
    pub phase0: T,
    pub outgoing_slot: usize,
    /// Occupied slots, including the outgoing one.
    pub loiter_slots: Vec<usize>,
    pub dt: T,
    pub max_time: T,
    /// Optional speed slew limit (m/s²). Off when `None`.
    pub speed_slew_limit: Option<T>,
    pub follower: PathFollower<T>,
}

impl<T: Scalar> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > T::zero()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.max_time > T::zero()) {
            return Err(invalid("max_time", "must be positive"));
        }
        if self.outgoing_slot == 0 || self.outgoing_slot > self.params.n_slots {
            return Err(Error::SlotIndex { index: self.outgoing_slot, n_slots: self.params.n_slots });
        }
        if !self.loiter_slots.contains(&self.outgoing_slot) {
            return Err(invalid("loiter_slots", "must contain the outgoing slot"));
        }
        if self.main_lane_s.iter().any(|s| !s.is_finite()) {
            return Err(invalid("main_lane_s", "positions must be finite"));
        }
        if let Some(rate) = self.speed_slew_limit {
            if !(rate > T::zero()) {
                return Err(invalid("speed_slew_limit", "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun<T> {
    pub layout: CorridorLayout<T>,
    pub d_p_min: T,
    pub d_p_max: T,
    pub outgoing: UavId,
    pub uavs: Vec<UavInfo>,
    pub outcome: ScenarioOutcome,
    pub departure_time: Option<T>,
    pub plan: Option<ReinsertionPlan<T>>,
    pub v_out: Option<T>,
    pub merge_time: Option<T>,
    pub merge_clearance: Option<MergeClearance<T>>,
    /// Largest |cross-track| of the outgoing UAV along D → F → Q.
    pub max_cross_track: T,
    /// Largest distance between a loitering UAV and its slot.
    pub max_slot_deviation: T,
    pub trajectory: Vec<TrajectoryRecord<T>>,
    pub events: Vec<SimEvent<T>>,
    pub safety: SafetyReport<T>,
}

impl<T: Scalar> ScenarioRun<T> {
    pub fn label(&self, id: UavId) -> &str {
        self.uavs.iter().find(|u| u.id == id).map(|u| u.label.as_str()).unwrap_or("?")
    }

    pub fn event(&self, kind: EventKind) -> Option<&SimEvent<T>> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

const LOITER_ID_BASE: UavId = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Main,
    Loiter(usize),
    Outgoing,
}

#[derive(Debug, Clone)]
struct Agent<T> {
    id: UavId,
    state: UavState<T>,
    role: Role,
    cmd: GuidanceCommand<T>,
}

#[derive(Debug, Clone)]
struct Insertion<T> {
    t_dep: T,
    v_out: T,
    h: Option<usize>,
    /// Agent indices of patch members, most downstream first.
    members: Vec<usize>,
    d_p_min: T,
    d_p_max: T,
}

#[derive(Debug, Clone)]
enum Phase<T> {
    Loitering { t_dep: T },
    Transit(Insertion<T>),
    Merged,
    LoiterContinues,
}

struct Engine<'a, T> {
    sc: &'a Scenario<T>,
    layout: CorridorLayout<T>,
    lane_path: Path<T>,
    lane_start: T,
    ring: SlotRing<T>,
    model: Unicycle<T>,
    band: SpeedBand<T>,
    d_p_min: T,
    d_p_max: T,
    agents: Vec<Agent<T>>,
    outgoing: usize,
    phase: Phase<T>,
    run_events: Vec<SimEvent<T>>,
    plan: Option<ReinsertionPlan<T>>,
    v_out: Option<T>,
    merge_time: Option<T>,
    merge_clearance: Option<MergeClearance<T>>,
    max_cross_track: T,
    max_slot_deviation: T,
    last_command_time: T,
}

impl<'a, T: Scalar> Engine<'a, T> {
    fn new(sc: &'a Scenario<T>) -> Result<Self> {
        sc.validate()?;
        let params = &sc.params;
        let layout = build_layout(params)?;
        let (d_p_min, d_p_max) = crate::geometry::patch_bounds(&layout, params);
        let ring_r = layout.r_loiter;
        let mut ring = SlotRing::new(params.n_slots, params.v_s, ring_r, sc.phase0)?;

        let mut main_s = sc.main_lane_s.clone();
        main_s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let far_ahead = params.v_max * sc.max_time + T::lit(1000.0);
        let lane_start = main_s.last().copied().unwrap_or(T::zero()).max(d_p_max) + T::lit(1000.0);
        let lane_path = layout.main_lane.as_path(lane_start, far_ahead + lane_start);

        let mut agents = Vec::new();
        for (k, &s) in main_s.iter().enumerate() {
            let p = layout.main_lane.position(s);
            agents.push(Agent {
                id: k as UavId + 1,
                state: UavState {
                    x: p.x,
                    y: p.y,
                    theta: layout.main_lane.heading(),
                    v: params.v_m,
                    lane: Lane::Main,
                    path_s: lane_start - s,
                },
                role: Role::Main,
                cmd: GuidanceCommand { v_cmd: params.v_m, a_cmd: T::zero() },
            });
        }
        let mut slots = sc.loiter_slots.clone();
        slots.sort_unstable();
        slots.dedup();
        if slots.len() != sc.loiter_slots.len() {
            return Err(invalid("loiter_slots", "duplicate slot index"));
        }
        let mut outgoing = usize::MAX;
        for slot in slots {
            let id = LOITER_ID_BASE + slot as UavId;
            ring.occupy(slot, id)?;
            let angle = ring.slot_angle(slot, T::zero())?;
            let p = layout.loiter_position(angle);
            if slot == sc.outgoing_slot {
                outgoing = agents.len();
            }
            agents.push(Agent {
                id,
                state: UavState {
                    x: p.x,
                    y: p.y,
                    theta: wrap_pi(angle + T::FRAC_PI_2()),
                    v: params.v_s,
                    lane: Lane::Loiter,
                    path_s: angle * ring_r,
                },
                role: if slot == sc.outgoing_slot { Role::Outgoing } else { Role::Loiter(slot) },
                cmd: GuidanceCommand { v_cmd: params.v_s, a_cmd: T::zero() },
            });
        }
        let t_dep = ring.next_departure_time(sc.outgoing_slot, T::zero(), layout.exit_angle())?;

        Ok(Self {
            sc,
            lane_path,
            lane_start,
            ring,
            model: Unicycle { v_min: params.v_min, v_max: params.v_max },
            band: SpeedBand { v_min: params.v_min, v_m: params.v_m, v_max: params.v_max },
            d_p_min,
            d_p_max,
            agents,
            outgoing,
            phase: Phase::Loitering { t_dep },
            run_events: Vec::new(),
            plan: None,
            v_out: None,
            merge_time: None,
            merge_clearance: None,
            max_cross_track: T::zero(),
            max_slot_deviation: T::zero(),
            last_command_time: T::zero(),
            layout,
        })
    }

    fn path_for(&self, agent: &Agent<T>) -> &Path<T> {
        match agent.state.lane {
            Lane::Main => &self.lane_path,
            Lane::Loiter => &self.layout.loiter_circle,
            Lane::OutgoingTransit => &self.layout.outgoing_path,
        }
    }

    fn distance_to_go(&self, idx: usize) -> T {
        self.layout.main_lane.distance_to_go(self.agents[idx].state.position())
    }

    fn target_speeds(&self, t: T) -> Vec<T> {
        let p = &self.sc.params;
        let mut speeds: Vec<T> = self
            .agents
            .iter()
            .map(|a| match a.state.lane {
                Lane::Loiter => p.v_s,
                Lane::Main | Lane::OutgoingTransit => p.v_m,
            })
            .collect();
        if let Phase::Transit(ins) = &self.phase {
            speeds[self.outgoing] = ins.v_out;
            if ins.h.is_some() {
                let shift = p.v_m * (t - ins.t_dep);
                let s: Vec<T> = ins.members.iter().map(|&k| self.distance_to_go(k)).collect();
                let gaps = gaps_of(ins.d_p_min - shift, ins.d_p_max - shift, &s);
                let v = main_lane_speeds(&gaps, ins.h, p.d_safe, &self.band);
                for (&k, v) in ins.members.iter().zip(v) {
                    speeds[k] = v;
                }
            }
        }
        speeds
    }

    /// Refreshes every agent's command at time `t`.
    fn update_commands(&mut self, t: T) {
        let speeds = self.target_speeds(t);
        let elapsed = t - self.last_command_time;
        self.last_command_time = t;
        let follower = self.sc.follower;
        for (k, v_target) in speeds.into_iter().enumerate() {
            let agent = &self.agents[k];
            let v = match self.sc.speed_slew_limit {
                Some(rate) => {
                    let dv_max = rate * elapsed;
                    let dv = (v_target - agent.state.v).max(-dv_max).min(dv_max);
                    agent.state.v + dv
                }
                None => v_target,
            };
            let cmd = follower.follow_path(&agent.state, self.path_for(agent), v);
            let agent = &mut self.agents[k];
            agent.state.v = v;
            agent.cmd = cmd;
        }
    }

    fn integrate(&mut self, h: T) -> Result<()> {
        for agent in &mut self.agents {
            agent.state = self.model.step(&agent.state, agent.cmd, h)?;
        }
        Ok(())
    }

    fn push_event(&mut self, time: T, kind: EventKind, uav: Option<UavId>, detail: String) {
        self.run_events.push(SimEvent { time, kind, uav, detail });
    }

    /// Time of the next scheduled event strictly after `t`, if any.
    fn next_event_time(&self, t: T) -> Option<T> {
        match &self.phase {
            Phase::Loitering { t_dep } => Some(*t_dep),
            Phase::Transit(_) => {
                let st = &self.agents[self.outgoing].state;
                let marks = [self.layout.transit_lane_length(), self.layout.outgoing_length()];
                marks.into_iter().find(|m| st.path_s < *m).map(|m| t + (m - st.path_s) / st.v)
            }
            Phase::Merged | Phase::LoiterContinues => None,
        }
    }

    fn fire_due_events(&mut self, t: T) -> Result<()> {
        loop {
            match &self.phase {
                Phase::Loitering { t_dep } if *t_dep <= t => self.depart(t)?,
                Phase::Transit(_) => {
                    let st = self.agents[self.outgoing].state;
                    let eps = T::lit(1e-9);
                    let lane_len = self.layout.transit_lane_length();
                    let out_len = self.layout.outgoing_length();
                    let id = self.agents[self.outgoing].id;
                    if st.path_s + eps >= lane_len && self.event_count(EventKind::EnterTransitLink) == 0 {
                        self.push_event(t, EventKind::EnterTransitLink, Some(id), String::new());
                        continue;
                    }
                    if st.path_s + eps >= out_len {
                        self.merge(t);
                        continue;
                    }
                    return Ok(());
                }
                _ => return Ok(()),
            }
        }
    }

    fn event_count(&self, kind: EventKind) -> usize {
        self.run_events.iter().filter(|e| e.kind == kind).count()
    }

    fn depart(&mut self, t: T) -> Result<()> {
        let p = self.sc.params;
        let out = self.outgoing;
        let out_id = self.agents[out].id;
        self.push_event(t, EventKind::SlotDepartureAtD, Some(out_id), format!("slot={}", self.sc.outgoing_slot));

        let mut members: Vec<(T, usize)> = self
            .agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.state.lane == Lane::Main)
            .map(|(k, _)| (self.distance_to_go(k), k))
            .filter(|(s, _)| *s >= self.d_p_min && *s <= self.d_p_max)
            .collect();
        members.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let patch = PatchState::new(
            self.d_p_min,
            self.d_p_max,
            members.iter().map(|m| m.0).collect(),
            members.iter().map(|m| self.agents[m.1].state.v).collect(),
        )?;
        let plan = plan_reinsertion(&patch, self.d_p_min, self.d_p_max, p.d_safe, p.v_m)?;
        self.plan = Some(plan);

        match plan.outcome {
            PlanOutcome::Loiter => {
                self.push_event(t, EventKind::PlanComputed, Some(out_id), format!("outcome=loiter m={}", patch.m()));
                self.phase = Phase::LoiterContinues;
                self.agents[out].role = Role::Loiter(self.sc.outgoing_slot);
            }
            PlanOutcome::Insert { t_out, target_s, h, .. } => {
                let cmds = assign_speeds(&patch, &plan, &self.layout, p.d_safe, &self.band)?;
                let h_text = h.map_or_else(|| "none".to_string(), |h| h.to_string());
                self.push_event(
                    t,
                    EventKind::PlanComputed,
                    Some(out_id),
                    format!("m={} t_out={t_out} target_s={target_s} h={h_text} v_out={}", patch.m(), cmds.v_out),
                );
                if let Some(h) = h {
                    self.push_event(t, EventKind::CooperationStarted, None, format!("h={h}"));
                }
                self.v_out = Some(cmds.v_out);
                self.ring.release(self.sc.outgoing_slot)?;
                let st = &mut self.agents[out].state;
                st.lane = Lane::OutgoingTransit;
                st.path_s = T::zero();
                self.phase = Phase::Transit(Insertion {
                    t_dep: t,
                    v_out: cmds.v_out,
                    h,
                    members: members.into_iter().map(|m| m.1).collect(),
                    d_p_min: self.d_p_min,
                    d_p_max: self.d_p_max,
                });
            }
        }
        Ok(())
    }

    fn merge(&mut self, t: T) {
        let out = self.outgoing;
        let id = self.agents[out].id;
        let q = self.layout.point_q;
        let miss = self.agents[out].state.position().distance(q);
        self.push_event(t, EventKind::MergedAtQ, Some(id), format!("offset={miss}"));

        let mut ahead: Option<T> = None;
        let mut behind: Option<T> = None;
        for k in 0..self.agents.len() {
            if k == out || self.agents[k].state.lane != Lane::Main {
                continue;
            }
            let s = self.distance_to_go(k);
            if s > T::zero() {
                behind = Some(behind.map_or(s, |b| b.min(s)));
            } else {
                ahead = Some(ahead.map_or(-s, |a| a.min(-s)));
            }
        }
        self.merge_clearance = Some(MergeClearance { ahead, behind });

        let s_here = self.distance_to_go(out);
        let st = &mut self.agents[out].state;
        st.lane = Lane::Main;
        st.path_s = self.lane_start - s_here;
        self.merge_time = Some(t);
        self.phase = Phase::Merged;
        self.push_event(t, EventKind::SpeedsRestored, None, String::new());
    }

    fn observe(&mut self, t: T, records: &mut Vec<TrajectoryRecord<T>>, safety: &mut SafetyReport<T>) -> Result<()> {
        let positions: Vec<(UavId, Vec2<T>)> = self.agents.iter().map(|a| (a.id, a.state.position())).collect();
        safety.observe(t, &positions);
        for agent in &self.agents {
            let st = &agent.state;
            records.push(TrajectoryRecord {
                t,
                uav: agent.id,
                x: st.x,
                y: st.y,
                theta: st.theta,
                v: st.v,
                a: agent.cmd.a_cmd,
                lane: st.lane,
            });
            match (agent.role, st.lane) {
                (_, Lane::OutgoingTransit) => {
                    let (lateral, _) = tracking_error(st, &self.layout.outgoing_path);
                    self.max_cross_track = self.max_cross_track.max(lateral.abs());
                }
                (role, Lane::Loiter) => {
                    let slot = if let Role::Loiter(s) = role { s } else { self.sc.outgoing_slot };
                    let ideal = self.ring.slot_position(slot, t)?;
                    self.max_slot_deviation = self.max_slot_deviation.max(st.position().distance(ideal));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Runs a scenario to `max_time`.
pub fn run_scenario<T: Scalar>(scenario: &Scenario<T>) -> Result<ScenarioRun<T>> {
    let mut eng = Engine::new(scenario)?;
    let dt = scenario.dt;
    let n_steps = (scenario.max_time / dt).round().to_usize().unwrap_or(0);
    let mut records = Vec::with_capacity((n_steps + 1) * eng.agents.len());
    let mut safety = SafetyReport::new(scenario.params.d_safe);
    let departure_time = match eng.phase {
        Phase::Loitering { t_dep } => t_dep,
        _ => unreachable!(),
    };

    for k in 0..=n_steps {
        let t_k = T::from_count(k) * dt;
        eng.fire_due_events(t_k)?;
        eng.update_commands(t_k);
        eng.observe(t_k, &mut records, &mut safety)?;
        if k == n_steps {
            break;
        }
        let t_next = T::from_count(k + 1) * dt;
        let mut t = t_k;
        loop {
            let stop = match eng.next_event_time(t) {
                Some(te) if te > t && te < t_next => te,
                _ => t_next,
            };
            eng.integrate(stop - t)?;
            t = stop;
            if t >= t_next {
                break;
            }
            eng.fire_due_events(t)?;
            eng.update_commands(t);
        }
    }

    let outcome = match eng.phase {
        Phase::Merged => ScenarioOutcome::Merged,
        Phase::LoiterContinues => ScenarioOutcome::LoiterContinues,
        _ => ScenarioOutcome::Incomplete,
    };
    let uavs = eng
        .agents
        .iter()
        .map(|a| UavInfo {
            id: a.id,
            label: if a.id >= LOITER_ID_BASE { format!("L{}", a.id - LOITER_ID_BASE) } else { format!("M{}", a.id) },
        })
        .collect();
    let departed = eng.run_events.iter().any(|e| e.kind == EventKind::SlotDepartureAtD);
    Ok(ScenarioRun {
        d_p_min: eng.d_p_min,
        d_p_max: eng.d_p_max,
        outgoing: eng.agents[eng.outgoing].id,
        uavs,
        outcome,
        departure_time: departed.then_some(departure_time),
        plan: eng.plan,
        v_out: eng.v_out,
        merge_time: eng.merge_time,
        merge_clearance: eng.merge_clearance,
        max_cross_track: eng.max_cross_track,
        max_slot_deviation: eng.max_slot_deviation,
        trajectory: records,
        events: eng.run_events,
        safety,
        layout: eng.layout,
    })
}
