//! Corridor layout and closed-form design relations.
//!
//! The frame is Earth-fixed with its origin at the loiter centre `O`. The
//! loiter circle is flown counterclockwise; the outgoing UAV leaves it at
//! `D = (-R_L, 0)` heading `-y`, flies the straight transit lane to `F`, then
//! a quarter-circle transit link (centre `A`, radius `R_T`) to `Q`, where it
//! joins the main lane flying `+x`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Planar vector / point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector at `angle` from `+x`.
    pub fn from_angle(angle: T) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    /// Rotates by +90°.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// How the loiter lane is sized: either its separation `d_L` directly, or the
/// main-lane patch length it must provide. Each determines the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoiterSizing<T> {
    Separation(T),
    PatchLength(T),
}

/// Corridor design inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorridorParams<T> {
    pub v_min: T,
    pub v_max: T,
    /// Nominal main-lane speed.
    pub v_m: T,
    /// Virtual slot speed on the loiter circle.
    pub v_s: T,
    pub n_slots: usize,
    pub d_safe: T,
    pub r_transit: T,
    pub sizing: LoiterSizing<T>,
}

impl<T: Scalar> CorridorParams<T> {
    /// Reference corridor: 6 slots, 50 m separation, 15–35 m/s speed band,
    /// 25 m/s nominal speed, 80 m transit link, 420 m insertion patch.
    pub fn reference() -> Self {
        Self {
            v_min: T::lit(15.0),
            v_max: T::lit(35.0),
            v_m: T::lit(25.0),
            v_s: T::lit(25.0),
            n_slots: 6,
            d_safe: T::lit(50.0),
            r_transit: T::lit(80.0),
            sizing: LoiterSizing::PatchLength(T::lit(420.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("v_min", self.v_min)?;
        positive("v_max", self.v_max)?;
        positive("v_m", self.v_m)?;
        positive("v_s", self.v_s)?;
        positive("d_safe", self.d_safe)?;
        positive("r_transit", self.r_transit)?;
        if self.v_min >= self.v_max {
            return Err(invalid("v_min", format!("must be below v_max ({} >= {})", self.v_min, self.v_max)));
        }
        let in_band = |v: T| v >= self.v_min && v <= self.v_max;
        if !in_band(self.v_m) {
            return Err(invalid("v_m", format!("{} outside [{}, {}]", self.v_m, self.v_min, self.v_max)));
        }
        if !in_band(self.v_s) {
            return Err(invalid("v_s", format!("{} outside [{}, {}]", self.v_s, self.v_min, self.v_max)));
        }
        if self.n_slots < 2 {
            return Err(invalid("n_slots", format!("need at least 2 slots, got {}", self.n_slots)));
        }
        match self.sizing {
            LoiterSizing::Separation(d) => positive("d_loiter", d)?,
            LoiterSizing::PatchLength(p) => positive("patch_length", p)?,
        }
        self.d_loiter().map(|_| ())
    }

    pub fn r_loiter(&self) -> Result<T> {
        loiter_radius(self.n_slots, self.d_safe)
    }

    /// Loiter separation `d_L`, derived from the patch length when needed.
    pub fn d_loiter(&self) -> Result<T> {
        match self.sizing {
            LoiterSizing::Separation(d) => {
                if d > T::zero() {
                    Ok(d)
                } else {
                    Err(Error::InfeasibleSeparation(d.to_f64().unwrap_or(f64::NAN)))
                }
            }
            LoiterSizing::PatchLength(p) => {
                loiter_separation(p, self.v_m, self.v_min, self.v_max, self.r_transit, self.r_loiter()?)
            }
        }
    }

    /// Patch length `Δd_P`, derived from the loiter separation when needed.
    pub fn patch_length(&self) -> Result<T> {
        match self.sizing {
            LoiterSizing::PatchLength(p) => Ok(p),
            LoiterSizing::Separation(d) => {
                Ok(patch_length(d, self.v_m, self.v_min, self.v_max, self.r_transit, self.r_loiter()?))
            }
        }
    }

    /// Length of the outgoing path D → F → Q.
    pub fn outgoing_length(&self) -> Result<T> {
        Ok(outgoing_length(self.r_transit, self.d_loiter()?, self.r_loiter()?))
    }
}

/// Loiter radius that fits `n_slots` equiangular slots at `d_safe`:
/// `R_L = d_s / (2 sin²(π/N))`.
pub fn loiter_radius<T: Scalar>(n_slots: usize, d_safe: T) -> Result<T> {
    if n_slots < 2 {
        return Err(invalid("n_slots", format!("need at least 2 slots, got {n_slots}")));
    }
    if !(d_safe > T::zero()) {
        return Err(invalid("d_safe", format!("must be positive, got {d_safe}")));
    }
    let s = (T::PI() / T::from_count(n_slots)).sin();
    Ok(d_safe / (T::two() * s * s))
}

/// `πR_T/2 + d_L + R_L`.
pub fn outgoing_length<T: Scalar>(r_transit: T, d_loiter: T, r_loiter: T) -> T {
    T::FRAC_PI_2() * r_transit + d_loiter + r_loiter
}

fn band_factor<T: Scalar>(v_m: T, v_min: T, v_max: T) -> T {
    v_m * (v_min.recip() - v_max.recip())
}

/// Loiter separation `d_L` that yields an insertion patch of `patch_length`.
pub fn loiter_separation<T: Scalar>(
    patch_length: T,
    v_m: T,
    v_min: T,
    v_max: T,
    r_transit: T,
    r_loiter: T,
) -> Result<T> {
    for (name, v) in [
        ("patch_length", patch_length),
        ("v_m", v_m),
        ("v_min", v_min),
        ("v_max", v_max),
        ("r_transit", r_transit),
        ("r_loiter", r_loiter),
    ] {
        if !(v > T::zero()) {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    if v_min >= v_max {
        return Err(invalid("v_min", "must be below v_max"));
    }
    let d = patch_length / band_factor(v_m, v_min, v_max) - T::FRAC_PI_2() * r_transit - r_loiter;
    if d > T::zero() {
        Ok(d)
    } else {
        Err(Error::InfeasibleSeparation(d.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Patch length `Δd_P` produced by a loiter separation `d_loiter`.
pub fn patch_length<T: Scalar>(d_loiter: T, v_m: T, v_min: T, v_max: T, r_transit: T, r_loiter: T) -> T {
    band_factor(v_m, v_min, v_max) * outgoing_length(r_transit, d_loiter, r_loiter)
}

/// `(d_p_min, d_p_max)` for an outgoing path of length `out_length`.
pub fn patch_bounds_for_length<T: Scalar>(out_length: T, v_m: T, v_min: T, v_max: T) -> (T, T) {
    (v_m / v_max * out_length, v_m / v_min * out_length)
}

/// Main-lane distance-to-go interval reachable by the outgoing UAV.
pub fn patch_bounds<T: Scalar>(layout: &CorridorLayout<T>, params: &CorridorParams<T>) -> (T, T) {
    patch_bounds_for_length(layout.outgoing_length(), params.v_m, params.v_min, params.v_max)
}

/// Position, unit tangent and signed curvature at a point of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample<T> {
    pub position: Vec2<T>,
    pub tangent: Vec2<T>,
    pub curvature: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathPrimitive<T> {
    Segment {
        start: Vec2<T>,
        end: Vec2<T>,
    },
    /// Positive `sweep` turns left (counterclockwise).
    Arc {
        center: Vec2<T>,
        radius: T,
        start_angle: T,
        sweep: T,
    },
}

impl<T: Scalar> PathPrimitive<T> {
    pub fn length(&self) -> T {
        match *self {
            Self::Segment { start, end } => start.distance(end),
            Self::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn start(&self) -> Vec2<T> {
        self.sample(T::zero()).position
    }

    pub fn end(&self) -> Vec2<T> {
        self.sample(self.length()).position
    }

    /// Sample at local arc length `s` (not range checked).
    pub fn sample(&self, s: T) -> PathSample<T> {
        match *self {
            Self::Segment { start, end } => {
                let len = start.distance(end);
                let tangent = (end - start) * len.recip();
                PathSample { position: start + tangent * s, tangent, curvature: T::zero() }
            }
            Self::Arc { center, radius, start_angle, sweep } => {
                let dir = sweep.signum();
                let angle = start_angle + dir * s / radius;
                let radial = Vec2::from_angle(angle);
                PathSample { position: center + radial * radius, tangent: radial.perp() * dir, curvature: dir / radius }
            }
        }
    }
}

/// A chain of primitives parameterised by arc length. A closed path wraps.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    primitives: Vec<PathPrimitive<T>>,
    closed: bool,
}

impl<T: Scalar> Path<T> {
    pub fn open(primitives: Vec<PathPrimitive<T>>) -> Self {
        Self { primitives, closed: false }
    }

    pub fn closed(primitives: Vec<PathPrimitive<T>>) -> Self {
        Self { primitives, closed: true }
    }

    pub fn primitives(&self) -> &[PathPrimitive<T>] {
        &self.primitives
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> T {
        self.primitives.iter().fold(T::zero(), |acc, p| acc + p.length())
    }

    /// Arc length at which each primitive starts.
    pub fn junctions(&self) -> Vec<T> {
        let mut acc = T::zero();
        self.primitives
            .iter()
            .map(|p| {
                let start = acc;
                acc = acc + p.length();
                start
            })
            .collect()
    }

    pub fn point_at(&self, s: T) -> Result<PathSample<T>> {
        let length = self.length();
        let s = if self.closed {
            let w = s % length;
            if w < T::zero() {
                w + length
            } else {
                w
            }
        } else {
            if !(s >= T::zero() && s <= length) {
                return Err(Error::OutOfRange {
                    s: s.to_f64().unwrap_or(f64::NAN),
                    length: length.to_f64().unwrap_or(f64::NAN),
                });
            }
            s
        };
        let mut start = T::zero();
        let last = self.primitives.len() - 1;
        for (k, prim) in self.primitives.iter().enumerate() {
            let len = prim.length();
            if s <= start + len || k == last {
                return Ok(prim.sample((s - start).min(len)));
            }
            start = start + len;
        }
        unreachable!("path has at least one primitive")
    }
}

/// Directed straight main lane. Positions are addressed by distance-to-go to
/// the merge point `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainLane<T> {
    pub merge_point: Vec2<T>,
    pub direction: Vec2<T>,
}

impl<T: Scalar> MainLane<T> {
    pub fn position(&self, distance_to_go: T) -> Vec2<T> {
        self.merge_point - self.direction * distance_to_go
    }

    pub fn distance_to_go(&self, p: Vec2<T>) -> T {
        (self.merge_point - p).dot(self.direction)
    }

    pub fn heading(&self) -> T {
        self.direction.angle()
    }

    /// Straight path from `distance_to_go` upstream of Q to `past` beyond it.
    pub fn as_path(&self, distance_to_go: T, past: T) -> Path<T> {
        Path::open(vec![PathPrimitive::Segment { start: self.position(distance_to_go), end: self.position(-past) }])
    }
}

/// Planar corridor geometry derived from [`CorridorParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorridorLayout<T> {
    pub origin: Vec2<T>,
    pub r_loiter: T,
    pub r_transit: T,
    pub d_loiter: T,
    pub point_d: Vec2<T>,
    pub point_f: Vec2<T>,
    pub point_q: Vec2<T>,
    pub center_a: Vec2<T>,
    /// Incoming side, mirrored about the y-axis. Drawing only.
    pub point_e: Vec2<T>,
    pub point_c: Vec2<T>,
    pub point_i: Vec2<T>,
    pub main_lane: MainLane<T>,
    pub outgoing_path: Path<T>,
    pub incoming_path: Path<T>,
    pub loiter_circle: Path<T>,
}

impl<T: Scalar> CorridorLayout<T> {
    pub fn outgoing_length(&self) -> T {
        self.outgoing_path.length()
    }

    /// Length of the transit lane D → F.
    pub fn transit_lane_length(&self) -> T {
        self.d_loiter + self.r_loiter
    }

    /// Angular position of `D` on the loiter circle.
    pub fn exit_angle(&self) -> T {
        T::PI()
    }

    pub fn loiter_position(&self, angle: T) -> Vec2<T> {
        self.origin + Vec2::from_angle(angle) * self.r_loiter
    }
}

pub fn build_layout<T: Scalar>(params: &CorridorParams<T>) -> Result<CorridorLayout<T>> {
    params.validate()?;
    let r_l = params.r_loiter()?;
    let d_l = params.d_loiter()?;
    let r_t = params.r_transit;
    let lane_len = d_l + r_l;

    let origin = Vec2::zero();
    let point_d = Vec2::new(-r_l, T::zero());
    let point_f = Vec2::new(-r_l, -lane_len);
    let center_a = Vec2::new(-r_l + r_t, -lane_len);
    let point_q = Vec2::new(-r_l + r_t, -(lane_len + r_t));

    let point_i = Vec2::new(r_l, T::zero());
    let point_c = Vec2::new(r_l, -lane_len);
    let point_e = Vec2::new(r_l - r_t, -(lane_len + r_t));

    let outgoing_path = Path::open(vec![
        PathPrimitive::Segment { start: point_d, end: point_f },
        PathPrimitive::Arc { center: center_a, radius: r_t, start_angle: T::PI(), sweep: T::FRAC_PI_2() },
    ]);
    let incoming_path = Path::open(vec![
        PathPrimitive::Arc {
            center: Vec2::new(r_l - r_t, -lane_len),
            radius: r_t,
            start_angle: -T::FRAC_PI_2(),
            sweep: T::FRAC_PI_2(),
        },
        PathPrimitive::Segment { start: point_c, end: point_i },
    ]);
    let loiter_circle =
        Path::closed(vec![PathPrimitive::Arc { center: origin, radius: r_l, start_angle: T::zero(), sweep: T::TAU() }]);

    Ok(CorridorLayout {
        origin,
        r_loiter: r_l,
        r_transit: r_t,
        d_loiter: d_l,
        point_d,
        point_f,
        point_q,
        center_a,
        point_e,
        point_c,
        point_i,
        main_lane: MainLane { merge_point: point_q, direction: Vec2::new(T::one(), T::zero()) },
        outgoing_path,
        incoming_path,
        loiter_circle,
    })
}
