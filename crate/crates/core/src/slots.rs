//! Virtual slots rotating counterclockwise on the loiter circle.

use crate::error::{invalid, Error, Result};
use crate::geometry::Vec2;
use crate::scalar::{wrap_two_pi, Scalar};

pub type UavId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRing<T> {
    n_slots: usize,
    slot_speed: T,
    r_loiter: T,
    phase0: T,
    occupancy: Vec<Option<UavId>>,
}

impl<T: Scalar> SlotRing<T> {
    /// Empty ring. `phase0` is the angular position of slot 1 at `t = 0`.
    pub fn new(n_slots: usize, slot_speed: T, r_loiter: T, phase0: T) -> Result<Self> {
        if n_slots < 2 {
            return Err(invalid("n_slots", format!("need at least 2 slots, got {n_slots}")));
        }
        if !(slot_speed > T::zero()) {
            return Err(invalid("v_s", "slot speed must be positive"));
        }
        if !(r_loiter > T::zero()) {
            return Err(invalid("r_loiter", "loiter radius must be positive"));
        }
        if !phase0.is_finite() {
            return Err(invalid("phase0", "must be finite"));
        }
        Ok(Self { n_slots, slot_speed, r_loiter, phase0: wrap_two_pi(phase0), occupancy: vec![None; n_slots] })
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    /// Angular spacing between consecutive slots.
    pub fn alpha(&self) -> T {
        T::TAU() / T::from_count(self.n_slots)
    }

    pub fn slot_speed(&self) -> T {
        self.slot_speed
    }

    pub fn r_loiter(&self) -> T {
        self.r_loiter
    }

    pub fn phase0(&self) -> T {
        self.phase0
    }

    /// Angular rate of every slot.
    pub fn angular_rate(&self) -> T {
        self.slot_speed / self.r_loiter
    }

    /// Time for one full revolution.
    pub fn period(&self) -> T {
        T::TAU() / self.angular_rate()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.n_slots {
            Err(Error::SlotIndex { index, n_slots: self.n_slots })
        } else {
            Ok(())
        }
    }

    /// Angular position of slot `index` (1-based) at time `t`, in `[0, 2π)`.
    pub fn slot_angle(&self, index: usize, t: T) -> Result<T> {
        self.check_index(index)?;
        Ok(self.unchecked_angle(index, t))
    }

    fn unchecked_angle(&self, index: usize, t: T) -> T {
        wrap_two_pi(self.phase0 + T::from_count(index - 1) * self.alpha() + self.angular_rate() * t)
    }

    pub fn slot_position(&self, index: usize, t: T) -> Result<Vec2<T>> {
        Ok(Vec2::from_angle(self.slot_angle(index, t)?) * self.r_loiter)
    }

    /// Earliest `t >= t_now` at which slot `index` sits at `exit_angle`.
    pub fn next_departure_time(&self, index: usize, t_now: T, exit_angle: T) -> Result<T> {
        let current = self.slot_angle(index, t_now)?;
        let mut deficit = wrap_two_pi(exit_angle - current);
        // Treat a deficit within rounding of a full turn as already there.
        if T::TAU() - deficit <= T::lit(1e-9) {
            deficit = T::zero();
        }
        Ok(t_now + deficit / self.angular_rate())
    }

    /// Phase that puts slot `index` at `exit_angle` at time `t_exit`.
    pub fn phase_for_departure(
        n_slots: usize,
        slot_speed: T,
        r_loiter: T,
        index: usize,
        t_exit: T,
        exit_angle: T,
    ) -> T {
        let alpha = T::TAU() / T::from_count(n_slots);
        wrap_two_pi(exit_angle - T::from_count(index.saturating_sub(1)) * alpha - slot_speed / r_loiter * t_exit)
    }

    pub fn occupant(&self, index: usize) -> Result<Option<UavId>> {
        self.check_index(index)?;
        Ok(self.occupancy[index - 1])
    }

    /// `(slot index, uav)` for every occupied slot, in slot order.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, UavId)> + '_ {
        self.occupancy.iter().enumerate().filter_map(|(k, o)| o.map(|u| (k + 1, u)))
    }

    pub fn slot_of(&self, uav: UavId) -> Option<usize> {
        self.occupancy.iter().position(|o| *o == Some(uav)).map(|k| k + 1)
    }

    pub fn occupy(&mut self, index: usize, uav: UavId) -> Result<()> {
        self.check_index(index)?;
        if self.occupancy[index - 1].is_some() {
            return Err(Error::SlotOccupied(index));
        }
        if self.slot_of(uav).is_some() {
            return Err(invalid("uav", format!("uav {uav} already holds a slot")));
        }
        self.occupancy[index - 1] = Some(uav);
        Ok(())
    }

    pub fn release(&mut self, index: usize) -> Result<UavId> {
        self.check_index(index)?;
        self.occupancy[index - 1].take().ok_or(Error::SlotEmpty(index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::loiter_radius;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ring() -> SlotRing<f64> {
        SlotRing::new(6, 25.0, 100.0, 0.0).unwrap()
    }

    #[test]
    fn angles() {
        let r = ring();
        assert_eq!(r.slot_angle(1, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(r.slot_angle(4, 0.0).unwrap(), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(r.slot_angle(1, 4.0 * PI).unwrap(), PI, epsilon = 1e-12);
        assert!(matches!(r.slot_angle(0, 0.0), Err(Error::SlotIndex { .. })));
        assert!(matches!(r.slot_angle(7, 0.0), Err(Error::SlotIndex { .. })));
    }

    #[test]
    fn departure_times() {
        let r = ring();
        assert_eq!(r.next_departure_time(4, 0.0, PI).unwrap(), 0.0);
        assert_abs_diff_eq!(r.next_departure_time(1, 0.0, PI).unwrap(), 4.0 * PI, epsilon = 1e-9);
        let shifted = SlotRing::new(6, 25.0, 100.0, -0.75).unwrap();
        assert_abs_diff_eq!(shifted.next_departure_time(1, 3.0, PI).unwrap(), 3.0 + 4.0 * PI, epsilon = 1e-9);
        let t = r.next_departure_time(2, 1.0, PI).unwrap();
        assert_abs_diff_eq!(r.slot_angle(2, t).unwrap(), PI, epsilon = 1e-9);
        // Right after departure the next one is a full period away.
        let after = r.next_departure_time(4, 1e-6, PI).unwrap();
        assert_abs_diff_eq!(after, r.period(), epsilon = 1e-6);
    }

    #[test]
    fn phase_for_departure_hits_exit() {
        let phase = SlotRing::phase_for_departure(6, 25.0, 100.0, 3, 12.32, PI);
        let r = SlotRing::new(6, 25.0, 100.0, phase).unwrap();
        assert_abs_diff_eq!(r.next_departure_time(3, 0.0, PI).unwrap(), 12.32, epsilon = 1e-9);
    }

    #[test]
    fn occupancy() {
        let mut r = ring();
        let before = r.clone();
        r.occupy(2, 7).unwrap();
        assert_eq!(r.occupant(2).unwrap(), Some(7));
        assert_eq!(r.occupy(2, 8), Err(Error::SlotOccupied(2)));
        assert!(r.occupy(3, 7).is_err());
        assert_eq!(r.release(2).unwrap(), 7);
        assert_eq!(r, before);
        assert_eq!(r.release(2), Err(Error::SlotEmpty(2)));
    }

    #[test]
    fn reference_ring_separation_is_one_hundred() {
        let r_l = loiter_radius(6, 50.0).unwrap();
        let r = SlotRing::new(6, 25.0, r_l, 0.3).unwrap();
        let mut min = f64::INFINITY;
        for k in 0..200 {
            let t = r.period() * k as f64 / 200.0;
            for i in 1..=6 {
                for j in i + 1..=6 {
                    let d = r.slot_position(i, t).unwrap().distance(r.slot_position(j, t).unwrap());
                    min = min.min(d);
                }
            }
        }
        assert_abs_diff_eq!(min, 100.0, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn adjacent_chord_is_time_invariant(n in 2usize..32, t in 0.0f64..500.0, phase in 0.0f64..7.0) {
            let r_l = loiter_radius(n, 50.0).unwrap();
            let r = SlotRing::new(n, 20.0, r_l, phase).unwrap();
            let expected = 2.0 * r_l * (PI / n as f64).sin();
            for i in 1..=n {
                let j = i % n + 1;
                let d = r.slot_position(i, t).unwrap().distance(r.slot_position(j, t).unwrap());
                prop_assert!((d - expected).abs() < 1e-6);
                prop_assert!(d >= 50.0 - 1e-6);
            }
        }

        #[test]
        fn all_pairs_respect_safety_distance(n in 2usize..16, frac in 0.0f64..1.0) {
            let r_l = loiter_radius(n, 50.0).unwrap();
            let r = SlotRing::new(n, 25.0, r_l, 0.0).unwrap();
            let t = frac * r.period();
            for i in 1..=n {
                for j in i + 1..=n {
                    let d = r.slot_position(i, t).unwrap().distance(r.slot_position(j, t).unwrap());
                    prop_assert!(d >= 50.0 - 1e-9);
                }
            }
        }

        #[test]
        fn angle_is_periodic(i in 1usize..=6, t in 0.0f64..300.0) {
            let r = ring();
            let a = r.slot_angle(i, t).unwrap();
            let b = r.slot_angle(i, t + r.period()).unwrap();
            let diff = (a - b).abs();
            prop_assert!(diff < 1e-9 || (2.0 * PI - diff) < 1e-9);
        }

        #[test]
        fn departure_periodicity(i in 1usize..=6, t in 0.0f64..100.0) {
            let r = ring();
            let a = r.next_departure_time(i, t, PI).unwrap();
            prop_assert!(a >= t);
            prop_assert!(a - t < r.period() + 1e-9);
            let b = r.next_departure_time(i, t + r.period(), PI).unwrap();
            prop_assert!((b - a - r.period()).abs() < 1e-6);
        }
    }
}
