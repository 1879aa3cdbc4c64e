use serde::{Deserialize, Serialize};

/// Hardest deceleration any simulated vehicle can apply.
pub const ACCEL_FLOOR: f64 = -9.0;

/// Intelligent driver model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// Desired speed, m/s.
    pub v0: f64,
    pub a_max: f64,
    /// Desired time gap, s.
    pub tau: f64,
    /// Comfortable deceleration, m/s².
    pub b: f64,
    /// Minimum bumper-to-bumper distance, m.
    pub s0: f64,
    pub delta: f64,
}

impl IdmParams {
    /// Reaction model used inside the training environment. `v0` is set per
    /// vehicle at override time.
    pub fn training(v0: f64) -> Self {
        Self { v0, a_max: 5.0, tau: 1.0, b: 3.0, s0: 1.0, delta: 4.0 }
    }

    /// Car-following parameters of the IDM+MOBIL baseline and forecast mode.
    pub fn baseline(v0: f64) -> Self {
        Self { v0, a_max: 1.3, tau: 1.2, b: 0.7, s0: 1.5, delta: 4.0 }
    }

    pub fn with_v0(self, v0: f64) -> Self {
        Self { v0, ..self }
    }

    /// Desired gap `s*` for speed `v` and approach rate `dv = v - v_lead`.
    /// The dynamic part is floored at zero so a pulling-away leader never
    /// shrinks the gap below `s0`.
    pub fn desired_gap(&self, v: f64, dv: f64) -> f64 {
        self.s0 + (v * self.tau + v * dv / (2.0 * (self.a_max * self.b).sqrt())).max(0.0)
    }
}

/// IDM acceleration clamped to `[ACCEL_FLOOR, a_max]`.
///
/// `gap` is bumper to bumper; pass `f64::INFINITY` for a free road.
pub fn idm_acceleration(v: f64, dv: f64, gap: f64, p: &IdmParams) -> f64 {
    let free = if p.v0 > 0.0 {
        (v / p.v0).powf(p.delta)
    } else if v > 0.0 {
        // Stopped vehicles that want to stay stopped.
        f64::INFINITY
    } else {
        1.0
    };
    let interaction = (p.desired_gap(v, dv) / gap.max(1e-3)).powi(2);
    (p.a_max * (1.0 - free - interaction)).clamp(ACCEL_FLOOR, p.a_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_on_free_road() {
        let p = IdmParams::training(10.0);
        assert_eq!(idm_acceleration(10.0, 0.0, f64::INFINITY, &p), 0.0);
    }

    #[test]
    fn standing_start_accelerates_at_a_max() {
        let p = IdmParams::training(10.0);
        let a = idm_acceleration(0.0, 0.0, 1e6, &p);
        assert!((a - 5.0).abs() < 1e-9);
        assert!((idm_acceleration(0.0, 0.0, 10.0, &p) - 5.0 * (1.0 - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn gap_at_desired_distance_brakes_with_a_max() {
        let p = IdmParams::training(10.0);
        assert_eq!(p.desired_gap(10.0, 0.0), 11.0);
        assert!((idm_acceleration(10.0, 0.0, 11.0, &p) + 5.0).abs() < 1e-12);
    }

    #[test]
    fn output_is_clamped() {
        let p = IdmParams::training(10.0);
        assert_eq!(idm_acceleration(20.0, 10.0, 0.5, &p), ACCEL_FLOOR);
        assert!(idm_acceleration(0.0, -5.0, 100.0, &p) <= p.a_max);
    }

    #[test]
    fn zero_desired_speed_holds_still() {
        let p = IdmParams::training(0.0);
        assert!(idm_acceleration(0.0, 0.0, f64::INFINITY, &p).abs() < 1e-12);
        assert!(idm_acceleration(3.0, 0.0, f64::INFINITY, &p) < 0.0);
    }
}
