use super::{TrackState, VehicleTrack};
use crate::error::{Error, Result};
use crate::linalg;

/// Samples per smoothing window (2 s at 10 Hz, odd so the window is centered).
pub const SMOOTHING_WINDOW: usize = 21;
pub const SMOOTHING_ORDER: usize = 3;
/// Smoothed accelerations beyond this magnitude mark a corrupt track.
pub const ACCEL_SANITY_BOUND: f64 = 10.0;

/// Least-squares polynomial smoother over a sliding window.
///
/// Interior samples are evaluated at the window center. The first and last
/// `window / 2` samples reuse the fit of the first/last full window evaluated
/// at their own offsets, so the output has the same length as the input.
#[derive(Debug, Clone)]
pub struct SavitzkyGolay {
    window: usize,
    order: usize,
    /// `(order + 1) × window`, maps window samples to polynomial coefficients
    /// in units of samples relative to the window center.
    projection: Vec<f64>,
}

impl SavitzkyGolay {
    pub fn new(window: usize, order: usize) -> Self {
        assert!(window % 2 == 1 && window > order, "window must be odd and exceed the order");
        let n = order + 1;
        let half = (window / 2) as f64;
        let mut normal = vec![0.0; n * n];
        let mut rhs = vec![0.0; n * window];
        for k in 0..window {
            let s = k as f64 - half;
            let mut powers = vec![1.0; n];
            for j in 1..n {
                powers[j] = powers[j - 1] * s;
            }
            for i in 0..n {
                for j in 0..n {
                    normal[i * n + j] += powers[i] * powers[j];
                }
                rhs[i * window + k] = powers[i];
            }
        }
        linalg::solve(&mut normal, &mut rhs, n, window).expect("Vandermonde normal matrix is regular");
        Self {
            window,
            order,
            projection: rhs,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    fn fit(&self, samples: &[f64]) -> Vec<f64> {
        debug_assert_eq!(samples.len(), self.window);
        (0..=self.order)
            .map(|i| {
                let row = &self.projection[i * self.window..(i + 1) * self.window];
                row.iter().zip(samples).map(|(w, v)| w * v).sum()
            })
            .collect()
    }

    fn eval(coeffs: &[f64], u: f64, derivative: usize) -> f64 {
        let mut acc = 0.0;
        for i in (derivative..coeffs.len()).rev() {
            let mut f = 1.0;
            for k in 0..derivative {
                f *= (i - k) as f64;
            }
            acc = acc * u + f * coeffs[i];
        }
        acc
    }

    /// Smoothed value, first and second derivative for every sample.
    ///
    /// `dt` converts per-sample derivatives into per-second ones. Panics when
    /// `values` is shorter than the window.
    pub fn apply(&self, values: &[f64], dt: f64) -> [Vec<f64>; 3] {
        let n = values.len();
        assert!(n >= self.window, "series shorter than the smoothing window");
        let half = self.window / 2;
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut put = |idx: usize, coeffs: &[f64], u: f64| {
            out[0][idx] = Self::eval(coeffs, u, 0);
            out[1][idx] = Self::eval(coeffs, u, 1) / dt;
            out[2][idx] = Self::eval(coeffs, u, 2) / (dt * dt);
        };
        let head = self.fit(&values[..self.window]);
        for i in 0..half {
            put(i, &head, i as f64 - half as f64);
        }
        for c in half..n - half {
            let coeffs = self.fit(&values[c - half..=c + half]);
            put(c, &coeffs, 0.0);
        }
        let tail = self.fit(&values[n - self.window..]);
        for i in n - half..n {
            put(i, &tail, (i - (n - 1 - half)) as f64);
        }
        out
    }
}

/// Smooths positions and derives velocities and accelerations from the
/// local cubic fits.
pub fn smooth_track(raw: &VehicleTrack) -> Result<VehicleTrack> {
    if raw.states.len() < SMOOTHING_WINDOW {
        return Err(Error::TooShort {
            vehicle_id: raw.vehicle_id,
            len: raw.states.len(),
            needed: SMOOTHING_WINDOW,
        });
    }
    let sg = SavitzkyGolay::new(SMOOTHING_WINDOW, SMOOTHING_ORDER);
    let xs: Vec<f64> = raw.states.iter().map(|s| s.x).collect();
    let ys: Vec<f64> = raw.states.iter().map(|s| s.y).collect();
    let [x, vx, ax] = sg.apply(&xs, raw.dt);
    let [y, vy, ay] = sg.apply(&ys, raw.dt);

    for (axis, series) in [("longitudinal", &ax), ("lateral", &ay)] {
        if let Some(&value) = series.iter().find(|a| a.abs() > ACCEL_SANITY_BOUND) {
            return Err(Error::SanityBound {
                vehicle_id: raw.vehicle_id,
                axis,
                value,
            });
        }
    }

    let states = raw
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| TrackState {
            x: x[i],
            y: y[i],
            vx: vx[i],
            vy: vy[i],
            ax: ax[i],
            ay: ay[i],
            lane_id: s.lane_id,
        })
        .collect();
    Ok(VehicleTrack {
        states,
        ..raw.clone()
    })
}
