//! Frequency-response metrics: rating-weighted average frequency, sliding
//! window ROCOF, aggregate inertia, nadir / settling extraction, and the
//! first-vs-second order response classifier.

use std::fmt::Write as _;

use thiserror::Error;

use crate::device::DeviceParams;
use crate::engine::TimeSeries;
use crate::scalar::Scalar;

/// Width of the window the settling frequency is averaged over, seconds.
pub const SETTLE_WINDOW_S: f64 = 0.5;
/// Peak-to-peak band within the settle window for the trace to count as
/// settled, hertz.
pub const SETTLE_BAND_HZ: f64 = 1e-3;
/// Classifier tolerance: wiggle below this is treated as numerical ripple.
pub const CLASSIFY_EPS_HZ: f64 = 2e-3;
/// Default ROCOF sliding window, seconds.
pub const ROCOF_WINDOW_S: f64 = 0.1;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no devices supplied")]
    Empty,
    #[error("device traces have mismatched lengths")]
    RaggedTraces,
    #[error("device rating must be positive, got {0}")]
    BadRating(f64),
    #[error("ROCOF window {window} s does not fit in a trace of {samples} samples at dt = {dt} s")]
    WindowTooLong { window: f64, dt: f64, samples: usize },
    #[error("ROCOF window {window} s is not a multiple of the sample spacing {dt} s")]
    WindowOffGrid { window: f64, dt: f64 },
    #[error("trace ends {have} s after the event; at least {need} s are required")]
    TooShortAfterEvent { have: f64, need: f64 },
    #[error("trace has not settled: final-window peak-to-peak {0} Hz")]
    Unsettled(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderClass {
    FirstOrder,
    SecondOrder,
    Indeterminate,
}

impl OrderClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderClass::FirstOrder => "first_order",
            OrderClass::SecondOrder => "second_order",
            OrderClass::Indeterminate => "indeterminate",
        }
    }
}

/// Rating-weighted average frequency per sample.
pub fn average_frequency<S: Scalar>(
    device_f: &[Vec<S>],
    ratings: &[S],
) -> Result<Vec<S>, MetricsError> {
    if device_f.is_empty() || ratings.len() != device_f.len() {
        return Err(MetricsError::Empty);
    }
    let n = device_f[0].len();
    if device_f.iter().any(|t| t.len() != n) {
        return Err(MetricsError::RaggedTraces);
    }
    for &r in ratings {
        if r <= S::zero() {
            return Err(MetricsError::BadRating(r.as_f64()));
        }
    }
    let total: S = ratings.iter().copied().sum();
    Ok((0..n)
        .map(|i| {
            let weighted: S = device_f
                .iter()
                .zip(ratings)
                .map(|(trace, &r)| trace[i] * r)
                .sum();
            weighted / total
        })
        .collect())
}

/// Maximum absolute sliding-window ROCOF and the window start time at which
/// it occurs. The window must be a whole number of samples.
pub fn rocof<S: Scalar>(f: &[S], dt: S, window: S) -> Result<(S, S), MetricsError> {
    let steps_f = (window / dt).round();
    let steps = steps_f.as_f64() as usize;
    if ((window / dt) - steps_f).abs() > S::c(1e-6) || steps == 0 {
        return Err(MetricsError::WindowOffGrid {
            window: window.as_f64(),
            dt: dt.as_f64(),
        });
    }
    if f.len() <= steps {
        return Err(MetricsError::WindowTooLong {
            window: window.as_f64(),
            dt: dt.as_f64(),
            samples: f.len(),
        });
    }
    let mut best = S::zero();
    let mut best_i = 0;
    for i in 0..f.len() - steps {
        let r = (f[i + steps] - f[i]).abs() / window;
        if r > best {
            best = r;
            best_i = i;
        }
    }
    Ok((best, dt * S::c(best_i as f64)))
}

/// Rating-weighted aggregate inertia, seconds. Grid-forming entries carry
/// `H = 0`.
pub fn aggregate_inertia<S: Scalar>(devices: &[(S, S)]) -> Result<S, MetricsError> {
    if devices.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut num = S::zero();
    let mut den = S::zero();
    for &(h, s) in devices {
        if s <= S::zero() {
            return Err(MetricsError::BadRating(s.as_f64()));
        }
        num = num + h * s;
        den = den + s;
    }
    Ok(num / den)
}

/// Post-event minimum, its time, and the settling frequency (mean of the
/// final window, only when that window's peak-to-peak is inside the settle
/// band). The trace must extend at least 10 s past the event.
pub fn nadir_and_settling<S: Scalar>(
    t: &[S],
    f: &[S],
    event_time: S,
) -> Result<(S, S, Option<S>), MetricsError> {
    let span = *t.last().expect("non-empty trace") - event_time;
    if span < S::c(10.0) {
        return Err(MetricsError::TooShortAfterEvent {
            have: span.as_f64(),
            need: 10.0,
        });
    }
    let start = t.partition_point(|&x| x < event_time);
    let mut nadir = f[start];
    let mut nadir_t = t[start];
    for i in start..f.len() {
        if f[i] < nadir {
            nadir = f[i];
            nadir_t = t[i];
        }
    }
    let dt = t[1] - t[0];
    let w = (S::c(SETTLE_WINDOW_S) / dt).round().as_f64() as usize;
    let tail = &f[f.len() - w.min(f.len())..];
    let lo = tail.iter().copied().fold(tail[0], S::min);
    let hi = tail.iter().copied().fold(tail[0], S::max);
    let settling = if hi - lo < S::c(SETTLE_BAND_HZ) {
        let sum: S = tail.iter().copied().sum();
        Some(sum / S::c(tail.len() as f64))
    } else {
        None
    };
    Ok((nadir, nadir_t, settling))
}

/// Classify the post-event trace against the settling frequency.
///
/// `first_order` when the trace approaches settling monotonically (within
/// the ripple tolerance) and never crosses past it by more than the
/// tolerance; `second_order` when it crosses and comes back; otherwise
/// `indeterminate`. Returns the class and the overshoot `settling - nadir`.
pub fn classify_response<S: Scalar>(
    t: &[S],
    f: &[S],
    event_time: S,
    settling: S,
) -> (OrderClass, S) {
    let eps = S::c(CLASSIFY_EPS_HZ);
    let start = t.partition_point(|&x| x < event_time);
    let post = &f[start..];
    if post.is_empty() {
        return (OrderClass::Indeterminate, S::zero());
    }
    // Orient so the trace starts non-negative and decays towards zero.
    let sign = if post[0] >= settling { S::one() } else { -S::one() };
    let mut min_g = S::infinity();
    let mut nadir = post[0];
    let mut running_min = S::infinity();
    let mut monotone = true;
    for &x in post {
        let g = (x - settling) * sign;
        if g > running_min + eps {
            monotone = false;
        }
        running_min = running_min.min(g);
        min_g = min_g.min(g);
        nadir = nadir.min(x);
    }
    let crossed = min_g < -eps;
    let class = if !crossed && monotone {
        OrderClass::FirstOrder
    } else if crossed {
        OrderClass::SecondOrder
    } else {
        OrderClass::Indeterminate
    };
    (class, settling - nadir)
}

/// Frequency deviation accumulated before the pre-converter power responds:
/// the product of a ROCOF and a response time.
pub fn delta_f_prior<S: Scalar>(rocof: S, t_response: S) -> S {
    rocof * t_response
}

/// Full metric suite for one run.
#[derive(Debug, Clone)]
pub struct MetricsReport<S> {
    pub scenario: String,
    pub rocof_max_abs: S,
    pub rocof_time: S,
    pub nadir: S,
    pub nadir_time: S,
    pub settling_f: Option<S>,
    pub aggregate_h: S,
    pub order_class: OrderClass,
    pub overshoot: Option<S>,
    /// Worst-case windowed ROCOF of each device's own frequency.
    pub per_device_rocof: Vec<(String, S)>,
}

impl<S: Scalar> MetricsReport<S> {
    /// Evaluate every metric on a simulated run. ROCOF, nadir, settling, and
    /// the order class are computed on the rating-weighted average frequency.
    pub fn from_series(
        scenario: &str,
        series: &TimeSeries<S>,
        devices: &[DeviceParams<S>],
        event_time: S,
        window: S,
    ) -> Result<Self, MetricsError> {
        let dt = series.dt();
        let (rocof_max_abs, rocof_time) = rocof(&series.avg_f, dt, window)?;
        let (nadir, nadir_time, settling_f) = nadir_and_settling(&series.t, &series.avg_f, event_time)?;
        let (order_class, overshoot) = match settling_f {
            Some(s) => {
                let (c, o) = classify_response(&series.t, &series.avg_f, event_time, s);
                (c, Some(o))
            }
            None => (OrderClass::Indeterminate, None),
        };
        let hs: Vec<(S, S)> = devices
            .iter()
            .map(|d| (d.inertia_h(), d.rating_mva()))
            .collect();
        let aggregate_h = aggregate_inertia(&hs)?;
        let per_device_rocof = series
            .device_names
            .iter()
            .zip(&series.f)
            .map(|(name, trace)| Ok((name.clone(), rocof(trace, dt, window)?.0)))
            .collect::<Result<Vec<_>, MetricsError>>()?;
        Ok(Self {
            scenario: scenario.to_string(),
            rocof_max_abs,
            rocof_time,
            nadir,
            nadir_time,
            settling_f,
            aggregate_h,
            order_class,
            overshoot,
            per_device_rocof,
        })
    }

    /// Flat key-value text block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario = {}", self.scenario);
        let _ = writeln!(out, "aggregate_h_s = {:.8e}", self.aggregate_h);
        let _ = writeln!(out, "rocof_max_abs_hz_per_s = {:.8e}", self.rocof_max_abs);
        let _ = writeln!(out, "rocof_time_s = {:.8e}", self.rocof_time);
        let _ = writeln!(out, "nadir_hz = {:.8e}", self.nadir);
        let _ = writeln!(out, "nadir_time_s = {:.8e}", self.nadir_time);
        match self.settling_f {
            Some(s) => {
                let _ = writeln!(out, "settling_hz = {s:.8e}");
            }
            None => {
                let _ = writeln!(out, "settling_hz = unsettled");
            }
        }
        let _ = writeln!(out, "order_class = {}", self.order_class.as_str());
        match self.overshoot {
            Some(o) => {
                let _ = writeln!(out, "overshoot_hz = {o:.8e}");
            }
            None => {
                let _ = writeln!(out, "overshoot_hz = unsettled");
            }
        }
        for (name, r) in &self.per_device_rocof {
            let _ = writeln!(out, "rocof_dev:{name} = {r:.8e}");
        }
        out
    }

    pub fn csv_header() -> &'static str {
        "label,aggregate_h,rocof_hz_per_s,nadir_hz,settling_hz"
    }

    /// One sweep-table row. The inertia column mirrors the style of the
    /// reference tables: one decimal place, truncated.
    pub fn to_csv_row(&self) -> String {
        let settling = match self.settling_f {
            Some(s) => format!("{s:.8e}"),
            None => "unsettled".to_string(),
        };
        format!(
            "{},{},{:.8e},{:.8e},{}",
            self.scenario,
            format_inertia(self.aggregate_h),
            self.rocof_max_abs,
            self.nadir,
            settling
        )
    }
}

/// Truncate (not round) to one decimal place, e.g. 8/3 prints as "2.6".
pub fn format_inertia<S: Scalar>(h: S) -> String {
    let tenths = (h * S::c(10.0)).trunc().as_f64() as i64;
    format!("{}.{}", tenths / 10, (tenths % 10).abs())
}
