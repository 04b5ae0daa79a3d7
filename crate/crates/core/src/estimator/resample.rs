//! Linear resampling of the irregular frame clock onto a uniform grid.

use crate::error::{Error, Result};
use crate::estimator::signal::{grid_time, BreathingSignal, Stage};

/// Value at grid time `tg` between two bracketing samples. A grid point that
/// lands exactly on a sample takes that sample's value.
#[inline]
pub(crate) fn interpolate(t0: f64, v0: f64, t1: f64, v1: f64, tg: f64) -> f64 {
    if tg == t0 {
        v0
    } else if tg == t1 {
        v1
    } else {
        v0 + (v1 - v0) * ((tg - t0) / (t1 - t0))
    }
}

/// Resamples onto `t0, t0 + 1/fs, ...` up to the last sample time. Never extrapolates.
pub fn resample_uniform(sig: &BreathingSignal, fs: f64) -> Result<BreathingSignal> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidParameter(format!("sample rate must be positive, got {fs}")));
    }
    if sig.len() < 2 {
        return Err(Error::EmptySignal { usable: sig.len() });
    }
    let t0 = sig.times[0];
    let t_end = *sig.times.last().unwrap();
    let mut values = Vec::with_capacity(((t_end - t0) * fs) as usize + 1);
    let mut j = 0;
    loop {
        let tg = grid_time(t0, fs, values.len());
        if tg > t_end {
            break;
        }
        while j + 1 < sig.len() && sig.times[j + 1] < tg {
            j += 1;
        }
        let v = if j + 1 < sig.len() {
            interpolate(sig.times[j], sig.values[j], sig.times[j + 1], sig.values[j + 1], tg)
        } else {
            sig.values[j]
        };
        values.push(v);
    }
    let mut out = BreathingSignal::uniform(t0, fs, values)?;
    out.stage = Stage::Uniform;
    Ok(out)
}

/// Incremental counterpart of [`resample_uniform`]: feed raw samples in order,
/// receive the grid values that became computable.
#[derive(Debug, Clone)]
pub struct StreamingResampler {
    fs: f64,
    t0: Option<f64>,
    last: Option<(f64, f64)>,
    emitted: usize,
}

impl StreamingResampler {
    pub fn new(fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidParameter(format!("sample rate must be positive, got {fs}")));
        }
        Ok(Self {
            fs,
            t0: None,
            last: None,
            emitted: 0,
        })
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn t0(&self) -> Option<f64> {
        self.t0
    }

    pub fn push(&mut self, t: f64, v: f64, out: &mut Vec<f64>) {
        let Some(t0) = self.t0 else {
            self.t0 = Some(t);
            self.last = Some((t, v));
            self.emitted = 1;
            out.push(v);
            return;
        };
        let (tp, vp) = self.last.expect("initialized with t0");
        loop {
            let tg = grid_time(t0, self.fs, self.emitted);
            if tg > t {
                break;
            }
            out.push(interpolate(tp, vp, t, v, tg));
            self.emitted += 1;
        }
        self.last = Some((t, v));
    }
}
