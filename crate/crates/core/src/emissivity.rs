//! Scalar emissivity correction.
//!
//! A camera calibrated against a blackbody reports an apparent temperature
//! `T_app`. For a grey body of emissivity `e` the total radiated power scales
//! as `e * T^4`, so the true surface temperature is `T_app * e^(-1/4)`.
//! Spectral-band effects (8-14 um) are not modelled.

use crate::error::Result;
use crate::frame::{validate_emissivity, ThermalFrame, ThermalSequence};

/// Multiplicative factor `e^(-1/4)` applied to apparent temperatures.
pub fn correction_factor(emissivity: f64) -> Result<f64> {
    validate_emissivity(emissivity)?;
    Ok(emissivity.powf(-0.25))
}

pub fn emissivity_correct(frame: &ThermalFrame, emissivity: f64) -> Result<ThermalFrame> {
    let k = correction_factor(emissivity)?;
    if k == 1.0 {
        return Ok(frame.clone());
    }
    Ok(frame.map_valid(|t| t * k))
}

/// Corrects every frame with the sequence's recorded emissivity.
pub fn correct_sequence(seq: &ThermalSequence) -> Result<ThermalSequence> {
    let k = correction_factor(seq.meta().emissivity)?;
    if k == 1.0 {
        return Ok(seq.clone());
    }
    Ok(seq.map_frames(|f| f.map_valid(|t| t * k)))
}
