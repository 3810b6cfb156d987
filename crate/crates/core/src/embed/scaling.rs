use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input vector mapped into `[0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledInput(pub Vec<f64>);

/// Positional rotation angles in `[0, 2π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionalAngles(pub Vec<f64>);

/// Transformer sinusoidal encoding of `position` with `d_model` entries.
pub fn sinusoidal_pe(position: usize, d_model: usize) -> Vec<f64> {
    let s = position as f64;
    (0..d_model)
        .map(|k| {
            let i = (k / 2) as f64;
            let arg = s / 10000f64.powf(2.0 * i / d_model as f64);
            if k % 2 == 0 {
                arg.sin()
            } else {
                arg.cos()
            }
        })
        .collect()
}

fn extrema<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Affine map of every PE entry onto `[0, 2π]` using the global extrema of
/// `pe_all`.
pub fn scale_positions(pe_all: &[Vec<f64>]) -> Result<Vec<PositionalAngles>> {
    if pe_all.is_empty() {
        return Err(Error::Empty("positional encodings"));
    }
    let (lo, hi) = extrema(pe_all.iter().flatten());
    if hi <= lo {
        return Err(Error::DegenerateRange(lo));
    }
    Ok(pe_all
        .iter()
        .map(|pe| PositionalAngles(pe.iter().map(|v| ((v - lo) / (hi - lo) * 2.0 * PI).clamp(0.0, 2.0 * PI)).collect()))
        .collect())
}

/// Scaled positional angles for positions `0..sequence_length` with one PE
/// entry per qubit.
pub fn positional_angles(sequence_length: usize, n_qubits: usize) -> Result<Vec<PositionalAngles>> {
    let pe: Vec<Vec<f64>> = (0..sequence_length.max(1)).map(|s| sinusoidal_pe(s, n_qubits)).collect();
    scale_positions(&pe)
}

/// Global-extrema scaling of input vectors onto `[0, π]`. Values outside the
/// fitted range (unseen at fit time) are clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputScaler {
    pub min: f64,
    pub max: f64,
}

impl InputScaler {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(max > min) {
            return Err(Error::DegenerateRange(min));
        }
        Ok(Self { min, max })
    }

    pub fn fit<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<Self> {
        let (lo, hi) = extrema(values.into_iter());
        if !lo.is_finite() {
            return Err(Error::Empty("input values"));
        }
        Self::new(lo, hi)
    }

    #[inline]
    pub fn scale_value(&self, v: f64) -> f64 {
        ((v - self.min) / (self.max - self.min) * PI).clamp(0.0, PI)
    }

    pub fn scale(&self, x: &[f64]) -> ScaledInput {
        ScaledInput(x.iter().map(|&v| self.scale_value(v)).collect())
    }

    /// Chain rule through the scaling for one entry `v` with upstream
    /// gradient `g`: returns `(∂/∂v, ∂/∂min, ∂/∂max)`. Entries clamped from
    /// outside the range contribute nothing.
    #[inline]
    pub fn backprop_value(&self, v: f64, g: f64) -> (f64, f64, f64) {
        let range = self.max - self.min;
        let tol = 1e-12 * range.max(1.0);
        if v < self.min - tol || v > self.max + tol {
            return (0.0, 0.0, 0.0);
        }
        let r2 = range * range;
        (g * PI / range, g * PI * (v - self.max) / r2, -g * PI * (v - self.min) / r2)
    }
}

/// Fits an [`InputScaler`] on every entry of `x_all` and scales each vector.
pub fn scale_inputs(x_all: &[Vec<f64>]) -> Result<Vec<ScaledInput>> {
    let scaler = InputScaler::fit(x_all.iter().flatten())?;
    Ok(x_all.iter().map(|x| scaler.scale(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pe_examples() {
        assert_eq!(sinusoidal_pe(0, 4), vec![0.0, 1.0, 0.0, 1.0]);
        assert!((sinusoidal_pe(1, 2)[0] - 0.841_470_984_807_896_5).abs() < 1e-15);
        for s in 0..200 {
            assert!(sinusoidal_pe(s, 7).iter().all(|v| v.abs() <= 1.0));
        }
        // entry 2i+1 uses the same frequency as 2i
        let pe = sinusoidal_pe(3, 4);
        let f = 3.0 / 10000f64.powf(2.0 / 4.0);
        assert!((pe[2] - f.sin()).abs() < 1e-15);
        assert!((pe[3] - f.cos()).abs() < 1e-15);
    }

    #[test]
    fn position_scaling_endpoints() {
        let out = scale_positions(&[vec![-1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(out[0].0[0], 0.0);
        assert!((out[0].0[1] - PI).abs() < 1e-15);
        assert!((out[0].0[2] - 2.0 * PI).abs() < 1e-15);
        assert!(scale_positions(&[vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn position_scaling_matches_direct_affine_map() {
        let pe: Vec<Vec<f64>> = (0..6).map(|s| sinusoidal_pe(s, 4)).collect();
        let lo = pe.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        let hi = pe.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let out = scale_positions(&pe).unwrap();
        for (row, scaled) in pe.iter().zip(&out) {
            for (v, t) in row.iter().zip(&scaled.0) {
                let expect = 2.0 * PI * (v - lo) / (hi - lo);
                assert!((t - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn input_scaling() {
        let out = scale_inputs(&[vec![2.0, 4.0], vec![3.0, 2.5]]).unwrap();
        assert_eq!(out[0].0[0], 0.0);
        assert!((out[0].0[1] - PI).abs() < 1e-15);
        assert!((out[1].0[0] - PI / 2.0).abs() < 1e-15);
        assert!(scale_inputs(&[vec![1.0, 1.0]]).is_err());

        let scaler = InputScaler::new(2.0, 4.0).unwrap();
        assert_eq!(scaler.scale_value(9.0), PI);
        assert_eq!(scaler.scale_value(-9.0), 0.0);
    }

    #[test]
    fn scaler_backprop_matches_finite_differences() {
        let (lo, hi, v) = (-0.3, 0.7, 0.1);
        let f = |lo: f64, hi: f64, v: f64| InputScaler::new(lo, hi).unwrap().scale_value(v);
        let h = 1e-6;
        let (dv, dlo, dhi) = InputScaler::new(lo, hi).unwrap().backprop_value(v, 1.0);
        assert!((dv - (f(lo, hi, v + h) - f(lo, hi, v - h)) / (2.0 * h)).abs() < 1e-7);
        assert!((dlo - (f(lo + h, hi, v) - f(lo - h, hi, v)) / (2.0 * h)).abs() < 1e-7);
        assert!((dhi - (f(lo, hi + h, v) - f(lo, hi - h, v)) / (2.0 * h)).abs() < 1e-7);
    }
}
