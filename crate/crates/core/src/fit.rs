//! Least-squares fits used for convergence orders, decay rates and scaling
//! laws.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ln, sqrt};

/// Straight-line fit `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_err: f64,
    pub intercept_err: f64,
    pub r2: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Ordinary least squares on paired samples (at least three).
pub fn linear(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidParameter("sample lengths differ".into()));
    }
    if n < 3 {
        return Err(Error::InsufficientSpan("need at least three samples"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSpan("abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - intercept - slope * a;
            e * e
        })
        .sum();
    let s2 = sse / (nf - 2.0);
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit {
        slope,
        intercept,
        slope_err: sqrt(s2 / sxx),
        intercept_err: sqrt(s2 * (1.0 / nf + mx * mx / sxx)),
        r2,
        rms: sqrt(sse / nf),
    })
}

/// Decay models for time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// `c t^{-p}`
    Power,
    /// `c t^{-1} ln t`
    LogOverT,
    /// `c t^{-1 + delta}`
    Weak,
}

/// Result of [`decay_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    pub c: f64,
    /// `p` for the power model, `delta` for the weak model, zero otherwise.
    pub rate: f64,
    pub c_err: f64,
    pub rate_err: f64,
    /// RMS residual in `ln y`.
    pub residual: f64,
}

/// Least squares in log variables over samples with `t >= 1` and `y > 0`
/// (`t > 1` for [`DecayModel::LogOverT`], whose model vanishes at `t = 1`).
/// The samples must span at least a decade in `t`.
pub fn decay_fit(t: &[f64], y: &[f64], model: DecayModel) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(t, y)| **t >= 1.0 - 1e-9 && **y > 0.0)
        .map(|(t, y)| (*t, *y))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSpan("fewer than three positive samples"));
    }
    let (tmin, tmax) = pts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), (t, _)| {
        (a.min(*t), b.max(*t))
    });
    if tmax < 10.0 * tmin * (1.0 - 1e-6) {
        return Err(Error::InsufficientSpan("series spans less than a decade"));
    }
    let pts: Vec<(f64, f64)> = match model {
        DecayModel::LogOverT => pts.into_iter().filter(|(t, _)| *t > 1.0 + 1e-9).collect(),
        _ => pts,
    };
    if pts.len() < 3 {
        return Err(Error::InsufficientSpan(
            "fewer than three samples after t > 1",
        ));
    }
    let lt: Vec<f64> = pts.iter().map(|(t, _)| ln(*t)).collect();
    let ly: Vec<f64> = pts.iter().map(|(_, y)| ln(*y)).collect();
    match model {
        DecayModel::Power => {
            let f = linear(&lt, &ly)?;
            Ok(DecayFit {
                model,
                c: crate::math::exp(f.intercept),
                rate: -f.slope,
                c_err: crate::math::exp(f.intercept) * f.intercept_err,
                rate_err: f.slope_err,
                residual: f.rms,
            })
        }
        DecayModel::Weak => {
            let z: Vec<f64> = ly.iter().zip(&lt).map(|(a, b)| a + b).collect();
            let f = linear(&lt, &z)?;
            Ok(DecayFit {
                model,
                c: crate::math::exp(f.intercept),
                rate: f.slope,
                c_err: crate::math::exp(f.intercept) * f.intercept_err,
                rate_err: f.slope_err,
                residual: f.rms,
            })
        }
        DecayModel::LogOverT => {
            // ln y = ln c - ln t + ln ln t: only the constant is free.
            let z: Vec<f64> = ly.iter().zip(&lt).map(|(a, b)| a + b - ln(*b)).collect();
            let n = z.len() as f64;
            let m = z.iter().sum::<f64>() / n;
            let sse: f64 = z.iter().map(|v| (v - m) * (v - m)).sum();
            let c = crate::math::exp(m);
            Ok(DecayFit {
                model,
                c,
                rate: 0.0,
                c_err: c * sqrt(sse / (n - 1.0) / n),
                rate_err: 0.0,
                residual: sqrt(sse / n),
            })
        }
    }
}

/// Best pure power `c t^{-p}` with `p` restricted to `[p_lo, p_hi]`, fitted
/// in log variables over the same samples as [`DecayModel::LogOverT`]
/// (`t > 1`, `y > 0`). The residual is quadratic in `p`, so the optimum is
/// the free slope clamped into the band. Returns `(p, rms residual)`.
pub fn power_band_fit(t: &[f64], y: &[f64], p_lo: f64, p_hi: f64) -> Result<(f64, f64)> {
    if !(p_lo <= p_hi) {
        return Err(Error::InvalidParameter("empty exponent band".into()));
    }
    let (lt, ly): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(t, y)| **t > 1.0 + 1e-9 && **y > 0.0)
        .map(|(t, y)| (ln(*t), ln(*y)))
        .unzip();
    let p = (-linear(&lt, &ly)?.slope).clamp(p_lo, p_hi);
    let z: Vec<f64> = ly.iter().zip(&lt).map(|(a, b)| a + p * b).collect();
    let n = z.len() as f64;
    let m = z.iter().sum::<f64>() / n;
    let sse: f64 = z.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((p, sqrt(sse / n)))
}

/// Observed convergence order from errors at successively halved spacings:
/// slope of `log2 e` against refinement level, sign flipped.
pub fn convergence_order(errors: &[f64]) -> Result<f64> {
    if errors.len() < 2 {
        return Err(Error::InsufficientSpan("need two resolutions"));
    }
    if errors.iter().any(|e| *e <= 0.0) {
        return Err(Error::InvalidParameter("errors must be positive".into()));
    }
    let x: Vec<f64> = (0..errors.len()).map(|i| i as f64).collect();
    let y: Vec<f64> = errors
        .iter()
        .map(|e| ln(*e) / core::f64::consts::LN_2)
        .collect();
    if errors.len() == 2 {
        return Ok(y[0] - y[1]);
    }
    Ok(-linear(&x, &y)?.slope)
}
