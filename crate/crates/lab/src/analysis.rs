//! Fits over a diagnostic series, shared by the `evolve` summary and the
//! acceptance checks.

use serde_json::{json, Value};
use wavegauge_core::diagnostics::DiagnosticSeries;
use wavegauge_core::evolution::RunResult;
use wavegauge_core::fit::{decay_fit, linear, power_band_fit, DecayFit, DecayModel};

use crate::output::num;

/// Exponent band the full `|dh|` series is compared against.
pub const POWER_BAND: (f64, f64) = (0.8, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct RunFits {
    /// `delta` in `E_0(t) ~ (1 + t)^delta`, with its `R^2`.
    pub energy_exponent: Option<(f64, f64)>,
    /// Power-law fit of `sup |dh|_{TU}` on the annulus.
    pub tu_decay: Option<DecayFit>,
    /// `c t^{-1} ln t` fit of the full `sup |dh|`.
    pub full_log: Option<DecayFit>,
    /// Best pure power in [`POWER_BAND`] for the same series: `(p, rms)`.
    pub full_band: Option<(f64, f64)>,
    /// `max_t sup|Gamma|(t) / (10 sup|Gamma|(0) + floor(t))`; at most one
    /// when gauge propagation holds.
    pub gauge_margin: f64,
}

impl RunFits {
    pub fn from_run(run: &RunResult) -> Self {
        let s = &run.series;
        let (t, e0) = s.column(|r| r.energies.first().copied().filter(|e| *e > 0.0));
        let energy_exponent = if t.len() >= 3 {
            let x: Vec<f64> = t.iter().map(|t| (1.0 + t).ln()).collect();
            let y: Vec<f64> = e0.iter().map(|e| e.ln()).collect();
            linear(&x, &y).ok().map(|f| (f.slope, f.r2))
        } else {
            None
        };
        let (tt, tu) = s.column(|r| r.null.map(|m| m.tu));
        let (tf, full) = s.column(|r| r.null.map(|m| m.full));
        Self {
            energy_exponent,
            tu_decay: decay_fit(&tt, &tu, DecayModel::Power).ok(),
            full_log: decay_fit(&tf, &full, DecayModel::LogOverT).ok(),
            full_band: power_band_fit(&tf, &full, POWER_BAND.0, POWER_BAND.1).ok(),
            gauge_margin: gauge_margin(s, run.gauge_initial),
        }
    }

    /// The log model beats every pure power in the band.
    pub fn log_beats_band(&self) -> Option<bool> {
        Some(self.full_log?.residual < self.full_band?.1)
    }

    pub fn to_json(&self) -> Value {
        let fit = |f: &Option<DecayFit>| {
            f.map_or(Value::Null, |f| {
                json!({"c": num(f.c), "rate": num(f.rate), "rate_err": num(f.rate_err), "residual": num(f.residual)})
            })
        };
        json!({
            "energy_exponent": self.energy_exponent.map_or(Value::Null, |(d, r2)| json!({"delta": num(d), "r2": num(r2)})),
            "tu_decay": fit(&self.tu_decay),
            "full_log_over_t": fit(&self.full_log),
            "full_power_band": self.full_band.map_or(Value::Null, |(p, r)| json!({"p": num(p), "residual": num(r), "band": [POWER_BAND.0, POWER_BAND.1]})),
            "log_beats_power_band": self.log_beats_band(),
            "gauge_margin": num(self.gauge_margin),
        })
    }
}

pub fn gauge_margin(series: &DiagnosticSeries, initial: f64) -> f64 {
    series
        .records
        .iter()
        .map(|r| {
            let bound = 10.0 * initial + r.gauge_floor;
            if bound > 0.0 {
                r.gauge_sup / bound
            } else if r.gauge_sup == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}
