//! Plain-text description of a quadratic wave system.
//!
//! ```text
//! # box phi1 = phi3 d_t^2 phi1 + (d_t phi2)^2
//! unknowns phi1 phi2 phi3
//! term phi1 1.0 phi3 - phi1 00
//! term phi1 1.0 phi2 0 phi2 0
//! ```
//!
//! `term TARGET COEFF J ALPHA K BETA` adds `COEFF d^ALPHA phi_J d^BETA phi_K`
//! to the equation for `box phi_TARGET`. Unknowns are named or given by
//! their zero-based position; derivative multi-indices are strings of the
//! digits `0..=3` (`0` is time), or `-` for no derivative.

use std::fmt::Write as _;

use wavegauge_core::asymptotics::WaveSystem;

use crate::error::{LabError, LabResult};

fn err(line: usize, msg: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("system file line {line}: {msg}"))
}

fn multi_index(s: &str, line: usize) -> LabResult<Vec<usize>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| match c.to_digit(10) {
            Some(d) if d <= 3 => Ok(d as usize),
            _ => Err(err(line, format!("bad derivative index `{s}`"))),
        })
        .collect()
}

pub fn parse_system(text: &str) -> LabResult<WaveSystem> {
    let mut system: Option<WaveSystem> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        match words[0] {
            "unknowns" => {
                if system.is_some() {
                    return Err(err(line, "unknowns declared twice"));
                }
                let names = &words[1..];
                if names.is_empty() {
                    return Err(err(line, "no unknowns listed"));
                }
                for (a, n) in names.iter().enumerate() {
                    if names[..a].contains(n) {
                        return Err(err(line, format!("duplicate unknown `{n}`")));
                    }
                    if n.parse::<usize>().is_ok() {
                        return Err(err(line, format!("unknown `{n}` must not be a number")));
                    }
                }
                system = Some(WaveSystem::new(names));
            }
            "term" => {
                let sys = system
                    .take()
                    .ok_or_else(|| err(line, "term before the unknowns line"))?;
                if words.len() != 7 {
                    return Err(err(line, "expected `term TARGET COEFF J ALPHA K BETA`"));
                }
                let unknown = |w: &str| -> LabResult<usize> {
                    sys.unknowns
                        .iter()
                        .position(|u| u == w)
                        .or_else(|| w.parse::<usize>().ok().filter(|&k| k < sys.unknowns.len()))
                        .ok_or_else(|| err(line, format!("no unknown `{w}`")))
                };
                let target = unknown(words[1])?;
                let coeff: f64 = words[2]
                    .parse()
                    .map_err(|_| err(line, format!("bad coefficient `{}`", words[2])))?;
                if !coeff.is_finite() {
                    return Err(err(line, "coefficient must be finite"));
                }
                let j = unknown(words[3])?;
                let alpha = multi_index(words[4], line)?;
                let k = unknown(words[5])?;
                let beta = multi_index(words[6], line)?;
                system = Some(
                    sys.with_term(target, j, &alpha, k, &beta, coeff)
                        .map_err(|e| err(line, e))?,
                );
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }
    system.ok_or_else(|| err(0, "missing unknowns line"))
}

/// Inverse of [`parse_system`], one term per line.
pub fn format_system(system: &WaveSystem, comment: &str) -> String {
    let idx = |a: &[usize]| -> String {
        if a.is_empty() {
            "-".into()
        } else {
            a.iter().map(|d| char::from(b'0' + *d as u8)).collect()
        }
    };
    let mut out = String::new();
    for c in comment.lines() {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "unknowns {}", system.unknowns.join(" "));
    for t in &system.terms {
        let u = &system.unknowns;
        let _ = writeln!(
            out,
            "term {} {:?} {} {} {} {}",
            u[t.target],
            t.coeff,
            u[t.j],
            idx(&t.alpha),
            u[t.k],
            idx(&t.beta)
        );
    }
    out
}
