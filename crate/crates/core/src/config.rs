//! Problem files.
//!
//! A problem file is TOML with these keys:
//!
//! ```toml
//! alpha = 1.0          # exponent, in (0, 2)
//! a = "1 + x^2"        # optional, default "1"
//! b = "0"              # optional, default "0"
//! interval = 2.0       # I
//! localization = 1.0   # optional G, 0 < G < I
//! nu_override = 0.3    # optional, negative controls only
//! ```
//!
//! Setting `beta` selects `x^α (1−x)^β ∂x²` on `(0,1)`. Then `a` and `b`
//! are not allowed, `interval` is `I` and `localization` and
//! `localization_right` give `G < I < H`.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::coeffs::{Coef, Problem};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::wrightfisher::WfProblem;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: Option<f64>,
    beta: Option<f64>,
    interval: Option<f64>,
    a: Option<String>,
    b: Option<String>,
    localization: Option<f64>,
    localization_right: Option<f64>,
    nu_override: Option<f64>,
}

/// A general problem from a file.
#[derive(Clone, Debug)]
pub struct GeneralConfig {
    pub problem: Problem,
    pub a_src: String,
    pub b_src: String,
    pub localization: Option<f64>,
    pub nu_override: Option<f64>,
}

/// A Wright–Fisher problem from a file.
#[derive(Clone, Debug)]
pub struct WfConfig {
    pub problem: WfProblem,
    pub interval: f64,
    pub left: Option<f64>,
    pub right: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum ProblemConfig {
    General(GeneralConfig),
    WrightFisher(WfConfig),
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

fn require(field: &str, v: Option<f64>) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(field_err(field, format!("{x} is not finite"))),
        None => Err(field_err(field, "missing")),
    }
}

fn coefficient(field: &str, src: &str) -> Result<(Expr, Coef, Coef, Coef)> {
    let e = Expr::parse(src).map_err(|e| field_err(field, e))?;
    let (v, d1, d2) = (e.clone(), e.clone(), e.clone());
    let value: Coef = Arc::new(move |x| v.eval(x));
    let first: Coef = Arc::new(move |x| d1.jet(x).d1);
    let second: Coef = Arc::new(move |x| d2.jet(x).d2);
    Ok((e, value, first, second))
}

/// Parses problem-file text.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        Error::Config(format!("config: {msg}"))
    })?;
    let alpha = require("alpha", raw.alpha)?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(field_err("alpha", format!("{alpha} must lie in (0, 2)")));
    }
    let interval = require("interval", raw.interval)?;
    if let Some(beta) = raw.beta {
        if raw.a.is_some() || raw.b.is_some() {
            return Err(field_err("a", "not allowed together with beta"));
        }
        if raw.nu_override.is_some() {
            return Err(field_err("nu_override", "not allowed together with beta"));
        }
        let problem = WfProblem::new(alpha, beta).map_err(|e| field_err("beta", e))?;
        if !(interval > 0.0 && interval < 1.0) {
            return Err(field_err("interval", format!("{interval} must lie in (0, 1)")));
        }
        if let Some(g) = raw.localization {
            if !(g > 0.0 && g < interval) {
                return Err(field_err("localization", format!("{g} must lie in (0, interval)")));
            }
        }
        if let Some(h) = raw.localization_right {
            if !(h > interval && h < 1.0) {
                return Err(field_err("localization_right", format!("{h} must lie in (interval, 1)")));
            }
        }
        return Ok(ProblemConfig::WrightFisher(WfConfig {
            problem,
            interval,
            left: raw.localization,
            right: raw.localization_right,
        }));
    }
    if raw.localization_right.is_some() {
        return Err(field_err("localization_right", "only valid together with beta"));
    }
    if !(interval > 0.0) {
        return Err(field_err("interval", format!("{interval} must be positive")));
    }
    if let Some(g) = raw.localization {
        if !(g > 0.0 && g < interval) {
            return Err(field_err("localization", format!("{g} must lie in (0, interval)")));
        }
    }
    if let Some(nu) = raw.nu_override {
        if !nu.is_finite() {
            return Err(field_err("nu_override", "not finite"));
        }
    }
    let a_src = raw.a.unwrap_or_else(|| "1".into());
    let b_src = raw.b.unwrap_or_else(|| "0".into());
    let (_, a, a1, a2) = coefficient("a", &a_src)?;
    let (b_expr, b, b1, _) = coefficient("b", &b_src)?;
    let mut problem = Problem::new(alpha, a, b, interval).with_derivatives(a1, a2, b1);
    problem.drift_free = !b_expr.depends_on_x() && b_expr.eval(1.0) == 0.0;
    Ok(ProblemConfig::General(GeneralConfig {
        problem,
        a_src,
        b_src,
        localization: raw.localization,
        nu_override: raw.nu_override,
    }))
}

/// Reads and parses a problem file.
pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("config: cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
