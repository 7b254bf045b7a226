//! Weight sequences theta_m for the cycle-weighted measure, including
//! exponential tilting (theta_m -> theta_m * m^s) and the singularity
//! parameters (r, vartheta, K) of the generalized-Ewens class.
//!
//! Weight-spec grammar (CLI-facing):
//!   `uniform`
//!   `ewens:<theta>`
//!   `poly:<gamma>`
//!   `genewens:r=<r>,theta=<theta>,eps=<none|power:<a>,<b>>[,K=<K>]`
//!   `custom:<path>`
//!
//! Custom table files are CSV with header `m,theta`, rows for m = 1,2,...,
//! and optional footer directives: `#tail=<c>` (constant tail) or
//! `#tail=power:<a>,<b>` (tail theta_m = a*m^b), plus
//! `#classF=<r>,<theta>,<K>` to declare membership in the logarithmic
//! singularity class. The declaration is trusted as-is; analyticity is
//! never verified here.

use num_complex::Complex64;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Perturbation rule for generalized-Ewens weights:
/// theta_m * r^m = vartheta + eps_m.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    None,
    /// eps_m = amplitude * m^exponent with exponent < 0.
    PowerDecay {
        amplitude: f64,
        exponent: f64,
    },
}

impl Perturbation {
    pub fn eps(&self, m: usize) -> f64 {
        match self {
            Perturbation::None => 0.0,
            Perturbation::PowerDecay {
                amplitude,
                exponent,
            } => amplitude * (m as f64).powf(*exponent),
        }
    }
}

/// Tail rule for custom weight tables.
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    /// Table values only; evaluating past the table is a definition error.
    None,
    Constant(f64),
    /// theta_m = coeff * m^exponent past the table.
    Power {
        coeff: f64,
        exponent: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomTable {
    /// `thetas[i]` is `theta_{i+1}`.
    pub thetas: Vec<f64>,
    pub tail: TailRule,
    /// Declared class-F parameters, trusted as-is (analyticity is never
    /// verified here); None means the model does not claim membership.
    pub declared_class_f: Option<(f64, f64, f64)>,
}

/// The weight parameter family Theta = (theta_m).
#[derive(Debug, Clone, PartialEq)]
pub enum WeightModel {
    Uniform,
    Ewens {
        theta: f64,
    },
    GeneralizedEwens {
        radius: f64,
        theta: f64,
        perturbation: Perturbation,
        /// Explicit K; None means estimate by partial summation.
        k_constant: Option<f64>,
    },
    Polynomial {
        gamma: f64,
    },
    Custom(CustomTable),
    /// theta_m multiplied by m^exponent; only used inside the series engine.
    Tilted {
        base: Box<WeightModel>,
        exponent: Complex64,
    },
}

/// Partial-summation length for estimating K of a generalized-Ewens model.
pub const K_ESTIMATE_TERMS: usize = 1_000_000;

impl WeightModel {
    pub fn ewens(theta: f64) -> Self {
        WeightModel::Ewens { theta }
    }

    pub fn polynomial(gamma: f64) -> Self {
        WeightModel::Polynomial { gamma }
    }

    /// Validates parameters (positivity, declared decay) once up front.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightModel::Uniform => Ok(()),
            WeightModel::Ewens { theta } => {
                if *theta > 0.0 && theta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Definition(format!(
                        "ewens theta must be > 0, got {theta}"
                    )))
                }
            }
            WeightModel::GeneralizedEwens {
                radius,
                theta,
                perturbation,
                ..
            } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Definition(format!(
                        "radius must be > 0, got {radius}"
                    )));
                }
                if !(*theta > 0.0 && theta.is_finite()) {
                    return Err(Error::Definition(format!("theta must be > 0, got {theta}")));
                }
                if let Perturbation::PowerDecay {
                    amplitude,
                    exponent,
                } = perturbation
                {
                    if *exponent >= 0.0 {
                        return Err(Error::Definition(
                            "perturbation exponent must be negative so that sum |eps_m|/m converges"
                                .into(),
                        ));
                    }
                    if theta + amplitude.min(0.0) < 0.0 {
                        return Err(Error::Definition(
                            "perturbation drives theta_1 negative".into(),
                        ));
                    }
                }
                Ok(())
            }
            WeightModel::Polynomial { gamma } => {
                if *gamma > 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Definition(format!(
                        "poly gamma must be > 0, got {gamma}"
                    )))
                }
            }
            WeightModel::Custom(t) => {
                if t.thetas.is_empty() {
                    return Err(Error::Definition("custom table is empty".into()));
                }
                if t.thetas.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(Error::Definition("custom weights must be >= 0".into()));
                }
                Ok(())
            }
            WeightModel::Tilted { base, .. } => base.validate(),
        }
    }

    /// True when every theta_m is real (no complex tilt in effect).
    pub fn is_real(&self) -> bool {
        match self {
            WeightModel::Tilted { base, exponent } => exponent.im == 0.0 && base.is_real(),
            _ => true,
        }
    }

    /// theta_m for real-valued models. Complex-tilted models are rejected.
    pub fn theta(&self, m: usize) -> Result<f64> {
        debug_assert!(m >= 1);
        match self {
            WeightModel::Uniform => Ok(1.0),
            WeightModel::Ewens { theta } => Ok(*theta),
            WeightModel::GeneralizedEwens {
                radius,
                theta,
                perturbation,
                ..
            } => {
                let v = (theta + perturbation.eps(m)) / radius.powi(m as i32);
                if v < 0.0 {
                    return Err(Error::Definition(format!(
                        "perturbation drives theta_{m} negative"
                    )));
                }
                Ok(v)
            }
            WeightModel::Polynomial { gamma } => Ok((m as f64).powf(*gamma)),
            WeightModel::Custom(t) => {
                if m <= t.thetas.len() {
                    Ok(t.thetas[m - 1])
                } else {
                    match t.tail {
                        TailRule::None => Err(Error::Definition(format!(
                            "custom table has {} entries, no tail rule for m = {m}",
                            t.thetas.len()
                        ))),
                        TailRule::Constant(c) => Ok(c),
                        TailRule::Power { coeff, exponent } => {
                            Ok(coeff * (m as f64).powf(exponent))
                        }
                    }
                }
            }
            WeightModel::Tilted { base, exponent } => {
                if exponent.im != 0.0 {
                    return Err(Error::Representation(
                        "complex-tilted model has no real theta; use theta_complex".into(),
                    ));
                }
                Ok(base.theta(m)? * (m as f64).powf(exponent.re))
            }
        }
    }

    /// theta_m as a complex number, defined for every model.
    pub fn theta_complex(&self, m: usize) -> Result<Complex64> {
        match self {
            WeightModel::Tilted { base, exponent } => {
                let t = base.theta_complex(m)?;
                Ok(t * (Complex64::new((m as f64).ln(), 0.0) * exponent).exp())
            }
            _ => Ok(Complex64::new(self.theta(m)?, 0.0)),
        }
    }

    /// log theta_m for real models (-inf encodes theta_m = 0).
    pub fn log_theta(&self, m: usize) -> Result<f64> {
        match self {
            WeightModel::Uniform => Ok(0.0),
            WeightModel::Ewens { theta } => Ok(theta.ln()),
            WeightModel::Polynomial { gamma } => Ok(gamma * (m as f64).ln()),
            WeightModel::GeneralizedEwens {
                radius,
                theta,
                perturbation,
                ..
            } => {
                // computed in log form: theta_m = (theta + eps_m) / r^m can
                // overflow the direct value for r < 1 long before the log does
                let scaled = theta + perturbation.eps(m);
                if scaled < 0.0 {
                    return Err(Error::Definition(format!(
                        "perturbation drives theta_{m} negative"
                    )));
                }
                Ok(scaled.ln() - m as f64 * radius.ln())
            }
            WeightModel::Custom(_) => Ok(self.theta(m)?.ln()),
            WeightModel::Tilted { base, exponent } => {
                if exponent.im != 0.0 {
                    return Err(Error::Representation(
                        "complex-tilted model has no real log theta".into(),
                    ));
                }
                Ok(base.log_theta(m)? + exponent.re * (m as f64).ln())
            }
        }
    }

    /// Exponential tilt theta_m -> theta_m * m^s. Involutive under s -> -s
    /// and additive in s; a zero net exponent unwraps to the base model.
    pub fn tilt(self, s: Complex64) -> WeightModel {
        match self {
            WeightModel::Tilted { base, exponent } => {
                let total = exponent + s;
                if total == Complex64::ZERO {
                    *base
                } else {
                    WeightModel::Tilted {
                        base,
                        exponent: total,
                    }
                }
            }
            other => {
                if s == Complex64::ZERO {
                    other
                } else {
                    WeightModel::Tilted {
                        base: Box::new(other),
                        exponent: s,
                    }
                }
            }
        }
    }

    pub fn tilt_real(self, s: f64) -> WeightModel {
        self.tilt(Complex64::new(s, 0.0))
    }

    /// Singularity parameters (r, vartheta, K) for class-F models.
    ///
    /// For generalized Ewens without an explicit K the constant is the
    /// partial sum of eps_m / m plus an integral tail estimate; the
    /// remaining error is well below 1e-12 for the bundled decay rules.
    pub fn singularity_params(&self) -> Result<(f64, f64, f64)> {
        match self {
            WeightModel::Uniform => Ok((1.0, 1.0, 0.0)),
            WeightModel::Ewens { theta } => Ok((1.0, *theta, 0.0)),
            WeightModel::GeneralizedEwens {
                radius,
                theta,
                perturbation,
                k_constant,
            } => {
                let k = match (k_constant, perturbation) {
                    (Some(k), _) => *k,
                    (None, Perturbation::None) => 0.0,
                    (
                        None,
                        Perturbation::PowerDecay {
                            amplitude,
                            exponent,
                        },
                    ) => {
                        // K = sum eps_m / m, summed ascending in magnitude
                        // then corrected by the integral tail.
                        let m_max = K_ESTIMATE_TERMS;
                        let mut acc = 0.0;
                        for m in (1..=m_max).rev() {
                            acc += amplitude * (m as f64).powf(exponent - 1.0);
                        }
                        let tail = amplitude * (m_max as f64).powf(*exponent) / (-exponent);
                        acc + tail
                    }
                };
                Ok((*radius, *theta, k))
            }
            WeightModel::Custom(t) => t.declared_class_f.ok_or_else(|| {
                Error::Classification("custom model does not declare class-F membership".into())
            }),
            WeightModel::Polynomial { .. } => Err(Error::Classification(
                "polynomial weights have an essential singularity, not a logarithmic one".into(),
            )),
            WeightModel::Tilted { .. } => Err(Error::Classification(
                "tilted models are internal to the series engine".into(),
            )),
        }
    }

    /// Canonical spec string (inverse of `parse_weight_spec` for the
    /// CLI-facing families).
    pub fn spec_string(&self) -> String {
        match self {
            WeightModel::Uniform => "uniform".into(),
            WeightModel::Ewens { theta } => format!("ewens:{theta}"),
            WeightModel::Polynomial { gamma } => format!("poly:{gamma}"),
            WeightModel::GeneralizedEwens {
                radius,
                theta,
                perturbation,
                k_constant,
            } => {
                let eps = match perturbation {
                    Perturbation::None => "none".to_string(),
                    Perturbation::PowerDecay {
                        amplitude,
                        exponent,
                    } => format!("power:{amplitude},{exponent}"),
                };
                let mut s = format!("genewens:r={radius},theta={theta},eps={eps}");
                if let Some(k) = k_constant {
                    s.push_str(&format!(",K={k}"));
                }
                s
            }
            WeightModel::Custom(_) => "custom:<table>".into(),
            WeightModel::Tilted { base, exponent } => {
                format!("tilt({},{})", base.spec_string(), exponent)
            }
        }
    }
}

/// Parse the CLI weight-spec grammar.
pub fn parse_weight_spec(spec: &str) -> Result<WeightModel> {
    let spec = spec.trim();
    let model = if spec == "uniform" {
        WeightModel::Uniform
    } else if let Some(rest) = spec.strip_prefix("ewens:") {
        WeightModel::Ewens {
            theta: parse_f64(rest, "ewens theta")?,
        }
    } else if let Some(rest) = spec.strip_prefix("poly:") {
        WeightModel::Polynomial {
            gamma: parse_f64(rest, "poly gamma")?,
        }
    } else if let Some(rest) = spec.strip_prefix("genewens:") {
        parse_genewens(rest)?
    } else if let Some(path) = spec.strip_prefix("custom:") {
        WeightModel::Custom(load_custom_table(Path::new(path))?)
    } else {
        return Err(Error::Parse(format!("unknown weight spec `{spec}`")));
    };
    model.validate()?;
    Ok(model)
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse `{s}` as a number")))
}

fn parse_genewens(rest: &str) -> Result<WeightModel> {
    let mut radius = None;
    let mut theta = None;
    let mut perturbation = None;
    let mut k_constant = None;
    // eps=power:<a>,<b> contains a comma, so split on commas that start a
    // new key=value pair.
    let mut fields: Vec<String> = Vec::new();
    for piece in rest.split(',') {
        if piece.contains('=') {
            fields.push(piece.to_string());
        } else if let Some(last) = fields.last_mut() {
            last.push(',');
            last.push_str(piece);
        } else {
            return Err(Error::Parse(format!("genewens: stray field `{piece}`")));
        }
    }
    for field in &fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("genewens: expected key=value, got `{field}`")))?;
        match key.trim() {
            "r" => radius = Some(parse_f64(value, "genewens r")?),
            "theta" => theta = Some(parse_f64(value, "genewens theta")?),
            "K" => k_constant = Some(parse_f64(value, "genewens K")?),
            "eps" => {
                let value = value.trim();
                perturbation = Some(if value == "none" {
                    Perturbation::None
                } else if let Some(args) = value.strip_prefix("power:") {
                    let (a, b) = args.split_once(',').ok_or_else(|| {
                        Error::Parse("genewens eps=power expects `power:<a>,<b>`".into())
                    })?;
                    Perturbation::PowerDecay {
                        amplitude: parse_f64(a, "eps amplitude")?,
                        exponent: parse_f64(b, "eps exponent")?,
                    }
                } else {
                    return Err(Error::Parse(format!(
                        "genewens: unknown eps rule `{value}`"
                    )));
                });
            }
            other => return Err(Error::Parse(format!("genewens: unknown key `{other}`"))),
        }
    }
    Ok(WeightModel::GeneralizedEwens {
        radius: radius.ok_or_else(|| Error::Parse("genewens: missing r=".into()))?,
        theta: theta.ok_or_else(|| Error::Parse("genewens: missing theta=".into()))?,
        perturbation: perturbation.ok_or_else(|| Error::Parse("genewens: missing eps=".into()))?,
        k_constant,
    })
}

/// Load a custom weight table: CSV `m,theta` plus optional `#tail=` footer.
pub fn load_custom_table(path: &Path) -> Result<CustomTable> {
    let text = fs::read_to_string(path)?;
    parse_custom_table(&text)
}

pub fn parse_custom_table(text: &str) -> Result<CustomTable> {
    let mut thetas = Vec::new();
    let mut tail = TailRule::None;
    let mut declared_class_f = None;
    let mut saw_header = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rule) = line.strip_prefix("#tail=") {
            let rule = rule.trim();
            tail = if let Some(args) = rule.strip_prefix("power:") {
                let (a, b) = args
                    .split_once(',')
                    .ok_or_else(|| Error::Parse("custom tail: expected `power:<a>,<b>`".into()))?;
                TailRule::Power {
                    coeff: parse_f64(a, "tail coeff")?,
                    exponent: parse_f64(b, "tail exponent")?,
                }
            } else {
                TailRule::Constant(parse_f64(rule, "tail constant")?)
            };
            continue;
        }
        if let Some(decl) = line.strip_prefix("#classF=") {
            let parts: Vec<&str> = decl.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(
                    "custom classF declaration: expected `#classF=<r>,<theta>,<K>`".into(),
                ));
            }
            declared_class_f = Some((
                parse_f64(parts[0], "classF r")?,
                parse_f64(parts[1], "classF theta")?,
                parse_f64(parts[2], "classF K")?,
            ));
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "m,theta" {
                return Err(Error::Parse(format!(
                    "custom table line {}: expected header `m,theta`, got `{line}`",
                    lineno + 1
                )));
            }
            saw_header = true;
            continue;
        }
        let (m_str, theta_str) = line.split_once(',').ok_or_else(|| {
            Error::Parse(format!(
                "custom table line {}: expected `m,theta`",
                lineno + 1
            ))
        })?;
        let m: usize = m_str
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("custom table line {}: bad m", lineno + 1)))?;
        if m != thetas.len() + 1 {
            return Err(Error::Parse(format!(
                "custom table line {}: rows must be m = 1,2,... without gaps",
                lineno + 1
            )));
        }
        thetas.push(parse_f64(theta_str, "custom theta")?);
    }
    if !saw_header {
        return Err(Error::Parse(
            "custom table: missing `m,theta` header".into(),
        ));
    }
    Ok(CustomTable {
        thetas,
        tail,
        declared_class_f,
    })
}
