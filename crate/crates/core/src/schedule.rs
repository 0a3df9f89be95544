//! Step-indexed reformulation policies.
//!
//! Windows are half-open in steps: a window covering the first 20% of
//! 10000 steps covers steps 0..2000. Fractional boundaries round up, so
//! `window_first(x)` covers exactly the first `ceil(x * T)` steps.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn default_mean_span() -> u32 {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Reformulate every example in the first `frac` of steps, none after.
    WindowFirst { frac: f64 },
    /// Reformulate each example independently with probability `p`.
    Mix { p: f64 },
    /// Always reformulate; scaffold length decays linearly 100% -> 0% over
    /// all of training.
    Curriculum1,
    /// 80% reformulated for the first 20% of steps, linear 80% -> 40% until
    /// 60% of steps, none afterwards.
    Curriculum2,
    /// Like `window_first(0.2)` but the scaffold fraction decays linearly
    /// 100% -> 0% across the window instead of being drawn uniformly.
    Curriculum3,
    /// Masking active on `[start_frac * T, end_frac * T)`.
    MaskWindow {
        start_frac: f64,
        end_frac: f64,
        p: f64,
        #[serde(default)]
        span: bool,
        #[serde(default = "default_mean_span")]
        mean_span: u32,
    },
}

impl ScheduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::WindowFirst { .. } => "window_first",
            ScheduleKind::Mix { .. } => "mix",
            ScheduleKind::Curriculum1 => "curriculum1",
            ScheduleKind::Curriculum2 => "curriculum2",
            ScheduleKind::Curriculum3 => "curriculum3",
            ScheduleKind::MaskWindow { .. } => "mask_window",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |what: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::out_of_range(what, v, "[0, 1]"))
            }
        };
        match *self {
            ScheduleKind::WindowFirst { frac } => unit("window fraction", frac),
            ScheduleKind::Mix { p } => unit("mix probability", p),
            ScheduleKind::Curriculum1 | ScheduleKind::Curriculum2 | ScheduleKind::Curriculum3 => {
                Ok(())
            }
            ScheduleKind::MaskWindow {
                start_frac,
                end_frac,
                p,
                mean_span,
                ..
            } => {
                unit("mask window start", start_frac)?;
                unit("mask window end", end_frac)?;
                if start_frac > end_frac {
                    return Err(Error::InvalidConfig(format!(
                        "mask window start {start_frac} exceeds end {end_frac}"
                    )));
                }
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::out_of_range("mask probability", p, "(0, 1)"));
                }
                if mean_span == 0 {
                    return Err(Error::out_of_range("mean span", mean_span, ">= 1"));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePolicy {
    #[serde(flatten)]
    pub kind: ScheduleKind,
    pub total_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", content = "value", rename_all = "snake_case")]
pub enum PrefixLaw {
    Uniform01,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub p: f64,
    pub span: bool,
    pub mean_span: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub reform_fraction: f64,
    pub prefix_law: PrefixLaw,
    pub mask: Option<MaskSpec>,
}

/// First step outside a window covering `frac` of `total` steps, i.e.
/// `ceil(frac * total)`, with products that land within float noise of an
/// integer treated as that integer.
pub fn boundary_step(frac: f64, total: u64) -> u64 {
    let v = frac * total as f64;
    let r = libm::round(v);
    if libm::fabs(v - r) <= 1e-9 * v.max(1.0) {
        r as u64
    } else {
        libm::ceil(v) as u64
    }
}

impl SchedulePolicy {
    pub fn new(kind: ScheduleKind, total_steps: u64) -> Result<Self> {
        let p = Self { kind, total_steps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 {
            return Err(Error::out_of_range("total steps", 0, ">= 1"));
        }
        self.kind.validate()
    }

    /// Policy in effect at `step`; `step` must be below `total_steps`.
    pub fn policy_at(&self, step: u64) -> Result<StepPolicy> {
        if step >= self.total_steps {
            return Err(Error::out_of_range(
                "step",
                step,
                &format!("0..{}", self.total_steps),
            ));
        }
        Ok(self.evaluate(step))
    }

    /// Piecewise evaluation without the range check; `step == total_steps`
    /// gives the right-hand endpoint of each curve.
    pub fn evaluate(&self, step: u64) -> StepPolicy {
        let t = self.total_steps;
        let s = step as f64;
        let uniform = |reform_fraction: f64| StepPolicy {
            reform_fraction,
            prefix_law: PrefixLaw::Uniform01,
            mask: None,
        };
        let mut out = match self.kind {
            ScheduleKind::WindowFirst { frac } => uniform(if step < boundary_step(frac, t) {
                1.0
            } else {
                0.0
            }),
            ScheduleKind::Mix { p } => uniform(p),
            ScheduleKind::Curriculum1 => StepPolicy {
                reform_fraction: 1.0,
                prefix_law: PrefixLaw::Fixed(1.0 - s / t as f64),
                mask: None,
            },
            ScheduleKind::Curriculum2 => {
                let b1 = boundary_step(0.2, t);
                let b2 = boundary_step(0.6, t);
                let f = if step < b1 {
                    0.8
                } else if step < b2 {
                    let x = (step - b1) as f64 / (b2 - b1) as f64;
                    0.8 - 0.4 * x
                } else {
                    0.0
                };
                uniform(f)
            }
            ScheduleKind::Curriculum3 => {
                let b1 = boundary_step(0.2, t);
                if step < b1 {
                    StepPolicy {
                        reform_fraction: 1.0,
                        prefix_law: PrefixLaw::Fixed(1.0 - s / b1 as f64),
                        mask: None,
                    }
                } else {
                    uniform(0.0)
                }
            }
            ScheduleKind::MaskWindow {
                start_frac,
                end_frac,
                p,
                span,
                mean_span,
            } => {
                let active =
                    boundary_step(start_frac, t) <= step && step < boundary_step(end_frac, t);
                StepPolicy {
                    reform_fraction: if active { 1.0 } else { 0.0 },
                    prefix_law: PrefixLaw::Uniform01,
                    mask: active.then_some(MaskSpec { p, span, mean_span }),
                }
            }
        };
        out.reform_fraction = out.reform_fraction.clamp(0.0, 1.0);
        if let PrefixLaw::Fixed(v) = &mut out.prefix_law {
            *v = v.clamp(0.0, 1.0);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub step: u64,
    pub policy: StepPolicy,
}

/// Samples the policy at `resolution` evenly spaced steps from 0 to
/// `total_steps` inclusive (duplicates removed when `resolution` exceeds
/// the step count).
pub fn dump_curve(policy: &SchedulePolicy, resolution: u64) -> Result<Vec<CurveRow>> {
    if resolution < 2 {
        return Err(Error::out_of_range("resolution", resolution, ">= 2"));
    }
    let t = policy.total_steps as u128;
    let mut rows: Vec<CurveRow> = Vec::with_capacity(resolution as usize);
    for i in 0..resolution as u128 {
        let step = (i * t / (resolution as u128 - 1)) as u64;
        if rows.last().is_some_and(|r| r.step == step) {
            continue;
        }
        rows.push(CurveRow {
            step,
            policy: policy.evaluate(step),
        });
    }
    Ok(rows)
}

/// TSV with header `step  reform_fraction  prefix  mask`. The prefix column
/// is `uniform` or the fixed fraction; mask is the active probability or
/// `-`.
pub fn curve_tsv(rows: &[CurveRow]) -> String {
    let mut out = String::from("step\treform_fraction\tprefix\tmask\n");
    for r in rows {
        let prefix = match r.policy.prefix_law {
            PrefixLaw::Uniform01 => String::from("uniform"),
            PrefixLaw::Fixed(v) => format!("{v:.6}"),
        };
        let mask = match r.policy.mask {
            Some(m) if m.span => format!("span:{}:{}", m.p, m.mean_span),
            Some(m) => format!("token:{}", m.p),
            None => String::from("-"),
        };
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{}\t{}",
            r.step, r.policy.reform_fraction, prefix, mask
        );
    }
    out
}
