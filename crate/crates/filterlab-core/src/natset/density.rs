//! Gauged density estimation with an explicit convergence window.
//!
//! For a set A, a modulus f and a horizon h, the estimator samples the ratio
//! f(|A inter [1,n]|) / f(n) at geometric checkpoints and classifies the tail:
//!
//! * `Converged` when the last window of checkpoints spans at most the
//!   tolerance; the reported value is the window midpoint.
//! * `Oscillating` when both halves of the upper checkpoint range swing by
//!   more than ten tolerances and the tail actually reverses direction both
//!   ways. The reversal requirement keeps a slowly decaying ratio (a set that
//!   simply stopped) from being misread as oscillation.
//! * `Inconclusive` otherwise.
//!
//! [`has_f_density_zero`] layers symbolic knowledge on top: a set the
//! constructor tree proves finite has gauged density zero under any unbounded
//! gauge, no matter how slowly the numeric ratio falls (under a logarithmic
//! gauge a finite count never looks small at the horizons a desk can afford,
//! so the symbolic route is the only honest way to certify it).

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use serde::Serialize;

use crate::fmath;
use crate::modulus::ModulusFunction;
use crate::verdict::{Check, Outcome, Verdict};

use super::{NatSet, NatSetError, TailEvidence};

/// Geometric checkpoint resolution.
pub const CHECKPOINTS_PER_DECADE: u32 = 32;

/// Checkpoints start at this index.
pub const FIRST_CHECKPOINT: u64 = 16;

/// Smallest horizon the estimator accepts.
pub const MIN_DENSITY_HORIZON: u64 = 1_000;

/// Oscillation must exceed this multiple of the tolerance to be called.
pub const OSCILLATION_FACTOR: f64 = 10.0;

/// Estimation parameters. `window` is the fraction of checkpoints forming
/// the convergence window, `tolerance` doubles as the convergence width and
/// the zero threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityParams {
    pub horizon: u64,
    pub window: f64,
    pub tolerance: f64,
}

impl Default for DensityParams {
    fn default() -> DensityParams {
        DensityParams { horizon: 1_000_000, window: 0.2, tolerance: 1e-3 }
    }
}

impl DensityParams {
    pub fn with_horizon(horizon: u64) -> DensityParams {
        DensityParams { horizon, ..DensityParams::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityStatus {
    Converged,
    Oscillating,
    Inconclusive,
}

/// The estimator's full output. `samples` holds (checkpoint, ratio) pairs;
/// `tail_inf` and `tail_sup` bound the convergence window, or the vacuous
/// bounds [0, 1] when no checkpoint produced a usable ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub modulus: alloc::string::String,
    pub status: DensityStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub horizon: u64,
    pub tail_inf: f64,
    pub tail_sup: f64,
    pub samples: Vec<(u64, f64)>,
}

fn checkpoints(horizon: u64) -> Vec<u64> {
    let mut pts = Vec::new();
    let step = fmath::powf(10.0, 1.0 / CHECKPOINTS_PER_DECADE as f64);
    let mut x = FIRST_CHECKPOINT as f64;
    loop {
        let n = x as u64;
        if n >= horizon {
            break;
        }
        if pts.last() != Some(&n) {
            pts.push(n);
        }
        x *= step;
    }
    pts.push(horizon);
    pts
}

/// Largest rise and fall over maximal monotone runs of `values`.
fn extreme_legs(values: &[f64]) -> (f64, f64) {
    let mut max_rise = 0.0_f64;
    let mut max_fall = 0.0_f64;
    if values.len() < 2 {
        return (0.0, 0.0);
    }
    let mut run_start = values[0];
    let mut prev = values[0];
    let mut dir: i8 = 0;
    for &v in &values[1..] {
        let d: i8 = if v > prev {
            1
        } else if v < prev {
            -1
        } else {
            dir
        };
        if dir != 0 && d != dir {
            let run = prev - run_start;
            if run > 0.0 {
                max_rise = fmath::max(max_rise, run);
            } else {
                max_fall = fmath::max(max_fall, -run);
            }
            run_start = prev;
        }
        dir = d;
        prev = v;
    }
    let run = prev - run_start;
    if run > 0.0 {
        max_rise = fmath::max(max_rise, run);
    } else {
        max_fall = fmath::max(max_fall, -run);
    }
    (max_rise, max_fall)
}

fn range_of(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let mut inf = f64::INFINITY;
    let mut sup = f64::NEG_INFINITY;
    let mut any = false;
    for v in values {
        any = true;
        inf = fmath::min(inf, v);
        sup = fmath::max(sup, v);
    }
    if any {
        Some((inf, sup))
    } else {
        None
    }
}

/// Estimate the gauged density of `set` under `f` at the given horizon.
///
/// Errors when the modulus does not claim unboundedness, the horizon is
/// below [`MIN_DENSITY_HORIZON`], or the set cannot be counted that far.
pub fn f_density(
    set: &NatSet,
    f: &ModulusFunction,
    params: &DensityParams,
) -> Result<DensityEstimate, NatSetError> {
    if !f.claims_unbounded() {
        return Err(NatSetError::BoundedModulus { name: f.name().to_string() });
    }
    if params.horizon < MIN_DENSITY_HORIZON {
        return Err(NatSetError::HorizonTooSmall {
            horizon: params.horizon,
            min: MIN_DENSITY_HORIZON,
        });
    }
    let pts = checkpoints(params.horizon);
    let counts = set.counts_at(&pts)?;

    let mut samples: Vec<(u64, f64)> = Vec::with_capacity(pts.len());
    for (&n, &c) in pts.iter().zip(&counts) {
        let denom = f.eval(n as f64);
        if !(denom > 0.0) || !denom.is_finite() {
            continue;
        }
        let raw = f.eval(c as f64) / denom;
        let ratio = fmath::min(fmath::max(raw, 0.0), 1.0);
        samples.push((n, ratio));
    }

    if samples.len() < 4 {
        return Ok(DensityEstimate {
            modulus: f.name().to_string(),
            status: DensityStatus::Inconclusive,
            value: None,
            horizon: params.horizon,
            tail_inf: 0.0,
            tail_sup: 1.0,
            samples,
        });
    }

    let w = ((params.window * samples.len() as f64) as usize).max(2).min(samples.len());
    let tail = &samples[samples.len() - w..];
    let (tail_inf, tail_sup) =
        range_of(tail.iter().map(|&(_, r)| r)).expect("window is nonempty");

    if tail_sup - tail_inf <= params.tolerance {
        return Ok(DensityEstimate {
            modulus: f.name().to_string(),
            status: DensityStatus::Converged,
            value: Some(0.5 * (tail_inf + tail_sup)),
            horizon: params.horizon,
            tail_inf,
            tail_sup,
            samples,
        });
    }

    // Oscillation test over the upper three quarters of the horizon, split
    // at h/2. Both halves must swing, and the combined stretch must reverse
    // direction with large legs both ways.
    let h = params.horizon;
    let swing = OSCILLATION_FACTOR * params.tolerance;
    let half1 = range_of(
        samples.iter().filter(|&&(n, _)| n > h / 4 && n <= h / 2).map(|&(_, r)| r),
    );
    let half2 = range_of(samples.iter().filter(|&&(n, _)| n > h / 2).map(|&(_, r)| r));
    let combined: Vec<f64> =
        samples.iter().filter(|&&(n, _)| n > h / 4).map(|&(_, r)| r).collect();
    let (rise, fall) = extreme_legs(&combined);
    let oscillating = match (half1, half2) {
        (Some((i1, s1)), Some((i2, s2))) => {
            s1 - i1 > swing && s2 - i2 > swing && rise > swing && fall > swing
        }
        _ => false,
    };

    Ok(DensityEstimate {
        modulus: f.name().to_string(),
        status: if oscillating { DensityStatus::Oscillating } else { DensityStatus::Inconclusive },
        value: None,
        horizon: params.horizon,
        tail_inf,
        tail_sup,
        samples,
    })
}

/// Decide whether `set` has gauged density zero under `f`, as a tri-state
/// verdict.
///
/// * `Holds` when the ratio converged to at most the tolerance, when the set
///   is symbolically finite, or when every observed member sits in the first
///   quarter of the horizon (finite at this horizon, said in those words).
/// * `Fails` when the ratio converged above the tolerance or genuinely
///   oscillates, since a limit that fails to exist is not zero.
/// * `Inconclusive` otherwise.
pub fn has_f_density_zero(
    set: &NatSet,
    f: &ModulusFunction,
    params: &DensityParams,
) -> Result<Verdict, NatSetError> {
    if !f.claims_unbounded() {
        return Err(NatSetError::BoundedModulus { name: f.name().to_string() });
    }
    let label = format!("density[{}] of {}", f.name(), set.describe());

    if let super::Card::Finite { count, .. } = set.cardinality() {
        return Ok(Verdict::single(Check::new(
            label,
            Outcome::Holds,
            format!(
                "symbolically finite ({count} elements); a finite count under an unbounded gauge has density 0"
            ),
        )));
    }

    let est = f_density(set, f, params)?;
    let check = match est.status {
        DensityStatus::Converged => {
            let v = est.value.expect("converged estimates carry a value");
            if v <= params.tolerance {
                Check::new(
                    label,
                    Outcome::Holds,
                    format!("ratio converged to {v:.3e} at horizon {}, within tolerance {:.1e}", est.horizon, params.tolerance),
                )
            } else {
                Check::new(
                    label,
                    Outcome::Fails,
                    format!("ratio converged to {v:.3e} at horizon {}, above tolerance {:.1e}", est.horizon, params.tolerance),
                )
            }
        }
        DensityStatus::Oscillating => Check::new(
            label,
            Outcome::Fails,
            format!(
                "ratio oscillates within [{:.3}, {:.3}] at horizon {}; the density does not settle, so it is not 0",
                est.tail_inf, est.tail_sup, est.horizon
            ),
        ),
        DensityStatus::Inconclusive => match set.tail_evidence(params.horizon)? {
            TailEvidence::FiniteAtHorizon { count_below, horizon } => Check::new(
                label,
                Outcome::Holds,
                format!(
                    "all {count_below} observed members lie in [1, {}]; finite at horizon {horizon}",
                    horizon / 4
                ),
            ),
            _ => Check::new(
                label,
                Outcome::Inconclusive,
                format!(
                    "ratio did not settle: window [{:.3e}, {:.3e}] at horizon {}; raise the horizon or loosen the tolerance",
                    est.tail_inf, est.tail_sup, est.horizon
                ),
            ),
        },
    };
    Ok(Verdict::single(check.with_density(est)))
}
