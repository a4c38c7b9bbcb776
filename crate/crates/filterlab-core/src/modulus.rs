//! Modulus functions: the gauges that rescale counting densities.
//!
//! A modulus is a map f on the nonnegative reals with f(0) = 0 that is
//! nondecreasing and subadditive (f(x + y) <= f(x) + f(y)). An unbounded
//! modulus turns the counting ratio |A inter [1,n]| / n into the gauged ratio
//! f(|A inter [1,n]|) / f(n), which is what the density engine consumes.
//! Bounded moduli are representable here but rejected by density operations,
//! since the gauged ratio then tends to 1 for every infinite set.
//!
//! Validation is sampling-based and says so: [`validate_modulus`] evaluates
//! the axioms on a fixed grid and reports the first violating pair as a
//! witness, and unboundedness is probed by doubling the argument rather than
//! proved. The report distinguishes a confirmed sup from an inconclusive one.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::Serialize;

use crate::fmath;

/// Tolerance for monotonicity: f(x) may exceed f(y) for x <= y by at most
/// this much before the axiom is reported violated.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Relative tolerance for subadditivity: f(x+y) may exceed f(x) + f(y) by at
/// most this fraction of the bound (plus the same amount absolutely).
pub const SUBADD_REL_TOL: f64 = 1e-9;

/// The unboundedness probe succeeds once f exceeds this value.
pub const UNBOUNDED_TARGET: f64 = 1e6;

/// The unboundedness probe gives up past this argument.
pub const PROBE_ARG_CAP: f64 = 1e12;

/// A named, evaluable modulus candidate. Whether it actually satisfies the
/// axioms is the business of [`validate_modulus`]; construction only requires
/// an evaluator. `claims_unbounded` records the constructor's intent and is
/// cross-checked by the probe.
#[derive(Clone)]
pub struct ModulusFunction {
    name: String,
    claims_unbounded: bool,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl core::fmt::Debug for ModulusFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ModulusFunction")
            .field("name", &self.name)
            .field("claims_unbounded", &self.claims_unbounded)
            .finish()
    }
}

impl PartialEq for ModulusFunction {
    /// Equality by name. Evaluators are opaque; the catalog and the DSL both
    /// give distinct functions distinct names.
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl ModulusFunction {
    pub fn new(
        name: impl Into<String>,
        claims_unbounded: bool,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> ModulusFunction {
        ModulusFunction {
            name: name.into(),
            claims_unbounded,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    /// The constructor's claim, not a theorem. Density operations trust it
    /// after [`validate_modulus`] has had a chance to contradict it.
    pub fn claims_unbounded(&self) -> bool {
        self.claims_unbounded
    }
}

/// Composition outer(inner(t)). The composition of two valid moduli is again
/// monotone with value 0 at 0; subadditivity of the composite follows from
/// subadditivity of `outer` plus monotonicity, but validation checks it on
/// the grid anyway rather than assuming it.
pub fn compose(outer: &ModulusFunction, inner: &ModulusFunction) -> ModulusFunction {
    let o = outer.eval.clone();
    let i = inner.eval.clone();
    ModulusFunction {
        name: format!("compose({},{})", outer.name, inner.name),
        claims_unbounded: outer.claims_unbounded && inner.claims_unbounded,
        eval: Arc::new(move |t| o(i(t))),
    }
}

/// Errors from catalog lookup and evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum ModulusError {
    UnknownBuiltin { name: String },
    InvalidExponent { p: f64 },
    NonFiniteValue { name: String, at: f64 },
}

impl core::fmt::Display for ModulusError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModulusError::UnknownBuiltin { name } => {
                write!(f, "unknown builtin modulus {name:?}; known: {}", builtin_names().join(", "))
            }
            ModulusError::InvalidExponent { p } => {
                write!(f, "pow exponent must lie in (0, 1], got {p}")
            }
            ModulusError::NonFiniteValue { name, at } => {
                write!(f, "modulus {name:?} returned a non-finite value at t = {at}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModulusError {}

/// Names accepted by [`builtin_modulus`]. `pow` takes its exponent as part of
/// the name, e.g. `pow(0.5)`.
pub fn builtin_names() -> Vec<&'static str> {
    alloc::vec!["identity", "log1p", "sqrt", "pow(p)", "bounded_rational"]
}

/// Look up a catalog modulus by name.
///
/// * `identity`: f(t) = t.
/// * `log1p`: f(t) = ln(1 + t), the gauge behind logarithmic density.
/// * `sqrt`: f(t) = t^(1/2), same as `pow(0.5)`.
/// * `pow(p)` for p in (0, 1]: f(t) = t^p.
/// * `bounded_rational`: f(t) = t / (1 + t). A genuine modulus but bounded,
///   kept in the catalog so rejection paths stay exercised.
pub fn builtin_modulus(name: &str) -> Result<ModulusFunction, ModulusError> {
    match name {
        "identity" => Ok(ModulusFunction::new("identity", true, |t| t)),
        "log1p" => Ok(ModulusFunction::new("log1p", true, fmath::ln_1p)),
        "sqrt" => Ok(ModulusFunction::new("sqrt", true, fmath::sqrt)),
        "bounded_rational" => Ok(ModulusFunction::new("bounded_rational", false, |t| {
            t / (1.0 + t)
        })),
        other => {
            if let Some(inner) = other.strip_prefix("pow(").and_then(|s| s.strip_suffix(')')) {
                let p: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| ModulusError::UnknownBuiltin { name: other.to_string() })?;
                return power_modulus(p);
            }
            Err(ModulusError::UnknownBuiltin { name: other.to_string() })
        }
    }
}

/// f(t) = t^p for a fixed exponent p in (0, 1]. Exponents above 1 break
/// subadditivity and are refused here rather than left for validation.
pub fn power_modulus(p: f64) -> Result<ModulusFunction, ModulusError> {
    if !(p > 0.0 && p <= 1.0) || !p.is_finite() {
        return Err(ModulusError::InvalidExponent { p });
    }
    Ok(ModulusFunction::new(format!("pow({p})"), true, move |t| {
        fmath::powf(t, p)
    }))
}

/// The grid the axioms are sampled on: the integers 0..=64 first, so small
/// counterexamples surface with small witnesses, then 120 logarithmically
/// spaced points from 1e-3 to 1e6.
pub fn default_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=64).map(|k| k as f64).collect();
    let lo: f64 = -3.0;
    let hi: f64 = 6.0;
    let steps = 120;
    for j in 0..=steps {
        let e = lo + (hi - lo) * (j as f64) / (steps as f64);
        grid.push(fmath::powf(10.0, e));
    }
    grid
}

/// One sampled axiom: whether it held on the grid and, if not, the first
/// violating input(s).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub holds: bool,
    /// For monotonicity the two offending arguments, for subadditivity the
    /// pair (x, y) with f(x+y) > f(x) + f(y), for the origin the single
    /// argument 0 repeated.
    pub witness: Option<(f64, f64)>,
    pub detail: String,
}

impl AxiomCheck {
    fn ok(detail: impl Into<String>) -> AxiomCheck {
        AxiomCheck { holds: true, witness: None, detail: detail.into() }
    }

    fn violated(witness: (f64, f64), detail: String) -> AxiomCheck {
        AxiomCheck { holds: false, witness: Some(witness), detail }
    }
}

/// Result of the doubling probe for unboundedness.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnboundednessProbe {
    /// f exceeded [`UNBOUNDED_TARGET`] at the reported argument.
    Confirmed { arg: f64, value: f64 },
    /// f stayed at or below `sup_seen` all the way to the argument cap. Not a
    /// proof of boundedness, and reported in exactly those words.
    InconclusiveBounded { arg_cap: f64, sup_seen: f64 },
}

impl UnboundednessProbe {
    pub fn confirmed(&self) -> bool {
        matches!(self, UnboundednessProbe::Confirmed { .. })
    }
}

/// Everything [`validate_modulus`] learned about a candidate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub claims_unbounded: bool,
    pub zero_at_origin: AxiomCheck,
    pub monotone: AxiomCheck,
    pub subadditive: AxiomCheck,
    pub unbounded: UnboundednessProbe,
}

impl ValidationReport {
    /// The three axioms held on the grid. Says nothing about unboundedness.
    pub fn is_valid_modulus(&self) -> bool {
        self.zero_at_origin.holds && self.monotone.holds && self.subadditive.holds
    }

    /// Valid and the probe confirmed growth past the target. This is the
    /// predicate density operations care about.
    pub fn is_valid_unbounded(&self) -> bool {
        self.is_valid_modulus() && self.unbounded.confirmed()
    }
}

/// Validate on [`default_grid`].
pub fn validate_modulus(f: &ModulusFunction) -> Result<ValidationReport, ModulusError> {
    validate_on_grid(f, &default_grid())
}

/// Sample the axioms on an explicit grid. The grid order matters for which
/// witness is reported first; the default grid leads with small integers so
/// that, for instance, t^2 fails subadditivity at (1, 1).
pub fn validate_on_grid(
    f: &ModulusFunction,
    grid: &[f64],
) -> Result<ValidationReport, ModulusError> {
    let value_at = |t: f64| -> Result<f64, ModulusError> {
        let v = f.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModulusError::NonFiniteValue { name: f.name.clone(), at: t })
        }
    };

    let at_zero = value_at(0.0)?;
    let zero_at_origin = if fmath::abs(at_zero) == 0.0 {
        AxiomCheck::ok("f(0) = 0 exactly")
    } else {
        AxiomCheck::violated((0.0, 0.0), format!("f(0) = {at_zero}, expected exactly 0"))
    };

    // Monotonicity: compare along the grid sorted ascending.
    let mut sorted: Vec<f64> = grid.iter().copied().filter(|t| *t >= 0.0).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    sorted.dedup();

    let mut monotone = AxiomCheck::ok("nondecreasing on the sample grid");
    let mut prev: Option<(f64, f64)> = None;
    for &t in &sorted {
        let v = value_at(t)?;
        if let Some((pt, pv)) = prev {
            if v + MONOTONE_TOL < pv {
                monotone = AxiomCheck::violated(
                    (pt, t),
                    format!("f({pt}) = {pv} > f({t}) = {v}"),
                );
                break;
            }
        }
        prev = Some((t, v));
    }

    // Subadditivity over grid pairs, in the grid's own order: the default
    // grid leads with small integers, so the first reported witness is the
    // smallest interesting one.
    let unsorted: Vec<f64> = grid.iter().copied().filter(|t| *t >= 0.0).collect();
    let mut subadditive = AxiomCheck::ok("f(x+y) <= f(x) + f(y) on all grid pairs");
    'outer: for (i, &x) in unsorted.iter().enumerate() {
        for &y in &unsorted[..=i] {
            let fx = value_at(x)?;
            let fy = value_at(y)?;
            let fxy = value_at(x + y)?;
            let bound = fx + fy;
            let slack = SUBADD_REL_TOL * (1.0 + fmath::abs(bound));
            if fxy > bound + slack {
                subadditive = AxiomCheck::violated(
                    (x, y),
                    format!("f({x} + {y}) = {fxy} exceeds f({x}) + f({y}) = {bound}"),
                );
                break 'outer;
            }
        }
    }

    // Doubling probe from t = 1, never evaluating past the argument cap.
    // Slow gauges (logarithms, small fractional powers) cannot reach the
    // target within the cap; they report inconclusive-bounded, which is a
    // statement about the probe, not about the function.
    let mut arg = 1.0_f64;
    let mut sup_seen = value_at(0.0)?;
    let unbounded = loop {
        let v = value_at(arg)?;
        sup_seen = fmath::max(sup_seen, v);
        if v > UNBOUNDED_TARGET {
            break UnboundednessProbe::Confirmed { arg, value: v };
        }
        let next = arg * 2.0;
        if next > PROBE_ARG_CAP {
            break UnboundednessProbe::InconclusiveBounded { arg_cap: PROBE_ARG_CAP, sup_seen };
        }
        arg = next;
    };

    Ok(ValidationReport {
        name: f.name.clone(),
        claims_unbounded: f.claims_unbounded,
        zero_at_origin,
        monotone,
        subadditive,
        unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force subadditivity oracle on a dense pair set, independent of
    /// the validator's grid and tolerances.
    fn subadditive_everywhere(f: &ModulusFunction, args: &[f64]) -> bool {
        for &x in args {
            for &y in args {
                let lhs = f.eval(x + y);
                let rhs = f.eval(x) + f.eval(y);
                if lhs > rhs + 1e-9 * (1.0 + rhs.abs()) {
                    return false;
                }
            }
        }
        true
    }

    fn dense_args() -> Vec<f64> {
        let mut v: Vec<f64> = (0..200).map(|k| k as f64 * 0.37).collect();
        v.extend((0..40).map(|k| 10f64.powf(k as f64 * 0.2)));
        v
    }

    #[test]
    fn catalog_members_pass_validation() {
        for name in ["identity", "log1p", "sqrt", "pow(0.25)", "pow(1)"] {
            let m = builtin_modulus(name).expect("catalog lookup");
            assert!(
                subadditive_everywhere(&m, &dense_args()),
                "oracle rejects {name} before the validator even runs"
            );
            let report = validate_modulus(&m).expect("finite values");
            assert!(report.is_valid_modulus(), "{name} failed validation: {report:?}");
            assert!(m.claims_unbounded(), "{name} carries the unbounded claim");
        }
    }

    #[test]
    fn probe_confirms_fast_gauges_and_stays_honest_on_slow_ones() {
        // identity reaches 1e6 within a handful of doublings.
        let id = builtin_modulus("identity").unwrap();
        let report = validate_modulus(&id).unwrap();
        match report.unbounded {
            UnboundednessProbe::Confirmed { arg, value } => {
                assert!(value > UNBOUNDED_TARGET);
                assert!(arg <= 4e6, "identity confirms early, not at {arg}");
            }
            other => panic!("identity must confirm: {other:?}"),
        }

        // ln(1 + t) tops out near 27.6 at the argument cap: the probe cannot
        // confirm it and must say inconclusive-bounded rather than guess.
        let log = builtin_modulus("log1p").unwrap();
        let report = validate_modulus(&log).unwrap();
        match report.unbounded {
            UnboundednessProbe::InconclusiveBounded { sup_seen, arg_cap } => {
                assert!(sup_seen < 30.0, "log1p stays tiny on the probe: {sup_seen}");
                assert_eq!(arg_cap, PROBE_ARG_CAP);
            }
            other => panic!("log1p cannot reach the target within the cap: {other:?}"),
        }
        assert!(log.claims_unbounded(), "the claim is separate from the probe");
        assert!(report.is_valid_modulus());
    }

    #[test]
    fn log1p_concavity_oracle_agrees_with_validator() {
        // ln(1 + x + y) <= ln(1+x) + ln(1+y) because (1+x)(1+y) >= 1+x+y
        // for x, y >= 0. Check the exact product inequality as the oracle.
        let args = dense_args();
        for &x in &args {
            for &y in &args {
                assert!(
                    (1.0 + x) * (1.0 + y) >= 1.0 + x + y,
                    "product inequality must hold at x={x}, y={y}"
                );
            }
        }
        let m = builtin_modulus("log1p").unwrap();
        assert!(validate_modulus(&m).unwrap().is_valid_modulus());
    }

    #[test]
    fn square_fails_subadditivity_at_unit_pair() {
        // Oracle first: f(1+1) = 4 > f(1) + f(1) = 2, so (1, 1) is a real
        // witness, and it is the first one in grid order.
        let sq = ModulusFunction::new("square", true, |t| t * t);
        assert!(sq.eval(2.0) > sq.eval(1.0) + sq.eval(1.0));

        let report = validate_modulus(&sq).expect("finite values");
        assert!(!report.subadditive.holds, "t^2 must fail subadditivity");
        assert_eq!(
            report.subadditive.witness,
            Some((1.0, 1.0)),
            "integers are scanned first, so the minimal witness is (1, 1): {:?}",
            report.subadditive.detail
        );
        assert!(report.zero_at_origin.holds);
        assert!(report.monotone.holds);
    }

    #[test]
    fn bounded_rational_is_valid_but_probe_stays_inconclusive() {
        let m = builtin_modulus("bounded_rational").unwrap();
        assert!(!m.claims_unbounded());
        let report = validate_modulus(&m).unwrap();
        assert!(report.is_valid_modulus(), "t/(1+t) satisfies all three axioms");
        match report.unbounded {
            UnboundednessProbe::InconclusiveBounded { sup_seen, arg_cap } => {
                assert!(sup_seen <= 1.0, "t/(1+t) never exceeds 1, saw {sup_seen}");
                assert_eq!(arg_cap, PROBE_ARG_CAP);
            }
            other => panic!("probe should not confirm a bounded function: {other:?}"),
        }
        assert!(!report.is_valid_unbounded());
    }

    #[test]
    fn decreasing_function_reports_monotonicity_witness() {
        let dec = ModulusFunction::new("one_minus", true, |t| if t == 0.0 { 0.0 } else { 1.0 / t });
        let report = validate_modulus(&dec).unwrap();
        assert!(!report.monotone.holds);
        let (a, b) = report.monotone.witness.expect("violation carries a witness");
        assert!(a < b, "witness must be an ordered pair, got ({a}, {b})");
    }

    #[test]
    fn origin_violation_is_exact_not_toleranced() {
        let shifted = ModulusFunction::new("shifted", true, |t| t + 1e-15);
        let report = validate_modulus(&shifted).unwrap();
        assert!(!report.zero_at_origin.holds, "f(0) must be exactly zero");
    }

    #[test]
    fn pow_exponent_outside_unit_interval_is_refused() {
        assert_eq!(power_modulus(1.5).unwrap_err(), ModulusError::InvalidExponent { p: 1.5 });
        assert_eq!(power_modulus(0.0).unwrap_err(), ModulusError::InvalidExponent { p: 0.0 });
        assert!(builtin_modulus("pow(2)").is_err());
        assert!(builtin_modulus("pow(0.5)").is_ok());
    }

    #[test]
    fn unknown_builtin_lists_catalog() {
        let err = builtin_modulus("cosh").unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("identity") && msg.contains("log1p"), "error names the catalog: {msg}");
    }

    #[test]
    fn composition_of_catalog_moduli_validates() {
        let combos = [("log1p", "sqrt"), ("sqrt", "log1p"), ("log1p", "identity"), ("sqrt", "sqrt")];
        for (a, b) in combos {
            let outer = builtin_modulus(a).unwrap();
            let inner = builtin_modulus(b).unwrap();
            let c = compose(&outer, &inner);
            assert!(c.claims_unbounded(), "both factors claim unbounded");
            let report = validate_modulus(&c).unwrap();
            assert!(
                report.is_valid_modulus(),
                "compose({a},{b}) should satisfy the axioms: {report:?}"
            );
        }
    }

    #[test]
    fn composition_with_bounded_factor_keeps_bounded_claim() {
        let outer = builtin_modulus("bounded_rational").unwrap();
        let inner = builtin_modulus("identity").unwrap();
        let c = compose(&outer, &inner);
        assert!(!c.claims_unbounded());
        let report = validate_modulus(&c).unwrap();
        assert!(report.is_valid_modulus());
        assert!(!report.unbounded.confirmed());
    }

    #[test]
    fn non_finite_evaluator_is_an_error_not_a_panic() {
        let bad = ModulusFunction::new("blows_up", true, |t| if t > 1e3 { f64::NAN } else { t });
        let err = validate_modulus(&bad).unwrap_err();
        match err {
            ModulusError::NonFiniteValue { name, .. } => assert_eq!(name, "blows_up"),
            other => panic!("expected NonFiniteValue, got {other:?}"),
        }
    }

    proptest::proptest! {
        #[test]
        fn probe_never_confirms_functions_capped_below_target(cap in 1.0f64..1e5) {
            let m = ModulusFunction::new("capped", false, move |t| fmath::min(t, cap));
            let report = validate_modulus(&m).unwrap();
            proptest::prop_assert!(!report.unbounded.confirmed());
        }

        #[test]
        fn scaled_identity_always_validates(scale in 1e-6f64..1e3) {
            let m = ModulusFunction::new("scaled", true, move |t| scale * t);
            let report = validate_modulus(&m).unwrap();
            proptest::prop_assert!(report.is_valid_modulus());
        }
    }
}
