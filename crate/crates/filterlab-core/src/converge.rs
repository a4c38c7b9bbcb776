//! Filter-relative limits, Cauchy certificates, cluster points, and point
//! extraction from shrinking region chains.
//!
//! A sequence here is a [`SequenceSpec`]: a named rule producing one vector
//! per index, inside a declared space model. Sequences are swept through
//! cursors so that running transforms (the averaging transform in
//! particular) stay O(1) per step instead of O(n).
//!
//! Every question is answered relative to a [`NatFilter`] and reported as a
//! [`Verdict`]:
//!
//! * limit: for each seminorm p and each epsilon in the grid, the index set
//!   where p(x_n - c) stays within epsilon must be a filter member;
//! * Cauchy: for each p and epsilon there must be a filter member on which
//!   the sequence has p-diameter at most epsilon. The search anchors the
//!   diameter at sampled indices: if the far set of some anchor (threshold
//!   epsilon/2) is filter-small, the triangle inequality certifies the
//!   pairwise bound. A Cauchy sequence admits anchors in every filter
//!   member, so a spread anchor schedule failing everywhere is reported as
//!   `Fails` with the per-anchor evidence attached;
//! * cluster point: every epsilon-neighborhood must recur stationarily,
//!   which is membership of the far set, negated.
//!
//! All positive verdicts are horizon-stamped certificates, not proofs about
//! the infinite tail; the supporting notes always name the horizon used.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::filters::{FilterError, NatFilter};
use crate::fmath;
use crate::natset::{DensityParams, IndexMap, NatSet, NatSetError};
use crate::spaces::{SpaceError, SpaceModel, Vector};
use crate::verdict::{Check, Outcome, Verdict};

/// Sweeps need at least a handful of indices before any verdict makes sense.
const MIN_SWEEP_HORIZON: u64 = 16;

/// Anchors tried by the Cauchy search: every index up to this bound, then
/// powers of two up to half the horizon.
const DENSE_ANCHORS: u64 = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum ConvergeError {
    Space(SpaceError),
    Set(NatSetError),
    Filter(FilterError),
    IndexOutOfRange { index: u64, max: u64 },
    EmptyEpsGrid,
    HorizonTooSmall { available: u64, needed: u64 },
    /// An audit refused to run because a precondition was not certified.
    AuditSkipped { reason: String },
    /// A region chain failed the nesting requirement at the given level.
    NestingBroken { level: usize, reason: String },
    /// A region chain is nested but its diameters do not shrink, so it
    /// cannot be a Cauchy chain; the full diameter sequence is attached.
    NotCauchyChain { level: usize, diameter: f64, required: f64, diameters: Vec<f64> },
    InvalidRegion { level: usize, reason: String },
}

impl From<SpaceError> for ConvergeError {
    fn from(e: SpaceError) -> ConvergeError {
        ConvergeError::Space(e)
    }
}

impl From<NatSetError> for ConvergeError {
    fn from(e: NatSetError) -> ConvergeError {
        ConvergeError::Set(e)
    }
}

impl From<FilterError> for ConvergeError {
    fn from(e: FilterError) -> ConvergeError {
        ConvergeError::Filter(e)
    }
}

impl core::fmt::Display for ConvergeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConvergeError::Space(e) => write!(f, "{e}"),
            ConvergeError::Set(e) => write!(f, "{e}"),
            ConvergeError::Filter(e) => write!(f, "{e}"),
            ConvergeError::IndexOutOfRange { index, max } => {
                write!(f, "index {index} outside the sequence domain [1, {max}]")
            }
            ConvergeError::EmptyEpsGrid => write!(f, "the epsilon grid is empty"),
            ConvergeError::HorizonTooSmall { available, needed } => {
                write!(f, "effective horizon {available} is below the minimum {needed}")
            }
            ConvergeError::AuditSkipped { reason } => write!(f, "audit skipped: {reason}"),
            ConvergeError::NestingBroken { level, reason } => {
                write!(f, "region {level} is not contained in region {}: {reason}", level - 1)
            }
            ConvergeError::NotCauchyChain { level, diameter, required, .. } => write!(
                f,
                "region chain is not Cauchy: diameter {diameter} at level {level} exceeds the required {required}"
            ),
            ConvergeError::InvalidRegion { level, reason } => {
                write!(f, "invalid region at level {level}: {reason}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConvergeError {}

// ----------------------------------------------------------------------
// Sequences
// ----------------------------------------------------------------------

#[derive(Clone)]
enum SeqKind {
    Closure(Arc<dyn Fn(u64) -> Vector + Send + Sync>),
    /// Running average of the inner sequence.
    Mean(Box<SequenceSpec>),
    /// The inner sequence read through an index map.
    Mapped { inner: Box<SequenceSpec>, map: IndexMap },
}

/// A named vector sequence in a space model, indexed from 1.
///
/// Closures must be shape-stable: every produced vector must fit the
/// declared space. The constructor probes the first index; a closure that
/// changes shape afterwards will surface as a panic during sweeps.
#[derive(Clone)]
pub struct SequenceSpec {
    name: String,
    space: SpaceModel,
    kind: SeqKind,
    bound: Option<f64>,
    max_index: u64,
}

impl core::fmt::Debug for SequenceSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SequenceSpec")
            .field("name", &self.name)
            .field("space", &self.space.describe())
            .field("bound", &self.bound)
            .field("max_index", &self.max_index)
            .finish()
    }
}

impl SequenceSpec {
    pub fn from_fn(
        name: impl Into<String>,
        space: SpaceModel,
        f: impl Fn(u64) -> Vector + Send + Sync + 'static,
    ) -> Result<SequenceSpec, ConvergeError> {
        let probe = f(1);
        space.check_vector(&probe)?;
        Ok(SequenceSpec {
            name: name.into(),
            space,
            kind: SeqKind::Closure(Arc::new(f)),
            bound: None,
            max_index: u64::MAX,
        })
    }

    /// Declare a bound C with max-seminorm of every term at most C. The
    /// claim is metadata: audits that need boundedness verify it on the
    /// indices they visit.
    pub fn with_bound(mut self, bound: f64) -> SequenceSpec {
        self.bound = Some(bound);
        self
    }

    /// Restrict the domain to [1, max_index].
    pub fn with_max_index(mut self, max_index: u64) -> SequenceSpec {
        self.max_index = self.max_index.min(max_index);
        self
    }

    /// The running-average transform. Averages commute with the bound: if
    /// every term sits inside the C-ball, so does every mean.
    pub fn cesaro(self) -> SequenceSpec {
        SequenceSpec {
            name: format!("cesaro({})", self.name),
            space: self.space.clone(),
            bound: self.bound,
            max_index: self.max_index,
            kind: SeqKind::Mean(Box::new(self)),
        }
    }

    /// Read the sequence through an index map: term n becomes x(g(n)). The
    /// domain shrinks to the longest prefix the map keeps inside the inner
    /// domain.
    pub fn compose(self, map: IndexMap) -> SequenceSpec {
        let max_index = map.prefix_within(self.max_index, u64::MAX);
        SequenceSpec {
            name: format!("compose({},{})", self.name, map.describe()),
            space: self.space.clone(),
            bound: self.bound,
            max_index,
            kind: SeqKind::Mapped { inner: Box::new(self), map },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn max_index(&self) -> u64 {
        self.max_index
    }

    /// Random access. O(1) for closures and compositions of closures, O(n)
    /// for running averages.
    pub fn at(&self, n: u64) -> Result<Vector, ConvergeError> {
        if n == 0 || n > self.max_index {
            return Err(ConvergeError::IndexOutOfRange { index: n, max: self.max_index });
        }
        match &self.kind {
            SeqKind::Closure(f) => Ok(f(n)),
            SeqKind::Mean(inner) => {
                let mut sum: Option<Vector> = None;
                for (_, x) in inner.cursor_up_to(n) {
                    sum = Some(match sum {
                        None => x,
                        Some(s) => s.add(&x).expect("sequence closures must be shape-stable"),
                    });
                }
                Ok(sum.expect("n >= 1 so the average saw at least one term").scale(1.0 / n as f64))
            }
            SeqKind::Mapped { inner, map } => inner.at(map.apply(n)),
        }
    }

    /// Ordered sweep over indices 1..=min(h, max_index), yielding one
    /// (index, term) pair per step.
    pub fn cursor_up_to(&self, h: u64) -> SeqCursor<'_> {
        let state = match &self.kind {
            SeqKind::Mean(inner) => {
                CursorState::Mean { inner: Box::new(inner.cursor_up_to(h.min(self.max_index))), sum: None }
            }
            _ => CursorState::Plain,
        };
        SeqCursor { seq: self, next: 1, stop: h.min(self.max_index), state }
    }
}

enum CursorState<'a> {
    Plain,
    Mean { inner: Box<SeqCursor<'a>>, sum: Option<Vector> },
}

pub struct SeqCursor<'a> {
    seq: &'a SequenceSpec,
    next: u64,
    stop: u64,
    state: CursorState<'a>,
}

impl Iterator for SeqCursor<'_> {
    type Item = (u64, Vector);

    fn next(&mut self) -> Option<(u64, Vector)> {
        if self.next > self.stop {
            return None;
        }
        let n = self.next;
        self.next += 1;
        let value = match (&self.seq.kind, &mut self.state) {
            (SeqKind::Closure(f), _) => f(n),
            (SeqKind::Mapped { inner, map }, _) => inner
                .at(map.apply(n))
                .expect("composed domain was clamped to the inner domain"),
            (SeqKind::Mean(_), CursorState::Mean { inner, sum }) => {
                let (_, x) = inner.next().expect("mean cursor runs in step with its inner cursor");
                let new_sum = match sum.take() {
                    None => x,
                    Some(s) => s.add(&x).expect("sequence closures must be shape-stable"),
                };
                *sum = Some(new_sum.clone());
                new_sum.scale(1.0 / n as f64)
            }
            (SeqKind::Mean(_), CursorState::Plain) => {
                unreachable!("mean cursors always carry mean state")
            }
        };
        Some((n, value))
    }
}

// ----------------------------------------------------------------------
// Check parameters
// ----------------------------------------------------------------------

/// Knobs shared by the limit, Cauchy and cluster checks.
#[derive(Clone, Debug)]
pub struct CheckParams {
    /// Neighborhood radii, checked independently.
    pub eps_grid: Vec<f64>,
    /// Horizon and density estimator settings for filter membership.
    pub density: DensityParams,
}

impl Default for CheckParams {
    fn default() -> CheckParams {
        CheckParams { eps_grid: vec![1.0, 0.1, 0.01, 0.001], density: DensityParams::default() }
    }
}

impl CheckParams {
    pub fn with_horizon(horizon: u64) -> CheckParams {
        CheckParams { density: DensityParams::with_horizon(horizon), ..CheckParams::default() }
    }

    pub fn with_eps(mut self, eps_grid: Vec<f64>) -> CheckParams {
        self.eps_grid = eps_grid;
        self
    }
}

fn sweep_horizon(seq: &SequenceSpec, params: &CheckParams) -> Result<u64, ConvergeError> {
    if params.eps_grid.is_empty() {
        return Err(ConvergeError::EmptyEpsGrid);
    }
    let h = params.density.horizon.min(seq.max_index());
    if h < MIN_SWEEP_HORIZON {
        return Err(ConvergeError::HorizonTooSmall { available: h, needed: MIN_SWEEP_HORIZON });
    }
    Ok(h)
}

/// One pass over the sequence: p(x_n - reference) for n in 1..=h.
fn seminorm_gaps(
    seq: &SequenceSpec,
    reference: &Vector,
    label: &str,
    h: u64,
) -> Result<Vec<f64>, ConvergeError> {
    let mut gaps = Vec::with_capacity(h as usize);
    for (_, x) in seq.cursor_up_to(h) {
        gaps.push(seq.space().seminorm(label, &x.sub(reference)?)?);
    }
    Ok(gaps)
}

fn exceptional_set(gaps: &[f64], threshold: f64, h: u64) -> Result<NatSet, ConvergeError> {
    let indices: Vec<u64> = gaps
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > threshold)
        .map(|(i, _)| i as u64 + 1)
        .collect();
    Ok(NatSet::sampled(indices, h)?)
}

fn summarize(v: &Verdict) -> String {
    v.checks
        .first()
        .map(|c| c.note.clone())
        .unwrap_or_else(|| String::from("no evidence recorded"))
}

// ----------------------------------------------------------------------
// Limit, Cauchy, cluster
// ----------------------------------------------------------------------

/// Is `candidate` the filter limit of the sequence? For each seminorm p and
/// epsilon, the set where p(x_n - candidate) <= eps must be a filter member.
pub fn f_limit_check(
    seq: &SequenceSpec,
    candidate: &Vector,
    filter: &NatFilter,
    params: &CheckParams,
) -> Result<Verdict, ConvergeError> {
    seq.space().check_vector(candidate)?;
    let h = sweep_horizon(seq, params)?;
    let density = DensityParams { horizon: h, ..params.density };
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    for label in seq.space().seminorm_labels() {
        let gaps = seminorm_gaps(seq, candidate, &label, h)?;
        for &eps in &params.eps_grid {
            let far = exceptional_set(&gaps, eps, h)?;
            let far_count = far.count(h)?;
            let member = filter.member(&far.complement(), &density)?;
            warnings.extend(member.warnings.iter().cloned());
            checks.push(Check::new(
                format!("limit[p={label}, eps={eps}]"),
                member.outcome,
                format!(
                    "{far_count} indices farther than {eps} up to {h}; near-set membership: {}",
                    summarize(&member)
                ),
            ));
        }
    }
    let mut verdict = Verdict::from_checks(checks);
    for w in warnings {
        verdict = verdict.with_warning(w);
    }
    Ok(verdict)
}

fn anchor_schedule(h: u64) -> Vec<u64> {
    let mut anchors: Vec<u64> = (1..=DENSE_ANCHORS.min(h)).collect();
    let mut p = 16u64;
    while p <= h / 2 {
        anchors.push(p);
        p *= 2;
    }
    anchors
}

/// Is the sequence filter-Cauchy? For each seminorm p and epsilon, search
/// for an anchor index a whose far set {n : p(x_n - x_a) > eps/2} has a
/// filter-member complement; on that complement the pairwise p-diameter is
/// at most eps. Failure everywhere on the anchor schedule is reported as
/// `Fails`: a Cauchy sequence admits working anchors inside every filter
/// member, so a spread schedule cannot miss them all.
pub fn f_cauchy_check(
    seq: &SequenceSpec,
    filter: &NatFilter,
    params: &CheckParams,
) -> Result<Verdict, ConvergeError> {
    let h = sweep_horizon(seq, params)?;
    let density = DensityParams { horizon: h, ..params.density };
    let anchors = anchor_schedule(h);
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    for label in seq.space().seminorm_labels() {
        // Outcome per epsilon, filled in as anchors are tried. One sweep
        // per anchor serves the whole grid.
        let mut pending: Vec<f64> = params.eps_grid.clone();
        let mut best: Vec<(f64, Outcome, String)> = Vec::new();
        let mut saw_inconclusive = vec![false; params.eps_grid.len()];
        for &a in &anchors {
            if pending.is_empty() {
                break;
            }
            let xa = seq.at(a)?;
            let gaps = seminorm_gaps(seq, &xa, &label, h)?;
            let mut still_pending = Vec::new();
            for &eps in &pending {
                let far = exceptional_set(&gaps, eps / 2.0, h)?;
                let member = filter.member(&far.complement(), &density)?;
                warnings.extend(member.warnings.iter().cloned());
                match member.outcome {
                    Outcome::Holds => {
                        best.push((
                            eps,
                            Outcome::Holds,
                            format!(
                                "anchored at {a}: indices within {} of x_{a} form a filter member, so the pairwise diameter there is at most {eps} ({})",
                                eps / 2.0,
                                summarize(&member)
                            ),
                        ));
                    }
                    _ => {
                        if member.outcome == Outcome::Inconclusive {
                            let slot = params.eps_grid.iter().position(|&e| e == eps);
                            if let Some(i) = slot {
                                saw_inconclusive[i] = true;
                            }
                        }
                        still_pending.push(eps);
                    }
                }
            }
            pending = still_pending;
        }
        for &eps in &pending {
            let slot = params.eps_grid.iter().position(|&e| e == eps);
            let inconclusive = slot.map(|i| saw_inconclusive[i]).unwrap_or(false);
            if inconclusive {
                best.push((
                    eps,
                    Outcome::Inconclusive,
                    format!(
                        "no anchor among {} candidates certified a small far-set, and at least one attempt did not settle",
                        anchors.len()
                    ),
                ));
            } else {
                best.push((
                    eps,
                    Outcome::Fails,
                    format!(
                        "every anchor on the schedule ({} candidates up to {}) has a certified-substantial far-set at radius {}",
                        anchors.len(),
                        anchors.last().copied().unwrap_or(1),
                        eps / 2.0
                    ),
                ));
            }
        }
        best.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(core::cmp::Ordering::Equal));
        for (eps, outcome, note) in best {
            checks.push(Check::new(format!("cauchy[p={label}, eps={eps}]"), outcome, note));
        }
    }
    let mut verdict = Verdict::from_checks(checks);
    for w in warnings {
        verdict = verdict.with_warning(w);
    }
    Ok(verdict)
}

/// Is `candidate` a filter cluster point? Every epsilon-neighborhood must
/// be visited stationarily: the far set must fail filter membership.
pub fn cluster_point_check(
    seq: &SequenceSpec,
    candidate: &Vector,
    filter: &NatFilter,
    params: &CheckParams,
) -> Result<Verdict, ConvergeError> {
    seq.space().check_vector(candidate)?;
    let h = sweep_horizon(seq, params)?;
    let density = DensityParams { horizon: h, ..params.density };
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    for label in seq.space().seminorm_labels() {
        let gaps = seminorm_gaps(seq, candidate, &label, h)?;
        for &eps in &params.eps_grid {
            let far = exceptional_set(&gaps, eps, h)?;
            let member = filter.member(&far, &density)?;
            warnings.extend(member.warnings.iter().cloned());
            let outcome = member.outcome.negate();
            checks.push(Check::new(
                format!("cluster[p={label}, eps={eps}]"),
                outcome,
                format!(
                    "the set within {eps} of the candidate is stationary iff the far set is not a member; far-set membership: {}",
                    summarize(&member)
                ),
            ));
        }
    }
    let mut verdict = Verdict::from_checks(checks);
    for w in warnings {
        verdict = verdict.with_warning(w);
    }
    Ok(verdict)
}

/// Audit of the rule "a Cauchy sequence converges to each of its cluster
/// points". Refuses to run unless both preconditions are certified; then a
/// certified limit confirms the rule, and a refuted limit exposes an
/// inconsistency between the tolerances used by the three certificates.
pub fn cluster_implies_limit_audit(
    seq: &SequenceSpec,
    candidate: &Vector,
    filter: &NatFilter,
    params: &CheckParams,
) -> Result<Verdict, ConvergeError> {
    let cauchy = f_cauchy_check(seq, filter, params)?;
    if !cauchy.holds() {
        return Err(ConvergeError::AuditSkipped {
            reason: format!(
                "the sequence is not certified Cauchy (outcome {:?}), so the rule's hypothesis is missing",
                cauchy.outcome
            ),
        });
    }
    let cluster = cluster_point_check(seq, candidate, filter, params)?;
    if !cluster.holds() {
        return Err(ConvergeError::AuditSkipped {
            reason: format!(
                "the candidate is not a certified cluster point (outcome {:?})",
                cluster.outcome
            ),
        });
    }
    let limit = f_limit_check(seq, candidate, filter, params)?;
    let conclusion = match limit.outcome {
        Outcome::Holds => Check::new(
            "cauchy + cluster forces the limit",
            Outcome::Holds,
            "the candidate is a certified limit, as the rule requires",
        ),
        Outcome::Fails => Check::new(
            "cauchy + cluster forces the limit",
            Outcome::Fails,
            "limit refuted despite certified hypotheses: the certificates used inconsistent tolerances",
        ),
        Outcome::Inconclusive => Check::new(
            "cauchy + cluster forces the limit",
            Outcome::Inconclusive,
            "the limit check did not settle at this horizon",
        ),
    };
    let mut checks = vec![
        Check::new("hypothesis: sequence is Cauchy", Outcome::Holds, summarize(&cauchy)),
        Check::new("hypothesis: candidate is a cluster point", Outcome::Holds, summarize(&cluster)),
        conclusion,
    ];
    checks.extend(limit.checks);
    Ok(Verdict::from_checks(checks))
}

// ----------------------------------------------------------------------
// Sparse pointwise limits
// ----------------------------------------------------------------------

/// Key-by-key limit of a sequence of sparse vectors, with the evidence that
/// produced it.
#[derive(Clone, Debug)]
pub struct SparsePointwiseReport {
    /// The assembled limit; only keys with a certified nonzero value appear.
    pub limit: Vector,
    /// Every inspected key with its candidate value after zero-snapping.
    pub per_key: Vec<(String, f64)>,
    /// Keys that carried a nonzero entry at some inspected index, sorted.
    pub witnessed_support: Vec<String>,
    /// Conjunction of the per-key limit certificates and the support
    /// closure check.
    pub verdict: Verdict,
}

/// Take the filter limit of a sequence of sparse vectors one key at a time.
///
/// Each inspected key yields a scalar coordinate sequence. Its candidate
/// limit is read off the final swept index and snapped to exactly zero when
/// it lands within the finest epsilon of zero, then certified with
/// [`f_limit_check`] against the filter. A candidate read from an atypical
/// final index (a spike, say) simply fails its certificate; the report does
/// not attempt to guess a better one. The report also checks the closure
/// property that makes the sparse model work: every key the limit uses was
/// witnessed with a nonzero entry at some inspected index.
pub fn sparse_pointwise_limit(
    seq: &SequenceSpec,
    filter: &NatFilter,
    keys: &[&str],
    params: &CheckParams,
) -> Result<SparsePointwiseReport, ConvergeError> {
    if keys.is_empty() {
        return Err(ConvergeError::Space(SpaceError::InvalidSpace {
            reason: String::from("no keys to inspect"),
        }));
    }
    let h = sweep_horizon(seq, params)?;

    // One pass: record each key's scalar track and every key that shows up
    // with a nonzero entry.
    let mut tracks: Vec<Vec<f64>> =
        (0..keys.len()).map(|_| Vec::with_capacity(h as usize)).collect();
    let mut witnessed: BTreeSet<String> = BTreeSet::new();
    for (n, x) in seq.cursor_up_to(h) {
        let map = match &x {
            Vector::Sparse(map) => map,
            Vector::Dense(_) => {
                return Err(ConvergeError::Space(SpaceError::ShapeMismatch {
                    reason: format!(
                        "index {n} produced a dense vector; pointwise limits need sparse terms"
                    ),
                }))
            }
        };
        for (slot, key) in keys.iter().enumerate() {
            tracks[slot].push(map.get(*key).copied().unwrap_or(0.0));
        }
        for (k, v) in map {
            if *v != 0.0 && !witnessed.contains(k) {
                witnessed.insert(k.clone());
            }
        }
    }

    let snap = params.eps_grid.iter().copied().fold(f64::INFINITY, fmath::min);
    let scalar_space = SpaceModel::l1(1)?;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let mut per_key = Vec::new();
    let mut limit_entries: Vec<(String, f64)> = Vec::new();
    for (slot, key) in keys.iter().enumerate() {
        let track = Arc::new(core::mem::take(&mut tracks[slot]));
        let last = *track.last().expect("sweep horizon is at least the minimum");
        let candidate = if fmath::abs(last) <= snap { 0.0 } else { last };
        let scalar = {
            let len = track.len() as u64;
            let values = Arc::clone(&track);
            SequenceSpec::from_fn(
                format!("{}[{}]", seq.name(), key),
                scalar_space.clone(),
                move |n| Vector::dense(vec![values[(n - 1) as usize]]),
            )?
            .with_max_index(len)
        };
        let v = f_limit_check(&scalar, &Vector::dense(vec![candidate]), filter, params)?;
        checks.push(Check::new(
            format!("key `{key}` settles at {candidate}"),
            v.outcome,
            summarize(&v),
        ));
        checks.extend(v.checks.into_iter().map(|mut c| {
            c.label = format!("key `{key}`: {}", c.label);
            c
        }));
        warnings.extend(v.warnings);
        per_key.push(((*key).to_string(), candidate));
        if candidate != 0.0 {
            limit_entries.push(((*key).to_string(), candidate));
        }
    }

    let unwitnessed: Vec<&str> = limit_entries
        .iter()
        .map(|(k, _)| k.as_str())
        .filter(|k| !witnessed.contains(*k))
        .collect();
    checks.push(Check::new(
        "limit support inside the witnessed support union",
        if unwitnessed.is_empty() { Outcome::Holds } else { Outcome::Fails },
        if unwitnessed.is_empty() {
            format!(
                "the limit uses {} of the {} keys that carried a nonzero entry",
                limit_entries.len(),
                witnessed.len()
            )
        } else {
            format!("keys {unwitnessed:?} appear in the limit but never in the sequence")
        },
    ));

    let mut verdict = Verdict::from_checks(checks);
    for w in warnings {
        verdict = verdict.with_warning(w);
    }
    Ok(SparsePointwiseReport {
        limit: Vector::sparse(limit_entries),
        per_key,
        witnessed_support: witnessed.into_iter().collect(),
        verdict,
    })
}

// ----------------------------------------------------------------------
// Region chains
// ----------------------------------------------------------------------

/// A region in a space model, used to describe a shrinking chain.
#[derive(Clone, Debug)]
pub enum Region {
    /// All points whose max-seminorm distance to the center is at most the
    /// radius.
    Ball { center: Vector, radius: f64 },
    /// A dense coordinate box.
    Rect { lo: Vector, hi: Vector },
}

#[derive(Clone, Debug)]
pub struct ExtractParams {
    pub seed: u64,
    /// Each diameter must be at most `shrink` times the previous one.
    pub shrink: f64,
    /// How many random pairs the audit samples for the pairwise bound.
    pub pair_samples: u32,
    pub tolerance: f64,
}

impl Default for ExtractParams {
    fn default() -> ExtractParams {
        ExtractParams { seed: 7, shrink: 0.75, pair_samples: 64, tolerance: 1e-9 }
    }
}

/// The result of extracting a point sequence from a region chain.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub points: Vec<Vector>,
    /// Closed-form diameter of each region, the Cauchy modulus of the
    /// extracted sequence.
    pub diameters: Vec<f64>,
    pub audit: Verdict,
}

fn region_check(space: &SpaceModel, region: &Region, level: usize) -> Result<(), ConvergeError> {
    match region {
        Region::Ball { center, radius } => {
            space.check_vector(center)?;
            if !radius.is_finite() || *radius < 0.0 {
                return Err(ConvergeError::InvalidRegion {
                    level,
                    reason: format!("radius {radius} must be finite and nonnegative"),
                });
            }
            Ok(())
        }
        Region::Rect { lo, hi } => {
            space.check_vector(lo)?;
            space.check_vector(hi)?;
            match (lo, hi) {
                (Vector::Dense(a), Vector::Dense(b)) => {
                    if a.iter().zip(b.iter()).any(|(x, y)| x > y) {
                        return Err(ConvergeError::InvalidRegion {
                            level,
                            reason: String::from("box has lo > hi in some coordinate"),
                        });
                    }
                    Ok(())
                }
                _ => Err(ConvergeError::InvalidRegion {
                    level,
                    reason: String::from("boxes must be dense"),
                }),
            }
        }
    }
}

/// Largest p-distance between two points of the region, maximized over the
/// model's seminorms.
fn region_diameter(space: &SpaceModel, region: &Region) -> Result<f64, ConvergeError> {
    match region {
        Region::Ball { radius, .. } => Ok(2.0 * radius),
        Region::Rect { lo, hi } => {
            let width = hi.sub(lo)?;
            match space {
                SpaceModel::NormedL1 { .. } | SpaceModel::NormedLinf { .. } => {
                    Ok(space.max_seminorm(&width)?)
                }
                SpaceModel::SeminormFamily { functionals, .. } => {
                    // sup over the box of |<f, u - v>| is sum |f_i| w_i.
                    let mut worst = 0.0f64;
                    if let Vector::Dense(w) = &width {
                        for (_, f) in functionals {
                            if let Vector::Dense(coords) = f {
                                let s: f64 = coords
                                    .iter()
                                    .zip(w.iter())
                                    .map(|(&c, &wi)| fmath::abs(c) * wi)
                                    .sum();
                                worst = fmath::max(worst, s);
                            }
                        }
                    }
                    Ok(worst)
                }
                SpaceModel::SparseProduct { .. } => Err(ConvergeError::InvalidRegion {
                    level: 0,
                    reason: String::from("boxes must be dense"),
                }),
            }
        }
    }
}

fn region_nested_in(
    space: &SpaceModel,
    inner: &Region,
    outer: &Region,
    tol: f64,
) -> Result<bool, ConvergeError> {
    match (inner, outer) {
        (Region::Ball { center: ci, radius: ri }, Region::Ball { center: co, radius: ro }) => {
            let drift = space.max_seminorm(&ci.sub(co)?)?;
            Ok(drift + ri <= ro + tol)
        }
        (Region::Rect { lo: li, hi: hi_i }, Region::Rect { lo: lo_o, hi: hi_o }) => {
            match (li, hi_i, lo_o, hi_o) {
                (Vector::Dense(a), Vector::Dense(b), Vector::Dense(c), Vector::Dense(d)) => Ok(a
                    .iter()
                    .zip(c.iter())
                    .all(|(x, y)| *x >= y - tol)
                    && b.iter().zip(d.iter()).all(|(x, y)| *x <= y + tol)),
                _ => Ok(false),
            }
        }
        _ => Err(ConvergeError::InvalidRegion {
            level: 0,
            reason: String::from("region chains must not mix balls and boxes"),
        }),
    }
}

fn sample_point(space: &SpaceModel, region: &Region, rng: &mut ChaCha8Rng) -> Vector {
    match region {
        Region::Ball { center, radius } => {
            let dir = match center {
                Vector::Dense(c) => {
                    Vector::Dense(c.iter().map(|_| rng.random_range(-1.0..1.0)).collect())
                }
                Vector::Sparse(m) => Vector::Sparse(
                    m.keys().map(|k| (k.clone(), rng.random_range(-1.0..1.0))).collect(),
                ),
            };
            let scale = space.max_seminorm(&dir).unwrap_or(0.0);
            if scale < 1e-12 || *radius == 0.0 {
                center.clone()
            } else {
                center.add(&dir.scale(0.9 * radius / scale)).expect("shapes match by construction")
            }
        }
        Region::Rect { lo, hi } => match (lo, hi) {
            (Vector::Dense(a), Vector::Dense(b)) => Vector::Dense(
                a.iter()
                    .zip(b.iter())
                    .map(|(&x, &y)| x + (y - x) * rng.random::<f64>())
                    .collect(),
            ),
            _ => lo.clone(),
        },
    }
}

/// Extract a point sequence from a shrinking nested region chain and audit
/// that it is Cauchy with the chain's diameters as modulus.
///
/// The chain is validated first: every region must sit inside its
/// predecessor, and diameters must shrink geometrically (rate
/// [`ExtractParams::shrink`]). A nested chain whose diameters stall is
/// rejected with the full diameter sequence attached, because no point
/// selection from it can be forced to be Cauchy.
pub fn extract_cauchy_from_base(
    space: &SpaceModel,
    regions: &[Region],
    params: &ExtractParams,
) -> Result<Extraction, ConvergeError> {
    if regions.is_empty() {
        return Err(ConvergeError::InvalidRegion { level: 0, reason: String::from("empty chain") });
    }
    for (k, r) in regions.iter().enumerate() {
        region_check(space, r, k)?;
    }
    let mut diameters = Vec::with_capacity(regions.len());
    for r in regions {
        diameters.push(region_diameter(space, r)?);
    }
    for k in 1..regions.len() {
        if !region_nested_in(space, &regions[k], &regions[k - 1], params.tolerance)? {
            return Err(ConvergeError::NestingBroken {
                level: k,
                reason: String::from("containment fails under the max-seminorm bound"),
            });
        }
    }
    for k in 1..regions.len() {
        let required = params.shrink * diameters[k - 1] + params.tolerance;
        if diameters[k] > required {
            return Err(ConvergeError::NotCauchyChain {
                level: k,
                diameter: diameters[k],
                required,
                diameters,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let points: Vec<Vector> = regions.iter().map(|r| sample_point(space, r, &mut rng)).collect();

    let mut checks = Vec::new();
    // Each point stays inside its own region.
    let mut containment_ok = true;
    for (k, (p, r)) in points.iter().zip(regions.iter()).enumerate() {
        let inside = match r {
            Region::Ball { center, radius } => {
                space.max_seminorm(&p.sub(center)?)? <= radius + params.tolerance
            }
            Region::Rect { lo, hi } => match (p, lo, hi) {
                (Vector::Dense(x), Vector::Dense(a), Vector::Dense(b)) => x
                    .iter()
                    .zip(a.iter().zip(b.iter()))
                    .all(|(&v, (&l, &u))| v >= l - params.tolerance && v <= u + params.tolerance),
                _ => false,
            },
        };
        if !inside {
            containment_ok = false;
            checks.push(Check::new(
                format!("point {k} inside region {k}"),
                Outcome::Fails,
                "sampled point escaped its region",
            ));
        }
    }
    if containment_ok {
        checks.push(Check::new(
            "every point inside its region",
            Outcome::Holds,
            format!("{} points checked against their regions", points.len()),
        ));
    }

    // Pairwise Cauchy bound: p(x_n - x_m) <= diameter of the earlier region.
    let mut worst_slack = 0.0f64;
    let mut pair_ok = true;
    for _ in 0..params.pair_samples {
        let n = rng.random_range(0..points.len());
        let m = rng.random_range(0..points.len());
        let first = n.min(m);
        let gap = space.max_seminorm(&points[n].sub(&points[m])?)?;
        let allowed = diameters[first] + params.tolerance;
        if gap > allowed {
            pair_ok = false;
            checks.push(Check::new(
                format!("pairwise bound at ({n}, {m})"),
                Outcome::Fails,
                format!("gap {gap} exceeds the level-{first} diameter {}", diameters[first]),
            ));
        }
        worst_slack = fmath::max(worst_slack, gap);
    }
    if pair_ok {
        checks.push(Check::new(
            "pairwise gaps below the diameter modulus",
            Outcome::Holds,
            format!(
                "{} sampled pairs, largest observed gap {worst_slack:.3e}",
                params.pair_samples
            ),
        ));
    }

    // Limit audit: the deepest region's reference point is within diameter
    // of every extracted point, because both lie in the earlier region.
    let reference = match regions.last().expect("nonempty") {
        Region::Ball { center, .. } => center.clone(),
        Region::Rect { lo, hi } => lo.add(hi)?.scale(0.5),
    };
    let mut limit_ok = true;
    for (k, p) in points.iter().enumerate() {
        let gap = space.max_seminorm(&p.sub(&reference)?)?;
        if gap > diameters[k] + params.tolerance {
            limit_ok = false;
            checks.push(Check::new(
                format!("limit bound at level {k}"),
                Outcome::Fails,
                format!("gap {gap} to the deep reference exceeds diameter {}", diameters[k]),
            ));
        }
    }
    if limit_ok {
        checks.push(Check::new(
            "deep reference point is a limit with the diameter modulus",
            Outcome::Holds,
            format!("all {} points within their level's diameter of the reference", points.len()),
        ));
    }

    Ok(Extraction { points, diameters, audit: Verdict::from_checks(checks) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::builtin_modulus;

    fn scalar_space() -> SpaceModel {
        SpaceModel::l1(1).expect("dim 1 is valid")
    }

    fn scalar_seq(
        name: &str,
        f: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> SequenceSpec {
        SequenceSpec::from_fn(name, scalar_space(), move |n| Vector::dense(vec![f(n)]))
            .expect("scalar closures are shape-stable")
    }

    fn scalar(v: f64) -> Vector {
        Vector::dense(vec![v])
    }

    #[test]
    fn cesaro_mean_matches_direct_average() {
        // Oracle: for x_n = (-1)^(n+1), the running mean is 1/n at odd n
        // and exactly 0 at even n.
        let seq = scalar_seq("alt", |n| if n % 2 == 1 { 1.0 } else { -1.0 }).cesaro();
        for (n, x) in seq.cursor_up_to(50) {
            let expected = if n % 2 == 1 { 1.0 / n as f64 } else { 0.0 };
            let got = match x {
                Vector::Dense(c) => c[0],
                _ => unreachable!(),
            };
            assert!(
                (got - expected).abs() < 1e-12,
                "mean at {n}: got {got}, expected {expected}"
            );
        }
        // Random access agrees with the sweep.
        let at7 = seq.at(7).unwrap();
        assert_eq!(at7, scalar(1.0 / 7.0));
    }

    #[test]
    fn cesaro_smooths_the_alternating_sequence() {
        let seq = scalar_seq("alt", |n| if n % 2 == 1 { 1.0 } else { -1.0 });
        let params = CheckParams::with_horizon(10_000).with_eps(vec![0.1, 0.01]);
        // The raw sequence has no ordinary limit at 0...
        let raw = f_limit_check(&seq, &scalar(0.0), &NatFilter::frechet(), &params).unwrap();
        assert!(raw.fails(), "{raw:?}");
        // ...but its running average converges to 0 classically.
        let mean = seq.cesaro();
        let smoothed = f_limit_check(&mean, &scalar(0.0), &NatFilter::frechet(), &params).unwrap();
        assert!(smoothed.holds(), "{smoothed:?}");
    }

    #[test]
    fn frechet_limit_of_the_reciprocal_sequence() {
        let seq = scalar_seq("recip", |n| 1.0 / n as f64);
        let params = CheckParams::with_horizon(10_000).with_eps(vec![0.1, 0.01]);
        let good = f_limit_check(&seq, &scalar(0.0), &NatFilter::frechet(), &params).unwrap();
        assert!(good.holds(), "{good:?}");
        let bad = f_limit_check(&seq, &scalar(1.0), &NatFilter::frechet(), &params).unwrap();
        assert!(bad.fails(), "{bad:?}");
    }

    #[test]
    fn statistical_limit_ignores_sparse_spikes() {
        // Zero everywhere except on the cubes, where the sequence jumps to 1.
        let cubes = NatSet::cubes();
        let spiky = {
            let cubes = cubes.clone();
            scalar_seq("spiky", move |n| if cubes.contains(n) { 1.0 } else { 0.0 })
        };
        let params = CheckParams::with_horizon(1_000_000).with_eps(vec![0.5, 0.1]);
        let stat = f_limit_check(&spiky, &scalar(0.0), &NatFilter::statistical(), &params).unwrap();
        assert!(stat.holds(), "spikes on a density-zero set are invisible: {stat:?}");
        // The classical filter keeps seeing the spikes arbitrarily late.
        let frech = f_limit_check(&spiky, &scalar(0.0), &NatFilter::frechet(), &params).unwrap();
        assert!(frech.fails(), "{frech:?}");
    }

    #[test]
    fn cauchy_anchor_search_steps_over_spiked_anchors() {
        // Index 1 is a cube, so the first anchor is itself a spike; the
        // search must move past it and certify from a clean anchor.
        let cubes = NatSet::cubes();
        let spiky = {
            let cubes = cubes.clone();
            scalar_seq("spiky", move |n| if cubes.contains(n) { 1.0 } else { 0.0 })
        };
        let params = CheckParams::with_horizon(1_000_000).with_eps(vec![0.5]);
        let v = f_cauchy_check(&spiky, &NatFilter::statistical(), &params).unwrap();
        assert!(v.holds(), "{v:?}");
        assert!(
            v.checks[0].note.contains("anchored at 2"),
            "anchor 1 is spiked, anchor 2 must win: {}",
            v.checks[0].note
        );
    }

    #[test]
    fn alternating_sequence_is_not_statistically_cauchy() {
        let seq = scalar_seq("alt", |n| if n % 2 == 1 { 1.0 } else { -1.0 });
        let params = CheckParams::with_horizon(100_000).with_eps(vec![0.5]);
        let v = f_cauchy_check(&seq, &NatFilter::statistical(), &params).unwrap();
        assert!(v.fails(), "every anchor sees half the indices far away: {v:?}");
    }

    #[test]
    fn frechet_cauchy_matches_the_classical_notion() {
        let params = CheckParams::with_horizon(10_000).with_eps(vec![0.1, 0.01]);
        let good = scalar_seq("recip", |n| 1.0 / n as f64);
        assert!(f_cauchy_check(&good, &NatFilter::frechet(), &params).unwrap().holds());
        let bad = scalar_seq("alt", |n| if n % 2 == 1 { 1.0 } else { -1.0 });
        assert!(f_cauchy_check(&bad, &NatFilter::frechet(), &params).unwrap().fails());
    }

    #[test]
    fn alternating_sequence_has_two_statistical_cluster_points() {
        let seq = scalar_seq("alt", |n| if n % 2 == 1 { 1.0 } else { -1.0 });
        let params = CheckParams::with_horizon(100_000).with_eps(vec![0.5, 0.1]);
        let f = NatFilter::statistical();
        for c in [1.0, -1.0] {
            let cl = cluster_point_check(&seq, &scalar(c), &f, &params).unwrap();
            assert!(cl.holds(), "{c} is visited on a density-1/2 set: {cl:?}");
            let lim = f_limit_check(&seq, &scalar(c), &f, &params).unwrap();
            assert!(lim.fails(), "{c} is not the limit: {lim:?}");
        }
        // A value the sequence never approaches is no cluster point.
        let off = cluster_point_check(&seq, &scalar(0.0), &f, &params).unwrap();
        assert!(off.fails(), "{off:?}");
    }

    #[test]
    fn audit_skips_without_certified_hypotheses() {
        let seq = scalar_seq("alt", |n| if n % 2 == 1 { 1.0 } else { -1.0 });
        let params = CheckParams::with_horizon(100_000).with_eps(vec![0.5]);
        let err =
            cluster_implies_limit_audit(&seq, &scalar(1.0), &NatFilter::statistical(), &params)
                .unwrap_err();
        assert!(matches!(err, ConvergeError::AuditSkipped { .. }), "{err:?}");
    }

    #[test]
    fn audit_confirms_the_rule_on_a_spiky_convergent_sequence() {
        let cubes = NatSet::cubes();
        let spiky = {
            let cubes = cubes.clone();
            scalar_seq("spiky", move |n| if cubes.contains(n) { 1.0 } else { 0.0 })
        };
        let params = CheckParams::with_horizon(1_000_000).with_eps(vec![0.5, 0.1]);
        let v = cluster_implies_limit_audit(
            &spiky,
            &scalar(0.0),
            &NatFilter::statistical(),
            &params,
        )
        .unwrap();
        assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn composition_agrees_with_direct_evaluation() {
        let seq = scalar_seq("id", |n| n as f64);
        let mapped = seq.clone().compose(IndexMap::affine(3, 2).unwrap());
        for n in 1..=100 {
            assert_eq!(
                mapped.at(n).unwrap(),
                seq.at(3 * n + 2).unwrap(),
                "composed term {n} must read the inner sequence at 3n+2"
            );
        }
        let swept: Vec<Vector> = mapped.cursor_up_to(5).map(|(_, x)| x).collect();
        let direct: Vec<Vector> =
            (1..=5).map(|n| seq.at(3 * n + 2).unwrap()).collect();
        assert_eq!(swept, direct);
    }

    #[test]
    fn composition_clamps_the_domain() {
        let seq = scalar_seq("short", |n| n as f64).with_max_index(1_000_000);
        let mapped = seq.compose(IndexMap::pow2());
        assert_eq!(mapped.max_index(), 19, "2^19 <= 1e6 < 2^20");
        assert!(mapped.at(19).is_ok());
        assert!(matches!(
            mapped.at(20),
            Err(ConvergeError::IndexOutOfRange { index: 20, max: 19 })
        ));
    }

    #[test]
    fn composed_cauchy_agrees_with_the_image_filter_route() {
        // Spikes on the cubes; reading through n -> 2n shifts which indices
        // are exceptional. Both routes must reach the same verdict.
        let cubes = NatSet::cubes();
        let spiky = {
            let cubes = cubes.clone();
            scalar_seq("spiky", move |n| if cubes.contains(n) { 1.0 } else { 0.0 })
        };
        let g = IndexMap::affine(2, 0).unwrap();
        let params = CheckParams::with_horizon(100_000).with_eps(vec![0.5]);
        let direct =
            f_cauchy_check(&spiky.clone().compose(g.clone()), &NatFilter::statistical(), &params)
                .unwrap();
        let through_image = f_cauchy_check(
            &spiky,
            &NatFilter::image(g, NatFilter::statistical()),
            &params,
        )
        .unwrap();
        assert_eq!(direct.outcome, through_image.outcome, "{direct:?} vs {through_image:?}");
        assert!(direct.holds(), "{direct:?}");
    }

    #[test]
    fn bound_metadata_survives_transforms() {
        let seq = scalar_seq("alt", |n| if n % 2 == 1 { 1.0 } else { -1.0 }).with_bound(1.0);
        assert_eq!(seq.bound(), Some(1.0));
        assert_eq!(seq.clone().cesaro().bound(), Some(1.0));
        assert_eq!(seq.compose(IndexMap::identity()).bound(), Some(1.0));
    }

    #[test]
    fn extraction_from_shrinking_balls() {
        // Nested balls around a fixed center with halving radii: the
        // extracted points must converge to the center at the radius rate.
        let space = SpaceModel::l1(4).unwrap();
        let center = Vector::dense(vec![0.3, -0.2, 0.5, 0.0]);
        let regions: Vec<Region> = (1..=40)
            .map(|k| Region::Ball { center: center.clone(), radius: 0.5f64.powi(k) })
            .collect();
        let out = extract_cauchy_from_base(&space, &regions, &ExtractParams::default()).unwrap();
        assert_eq!(out.points.len(), 40);
        assert!(out.audit.holds(), "{:?}", out.audit);
        for (k, p) in out.points.iter().enumerate() {
            let gap = space.max_seminorm(&p.sub(&center).unwrap()).unwrap();
            let radius = 0.5f64.powi(k as i32 + 1);
            assert!(
                gap <= radius + 1e-12,
                "point {k} at distance {gap} exceeds its radius {radius}"
            );
        }
        // Diameters halve, giving the Cauchy modulus in closed form.
        for k in 1..out.diameters.len() {
            assert!(out.diameters[k] <= 0.5 * out.diameters[k - 1] + 1e-12);
        }
    }

    #[test]
    fn stalled_chain_is_rejected_with_the_diameter_sequence() {
        let space = SpaceModel::l1(2).unwrap();
        let center = Vector::dense(vec![0.0, 0.0]);
        let regions: Vec<Region> = (0..10)
            .map(|_| Region::Ball { center: center.clone(), radius: 0.5 })
            .collect();
        let err =
            extract_cauchy_from_base(&space, &regions, &ExtractParams::default()).unwrap_err();
        match err {
            ConvergeError::NotCauchyChain { level, diameter, required, diameters } => {
                assert_eq!(level, 1);
                assert!((diameter - 1.0).abs() < 1e-12);
                assert!(required < 1.0, "a stalled diameter must exceed the shrink target");
                assert_eq!(diameters.len(), 10);
                assert!(diameters.iter().all(|&d| (d - 1.0).abs() < 1e-12));
            }
            other => panic!("expected the diameter diagnostic, got {other:?}"),
        }
    }

    #[test]
    fn broken_nesting_is_rejected() {
        let space = SpaceModel::l1(1).unwrap();
        let regions = vec![
            Region::Ball { center: scalar(0.0), radius: 0.1 },
            Region::Ball { center: scalar(5.0), radius: 0.05 },
        ];
        let err =
            extract_cauchy_from_base(&space, &regions, &ExtractParams::default()).unwrap_err();
        assert!(matches!(err, ConvergeError::NestingBroken { level: 1, .. }), "{err:?}");
    }

    #[test]
    fn extraction_is_deterministic_per_seed() {
        let space = SpaceModel::l1(3).unwrap();
        let center = Vector::dense(vec![1.0, 2.0, 3.0]);
        let regions: Vec<Region> = (1..=10)
            .map(|k| Region::Ball { center: center.clone(), radius: 0.5f64.powi(k) })
            .collect();
        let a = extract_cauchy_from_base(&space, &regions, &ExtractParams::default()).unwrap();
        let b = extract_cauchy_from_base(&space, &regions, &ExtractParams::default()).unwrap();
        assert_eq!(a.points, b.points, "same seed, same extraction");
        let c = extract_cauchy_from_base(
            &space,
            &regions,
            &ExtractParams { seed: 8, ..ExtractParams::default() },
        )
        .unwrap();
        assert_ne!(a.points, c.points, "different seed, different points");
    }

    #[test]
    fn rect_chains_extract_too() {
        let space = SpaceModel::linf(2).unwrap();
        let regions: Vec<Region> = (0..20)
            .map(|k| {
                let w = 0.5f64.powi(k);
                Region::Rect {
                    lo: Vector::dense(vec![-w, -w]),
                    hi: Vector::dense(vec![w, w]),
                }
            })
            .collect();
        let out = extract_cauchy_from_base(&space, &regions, &ExtractParams::default()).unwrap();
        assert!(out.audit.holds(), "{:?}", out.audit);
        assert!((out.diameters[0] - 2.0).abs() < 1e-12, "linf width of the unit box is 2");
    }

    #[test]
    fn limit_check_respects_the_filter_ordering() {
        // A statistically certified limit stays certified for the gauged
        // filter only when the gauge also kills the exceptional set; spikes
        // on the squares separate the two.
        let squares = NatSet::squares();
        let spiky = {
            let squares = squares.clone();
            scalar_seq("sq-spiky", move |n| if squares.contains(n) { 1.0 } else { 0.0 })
        };
        let clamped = spiky.with_max_index(10_000_000);
        let params = CheckParams::with_horizon(10_000_000).with_eps(vec![0.5]);
        let stat =
            f_limit_check(&clamped, &scalar(0.0), &NatFilter::statistical(), &params).unwrap();
        assert!(stat.holds(), "{stat:?}");
        let log = builtin_modulus("log1p").unwrap();
        let gauged = f_limit_check(
            &clamped,
            &scalar(0.0),
            &NatFilter::f_statistical(log).unwrap(),
            &params,
        )
        .unwrap();
        assert!(
            gauged.fails(),
            "under the log gauge the squares have density 1/2: {gauged:?}"
        );
    }

    #[test]
    fn sparse_decay_on_one_key_limits_to_zero() {
        let space = SpaceModel::sparse_product(["k1"]).unwrap();
        let seq = SequenceSpec::from_fn("decay", space, |n| {
            Vector::sparse([("k1", 1.0 / n as f64)])
        })
        .unwrap();
        let report = sparse_pointwise_limit(
            &seq,
            &NatFilter::frechet(),
            &["k1"],
            &CheckParams::with_horizon(100_000),
        )
        .unwrap();
        assert!(report.verdict.holds(), "{:?}", report.verdict);
        assert_eq!(
            report.limit,
            Vector::Sparse(Default::default()),
            "a tail within the finest epsilon of zero snaps to the zero vector"
        );
        assert_eq!(report.per_key, vec![(String::from("k1"), 0.0)]);
        assert_eq!(report.witnessed_support, vec![String::from("k1")]);
    }

    #[test]
    fn sparse_alternating_support_follows_the_density() {
        let squares = NatSet::squares();
        let space = SpaceModel::sparse_product(["a", "b"]).unwrap();
        let seq = SequenceSpec::from_fn("alternating", space, move |n| {
            if squares.contains(n) {
                Vector::sparse([("a", 0.75)])
            } else {
                Vector::sparse([("b", 0.6)])
            }
        })
        .unwrap();
        let mut params = CheckParams::with_horizon(100_000);
        params.density.tolerance = 1e-2;
        let report =
            sparse_pointwise_limit(&seq, &NatFilter::statistical(), &["a", "b"], &params)
                .unwrap();
        assert!(report.verdict.holds(), "{:?}", report.verdict);
        assert_eq!(
            report.limit,
            Vector::sparse([("b", 0.6)]),
            "the square-indexed key is statistically negligible, the other carries the limit"
        );
        assert_eq!(
            report.witnessed_support,
            vec![String::from("a"), String::from("b")]
        );
    }

    #[test]
    fn sparse_constant_sequence_returns_itself() {
        let space = SpaceModel::sparse_product(["a", "c"]).unwrap();
        let seq = SequenceSpec::from_fn("const", space, |_| {
            Vector::sparse([("a", 1.5), ("c", -0.25)])
        })
        .unwrap();
        let report = sparse_pointwise_limit(
            &seq,
            &NatFilter::frechet(),
            &["a", "c"],
            &CheckParams::with_horizon(10_000),
        )
        .unwrap();
        assert!(report.verdict.holds(), "{:?}", report.verdict);
        assert_eq!(report.limit, Vector::sparse([("a", 1.5), ("c", -0.25)]));
    }

    #[test]
    fn sparse_limit_rejects_dense_terms() {
        let seq = scalar_seq("dense", |n| n as f64);
        let err = sparse_pointwise_limit(
            &seq,
            &NatFilter::frechet(),
            &["a"],
            &CheckParams::with_horizon(1_000),
        )
        .unwrap_err();
        assert!(
            matches!(err, ConvergeError::Space(SpaceError::ShapeMismatch { .. })),
            "{err:?}"
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn cesaro_preserves_the_bound(coeffs in proptest::collection::vec(-5.0f64..5.0, 1..8)) {
                let bound = coeffs.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
                let cycle = coeffs.clone();
                let seq = SequenceSpec::from_fn("cycle", SpaceModel::l1(1).unwrap(), move |n| {
                    Vector::dense(vec![cycle[(n as usize - 1) % cycle.len()]])
                })
                .unwrap()
                .cesaro();
                for (n, x) in seq.cursor_up_to(200) {
                    let v = seq.space().max_seminorm(&x).unwrap();
                    prop_assert!(
                        v <= bound + 1e-9,
                        "mean at {} has seminorm {} above the bound {}",
                        n, v, bound
                    );
                }
            }

            #[test]
            fn composition_matches_pointwise_reads(a in 1u64..5, b in 0u64..10, n in 1u64..50) {
                let seq = SequenceSpec::from_fn("id", SpaceModel::l1(1).unwrap(), |n| {
                    Vector::dense(vec![n as f64])
                })
                .unwrap();
                let mapped = seq.clone().compose(IndexMap::affine(a, b).unwrap());
                prop_assert_eq!(mapped.at(n).unwrap(), seq.at(a * n + b).unwrap());
            }
        }
    }
}
