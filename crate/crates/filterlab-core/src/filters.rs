//! Free filters on the naturals, with tri-state membership.
//!
//! Six filter families are supported:
//!
//! * `Frechet`: the cofinite sets.
//! * `Statistical`: sets whose complement has counting density 0.
//! * `FStatistical(f)`: sets whose complement has gauged density 0 under an
//!   unbounded modulus f.
//! * `BaseGenerated`: everything containing some element of an explicit
//!   finite base.
//! * `Image(g, F)`: the filter generated by pushing F forward through an
//!   index map; membership is decided through the preimage, which carries
//!   exactly the same evidence as checking g(B) inside the set elementwise.
//! * `Subsequence(S)`: generated by the tails of a strictly increasing index
//!   stream. This is the constructive stand-in for passing to a subsequence;
//!   no ultrafilter is ever materialized.
//!
//! Membership, stationarity and inclusion all return [`Verdict`]s: every
//! `Holds`/`Fails` is backed by a certificate or a witness at the stated
//! horizon, and everything else stays inconclusive.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::modulus::{builtin_modulus, ModulusFunction};
use crate::natset::{
    has_f_density_zero, DensityParams, IndexMap, NatSet, NatSetError, TailEvidence,
};
use crate::verdict::{Check, Outcome, Verdict};

/// Base elements must show a member at or below this index to count as
/// witnessed nonempty.
const BASE_NONEMPTY_HORIZON: u64 = 1_000_000;

/// Pairwise base containment is sampled on [1, this].
const BASE_PAIR_HORIZON: u64 = 100_000;

/// How far the degeneracy probe samples an index map.
const IMAGE_PROBE_HORIZON: u64 = 4_096;

/// A stream tail must keep at least this many members beyond the last
/// violation before the tail is accepted as evidence.
const STREAM_TAIL_SUPPORT: u64 = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum FilterError {
    Set(NatSetError),
    /// A base element has no member at or below the nonemptiness horizon.
    EmptyBaseElement { index: usize, horizon: u64 },
    /// No base element fits inside the intersection of the given pair, so
    /// the list does not generate a filter.
    NotAFilterBase { first: usize, second: usize },
    /// Subsequence streams must be symbolically infinite.
    InvalidStream { reason: String },
}

impl From<NatSetError> for FilterError {
    fn from(e: NatSetError) -> FilterError {
        FilterError::Set(e)
    }
}

impl core::fmt::Display for FilterError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FilterError::Set(e) => write!(f, "{e}"),
            FilterError::EmptyBaseElement { index, horizon } => {
                write!(f, "base element #{index} has no member at or below {horizon}")
            }
            FilterError::NotAFilterBase { first, second } => write!(
                f,
                "no base element sits inside the intersection of elements #{first} and #{second}; the list is not a filter base"
            ),
            FilterError::InvalidStream { reason } => write!(f, "invalid index stream: {reason}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FilterError {}

/// A filter on the naturals. Construct through the associated functions,
/// which validate their arguments.
#[derive(Clone, Debug, PartialEq)]
pub enum NatFilter {
    Frechet,
    Statistical,
    FStatistical { modulus: ModulusFunction },
    BaseGenerated { base: Vec<NatSet> },
    Image { map: IndexMap, inner: Box<NatFilter>, degenerate: Option<String> },
    Subsequence { indices: NatSet },
}

impl NatFilter {
    pub fn frechet() -> NatFilter {
        NatFilter::Frechet
    }

    pub fn statistical() -> NatFilter {
        NatFilter::Statistical
    }

    /// The gauged statistical filter. Bounded gauges are rejected here, not
    /// at first use: no gauged density question about them is meaningful.
    pub fn f_statistical(modulus: ModulusFunction) -> Result<NatFilter, FilterError> {
        if !modulus.claims_unbounded() {
            return Err(FilterError::Set(NatSetError::BoundedModulus {
                name: modulus.name().into(),
            }));
        }
        Ok(NatFilter::FStatistical { modulus })
    }

    /// A filter generated by an explicit finite base. Each element must be
    /// witnessed nonempty, and every pair must contain some listed element
    /// inside its intersection (sampled on [1, 10^5]): that is the filter
    /// base property, and lists without it are refused.
    pub fn base_generated(base: Vec<NatSet>) -> Result<NatFilter, FilterError> {
        if base.is_empty() {
            return Err(FilterError::InvalidStream {
                reason: String::from("a base needs at least one element"),
            });
        }
        for (i, b) in base.iter().enumerate() {
            let h = BASE_NONEMPTY_HORIZON.min(b.count_cap());
            if b.iter_up_to(h).next().is_none() {
                return Err(FilterError::EmptyBaseElement { index: i, horizon: h });
            }
        }
        for i in 0..base.len() {
            for j in (i + 1)..base.len() {
                let h = BASE_PAIR_HORIZON
                    .min(base[i].count_cap())
                    .min(base[j].count_cap());
                let found = base.iter().any(|c| {
                    let ch = h.min(c.count_cap());
                    let mut members = c.iter_up_to(ch).peekable();
                    members.peek().is_some()
                        && c.iter_up_to(ch)
                            .all(|n| base[i].contains(n) && base[j].contains(n))
                });
                if !found {
                    return Err(FilterError::NotAFilterBase { first: i, second: j });
                }
            }
        }
        Ok(NatFilter::BaseGenerated { base })
    }

    /// The image filter g[F]. A constant or near-constant map still yields a
    /// filter, but a degenerate one (principal-like); that is recorded as a
    /// warning on every verdict rather than an error.
    pub fn image(map: IndexMap, inner: NatFilter) -> NatFilter {
        let degenerate = match &map {
            IndexMap::Const { value } => {
                Some(format!("constant map: the image filter is principal at {value}"))
            }
            _ => {
                let mut seen: Vec<u64> = (1..=IMAGE_PROBE_HORIZON).map(|n| map.apply(n)).collect();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() <= 8 {
                    Some(format!(
                        "map takes only {} distinct values on [1, {IMAGE_PROBE_HORIZON}]; the image filter is principal-like",
                        seen.len()
                    ))
                } else {
                    None
                }
            }
        };
        NatFilter::Image { map, inner: Box::new(inner), degenerate }
    }

    /// The filter of tails of a strictly increasing stream, given as the
    /// enumeration of a symbolically infinite set.
    pub fn subsequence(indices: NatSet) -> Result<NatFilter, FilterError> {
        match indices.cardinality() {
            crate::natset::Card::Infinite => Ok(NatFilter::Subsequence { indices }),
            other => Err(FilterError::InvalidStream {
                reason: format!(
                    "stream must be symbolically infinite, got {other:?} for {}",
                    indices.describe()
                ),
            }),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            NatFilter::Frechet => String::from("frechet"),
            NatFilter::Statistical => String::from("stat"),
            NatFilter::FStatistical { modulus } => format!("fstat({})", modulus.name()),
            NatFilter::BaseGenerated { base } => {
                let mut parts = String::new();
                for (i, b) in base.iter().enumerate() {
                    if i > 0 {
                        parts.push(';');
                    }
                    parts.push_str(&b.describe());
                }
                format!("base({parts})")
            }
            NatFilter::Image { map, inner, .. } => {
                format!("image({},{})", map.describe(), inner.describe())
            }
            NatFilter::Subsequence { indices } => format!("subseq({})", indices.describe()),
        }
    }

    /// Tri-state membership of `set` in the filter.
    pub fn member(&self, set: &NatSet, params: &DensityParams) -> Result<Verdict, FilterError> {
        match self {
            NatFilter::Frechet => frechet_member(set, params),
            NatFilter::Statistical => {
                let id = builtin_modulus("identity").expect("identity is always in the catalog");
                density_member(set, &id, params)
            }
            NatFilter::FStatistical { modulus } => density_member(set, modulus, params),
            NatFilter::BaseGenerated { base } => base_member(base, set, params),
            NatFilter::Image { map, inner, degenerate } => {
                let pre = NatSet::preimage(map.clone(), set);
                let mut v = inner.member(&pre, params)?;
                v.checks.insert(
                    0,
                    Check::new(
                        format!("image pullback of {}", set.describe()),
                        v.outcome,
                        format!(
                            "membership in the image filter reduces to the preimage {} in {}",
                            pre.describe(),
                            inner.describe()
                        ),
                    ),
                );
                if let Some(reason) = degenerate {
                    v = v.with_warning(reason.clone());
                }
                Ok(v)
            }
            NatFilter::Subsequence { indices } => stream_member(indices, set, params),
        }
    }

    /// Whether `set` meets every member of the filter. Decided by negating
    /// membership of the complement: a set is stationary exactly when its
    /// complement is not a member.
    pub fn is_stationary(&self, set: &NatSet, params: &DensityParams) -> Result<Verdict, FilterError> {
        let inner = self.member(&set.complement(), params)?;
        let mut flipped = inner.negated();
        flipped.checks.insert(
            0,
            Check::new(
                format!("stationary: {} against {}", set.describe(), self.describe()),
                flipped.outcome,
                "a set is stationary iff its complement is not a filter member; evidence below is the complement's membership check with outcomes flipped",
            ),
        );
        Ok(flipped)
    }
}

fn frechet_member(set: &NatSet, params: &DensityParams) -> Result<Verdict, FilterError> {
    let compl = set.complement();
    let h = params.horizon.min(compl.count_cap());
    let label = format!("{} in frechet", set.describe());
    let check = match compl.tail_evidence(h)? {
        TailEvidence::FiniteWitnessed { count, max } => Check::new(
            label,
            Outcome::Holds,
            format!("complement is symbolically finite: {count} elements, max {max}"),
        ),
        TailEvidence::FiniteAtHorizon { count_below, horizon } => Check::new(
            label,
            Outcome::Holds,
            format!(
                "no complement members in ({}, {horizon}]; complement finite at this horizon ({count_below} members below)",
                horizon / 4
            ),
        ),
        TailEvidence::InfiniteSymbolic => Check::new(
            label,
            Outcome::Fails,
            "complement is symbolically infinite, so the set is not cofinite",
        ),
        TailEvidence::PersistentAtHorizon { in_third_quarter, in_fourth_quarter } => Check::new(
            label,
            Outcome::Fails,
            format!(
                "complement keeps appearing up to horizon {h}: {in_third_quarter} members in (h/2, 3h/4], {in_fourth_quarter} in (3h/4, h]"
            ),
        ),
        TailEvidence::Ambiguous { past_quarter } => Check::new(
            label,
            Outcome::Inconclusive,
            format!(
                "complement has {past_quarter} members past {}/4 but vanishes near the horizon; raise the horizon to separate finite from sparse",
                h
            ),
        ),
    };
    Ok(Verdict::single(check))
}

fn density_member(
    set: &NatSet,
    modulus: &ModulusFunction,
    params: &DensityParams,
) -> Result<Verdict, FilterError> {
    let compl = set.complement();
    let h = params.horizon.min(compl.count_cap());
    let mut eff = *params;
    eff.horizon = h;
    let mut v = has_f_density_zero(&compl, modulus, &eff)?;
    if h < params.horizon {
        v = v.with_warning(format!(
            "horizon clamped from {} to {h} (counting cap of {})",
            params.horizon,
            compl.describe()
        ));
    }
    Ok(v)
}

fn base_member(
    base: &[NatSet],
    set: &NatSet,
    params: &DensityParams,
) -> Result<Verdict, FilterError> {
    let mut checks: Vec<Check> = Vec::new();
    let mut sampled_only: Option<usize> = None;
    for (i, b) in base.iter().enumerate() {
        let h = params.horizon.min(b.count_cap()).min(set.count_cap());
        let label = format!("base element {}", b.describe());
        match b.iter_up_to(h).find(|&n| !set.contains(n)) {
            None => {
                if set.includes_symbolically(b) {
                    return Ok(Verdict::single(Check::new(
                        label,
                        Outcome::Holds,
                        format!(
                            "contained in {}: symbolic certificate, cross-checked on [1, {h}]",
                            set.describe()
                        ),
                    )));
                }
                sampled_only.get_or_insert(i);
                checks.push(Check::new(
                    label,
                    Outcome::Inconclusive,
                    format!("no violation up to {h}, but no symbolic containment certificate"),
                ));
            }
            Some(witness) => {
                checks.push(Check::new(
                    label,
                    Outcome::Fails,
                    format!("leaves the set at index {witness}"),
                ));
            }
        }
    }
    if checks.iter().all(|c| c.outcome == Outcome::Fails) {
        let mut v = Verdict::from_checks(checks);
        v.outcome = Outcome::Fails;
        return Ok(v);
    }
    // Some element is contained as far as sampling can see, but nothing is
    // certified: the honest answer is inconclusive, not holds.
    let mut v = Verdict::from_checks(checks);
    v.outcome = Outcome::Inconclusive;
    Ok(v)
}

fn stream_member(
    indices: &NatSet,
    set: &NatSet,
    params: &DensityParams,
) -> Result<Verdict, FilterError> {
    let h = params.horizon.min(indices.count_cap()).min(set.count_cap());
    let label = format!("tail of {} in {}", indices.describe(), set.describe());
    let members: Vec<u64> = indices.enumerate_up_to(h)?;
    if members.is_empty() {
        return Ok(Verdict::single(Check::new(
            label,
            Outcome::Inconclusive,
            format!("the stream has no members at or below {h}"),
        )));
    }
    let violations: Vec<u64> = members.iter().copied().filter(|&n| !set.contains(n)).collect();
    if violations.is_empty() {
        return Ok(Verdict::single(Check::new(
            label,
            Outcome::Holds,
            format!("all {} stream members up to {h} lie in the set", members.len()),
        )));
    }
    let last = *violations.last().expect("nonempty");
    let in_third = violations.iter().filter(|&&n| n > h / 2 && n <= 3 * (h / 4)).count();
    let in_fourth = violations.iter().filter(|&&n| n > 3 * (h / 4)).count();
    if in_third > 0 && in_fourth > 0 {
        return Ok(Verdict::single(Check::new(
            label,
            Outcome::Fails,
            format!(
                "the stream leaves the set persistently: {} violations, still {in_third} in (h/2, 3h/4] and {in_fourth} in (3h/4, h] at h = {h}",
                violations.len()
            ),
        )));
    }
    let tail_support = members.iter().filter(|&&n| n > last).count() as u64;
    if last <= h / 4 && tail_support >= STREAM_TAIL_SUPPORT {
        return Ok(Verdict::single(Check::new(
            label,
            Outcome::Holds,
            format!(
                "violations stop at {last} (first quarter of the horizon); the remaining {tail_support} stream members all lie in the set"
            ),
        )));
    }
    Ok(Verdict::single(Check::new(
        label,
        Outcome::Inconclusive,
        format!(
            "violations reach {last} with {tail_support} stream members after; neither a stable tail nor persistence at horizon {h}"
        ),
    )))
}

/// The twelve closed-form sets every filter comparison is run against by
/// default: the full set, residue classes, polynomial images and their
/// complements, the oscillating block set and its complement, and a finite
/// range with its cofinite complement.
pub fn standard_testbed() -> Vec<NatSet> {
    let squares = NatSet::squares();
    let cubes = NatSet::cubes();
    let blocks = NatSet::blocks_pow2();
    let range = NatSet::range(1, 64).expect("constants are valid");
    vec![
        NatSet::full(),
        NatSet::evens(),
        NatSet::odds(),
        NatSet::ap(1, 3).expect("constants are valid"),
        squares.clone(),
        squares.complement(),
        cubes.clone(),
        cubes.complement(),
        blocks.clone(),
        blocks.complement(),
        range.clone(),
        range.complement(),
    ]
}

/// Tri-state test of "every member of `coarser` is a member of `finer`",
/// evaluated over a finite testbed of witness sets.
///
/// Per set T the implication is settled from membership verdicts: satisfied
/// when T is in the finer filter or out of the coarser one, violated when T
/// is certified in the coarser but out of the finer, unknown otherwise. The
/// overall verdict is the three-valued conjunction. A structural equality
/// shortcut answers reflexive queries without sampling.
pub fn includes(
    coarser: &NatFilter,
    finer: &NatFilter,
    testbed: &[NatSet],
    params: &DensityParams,
) -> Result<Verdict, FilterError> {
    if coarser == finer {
        return Ok(Verdict::single(Check::new(
            format!("{} within {}", coarser.describe(), finer.describe()),
            Outcome::Holds,
            "structurally identical filters include each other",
        )));
    }
    let mut checks = Vec::with_capacity(testbed.len());
    for t in testbed {
        let label = t.describe();
        let fine = finer.member(t, params)?;
        if fine.holds() {
            checks.push(Check::new(
                label,
                Outcome::Holds,
                "already a member of the finer filter",
            ));
            continue;
        }
        let coarse = coarser.member(t, params)?;
        let check = match (coarse.outcome, fine.outcome) {
            (Outcome::Fails, _) => Check::new(
                label,
                Outcome::Holds,
                "not a member of the coarser filter, so the implication is vacuous",
            ),
            (Outcome::Holds, Outcome::Fails) => Check::new(
                label,
                Outcome::Fails,
                format!(
                    "witness: in {} but certified out of {}",
                    coarser.describe(),
                    finer.describe()
                ),
            ),
            (Outcome::Holds, _) => Check::new(
                label,
                Outcome::Inconclusive,
                "in the coarser filter, but the finer membership did not settle",
            ),
            (Outcome::Inconclusive, _) => Check::new(
                label,
                Outcome::Inconclusive,
                "coarser membership did not settle",
            ),
        };
        checks.push(check);
    }
    Ok(Verdict::from_checks(checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::natset::DensityParams;

    fn p6() -> DensityParams {
        DensityParams::default()
    }

    fn p7() -> DensityParams {
        DensityParams::with_horizon(10_000_000)
    }

    #[test]
    fn frechet_accepts_cofinite_rejects_coinfinite() {
        let f = NatFilter::frechet();
        assert!(f.member(&NatSet::full(), &p6()).unwrap().holds());
        assert!(f.member(&NatSet::range(1, 64).unwrap().complement(), &p6()).unwrap().holds());
        assert!(f.member(&NatSet::evens(), &p6()).unwrap().fails(), "evens are not cofinite");
        assert!(
            f.member(&NatSet::squares().complement(), &p6()).unwrap().fails(),
            "removing the squares still leaves an infinite complement"
        );
        assert!(f.member(&NatSet::empty(), &p6()).unwrap().fails());
    }

    #[test]
    fn statistical_membership_tracks_density() {
        let f = NatFilter::statistical();
        // Complement of the squares: the exceptional part has density 0,
        // certified at 1e7 where the ratio window falls below the tolerance.
        assert!(f.member(&NatSet::squares().complement(), &p7()).unwrap().holds());
        // Evens have a density-1/2 complement.
        assert!(f.member(&NatSet::evens(), &p7()).unwrap().fails());
        // Oscillating complement: no density, so not a member.
        assert!(f.member(&NatSet::blocks_pow2().complement(), &p7()).unwrap().fails());
        // The full set is always a member.
        assert!(f.member(&NatSet::full(), &p6()).unwrap().holds());
    }

    #[test]
    fn log_statistical_filter_is_strictly_smaller() {
        // The squares' complement is a statistical member, but under the
        // logarithmic gauge the squares have density 1/2, not 0, so the same
        // set is certified OUT of the log-statistical filter.
        let log = builtin_modulus("log1p").unwrap();
        let flog = NatFilter::f_statistical(log).unwrap();
        let co_squares = NatSet::squares().complement();
        let v = flog
            .member(&co_squares, &DensityParams::with_horizon(100_000_000))
            .unwrap();
        assert!(v.fails(), "log-gauged square density is 1/2: {v:?}");
        assert!(NatFilter::statistical().member(&co_squares, &p7()).unwrap().holds());
    }

    #[test]
    fn bounded_gauges_cannot_build_filters() {
        let bounded = builtin_modulus("bounded_rational").unwrap();
        let err = NatFilter::f_statistical(bounded).unwrap_err();
        assert!(matches!(err, FilterError::Set(NatSetError::BoundedModulus { .. })));
    }

    #[test]
    fn base_generated_validates_the_base_property() {
        // Nested tails form a base.
        let tails = vec![
            NatSet::ap(1, 1).unwrap(),
            NatSet::ap(10, 1).unwrap(),
            NatSet::ap(100, 1).unwrap(),
        ];
        assert!(NatFilter::base_generated(tails).is_ok());

        // Disjoint sets are not a base.
        let err = NatFilter::base_generated(vec![NatSet::evens(), NatSet::odds()]).unwrap_err();
        assert!(matches!(err, FilterError::NotAFilterBase { first: 0, second: 1 }));

        // An empty element is refused.
        let err = NatFilter::base_generated(vec![NatSet::empty()]).unwrap_err();
        assert!(matches!(err, FilterError::EmptyBaseElement { index: 0, .. }));
    }

    #[test]
    fn base_membership_wants_a_certificate() {
        let base = NatFilter::base_generated(vec![
            NatSet::ap(1, 1).unwrap(),
            NatSet::ap(100, 1).unwrap(),
        ])
        .unwrap();
        // ap(100,1) inside ap(50,1): symbolic progression containment.
        let v = base.member(&NatSet::ap(50, 1).unwrap(), &p6()).unwrap();
        assert!(v.holds(), "{v:?}");
        // The complement of a small finite set contains the tail, certified
        // by checking the finitely many removed points.
        let co = NatSet::finite(vec![5, 7]).unwrap().complement();
        let v = base.member(&co, &p6()).unwrap();
        assert!(v.holds(), "{v:?}");
        // Evens contain no tail: every base element is violated.
        let v = base.member(&NatSet::evens(), &p6()).unwrap();
        assert!(v.fails(), "{v:?}");
    }

    #[test]
    fn base_membership_without_certificate_is_inconclusive() {
        // The base element is contained in the union as far as sampling can
        // see, but the inclusion engine has no rule for it: inconclusive.
        let base = NatFilter::base_generated(vec![NatSet::squares()]).unwrap();
        let odd_squares_and_evens = NatSet::squares().union(&NatSet::evens());
        let v = base.member(&odd_squares_and_evens, &p6()).unwrap();
        // squares within union(squares, evens) does certify (left arm).
        assert!(v.holds(), "union arms certify directly: {v:?}");

        // Shift the set so no certificate exists: squares minus nothing,
        // described through a preimage that the engine cannot see through.
        let opaque = NatSet::preimage(IndexMap::identity(), &NatSet::squares());
        let v = base.member(&opaque, &p6()).unwrap();
        assert!(v.is_inconclusive(), "sampled containment alone must not certify: {v:?}");
    }

    #[test]
    fn subsequence_streams_must_be_infinite() {
        assert!(NatFilter::subsequence(NatSet::evens()).is_ok());
        assert!(NatFilter::subsequence(NatSet::range(1, 100).unwrap()).is_err());
        assert!(NatFilter::subsequence(NatSet::sampled(vec![1, 2], 10).unwrap()).is_err());
    }

    #[test]
    fn subsequence_membership_follows_the_tail() {
        let sub = NatFilter::subsequence(NatSet::evens()).unwrap();
        assert!(sub.member(&NatSet::evens(), &p6()).unwrap().holds());
        assert!(sub.member(&NatSet::odds(), &p6()).unwrap().fails(), "evens never visit the odds");
        // A finite prefix of violations is forgiven once the tail is long.
        let co_prefix = NatSet::range(1, 100).unwrap().complement();
        let v = sub.member(&co_prefix, &p6()).unwrap();
        assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn image_filter_reduces_through_the_preimage() {
        // Doubling pushes the Frechet filter onto the evens: the evens are a
        // member because their preimage is everything.
        let doubled = NatFilter::image(IndexMap::affine(2, 0).unwrap(), NatFilter::frechet());
        let v = doubled.member(&NatSet::evens(), &p6()).unwrap();
        assert!(v.holds(), "{v:?}");
        // The odds never appear in the image: preimage empty at every index.
        let v = doubled.member(&NatSet::odds(), &p6()).unwrap();
        assert!(v.fails(), "{v:?}");
    }

    #[test]
    fn degenerate_images_warn_but_still_answer() {
        let principal = NatFilter::image(IndexMap::constant(5).unwrap(), NatFilter::frechet());
        let v = principal.member(&NatSet::finite(vec![5]).unwrap(), &p6()).unwrap();
        assert!(v.holds(), "any set containing 5 is a member: {v:?}");
        assert!(!v.warnings.is_empty(), "the degeneracy must be flagged: {v:?}");
        let v = principal.member(&NatSet::evens(), &p6()).unwrap();
        assert!(v.fails(), "5 is odd, so the evens miss the principal point: {v:?}");
    }

    #[test]
    fn stationarity_negates_complement_membership() {
        // Any symbolically infinite set is Frechet-stationary.
        let v = NatFilter::frechet().is_stationary(&NatSet::evens(), &p6()).unwrap();
        assert!(v.holds(), "{v:?}");
        // The squares have density 0: statistically non-stationary.
        let v = NatFilter::statistical().is_stationary(&NatSet::squares(), &p7()).unwrap();
        assert!(v.fails(), "{v:?}");
        // The evens are statistically stationary (density 1/2 complement).
        let v = NatFilter::statistical().is_stationary(&NatSet::evens(), &p7()).unwrap();
        assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn frechet_sits_inside_the_statistical_filter() {
        let v = includes(
            &NatFilter::frechet(),
            &NatFilter::statistical(),
            &standard_testbed(),
            &p7(),
        )
        .unwrap();
        assert!(v.holds(), "{v:?}");
        assert!(v.checks.iter().all(|c| c.outcome == Outcome::Holds));
    }

    #[test]
    fn statistical_does_not_sit_inside_frechet() {
        let v = includes(
            &NatFilter::statistical(),
            &NatFilter::frechet(),
            &standard_testbed(),
            &p7(),
        )
        .unwrap();
        assert!(v.fails(), "{v:?}");
        let witness = v.checks.iter().find(|c| c.outcome == Outcome::Fails);
        assert!(witness.is_some(), "a violation witness must be named");
    }

    #[test]
    fn inclusion_is_reflexive_by_structure() {
        let log = builtin_modulus("log1p").unwrap();
        let filters = vec![
            NatFilter::frechet(),
            NatFilter::statistical(),
            NatFilter::f_statistical(log).unwrap(),
            NatFilter::subsequence(NatSet::evens()).unwrap(),
            NatFilter::image(IndexMap::pow2(), NatFilter::frechet()),
        ];
        for f in &filters {
            let v = includes(f, f, &standard_testbed(), &p6()).unwrap();
            assert!(v.holds(), "reflexivity for {}: {v:?}", f.describe());
            assert_eq!(v.checks.len(), 1, "the shortcut answers without sampling");
        }
    }

    #[test]
    fn membership_is_monotone_under_certified_union() {
        // If A is a member and B is anything, A union B is a member too.
        // Verified for the density filters on clean-margin fixtures.
        let f = NatFilter::statistical();
        let a = NatSet::squares().complement();
        for b in [NatSet::cubes(), NatSet::evens(), NatSet::range(5, 500).unwrap()] {
            let av = f.member(&a, &p7()).unwrap();
            let uv = f.member(&a.union(&b), &p7()).unwrap();
            assert!(av.holds());
            assert!(
                uv.holds(),
                "union with {} must stay a member: {uv:?}",
                b.describe()
            );
        }
    }

    #[test]
    fn full_set_is_member_and_empty_set_is_not_for_every_kind() {
        let log = builtin_modulus("log1p").unwrap();
        let kinds: Vec<NatFilter> = vec![
            NatFilter::frechet(),
            NatFilter::statistical(),
            NatFilter::f_statistical(log).unwrap(),
            NatFilter::base_generated(vec![NatSet::ap(10, 1).unwrap()]).unwrap(),
            NatFilter::image(IndexMap::affine(3, 1).unwrap(), NatFilter::frechet()),
            NatFilter::subsequence(NatSet::odds()).unwrap(),
        ];
        for f in &kinds {
            let full = f.member(&NatSet::full(), &p6()).unwrap();
            assert!(full.holds(), "{} must contain the full set: {full:?}", f.describe());
            let empty = f.member(&NatSet::empty(), &p6()).unwrap();
            assert!(empty.fails(), "{} must exclude the empty set: {empty:?}", f.describe());
        }
    }
}
