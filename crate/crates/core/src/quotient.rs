//! Finite subgroups of GL(N) acting on toric varieties: reflection
//! classification, fixed-locus component counts, ramification divisors,
//! Q-Cartier analysis of the invariant reduction, and klt certification of
//! the quotient pair.

use crate::cones::{Fan, RationalCone};
use crate::linalg::{dot, smith_normal_form, IntMat, IntVec};
use crate::toric::{
    q_cartier_test, singularity_verdict, QCartier, SingularityVerdict, TorusInvariantDivisor,
};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Zero};

pub const DEFAULT_GROUP_BOUND: usize = 10_000;

/// A finite matrix group given by its full element list.
#[derive(Clone, Debug)]
pub struct FiniteMatrixGroup {
    pub generators: Vec<IntMat>,
    pub elements: Vec<IntMat>,
}

impl FiniteMatrixGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn rank(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn trivial(n: usize) -> Self {
        FiniteMatrixGroup {
            generators: Vec::new(),
            elements: vec![IntMat::identity(n)],
        }
    }
}

/// Close a set of unimodular integer matrices under multiplication.
pub fn close_group(generators: &[IntMat], bound: usize) -> Result<FiniteMatrixGroup> {
    if generators.is_empty() {
        return Err(Error::EmptyInput(
            "group needs at least one generator".into(),
        ));
    }
    let n = generators[0].rows();
    for g in generators {
        if !g.is_square() || g.rows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.rows(),
            });
        }
        if !g.is_unimodular() {
            return Err(Error::NotUnimodular);
        }
    }
    let mut elements: Vec<IntMat> = vec![IntMat::identity(n)];
    let mut frontier: Vec<IntMat> = vec![IntMat::identity(n)];
    while let Some(e) = frontier.pop() {
        for g in generators {
            let prod = e.mul(g);
            if !elements.contains(&prod) {
                if elements.len() >= bound {
                    return Err(Error::OrderBoundExceeded(bound));
                }
                elements.push(prod.clone());
                frontier.push(prod);
            }
        }
    }
    Ok(FiniteMatrixGroup {
        generators: generators.to_vec(),
        elements,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementClass {
    Identity,
    Reflection,
    /// rank(g - I) = 1 of finite order but with nontrivial eigenvalue != -1;
    /// impossible over the integers, kept to make the claim checkable.
    QuasiReflection,
    Other,
}

/// Classification of one group element together with its divisorial fixed
/// locus on the torus.
#[derive(Clone, Debug)]
pub struct FixedLocusReport {
    pub element: IntMat,
    pub classification: ElementClass,
    pub order: usize,
    /// For reflections: number of connected components of the fixed locus,
    /// the size of the torsion of M/(r-1)M.
    pub torus_fixed_components: Option<BigInt>,
    /// The torsion elements themselves, as coordinate tuples modulo the
    /// invariant factors.
    pub component_labels: Vec<String>,
}

/// Torsion of Z^n / (A Z^n): the invariant factors > 1 of A.
fn torsion_invariants(a: &IntMat) -> Vec<BigInt> {
    smith_normal_form(a)
        .invariant_factors()
        .into_iter()
        .filter(|d| !d.is_one())
        .collect()
}

fn torsion_size(invariants: &[BigInt]) -> BigInt {
    let mut s = BigInt::one();
    for d in invariants {
        s *= d;
    }
    s
}

fn torsion_labels(invariants: &[BigInt]) -> Vec<String> {
    if invariants.is_empty() {
        return vec!["(0)".into()];
    }
    let mut out = Vec::new();
    let mut idx = vec![BigInt::zero(); invariants.len()];
    loop {
        let tuple: Vec<String> = idx.iter().map(|x| x.to_string()).collect();
        out.push(format!("({})", tuple.join(",")));
        let mut pos = 0;
        loop {
            if pos == invariants.len() {
                out.sort();
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < invariants[pos] {
                break;
            }
            idx[pos] = BigInt::zero();
            pos += 1;
        }
    }
}

/// Classify every element of a closed group.
pub fn classify_elements(group: &FiniteMatrixGroup) -> Vec<FixedLocusReport> {
    let n = group.rank();
    let order_bound = group.order() + 1;
    group
        .elements
        .iter()
        .map(|g| {
            let order = crate::linalg::matrix_order(g, order_bound)
                .expect("elements of a closed finite group have finite order");
            let diff = g.sub(&IntMat::identity(n));
            let rank = diff.rank();
            let classification = if rank == 0 {
                ElementClass::Identity
            } else if rank == 1 {
                // Trace integrality forces the nontrivial eigenvalue of a
                // finite-order integer quasi-reflection to be -1.
                assert!(
                    g.mul(g).is_identity(),
                    "integer quasi-reflection of finite order must square to 1"
                );
                ElementClass::Reflection
            } else {
                ElementClass::Other
            };
            let (components, labels) = if classification == ElementClass::Reflection {
                let inv = torsion_invariants(&diff);
                (Some(torsion_size(&inv)), torsion_labels(&inv))
            } else {
                (None, Vec::new())
            };
            FixedLocusReport {
                element: g.clone(),
                classification,
                order,
                torus_fixed_components: components,
                component_labels: labels,
            }
        })
        .collect()
}

/// One summand Fix(r) of the ramification divisor, with reduced structure.
#[derive(Clone, Debug)]
pub struct ReflectionSummand {
    pub reflection: IntMat,
    pub components: BigInt,
}

/// R = sum of Fix(r) over the reflections of the group.
pub fn ramification_divisor(group: &FiniteMatrixGroup) -> Vec<ReflectionSummand> {
    classify_elements(group)
        .into_iter()
        .filter(|r| r.classification == ElementClass::Reflection)
        .map(|r| ReflectionSummand {
            components: r.torus_fixed_components.clone().expect("reflection"),
            reflection: r.element,
        })
        .collect()
}

/// Result of checking that no nontrivial element pointwise fixes a
/// torus-invariant divisor.
#[derive(Clone, Debug)]
pub struct InvariantDivisorCheck {
    pub pairs_checked: usize,
    /// (element, ray) pairs where the element acts trivially on N/(Z u_rho);
    /// must be empty.
    pub violations: Vec<String>,
}

impl InvariantDivisorCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every nontrivial g and every ray rho of the fan fixed by g, verify
/// that g does NOT act trivially on the quotient N/(rho ∩ N); triviality
/// would mean g pointwise fixes the torus-invariant divisor D_rho.
pub fn check_no_invariant_fixed_divisor(
    group: &FiniteMatrixGroup,
    fan: &Fan,
) -> Result<InvariantDivisorCheck> {
    // The group must act on the fan.
    for g in &group.elements {
        for c in fan.cones() {
            let image = c.map(g)?;
            if !fan.contains_cone(&image) {
                return Err(Error::GroupDoesNotAct);
            }
        }
    }
    let mut rays: Vec<IntVec> = Vec::new();
    for c in fan.cones() {
        if c.dim() == 1 {
            for r in c.rays() {
                if !rays.contains(r) {
                    rays.push(r.clone());
                }
            }
        }
    }
    let mut pairs_checked = 0;
    let mut violations = Vec::new();
    for g in &group.elements {
        if g.is_identity() {
            continue;
        }
        for u in &rays {
            if g.mul_vec(u) != *u {
                continue;
            }
            pairs_checked += 1;
            // Quotient action on N/(Z u): conjugate by a basis starting at u
            // and read off the lower block.
            let w = crate::linalg::complete_primitive_to_basis(u);
            let w_inv = crate::linalg::invert_unimodular(&w);
            let conj = w_inv.mul(g).mul(&w);
            let n = g.rows();
            let mut trivial = true;
            for i in 1..n {
                for j in 1..n {
                    let want = if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    };
                    if *conj.at(i, j) != want {
                        trivial = false;
                    }
                }
            }
            if trivial {
                violations.push(format!(
                    "element {:?} pointwise fixes the divisor of ray {:?}",
                    g, u
                ));
            }
        }
    }
    Ok(InvariantDivisorCheck {
        pairs_checked,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Characters and the invariant reduction
// ---------------------------------------------------------------------------

/// Character a in M with (r^T - I) a generating the image lattice of
/// (r^T - I); then chi^a - chi^{r^T a} vanishes exactly on Fix(r) ∩ T.
pub fn reflection_character(reflection: &IntMat) -> IntVec {
    let n = reflection.rows();
    let a_mat = reflection.transpose().sub(&IntMat::identity(n));
    let snf = smith_normal_form(&a_mat);
    assert_eq!(snf.rank(), 1, "reflections drop rank by exactly one");
    // A (V e_1) = d_1 U^{-1} e_1 generates the image lattice.
    snf.v.column(0)
}

/// Toric part of div(chi^a - chi^{r^T a}): valuation min(<a,u>, <r^T a,u>)
/// on each ray.
pub fn character_reduction(
    sigma: &RationalCone,
    reflection: &IntMat,
    a: &[BigInt],
) -> TorusInvariantDivisor {
    let ra = reflection.transpose().mul_vec(a);
    let coefficients = sigma
        .rays()
        .iter()
        .map(|u| {
            let va = dot(a, u);
            let vb = dot(&ra, u);
            BigRational::from_integer(va.min(vb))
        })
        .collect();
    TorusInvariantDivisor { coefficients }
}

// ---------------------------------------------------------------------------
// Full quotient analysis
// ---------------------------------------------------------------------------

/// Machine-readable record of the verified hypotheses for the klt
/// conclusion on the quotient pair (X/G, ½ π(R)).
#[derive(Clone, Debug)]
pub struct KltCertificate {
    pub fan_canonical: bool,
    pub group_acts: bool,
    pub group_order: usize,
    pub reflection_count: usize,
    pub ramification_components: BigInt,
    pub hypothesis_trace: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum KltOutcome {
    Certificate(KltCertificate),
    Refusal { failed_check: String },
}

impl KltOutcome {
    pub fn is_certificate(&self) -> bool {
        matches!(self, KltOutcome::Certificate(_))
    }
}

#[derive(Clone, Debug)]
pub struct QuotientAnalysis {
    pub verdict: SingularityVerdict,
    pub group_order: usize,
    pub reports: Vec<FixedLocusReport>,
    pub ramification: Vec<ReflectionSummand>,
    /// Chosen character per reflection.
    pub characters: Vec<IntVec>,
    /// Torus-invariant divisor in the linear-equivalence analysis of R:
    /// the toric part of div(prod_r (chi^a_r - chi^{r^T a_r})).
    pub invariant_reduction: Option<TorusInvariantDivisor>,
    pub q_cartier: Option<QCartier>,
    /// Q-Gorenstein-ness of the quotient: the base is Q-Gorenstein and the
    /// ramification divisor is Q-Cartier.
    pub quotient_q_gorenstein: Option<bool>,
    pub invariant_divisor_check: InvariantDivisorCheck,
    pub klt: KltOutcome,
}

/// The full pipeline for a pointed cone and a finite group acting on it.
pub fn quotient_analysis(
    sigma: &RationalCone,
    generators: &[IntMat],
    bound: usize,
) -> Result<QuotientAnalysis> {
    let verdict = singularity_verdict(sigma)?;
    let group = if generators.is_empty() {
        FiniteMatrixGroup::trivial(sigma.ambient_dim())
    } else {
        close_group(generators, bound)?
    };
    // The group must act on the cone.
    let mut group_acts = true;
    for g in &group.elements {
        let image = sigma.map(g)?;
        if image.key() != sigma.key() {
            group_acts = false;
        }
    }
    if !group_acts {
        return Err(Error::GroupDoesNotAct);
    }
    let fan = Fan::from_maximal(std::slice::from_ref(sigma))?;
    let invariant_divisor_check = check_no_invariant_fixed_divisor(&group, &fan)?;

    let reports = classify_elements(&group);
    let ramification = ramification_divisor(&group);

    // Invariant reduction: subtract the anti-invariant character function of
    // each reflection; what remains of the linear-equivalence class of R is
    // the toric part below.
    let characters: Vec<IntVec> = ramification
        .iter()
        .map(|s| reflection_character(&s.reflection))
        .collect();
    let mut reduction = TorusInvariantDivisor::zero(sigma.rays().len());
    for (summand, a) in ramification.iter().zip(characters.iter()) {
        let part = character_reduction(sigma, &summand.reflection, a);
        for (acc, c) in reduction
            .coefficients
            .iter_mut()
            .zip(part.coefficients.iter())
        {
            *acc += c;
        }
    }
    let invariant_reduction = Some(reduction.clone());
    let q_cartier = Some(q_cartier_test(sigma, &reduction)?);
    let quotient_q_gorenstein = q_cartier
        .as_ref()
        .map(|qc| verdict.is_q_gorenstein() && qc.is_cartier());

    // klt certificate: canonical base + finite group acting via lattice
    // automorphisms is all the hypothesis needs.
    let klt = if !verdict.is_canonical() {
        KltOutcome::Refusal {
            failed_check: "the affine toric variety of the cone is not canonical".into(),
        }
    } else if !invariant_divisor_check.passed() {
        KltOutcome::Refusal {
            failed_check: "a nontrivial element pointwise fixes a torus-invariant divisor".into(),
        }
    } else {
        let total: BigInt = ramification
            .iter()
            .fold(BigInt::zero(), |acc, s| acc + &s.components);
        KltOutcome::Certificate(KltCertificate {
            fan_canonical: true,
            group_acts: true,
            group_order: group.order(),
            reflection_count: ramification.len(),
            ramification_components: total,
            hypothesis_trace: vec![
                "affine toric variety of the cone is Q-Gorenstein with canonical singularities \
                 (lattice-point criterion on the polytope over the rays)"
                    .into(),
                format!(
                    "the group is finite of order {} with unimodular integer generators",
                    group.order()
                ),
                "every group element maps the cone to itself, so the group acts on the toric \
                 variety through torus automorphisms"
                    .into(),
                "the ramification divisor of the quotient is the sum of the reflection fixed \
                 divisors with reduced structure"
                    .into(),
                "no component of the ramification divisor is torus-invariant".into(),
                "conclusion: the pair (X/G, ½π(R)) is Kawamata log terminal (canonical toric \
                 base and finite quotient; cf. Kollár 1996, Lemma 3.16, and Shokurov 1993, \
                 Corollary 2.2)"
                    .into(),
            ],
        })
    };

    Ok(QuotientAnalysis {
        verdict,
        group_order: group.order(),
        reports,
        ramification,
        characters,
        invariant_reduction,
        q_cartier,
        quotient_q_gorenstein,
        invariant_divisor_check,
        klt,
    })
}

/// The reflection of the worked pentagon-cone example: diag(-1, 1, 1).
pub fn pentagon_reflection() -> IntMat {
    IntMat::from_rows(&[vec![-1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{bint, int_vec, primitivize_signed};
    use crate::toric::pentagon_cone;
    use num::traits::{Signed, ToPrimitive};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn closure_of_small_groups() {
        let neg = IntMat::from_rows(&[vec![-1, 0], vec![0, -1]]);
        assert_eq!(close_group(&[neg], 100).unwrap().order(), 2);

        let refl = pentagon_reflection();
        assert_eq!(close_group(&[refl], 100).unwrap().order(), 2);

        let rot = IntMat::from_rows(&[vec![0, -1], vec![1, 0]]);
        assert_eq!(close_group(&[rot], 100).unwrap().order(), 4);
    }

    #[test]
    fn closure_rejects_bad_generators() {
        let shear = IntMat::from_rows(&[vec![1, 1], vec![0, 1]]);
        // Infinite order: bound exceeded.
        assert!(matches!(
            close_group(&[shear], 50),
            Err(Error::OrderBoundExceeded(50))
        ));
        let sing = IntMat::from_rows(&[vec![2, 0], vec![0, 1]]);
        assert!(matches!(
            close_group(&[sing], 50),
            Err(Error::NotUnimodular)
        ));
    }

    #[test]
    fn classify_rank_one_torus_inversion() {
        // x -> x^{-1} on the 1-torus: matrix [-1], 2 fixed components.
        let g = close_group(&[IntMat::from_rows(&[vec![-1]])], 10).unwrap();
        let reports = classify_elements(&g);
        let refl: Vec<_> = reports
            .iter()
            .filter(|r| r.classification == ElementClass::Reflection)
            .collect();
        assert_eq!(refl.len(), 1);
        assert_eq!(refl[0].torus_fixed_components, Some(bint(2)));
        assert_eq!(refl[0].component_labels, vec!["(0)", "(1)"]);
    }

    #[test]
    fn classify_pentagon_reflection() {
        let g = close_group(&[pentagon_reflection()], 10).unwrap();
        let reports = classify_elements(&g);
        let refl: Vec<_> = reports
            .iter()
            .filter(|r| r.classification == ElementClass::Reflection)
            .collect();
        assert_eq!(refl.len(), 1);
        assert_eq!(refl[0].torus_fixed_components, Some(bint(2)));
        assert_eq!(refl[0].order, 2);
    }

    #[test]
    fn classify_minus_identity_as_other() {
        let g = close_group(&[IntMat::from_rows(&[vec![-1, 0], vec![0, -1]])], 10).unwrap();
        let reports = classify_elements(&g);
        for r in reports {
            if !r.element.is_identity() {
                assert_eq!(r.classification, ElementClass::Other);
                assert!(r.torus_fixed_components.is_none());
            }
        }
    }

    #[test]
    fn ramification_of_rotation_group_is_empty() {
        let rot = IntMat::from_rows(&[vec![0, -1], vec![1, 0]]);
        let g = close_group(&[rot], 10).unwrap();
        assert!(ramification_divisor(&g).is_empty());
    }

    #[test]
    fn ramification_of_reflection_group() {
        let g = close_group(&[pentagon_reflection()], 10).unwrap();
        let r = ramification_divisor(&g);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].components, bint(2));
    }

    /// Independent oracle: product of the nonzero invariant factors of A is
    /// the gcd of all rank-size minors.
    fn minor_gcd(a: &IntMat, rank: usize) -> BigInt {
        use num::integer::Integer;
        fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![Vec::new()];
            }
            if n < k {
                return Vec::new();
            }
            let mut out = Vec::new();
            for rest in combinations(n - 1, k - 1) {
                let mut c = rest.clone();
                c.push(n - 1);
                out.push(c);
            }
            out.extend(combinations(n - 1, k));
            out
        }
        let mut g = BigInt::zero();
        for rows in combinations(a.rows(), rank) {
            for cols in combinations(a.cols(), rank) {
                let mut sub = IntMat::zero(rank, rank);
                for (i, &r) in rows.iter().enumerate() {
                    for (j, &c) in cols.iter().enumerate() {
                        *sub.at_mut(i, j) = a.at(r, c).clone();
                    }
                }
                g = g.gcd(&sub.det());
            }
        }
        g
    }

    #[test]
    fn component_counts_match_minor_oracle() {
        for refl in [
            IntMat::from_rows(&[vec![-1]]),
            pentagon_reflection(),
            IntMat::from_rows(&[vec![0, 1], vec![1, 0]]),
            IntMat::from_rows(&[vec![1, 0], vec![4, -1]]),
        ] {
            let n = refl.rows();
            let diff = refl.sub(&IntMat::identity(n));
            let rank = diff.rank();
            if rank != 1 {
                continue;
            }
            let inv = torsion_invariants(&diff);
            assert_eq!(torsion_size(&inv), minor_gcd(&diff, rank).abs());
        }
    }

    #[test]
    fn conjugation_equivariance_of_classification() {
        let mut rng = StdRng::seed_from_u64(12);
        let base = close_group(&[pentagon_reflection()], 10).unwrap();
        let base_counts: Vec<Option<BigInt>> = classify_elements(&base)
            .into_iter()
            .map(|r| r.torus_fixed_components)
            .collect();
        for _ in 0..5 {
            let n = 3;
            let mut p = IntMat::identity(n);
            for _ in 0..8 {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n);
                while j == i {
                    j = rng.random_range(0..n);
                }
                let q = bint(rng.random_range(-2..3));
                for r in 0..n {
                    let add = &q * p.at(r, i);
                    *p.at_mut(r, j) += add;
                }
            }
            let p_inv = crate::linalg::invert_unimodular(&p);
            let conj_gen = p.mul(&pentagon_reflection()).mul(&p_inv);
            let conj = close_group(&[conj_gen], 10).unwrap();
            let mut counts: Vec<Option<BigInt>> = classify_elements(&conj)
                .into_iter()
                .map(|r| r.torus_fixed_components)
                .collect();
            let mut want = base_counts.clone();
            counts.sort();
            want.sort();
            assert_eq!(counts, want);
        }
    }

    #[test]
    fn invariant_divisor_check_pentagon() {
        let g = close_group(&[pentagon_reflection()], 10).unwrap();
        let fan = Fan::from_maximal(&[pentagon_cone()]).unwrap();
        let check = check_no_invariant_fixed_divisor(&g, &fan).unwrap();
        assert!(check.passed());
        // r fixes only the ray (0,2,1); the (±1,*,1) rays are swapped.
        assert_eq!(check.pairs_checked, 1);
    }

    #[test]
    fn invariant_divisor_check_trivial_group() {
        let g = FiniteMatrixGroup::trivial(3);
        let fan = Fan::from_maximal(&[pentagon_cone()]).unwrap();
        let check = check_no_invariant_fixed_divisor(&g, &fan).unwrap();
        assert!(check.passed());
        assert_eq!(check.pairs_checked, 0);
    }

    #[test]
    fn hypothetical_trivial_quotient_action_is_unreachable() {
        // A map acting as the identity on both Z*u and N/(Z*u) without being
        // the identity is a shear; it has infinite order, so group closure
        // rejects it before the divisor check could ever see one.
        let shear = IntMat::from_rows(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(shear.mul_vec(&int_vec(&[1, 0])), int_vec(&[1, 0]));
        assert!(matches!(
            close_group(&[shear], 1000),
            Err(Error::OrderBoundExceeded(_))
        ));
    }

    #[test]
    fn invariant_divisor_check_rejects_non_acting_group() {
        let rot = IntMat::from_rows(&[vec![0, -1], vec![1, 0]]);
        let g = close_group(&[rot], 10).unwrap();
        let quadrant = RationalCone::from_rows(&[vec![1, 0], vec![0, 1]], 2).unwrap();
        let fan = Fan::from_maximal(&[quadrant]).unwrap();
        assert!(matches!(
            check_no_invariant_fixed_divisor(&g, &fan),
            Err(Error::GroupDoesNotAct)
        ));
    }

    #[test]
    fn reflection_character_of_pentagon_reflection() {
        let a = reflection_character(&pentagon_reflection());
        assert_eq!(primitivize_signed(&a), int_vec(&[1, 0, 0]));
    }

    #[test]
    fn pentagon_quotient_analysis() {
        let analysis = quotient_analysis(&pentagon_cone(), &[pentagon_reflection()], 100).unwrap();
        assert_eq!(analysis.group_order, 2);
        assert!(analysis.verdict.is_canonical());
        assert_eq!(
            analysis.verdict.q_gorenstein,
            Some(crate::linalg::rat_vec(&[0, 0, 1]))
        );
        assert_eq!(analysis.ramification.len(), 1);
        assert_eq!(analysis.ramification[0].components, bint(2));
        // Invariant reduction: -1 on the four rays (±1,±1,1), 0 on (0,2,1).
        let reduction = analysis.invariant_reduction.as_ref().unwrap();
        let cone = pentagon_cone();
        for (u, c) in cone.rays().iter().zip(reduction.coefficients.iter()) {
            if u == &int_vec(&[0, 2, 1]) {
                assert!(c.is_zero());
            } else {
                assert_eq!(c.to_integer(), bint(-1));
                assert!(c.denom().is_one());
            }
        }
        // Not Q-Cartier, hence the quotient is not Q-Gorenstein.
        assert!(!analysis.q_cartier.as_ref().unwrap().is_cartier());
        assert_eq!(analysis.quotient_q_gorenstein, Some(false));
        // klt certificate is still emitted.
        assert!(analysis.klt.is_certificate());
        if let KltOutcome::Certificate(cert) = &analysis.klt {
            assert_eq!(cert.reflection_count, 1);
            assert_eq!(cert.ramification_components, bint(2));
            assert!(cert.hypothesis_trace.len() >= 5);
        }
    }

    #[test]
    fn swap_quotient_of_quadrant() {
        let quadrant = RationalCone::from_rows(&[vec![1, 0], vec![0, 1]], 2).unwrap();
        let swap = IntMat::from_rows(&[vec![0, 1], vec![1, 0]]);
        let analysis = quotient_analysis(&quadrant, &[swap], 100).unwrap();
        assert_eq!(analysis.group_order, 2);
        assert_eq!(analysis.ramification.len(), 1);
        // One fixed component: the diagonal.
        assert_eq!(analysis.ramification[0].components, bint(1));
        // The invariant reduction is Q-Cartier here.
        assert!(analysis.q_cartier.as_ref().unwrap().is_cartier());
        assert_eq!(analysis.quotient_q_gorenstein, Some(true));
        assert!(analysis.klt.is_certificate());
    }

    #[test]
    fn trivial_group_quotient() {
        let analysis = quotient_analysis(&pentagon_cone(), &[], 100).unwrap();
        assert_eq!(analysis.group_order, 1);
        assert!(analysis.ramification.is_empty());
        assert!(analysis.invariant_reduction.as_ref().unwrap().is_zero());
        assert!(analysis.q_cartier.as_ref().unwrap().is_cartier());
        assert_eq!(analysis.quotient_q_gorenstein, Some(true));
        assert!(analysis.klt.is_certificate());
    }

    #[test]
    fn refusal_for_non_canonical_base() {
        // 1/3(1,1): canonical fails, klt certificate must be refused.
        let c = RationalCone::from_rows(&[vec![1, 0], vec![-1, 3]], 2).unwrap();
        let analysis = quotient_analysis(&c, &[], 100).unwrap();
        assert!(!analysis.klt.is_certificate());
        if let KltOutcome::Refusal { failed_check } = &analysis.klt {
            assert!(failed_check.contains("canonical"));
        }
    }

    #[test]
    fn rejects_group_not_acting_on_cone() {
        let quadrant = RationalCone::from_rows(&[vec![1, 0], vec![0, 1]], 2).unwrap();
        let neg = IntMat::from_rows(&[vec![-1, 0], vec![0, -1]]);
        assert!(matches!(
            quotient_analysis(&quadrant, &[neg], 100),
            Err(Error::GroupDoesNotAct)
        ));
    }

    #[test]
    fn q_cartier_verdict_independent_of_character_choice() {
        // Shifting the character by an invariant character adds a principal
        // divisor and must not change the Q-Cartier verdict.
        let cone = pentagon_cone();
        let r = pentagon_reflection();
        let a0 = reflection_character(&r);
        let base = character_reduction(&cone, &r, &a0);
        let base_verdict = q_cartier_test(&cone, &base).unwrap().is_cartier();
        // Kernel of (r^T - I): invariant characters.
        let diff = r.transpose().sub(&IntMat::identity(3));
        for k in crate::linalg::integer_kernel(&diff) {
            for s in [1i64, -1, 2] {
                let shifted: IntVec = a0
                    .iter()
                    .zip(k.iter())
                    .map(|(x, y)| x + y * bint(s))
                    .collect();
                let red = character_reduction(&cone, &r, &shifted);
                // The reduction differs from base by div(chi^{s k}).
                let principal = crate::toric::divisor_of_character(
                    &cone,
                    &k.iter().map(|y| y * bint(s)).collect::<IntVec>(),
                );
                for ((b, sh), p) in base
                    .coefficients
                    .iter()
                    .zip(red.coefficients.iter())
                    .zip(principal.coefficients.iter())
                {
                    assert_eq!(sh.clone() - b.clone(), p.clone());
                }
                let v = q_cartier_test(&cone, &red).unwrap().is_cartier();
                assert_eq!(v, base_verdict);
            }
        }
    }

    #[test]
    fn reflections_in_closed_groups_are_involutions() {
        // Conjugates of block-diagonal reflections: classification stays
        // consistent and all rank-1 elements square to the identity.
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.random_range(2..4usize);
            let mut diag = IntMat::identity(n);
            *diag.at_mut(0, 0) = bint(-1);
            let mut p = IntMat::identity(n);
            for _ in 0..6 {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n);
                while j == i {
                    j = rng.random_range(0..n);
                }
                let q = bint(rng.random_range(-2..3));
                for r in 0..n {
                    let add = &q * p.at(r, i);
                    *p.at_mut(r, j) += add;
                }
            }
            let conj = p.mul(&diag).mul(&crate::linalg::invert_unimodular(&p));
            let g = close_group(&[conj], 100).unwrap();
            for rep in classify_elements(&g) {
                if rep.classification == ElementClass::Reflection {
                    assert!(rep.element.mul(&rep.element).is_identity());
                    assert_eq!(rep.order.to_i64(), Some(2));
                }
            }
        }
    }
}
