//! Polarized K3 lattices, isotropic splittings, and desk-scale probes of the
//! reflection-lifting hypothesis on the quotient of an isotropic line.

use crate::lattice::{
    classify_isometry, lift_reflection, make_reflection, quotient_by_isotropic, reduce_isometry,
    IntegralLattice, IsotropicData, LiftOutcome, ReflectionOutcome,
};
use crate::linalg::{bint, gcd_vec, lex_cmp, IntMat, IntVec};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, Signed, Zero};

/// The K3 lattice U^3 + E8(-1)^2: even, unimodular, signature (3,19).
pub fn k3_lattice() -> IntegralLattice {
    IntegralLattice::from_name("U+U+U+E8(-1)+E8(-1)").expect("builtin")
}

/// The polarized lattice U^2 + E8(-1)^2 + <-2d>: even, signature (2,19),
/// discriminant Z/2d.
pub fn build_polarized_lattice(d: i64) -> Result<IntegralLattice> {
    if d < 1 {
        return Err(Error::InvalidPolarization(d));
    }
    IntegralLattice::from_name(&format!("U+U+E8(-1)+E8(-1)+<{}>", -2 * d))
}

pub fn is_square_free(d: i64) -> bool {
    let mut n = d.abs();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// A lattice split along an isotropic vector: L = <l, l'> ⊥ complement with
/// <l, l'> a hyperbolic plane.
#[derive(Clone, Debug)]
pub struct PolarizedScenario {
    pub lattice: IntegralLattice,
    pub isotropic: IsotropicData,
    /// Partner l' with (l, l') = 1, (l', l') = 0.
    pub partner: IntVec,
    /// Columns: l, l', then a basis of the orthogonal complement.
    pub splitting_basis: IntMat,
    /// Gram of the complement block; matches the quotient l⊥/l.
    pub complement_gram: IntMat,
}

#[derive(Clone, Debug)]
pub enum SplitOutcome {
    Scenario(Box<PolarizedScenario>),
    /// (l, ·) only takes values in divisibility * Z: no partner exists.
    NoPartner {
        divisibility: BigInt,
    },
}

/// Split L along a primitive isotropic vector, finding l' with (l, l') = 1
/// and (l', l') = 0 and verifying the exact Gram block identity.
pub fn isotropic_splitting(lattice: &IntegralLattice, l: &[BigInt]) -> Result<SplitOutcome> {
    if !lattice.is_even() {
        return Err(Error::NotEven);
    }
    let n = lattice.rank();
    let w = lattice.gram().mul_vec(l);
    let div = gcd_vec(&w);
    if !div.is_one() {
        return Ok(SplitOutcome::NoPartner { divisibility: div });
    }
    let isotropic = quotient_by_isotropic(lattice, l)?;
    // x with w·x = 1 by folding the extended gcd over the coordinates.
    let mut x = vec![BigInt::zero(); n];
    let mut acc = BigInt::zero();
    let mut acc_coeffs: IntVec = vec![BigInt::zero(); n];
    for (i, wi) in w.iter().enumerate() {
        let e = acc.extended_gcd(wi);
        // e.gcd = e.x * acc + e.y * w_i
        for c in acc_coeffs.iter_mut() {
            *c *= &e.x;
        }
        acc_coeffs[i] = e.y.clone();
        acc = e.gcd;
        if acc.is_one() {
            x = acc_coeffs.clone();
            break;
        }
    }
    assert_eq!(crate::linalg::dot(&w, &x), BigInt::one(), "partner pairing");

    // Kill the norm: l' = x - ((x,x)/2) l stays integral on an even lattice.
    let c = lattice.norm(&x);
    let half: BigInt = &c / bint(2);
    let partner: IntVec = x
        .iter()
        .zip(l.iter())
        .map(|(xi, li)| xi - &half * li)
        .collect();
    assert!(lattice.norm(&partner).is_zero());
    assert_eq!(lattice.inner(l, &partner), BigInt::one());

    // Orthogonal complement of the hyperbolic pair: saturated kernel.
    let gp = lattice.gram().mul_vec(&partner);
    let rows = IntMat::from_big_rows(&[w, gp]);
    let kernel = crate::linalg::integer_kernel(&rows);
    assert_eq!(kernel.len(), n - 2);
    let mut cols: Vec<IntVec> = vec![l.to_vec(), partner.clone()];
    cols.extend(kernel.iter().cloned());
    let basis = IntMat::from_columns(&cols);
    assert!(
        basis.det().abs().is_one(),
        "hyperbolic pair splits off over Z"
    );

    // Exact Gram identity: B^T G B = U ⊕ complement.
    let conj = basis.transpose().mul(lattice.gram()).mul(&basis);
    let mut complement = IntMat::zero(n - 2, n - 2);
    for i in 0..n {
        for j in 0..n {
            let v = conj.at(i, j);
            if i < 2 && j < 2 {
                let want = if i != j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                };
                assert_eq!(*v, want, "hyperbolic block");
            } else if i < 2 || j < 2 {
                assert!(v.is_zero(), "off-diagonal block");
            } else {
                *complement.at_mut(i - 2, j - 2) = v.clone();
            }
        }
    }

    Ok(SplitOutcome::Scenario(Box::new(PolarizedScenario {
        lattice: lattice.clone(),
        isotropic,
        partner,
        splitting_basis: basis,
        complement_gram: complement,
    })))
}

/// The standard scenario for Λ_2d: split along e of the first U.
pub fn standard_scenario(d: i64) -> Result<PolarizedScenario> {
    let lattice = build_polarized_lattice(d)?;
    let mut l = vec![BigInt::zero(); lattice.rank()];
    l[0] = BigInt::one();
    match isotropic_splitting(&lattice, &l)? {
        SplitOutcome::Scenario(s) => Ok(*s),
        SplitOutcome::NoPartner { .. } => {
            unreachable!("the first hyperbolic summand always splits")
        }
    }
}

/// One attempted reflection lift in a probe.
#[derive(Clone, Debug)]
pub struct ProbeAttempt {
    /// Primitive (-1)-eigenvector in quotient coordinates.
    pub eigenvector: IntVec,
    /// Ambient reflection vector when the lift succeeded.
    pub lift_vector: Option<IntVec>,
    pub round_trip_ok: bool,
}

/// Outcome of enumerating quotient reflections up to a height bound and
/// trying to lift each one. A finite probe, not a proof.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub height: i64,
    pub reflections_found: usize,
    pub lifted: usize,
    pub attempts: Vec<ProbeAttempt>,
}

impl ProbeReport {
    pub fn all_lifted(&self) -> bool {
        self.lifted == self.reflections_found
    }
}

/// Enumerate integral reflections sigma_v of the quotient for primitive v up
/// to the height bound and attempt to lift each to a stable ambient
/// reflection fixing l.
pub fn main_theorem_probe(
    data: &IsotropicData,
    height: i64,
    lift_bound: i64,
) -> Result<ProbeReport> {
    let qrank = data.quotient.rank();
    let mut candidates: Vec<IntVec> = Vec::new();
    let mut v = vec![0i64; qrank];
    crate::lattice::enumerate_box(&mut v, 0, height, &mut |coords| {
        let vec: IntVec = coords.iter().map(|&x| bint(x)).collect();
        if vec.iter().all(|x| x.is_zero()) || !gcd_vec(&vec).is_one() {
            return;
        }
        if let Some(first) = vec.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                return;
            }
        }
        if !data.quotient.norm(&vec).is_zero() {
            candidates.push(vec);
        }
    });
    candidates.sort_by(|a, b| lex_cmp(a, b));

    let mut attempts = Vec::new();
    for vbar in candidates {
        let ReflectionOutcome::Integral(s) = make_reflection(&data.quotient, &vbar)? else {
            continue;
        };
        let rep = classify_isometry(&data.quotient, s.matrix());
        if !rep.is_reflection {
            continue;
        }
        // Skip duplicates: the same reflection can arise from proportional
        // eigenvectors only, which primitivity already rules out.
        let attempt = match lift_reflection(data, &s, lift_bound)? {
            LiftOutcome::Lifted(r) => {
                let back = reduce_isometry(data, &r)?;
                let round_trip_ok = back.matrix() == s.matrix()
                    && r.apply(&data.vector) == data.vector
                    && crate::lattice::is_stable(&data.lattice, r.matrix());
                let eig = classify_isometry(&data.lattice, r.matrix())
                    .reflection_vector
                    .expect("lift is a reflection");
                ProbeAttempt {
                    eigenvector: vbar,
                    lift_vector: Some(eig),
                    round_trip_ok,
                }
            }
            LiftOutcome::NotFound => ProbeAttempt {
                eigenvector: vbar,
                lift_vector: None,
                round_trip_ok: false,
            },
        };
        attempts.push(attempt);
    }
    let reflections_found = attempts.len();
    let lifted = attempts.iter().filter(|a| a.lift_vector.is_some()).count();
    Ok(ProbeReport {
        height,
        reflections_found,
        lifted,
        attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::discriminant_form;
    use crate::linalg::{bratio, int_vec, smith_normal_form};

    #[test]
    fn k3_lattice_shape() {
        let l = k3_lattice();
        assert_eq!(l.rank(), 22);
        assert!(l.is_even());
        assert_eq!(l.det().abs(), bint(1));
        assert_eq!(l.signature().unwrap(), (3, 19, 0));
    }

    #[test]
    fn polarized_lattice_d1_and_d3() {
        for (d, q_expected) in [(1i64, bratio(-1, 2)), (3, bratio(-1, 6))] {
            let l = build_polarized_lattice(d).unwrap();
            assert_eq!(l.rank(), 21);
            assert!(l.is_even());
            assert_eq!(l.signature().unwrap(), (2, 19, 0));
            let form = discriminant_form(&l).unwrap();
            assert_eq!(form.invariant_factors, vec![bint(2 * d)]);
            assert_eq!(form.q_values[0], crate::lattice::mod_two(&q_expected));
        }
        assert!(build_polarized_lattice(0).is_err());
    }

    #[test]
    fn standard_scenario_splits_exactly() {
        let s = standard_scenario(2).unwrap();
        // Quotient has signature (1,18) and discriminant Z/4.
        assert_eq!(s.isotropic.quotient.signature().unwrap(), (1, 18, 0));
        let form = discriminant_form(&s.isotropic.quotient).unwrap();
        assert_eq!(form.invariant_factors, vec![bint(4)]);
        // Complement block is isomorphic to the quotient as a lattice.
        let a = smith_normal_form(s.isotropic.quotient.gram()).invariant_factors();
        let b = smith_normal_form(&s.complement_gram).invariant_factors();
        assert_eq!(a, b);
    }

    #[test]
    fn splitting_u_plus_minus_two() {
        let l = IntegralLattice::from_name("U+<-2>").unwrap();
        match isotropic_splitting(&l, &int_vec(&[1, 0, 0])).unwrap() {
            SplitOutcome::Scenario(s) => {
                assert_eq!(s.partner, int_vec(&[0, 1, 0]));
                assert_eq!(*s.complement_gram.at(0, 0), bint(-2));
            }
            SplitOutcome::NoPartner { .. } => panic!("U summand must split"),
        }
    }

    #[test]
    fn no_partner_when_divisibility_exceeds_one() {
        let l = IntegralLattice::from_name("<2>+<-2>").unwrap();
        match isotropic_splitting(&l, &int_vec(&[1, 1])).unwrap() {
            SplitOutcome::NoPartner { divisibility } => assert_eq!(divisibility, bint(2)),
            SplitOutcome::Scenario(_) => panic!("(l, .) is divisible by 2"),
        }
    }

    #[test]
    fn probe_on_u_plus_minus_two() {
        let l = IntegralLattice::from_name("U+<-2>").unwrap();
        let data = quotient_by_isotropic(&l, &int_vec(&[1, 0, 0])).unwrap();
        let report = main_theorem_probe(&data, 2, 4).unwrap();
        assert_eq!(report.reflections_found, 1);
        assert!(report.all_lifted());
        assert!(report.attempts.iter().all(|a| a.round_trip_ok));
    }

    #[test]
    fn probe_on_u_plus_u() {
        let l = IntegralLattice::from_name("U+U").unwrap();
        let data = quotient_by_isotropic(&l, &int_vec(&[1, 0, 0, 0])).unwrap();
        let report = main_theorem_probe(&data, 2, 4).unwrap();
        // sigma_(1,1) and sigma_(1,-1) on the quotient U.
        assert_eq!(report.reflections_found, 2);
        assert!(report.all_lifted());
        assert!(report.attempts.iter().all(|a| a.round_trip_ok));
    }

    #[test]
    fn probe_height_zero_is_vacuous() {
        let l = IntegralLattice::from_name("U+<-2>").unwrap();
        let data = quotient_by_isotropic(&l, &int_vec(&[1, 0, 0])).unwrap();
        let report = main_theorem_probe(&data, 0, 2).unwrap();
        assert_eq!(report.reflections_found, 0);
        assert!(report.attempts.is_empty());
    }

    #[test]
    fn square_free_detection() {
        assert!(is_square_free(1));
        assert!(is_square_free(6));
        assert!(is_square_free(10));
        assert!(!is_square_free(4));
        assert!(!is_square_free(12));
        assert!(!is_square_free(18));
    }

    #[test]
    fn polarized_suite_small_d() {
        for d in [1i64, 2, 3, 5] {
            let l = build_polarized_lattice(d).unwrap();
            let form = discriminant_form(&l).unwrap();
            assert_eq!(form.order(), bint(2 * d));
        }
    }

    #[test]
    fn polarized_range_one_to_twenty() {
        for d in 1..=20i64 {
            let l = build_polarized_lattice(d).unwrap();
            assert!(l.is_even());
            assert_eq!(l.signature().unwrap(), (2, 19, 0));
            assert_eq!(l.det().abs(), bint(2 * d));
        }
    }
}
