//! Even lattices, discriminant forms, orthogonal-group membership,
//! reflections, isotropic vectors and the quotient l⊥/l of a lattice by a
//! primitive isotropic line.

use crate::linalg::{
    bint, complete_primitive_to_basis, dot, gcd_vec, integer_kernel, lex_cmp, matrix_order,
    primitivize_signed, rat_vec_to_int, smith_normal_form, solve_rational, vec_to_rat, IntMat,
    IntVec, LinSolve, RatVec,
};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

/// Free abelian group of finite rank with a symmetric integer bilinear form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralLattice {
    gram: IntMat,
}

impl IntegralLattice {
    pub fn new(gram: IntMat) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(IntegralLattice { gram })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        IntegralLattice::new(IntMat::from_rows(rows)).expect("gram must be symmetric")
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &IntMat {
        &self.gram
    }

    pub fn det(&self) -> BigInt {
        self.gram.det()
    }

    pub fn is_degenerate(&self) -> bool {
        self.det().is_zero()
    }

    /// Even: (x,x) ∈ 2Z for all x, equivalently every diagonal entry is even.
    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| (self.gram.at(i, i) % bint(2)).is_zero())
    }

    pub fn signature(&self) -> Result<(usize, usize, usize)> {
        crate::linalg::signature_of_symmetric(&self.gram)
    }

    pub fn inner(&self, a: &[BigInt], b: &[BigInt]) -> BigInt {
        dot(a, &self.gram.mul_vec(b))
    }

    pub fn norm(&self, v: &[BigInt]) -> BigInt {
        self.inner(v, v)
    }

    pub fn inner_rat(&self, a: &[BigRational], b: &[BigRational]) -> BigRational {
        let gb = self.gram.to_rational();
        let mut s = BigRational::zero();
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                s += ai * &gb[i][j] * bj;
            }
        }
        s
    }

    pub fn direct_sum(parts: &[IntegralLattice]) -> IntegralLattice {
        let n: usize = parts.iter().map(|p| p.rank()).sum();
        let mut gram = IntMat::zero(n, n);
        let mut off = 0;
        for p in parts {
            for i in 0..p.rank() {
                for j in 0..p.rank() {
                    *gram.at_mut(off + i, off + j) = p.gram.at(i, j).clone();
                }
            }
            off += p.rank();
        }
        IntegralLattice { gram }
    }

    /// The hyperbolic plane U.
    pub fn hyperbolic_plane() -> IntegralLattice {
        IntegralLattice::from_rows(&[vec![0, 1], vec![1, 0]])
    }

    /// Rank-1 lattice with Gram [k].
    pub fn rank_one(k: i64) -> IntegralLattice {
        IntegralLattice::from_rows(&[vec![k]])
    }

    /// E8 in the Bourbaki basis: even, positive definite, determinant 1.
    pub fn e8() -> IntegralLattice {
        IntegralLattice::from_rows(&[
            vec![2, 0, -1, 0, 0, 0, 0, 0],
            vec![0, 2, 0, -1, 0, 0, 0, 0],
            vec![-1, 0, 2, -1, 0, 0, 0, 0],
            vec![0, -1, -1, 2, -1, 0, 0, 0],
            vec![0, 0, 0, -1, 2, -1, 0, 0],
            vec![0, 0, 0, 0, -1, 2, -1, 0],
            vec![0, 0, 0, 0, 0, -1, 2, -1],
            vec![0, 0, 0, 0, 0, 0, -1, 2],
        ])
    }

    pub fn e8_negative() -> IntegralLattice {
        IntegralLattice::new(IntegralLattice::e8().gram.neg()).unwrap()
    }

    /// Parse a lattice name: "U", "E8", "E8(-1)", "<k>", or direct sums
    /// joined by '+', e.g. "U+U+E8(-1)+<-4>".
    pub fn from_name(name: &str) -> Result<IntegralLattice> {
        let mut parts = Vec::new();
        for token in name.split('+') {
            let token = token.trim();
            match token {
                "U" => parts.push(IntegralLattice::hyperbolic_plane()),
                "E8" => parts.push(IntegralLattice::e8()),
                "E8(-1)" => parts.push(IntegralLattice::e8_negative()),
                _ => {
                    if let Some(inner) = token.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
                        let k: i64 = inner
                            .parse()
                            .map_err(|_| Error::UnknownLattice(name.to_string()))?;
                        parts.push(IntegralLattice::rank_one(k));
                    } else {
                        return Err(Error::UnknownLattice(name.to_string()));
                    }
                }
            }
        }
        if parts.is_empty() {
            return Err(Error::UnknownLattice(name.to_string()));
        }
        Ok(IntegralLattice::direct_sum(&parts))
    }
}

/// Integer matrix preserving the Gram form of a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    matrix: IntMat,
}

impl Isometry {
    pub fn new(lattice: &IntegralLattice, matrix: IntMat) -> Result<Self> {
        if !is_isometry_matrix(lattice, &matrix) {
            return Err(Error::NotIsometry);
        }
        Ok(Isometry { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Isometry {
            matrix: IntMat::identity(n),
        }
    }

    pub fn matrix(&self) -> &IntMat {
        &self.matrix
    }

    pub fn apply(&self, v: &[BigInt]) -> IntVec {
        self.matrix.mul_vec(v)
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            matrix: self.matrix.mul(&other.matrix),
        }
    }
}

pub fn is_isometry_matrix(lattice: &IntegralLattice, g: &IntMat) -> bool {
    g.is_square()
        && g.rows() == lattice.rank()
        && g.transpose().mul(lattice.gram()).mul(g) == *lattice.gram()
}

// ---------------------------------------------------------------------------
// Discriminant form
// ---------------------------------------------------------------------------

/// Finite quadratic form on the discriminant group A = L∨/L.
///
/// Generators are dual vectors with rational coordinates in the basis of L;
/// `q_values` live in Q/2Z normalized to [0,2), `pairing` in Q/Z normalized
/// to [0,1).
#[derive(Clone, Debug)]
pub struct DiscriminantForm {
    pub invariant_factors: Vec<BigInt>,
    pub generators: Vec<RatVec>,
    pub q_values: Vec<BigRational>,
    pub pairing: Vec<Vec<BigRational>>,
}

pub fn mod_two(x: &BigRational) -> BigRational {
    let two = BigRational::from_integer(bint(2));
    let f = (x / &two).floor();
    x - f * two
}

pub fn mod_one(x: &BigRational) -> BigRational {
    x - x.floor()
}

impl DiscriminantForm {
    pub fn order(&self) -> BigInt {
        let mut o = BigInt::one();
        for d in &self.invariant_factors {
            o *= d;
        }
        o
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    /// Multiset of (element order, q-value) over the whole group; a basis
    /// independent fingerprint of the finite quadratic form. Only sensible
    /// for small groups.
    pub fn element_fingerprint(&self, lattice: &IntegralLattice) -> Vec<(BigInt, BigRational)> {
        let k = self.invariant_factors.len();
        let n = lattice.rank();
        let mut out = Vec::new();
        let mut idx = vec![BigInt::zero(); k];
        loop {
            let mut x = vec![BigRational::zero(); n];
            for (i, gen) in self.generators.iter().enumerate() {
                for (c, g) in x.iter_mut().zip(gen.iter()) {
                    *c += g * BigRational::from_integer(idx[i].clone());
                }
            }
            let q = mod_two(&lattice.inner_rat(&x, &x));
            let mut ord = BigInt::one();
            for (i, d) in self.invariant_factors.iter().enumerate() {
                let g = idx[i].gcd(d);
                let o = d / g;
                ord = ord.lcm(&o);
            }
            out.push((ord, q));
            // Odometer over the product of cyclic factors.
            let mut pos = 0;
            loop {
                if pos == k {
                    out.sort();
                    return out;
                }
                idx[pos] += 1;
                if idx[pos] < self.invariant_factors[pos] {
                    break;
                }
                idx[pos] = BigInt::zero();
                pos += 1;
            }
        }
    }
}

/// Discriminant group L∨/L with its induced Q/2Z-valued quadratic form.
pub fn discriminant_form(lattice: &IntegralLattice) -> Result<DiscriminantForm> {
    if lattice.is_degenerate() {
        return Err(Error::DegenerateLattice);
    }
    if !lattice.is_even() {
        return Err(Error::NotEven);
    }
    let g = lattice.gram();
    let snf = smith_normal_form(g);
    let u_inv = crate::linalg::invert_unimodular(&snf.u);
    let g_inv = g
        .inverse_rational()
        .expect("non-degenerate lattice has invertible Gram");
    let n = lattice.rank();

    let mut invariant_factors = Vec::new();
    let mut generators = Vec::new();
    for i in 0..n {
        let d = snf.d.at(i, i).clone();
        if d.is_one() {
            continue;
        }
        assert!(!d.is_zero(), "non-degenerate lattice with zero divisor");
        // Generator: G^{-1} U^{-1} e_i, a dual vector of order d in L∨/L.
        let col = u_inv.column(i);
        let gen: RatVec = (0..n)
            .map(|r| {
                let mut s = BigRational::zero();
                for (c, x) in col.iter().enumerate() {
                    s += &g_inv[r][c] * BigRational::from_integer(x.clone());
                }
                s
            })
            .collect();
        invariant_factors.push(d);
        generators.push(gen);
    }

    let q_values: Vec<BigRational> = generators
        .iter()
        .map(|v| mod_two(&lattice.inner_rat(v, v)))
        .collect();
    let pairing: Vec<Vec<BigRational>> = generators
        .iter()
        .map(|a| {
            generators
                .iter()
                .map(|b| mod_one(&lattice.inner_rat(a, b)))
                .collect()
        })
        .collect();

    Ok(DiscriminantForm {
        invariant_factors,
        generators,
        q_values,
        pairing,
    })
}

// ---------------------------------------------------------------------------
// Isometry classification
// ---------------------------------------------------------------------------

pub const DEFAULT_ORDER_BOUND: usize = 120;

#[derive(Clone, Debug)]
pub struct IsometryReport {
    pub is_isometry: bool,
    /// Acts as the identity on the discriminant group.
    pub is_stable: bool,
    pub is_reflection: bool,
    pub is_quasi_reflection: bool,
    /// None = order not found within the bound.
    pub order: Option<usize>,
    /// Primitive (-1)-eigenvector when the map is a reflection.
    pub reflection_vector: Option<IntVec>,
    /// (v,v) of the reflection vector; its sign is the spinor-norm datum.
    pub reflection_norm: Option<BigInt>,
}

/// Classify an arbitrary square integer matrix against a lattice.
/// A non-isometry is flagged in the report, not an error.
pub fn classify_isometry(lattice: &IntegralLattice, g: &IntMat) -> IsometryReport {
    let n = lattice.rank();
    let mut report = IsometryReport {
        is_isometry: false,
        is_stable: false,
        is_reflection: false,
        is_quasi_reflection: false,
        order: None,
        reflection_vector: None,
        reflection_norm: None,
    };
    if !g.is_square() || g.rows() != n {
        return report;
    }
    report.is_isometry = is_isometry_matrix(lattice, g);
    report.order = matrix_order(g, DEFAULT_ORDER_BOUND);

    let diff = g.sub(&IntMat::identity(n));
    if diff.rank() == 1 && report.order.is_some() {
        report.is_quasi_reflection = true;
        // Finite order + integer entries force the nontrivial eigenvalue to
        // be -1, i.e. g^2 = 1; anything else is an internal error.
        assert!(
            g.mul(g).is_identity(),
            "integer quasi-reflection of finite order must be an involution"
        );
        report.is_reflection = true;
        // (-1)-eigenvectors: kernel of (g + I).
        let mut gp = g.clone();
        for i in 0..n {
            *gp.at_mut(i, i) += BigInt::one();
        }
        let eig = integer_kernel(&gp);
        if eig.len() == 1 {
            let v = primitivize_signed(&eig[0]);
            report.reflection_norm = Some(lattice.norm(&v));
            report.reflection_vector = Some(v);
        }
    }

    if report.is_isometry && !lattice.is_degenerate() && lattice.is_even() {
        report.is_stable = is_stable(lattice, g);
    }
    report
}

/// Stability: g acts as the identity on the discriminant group.
pub fn is_stable(lattice: &IntegralLattice, g: &IntMat) -> bool {
    let form = discriminant_form(lattice).expect("lattice must be non-degenerate and even");
    for gen in &form.generators {
        let image = g_mul_rat(g, gen);
        for (a, b) in image.iter().zip(gen.iter()) {
            let diff = a - b;
            if !diff.denom().is_one() {
                return false;
            }
        }
    }
    true
}

fn g_mul_rat(g: &IntMat, v: &[BigRational]) -> RatVec {
    (0..g.rows())
        .map(|i| {
            let mut s = BigRational::zero();
            for j in 0..g.cols() {
                s += BigRational::from_integer(g.at(i, j).clone()) * &v[j];
            }
            s
        })
        .collect()
}

/// Outcome of building a reflection from a lattice vector.
#[derive(Clone, Debug)]
pub enum ReflectionOutcome {
    Integral(Isometry),
    /// sigma_v maps some basis vector outside the lattice.
    NotIntegral,
}

/// Reflection sigma_v(x) = x - 2 (x,v)/(v,v) v, when it is integral.
pub fn make_reflection(lattice: &IntegralLattice, v: &[BigInt]) -> Result<ReflectionOutcome> {
    let norm = lattice.norm(v);
    if norm.is_zero() {
        return Err(Error::IsotropicVector);
    }
    let n = lattice.rank();
    let gv = lattice.gram().mul_vec(v);
    let mut matrix = IntMat::identity(n);
    for j in 0..n {
        // sigma_v(e_j) = e_j - (2 (e_j, v)/(v,v)) v
        let coeff = BigRational::new(bint(2) * &gv[j], norm.clone());
        for i in 0..n {
            let term = &coeff * BigRational::from_integer(v[i].clone());
            if !term.denom().is_one() {
                return Ok(ReflectionOutcome::NotIntegral);
            }
            *matrix.at_mut(i, j) -= term.numer();
        }
    }
    let iso = Isometry::new(lattice, matrix)?;
    Ok(ReflectionOutcome::Integral(iso))
}

// ---------------------------------------------------------------------------
// Isotropic vectors
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct IsotropicEnumeration {
    pub vectors: Vec<IntVec>,
    /// Set when the lattice is definite and the list is empty by necessity.
    pub definiteness_note: Option<String>,
}

/// All primitive isotropic vectors with |coordinate| <= height, canonical
/// sign (first nonzero coordinate positive), lexicographically sorted.
pub fn primitive_isotropic_vectors(
    lattice: &IntegralLattice,
    height: i64,
) -> Result<IsotropicEnumeration> {
    let (pos, neg, zero) = lattice.signature()?;
    if zero == 0 && (pos == 0 || neg == 0) {
        let kind = if neg == 0 { "positive" } else { "negative" };
        return Ok(IsotropicEnumeration {
            vectors: Vec::new(),
            definiteness_note: Some(format!(
                "lattice is {kind} definite: no nonzero isotropic vectors exist"
            )),
        });
    }
    let n = lattice.rank();
    let mut out = Vec::new();
    let mut v = vec![0i64; n];
    enumerate_box(&mut v, 0, height, &mut |coords| {
        let vec: IntVec = coords.iter().map(|&x| bint(x)).collect();
        if vec.iter().all(|x| x.is_zero()) {
            return;
        }
        if !gcd_vec(&vec).is_one() {
            return;
        }
        // Canonical sign: keep only first-nonzero-positive representatives.
        if let Some(first) = vec.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                return;
            }
        }
        if lattice.norm(&vec).is_zero() {
            out.push(vec);
        }
    });
    out.sort_by(|a, b| lex_cmp(a, b));
    Ok(IsotropicEnumeration {
        vectors: out,
        definiteness_note: None,
    })
}

pub(crate) fn enumerate_box(v: &mut Vec<i64>, pos: usize, height: i64, f: &mut impl FnMut(&[i64])) {
    if pos == v.len() {
        f(v);
        return;
    }
    for x in -height..=height {
        v[pos] = x;
        enumerate_box(v, pos + 1, height, f);
    }
}

// ---------------------------------------------------------------------------
// Quotient by an isotropic line
// ---------------------------------------------------------------------------

/// Data of the quotient l⊥/l for a primitive isotropic vector l.
#[derive(Clone, Debug)]
pub struct IsotropicData {
    pub lattice: IntegralLattice,
    pub vector: IntVec,
    /// Basis of l⊥ as columns; the first column is l itself.
    pub perp_basis: IntMat,
    /// Induced even lattice on l⊥/l.
    pub quotient: IntegralLattice,
    /// Rational left inverse of `perp_basis`: coordinates in the perp basis.
    reduction: Vec<RatVec>,
}

impl IsotropicData {
    /// Quotient coordinates of a lattice vector lying in l⊥.
    pub fn reduce_vector(&self, x: &[BigInt]) -> IntVec {
        let coords: RatVec = self
            .reduction
            .iter()
            .map(|row| {
                let mut s = BigRational::zero();
                for (r, xi) in row.iter().zip(x.iter()) {
                    s += r * BigRational::from_integer(xi.clone());
                }
                s
            })
            .collect();
        let ints = rat_vec_to_int(&coords).expect("vector must lie in the l-perp lattice");
        ints[1..].to_vec()
    }

    /// A lattice vector in l⊥ mapping to the given quotient coordinates.
    pub fn lift_vector(&self, q: &[BigInt]) -> IntVec {
        let n = self.lattice.rank();
        let mut x = vec![BigInt::zero(); n];
        for (j, c) in q.iter().enumerate() {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += self.perp_basis.at(i, j + 1) * c;
            }
        }
        x
    }
}

pub fn quotient_by_isotropic(lattice: &IntegralLattice, l: &[BigInt]) -> Result<IsotropicData> {
    if lattice.is_degenerate() {
        return Err(Error::DegenerateLattice);
    }
    if !lattice.norm(l).is_zero() {
        return Err(Error::NotIsotropic);
    }
    if !gcd_vec(l).is_one() {
        return Err(Error::NotPrimitive);
    }
    let n = lattice.rank();
    if n < 3 {
        return Err(Error::Other(
            "quotient by an isotropic line needs rank >= 3".into(),
        ));
    }
    let w = lattice.gram().mul_vec(l);
    let w_row = IntMat::from_big_rows(&[w]);
    let kernel = integer_kernel(&w_row);
    assert_eq!(kernel.len(), n - 1, "l-perp must have corank 1");
    let k = IntMat::from_columns(&kernel);

    // Express l in the kernel basis; the coefficients are integral and
    // primitive because the kernel is saturated and l is primitive.
    let c = match solve_rational(&k, &vec_to_rat(l)) {
        LinSolve::Solution { particular, .. } => {
            rat_vec_to_int(&particular).expect("l lies in its own perp lattice")
        }
        LinSolve::Inconsistent { .. } => unreachable!("l lies in l-perp"),
    };
    let w_cmpl = complete_primitive_to_basis(&c);
    let perp_basis = k.mul(&w_cmpl);
    debug_assert_eq!(perp_basis.column(0), l.to_vec());

    // Induced Gram on the quotient basis (columns 1..).
    let m = n - 1;
    let mut qgram = IntMat::zero(m - 1, m - 1);
    for i in 1..m {
        for j in 1..m {
            *qgram.at_mut(i - 1, j - 1) =
                lattice.inner(&perp_basis.column(i), &perp_basis.column(j));
        }
    }
    let quotient = IntegralLattice::new(qgram)?;

    // Left inverse (B^T B)^{-1} B^T of the perp basis.
    let btb = perp_basis.transpose().mul(&perp_basis);
    let btb_inv = btb
        .inverse_rational()
        .expect("basis columns are independent");
    let bt = perp_basis.transpose();
    let reduction: Vec<RatVec> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = BigRational::zero();
                    for t in 0..m {
                        s += &btb_inv[i][t] * BigRational::from_integer(bt.at(t, j).clone());
                    }
                    s
                })
                .collect()
        })
        .collect();

    Ok(IsotropicData {
        lattice: lattice.clone(),
        vector: l.to_vec(),
        perp_basis,
        quotient,
        reduction,
    })
}

/// Reduce an ambient isometry stabilizing the line Zl to the quotient l⊥/l.
pub fn reduce_isometry(data: &IsotropicData, g: &Isometry) -> Result<Isometry> {
    let gl = g.apply(&data.vector);
    let neg_l: IntVec = data.vector.iter().map(|x| -x).collect();
    if gl != data.vector && gl != neg_l {
        return Err(Error::NotInStabilizer);
    }
    let n = data.lattice.rank();
    let m = n - 1;
    let mut cols = Vec::with_capacity(m - 1);
    for j in 1..m {
        let image = g.apply(&data.perp_basis.column(j));
        cols.push(data.reduce_vector(&image));
    }
    let reduced = IntMat::from_columns(&cols);
    Isometry::new(&data.quotient, reduced)
}

/// Outcome of a bounded search for a reflection lift.
#[derive(Clone, Debug)]
pub enum LiftOutcome {
    Lifted(Isometry),
    /// Exhausted the search bound; not a proof of non-existence.
    NotFound,
}

/// Look for a stable ambient reflection fixing l that reduces to `s`.
///
/// Candidates are sigma_w for w = k * lift(vbar) + t * l with k in 1..=bound
/// and |t| <= bound, where vbar generates the (-1)-eigenspace of `s`.
pub fn lift_reflection(data: &IsotropicData, s: &Isometry, bound: i64) -> Result<LiftOutcome> {
    let report = classify_isometry(&data.quotient, s.matrix());
    if !report.is_reflection {
        return Err(Error::NotReflection);
    }
    let vbar = report
        .reflection_vector
        .as_ref()
        .expect("reflection has an eigenvector")
        .clone();
    let lift0 = data.lift_vector(&vbar);

    let mut seen: Vec<IntVec> = Vec::new();
    for k in 1..=bound {
        for t in -bound..=bound {
            let mut w = crate::linalg::scale_vec(&lift0, &bint(k));
            for (wi, li) in w.iter_mut().zip(data.vector.iter()) {
                *wi += li * bint(t);
            }
            let w = primitivize_signed(&w);
            if w.iter().all(|x| x.is_zero()) || seen.contains(&w) {
                continue;
            }
            seen.push(w.clone());
            if data.lattice.norm(&w).is_zero() {
                continue;
            }
            if let ReflectionOutcome::Integral(r) = make_reflection(&data.lattice, &w)? {
                if !is_stable(&data.lattice, r.matrix()) {
                    continue;
                }
                if r.apply(&data.vector) != data.vector {
                    continue;
                }
                match reduce_isometry(data, &r) {
                    Ok(rbar) if rbar.matrix() == s.matrix() => {
                        return Ok(LiftOutcome::Lifted(r));
                    }
                    _ => continue,
                }
            }
        }
    }
    Ok(LiftOutcome::NotFound)
}
