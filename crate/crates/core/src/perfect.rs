//! Perfect cone decompositions of self-adjoint cones, computed locally.
//!
//! For a Lorentzian positive cone or the PSD form cone, the fan of cones over
//! the faces of conv(C̄ ∩ L∖{0}) is infinite; we compute the piece meeting a
//! rational polyhedral window. Facets are discovered by supporting-hyperplane
//! rotation and ridge pivoting over an enumerated point sample, and every
//! reported facet carries an exact completeness certificate: the compact slab
//! {x ∈ C̄ : ⟨w,x⟩ ≤ 1} is enumerated in full from bounds derived from the
//! Gram form, independent of the sample height.

use crate::cones::{hull_of_int_points, Fan, RationalCone};
use crate::lattice::IntegralLattice;
use crate::linalg::{
    bint, dot, lex_cmp, primitivize, rat_to_primitive_int, vec_to_rat, IntMat, IntVec, RatVec,
};
use crate::toric::{fan_singularity_verdict, SingularityVerdict};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// A self-adjoint cone together with its lattice, in coordinates.
#[derive(Clone, Debug)]
pub enum SelfAdjointConeModel {
    /// Positive cone {x : (x,x) > 0} of a signature-(1,k) lattice, the
    /// connected component containing `component`.
    Lorentzian {
        lattice: IntegralLattice,
        component: IntVec,
    },
    /// Cone of positive semidefinite g x g forms inside the lattice of
    /// integer symmetric matrices, coordinates (a_11, a_12, .., a_gg) in
    /// lexicographic (i <= j) order.
    PsdForms { g: usize },
}

impl SelfAdjointConeModel {
    pub fn lorentzian(lattice: IntegralLattice, component: IntVec) -> Result<Self> {
        let (pos, neg, zero) = lattice.signature()?;
        if pos != 1 || zero != 0 {
            return Err(Error::NotLorentzian(pos, neg, zero));
        }
        if !lattice.norm(&component).is_positive() {
            return Err(Error::NotInterior);
        }
        Ok(SelfAdjointConeModel::Lorentzian { lattice, component })
    }

    /// Lorentzian model with the component picked by a deterministic small
    /// search for a positive-norm vector.
    pub fn lorentzian_auto(lattice: IntegralLattice) -> Result<Self> {
        let n = lattice.rank();
        for h in 1..=3i64 {
            let mut found: Option<IntVec> = None;
            let mut v = vec![0i64; n];
            crate::lattice::enumerate_box(&mut v, 0, h, &mut |coords| {
                if found.is_some() {
                    return;
                }
                let vec: IntVec = coords.iter().map(|&x| bint(x)).collect();
                if lattice.norm(&vec).is_positive() {
                    // Sign-canonical representative: both components contain
                    // ±v, so pick the first-nonzero-positive one.
                    found = Some(crate::linalg::primitivize_signed(&vec));
                }
            });
            if let Some(p) = found {
                return SelfAdjointConeModel::lorentzian(lattice, p);
            }
        }
        Err(Error::NotInterior)
    }

    pub fn psd(g: usize) -> Self {
        assert!(g >= 1);
        SelfAdjointConeModel::PsdForms { g }
    }

    /// Dimension of the coordinate space.
    pub fn dim(&self) -> usize {
        match self {
            SelfAdjointConeModel::Lorentzian { lattice, .. } => lattice.rank(),
            SelfAdjointConeModel::PsdForms { g } => g * (g + 1) / 2,
        }
    }

    /// Exact membership in the closed cone (the chosen component).
    pub fn contains_closed(&self, x: &[BigInt]) -> bool {
        if x.iter().all(|v| v.is_zero()) {
            return true;
        }
        match self {
            SelfAdjointConeModel::Lorentzian { lattice, component } => {
                !lattice.norm(x).is_negative() && lattice.inner(x, component).is_positive()
            }
            SelfAdjointConeModel::PsdForms { g } => {
                let m = coords_to_sym(x, *g);
                match crate::linalg::signature_of_symmetric(&m) {
                    Ok((_, neg, _)) => neg == 0,
                    Err(_) => false,
                }
            }
        }
    }

    /// The pairing functional of a point: c with c·y = (x, y) (Lorentzian)
    /// or c·y = Tr(x y) (PSD).
    pub fn functional_of_point(&self, x: &[BigInt]) -> IntVec {
        match self {
            SelfAdjointConeModel::Lorentzian { lattice, .. } => lattice.gram().mul_vec(x),
            SelfAdjointConeModel::PsdForms { g } => {
                let mut c = x.to_vec();
                let mut idx = 0;
                for i in 0..*g {
                    for j in i..*g {
                        if i != j {
                            c[idx] = &x[idx] * bint(2);
                        }
                        idx += 1;
                    }
                }
                c
            }
        }
    }

    /// The dual-pairing representative of a functional: the vector w with
    /// ⟨w, x⟩ = c·x through the form (Lorentzian: G^{-1} c; PSD: the
    /// symmetric matrix with w_ii = c_ii, w_ij = c_ij / 2).
    pub fn dual_vector_of_functional(&self, c: &[BigRational]) -> RatVec {
        match self {
            SelfAdjointConeModel::Lorentzian { lattice, .. } => {
                let g_inv = lattice.gram().inverse_rational().expect("non-degenerate");
                (0..c.len())
                    .map(|i| {
                        let mut s = BigRational::zero();
                        for (j, cj) in c.iter().enumerate() {
                            s += &g_inv[i][j] * cj;
                        }
                        s
                    })
                    .collect()
            }
            SelfAdjointConeModel::PsdForms { g } => {
                let mut w = c.to_vec();
                let half = BigRational::new(BigInt::one(), bint(2));
                let mut idx = 0;
                for i in 0..*g {
                    for j in i..*g {
                        if i != j {
                            w[idx] = &c[idx] * &half;
                        }
                        idx += 1;
                    }
                }
                w
            }
        }
    }

    /// Is the functional strictly inside the dual cone? Exactly then the
    /// slab {x ∈ C̄ : c·x <= t} is compact.
    pub fn functional_is_interior(&self, c: &[BigRational]) -> bool {
        match self {
            SelfAdjointConeModel::Lorentzian { lattice, component } => {
                let g_inv = lattice.gram().inverse_rational().expect("non-degenerate");
                let mut norm = BigRational::zero();
                for (i, ci) in c.iter().enumerate() {
                    for (j, cj) in c.iter().enumerate() {
                        norm += ci * &g_inv[i][j] * cj;
                    }
                }
                let pc = crate::linalg::dot_rat_int(c, component);
                norm.is_positive() && pc.is_positive()
            }
            SelfAdjointConeModel::PsdForms { g } => {
                let w = self.dual_vector_of_functional(c);
                match rational_sym_signature(&w, *g) {
                    Ok((pos, _, _)) => pos == *g,
                    Err(_) => false,
                }
            }
        }
    }

    /// Is the functional in the closed dual cone (non-negative on C̄)?
    pub fn functional_in_closed_dual(&self, c: &[BigRational]) -> bool {
        match self {
            SelfAdjointConeModel::Lorentzian { lattice, component } => {
                let g_inv = lattice.gram().inverse_rational().expect("non-degenerate");
                let mut norm = BigRational::zero();
                for (i, ci) in c.iter().enumerate() {
                    for (j, cj) in c.iter().enumerate() {
                        norm += ci * &g_inv[i][j] * cj;
                    }
                }
                let pc = crate::linalg::dot_rat_int(c, component);
                !norm.is_negative() && !pc.is_negative()
            }
            SelfAdjointConeModel::PsdForms { g } => {
                let w = self.dual_vector_of_functional(c);
                match rational_sym_signature(&w, *g) {
                    Ok((_, neg, _)) => neg == 0,
                    Err(_) => false,
                }
            }
        }
    }

    /// Lift a group element to its action on the coordinate space, verifying
    /// that it preserves the lattice and the cone model. Lorentzian elements
    /// are isometries of the lattice preserving the component; PSD elements
    /// are unimodular g x g matrices acting by congruence.
    pub fn lift_group_element(&self, m: &IntMat) -> Result<IntMat> {
        match self {
            SelfAdjointConeModel::Lorentzian { lattice, component } => {
                if !crate::lattice::is_isometry_matrix(lattice, m) {
                    return Err(Error::NotIsometry);
                }
                let gp = m.mul_vec(component);
                if !lattice.inner(&gp, component).is_positive() {
                    return Err(Error::GroupDoesNotAct);
                }
                Ok(m.clone())
            }
            SelfAdjointConeModel::PsdForms { g } => {
                if m.rows() != *g || !m.is_unimodular() {
                    return Err(Error::NotUnimodular);
                }
                Ok(congruence_action(m, *g))
            }
        }
    }
}

/// Coordinates (i <= j lexicographic) to the symmetric integer matrix.
pub fn coords_to_sym(x: &[BigInt], g: usize) -> IntMat {
    let mut m = IntMat::zero(g, g);
    let mut idx = 0;
    for i in 0..g {
        for j in i..g {
            *m.at_mut(i, j) = x[idx].clone();
            *m.at_mut(j, i) = x[idx].clone();
            idx += 1;
        }
    }
    m
}

pub fn sym_to_coords(m: &IntMat) -> IntVec {
    let g = m.rows();
    let mut out = Vec::with_capacity(g * (g + 1) / 2);
    for i in 0..g {
        for j in i..g {
            out.push(m.at(i, j).clone());
        }
    }
    out
}

/// Signature of a rational symmetric matrix given by coordinates.
fn rational_sym_signature(w: &[BigRational], g: usize) -> Result<(usize, usize, usize)> {
    let mut lcm = BigInt::one();
    for x in w {
        lcm = lcm.lcm(x.denom());
    }
    let ints: IntVec = w.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    crate::linalg::signature_of_symmetric(&coords_to_sym(&ints, g))
}

/// Coordinate action of h in GL_g(Z) on symmetric matrices, x -> h x h^T.
fn congruence_action(h: &IntMat, g: usize) -> IntMat {
    let dim = g * (g + 1) / 2;
    let mut cols: Vec<IntVec> = Vec::with_capacity(dim);
    for i in 0..g {
        for j in i..g {
            let mut basis = IntMat::zero(g, g);
            *basis.at_mut(i, j) = BigInt::one();
            *basis.at_mut(j, i) = BigInt::one();
            let image = h.mul(&basis).mul(&h.transpose());
            cols.push(sym_to_coords(&image));
        }
    }
    IntMat::from_columns(&cols)
}

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

/// Full-dimensional pointed cone selecting the region of the perfect fan to
/// compute. Generators must have non-negative norm and lie in the closure of
/// the chosen component.
#[derive(Clone, Debug)]
pub struct Window {
    pub cone: RationalCone,
}

impl Window {
    pub fn new(model: &SelfAdjointConeModel, cone: RationalCone) -> Result<Window> {
        if cone.ambient_dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: cone.ambient_dim(),
            });
        }
        if !cone.is_full_dimensional() {
            return Err(Error::InvalidWindow(
                "window must be full-dimensional".into(),
            ));
        }
        if !cone.is_pointed() {
            return Err(Error::InvalidWindow("window must be pointed".into()));
        }
        for gdir in cone.generators() {
            if !model.contains_closed(gdir) {
                return Err(Error::InvalidWindow(format!(
                    "generator {:?} is outside the closed cone",
                    gdir.iter().map(|x| x.to_string()).collect::<Vec<_>>()
                )));
            }
        }
        Ok(Window { cone })
    }

    pub fn from_rows(model: &SelfAdjointConeModel, rows: &[Vec<i64>]) -> Result<Window> {
        let cone = RationalCone::from_rows(rows, model.dim())?;
        Window::new(model, cone)
    }

    /// An interior direction: the sum of the extreme rays.
    pub fn interior_direction(&self) -> IntVec {
        let d = self.cone.ambient_dim();
        let mut s = vec![BigInt::zero(); d];
        for r in self.cone.rays() {
            for (si, ri) in s.iter_mut().zip(r.iter()) {
                *si += ri;
            }
        }
        primitivize(&s)
    }
}

// ---------------------------------------------------------------------------
// Point enumeration
// ---------------------------------------------------------------------------

/// All lattice points of C̄∖{0} with |coordinate| <= height, sorted.
pub fn cone_points(model: &SelfAdjointConeModel, height: i64) -> Vec<IntVec> {
    assert!(height >= 1, "height bound must be positive");
    let dim = model.dim();
    let mut out = Vec::new();
    let mut v = vec![0i64; dim];
    crate::lattice::enumerate_box(&mut v, 0, height, &mut |coords| {
        if coords.iter().all(|&x| x == 0) {
            return;
        }
        let vec: IntVec = coords.iter().map(|&x| bint(x)).collect();
        if model.contains_closed(&vec) {
            out.push(vec);
        }
    });
    out.sort_by(|a, b| lex_cmp(a, b));
    out
}

/// floor((a + sqrt(b)) / c) for rationals with b >= 0, c > 0, exact.
fn floor_affine_sqrt(a: &BigRational, b: &BigRational, c: &BigRational) -> BigInt {
    assert!(!b.is_negative() && c.is_positive());
    // p(n): n <= (a + sqrt(b))/c  <=>  n c - a <= sqrt(b).
    let p = |n: &BigInt| -> bool {
        let t = BigRational::from_integer(n.clone()) * c - a;
        if !t.is_positive() {
            return true;
        }
        &t * &t <= *b
    };
    let mut n = BigInt::zero();
    if p(&n) {
        let mut step = BigInt::one();
        while p(&(&n + &step)) {
            n += &step;
            step *= bint(2);
        }
        // n satisfies, n + step does not; binary search in (n, n + step).
        let mut lo = n.clone();
        let mut hi = &n + &step;
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) / bint(2);
            if p(&mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    } else {
        let mut step = BigInt::one();
        while !p(&(&n - &step)) {
            n -= &step;
            step *= bint(2);
        }
        let mut lo = &n - &step; // satisfies
        let mut hi = n.clone(); // does not
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) / bint(2);
            if p(&mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// ceil((a - sqrt(b)) / c) = -floor((-a + sqrt(b)) / c).
fn ceil_affine_sqrt(a: &BigRational, b: &BigRational, c: &BigRational) -> BigInt {
    -floor_affine_sqrt(&-a.clone(), b, c)
}

/// Exact coordinate bounds for the compact slab {x ∈ C̄ : c·x <= t}.
fn slab_box(
    model: &SelfAdjointConeModel,
    c: &[BigRational],
    t: &BigRational,
) -> Result<(IntVec, IntVec)> {
    if !model.functional_is_interior(c) {
        return Err(Error::Other(
            "slab bounds need a functional interior to the dual cone".into(),
        ));
    }
    let dim = model.dim();
    match model {
        SelfAdjointConeModel::Lorentzian { lattice, .. } => {
            let g_inv = lattice.gram().inverse_rational().expect("non-degenerate");
            // Dual-form products <f, c>* for f = e_i, and <c, c>*.
            let mut cc = BigRational::zero();
            for (i, ci) in c.iter().enumerate() {
                for (j, cj) in c.iter().enumerate() {
                    cc += ci * &g_inv[i][j] * cj;
                }
            }
            let mut lo = Vec::with_capacity(dim);
            let mut hi = Vec::with_capacity(dim);
            for i in 0..dim {
                let mut fc = BigRational::zero();
                for (j, cj) in c.iter().enumerate() {
                    fc += &g_inv[i][j] * cj;
                }
                let ff = g_inv[i][i].clone();
                // Extremes of e_i over {q(x)=0, c·x = t}: t (fc ± sqrt(D*)) / cc.
                let dstar = &fc * &fc - &cc * &ff;
                assert!(
                    !dstar.is_negative(),
                    "dual-form 2-plane through an interior functional is indefinite"
                );
                let a = t * &fc;
                let b = t * t * &dstar;
                let max = floor_affine_sqrt(&a, &b, &cc);
                let min = ceil_affine_sqrt(&a, &b, &cc);
                hi.push(max.max(BigInt::zero()));
                lo.push(min.min(BigInt::zero()));
            }
            Ok((lo, hi))
        }
        SelfAdjointConeModel::PsdForms { g } => {
            let w = model.dual_vector_of_functional(c);
            let mut lcm = BigInt::one();
            for x in &w {
                lcm = lcm.lcm(x.denom());
            }
            let wints: IntVec = w.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
            let wmat = coords_to_sym(&wints, *g);
            let winv_scaled = wmat.inverse_rational().expect("positive definite");
            // w = wmat / lcm, so w^{-1} = lcm * wmat^{-1}.
            let lcm_rat = BigRational::from_integer(lcm);
            let diag_bound = |i: usize| -> BigRational { &lcm_rat * &winv_scaled[i][i] * t };
            let mut lo = vec![BigInt::zero(); dim];
            let mut hi = vec![BigInt::zero(); dim];
            let mut idx = 0;
            for i in 0..*g {
                for j in i..*g {
                    if i == j {
                        hi[idx] = diag_bound(i).floor().to_integer();
                        lo[idx] = BigInt::zero();
                    } else {
                        // |x_ij| <= (x_ii + x_jj)/2 on PSD matrices.
                        let b =
                            (diag_bound(i) + diag_bound(j)) / BigRational::from_integer(bint(2));
                        hi[idx] = b.floor().to_integer();
                        lo[idx] = -hi[idx].clone();
                    }
                    idx += 1;
                }
            }
            Ok((lo, hi))
        }
    }
}

/// Exact enumeration of {x ∈ C̄∖0, lattice : c·x <= t}. Compactness (and
/// hence termination) holds because c is interior to the dual cone.
pub fn slab_points(
    model: &SelfAdjointConeModel,
    c: &[BigRational],
    t: &BigRational,
) -> Result<Vec<IntVec>> {
    if t.is_negative() {
        return Ok(Vec::new());
    }
    let (lo, hi) = slab_box(model, c, t)?;
    let dim = model.dim();
    let mut out = Vec::new();
    let mut cur = lo.clone();
    'outer: loop {
        if !cur.iter().all(|x| x.is_zero())
            && crate::linalg::dot_rat_int(c, &cur) <= *t
            && model.contains_closed(&cur)
        {
            out.push(cur.clone());
        }
        let mut pos = 0;
        loop {
            if pos == dim {
                break 'outer;
            }
            cur[pos] += 1;
            if cur[pos] <= hi[pos] {
                break;
            }
            cur[pos] = lo[pos].clone();
            pos += 1;
        }
    }
    out.sort_by(|a, b| lex_cmp(a, b));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Perfect facets
// ---------------------------------------------------------------------------

/// Exact enumeration bounds backing the facet's completeness claim.
#[derive(Clone, Debug)]
pub struct FacetCertificate {
    pub box_low: IntVec,
    pub box_high: IntVec,
    pub points_checked: usize,
}

/// A facet of K_p = conv(C̄ ∩ L∖{0}), with normal scaled to level 1.
#[derive(Clone, Debug)]
pub struct PerfectFacet {
    /// Level-1 functional: normal·x = 1 on the facet (coordinate pairing).
    pub normal: RatVec,
    /// The same normal as a dual vector through the form pairing.
    pub normal_dual_vector: RatVec,
    /// Extreme lattice points of the facet.
    pub vertices: Vec<IntVec>,
    /// All lattice points lying on the facet.
    pub lattice_points: Vec<IntVec>,
    pub certificate: FacetCertificate,
}

impl PerfectFacet {
    pub fn cone(&self, dim: usize) -> RationalCone {
        RationalCone::from_generators(&self.vertices, dim).expect("facet cone")
    }

    /// Canonical key: the primitive integer multiple of the normal.
    pub fn key(&self) -> IntVec {
        rat_to_primitive_int(&self.normal)
    }
}

/// Face of K_p supported at level zero along the boundary of the cone;
/// reported without a vertex-completeness claim.
#[derive(Clone, Debug)]
pub struct UnboundedFace {
    /// Primitive covector vanishing on the face.
    pub covector: IntVec,
    /// For Lorentzian models, the primitive isotropic ray spanning the face.
    pub ray: Option<IntVec>,
}

fn certificate_failure(height: i64, witness: &[BigInt]) -> Error {
    Error::CertificateFailure {
        height,
        witness: witness.iter().map(|x| x.to_string()).collect(),
    }
}

/// Certify that the level-1 functional c supports a facet of K_p and recover
/// its complete vertex and lattice-point sets.
fn certify_facet(
    model: &SelfAdjointConeModel,
    c: &[BigRational],
    height: i64,
) -> Result<PerfectFacet> {
    let one = BigRational::one();
    let (lo, hi) = slab_box(model, c, &one)?;
    let pts = slab_points(model, c, &one)?;
    let mut on_facet = Vec::new();
    for x in &pts {
        let v = crate::linalg::dot_rat_int(c, x);
        if v < one {
            return Err(certificate_failure(height, x));
        }
        if v == one {
            on_facet.push(x.clone());
        }
    }
    if on_facet.is_empty() {
        return Err(Error::Other(
            "candidate facet supports no lattice point".into(),
        ));
    }
    // Vertices: extreme points of the hull of the facet lattice points.
    let hull = hull_of_int_points(&on_facet)?;
    let mut vertices: Vec<IntVec> = hull
        .vertices
        .iter()
        .map(|v| crate::linalg::rat_vec_to_int(v).expect("facet vertices are lattice points"))
        .collect();
    vertices.sort_by(|a, b| lex_cmp(a, b));
    Ok(PerfectFacet {
        normal: c.to_vec(),
        normal_dual_vector: model.dual_vector_of_functional(c),
        vertices,
        lattice_points: on_facet,
        certificate: FacetCertificate {
            box_low: lo,
            box_high: hi,
            points_checked: pts.len(),
        },
    })
}

/// Find a facet of K_p supported by a hyperplane facing the interior
/// direction d: minimize d's functional over the slab, then rotate the
/// supporting hyperplane until its support has full rank.
fn initial_facet(
    model: &SelfAdjointConeModel,
    sample: &[IntVec],
    d: &[BigInt],
    height: i64,
) -> Result<PerfectFacet> {
    let dim = model.dim();
    let c_d = vec_to_rat(&model.functional_of_point(d));
    if sample.is_empty() {
        return Err(Error::EmptyInput("no cone points at this height".into()));
    }
    let mut m0 = crate::linalg::dot_rat_int(&c_d, &sample[0]);
    for x in &sample[1..] {
        let v = crate::linalg::dot_rat_int(&c_d, x);
        if v < m0 {
            m0 = v;
        }
    }
    // Exact minimum over the certified slab (independent of the sample).
    let slab = slab_points(model, &c_d, &m0)?;
    let mut mstar = m0.clone();
    for x in &slab {
        let v = crate::linalg::dot_rat_int(&c_d, x);
        if v < mstar {
            mstar = v;
        }
    }
    let mut c: RatVec = c_d.iter().map(|x| x / &mstar).collect();

    for _ in 0..=dim {
        let support: Vec<IntVec> = slab_points(model, &c, &BigRational::one())?
            .into_iter()
            .filter(|x| crate::linalg::dot_rat_int(&c, x) == BigRational::one())
            .collect();
        if support.is_empty() {
            return Err(Error::Other(
                "supporting hyperplane lost its support".into(),
            ));
        }
        let rank = IntMat::from_big_rows(&support).rank();
        if rank == dim {
            return certify_facet(model, &c, height);
        }
        // Rotate within the pencil of hyperplanes through the support.
        let a = IntMat::from_big_rows(&support);
        let kernel = crate::linalg::integer_kernel(&a);
        let u = kernel
            .first()
            .cloned()
            .ok_or_else(|| Error::Other("no rotation direction".into()))?;
        let mut rotated = None;
        for dir in [u.clone(), u.iter().map(|x| -x).collect::<IntVec>()] {
            let mut best: Option<BigRational> = None;
            for x in sample {
                let ux = dot(&dir, x);
                if !ux.is_negative() {
                    continue;
                }
                let cx = crate::linalg::dot_rat_int(&c, x);
                if cx <= BigRational::one() {
                    continue;
                }
                let theta = (cx - BigRational::one()) / BigRational::from_integer(-ux.clone());
                if best.as_ref().is_none_or(|b| theta < *b) {
                    best = Some(theta);
                }
            }
            if let Some(theta) = best {
                let cand: RatVec = c
                    .iter()
                    .zip(dir.iter())
                    .map(|(ci, ui)| ci + &theta * BigRational::from_integer(ui.clone()))
                    .collect();
                if model.functional_is_interior(&cand) {
                    rotated = Some(cand);
                    break;
                }
            }
        }
        c = rotated.ok_or_else(|| {
            Error::Other("rotation found no stopping point; raise the height".into())
        })?;
    }
    Err(Error::Other("rotation did not terminate".into()))
}

enum PivotResult {
    Facet(PerfectFacet),
    Unbounded(UnboundedFace),
}

/// Pivot across a ridge of a facet to its neighbor.
fn pivot_over_ridge(
    model: &SelfAdjointConeModel,
    sample: &[IntVec],
    facet: &PerfectFacet,
    ridge_vertices: &[IntVec],
    height: i64,
) -> Result<PivotResult> {
    let c = &facet.normal;
    // The pencil through the ridge: u vanishes on all ridge vertices.
    let a = IntMat::from_big_rows(ridge_vertices);
    let kernel = crate::linalg::integer_kernel(&a);
    assert_eq!(kernel.len(), 1, "ridge span must have corank 1");
    let mut u = kernel[0].clone();
    // Orient: tilt up over the rest of the old facet.
    let v_op = facet
        .vertices
        .iter()
        .find(|v| !ridge_vertices.contains(v))
        .expect("facet has a vertex off each ridge");
    if dot(&u, v_op).is_negative() {
        u = u.iter().map(|x| -x).collect();
    }
    assert!(dot(&u, v_op).is_positive(), "pencil direction degenerate");

    let mut best: Option<BigRational> = None;
    for x in sample {
        let ux = dot(&u, x);
        if !ux.is_negative() {
            continue;
        }
        let cx = crate::linalg::dot_rat_int(c, x);
        if cx <= BigRational::one() {
            continue;
        }
        let theta = (cx - BigRational::one()) / BigRational::from_integer(-ux.clone());
        if best.as_ref().is_none_or(|b| theta < *b) {
            best = Some(theta);
        }
    }
    match best {
        Some(theta) => {
            let cand: RatVec = c
                .iter()
                .zip(u.iter())
                .map(|(ci, ui)| ci + &theta * BigRational::from_integer(ui.clone()))
                .collect();
            if !model.functional_is_interior(&cand) {
                // The stopping point seen in the sample undershoots; the true
                // neighbor needs more points.
                return Err(certificate_failure(height, &u));
            }
            Ok(PivotResult::Facet(certify_facet(model, &cand, height)?))
        }
        None => {
            // No stopping point in the sample: either the pivot is genuinely
            // unbounded (the limit covector supports the cone) or the sample
            // is too small.
            let u_rat = vec_to_rat(&u);
            if model.functional_in_closed_dual(&u_rat) && !model.functional_is_interior(&u_rat) {
                let ray = match model {
                    SelfAdjointConeModel::Lorentzian { .. } => {
                        let v = model.dual_vector_of_functional(&u_rat);
                        Some(rat_to_primitive_int(&v))
                    }
                    SelfAdjointConeModel::PsdForms { .. } => None,
                };
                Ok(PivotResult::Unbounded(UnboundedFace {
                    covector: primitivize(&u),
                    ray,
                }))
            } else {
                Err(certificate_failure(height, &u))
            }
        }
    }
}

/// Ridges of a facet: the facets of the facet polytope.
fn facet_ridges(facet: &PerfectFacet) -> Result<Vec<Vec<IntVec>>> {
    if facet.vertices.len() < 2 {
        return Ok(Vec::new());
    }
    let hull = hull_of_int_points(&facet.vertices)?;
    let mut ridges = Vec::new();
    for (n, b) in &hull.facets {
        let b_rat = BigRational::from_integer(b.clone());
        let rv: Vec<IntVec> = facet
            .vertices
            .iter()
            .filter(|v| crate::linalg::dot_rat_int(&vec_to_rat(v), n) == b_rat)
            .cloned()
            .collect();
        if !rv.is_empty() {
            ridges.push(rv);
        }
    }
    Ok(ridges)
}

// ---------------------------------------------------------------------------
// Local perfect fan
// ---------------------------------------------------------------------------

/// Default sample height: 6 for Lorentzian rank <= 3, 4 otherwise.
pub fn default_height(model: &SelfAdjointConeModel) -> i64 {
    match model {
        SelfAdjointConeModel::Lorentzian { lattice, .. } if lattice.rank() <= 3 => 6,
        _ => 4,
    }
}

#[derive(Clone, Debug)]
pub struct PerfectFanPiece {
    /// Facets of K_p whose cone meets the window interior, sorted by the
    /// primitive normal key.
    pub facets: Vec<PerfectFacet>,
    /// Cones over those facets and all their faces.
    pub fan: Fan,
    pub unbounded_faces: Vec<UnboundedFace>,
    pub height: i64,
}

impl PerfectFanPiece {
    pub fn maximal_cones(&self) -> Vec<RationalCone> {
        let dim = self.fan.ambient_dim();
        self.facets.iter().map(|f| f.cone(dim)).collect()
    }
}

/// Compute all perfect facets whose cone meets the window interior, with
/// completeness certificates, plus the face fan they span.
pub fn perfect_fan_local(
    model: &SelfAdjointConeModel,
    window: &Window,
    height: i64,
) -> Result<PerfectFanPiece> {
    let dim = model.dim();
    let sample = cone_points(model, height);
    if sample.is_empty() {
        return Err(Error::EmptyInput(
            "no lattice points of the cone within the height bound".into(),
        ));
    }
    let d = window.interior_direction();
    assert!(
        model.contains_closed(&d),
        "window interior direction must lie in the closed cone"
    );

    // Facet facing d, then walk until the cone over the facet contains d.
    let mut facet = initial_facet(model, &sample, &d, height)?;
    let mut guard = 0;
    loop {
        let cone = facet.cone(dim);
        if cone.contains(&d) {
            break;
        }
        let violated = cone
            .facet_normals()
            .iter()
            .find(|n| dot(n, &d).is_negative())
            .cloned()
            .expect("d outside the cone violates some facet");
        let ridge: Vec<IntVec> = facet
            .vertices
            .iter()
            .filter(|v| dot(&violated, v).is_zero())
            .cloned()
            .collect();
        match pivot_over_ridge(model, &sample, &facet, &ridge, height)? {
            PivotResult::Facet(f) => facet = f,
            PivotResult::Unbounded(_) => {
                return Err(Error::Other(
                    "walk toward an interior direction crossed the boundary; this is a bug".into(),
                ))
            }
        }
        guard += 1;
        if guard > 4096 {
            return Err(Error::Other("facet walk did not terminate".into()));
        }
    }

    // Breadth-first search over ridge-neighbors, clipped to the window.
    let mut emitted: Vec<PerfectFacet> = Vec::new();
    let mut visited: Vec<IntVec> = vec![facet.key()];
    let mut unbounded: Vec<UnboundedFace> = Vec::new();
    let mut queue: Vec<PerfectFacet> = vec![facet];
    while let Some(f) = queue.pop() {
        if !f.cone(dim).meets_interior_of(&window.cone) {
            continue;
        }
        for ridge in facet_ridges(&f)? {
            match pivot_over_ridge(model, &sample, &f, &ridge, height)? {
                PivotResult::Facet(nf) => {
                    let key = nf.key();
                    if !visited.contains(&key) {
                        visited.push(key);
                        queue.push(nf);
                    }
                }
                PivotResult::Unbounded(uf) => {
                    if !unbounded.iter().any(|x| x.covector == uf.covector) {
                        unbounded.push(uf);
                    }
                }
            }
        }
        emitted.push(f);
    }
    emitted.sort_by(|a, b| lex_cmp(&a.key(), &b.key()));
    unbounded.sort_by(|a, b| lex_cmp(&a.covector, &b.covector));

    let maximal: Vec<RationalCone> = emitted.iter().map(|f| f.cone(dim)).collect();
    let fan = Fan::from_maximal(&maximal)?;
    Ok(PerfectFanPiece {
        facets: emitted,
        fan,
        unbounded_faces: unbounded,
        height,
    })
}

// ---------------------------------------------------------------------------
// Admissibility checks
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub face_closure_ok: bool,
    pub face_closure_witness: Option<String>,
    pub intersections_ok: bool,
    pub intersection_witness: Option<String>,
    pub group_compatible: bool,
    pub group_witness: Option<String>,
    pub covering_ok: bool,
    pub covering_witness: Option<String>,
    /// Number of cones meeting the window: finiteness within the window.
    pub cones_in_window: usize,
    /// Global finiteness modulo the group is outside what a window can
    /// certify; recorded as informational text.
    pub finiteness_note: String,
}

impl AdmissibilityReport {
    pub fn all_ok(&self) -> bool {
        self.face_closure_ok && self.intersections_ok && self.group_compatible && self.covering_ok
    }
}

/// Check the admissible-decomposition axioms for a list of cones, within a
/// window, against a finite set of symmetry generators.
pub fn verify_admissible_local(
    model: &SelfAdjointConeModel,
    cones: &[RationalCone],
    group_generators: &[IntMat],
    window: &Window,
) -> Result<AdmissibilityReport> {
    let lifted: Vec<IntMat> = group_generators
        .iter()
        .map(|m| model.lift_group_element(m))
        .collect::<Result<Vec<_>>>()?;

    let mut report = AdmissibilityReport {
        face_closure_ok: true,
        face_closure_witness: None,
        intersections_ok: true,
        intersection_witness: None,
        group_compatible: true,
        group_witness: None,
        covering_ok: true,
        covering_witness: None,
        cones_in_window: cones
            .iter()
            .filter(|c| c.meets_interior_of(&window.cone))
            .count(),
        finiteness_note:
            "finite within the window by construction; finiteness modulo the group over the whole \
             cone is not certified by a window computation"
                .into(),
    };

    let keys: Vec<(Vec<IntVec>, Vec<IntVec>)> = cones.iter().map(|c| c.key()).collect();

    // Face closure.
    'fc: for c in cones {
        for face in crate::cones::face_lattice(c)? {
            if face.rays.is_empty() {
                continue;
            }
            let fc = RationalCone::from_generators(&face.rays, c.ambient_dim())?;
            if !keys.contains(&fc.key()) {
                report.face_closure_ok = false;
                report.face_closure_witness = Some(format!(
                    "face with rays {} of a listed cone is missing",
                    fmt_rays(fc.rays())
                ));
                break 'fc;
            }
        }
    }

    // Pairwise intersections.
    'pi: for (i, a) in cones.iter().enumerate() {
        for b in cones.iter().skip(i + 1) {
            let meet = a.intersect(b)?;
            if !crate::cones::is_face_of(&meet, a) || !crate::cones::is_face_of(&meet, b) {
                report.intersections_ok = false;
                report.intersection_witness = Some(format!(
                    "cones {} and {} meet in {} which is not a common face",
                    fmt_rays(a.rays()),
                    fmt_rays(b.rays()),
                    fmt_rays(meet.rays())
                ));
                break 'pi;
            }
        }
    }

    // Group compatibility: images of window-meeting cones that still meet the
    // window must be listed.
    'gc: for g in &lifted {
        for c in cones {
            if !c.meets_interior_of(&window.cone) {
                continue;
            }
            let image = c.map(g)?;
            if image.meets_interior_of(&window.cone) && !keys.contains(&image.key()) {
                report.group_compatible = false;
                report.group_witness = Some(format!(
                    "image {} of cone {} is not listed",
                    fmt_rays(image.rays()),
                    fmt_rays(c.rays())
                ));
                break 'gc;
            }
        }
    }

    // Covering within the window: every window-meeting wall of a maximal cone
    // is shared by exactly one other maximal cone.
    let dim = model.dim();
    let maximal: Vec<&RationalCone> = cones.iter().filter(|c| c.dim() == dim).collect();
    'cv: for c in &maximal {
        for n in c.facet_normals() {
            let wall_rays: Vec<IntVec> = c
                .rays()
                .iter()
                .filter(|r| dot(n, r).is_zero())
                .cloned()
                .collect();
            if wall_rays.is_empty() {
                continue;
            }
            let wall = RationalCone::from_generators(&wall_rays, dim)?;
            if wall.dim() + 1 != dim || !wall.meets_interior_of(&window.cone) {
                continue;
            }
            let sharers = maximal
                .iter()
                .filter(|other| other.key() != c.key() && crate::cones::is_face_of(&wall, other))
                .count();
            if sharers != 1 {
                report.covering_ok = false;
                report.covering_witness = Some(format!(
                    "wall {} of cone {} is shared by {} other maximal cones (expected 1)",
                    fmt_rays(wall.rays()),
                    fmt_rays(c.rays()),
                    sharers
                ));
                break 'cv;
            }
        }
    }

    Ok(report)
}

fn fmt_rays(rays: &[IntVec]) -> String {
    let parts: Vec<String> = rays
        .iter()
        .map(|r| {
            let xs: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            format!("({})", xs.join(","))
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

// ---------------------------------------------------------------------------
// Canonical-singularity verification of the local fan
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct PerfectCanonicalReport {
    pub piece: PerfectFanPiece,
    pub verdicts: Vec<SingularityVerdict>,
    pub all_q_gorenstein: bool,
    pub all_canonical: bool,
    /// Maximal cones violating the expected verdict; must be empty.
    pub falsification_witnesses: Vec<String>,
}

/// Compute the local perfect fan and verify that every maximal cone is
/// Q-Gorenstein with canonical singularities.
pub fn verify_perfect_canonical(
    model: &SelfAdjointConeModel,
    window: &Window,
    height: i64,
) -> Result<PerfectCanonicalReport> {
    let piece = perfect_fan_local(model, window, height)?;
    let verdict = fan_singularity_verdict(&piece.fan)?;
    let mut witnesses = Vec::new();
    for v in &verdict.per_cone {
        if !v.is_q_gorenstein() || !v.is_canonical() {
            witnesses.push(format!(
                "maximal cone with rays {} failed: q_gorenstein={}, canonical={}",
                fmt_rays(&v.rays),
                v.is_q_gorenstein(),
                v.is_canonical()
            ));
        }
    }
    Ok(PerfectCanonicalReport {
        piece,
        all_q_gorenstein: verdict.q_gorenstein,
        all_canonical: verdict.canonical,
        verdicts: verdict.per_cone,
        falsification_witnesses: witnesses,
    })
}
