//! Exact rational polyhedral cones: double description, duality, face
//! lattices, convex hulls via homogenization, and fan assembly.
//!
//! Cones are stored by generators; extreme rays, facet normals and span
//! equations are computed on construction so both descriptions are always
//! available and mutually consistent.

use crate::linalg::{
    lex_cmp, primitivize, rat_to_primitive_int, sort_vecs, IntMat, IntVec, RatVec,
};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

// ---------------------------------------------------------------------------
// Double description
// ---------------------------------------------------------------------------

/// Generator description of {x : n·x >= 0 for all n in `halfspaces`}.
#[derive(Clone, Debug)]
pub struct GeneratorForm {
    /// Basis of the lineality space.
    pub lineality: Vec<IntVec>,
    /// Extreme rays modulo lineality, primitive.
    pub rays: Vec<IntVec>,
}

#[derive(Clone)]
struct DdRay {
    v: IntVec,
    /// Indices of processed halfspaces this ray is tight on.
    active: Vec<u32>,
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn is_subset_sorted(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
    }
    true
}

/// Double description: convert a halfspace description into generators.
pub fn halfspaces_to_generators(halfspaces: &[IntVec], dim: usize) -> GeneratorForm {
    let mut lineality: Vec<IntVec> = (0..dim)
        .map(|i| {
            let mut e = vec![BigInt::zero(); dim];
            e[i] = BigInt::one();
            e
        })
        .collect();
    let mut rays: Vec<DdRay> = Vec::new();

    for (h, a) in halfspaces.iter().enumerate() {
        let h = h as u32;
        // Lineality not orthogonal to the new halfspace gets split.
        let l0_pos = lineality
            .iter()
            .position(|l| !crate::linalg::dot(a, l).is_zero());
        if let Some(p) = l0_pos {
            let mut l0 = lineality.remove(p);
            if crate::linalg::dot(a, &l0).is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
            }
            let al0 = crate::linalg::dot(a, &l0);
            for l in lineality.iter_mut() {
                let al = crate::linalg::dot(a, l);
                let adjusted: IntVec = l
                    .iter()
                    .zip(l0.iter())
                    .map(|(li, l0i)| &al0 * li - &al * l0i)
                    .collect();
                *l = primitivize(&adjusted);
            }
            for r in rays.iter_mut() {
                let ar = crate::linalg::dot(a, &r.v);
                let adjusted: IntVec =
                    r.v.iter()
                        .zip(l0.iter())
                        .map(|(ri, l0i)| &al0 * ri - &ar * l0i)
                        .collect();
                r.v = primitivize(&adjusted);
            }
            let mut active: Vec<u32> = Vec::new();
            // The split direction is tight on nothing before h; all earlier
            // halfspaces vanish on the old lineality, hence on l0.
            for old in 0..h {
                if crate::linalg::dot(&halfspaces[old as usize], &l0).is_zero() {
                    active.push(old);
                }
            }
            rays.push(DdRay { v: l0, active });
            // All remaining rays are tight on h now.
            for r in rays.iter_mut() {
                if crate::linalg::dot(a, &r.v).is_zero() && !r.active.contains(&h) {
                    r.active.push(h);
                    r.active.sort();
                }
            }
            continue;
        }

        // Split rays by sign.
        let mut pos: Vec<DdRay> = Vec::new();
        let mut zero: Vec<DdRay> = Vec::new();
        let mut neg: Vec<DdRay> = Vec::new();
        for r in rays.drain(..) {
            let s = crate::linalg::dot(a, &r.v);
            if s.is_positive() {
                pos.push(r);
            } else if s.is_zero() {
                let mut r = r;
                r.active.push(h);
                r.active.sort();
                zero.push(r);
            } else {
                neg.push(r);
            }
        }
        let mut new_rays: Vec<DdRay> = Vec::new();
        for (pi, p) in pos.iter().enumerate() {
            for n in neg.iter() {
                let common = intersect_sorted(&p.active, &n.active);
                // Combinatorial adjacency: no third ray is tight on all
                // common constraints of p and n.
                let mut adjacent = true;
                for (qi, q) in pos.iter().enumerate() {
                    if qi != pi && is_subset_sorted(&common, &q.active) {
                        adjacent = false;
                        break;
                    }
                }
                if adjacent {
                    for q in neg.iter() {
                        if !std::ptr::eq(q, n) && is_subset_sorted(&common, &q.active) {
                            adjacent = false;
                            break;
                        }
                    }
                }
                if adjacent {
                    for q in zero.iter() {
                        if is_subset_sorted(&common, &q.active) {
                            adjacent = false;
                            break;
                        }
                    }
                }
                if !adjacent {
                    continue;
                }
                let ap = crate::linalg::dot(a, &p.v);
                let an = crate::linalg::dot(a, &n.v);
                // ap > 0 > an: combo = ap * n - an * p is a nonneg combination.
                let combo: IntVec =
                    n.v.iter()
                        .zip(p.v.iter())
                        .map(|(ni, pi)| &ap * ni - &an * pi)
                        .collect();
                let v = primitivize(&combo);
                if v.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let mut active = common;
                active.push(h);
                active.sort();
                new_rays.push(DdRay { v, active });
            }
        }
        rays = pos;
        rays.extend(zero);
        rays.extend(new_rays);
        // Deduplicate identical rays, keeping the larger active set.
        rays.sort_by(|x, y| lex_cmp(&x.v, &y.v));
        rays.dedup_by(|a, b| {
            if a.v == b.v {
                if a.active.len() > b.active.len() {
                    b.active = a.active.clone();
                }
                true
            } else {
                false
            }
        });
    }

    let mut out_rays: Vec<IntVec> = rays.into_iter().map(|r| r.v).collect();
    sort_vecs(&mut out_rays);
    let mut lin = lineality;
    sort_vecs(&mut lin);
    GeneratorForm {
        lineality: lin,
        rays: out_rays,
    }
}

// ---------------------------------------------------------------------------
// Rational cones
// ---------------------------------------------------------------------------

/// Finitely generated rational polyhedral cone with both descriptions cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCone {
    ambient_dim: usize,
    generators: Vec<IntVec>,
    rays: Vec<IntVec>,
    lineality: Vec<IntVec>,
    facet_normals: Vec<IntVec>,
    span_equations: Vec<IntVec>,
    cone_dim: usize,
}

impl RationalCone {
    /// Build from generators (any spanning set; rays are recomputed).
    pub fn from_generators(generators: &[IntVec], ambient_dim: usize) -> Result<RationalCone> {
        for g in generators {
            if g.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: g.len(),
                });
            }
        }
        let mut gens: Vec<IntVec> = generators
            .iter()
            .map(|g| primitivize(g))
            .filter(|g| !g.iter().all(|x| x.is_zero()))
            .collect();
        gens.sort_by(|a, b| lex_cmp(a, b));
        gens.dedup();

        // Dual pass: facet normals and span equations.
        let dual = halfspaces_to_generators(&gens, ambient_dim);
        let facet_normals = dual.rays.clone();
        let span_equations = dual.lineality.clone();

        // Primal pass: extreme rays and lineality from the halfspace form.
        let mut halfspaces = facet_normals.clone();
        for eq in &span_equations {
            halfspaces.push(eq.clone());
            halfspaces.push(eq.iter().map(|x| -x).collect());
        }
        let primal = halfspaces_to_generators(&halfspaces, ambient_dim);

        let cone_dim = if gens.is_empty() {
            0
        } else {
            IntMat::from_big_rows(&gens).rank()
        };
        Ok(RationalCone {
            ambient_dim,
            generators: gens,
            rays: primal.rays,
            lineality: primal.lineality,
            facet_normals,
            span_equations,
            cone_dim,
        })
    }

    pub fn from_rows(rows: &[Vec<i64>], ambient_dim: usize) -> Result<RationalCone> {
        let gens: Vec<IntVec> = rows.iter().map(|r| crate::linalg::int_vec(r)).collect();
        RationalCone::from_generators(&gens, ambient_dim)
    }

    /// The trivial cone {0}.
    pub fn origin(ambient_dim: usize) -> RationalCone {
        RationalCone::from_generators(&[], ambient_dim).expect("origin cone")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.cone_dim
    }

    pub fn generators(&self) -> &[IntVec] {
        &self.generators
    }

    /// Extreme rays (primitive, lexicographically sorted). Meaningful when
    /// the cone is pointed.
    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn lineality(&self) -> &[IntVec] {
        &self.lineality
    }

    pub fn facet_normals(&self) -> &[IntVec] {
        &self.facet_normals
    }

    pub fn span_equations(&self) -> &[IntVec] {
        &self.span_equations
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.cone_dim == self.ambient_dim
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.span_equations
            .iter()
            .all(|eq| crate::linalg::dot(eq, x).is_zero())
            && self
                .facet_normals
                .iter()
                .all(|n| !crate::linalg::dot(n, x).is_negative())
    }

    pub fn contains_rat(&self, x: &[BigRational]) -> bool {
        self.span_equations
            .iter()
            .all(|eq| crate::linalg::dot_rat_int(x, eq).is_zero())
            && self
                .facet_normals
                .iter()
                .all(|n| !crate::linalg::dot_rat_int(x, n).is_negative())
    }

    /// Strict interior (relative to the ambient space, so full-dimensional
    /// cones only).
    pub fn strictly_contains(&self, x: &[BigInt]) -> bool {
        self.span_equations.is_empty()
            && self
                .facet_normals
                .iter()
                .all(|n| crate::linalg::dot(n, x).is_positive())
    }

    /// Intersection of two cones in the same ambient space.
    pub fn intersect(&self, other: &RationalCone) -> Result<RationalCone> {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let mut halfspaces: Vec<IntVec> = Vec::new();
        for c in [self, other] {
            halfspaces.extend(c.facet_normals.iter().cloned());
            for eq in &c.span_equations {
                halfspaces.push(eq.clone());
                halfspaces.push(eq.iter().map(|x| -x).collect());
            }
        }
        let form = halfspaces_to_generators(&halfspaces, self.ambient_dim);
        let mut gens = form.rays;
        for l in form.lineality {
            gens.push(l.iter().map(|x| -x).collect());
            gens.push(l);
        }
        RationalCone::from_generators(&gens, self.ambient_dim)
    }

    /// Does this cone intersect the topological interior of `window`?
    /// `window` must be full-dimensional and pointed.
    pub fn meets_interior_of(&self, window: &RationalCone) -> bool {
        let k = match self.intersect(window) {
            Ok(k) => k,
            Err(_) => return false,
        };
        if k.dim() == 0 {
            return false;
        }
        // A convex subset of the boundary of a convex cone lies in a facet
        // hyperplane, so the relative-interior point sum-of-rays decides.
        let mut s = vec![BigInt::zero(); self.ambient_dim];
        for r in k.rays().iter().chain(k.lineality.iter()) {
            for (si, ri) in s.iter_mut().zip(r.iter()) {
                *si += ri;
            }
        }
        window.strictly_contains(&s)
    }

    /// Image under an integer linear map (columns act on coordinates).
    pub fn map(&self, m: &IntMat) -> Result<RationalCone> {
        let gens: Vec<IntVec> = self.generators.iter().map(|g| m.mul_vec(g)).collect();
        RationalCone::from_generators(&gens, m.rows())
    }

    /// Canonical identity key: sorted rays plus sorted lineality basis.
    pub fn key(&self) -> (Vec<IntVec>, Vec<IntVec>) {
        (self.rays.clone(), self.lineality.clone())
    }

    /// |det| of the ray matrix for full-dimensional simplicial cones; the
    /// multiplicity of the cone in its lattice.
    pub fn multiplicity(&self) -> Option<BigInt> {
        if self.is_pointed()
            && self.rays.len() == self.cone_dim
            && self.cone_dim == self.ambient_dim
        {
            Some(IntMat::from_big_rows(&self.rays).det().abs())
        } else {
            None
        }
    }
}

/// Dual cone {w : <w,x> >= 0 for all x in sigma}, as a generator-described cone.
pub fn dual_cone(sigma: &RationalCone) -> RationalCone {
    let form = halfspaces_to_generators(sigma.generators(), sigma.ambient_dim());
    let mut gens = form.rays;
    for l in form.lineality {
        gens.push(l.iter().map(|x| -x).collect());
        gens.push(l);
    }
    RationalCone::from_generators(&gens, sigma.ambient_dim()).expect("dual cone construction")
}

// ---------------------------------------------------------------------------
// Face lattice
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Face {
    /// Extreme rays spanning the face (empty for the origin face).
    pub rays: Vec<IntVec>,
    pub dim: usize,
}

/// All faces of a pointed cone, including {0} and the cone itself, sorted by
/// dimension then lexicographically. Faces of a pointed cone are spanned by
/// the extreme rays they contain.
pub fn face_lattice(sigma: &RationalCone) -> Result<Vec<Face>> {
    if !sigma.is_pointed() {
        return Err(Error::NotPointed);
    }
    let mut seen: Vec<Vec<IntVec>> = vec![sigma.rays().to_vec()];
    let mut queue: Vec<Vec<IntVec>> = vec![sigma.rays().to_vec()];
    while let Some(rays) = queue.pop() {
        for n in sigma.facet_normals() {
            let sub: Vec<IntVec> = rays
                .iter()
                .filter(|r| crate::linalg::dot(n, r).is_zero())
                .cloned()
                .collect();
            if !seen.contains(&sub) {
                seen.push(sub.clone());
                queue.push(sub);
            }
        }
    }
    if !seen.contains(&Vec::new()) {
        seen.push(Vec::new());
    }
    let mut faces: Vec<Face> = seen
        .into_iter()
        .map(|rays| {
            let dim = if rays.is_empty() {
                0
            } else {
                IntMat::from_big_rows(&rays).rank()
            };
            Face { rays, dim }
        })
        .collect();
    faces.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then_with(|| a.rays.len().cmp(&b.rays.len()))
            .then_with(|| {
                for (x, y) in a.rays.iter().zip(b.rays.iter()) {
                    match lex_cmp(x, y) {
                        std::cmp::Ordering::Equal => continue,
                        other => return other,
                    }
                }
                std::cmp::Ordering::Equal
            })
    });
    Ok(faces)
}

/// Is `face` a face of `sigma`? Both must be pointed.
pub fn is_face_of(face: &RationalCone, sigma: &RationalCone) -> bool {
    if !face.is_pointed() || !sigma.is_pointed() {
        return false;
    }
    // Every face generator must lie in sigma.
    if !face.rays().iter().all(|r| sigma.contains(r)) {
        return false;
    }
    if face.dim() == 0 {
        return true;
    }
    // Smallest face of sigma containing `face`: rays of sigma tight on every
    // facet normal that vanishes on all of `face`.
    let tight: Vec<&IntVec> = sigma
        .facet_normals()
        .iter()
        .filter(|n| {
            face.rays()
                .iter()
                .all(|r| crate::linalg::dot(n, r).is_zero())
        })
        .collect();
    let spanned: Vec<IntVec> = sigma
        .rays()
        .iter()
        .filter(|r| tight.iter().all(|n| crate::linalg::dot(n, r).is_zero()))
        .cloned()
        .collect();
    spanned == face.rays()
}

// ---------------------------------------------------------------------------
// Polytopes and convex hulls
// ---------------------------------------------------------------------------

/// Exact polytope: vertices plus facet inequalities n·x >= b, with the affine
/// hull recorded as explicit equations when the polytope is lower-dimensional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    pub ambient_dim: usize,
    pub vertices: Vec<RatVec>,
    /// Inward facet inequalities (n, b): n·x >= b.
    pub facets: Vec<(IntVec, BigInt)>,
    /// Affine-hull equations (n, b): n·x = b.
    pub span_equations: Vec<(IntVec, BigInt)>,
}

fn rat_lex_cmp(a: &[BigRational], b: &[BigRational]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

impl Polytope {
    pub fn contains_rat(&self, x: &[BigRational]) -> bool {
        for (n, b) in &self.span_equations {
            if crate::linalg::dot_rat_int(x, n) != BigRational::from_integer(b.clone()) {
                return false;
            }
        }
        for (n, b) in &self.facets {
            if crate::linalg::dot_rat_int(x, n) < BigRational::from_integer(b.clone()) {
                return false;
            }
        }
        true
    }

    pub fn contains_int(&self, x: &[BigInt]) -> bool {
        let xr = crate::linalg::vec_to_rat(x);
        self.contains_rat(&xr)
    }

    /// All lattice points (bounding box of the vertices, filtered exactly).
    pub fn lattice_points(&self) -> Vec<IntVec> {
        if self.vertices.is_empty() {
            return Vec::new();
        }
        let d = self.ambient_dim;
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            let mut min = self.vertices[0][i].clone();
            let mut max = min.clone();
            for v in &self.vertices {
                if v[i] < min {
                    min = v[i].clone();
                }
                if v[i] > max {
                    max = v[i].clone();
                }
            }
            lo.push(min.floor().to_integer());
            hi.push(max.ceil().to_integer());
        }
        let mut out = Vec::new();
        let mut cur = lo.clone();
        'outer: loop {
            if self.contains_int(&cur) {
                out.push(cur.clone());
            }
            let mut pos = 0;
            loop {
                if pos == d {
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
        out
    }
}

/// Exact convex hull of rational points; facets within the affine span when
/// the hull is lower-dimensional. Input order does not matter.
pub fn hull_facets(points: &[RatVec]) -> Result<Polytope> {
    if points.is_empty() {
        return Err(Error::EmptyInput("hull of no points".into()));
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    // Homogenize: p -> primitive integer multiple of (1, p).
    let lifted: Vec<IntVec> = points
        .iter()
        .map(|p| {
            let mut h: RatVec = Vec::with_capacity(dim + 1);
            h.push(BigRational::one());
            h.extend(p.iter().cloned());
            rat_to_primitive_int(&h)
        })
        .collect();
    let cone = RationalCone::from_generators(&lifted, dim + 1)?;

    let mut vertices: Vec<RatVec> = cone
        .rays()
        .iter()
        .map(|r| {
            assert!(
                r[0].is_positive(),
                "hull of finitely many points has no recession rays"
            );
            let d = r[0].clone();
            r[1..]
                .iter()
                .map(|x| BigRational::new(x.clone(), d.clone()))
                .collect()
        })
        .collect();
    vertices.sort_by(|a, b| rat_lex_cmp(a, b));

    let facets = cone
        .facet_normals()
        .iter()
        .map(|n| (n[1..].to_vec(), -n[0].clone()))
        .collect();
    let span_equations = cone
        .span_equations()
        .iter()
        .map(|n| (n[1..].to_vec(), -n[0].clone()))
        .collect();

    Ok(Polytope {
        ambient_dim: dim,
        vertices,
        facets,
        span_equations,
    })
}

/// Hull of integer points (convenience).
pub fn hull_of_int_points(points: &[IntVec]) -> Result<Polytope> {
    let rat: Vec<RatVec> = points
        .iter()
        .map(|p| crate::linalg::vec_to_rat(p))
        .collect();
    hull_facets(&rat)
}

// ---------------------------------------------------------------------------
// Fans
// ---------------------------------------------------------------------------

/// A finite fan of pointed rational cones, closed under faces, with pairwise
/// intersections that are faces of both.
#[derive(Clone, Debug)]
pub struct Fan {
    ambient_dim: usize,
    cones: Vec<RationalCone>,
}

impl Fan {
    /// Build the face closure of the given cones, then validate.
    pub fn from_maximal(cones: &[RationalCone]) -> Result<Fan> {
        if cones.is_empty() {
            return Err(Error::EmptyInput("fan needs at least one cone".into()));
        }
        let ambient_dim = cones[0].ambient_dim();
        let mut all: Vec<RationalCone> = Vec::new();
        for c in cones {
            if c.ambient_dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: c.ambient_dim(),
                });
            }
            if !c.is_pointed() {
                return Err(Error::NotPointed);
            }
            for face in face_lattice(c)? {
                let fc = RationalCone::from_generators(&face.rays, ambient_dim)?;
                if !all.iter().any(|x| x.key() == fc.key()) {
                    all.push(fc);
                }
            }
        }
        all.sort_by(|a, b| {
            a.dim().cmp(&b.dim()).then_with(|| {
                let (ra, _) = a.key();
                let (rb, _) = b.key();
                ra.len().cmp(&rb.len()).then_with(|| {
                    for (x, y) in ra.iter().zip(rb.iter()) {
                        match lex_cmp(x, y) {
                            std::cmp::Ordering::Equal => continue,
                            other => return other,
                        }
                    }
                    std::cmp::Ordering::Equal
                })
            })
        });
        let fan = Fan {
            ambient_dim,
            cones: all,
        };
        fan.validate()?;
        Ok(fan)
    }

    /// Use the cone list as given (plus the origin), checking every fan
    /// axiom including face closure.
    pub fn from_cones_strict(cones: &[RationalCone]) -> Result<Fan> {
        if cones.is_empty() {
            return Err(Error::EmptyInput("fan needs at least one cone".into()));
        }
        let ambient_dim = cones[0].ambient_dim();
        let fan = Fan {
            ambient_dim,
            cones: cones.to_vec(),
        };
        fan.validate()?;
        for c in cones {
            for face in face_lattice(c)? {
                let fc = RationalCone::from_generators(&face.rays, ambient_dim)?;
                if fc.dim() > 0 && !fan.cones.iter().any(|x| x.key() == fc.key()) {
                    return Err(Error::InvalidFan(format!(
                        "missing face with rays {:?}",
                        fc.rays()
                            .iter()
                            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                            .collect::<Vec<_>>()
                    )));
                }
            }
        }
        Ok(fan)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn cones(&self) -> &[RationalCone] {
        &self.cones
    }

    /// Cones that are not proper faces of another cone of the fan.
    pub fn maximal_cones(&self) -> Vec<&RationalCone> {
        self.cones
            .iter()
            .filter(|c| {
                !self.cones.iter().any(|other| {
                    other.key() != c.key()
                        && c.rays().iter().all(|r| other.contains(r))
                        && c.dim() <= other.dim()
                })
            })
            .collect()
    }

    /// Pairwise-intersection and pointedness checks.
    pub fn validate(&self) -> Result<()> {
        for c in &self.cones {
            if !c.is_pointed() {
                return Err(Error::NotPointed);
            }
            if c.ambient_dim() != self.ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient_dim,
                    got: c.ambient_dim(),
                });
            }
        }
        for (i, a) in self.cones.iter().enumerate() {
            for b in self.cones.iter().skip(i + 1) {
                let meet = a.intersect(b)?;
                if !is_face_of(&meet, a) || !is_face_of(&meet, b) {
                    return Err(Error::InvalidFan(format!(
                        "intersection of cones {:?} and {:?} is not a common face",
                        a.rays(),
                        b.rays()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn contains_cone(&self, c: &RationalCone) -> bool {
        self.cones.iter().any(|x| x.key() == c.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{bint, int_vec};

    fn quadrant() -> RationalCone {
        RationalCone::from_rows(&[vec![1, 0], vec![0, 1]], 2).unwrap()
    }

    #[test]
    fn quadrant_is_self_dual() {
        let q = quadrant();
        let d = dual_cone(&q);
        assert_eq!(d.rays(), q.rays());
        assert!(d.lineality().is_empty());
    }

    #[test]
    fn dual_of_ray_is_halfplane() {
        let ray = RationalCone::from_rows(&[vec![1, 0]], 2).unwrap();
        let d = dual_cone(&ray);
        // Half-plane x >= 0: lineality (0,1), single ray (1,0).
        assert_eq!(d.lineality().len(), 1);
        assert_eq!(primitivize(&d.lineality()[0]), int_vec(&[0, 1]));
        assert_eq!(d.rays(), &[int_vec(&[1, 0])]);
        assert!(!d.is_pointed());
    }

    #[test]
    fn dual_of_wedge() {
        let c = RationalCone::from_rows(&[vec![1, 0], vec![1, 2]], 2).unwrap();
        let d = dual_cone(&c);
        assert_eq!(d.rays(), &[int_vec(&[0, 1]), int_vec(&[2, -1])]);
    }

    #[test]
    fn dual_is_involutive() {
        for rows in [
            vec![vec![1, 0], vec![1, 2]],
            vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            vec![
                vec![1, 1, 1],
                vec![1, -1, 1],
                vec![-1, 1, 1],
                vec![-1, -1, 1],
            ],
        ] {
            let dim = rows[0].len();
            let c = RationalCone::from_rows(&rows, dim).unwrap();
            let dd = dual_cone(&dual_cone(&c));
            assert_eq!(dd.key(), c.key());
        }
    }

    #[test]
    fn double_description_consistency() {
        let c = RationalCone::from_rows(
            &[
                vec![1, 1, 1],
                vec![1, -1, 1],
                vec![-1, 1, 1],
                vec![-1, -1, 1],
                vec![0, 2, 1],
            ],
            3,
        )
        .unwrap();
        // Every generator satisfies every facet inequality.
        for g in c.generators() {
            for n in c.facet_normals() {
                assert!(!crate::linalg::dot(n, g).is_negative());
            }
        }
        // Every ray is tight on at least dim-1 independent facets.
        for r in c.rays() {
            let tight: Vec<IntVec> = c
                .facet_normals()
                .iter()
                .filter(|n| crate::linalg::dot(n, r).is_zero())
                .cloned()
                .collect();
            assert!(!tight.is_empty());
            let rank = IntMat::from_big_rows(&tight).rank();
            assert!(
                rank >= c.dim() - 1,
                "ray {:?} only tight on rank {}",
                r,
                rank
            );
        }
    }

    #[test]
    fn symmetrized_pentagon_cone_has_five_rays() {
        let c = RationalCone::from_rows(
            &[
                vec![1, 1, 1],
                vec![1, -1, 1],
                vec![-1, 1, 1],
                vec![-1, -1, 1],
                vec![0, 2, 1],
            ],
            3,
        )
        .unwrap();
        assert_eq!(c.rays().len(), 5);
        assert!(c.is_pointed());
        let faces = face_lattice(&c).unwrap();
        // {0}, 5 rays, 5 two-dimensional faces, the cone itself.
        assert_eq!(faces.len(), 12);
        assert_eq!(faces.iter().filter(|f| f.dim == 1).count(), 5);
        assert_eq!(faces.iter().filter(|f| f.dim == 2).count(), 5);
    }

    #[test]
    fn face_lattice_of_quadrant() {
        let faces = face_lattice(&quadrant()).unwrap();
        assert_eq!(faces.len(), 4);
        assert_eq!(faces.iter().filter(|f| f.dim == 0).count(), 1);
        assert_eq!(faces.iter().filter(|f| f.dim == 1).count(), 2);
        assert_eq!(faces.iter().filter(|f| f.dim == 2).count(), 1);
    }

    #[test]
    fn face_lattice_of_simplex_cone_is_boolean() {
        let c = RationalCone::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]], 3).unwrap();
        let faces = face_lattice(&c).unwrap();
        assert_eq!(faces.len(), 8);
    }

    #[test]
    fn face_lattice_rejects_non_pointed() {
        let c = RationalCone::from_rows(&[vec![1, 0], vec![-1, 0], vec![0, 1]], 2).unwrap();
        assert!(!c.is_pointed());
        assert!(matches!(face_lattice(&c), Err(Error::NotPointed)));
    }

    #[test]
    fn hull_of_two_points_is_segment() {
        let pts = vec![
            crate::linalg::rat_vec(&[1, 0]),
            crate::linalg::rat_vec(&[0, 1]),
        ];
        let p = hull_facets(&pts).unwrap();
        assert_eq!(p.vertices.len(), 2);
        assert_eq!(p.span_equations.len(), 1);
        // The affine hull equation holds on both vertices: x + y = 1.
        let (n, b) = &p.span_equations[0];
        for v in &p.vertices {
            assert_eq!(
                crate::linalg::dot_rat_int(v, n),
                BigRational::from_integer(b.clone())
            );
        }
        assert!(!p.contains_int(&int_vec(&[0, 0])));
        assert!(p.contains_rat(&[crate::linalg::bratio(1, 2), crate::linalg::bratio(1, 2)]));
    }

    #[test]
    fn hull_collinear_points() {
        let pts = vec![
            crate::linalg::rat_vec(&[1, 1]),
            crate::linalg::rat_vec(&[1, 0]),
            crate::linalg::rat_vec(&[1, -1]),
        ];
        let p = hull_facets(&pts).unwrap();
        assert_eq!(p.vertices.len(), 2);
        assert_eq!(p.vertices[0], crate::linalg::rat_vec(&[1, -1]));
        assert_eq!(p.vertices[1], crate::linalg::rat_vec(&[1, 1]));
        // (1,0) is interior to the segment.
        assert!(p.contains_int(&int_vec(&[1, 0])));
    }

    #[test]
    fn hull_is_order_insensitive() {
        let base = vec![
            crate::linalg::rat_vec(&[0, 0]),
            crate::linalg::rat_vec(&[2, 0]),
            crate::linalg::rat_vec(&[0, 2]),
            crate::linalg::rat_vec(&[1, 1]),
            crate::linalg::rat_vec(&[2, 2]),
        ];
        let p1 = hull_facets(&base).unwrap();
        let mut rev = base.clone();
        rev.reverse();
        let p2 = hull_facets(&rev).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1.vertices.len(), 4);
    }

    #[test]
    fn pentagon_hull_with_interior_points() {
        let mut pts = vec![
            crate::linalg::rat_vec(&[1, 1, 1]),
            crate::linalg::rat_vec(&[1, -1, 1]),
            crate::linalg::rat_vec(&[-1, 1, 1]),
            crate::linalg::rat_vec(&[-1, -1, 1]),
            crate::linalg::rat_vec(&[0, 2, 1]),
        ];
        pts.push(crate::linalg::rat_vec(&[0, 0, 1]));
        pts.push(crate::linalg::rat_vec(&[0, 1, 1]));
        let p = hull_facets(&pts).unwrap();
        assert_eq!(p.vertices.len(), 5);
        assert_eq!(p.span_equations.len(), 1);
        let lp = p.lattice_points();
        assert_eq!(lp.len(), 10);
    }

    #[test]
    fn lattice_points_of_triangle() {
        let p =
            hull_of_int_points(&[int_vec(&[0, 0]), int_vec(&[1, 0]), int_vec(&[0, 1])]).unwrap();
        let lp = p.lattice_points();
        assert_eq!(
            lp,
            vec![int_vec(&[0, 0]), int_vec(&[0, 1]), int_vec(&[1, 0])]
        );
    }

    #[test]
    fn random_cones_double_description_invariants() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(404);
        for _ in 0..60 {
            let dim = rng.random_range(1..=4usize);
            let k = rng.random_range(1..=dim + 2);
            let gens: Vec<IntVec> = (0..k)
                .map(|_| (0..dim).map(|_| bint(rng.random_range(-3..=3))).collect())
                .collect();
            let c = RationalCone::from_generators(&gens, dim).unwrap();
            // Duality is an involution on the computed description.
            let dd = dual_cone(&dual_cone(&c));
            assert_eq!(dd.key(), c.key());
            // Generators satisfy every facet inequality and span equation.
            for g in c.generators() {
                assert!(c.contains(g));
            }
            // An extreme ray (mod lineality) is cut out by its tight
            // hyperplanes together with the lineality directions: the tight
            // facets plus span equations have rank ambient - 1 - lineality.
            for r in c.rays() {
                let mut tight: Vec<IntVec> = c
                    .facet_normals()
                    .iter()
                    .filter(|n| crate::linalg::dot(n, r).is_zero())
                    .cloned()
                    .collect();
                tight.extend(c.span_equations().iter().cloned());
                let rank = if tight.is_empty() {
                    0
                } else {
                    IntMat::from_big_rows(&tight).rank()
                };
                assert_eq!(
                    rank + c.lineality().len(),
                    dim - 1,
                    "ray {:?} of cone {:?}",
                    r,
                    c.rays()
                );
            }
        }
    }

    #[test]
    fn fan_of_quadrant_validates() {
        let fan = Fan::from_maximal(&[quadrant()]).unwrap();
        assert_eq!(fan.cones().len(), 4);
        assert_eq!(fan.maximal_cones().len(), 1);
        assert!(fan.validate().is_ok());
    }

    #[test]
    fn fan_rejects_bad_intersection() {
        // Classic non-fan: two 2D cones overlapping in a 2D region.
        let a = quadrant();
        let b = RationalCone::from_rows(&[vec![1, 1], vec![-1, 1]], 2).unwrap();
        assert!(Fan::from_maximal(&[a, b]).is_err());
    }

    #[test]
    fn strict_fan_rejects_missing_face() {
        let q = quadrant();
        let ray = RationalCone::from_rows(&[vec![1, 0]], 2).unwrap();
        // Only one of the two rays listed: face closure is violated.
        assert!(Fan::from_cones_strict(&[q.clone(), ray]).is_err());
        assert!(Fan::from_maximal(&[q]).is_ok());
    }

    #[test]
    fn two_quadrant_fan() {
        let a = quadrant();
        let b = RationalCone::from_rows(&[vec![0, 1], vec![-1, 0]], 2).unwrap();
        let fan = Fan::from_maximal(&[a, b]).unwrap();
        assert_eq!(fan.maximal_cones().len(), 2);
    }

    #[test]
    fn intersection_and_interior_tests() {
        let a = quadrant();
        let b = RationalCone::from_rows(&[vec![1, 1], vec![-1, 1]], 2).unwrap();
        let k = a.intersect(&b).unwrap();
        assert_eq!(k.rays(), &[int_vec(&[0, 1]), int_vec(&[1, 1])]);
        assert!(a.meets_interior_of(&b));
        assert!(b.meets_interior_of(&a));
        let ray = RationalCone::from_rows(&[vec![1, 0]], 2).unwrap();
        assert!(!ray.meets_interior_of(&a));
        let c = RationalCone::from_rows(&[vec![-1, 0], vec![-1, -1]], 2).unwrap();
        assert!(!c.meets_interior_of(&a));
    }

    #[test]
    fn multiplicity_of_simplicial_cones() {
        assert_eq!(quadrant().multiplicity(), Some(bint(1)));
        let c = RationalCone::from_rows(&[vec![1, 1], vec![1, -1]], 2).unwrap();
        assert_eq!(c.multiplicity(), Some(bint(2)));
    }
}
