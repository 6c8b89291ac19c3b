//! Fans: validated rays and maximal cones with the derived face lattice,
//! walls and support description.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::warn;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::exactla::linalg::{dot, rank_of};
use crate::exactla::scalar::{primitive_direction, qvec};
use crate::exactla::{cone_contains, h_to_skeleton, v_to_h, ExactError, HCone, QVector, VCone, MAX_DD_DIM};

/// Sorted set of ray indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RaySet(Vec<usize>);

impl RaySet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        RaySet(set.into_iter().collect())
    }

    pub fn empty() -> Self {
        RaySet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &RaySet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn intersection(&self, other: &RaySet) -> RaySet {
        RaySet(self.0.iter().copied().filter(|&i| other.contains(i)).collect())
    }

    pub fn union(&self, other: &RaySet) -> RaySet {
        RaySet::new(self.0.iter().chain(&other.0).copied())
    }

    pub fn difference(&self, other: &RaySet) -> RaySet {
        RaySet(self.0.iter().copied().filter(|&i| !other.contains(i)).collect())
    }

    pub fn without(&self, i: usize) -> RaySet {
        RaySet(self.0.iter().copied().filter(|&j| j != i).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for RaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromIterator<usize> for RaySet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        RaySet::new(iter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FanError {
    #[error("a fan needs ambient dimension at least 1")]
    ZeroDimension,
    #[error("a fan needs at least one maximal cone")]
    NoCones,
    #[error("ray {ray} has {found} coordinates, expected {expected}")]
    RayDimension { ray: usize, expected: usize, found: usize },
    #[error("ray {0} is the zero vector")]
    ZeroRay(usize),
    #[error("rays {first} and {second} have the same primitive generator")]
    DuplicateRay { first: usize, second: usize },
    #[error("cone {cone} refers to ray {index}, which does not exist")]
    RayIndexOutOfRange { cone: usize, index: usize },
    #[error("ray {0} is not a ray of any maximal cone")]
    UnusedRay(usize),
    #[error("maximal cone {cone} has dimension {dim}, expected {expected}")]
    MaxConeNotFullDim { cone: usize, dim: usize, expected: usize },
    #[error("cone {cone} contains a line")]
    NotStronglyConvex { cone: usize },
    #[error("ray {ray} is not an extremal ray of cone {cone}")]
    RedundantGenerator { cone: usize, ray: usize },
    #[error("cones {left} and {right} do not meet in a common face")]
    ConesOverlapImproperly { left: usize, right: usize },
    #[error("support is not convex: ray {ray} lies strictly outside the boundary wall {wall}")]
    SupportNotConvex { wall: RaySet, ray: usize },
    #[error("point lies outside the support of the fan")]
    OutsideSupport,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A cone of the fan together with its facet description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeData {
    pub ray_indices: RaySet,
    /// Inward primitive facet normals; equalities cut out the linear span.
    pub facets: HCone,
    /// For each facet inequality, the rays on which it vanishes.
    pub facet_rays: Vec<RaySet>,
    pub dim: usize,
}

impl ConeData {
    pub fn contains(&self, x: &[crate::Rational]) -> bool {
        self.facets.contains(x)
    }

    pub fn is_simplicial(&self) -> bool {
        self.ray_indices.len() == self.dim
    }
}

/// An interior wall `τ = σ_left ∩ σ_right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub rays: RaySet,
    /// Index into [`Fan::faces`].
    pub face: usize,
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Debug)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    ray_vectors: Vec<QVector>,
    max_cones: Vec<ConeData>,
    faces: Vec<ConeData>,
    face_index: BTreeMap<RaySet, usize>,
    /// Maximal cones containing each face.
    incidence: Vec<Vec<usize>>,
    interior_walls: Vec<Wall>,
    boundary_walls: Vec<(usize, usize)>,
    /// Inward normals of boundary walls; `|Σ|` is their common halfspace.
    support: HCone,
    simplicial: bool,
}

fn primitive_i64(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0i64, |acc, x| acc.gcd(x));
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

fn describe_cone(rays: &RaySet, ray_vectors: &[QVector], n: usize) -> Result<ConeData, ExactError> {
    let gens: Vec<QVector> = rays.iter().map(|i| ray_vectors[i].clone()).collect();
    let dim = rank_of(&gens);
    let mut h = v_to_h(&VCone::new(gens, n))?;
    h.inequalities = h.inequalities.iter().map(|f| primitive_direction(f)).collect();
    h.equalities = h.equalities.iter().map(|f| primitive_direction(f)).collect();
    h.inequalities.sort();
    let facet_rays = h
        .inequalities
        .iter()
        .map(|f| rays.iter().filter(|&i| dot(f, &ray_vectors[i]).is_zero()).collect())
        .collect();
    Ok(ConeData {
        ray_indices: rays.clone(),
        facets: h,
        facet_rays,
        dim,
    })
}

impl Fan {
    /// Validates raw fan data and derives faces, walls and the support.
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> Result<Fan, FanError> {
        if dim == 0 {
            return Err(FanError::ZeroDimension);
        }
        if dim > MAX_DD_DIM {
            return Err(ExactError::DimensionTooLarge { dim, max: MAX_DD_DIM }.into());
        }
        if max_cones.is_empty() {
            return Err(FanError::NoCones);
        }
        let mut prim = Vec::with_capacity(rays.len());
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(FanError::RayDimension { ray: i, expected: dim, found: r.len() });
            }
            if r.iter().all(|x| *x == 0) {
                return Err(FanError::ZeroRay(i));
            }
            let p = primitive_i64(r);
            if &p != r {
                warn!("ray {i} {r:?} is not primitive; using {p:?}");
            }
            if let Some(j) = prim.iter().position(|q: &Vec<i64>| *q == p) {
                return Err(FanError::DuplicateRay { first: j, second: i });
            }
            prim.push(p);
        }
        let ray_vectors: Vec<QVector> = prim.iter().map(|r| qvec(r)).collect();

        let mut used = vec![false; prim.len()];
        let mut cone_sets = Vec::with_capacity(max_cones.len());
        for (c, cone) in max_cones.iter().enumerate() {
            for &i in cone {
                if i >= prim.len() {
                    return Err(FanError::RayIndexOutOfRange { cone: c, index: i });
                }
                used[i] = true;
            }
            cone_sets.push(RaySet::new(cone.iter().copied()));
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(FanError::UnusedRay(i));
        }

        let mut cones = Vec::with_capacity(cone_sets.len());
        for (c, set) in cone_sets.iter().enumerate() {
            let data = describe_cone(set, &ray_vectors, dim)?;
            if data.dim != dim {
                return Err(FanError::MaxConeNotFullDim { cone: c, dim: data.dim, expected: dim });
            }
            if rank_of(&data.facets.inequalities) < dim {
                return Err(FanError::NotStronglyConvex { cone: c });
            }
            for i in set.iter() {
                let tight: Vec<QVector> = data
                    .facets
                    .inequalities
                    .iter()
                    .filter(|f| dot(f, &ray_vectors[i]).is_zero())
                    .cloned()
                    .collect();
                if rank_of(&tight) + 1 < dim {
                    return Err(FanError::RedundantGenerator { cone: c, ray: i });
                }
            }
            cones.push(data);
        }

        // Face ray sets of each maximal cone: closure of facet ray sets under intersection.
        let mut cone_faces: Vec<BTreeSet<RaySet>> = Vec::with_capacity(cones.len());
        for cone in &cones {
            let mut found: BTreeSet<RaySet> = BTreeSet::new();
            found.insert(cone.ray_indices.clone());
            let mut frontier: Vec<RaySet> = vec![cone.ray_indices.clone()];
            while let Some(face) = frontier.pop() {
                for fr in &cone.facet_rays {
                    let sub = face.intersection(fr);
                    if !sub.is_empty() && found.insert(sub.clone()) {
                        frontier.push(sub);
                    }
                }
            }
            cone_faces.push(found);
        }

        for a in 0..cones.len() {
            for b in a + 1..cones.len() {
                if !meet_properly(&cones[a], &cones[b], &cone_faces[a], &cone_faces[b], &ray_vectors, dim)? {
                    return Err(FanError::ConesOverlapImproperly { left: a, right: b });
                }
            }
        }

        let all_faces: BTreeSet<RaySet> = cone_faces.iter().flatten().cloned().collect();
        let mut faces = Vec::with_capacity(all_faces.len());
        for set in &all_faces {
            faces.push(describe_cone(set, &ray_vectors, dim)?);
        }
        faces.sort_by(|x, y| (x.dim, &x.ray_indices).cmp(&(y.dim, &y.ray_indices)));
        let face_index: BTreeMap<RaySet, usize> =
            faces.iter().enumerate().map(|(i, f)| (f.ray_indices.clone(), i)).collect();
        let incidence: Vec<Vec<usize>> = faces
            .iter()
            .map(|f| {
                (0..cones.len())
                    .filter(|&c| cone_faces[c].contains(&f.ray_indices))
                    .collect()
            })
            .collect();

        let mut interior_walls = Vec::new();
        let mut boundary_walls = Vec::new();
        for (fi, face) in faces.iter().enumerate() {
            if face.dim + 1 != dim {
                continue;
            }
            match incidence[fi].as_slice() {
                [c] => boundary_walls.push((fi, *c)),
                [l, r] => interior_walls.push(Wall {
                    rays: face.ray_indices.clone(),
                    face: fi,
                    left: *l,
                    right: *r,
                }),
                _ => unreachable!("proper intersections leave each wall in one or two maximal cones"),
            }
        }

        let mut support_normals = Vec::new();
        for &(fi, c) in &boundary_walls {
            let wall = &faces[fi].ray_indices;
            let k = cones[c]
                .facet_rays
                .iter()
                .position(|fr| fr == wall)
                .expect("a wall of a maximal cone is one of its facets");
            let normal = cones[c].facets.inequalities[k].clone();
            if let Some(ray) = (0..ray_vectors.len()).find(|&i| dot(&normal, &ray_vectors[i]).is_negative()) {
                return Err(FanError::SupportNotConvex { wall: wall.clone(), ray });
            }
            support_normals.push(normal);
        }
        support_normals.sort();
        support_normals.dedup();

        let simplicial = faces.iter().all(ConeData::is_simplicial);
        Ok(Fan {
            dim,
            rays: prim,
            ray_vectors,
            max_cones: cones,
            faces,
            face_index,
            incidence,
            interior_walls,
            boundary_walls,
            support: HCone::new(support_normals, vec![], dim),
            simplicial,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    /// Primitive integer generators.
    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &QVector {
        &self.ray_vectors[i]
    }

    pub fn ray_vectors(&self) -> &[QVector] {
        &self.ray_vectors
    }

    pub fn max_cones(&self) -> &[ConeData] {
        &self.max_cones
    }

    /// All nonzero cones, ordered by dimension and then ray set.
    pub fn faces(&self) -> &[ConeData] {
        &self.faces
    }

    pub fn face_of(&self, rays: &RaySet) -> Option<usize> {
        self.face_index.get(rays).copied()
    }

    /// Is `rays` exactly the ray set of a cone of the fan? The empty set
    /// counts as the zero cone.
    pub fn is_cone(&self, rays: &RaySet) -> bool {
        rays.is_empty() || self.face_index.contains_key(rays)
    }

    /// Maximal cones having the face `face` (an index into [`Fan::faces`]).
    pub fn max_cones_containing(&self, face: usize) -> &[usize] {
        &self.incidence[face]
    }

    pub fn interior_walls(&self) -> &[Wall] {
        &self.interior_walls
    }

    pub fn wall_by_rays(&self, rays: &RaySet) -> Option<&Wall> {
        self.interior_walls.iter().find(|w| &w.rays == rays)
    }

    /// `(face, max cone)` pairs for walls on the boundary of the support.
    pub fn boundary_walls(&self) -> &[(usize, usize)] {
        &self.boundary_walls
    }

    /// Halfspace description of `|Σ|`.
    pub fn support(&self) -> &HCone {
        &self.support
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }

    pub fn is_complete(&self) -> bool {
        self.boundary_walls.is_empty()
    }

    pub fn in_support(&self, x: &[crate::Rational]) -> bool {
        self.support.contains(x)
    }

    /// True iff some cone has all of `s` among its rays.
    pub fn contained_in_single_cone(&self, s: &RaySet) -> bool {
        self.max_cones.iter().any(|c| s.is_subset(&c.ray_indices))
    }

    /// Index of a maximal cone containing `x`, if any.
    pub fn max_cone_containing(&self, x: &[crate::Rational]) -> Option<usize> {
        self.max_cones.iter().position(|c| c.contains(x))
    }

    /// The smallest cone containing `x`, as an index into [`Fan::faces`].
    /// `Ok(None)` means `x = 0`.
    pub fn minimal_cone_containing(&self, x: &[crate::Rational]) -> Result<Option<usize>, FanError> {
        let c = self.max_cone_containing(x).ok_or(FanError::OutsideSupport)?;
        let cone = &self.max_cones[c];
        let mut rays = cone.ray_indices.clone();
        for (f, fr) in cone.facets.inequalities.iter().zip(&cone.facet_rays) {
            if dot(f, x).is_zero() {
                rays = rays.intersection(fr);
            }
        }
        if rays.is_empty() {
            return Ok(None);
        }
        Ok(Some(self.face_index[&rays]))
    }

    /// Raw data in the interchange layout.
    pub fn max_cone_lists(&self) -> Vec<Vec<usize>> {
        self.max_cones.iter().map(|c| c.ray_indices.as_slice().to_vec()).collect()
    }
}

/// Checks that `σ_a ∩ σ_b` is the cone over their common rays and that this
/// is a face of both.
fn meet_properly(
    a: &ConeData,
    b: &ConeData,
    faces_a: &BTreeSet<RaySet>,
    faces_b: &BTreeSet<RaySet>,
    ray_vectors: &[QVector],
    n: usize,
) -> Result<bool, ExactError> {
    if a.ray_indices == b.ray_indices {
        return Ok(false);
    }
    let common = a.ray_indices.intersection(&b.ray_indices);
    if !common.is_empty() && !(faces_a.contains(&common) && faces_b.contains(&common)) {
        return Ok(false);
    }
    let mut ineqs = a.facets.inequalities.clone();
    ineqs.extend(b.facets.inequalities.iter().cloned());
    let meet = h_to_skeleton(&HCone::new(ineqs, vec![], n))?;
    if !meet.lines.is_empty() {
        return Ok(false);
    }
    let face = VCone::new(common.iter().map(|i| ray_vectors[i].clone()).collect(), n);
    Ok(meet.rays.iter().all(|r| cone_contains(&face, r).is_some()))
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.rays == other.rays && self.max_cone_lists() == other.max_cone_lists()
    }
}

impl Eq for Fan {}
