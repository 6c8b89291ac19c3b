//! Primitive collections, primitive relations and primitive inequalities.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::exactla::linalg::{add, neg, rank_of, rref_rows, unit, zeros};
use crate::exactla::scalar::{primitive_direction, Rational};
use crate::exactla::{cones_equal, solve_nonneg_in_span, Cone, HCone, QVector};
use crate::fan::{Fan, RaySet};
use crate::mori::{subsets, RelationVector};
use crate::plfun::{refinement_map, wall_functional_row, PLBasis, PlError};

/// A set of rays contained in no cone of the fan, every proper subset of
/// which is contained in some cone.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimitiveCollection {
    pub rays: RaySet,
}

impl PrimitiveCollection {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }
}

impl fmt::Display for PrimitiveCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rays.fmt(f)
    }
}

/// Minimal non-faces of the complex `{s : s ⊆ σ(1) for some σ}`, found
/// level by level: a `k`-set is a candidate only if all its `(k−1)`-subsets
/// lie in a cone. Sizes stop at `n + 1`, the largest a primitive collection
/// can have when the support is convex and full-dimensional.
pub fn enumerate_primitive_collections(fan: &Fan) -> Vec<PrimitiveCollection> {
    let mut out = Vec::new();
    let mut level: BTreeSet<Vec<usize>> = (0..fan.num_rays()).map(|i| vec![i]).collect();
    for k in 2..=fan.dim() + 1 {
        let prev: Vec<&Vec<usize>> = level.iter().collect();
        let mut next = BTreeSet::new();
        for (i, a) in prev.iter().enumerate() {
            for b in &prev[i + 1..] {
                if a[..k - 2] != b[..k - 2] {
                    break;
                }
                let mut cand = (*a).clone();
                cand.push(b[k - 2]);
                let faces_ok = (0..k).all(|skip| {
                    let sub: Vec<usize> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &x)| x)
                        .collect();
                    level.contains(&sub)
                });
                if !faces_ok {
                    continue;
                }
                let set = RaySet::new(cand.iter().copied());
                if fan.contained_in_single_cone(&set) {
                    next.insert(cand);
                } else {
                    out.push(PrimitiveCollection { rays: set });
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    out.sort();
    out
}

/// The smooth-case reading: sets not generating a cone of the fan whose
/// every proper subset does generate one. Sets lying inside a cone without
/// being one of its faces do not count.
pub fn batyrev_primitive_collections(fan: &Fan) -> Vec<RaySet> {
    enumerate_primitive_collections(fan)
        .into_iter()
        .map(|p| p.rays)
        .filter(|p| proper_subsets(p).iter().all(|s| fan.is_cone(s)))
        .collect()
}

fn proper_subsets(p: &RaySet) -> Vec<RaySet> {
    let items: Vec<usize> = p.iter().collect();
    (1..items.len())
        .flat_map(|k| subsets(&items, k))
        .map(RaySet::new)
        .collect()
}

/// `Σ_{ρ∈P} ρ = Σ_{ρ∈S} b_ρ ρ` with `S` independent inside the minimal cone
/// containing the left side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveRelation {
    pub collection: PrimitiveCollection,
    /// Index into [`Fan::faces`]; `None` when the rays sum to zero.
    pub sigma_min: Option<usize>,
    pub support: RaySet,
    /// Positive coefficients aligned with `support`.
    pub b: Vec<Rational>,
    pub a_p: RelationVector,
}

impl PrimitiveRelation {
    pub fn coefficient(&self, ray: usize) -> Option<&Rational> {
        self.support.iter().position(|r| r == ray).map(|k| &self.b[k])
    }

    /// `r1+r3 = r2+r4` style rendering of the defining equation.
    pub fn equation(&self) -> String {
        let lhs: Vec<String> = self.collection.rays.iter().map(|i| format!("r{i}")).collect();
        let rhs: Vec<String> = self
            .support
            .iter()
            .zip(&self.b)
            .map(|(i, b)| if b.is_one() { format!("r{i}") } else { format!("{b}r{i}") })
            .collect();
        let rhs = if rhs.is_empty() { "0".to_string() } else { rhs.join("+") };
        format!("{} = {}", lhs.join("+"), rhs)
    }
}

fn sum_of(fan: &Fan, rays: &RaySet) -> QVector {
    rays.iter().fold(zeros(fan.dim()), |acc, i| add(&acc, fan.ray(i)))
}

fn assemble_a_p(fan: &Fan, p: &RaySet, support: &RaySet, b: &[Rational]) -> RelationVector {
    let mut a = vec![Rational::zero(); fan.num_rays()];
    for i in p.iter() {
        a[i] = Rational::one();
    }
    for (i, bi) in support.iter().zip(b) {
        a[i] = a[i].clone() - bi.clone();
    }
    RelationVector(a)
}

/// Primitive relation of `p`, with `S` the support of a basic solution of
/// the membership LP over the rays of the minimal cone.
pub fn primitive_relation(fan: &Fan, p: &PrimitiveCollection) -> PrimitiveRelation {
    let target = sum_of(fan, &p.rays);
    let sigma_min = fan
        .minimal_cone_containing(&target)
        .expect("a convex support contains every sum of rays");
    let (support, b) = match sigma_min {
        None => (RaySet::empty(), Vec::new()),
        Some(face) => {
            let rays: Vec<usize> = fan.faces()[face].ray_indices.iter().collect();
            let gens: Vec<QVector> = rays.iter().map(|&i| fan.ray(i).clone()).collect();
            let d = solve_nonneg_in_span(&target, &gens).expect("target lies in its minimal cone");
            (RaySet::new(d.support.iter().map(|&k| rays[k])), d.coefficients)
        }
    };
    let a_p = assemble_a_p(fan, &p.rays, &support, &b);
    debug_assert!(a_p.holds(fan));
    for (i, bi) in support.iter().zip(&b) {
        assert!(bi.is_positive());
        if p.rays.contains(i) {
            assert!(*bi < Rational::one(), "coefficient on a ray of the collection must be below 1");
        }
    }
    PrimitiveRelation { collection: p.clone(), sigma_min, support, b, a_p }
}

/// Every valid choice of `(S, b)` for `p`: each independent subset of the
/// minimal cone's rays that expresses the sum with positive coefficients.
pub fn all_primitive_relations(fan: &Fan, p: &PrimitiveCollection) -> Vec<PrimitiveRelation> {
    let target = sum_of(fan, &p.rays);
    let Some(face) = fan.minimal_cone_containing(&target).expect("sum lies in the support") else {
        return vec![primitive_relation(fan, p)];
    };
    let rays: Vec<usize> = fan.faces()[face].ray_indices.iter().collect();
    let mut out = Vec::new();
    for k in 1..=rays.len().min(fan.dim()) {
        for s in subsets(&rays, k) {
            let gens: Vec<QVector> = s.iter().map(|&i| fan.ray(i).clone()).collect();
            if rank_of(&gens) != k {
                continue;
            }
            let cols: Vec<QVector> = (0..fan.dim())
                .map(|r| gens.iter().map(|g| g[r].clone()).collect())
                .collect();
            let Some(b) = crate::exactla::linalg::solve(&cols, k, &target) else {
                continue;
            };
            if b.iter().all(|x| x.is_positive()) {
                let support = RaySet::new(s.iter().copied());
                let a_p = assemble_a_p(fan, &p.rays, &support, &b);
                out.push(PrimitiveRelation {
                    collection: p.clone(),
                    sigma_min: Some(face),
                    support,
                    b,
                    a_p,
                });
            }
        }
    }
    out
}

/// `CPL` candidates in ray-value coordinates: `a_P · a ≥ 0` for every
/// primitive collection, inside `PL(Σ)`.
pub fn primitive_inequality_cone(basis: &PLBasis) -> HCone {
    let fan = basis.fan();
    let rows = enumerate_primitive_collections(fan)
        .iter()
        .map(|p| primitive_relation(fan, p).a_p.0)
        .collect();
    HCone::new(rows, basis.equalities().to_vec(), fan.num_rays())
}

/// Collections of a refinement relative to the coarse fan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollectionType {
    /// Inside some coarse cone.
    A,
    /// Inside no coarse cone; then primitive for the coarse fan too.
    B,
}

/// Classifies a primitive collection `p` of `fine` against `coarse`.
pub fn classify_type(p: &PrimitiveCollection, fine: &Fan, coarse: &Fan) -> Result<CollectionType, PlError> {
    refinement_map(fine, coarse)?;
    if coarse.contained_in_single_cone(&p.rays) {
        Ok(CollectionType::A)
    } else {
        assert!(
            p.rays.iter().all(|i| coarse.contained_in_single_cone(&p.rays.without(i))),
            "a type B collection must be primitive for the coarse fan"
        );
        Ok(CollectionType::B)
    }
}

/// Brute-force oracle: every subset that is in no cone while all of its
/// maximal proper subsets are.
pub fn primitive_collections_naive(fan: &Fan) -> Vec<PrimitiveCollection> {
    let r = fan.num_rays();
    assert!(r < 20, "naive enumeration is exponential");
    let mut out = Vec::new();
    for mask in 1u32..(1 << r) {
        let set: RaySet = (0..r).filter(|i| mask & (1 << i) != 0).collect();
        if set.len() < 2 || fan.contained_in_single_cone(&set) {
            continue;
        }
        if set.iter().all(|i| fan.contained_in_single_cone(&set.without(i))) {
            out.push(PrimitiveCollection { rays: set });
        }
    }
    out.sort();
    out
}

/// The nef cone read off from the primitive inequalities, in normalized
/// ray-value coordinates `a_i = φ(ρ_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NefDescription {
    /// One row per primitive collection, scaled to coprime integers.
    pub primitive: Vec<(PrimitiveCollection, QVector)>,
    /// Primitive rows that vanish on the whole cone.
    pub implied_equalities: Vec<QVector>,
    /// Rays whose values are fixed to zero.
    pub pinned: Vec<usize>,
    /// Equalities left after pinning, each solved for its highest variable.
    pub reduced_equalities: Vec<QVector>,
    /// Irredundant inequalities in the remaining variables, each with the
    /// indices (into `primitive`) of the collections reducing to it.
    pub reduced_inequalities: Vec<(QVector, Vec<usize>)>,
    /// Variables left free after eliminating the equalities.
    pub free: Vec<usize>,
}

/// Reduces the primitive inequalities modulo linear functions and the
/// equalities they force.
pub fn nef_description(basis: &PLBasis) -> NefDescription {
    let fan = basis.fan();
    let r = fan.num_rays();
    let primitive: Vec<(PrimitiveCollection, QVector)> = enumerate_primitive_collections(fan)
        .into_iter()
        .map(|p| {
            let row = primitive_direction(&primitive_relation(fan, &p).a_p.0);
            (p, row)
        })
        .collect();
    let cone = HCone::new(
        primitive.iter().map(|(_, h)| h.clone()).collect(),
        basis.equalities().to_vec(),
        r,
    );
    let implied_equalities: Vec<QVector> = primitive
        .iter()
        .filter(|(_, h)| cone.valid_inequality(&neg(h)).is_some())
        .map(|(_, h)| h.clone())
        .collect();

    let pinned = basis.pinned().to_vec();
    let mut eqs: Vec<QVector> = basis.equalities().to_vec();
    eqs.extend(implied_equalities.iter().cloned());
    eqs.extend(pinned.iter().map(|&p| unit(r, p)));
    let mut order = pinned.clone();
    order.extend((0..r).rev().filter(|i| !pinned.contains(i)));
    let (rref, pivots) = rref_rows(eqs, r, &order);
    let free: Vec<usize> = (0..r).filter(|i| !pivots.contains(i)).collect();
    let reduced_equalities: Vec<QVector> = rref
        .iter()
        .zip(&pivots)
        .filter(|(_, p)| !pinned.contains(p))
        .map(|(row, _)| primitive_direction(row))
        .collect();

    let mut reduced: Vec<(QVector, Vec<usize>)> = Vec::new();
    for (k, (_, h)) in primitive.iter().enumerate() {
        let mut v = h.clone();
        for (row, &p) in rref.iter().zip(&pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                v = crate::exactla::linalg::sub(&v, &crate::exactla::linalg::scale(&f, row));
            }
        }
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let v = primitive_direction(&v);
        match reduced.iter_mut().find(|(w, _)| *w == v) {
            Some((_, sources)) => sources.push(k),
            None => reduced.push((v, vec![k])),
        }
    }
    let mut i = 0;
    while i < reduced.len() {
        let others: Vec<QVector> = reduced
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, (w, _))| w.clone())
            .collect();
        if HCone::new(others, Vec::new(), r).valid_inequality(&reduced[i].0).is_some() {
            reduced.remove(i);
        } else {
            i += 1;
        }
    }
    NefDescription {
        primitive,
        implied_equalities,
        pinned,
        reduced_equalities,
        reduced_inequalities: reduced,
        free,
    }
}

/// For each primitive collection, whether its inequality alone (with the
/// equations of `PL(Σ)`) already cuts out the same cone as all wall
/// inequalities.
pub fn single_inequality_sufficiency(basis: &PLBasis) -> Vec<(PrimitiveCollection, bool)> {
    let fan = basis.fan();
    let r = fan.num_rays();
    let walls = HCone::new(
        fan.interior_walls().iter().map(|w| wall_functional_row(fan, w)).collect(),
        basis.equalities().to_vec(),
        r,
    );
    enumerate_primitive_collections(fan)
        .into_iter()
        .map(|p| {
            let row = primitive_relation(fan, &p).a_p.0;
            let single = HCone::new(vec![row], basis.equalities().to_vec(), r);
            let equal = cones_equal(&Cone::H(single), &Cone::H(walls.clone())).expect("same ambient space");
            (p, equal)
        })
        .collect()
}
