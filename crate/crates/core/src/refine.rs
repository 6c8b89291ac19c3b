//! Simplicial refinements with the same rays, built from regular
//! subdivisions of each maximal cone with generic weights.
//!
//! For a maximal cone `σ` with interior dual point `m_σ`, each ray is
//! rescaled to `v_ρ = ρ / ⟨m_σ, ρ⟩` and shrunk by its weight `w_ρ ∈ (0,1]`.
//! The facets of `conv(0, w_ρ v_ρ)` away from the origin project to a
//! subdivision of `σ`; for generic weights every such facet is a simplex.
//! Rays of a chosen set `P` keep weight 1, which forces `P ∩ σ(1)` to span
//! a cone of the subdivision.

use std::collections::BTreeSet;
use std::sync::Arc;

use log::{debug, info, warn};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exactla::linalg::{add, dot, rank_of, scale, solve, zeros, Matrix};
use crate::exactla::scalar::{int, Rational};
use crate::exactla::{cone_contains, h_to_skeleton, strict_feasible, v_to_h, ExactError, HCone, QVector, VCone};
use crate::fan::{ConeData, Fan, FanError, RaySet};
use crate::mori::subsets;
use crate::plfun::{PLFunction, PlError};
use crate::primcoll::PrimitiveCollection;

/// Attempts at drawing generic weights before giving up.
pub const RETRY_BUDGET: usize = 32;

/// Denominator of drawn weights; `2^31 − 1` is prime.
const WEIGHT_DENOM: i64 = 2_147_483_647;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefineError {
    #[error("rays of the chosen set inside maximal cone {cone} are linearly dependent")]
    PNotIndependent { cone: usize },
    #[error("weights are not generic for maximal cone {cone}: a facet has more than n vertices")]
    Degenerate { cone: usize },
    #[error("no generic weights found after {attempts} draws")]
    GenericityExhausted { attempts: usize },
    #[error("{0} is not a primitive collection of the fan")]
    NotPrimitive(RaySet),
    #[error("the supplied function is not strictly convex")]
    NotStrictlyConvex,
    #[error("glued subdivision is not a fan: {0}")]
    InvalidRefinement(FanError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Pl(#[from] PlError),
}

/// Weights per ray with the seed that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightAssignment {
    pub w: Vec<Rational>,
    pub seed: u64,
    /// Number of draws used, starting at 1.
    pub attempts: usize,
}

/// A simplicial refinement `fine` of `coarse` with the same rays.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub fine: Arc<Fan>,
    pub coarse: Arc<Fan>,
    /// Coarse maximal cone containing each fine maximal cone.
    pub cone_map: Vec<usize>,
    pub weights: WeightAssignment,
    /// The `m_σ` used for each coarse maximal cone.
    pub dual_points: Vec<QVector>,
    /// The ray set the refinement was asked to respect.
    pub respected: RaySet,
}

/// Sum of the inward facet normals: a point with `⟨m, ρ⟩ > 0` on every ray
/// of a full-dimensional pointed cone.
pub fn interior_dual_point(cone: &ConeData) -> QVector {
    let n = cone.facets.ambient_dim;
    cone.facets.inequalities.iter().fold(zeros(n), |acc, h| add(&acc, h))
}

/// Regular subdivision of one maximal cone. Returns the ray sets of the
/// simplicial pieces in lexicographic order.
pub fn weighted_subdivision(
    fan: &Fan,
    cone_index: usize,
    m: &[Rational],
    w: &[Rational],
) -> Result<Vec<RaySet>, RefineError> {
    let cone = &fan.max_cones()[cone_index];
    if cone.is_simplicial() {
        return Ok(vec![cone.ray_indices.clone()]);
    }
    let n = fan.dim();
    let rays: Vec<usize> = cone.ray_indices.iter().collect();
    let points: Vec<QVector> = rays
        .iter()
        .map(|&i| {
            let h = dot(m, fan.ray(i));
            assert!(h.is_positive(), "dual point must be positive on every ray of the cone");
            scale(&(w[i].clone() / h), fan.ray(i))
        })
        .collect();
    let positions: Vec<usize> = (0..rays.len()).collect();
    let mut facets: BTreeSet<RaySet> = BTreeSet::new();
    for sub in subsets(&positions, n) {
        let rows: Vec<QVector> = sub.iter().map(|&k| points[k].clone()).collect();
        if rank_of(&rows) < n {
            continue;
        }
        let c = solve(&rows, n, &vec![Rational::one(); n]).expect("independent points span a hyperplane");
        let mut on = Vec::new();
        let mut valid = true;
        for (k, p) in points.iter().enumerate() {
            let v = dot(&c, p);
            if v > Rational::one() {
                valid = false;
                break;
            }
            if v.is_one() {
                on.push(rays[k]);
            }
        }
        if !valid {
            continue;
        }
        if on.len() > n {
            return Err(RefineError::Degenerate { cone: cone_index });
        }
        facets.insert(RaySet::new(on));
    }
    Ok(facets.into_iter().collect())
}

/// Full-dimensional pieces of the subdivision of the face `face` of a coarse
/// cone induced by the fine cones inside that coarse cone.
fn induced_on_face(fan: &Fan, pieces: &[RaySet], face: &RaySet) -> BTreeSet<RaySet> {
    let target = rank_of(&face.iter().map(|i| fan.ray(i).clone()).collect::<Vec<_>>());
    pieces
        .iter()
        .map(|p| p.intersection(face))
        .filter(|s| rank_of(&s.iter().map(|i| fan.ray(i).clone()).collect::<Vec<_>>()) == target)
        .collect()
}

/// Do the subdivisions of two coarse cones agree on every shared face?
fn property_b_holds(fan: &Fan, per_cone: &[Vec<RaySet>]) -> bool {
    for (fi, face) in fan.faces().iter().enumerate() {
        if face.is_simplicial() {
            continue;
        }
        let owners = fan.max_cones_containing(fi);
        let first = induced_on_face(fan, &per_cone[owners[0]], &face.ray_indices);
        if owners[1..]
            .iter()
            .any(|&c| induced_on_face(fan, &per_cone[c], &face.ray_indices) != first)
        {
            return false;
        }
    }
    true
}

fn check_p_independent(fan: &Fan, p: &RaySet) -> Result<(), RefineError> {
    for (c, cone) in fan.max_cones().iter().enumerate() {
        let inside = p.intersection(&cone.ray_indices);
        let vecs: Vec<QVector> = inside.iter().map(|i| fan.ray(i).clone()).collect();
        if rank_of(&vecs) != vecs.len() {
            return Err(RefineError::PNotIndependent { cone: c });
        }
    }
    Ok(())
}

fn draw_weights(rng: &mut ChaCha8Rng, fan: &Fan, p: &RaySet) -> Vec<Rational> {
    (0..fan.num_rays())
        .map(|i| {
            if p.contains(i) {
                Rational::one()
            } else {
                let a: i64 = rng.gen_range(1..WEIGHT_DENOM);
                Rational::new(BigInt::from(a), BigInt::from(WEIGHT_DENOM))
            }
        })
        .collect()
}

/// Glues per-cone subdivisions into a validated fan.
fn glue(coarse: &Fan, per_cone: &[Vec<RaySet>]) -> Result<(Fan, Vec<usize>), FanError> {
    let mut cones = Vec::new();
    let mut map = Vec::new();
    for (c, pieces) in per_cone.iter().enumerate() {
        for p in pieces {
            cones.push(p.as_slice().to_vec());
            map.push(c);
        }
    }
    let fine = Fan::new(coarse.dim(), coarse.rays().to_vec(), cones)?;
    Ok((fine, map))
}

/// Property B on a finished refinement: the pieces inside any two coarse
/// cones induce the same subdivision of each face they share.
pub fn property_b(r: &Refinement) -> bool {
    let per_cone: Vec<Vec<RaySet>> = (0..r.coarse.max_cones().len())
        .map(|c| {
            r.cone_map
                .iter()
                .enumerate()
                .filter(|&(_, &cm)| cm == c)
                .map(|(k, _)| r.fine.max_cones()[k].ray_indices.clone())
                .collect()
        })
        .collect();
    property_b_holds(&r.coarse, &per_cone)
}

/// Does `P ∩ σ(1)` span a cone of the refinement for every coarse `σ`?
pub fn property_a_holds(r: &Refinement) -> bool {
    r.coarse
        .max_cones()
        .iter()
        .all(|c| r.fine.is_cone(&r.respected.intersection(&c.ray_indices)))
}

fn build(
    coarse: &Arc<Fan>,
    p: &RaySet,
    seed: u64,
    dual_points: Vec<QVector>,
    consistent_duals: bool,
) -> Result<Refinement, RefineError> {
    check_p_independent(coarse, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=RETRY_BUDGET {
        let w = draw_weights(&mut rng, coarse, p);
        let mut per_cone = Vec::with_capacity(coarse.max_cones().len());
        let mut degenerate = false;
        for (c, dual) in dual_points.iter().enumerate() {
            match weighted_subdivision(coarse, c, dual, &w) {
                Ok(pieces) => per_cone.push(pieces),
                Err(RefineError::Degenerate { cone }) => {
                    debug!("attempt {attempt}: degenerate weights on cone {cone}");
                    degenerate = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if degenerate {
            continue;
        }
        if !property_b_holds(coarse, &per_cone) {
            debug_assert!(!consistent_duals, "shared hyperplanes always induce matching face subdivisions");
            info!("attempt {attempt}: subdivisions disagree on a shared face, redrawing weights");
            continue;
        }
        let (fine, cone_map) = match glue(coarse, &per_cone) {
            Ok(x) => x,
            Err(e) => {
                warn!("attempt {attempt}: glued subdivision rejected: {e}");
                continue;
            }
        };
        if attempt > 1 {
            info!("generic weights found after {attempt} draws");
        }
        let r = Refinement {
            fine: Arc::new(fine),
            coarse: Arc::clone(coarse),
            cone_map,
            weights: WeightAssignment { w, seed, attempts: attempt },
            dual_points,
            respected: p.clone(),
        };
        assert!(r.fine.is_simplicial(), "generic subdivisions are simplicial");
        assert!(property_a_holds(&r), "rays of weight one span a cone in each subdivision");
        return Ok(r);
    }
    Err(RefineError::GenericityExhausted { attempts: RETRY_BUDGET })
}

/// Simplicial refinement with the same rays in which `P ∩ σ(1)` spans a
/// cone for every maximal cone `σ`.
pub fn simplicial_refinement(coarse: &Arc<Fan>, p: &RaySet, seed: u64) -> Result<Refinement, RefineError> {
    let duals = coarse.max_cones().iter().map(interior_dual_point).collect();
    build(coarse, p, seed, duals, false)
}

fn is_primitive(fan: &Fan, p: &RaySet) -> bool {
    !fan.contained_in_single_cone(p) && p.iter().all(|i| fan.contained_in_single_cone(&p.without(i)))
}

/// Refinement in which `P` remains a primitive collection.
pub fn supported_refinement(coarse: &Arc<Fan>, p: &PrimitiveCollection, seed: u64) -> Result<Refinement, RefineError> {
    if !is_primitive(coarse, &p.rays) {
        return Err(RefineError::NotPrimitive(p.rays.clone()));
    }
    let r = simplicial_refinement(coarse, &p.rays, seed)?;
    assert!(is_primitive(&r.fine, &p.rays), "the collection must stay primitive on the refinement");
    Ok(r)
}

/// A quasi-projective refinement together with the functions certifying it.
#[derive(Clone, Debug)]
pub struct QpRefinement {
    pub refinement: Refinement,
    /// `μφ + m`, strictly convex on the coarse fan and positive on every ray.
    pub shifted: PLFunction,
    /// `φ'(ρ) = φ(ρ) / w_ρ`, strictly convex relative to the coarse fan.
    pub relative: PLFunction,
    /// Strictly convex on the refinement: pullback of `shifted` plus `ε·relative`.
    pub witness: PLFunction,
    pub epsilon: Rational,
}

/// Finds `(m, μ)` with `μ > 0` and `⟨m, ρ⟩ + μ φ(ρ) > 0` on every ray.
fn positive_shift(phi: &PLFunction) -> PLFunction {
    let fan = phi.fan();
    let n = fan.dim();
    let mut strict: Vec<QVector> = (0..fan.num_rays())
        .map(|i| {
            let mut row = fan.ray(i).clone();
            row.push(phi.ray_value(i));
            row
        })
        .collect();
    let mut mu_row = zeros(n + 1);
    mu_row[n] = Rational::one();
    strict.push(mu_row);
    let x = strict_feasible(&strict, &[], &[], n + 1)
        .into_witness()
        .expect("a strictly convex function lifts the rays to a pointed cone");
    let m = x[..n].to_vec();
    phi.scale(&x[n]).add(&PLFunction::linear(fan, m))
}

/// Is `f` strictly convex across every wall of the refinement lying inside
/// a single coarse cone?
pub fn strictly_convex_relative(r: &Refinement, f: &PLFunction) -> bool {
    r.fine
        .interior_walls()
        .iter()
        .filter(|w| r.cone_map[w.left] == r.cone_map[w.right])
        .all(|w| f.wall_value(w).is_positive())
}

/// Quasi-projective simplicial refinement driven by a strictly convex `φ`:
/// the hyperplanes are `φ = 1` on each cone, so subdivisions agree on
/// shared faces by construction.
pub fn qp_refinement(coarse: &Arc<Fan>, p: &RaySet, phi: &PLFunction, seed: u64) -> Result<QpRefinement, RefineError> {
    if !phi.is_strictly_convex() {
        return Err(RefineError::NotStrictlyConvex);
    }
    let shifted = positive_shift(phi);
    let duals = shifted.cone_functionals().to_vec();
    let refinement = build(coarse, p, seed, duals, true)?;
    let values: QVector = (0..coarse.num_rays())
        .map(|i| shifted.ray_value(i) / refinement.weights.w[i].clone())
        .collect();
    let relative = PLFunction::from_ray_values(&refinement.fine, &values)?;
    assert!(
        strictly_convex_relative(&refinement, &relative),
        "rescaled function must be strictly convex inside each coarse cone"
    );
    let base = shifted.pullback(&refinement.fine)?;
    let mut epsilon = Rational::one();
    for _ in 0..256 {
        let candidate = base.add(&relative.scale(&epsilon));
        if candidate.is_strictly_convex() {
            return Ok(QpRefinement { refinement, shifted, relative, witness: candidate, epsilon });
        }
        epsilon /= int(2);
    }
    unreachable!("a small enough multiple of the relative function keeps strict convexity across coarse walls")
}

/// Exact cover check: inside each coarse cone, the fine cones' volumes
/// (after slicing by `⟨m_σ, x⟩ = 1`) add up to the coarse cone's volume,
/// computed from an independent pulling triangulation of its face lattice.
pub fn volumes_match(r: &Refinement) -> bool {
    let coarse = &r.coarse;
    for (c, cone) in coarse.max_cones().iter().enumerate() {
        let m = interior_dual_point(cone);
        let fine_total = r
            .cone_map
            .iter()
            .enumerate()
            .filter(|&(_, &cm)| cm == c)
            .fold(Rational::zero(), |acc, (k, _)| {
                acc + simplex_volume(coarse, &m, &r.fine.max_cones()[k].ray_indices)
            });
        let coarse_total = pulling_triangulation(coarse, &cone.ray_indices)
            .iter()
            .fold(Rational::zero(), |acc, s| acc + simplex_volume(coarse, &m, s));
        if fine_total != coarse_total || fine_total.is_zero() {
            return false;
        }
        if r.fine
            .max_cones()
            .iter()
            .enumerate()
            .filter(|&(k, _)| r.cone_map[k] == c)
            .any(|(_, fc)| fc.ray_indices.iter().any(|i| !cone.contains(r.fine.ray(i))))
        {
            return false;
        }
    }
    true
}

/// `|det|` of the sliced generators (a multiple of the simplex volume).
fn simplex_volume(fan: &Fan, m: &[Rational], rays: &RaySet) -> Rational {
    let rows: Vec<QVector> = rays
        .iter()
        .map(|i| scale(&(Rational::one() / dot(m, fan.ray(i))), fan.ray(i)))
        .collect();
    Matrix::from_rows(rows).det().abs()
}

/// Pulling triangulation of a face, recursing through facets that avoid
/// the smallest ray.
fn pulling_triangulation(fan: &Fan, face: &RaySet) -> Vec<RaySet> {
    let gens: Vec<QVector> = face.iter().map(|i| fan.ray(i).clone()).collect();
    let d = rank_of(&gens);
    if face.len() == d {
        return vec![face.clone()];
    }
    let apex = face.iter().next().expect("faces are nonempty");
    let mut out = Vec::new();
    for sub in fan.faces() {
        if sub.dim + 1 != d || !sub.ray_indices.is_subset(face) || sub.ray_indices.contains(apex) {
            continue;
        }
        for s in pulling_triangulation(fan, &sub.ray_indices) {
            out.push(s.union(&RaySet::new([apex])));
        }
    }
    out
}

/// For each fine wall inside one coarse cone, checks that the union of the
/// two incident fine cones is convex: splitting the cone over all their rays
/// by the wall's hyperplane must give back the two fine cones.
pub fn adjacent_unions_convex(r: &Refinement) -> Result<bool, ExactError> {
    let fine = &r.fine;
    let n = fine.dim();
    for wall in fine.interior_walls() {
        if r.cone_map[wall.left] != r.cone_map[wall.right] {
            continue;
        }
        let left = &fine.max_cones()[wall.left];
        let right = &fine.max_cones()[wall.right];
        let all = left.ray_indices.union(&right.ray_indices);
        let hull = v_to_h(&VCone::new(all.iter().map(|i| fine.ray(i).clone()).collect(), n))?;
        let k = left
            .facet_rays
            .iter()
            .position(|fr| *fr == wall.rays)
            .expect("a wall is a facet of its cones");
        let h = left.facets.inequalities[k].clone();
        for (side, piece) in [(h.clone(), left), (crate::exactla::linalg::neg(&h), right)] {
            let mut ineqs = hull.inequalities.clone();
            ineqs.push(side);
            let half = h_to_skeleton(&HCone::new(ineqs, hull.equalities.clone(), n))?;
            let target = VCone::new(piece.ray_indices.iter().map(|i| fine.ray(i).clone()).collect(), n);
            if !half.lines.is_empty() || half.rays.iter().any(|g| cone_contains(&target, g).is_none()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
