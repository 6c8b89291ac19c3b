//! Executable checks of the structural results on concrete fans.
//!
//! Every check returns a [`TheoremReport`]. A `Holds` verdict comes with
//! certificates that [`verify_certificate`] re-checks using nothing but
//! rational arithmetic.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use log::debug;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus;
use crate::exactla::linalg::{add, dot, kernel_basis, proportionality, rank_of, scale, solve, unit, zeros};
use crate::exactla::scalar::{int, Rational};
use crate::exactla::{strict_feasible, v_to_h, HCone, QVector, StrictFeasibility, VCone};
use crate::fan::{Fan, FanError, RaySet};
use crate::mori::{admissible_wall_relations, curve_class, wall_relation, MoriCone};
use crate::plfun::{quasi_projectivity, value_row, wall_functional_row, PLBasis, PLFunction, QuasiProjectivity};
use crate::primcoll::{
    all_primitive_relations, batyrev_primitive_collections, enumerate_primitive_collections,
    primitive_collections_naive, primitive_inequality_cone, primitive_relation, single_inequality_sufficiency,
    PrimitiveCollection, PrimitiveRelation,
};
use crate::refine::{
    adjacent_unions_convex, property_a_holds, property_b, qp_refinement, simplicial_refinement,
    strictly_convex_relative, supported_refinement, volumes_match, Refinement,
};

/// Fans with at most this many rays are also enumerated by brute force.
pub const NAIVE_RAY_LIMIT: usize = 12;

/// Random points of the support sampled per fan by the convexity oracle.
pub const CONVEXITY_SAMPLES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TheoremId {
    /// The input validates as a fan.
    Validation,
    /// Size, rank and coefficient bounds of primitive collections and relations.
    PrimitiveStructure,
    /// Enumeration agrees with a brute-force search.
    EnumerationOracle,
    /// Every admissible wall relation gives the same class up to scale.
    WallClasses,
    /// Every primitive class lies in the Mori cone.
    PrimitiveInMori,
    /// Convex functions are cut out by the primitive inequalities.
    MainTheorem,
    /// Extremal walls come from primitive collections.
    ExtremalPrimitive,
    /// The cones around an extremal wall cover the cone over its rays.
    ReidConditions,
    /// Generic-weight simplicial refinements and their properties.
    Refinement,
    /// `PL(Σ)` inside `PL(Σ')` is cut out by two-element Type A collections.
    TypeADescription,
    /// Wall-functional convexity agrees with sampled subadditivity.
    ConvexityOracle,
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::Validation,
        TheoremId::PrimitiveStructure,
        TheoremId::EnumerationOracle,
        TheoremId::WallClasses,
        TheoremId::PrimitiveInMori,
        TheoremId::MainTheorem,
        TheoremId::ExtremalPrimitive,
        TheoremId::ReidConditions,
        TheoremId::Refinement,
        TheoremId::TypeADescription,
        TheoremId::ConvexityOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Validation => "validation",
            TheoremId::PrimitiveStructure => "primitive-structure",
            TheoremId::EnumerationOracle => "enumeration-oracle",
            TheoremId::WallClasses => "wall-classes",
            TheoremId::PrimitiveInMori => "primitive-in-mori",
            TheoremId::MainTheorem => "main-theorem",
            TheoremId::ExtremalPrimitive => "extremal-primitive",
            TheoremId::ReidConditions => "reid-conditions",
            TheoremId::Refinement => "refinement",
            TheoremId::TypeADescription => "type-a-description",
            TheoremId::ConvexityOracle => "convexity-oracle",
        }
    }

    pub fn parse(s: &str) -> Option<TheoremId> {
        TheoremId::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete object refuting a check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub description: String,
    pub data: Vec<QVector>,
}

impl Counterexample {
    fn new(description: impl Into<String>, data: Vec<QVector>) -> Self {
        Counterexample { description: description.into(), data }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// The statement checks out on a fan outside the proven hypotheses.
    Evidence,
    Fails(Counterexample),
    Inapplicable(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Evidence => "evidence",
            Verdict::Fails(_) => "fails",
            Verdict::Inapplicable(_) => "inapplicable",
        }
    }
}

/// Machine-checkable evidence for one step of a check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// `target = Σ λ_i g_i + Σ μ_j h_j` with every `λ_i ≥ 0`.
    Combination {
        label: String,
        target: QVector,
        nonneg: Vec<(Rational, QVector)>,
        free: Vec<(Rational, QVector)>,
    },
    /// `left = factor · right` with `factor > 0`.
    Proportional { label: String, left: QVector, right: QVector, factor: Rational },
    /// `⟨row, point⟩ ≥ 0` for every row (`> 0` when `strict`).
    Satisfies { label: String, point: QVector, rows: Vec<QVector>, strict: bool },
}

impl Certificate {
    pub fn label(&self) -> &str {
        match self {
            Certificate::Combination { label, .. }
            | Certificate::Proportional { label, .. }
            | Certificate::Satisfies { label, .. } => label,
        }
    }
}

/// Re-checks a certificate with plain rational arithmetic, independently of
/// the solvers that produced it.
pub fn verify_certificate(c: &Certificate) -> bool {
    let axpy = |acc: &mut Vec<Rational>, a: &Rational, v: &[Rational]| -> bool {
        if v.len() != acc.len() {
            return false;
        }
        acc.iter_mut().zip(v).for_each(|(x, y)| *x += a * y);
        true
    };
    match c {
        Certificate::Combination { target, nonneg, free, .. } => {
            let mut acc = vec![Rational::zero(); target.len()];
            nonneg.iter().all(|(l, g)| !l.is_negative() && axpy(&mut acc, l, g))
                && free.iter().all(|(m, h)| axpy(&mut acc, m, h))
                && acc == *target
        }
        Certificate::Proportional { left, right, factor, .. } => {
            let mut acc = vec![Rational::zero(); left.len()];
            factor.is_positive() && axpy(&mut acc, factor, right) && acc == *left
        }
        Certificate::Satisfies { point, rows, strict, .. } => rows.iter().all(|row| {
            let v: Rational = row.iter().zip(point).map(|(a, b)| a * b).sum();
            row.len() == point.len() && if *strict { v.is_positive() } else { !v.is_negative() }
        }),
    }
}

#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub theorem: TheoremId,
    pub fan: String,
    pub verdict: Verdict,
    pub certificates: Vec<Certificate>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl TheoremReport {
    fn new(theorem: TheoremId, fan: &str) -> Self {
        TheoremReport {
            theorem,
            fan: fan.to_string(),
            verdict: Verdict::Holds,
            certificates: Vec::new(),
            notes: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    /// `false` only for a failed check.
    pub fn passed(&self) -> bool {
        !matches!(self.verdict, Verdict::Fails(_))
    }

    /// Do all attached certificates re-verify?
    pub fn certificates_verify(&self) -> bool {
        self.certificates.iter().all(verify_certificate)
    }

    fn fail(mut self, cx: Counterexample) -> Self {
        self.verdict = Verdict::Fails(cx);
        self
    }

    fn inapplicable(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::Inapplicable(why.into());
        self
    }
}

fn timed(f: impl FnOnce() -> TheoremReport) -> TheoremReport {
    let start = Instant::now();
    let mut r = f();
    r.elapsed = start.elapsed();
    if r.passed() && !r.certificates_verify() {
        let bad = r.certificates.iter().find(|c| !verify_certificate(c)).map(|c| c.label().to_string());
        r.verdict = Verdict::Fails(Counterexample::new(
            format!("certificate '{}' does not verify", bad.unwrap_or_default()),
            Vec::new(),
        ));
    }
    r
}

/// Certificates that each row of `rows` is valid on `cone`, or the first
/// row that is not.
fn implication_certificates(
    label: &str,
    cone: &HCone,
    rows: &[QVector],
) -> Result<Vec<Certificate>, QVector> {
    rows.iter()
        .enumerate()
        .map(|(k, h)| {
            let d = cone.valid_inequality(h).ok_or_else(|| h.clone())?;
            Ok(Certificate::Combination {
                label: format!("{label} #{k}"),
                target: h.clone(),
                nonneg: d.inequality_multipliers.into_iter().zip(cone.inequalities.iter().cloned()).collect(),
                free: d.equality_multipliers.into_iter().zip(cone.equalities.iter().cloned()).collect(),
            })
        })
        .collect()
}

/// Certificates that every vector of `points` is in the cone spanned by
/// `gens`, or the first one that is not.
fn membership_certificates(label: &str, gens: &[QVector], points: &[QVector]) -> Result<Vec<Certificate>, QVector> {
    let dim = points.first().map_or(0, |p| p.len());
    let cone = VCone::new(gens.to_vec(), dim);
    points
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let coeffs = crate::exactla::cone_contains(&cone, x).ok_or_else(|| x.clone())?;
            Ok(Certificate::Combination {
                label: format!("{label} #{k}"),
                target: x.clone(),
                nonneg: coeffs.into_iter().zip(gens.iter().cloned()).collect(),
                free: Vec::new(),
            })
        })
        .collect()
}

/// Per-fan data shared by the checks.
#[derive(Clone, Debug)]
pub struct FanContext {
    pub name: String,
    pub fan: Arc<Fan>,
    pub basis: PLBasis,
    pub quasi_projectivity: QuasiProjectivity,
    pub mori: MoriCone,
    pub collections: Vec<PrimitiveCollection>,
    pub relations: Vec<PrimitiveRelation>,
    /// Classes of `relations`, aligned with `collections`.
    pub primitive_classes: Vec<QVector>,
    /// `None` when the Mori cone contains a line.
    pub extremal_walls: Option<Vec<usize>>,
}

impl FanContext {
    pub fn new(name: &str, fan: Arc<Fan>) -> FanContext {
        let basis = PLBasis::new(&fan);
        let quasi_projectivity = quasi_projectivity(&basis);
        let mori = MoriCone::new(&basis).expect("validated fans have nondegenerate walls");
        let collections = enumerate_primitive_collections(&fan);
        let relations: Vec<PrimitiveRelation> = collections.iter().map(|p| primitive_relation(&fan, p)).collect();
        let primitive_classes = relations.iter().map(|r| curve_class(&basis, &r.a_p)).collect();
        let extremal_walls = mori.extremal_walls().ok();
        FanContext {
            name: name.to_string(),
            fan,
            basis,
            quasi_projectivity,
            mori,
            collections,
            relations,
            primitive_classes,
            extremal_walls,
        }
    }

    pub fn is_quasi_projective(&self) -> bool {
        self.quasi_projectivity.is_quasi_projective()
    }
}

fn wall_cone(basis: &PLBasis) -> HCone {
    let fan = basis.fan();
    HCone::new(
        fan.interior_walls().iter().map(|w| wall_functional_row(fan, w)).collect(),
        basis.equalities().to_vec(),
        fan.num_rays(),
    )
}

/// The cone of convex functions equals the cone cut out by the primitive
/// inequalities, and dually the Mori cone is spanned by primitive classes.
/// Fans that are not quasi-projective get `Evidence` instead of `Holds`.
pub fn check_main_theorem(ctx: &FanContext) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::MainTheorem, &ctx.name);
        let (fan, basis) = (&ctx.fan, &ctx.basis);
        let walls = wall_cone(basis);
        let prim = primitive_inequality_cone(basis);
        let forward = implication_certificates("wall inequality implied by primitive ones", &prim, &walls.inequalities);
        let backward = implication_certificates("primitive inequality implied by wall ones", &walls, &prim.inequalities);
        let (forward, backward) = match (forward, backward) {
            (Ok(f), Ok(b)) => (f, b),
            (Err(h), _) => return rep.fail(Counterexample::new("wall inequality not implied by the primitive inequalities", vec![h])),
            (_, Err(h)) => return rep.fail(Counterexample::new("primitive inequality not valid on convex functions", vec![h])),
        };
        rep.certificates.extend(forward);
        rep.certificates.extend(backward);

        match (
            membership_certificates("wall class in primitive cone", &ctx.primitive_classes, &ctx.mori.classes),
            membership_certificates("primitive class in Mori cone", &ctx.mori.classes, &ctx.primitive_classes),
        ) {
            (Ok(a), Ok(b)) => {
                rep.certificates.extend(a);
                rep.certificates.extend(b);
            }
            (Err(x), _) | (_, Err(x)) => {
                return rep.fail(Counterexample::new("Mori cone differs from the cone of primitive classes", vec![x]))
            }
        }
        rep.notes.push(format!("dim PL = {}, dim Pic = {}", basis.dim_pl(), basis.dim_pic()));
        if !fan.is_simplicial() {
            for (p, ok) in single_inequality_sufficiency(basis) {
                rep.notes.push(format!("inequality of {p} alone suffices: {}", if ok { "yes" } else { "no" }));
            }
        }
        if !ctx.is_quasi_projective() {
            rep.notes.push("fan is not quasi-projective; equality recorded as evidence".into());
            rep.verdict = Verdict::Evidence;
        }
        rep
    })
}

/// For every extremal wall of a quasi-projective fan, the rays with positive
/// coefficient in its relation form a primitive collection whose relation
/// is a positive multiple of the wall relation. On non-simplicial fans the
/// comparison is made between classes.
pub fn check_extremal_primitive(ctx: &FanContext) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::ExtremalPrimitive, &ctx.name);
        if !ctx.is_quasi_projective() {
            return rep.inapplicable("fan is not quasi-projective");
        }
        let (fan, mori) = (&ctx.fan, &ctx.mori);
        let extremal = ctx.extremal_walls.as_ref().expect("quasi-projective fans have pointed Mori cones");
        for &w in extremal {
            let wall = &fan.interior_walls()[w];
            let a_tau = &mori.relations[w];
            if fan.is_simplicial() {
                let pos = a_tau.positive_support();
                let Some(k) = ctx.collections.iter().position(|p| p.rays == pos) else {
                    return rep.fail(Counterexample::new(
                        format!("positive support {pos} of extremal wall {} is not primitive", wall.rays),
                        vec![a_tau.0.clone()],
                    ));
                };
                let p = &ctx.collections[k];
                let a_p = ctx.relations[k].a_p.clone();
                match proportionality(&a_tau.0, &a_p.0).filter(|f| f.is_positive()) {
                    Some(factor) => rep.certificates.push(Certificate::Proportional {
                        label: format!("wall {} relation against {p}", wall.rays),
                        left: a_tau.0.clone(),
                        right: a_p.0.clone(),
                        factor,
                    }),
                    None => {
                        return rep.fail(Counterexample::new(
                            format!("relation of {p} is not a positive multiple of wall {}", wall.rays),
                            vec![a_tau.0.clone(), a_p.0],
                        ))
                    }
                }
            } else {
                let class = &mori.classes[w];
                let found = ctx.collections.iter().zip(&ctx.primitive_classes).find_map(|(p, c)| {
                    proportionality(class, c).filter(|f| f.is_positive()).map(|f| (p, c.clone(), f))
                });
                match found {
                    Some((p, c, factor)) => rep.certificates.push(Certificate::Proportional {
                        label: format!("wall {} class against {p}", wall.rays),
                        left: class.clone(),
                        right: c,
                        factor,
                    }),
                    None => {
                        return rep.fail(Counterexample::new(
                            format!("class of extremal wall {} is not a primitive class", wall.rays),
                            vec![class.clone()],
                        ))
                    }
                }
            }
        }
        rep.notes.push(format!("{} extremal walls", extremal.len()));
        if !fan.is_simplicial() {
            rep.notes.push("non-simplicial fan: compared as curve classes".into());
        }
        rep
    })
}

/// Splits `cells` (each a list of inequality rows of a full-dimensional
/// cone) by the hyperplane `h`, keeping full-dimensional pieces.
fn split_cells(cells: Vec<Vec<QVector>>, h: &QVector, dim: usize) -> Vec<Vec<QVector>> {
    let mut out = Vec::new();
    for cell in cells {
        for side in [h.clone(), crate::exactla::linalg::neg(h)] {
            let mut rows = cell.clone();
            rows.push(side);
            if strict_feasible(&rows, &[], &[], dim).witness().is_some() {
                out.push(rows);
            }
        }
    }
    out
}

/// Exact union test: is the cone spanned by `gens` covered by `pieces`
/// (each contained in it)? Refines the cone by every facet hyperplane of
/// every piece and tests an interior point of each chamber. Returns the
/// chamber witnesses with the piece containing each, or an uncovered point.
fn union_covers(gens: &[QVector], pieces: &[HCone], dim: usize) -> Result<Vec<(QVector, usize)>, QVector> {
    let hull = v_to_h(&VCone::new(gens.to_vec(), dim)).expect("small dimension");
    assert!(hull.equalities.is_empty(), "the cone is full-dimensional");
    let mut cells = vec![hull.inequalities.clone()];
    for piece in pieces {
        for h in &piece.inequalities {
            cells = split_cells(cells, h, dim);
        }
    }
    let mut witnesses = Vec::new();
    for cell in cells {
        let x = match strict_feasible(&cell, &[], &[], dim) {
            StrictFeasibility::Feasible(x) => x,
            StrictFeasibility::Infeasible(_) => unreachable!("kept cells are full-dimensional"),
        };
        match pieces.iter().position(|p| p.contains(&x)) {
            Some(k) => witnesses.push((x, k)),
            None => return Err(x),
        }
    }
    Ok(witnesses)
}

/// At an extremal wall `τ` of a simplicial quasi-projective fan with relation
/// `Σ a_i ρ_i = 0`, each `Δ_i = Cone(ρ_j : j ≠ i)` with `a_i > 0` is a
/// maximal cone, and these cones cover `Cone(ρ_1, …, ρ_{n+1})`.
pub fn check_reid_conditions(ctx: &FanContext, wall_index: usize) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::ReidConditions, &ctx.name);
        let fan = &ctx.fan;
        if !fan.is_simplicial() {
            return rep.inapplicable("fan is not simplicial");
        }
        if !ctx.is_quasi_projective() {
            return rep.inapplicable("fan is not quasi-projective");
        }
        let wall = &fan.interior_walls()[wall_index];
        if !ctx.extremal_walls.as_ref().is_some_and(|e| e.contains(&wall_index)) {
            return rep.inapplicable(format!("wall {} is not extremal", wall.rays));
        }
        let a = &ctx.mori.relations[wall_index];
        let all = fan.max_cones()[wall.left].ray_indices.union(&fan.max_cones()[wall.right].ray_indices);
        let mut pieces = Vec::new();
        for i in all.iter().filter(|&i| a.0[i].is_positive()) {
            let delta = all.without(i);
            match fan.max_cones().iter().position(|c| c.ray_indices == delta) {
                Some(c) => {
                    rep.notes.push(format!("Delta_{i} = {delta} is maximal cone {c}"));
                    pieces.push(fan.max_cones()[c].facets.clone());
                }
                None => {
                    return rep.fail(Counterexample::new(
                        format!("Delta_{i} = {delta} is not a maximal cone"),
                        vec![a.0.clone()],
                    ))
                }
            }
        }
        let gens: Vec<QVector> = all.iter().map(|i| fan.ray(i).clone()).collect();
        match union_covers(&gens, &pieces, fan.dim()) {
            Ok(chambers) => {
                rep.notes.push(format!("{} chambers checked", chambers.len()));
                for (x, k) in chambers {
                    rep.certificates.push(Certificate::Satisfies {
                        label: format!("chamber point in Delta piece {k}"),
                        point: x,
                        rows: pieces[k].inequalities.clone(),
                        strict: false,
                    });
                }
            }
            Err(x) => {
                return rep.fail(Counterexample::new(
                    format!("point of Cone{all} outside every Delta"),
                    vec![x],
                ))
            }
        }
        rep
    })
}

/// Subspace of `PL(Σ')` (ray-value coordinates) cut out by
/// `φ(ρ1 + ρ2) = φ(ρ1) + φ(ρ2)` over two-element Type A primitive
/// collections, returned as a basis together with the pairs used.
pub fn type_a_subspace(r: &Refinement) -> (Vec<QVector>, Vec<RaySet>) {
    let fine = &r.fine;
    let n = fine.num_rays();
    let mut rows: Vec<QVector> = PLBasis::new(fine).equalities().to_vec();
    let mut pairs = Vec::new();
    for p in enumerate_primitive_collections(fine) {
        if p.len() != 2 || !r.coarse.contained_in_single_cone(&p.rays) {
            continue;
        }
        let [a, b] = [p.rays.as_slice()[0], p.rays.as_slice()[1]];
        let sum = add(fine.ray(a), fine.ray(b));
        let eval = value_row(fine, &sum).expect("sums of rays lie in a convex support");
        let mut row = add(&unit(n, a), &unit(n, b));
        row = crate::exactla::linalg::sub(&row, &eval);
        rows.push(row);
        pairs.push(p.rays);
    }
    let basis = if rows.is_empty() {
        (0..n).map(|i| unit(n, i)).collect()
    } else {
        kernel_basis(&rows, n)
    };
    (basis, pairs)
}

/// Coefficients of `v` over `basis`, if `v` is in their span.
fn coordinates(v: &[Rational], basis: &[QVector]) -> Option<QVector> {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero()).then(Vec::new);
    }
    let cols: Vec<QVector> = (0..v.len()).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
    solve(&cols, basis.len(), v)
}

/// `PL(Σ)` equals the subspace of `PL(Σ')` cut out by the two-element Type A
/// collections; certified by expressing each basis in terms of the other.
pub fn check_type_a_description(name: &str, r: &Refinement) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::TypeADescription, name);
        let (a_basis, pairs) = type_a_subspace(r);
        let coarse_basis = PLBasis::new(&r.coarse).basis().to_vec();
        for (from, to, label) in [
            (&coarse_basis, &a_basis, "coarse function in Type A subspace"),
            (&a_basis, &coarse_basis, "Type A subspace vector is coarse"),
        ] {
            for v in from {
                match coordinates(v, to) {
                    Some(c) => rep.certificates.push(Certificate::Combination {
                        label: label.to_string(),
                        target: v.clone(),
                        nonneg: Vec::new(),
                        free: c.into_iter().zip(to.iter().cloned()).collect(),
                    }),
                    None => return rep.fail(Counterexample::new(label.to_string() + " fails", vec![v.clone()])),
                }
            }
        }
        let fine_dim = PLBasis::new(&r.fine).dim_pl();
        rep.notes.push(format!(
            "{} Type A pairs; dim PL = {} inside dim {}",
            pairs.len(),
            a_basis.len(),
            fine_dim
        ));
        rep
    })
}

/// Checks the simplicial refinement (empty `P` and the first primitive
/// collection as `P`) and, for quasi-projective fans, the variant that stays
/// quasi-projective.
pub fn check_refinement(ctx: &FanContext, seed: u64) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::Refinement, &ctx.name);
        let (coarse, collections) = (&ctx.fan, &ctx.collections);
        let mut runs = vec![(RaySet::empty(), simplicial_refinement(coarse, &RaySet::empty(), seed))];
        if let Some(p) = collections.first() {
            runs.push((p.rays.clone(), supported_refinement(coarse, p, seed)));
        }
        for (p, outcome) in runs {
            let r = match outcome {
                Ok(r) => r,
                Err(e) => return rep.fail(Counterexample::new(format!("refinement respecting {p} failed: {e}"), Vec::new())),
            };
            let problems = refinement_problems(&r);
            if let Some(msg) = problems {
                return rep.fail(Counterexample::new(format!("refinement respecting {p}: {msg}"), Vec::new()));
            }
            if !p.is_empty() && !enumerate_primitive_collections(&r.fine).iter().any(|q| q.rays == p) {
                return rep.fail(Counterexample::new(format!("{p} is not primitive on the refinement"), Vec::new()));
            }
            rep.notes.push(format!(
                "respecting {p}: {} fine cones, {} weight draws",
                r.fine.max_cones().len(),
                r.weights.attempts
            ));
        }
        if let QuasiProjectivity::Yes(phi) = &ctx.quasi_projectivity {
            let p = collections.first().map(|p| p.rays.clone()).unwrap_or_else(RaySet::empty);
            match qp_refinement(coarse, &p, phi, seed) {
                Ok(qp) => {
                    if let Some(msg) = refinement_problems(&qp.refinement) {
                        return rep.fail(Counterexample::new(format!("quasi-projective variant: {msg}"), Vec::new()));
                    }
                    if !strictly_convex_relative(&qp.refinement, &qp.relative) {
                        return rep.fail(Counterexample::new(
                            "rescaled function not strictly convex inside coarse cones",
                            vec![qp.relative.ray_values()],
                        ));
                    }
                    if !crate::plfun::is_quasi_projective(&qp.refinement.fine) {
                        return rep.fail(Counterexample::new("quasi-projective variant is not quasi-projective", Vec::new()));
                    }
                    let fine = &qp.refinement.fine;
                    rep.certificates.push(Certificate::Satisfies {
                        label: "strictly convex function on the refinement".into(),
                        point: qp.witness.ray_values(),
                        rows: fine.interior_walls().iter().map(|w| wall_functional_row(fine, w)).collect(),
                        strict: true,
                    });
                    rep.notes.push(format!("quasi-projective variant with epsilon {}", qp.epsilon));
                }
                Err(e) => return rep.fail(Counterexample::new(format!("quasi-projective variant failed: {e}"), Vec::new())),
            }
        } else {
            rep.notes.push("fan is not quasi-projective; skipped the quasi-projective variant".into());
        }
        rep
    })
}

fn refinement_problems(r: &Refinement) -> Option<String> {
    if !r.fine.is_simplicial() {
        return Some("refinement is not simplicial".into());
    }
    if r.fine.rays() != r.coarse.rays() {
        return Some("rays changed".into());
    }
    if crate::plfun::refinement_map(&r.fine, &r.coarse).is_err() {
        return Some("a fine cone leaves every coarse cone".into());
    }
    if !property_a_holds(r) {
        return Some("property A fails".into());
    }
    if !property_b(r) {
        return Some("property B fails".into());
    }
    if !volumes_match(r) {
        return Some("fine cones do not cover the coarse cones".into());
    }
    match adjacent_unions_convex(r) {
        Ok(true) => None,
        Ok(false) => Some("union of adjacent fine cones is not convex".into()),
        Err(e) => Some(e.to_string()),
    }
}

/// Size and rank bounds on primitive collections, coefficient bounds on
/// their relations, the pairing identity for random functions, and
/// independence of the class from the choice of `S`.
pub fn check_primitive_structure(ctx: &FanContext, seed: u64) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::PrimitiveStructure, &ctx.name);
        let (fan, basis) = (&ctx.fan, &ctx.basis);
        let n = fan.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let functions: Vec<PLFunction> = (0..20).map(|_| random_function(basis, &mut rng)).collect();
        for (p, rel) in ctx.collections.iter().zip(&ctx.relations) {
            let vecs = |s: &RaySet| s.iter().map(|i| fan.ray(i).clone()).collect::<Vec<_>>();
            if p.len() < 2 || p.len() > n + 1 {
                return rep.fail(Counterexample::new(format!("{p} has {} elements", p.len()), vecs(&p.rays)));
            }
            if fan.contained_in_single_cone(&p.rays)
                || p.rays.iter().any(|i| !fan.contained_in_single_cone(&p.rays.without(i)))
            {
                return rep.fail(Counterexample::new(format!("{p} is not primitive"), vecs(&p.rays)));
            }
            if let Some(i) = p.rays.iter().find(|&i| rank_of(&vecs(&p.rays.without(i))) != p.len() - 1) {
                return rep.fail(Counterexample::new(format!("{p} without {i} is dependent"), vecs(&p.rays)));
            }
            for (i, b) in rel.support.iter().zip(&rel.b) {
                if !b.is_positive() || (p.rays.contains(i) && *b >= Rational::one()) {
                    return rep.fail(Counterexample::new(format!("coefficient {b} on ray {i} for {p}"), vec![rel.a_p.0.clone()]));
                }
            }
            let positive: RaySet = rel.a_p.0.iter().enumerate().filter(|(_, x)| x.is_positive()).map(|(i, _)| i).collect();
            if positive != p.rays {
                return rep.fail(Counterexample::new(format!("positive entries of a_P differ from {p}"), vec![rel.a_p.0.clone()]));
            }
            let sum = p.rays.iter().fold(zeros(n), |acc, i| add(&acc, fan.ray(i)));
            rep.certificates.push(Certificate::Combination {
                label: format!("relation {}", rel.equation()),
                target: sum.clone(),
                nonneg: rel.b.iter().cloned().zip(rel.support.iter().map(|i| fan.ray(i).clone())).collect(),
                free: Vec::new(),
            });
            for f in &functions {
                let lhs = rel.a_p.pair(&f.ray_values());
                let rhs = p.rays.iter().map(|i| f.ray_value(i)).sum::<Rational>() - f.evaluate(&sum).expect("in support");
                if lhs != rhs {
                    return rep.fail(Counterexample::new(format!("pairing identity fails for {p}"), vec![f.ray_values()]));
                }
            }
            let class = curve_class(basis, &rel.a_p);
            for other in all_primitive_relations(fan, p) {
                if curve_class(basis, &other.a_p) != class {
                    return rep.fail(Counterexample::new(
                        format!("choice of S changes the class of {p}"),
                        vec![class, curve_class(basis, &other.a_p)],
                    ));
                }
            }
        }
        rep.notes.push(format!("{} primitive collections", ctx.collections.len()));
        rep
    })
}

/// Enumeration agrees with brute force; on simplicial fans it also agrees
/// with the "does not generate a cone" definition.
pub fn check_enumeration_oracle(ctx: &FanContext) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::EnumerationOracle, &ctx.name);
        let fan = &ctx.fan;
        if fan.num_rays() > NAIVE_RAY_LIMIT {
            return rep.inapplicable(format!("more than {NAIVE_RAY_LIMIT} rays"));
        }
        let fast = &ctx.collections;
        let naive = primitive_collections_naive(fan);
        let as_vec = |ps: &[PrimitiveCollection]| {
            ps.iter().map(|p| p.rays.iter().map(|i| int(i as i64)).collect()).collect::<Vec<QVector>>()
        };
        if *fast != naive {
            return rep.fail(Counterexample::new("enumeration differs from brute force", as_vec(fast)));
        }
        if fan.is_simplicial() {
            let batyrev = batyrev_primitive_collections(fan);
            if batyrev != fast.iter().map(|p| p.rays.clone()).collect::<Vec<_>>() {
                return rep.fail(Counterexample::new("definitions disagree on a simplicial fan", as_vec(fast)));
            }
        }
        rep.notes.push(format!("{} collections agree", fast.len()));
        rep
    })
}

/// Every admissible choice of rays at a wall gives a positive multiple of
/// the same class, and every relation is a true linear relation.
pub fn check_wall_classes(ctx: &FanContext) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::WallClasses, &ctx.name);
        let (fan, basis) = (&ctx.fan, &ctx.basis);
        for wall in fan.interior_walls() {
            let base = wall_relation(fan, wall).expect("validated fans have nondegenerate walls");
            if !base.holds(fan) {
                return rep.fail(Counterexample::new(format!("relation at {} is not a relation", wall.rays), vec![base.0]));
            }
            let class = curve_class(basis, &base);
            for other in admissible_wall_relations(fan, wall) {
                let c = curve_class(basis, &other);
                match proportionality(&c, &class).filter(|f| f.is_positive()) {
                    Some(factor) => rep.certificates.push(Certificate::Proportional {
                        label: format!("wall {} choice {}", wall.rays, other),
                        left: c,
                        right: class.clone(),
                        factor,
                    }),
                    None => {
                        return rep.fail(Counterexample::new(
                            format!("wall {} classes are not proportional", wall.rays),
                            vec![c, class],
                        ))
                    }
                }
            }
        }
        rep.notes.push(format!("{} interior walls", fan.interior_walls().len()));
        rep
    })
}

/// Every primitive class lies in the cone spanned by the wall classes.
pub fn check_primitive_in_mori(ctx: &FanContext) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::PrimitiveInMori, &ctx.name);
        match membership_certificates("primitive class in Mori cone", &ctx.mori.classes, &ctx.primitive_classes) {
            Ok(c) => rep.certificates.extend(c),
            Err(x) => return rep.fail(Counterexample::new("primitive class outside the Mori cone", vec![x])),
        }
        rep
    })
}

/// A random element of `PL(Σ)`: integer combination of the basis with
/// coefficients in `-3..=3`.
pub fn random_function(basis: &PLBasis, rng: &mut ChaCha8Rng) -> PLFunction {
    let r = basis.fan().num_rays();
    let mut v = zeros(r);
    for b in basis.basis() {
        let c: i64 = rng.gen_range(-3..=3);
        v = add(&v, &scale(&int(c), b));
    }
    PLFunction::from_values_checked(basis.fan(), &v).expect("combinations of basis vectors lie in PL")
}

/// A random point of the support: a nonnegative rational combination of the
/// rays of a random maximal cone.
pub fn random_support_point(fan: &Fan, rng: &mut ChaCha8Rng) -> QVector {
    let c = &fan.max_cones()[rng.gen_range(0..fan.max_cones().len())];
    let mut x = zeros(fan.dim());
    for i in c.ray_indices.iter() {
        let coeff = Rational::new(rng.gen_range(0..=4).into(), rng.gen_range(1..=5).into());
        x = add(&x, &scale(&coeff, fan.ray(i)));
    }
    x
}

/// Pairs `(u, w)` straddling each interior wall with `u + w` still next to
/// the wall, so `φ(u) + φ(w) − φ(u + w)` has the sign of the wall functional.
pub fn wall_probe_pairs(fan: &Fan) -> Vec<(QVector, QVector)> {
    let mut out = Vec::new();
    for wall in fan.interior_walls() {
        let center = wall.rays.iter().fold(zeros(fan.dim()), |acc, i| add(&acc, fan.ray(i)));
        let off = |c: usize| {
            fan.max_cones()[c]
                .ray_indices
                .difference(&wall.rays)
                .iter()
                .fold(zeros(fan.dim()), |acc, i| add(&acc, fan.ray(i)))
        };
        let (vl, vr) = (off(wall.left), off(wall.right));
        let mut eps = Rational::one();
        loop {
            let u = add(&center, &scale(&eps, &vl));
            let w = add(&center, &scale(&eps, &vr));
            let s = add(&u, &w);
            let cones = &fan.max_cones();
            if cones[wall.left].contains(&s) || cones[wall.right].contains(&s) {
                out.push((u, w));
                break;
            }
            eps /= int(2);
        }
    }
    out
}

/// Convexity via wall functionals agrees with `φ(u) + φ(v) ≥ φ(u + v)` over
/// all pairs of ray generators and random support points, plus wall probes.
pub fn check_convexity_oracle(ctx: &FanContext, seed: u64) -> TheoremReport {
    timed(|| {
        let mut rep = TheoremReport::new(TheoremId::ConvexityOracle, &ctx.name);
        let (fan, basis) = (&ctx.fan, &ctx.basis);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut functions = vec![PLFunction::zero(fan)];
        if let QuasiProjectivity::Yes(phi) = &ctx.quasi_projectivity {
            let linear = PLFunction::linear(fan, (0..fan.dim()).map(|_| int(rng.gen_range(-3..=3))).collect());
            functions.push(phi.add(&linear));
            functions.push(phi.scale(&int(2)).add(&random_function(basis, &mut rng).scale(&Rational::new(1.into(), 1000.into()))));
        }
        for _ in 0..6 {
            functions.push(random_function(basis, &mut rng));
        }
        let mut points: Vec<QVector> = fan.ray_vectors().to_vec();
        points.extend((0..CONVEXITY_SAMPLES).map(|_| random_support_point(fan, &mut rng)));
        let probes = wall_probe_pairs(fan);
        let wall_rows: Vec<QVector> = fan.interior_walls().iter().map(|w| wall_functional_row(fan, w)).collect();
        // Every evaluation point is located once; functions then reduce to dot products.
        let locate = |x: QVector| {
            let c = fan.max_cone_containing(&x).expect("sample points lie in the support");
            (c, x)
        };
        let singles: Vec<(usize, QVector)> = points.iter().cloned().map(locate).collect();
        let mut triples: Vec<[(usize, QVector); 3]> = Vec::new();
        for i in 0..points.len() {
            for j in i..points.len() {
                triples.push([singles[i].clone(), singles[j].clone(), locate(add(&points[i], &points[j]))]);
            }
        }
        for (u, w) in &probes {
            triples.push([locate(u.clone()), locate(w.clone()), locate(add(u, w))]);
        }
        let mut convex_count = 0;
        for f in &functions {
            let m = f.cone_functionals();
            let eval = |(c, x): &(usize, QVector)| dot(&m[*c], x);
            let sampled = triples.iter().all(|[u, w, s]| eval(u) + eval(w) >= eval(s));
            let by_walls = f.is_convex();
            if by_walls != sampled {
                return rep.fail(Counterexample::new(
                    format!("wall test says {by_walls}, sampling says {sampled}"),
                    vec![f.ray_values()],
                ));
            }
            if by_walls {
                convex_count += 1;
                rep.certificates.push(Certificate::Satisfies {
                    label: "convex function satisfies every wall inequality".into(),
                    point: f.ray_values(),
                    rows: wall_rows.clone(),
                    strict: false,
                });
            }
        }
        rep.notes.push(format!(
            "{} functions ({convex_count} convex), {} points, {} wall probes",
            functions.len(),
            points.len(),
            probes.len()
        ));
        rep
    })
}

/// Reports for one theorem on one fan. Reid conditions yield one report per
/// extremal wall.
pub fn check_theorem(ctx: &FanContext, theorem: TheoremId, seed: u64) -> Vec<TheoremReport> {
    let name = ctx.name.as_str();
    let fan = &ctx.fan;
    match theorem {
        TheoremId::Validation => {
            let mut rep = TheoremReport::new(TheoremId::Validation, name);
            rep.notes.push(format!(
                "{} rays, {} maximal cones, {} interior walls",
                fan.num_rays(),
                fan.max_cones().len(),
                fan.interior_walls().len()
            ));
            vec![rep]
        }
        TheoremId::PrimitiveStructure => vec![check_primitive_structure(ctx, seed)],
        TheoremId::EnumerationOracle => vec![check_enumeration_oracle(ctx)],
        TheoremId::WallClasses => vec![check_wall_classes(ctx)],
        TheoremId::PrimitiveInMori => vec![check_primitive_in_mori(ctx)],
        TheoremId::MainTheorem => vec![check_main_theorem(ctx)],
        TheoremId::ExtremalPrimitive => vec![check_extremal_primitive(ctx)],
        TheoremId::ReidConditions => match &ctx.extremal_walls {
            Some(walls) if fan.is_simplicial() && ctx.is_quasi_projective() => {
                walls.iter().map(|&w| check_reid_conditions(ctx, w)).collect()
            }
            _ => {
                let why = if ctx.is_quasi_projective() { "fan is not simplicial" } else { "fan is not quasi-projective" };
                vec![TheoremReport::new(TheoremId::ReidConditions, name).inapplicable(why)]
            }
        },
        TheoremId::Refinement => vec![check_refinement(ctx, seed)],
        TheoremId::TypeADescription => match simplicial_refinement(fan, &RaySet::empty(), seed) {
            Ok(r) => vec![check_type_a_description(name, &r)],
            Err(e) => vec![TheoremReport::new(TheoremId::TypeADescription, name)
                .fail(Counterexample::new(format!("refinement failed: {e}"), Vec::new()))],
        },
        TheoremId::ConvexityOracle => vec![check_convexity_oracle(ctx, seed)],
    }
}

/// All checks for one fan, in a fixed order. `only` restricts to a single
/// theorem.
pub fn check_fan(name: &str, fan: &Arc<Fan>, seed: u64, only: Option<TheoremId>) -> Vec<TheoremReport> {
    debug!("checking {name}");
    let ctx = FanContext::new(name, fan.clone());
    let theorems: Vec<TheoremId> = match only {
        Some(t) => vec![t],
        None => TheoremId::ALL.into_iter().filter(|&t| t != TheoremId::Validation).collect(),
    };
    theorems.into_iter().flat_map(|t| check_theorem(&ctx, t, seed)).collect()
}

/// Settings for [`run_default_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub random_fans: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 7, random_fans: 25 }
    }
}

/// Runs every check (or just `only`) on each entry. Entries that fail validation produce a
/// single failing validation report. Fans are processed in parallel; the
/// output order follows the input.
pub fn run_suite(
    entries: Vec<(String, Result<Fan, FanError>)>,
    seed: u64,
    only: Option<TheoremId>,
) -> Vec<TheoremReport> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Vec<TheoremReport>>>> = Mutex::new(vec![None; entries.len()]);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(entries.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some((name, entry)) = entries.get(k) else { break };
                let reports = match entry {
                    Ok(fan) => check_fan(name, &Arc::new(fan.clone()), seed, only),
                    Err(e) => vec![TheoremReport::new(TheoremId::Validation, name)
                        .fail(Counterexample::new(format!("invalid fan: {e}"), Vec::new()))],
                };
                results.lock().expect("no worker panics while holding the lock")[k] = Some(reports);
            });
        }
    });
    results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .flat_map(|r| r.expect("every entry processed"))
        .collect()
}

/// The built-in corpus plus `config.random_fans` seeded random fans.
pub fn suite_entries(config: &SuiteConfig) -> Vec<(String, Result<Fan, FanError>)> {
    corpus::builtin_corpus()
        .into_iter()
        .chain(corpus::random_corpus(config.seed, config.random_fans))
        .map(|(name, f)| (name, Ok(f)))
        .collect()
}

pub fn run_default_suite(config: &SuiteConfig) -> Vec<TheoremReport> {
    run_suite(suite_entries(config), config.seed, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::scalar::qvec;

    fn arc(f: Fan) -> Arc<Fan> {
        Arc::new(f)
    }

    fn ctx(name: &str, f: Fan) -> FanContext {
        FanContext::new(name, arc(f))
    }

    #[test]
    fn checker_rejects_tampering() {
        let good = Certificate::Combination {
            label: "x".into(),
            target: qvec(&[2, 1]),
            nonneg: vec![(int(1), qvec(&[1, 0])), (int(1), qvec(&[1, 1]))],
            free: Vec::new(),
        };
        assert!(verify_certificate(&good));
        let Certificate::Combination { label, target, mut nonneg, free } = good else { unreachable!() };
        nonneg[0].0 = int(-1);
        assert!(!verify_certificate(&Certificate::Combination { label, target, nonneg, free }));
        assert!(!verify_certificate(&Certificate::Proportional {
            label: "p".into(),
            left: qvec(&[2, 2]),
            right: qvec(&[1, 1]),
            factor: int(-2),
        }));
    }

    #[test]
    fn main_theorem_on_builtins() {
        assert_eq!(check_main_theorem(&ctx("ex21", corpus::ex21())).verdict, Verdict::Holds);
        let r = check_main_theorem(&ctx("ex31", corpus::ex31()));
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.notes.iter().filter(|n| n.ends_with("suffices: yes")).count() == 2);
        assert_eq!(check_main_theorem(&ctx("fulton", corpus::fulton())).verdict, Verdict::Evidence);
    }

    #[test]
    fn reid_conditions_on_ex21() {
        let c = ctx("ex21", corpus::ex21());
        let f = &c.fan;
        let w24 = f.interior_walls().iter().position(|w| w.rays == RaySet::new([2, 4])).unwrap();
        let r = check_reid_conditions(&c, w24);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.notes.contains(&"Delta_1 = {2,3,4} is maximal cone 5".to_string()));
        assert!(r.notes.contains(&"Delta_3 = {1,2,4} is maximal cone 4".to_string()));
        let w02 = f.interior_walls().iter().position(|w| w.rays == RaySet::new([0, 2])).unwrap();
        assert!(matches!(check_reid_conditions(&c, w02).verdict, Verdict::Inapplicable(_)));
    }

    #[test]
    fn type_a_description_of_ex31() {
        let coarse = arc(corpus::ex31());
        let r = simplicial_refinement(&coarse, &RaySet::new([2, 4]), 1).unwrap();
        let (basis, pairs) = type_a_subspace(&r);
        assert_eq!(pairs, vec![RaySet::new([1, 3])]);
        assert_eq!(basis.len(), 4);
        assert_eq!(check_type_a_description("ex31", &r).verdict, Verdict::Holds);
    }

    #[test]
    fn corrupted_entry_surfaces() {
        let bad = Fan::new(2, vec![vec![1, 0], vec![0, 1], vec![-1, 0]], vec![vec![0, 1], vec![0, 2]]);
        let reports = run_suite(vec![("bad".into(), bad)], 0, None);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].theorem, TheoremId::Validation);
        assert!(!reports[0].passed());
        assert!(run_suite(Vec::new(), 0, None).is_empty());
    }

    #[test]
    fn all_checks_pass_on_ex31() {
        for r in check_fan("ex31", &arc(corpus::ex31()), 5, None) {
            assert!(r.passed(), "{} failed: {:?}", r.theorem, r.verdict);
        }
    }
}
