//! Piecewise-linear functions on a fan.
//!
//! A function is stored as one linear functional `m_σ` per maximal cone.
//! The space `PL(Σ)` is also handled in ray-value coordinates: a vector
//! `a ∈ Q^{Σ(1)}` belongs to `PL(Σ)` iff, on every maximal cone, the values
//! `a_ρ` respect all linear relations among that cone's rays.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::exactla::linalg::{dot, independent_subset, kernel_basis, rank_of, solve, sub, zeros};
use crate::exactla::scalar::Rational;
use crate::exactla::{strict_feasible, InfeasibilityCertificate, QVector, StrictFeasibility};
use crate::fan::{Fan, FanError, RaySet, Wall};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlError {
    #[error("ray values determine a function only on simplicial fans")]
    NonSimplicialFan,
    #[error("expected {expected} entries, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("cone functionals disagree across wall {wall}")]
    WallIncompatible { wall: RaySet },
    #[error("cone functionals disagree at ray {ray}")]
    InconsistentAtRay { ray: usize },
    #[error("ray values are not linear on maximal cone {cone}")]
    InconsistentRayValues { cone: usize },
    #[error("fine cone {fine_cone} is not contained in any cone of the coarse fan")]
    NotARefinement { fine_cone: usize },
    #[error("the two fans do not have the same rays")]
    RaysDiffer,
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// A piecewise-linear function, linear on each maximal cone.
#[derive(Clone, Debug)]
pub struct PLFunction {
    fan: Arc<Fan>,
    m: Vec<QVector>,
}

impl PartialEq for PLFunction {
    fn eq(&self, other: &Self) -> bool {
        *self.fan == *other.fan && self.m == other.m
    }
}

/// Coefficients expressing `v` in the lex-first basis of rays of cone `c`,
/// spread over all ray indices. Dotting the result with ray values gives
/// `⟨m_c, v⟩`.
fn evaluation_row(fan: &Fan, c: usize, v: &[Rational]) -> QVector {
    let rays: Vec<usize> = fan.max_cones()[c].ray_indices.iter().collect();
    let vecs: Vec<QVector> = rays.iter().map(|&i| fan.ray(i).clone()).collect();
    let basis: Vec<usize> = independent_subset(&vecs).into_iter().map(|k| rays[k]).collect();
    let n = fan.dim();
    // Solve Σ y_b ρ_b = v.
    let cols: Vec<QVector> = (0..n)
        .map(|row| basis.iter().map(|&b| fan.ray(b)[row].clone()).collect())
        .collect();
    let y = solve(&cols, basis.len(), v).expect("maximal cone rays span the ambient space");
    let mut out = zeros(fan.num_rays());
    for (k, &b) in basis.iter().enumerate() {
        out[b] = y[k].clone();
    }
    out
}

/// Functional solving `⟨m, ρ_b⟩ = a_b` over the lex-first basis of cone `c`.
fn functional_from_values(fan: &Fan, c: usize, values: &[Rational]) -> QVector {
    let rays: Vec<usize> = fan.max_cones()[c].ray_indices.iter().collect();
    let vecs: Vec<QVector> = rays.iter().map(|&i| fan.ray(i).clone()).collect();
    let basis: Vec<usize> = independent_subset(&vecs).into_iter().map(|k| rays[k]).collect();
    let rows: Vec<QVector> = basis.iter().map(|&b| fan.ray(b).clone()).collect();
    let rhs: QVector = basis.iter().map(|&b| values[b].clone()).collect();
    solve(&rows, fan.dim(), &rhs).expect("independent rays give a solvable system")
}

/// Row `r` over ray indices with `φ(x) = ⟨r, φ's ray values⟩` for every
/// `φ ∈ PL(Σ)`, using the first maximal cone containing `x`.
pub fn value_row(fan: &Fan, x: &[Rational]) -> Result<QVector, FanError> {
    let c = fan.max_cone_containing(x).ok_or(FanError::OutsideSupport)?;
    Ok(evaluation_row(fan, c, x))
}

/// The linear functional `a ↦ l_τ(a) = ⟨m_left − m_right, v⟩` on ray-value
/// coordinates, with `v` the sum of the left cone's rays off the wall.
pub fn wall_functional_row(fan: &Fan, wall: &Wall) -> QVector {
    let v = wall_probe(fan, wall);
    sub(&evaluation_row(fan, wall.left, &v), &evaluation_row(fan, wall.right, &v))
}

fn wall_probe(fan: &Fan, wall: &Wall) -> QVector {
    let off = fan.max_cones()[wall.left].ray_indices.difference(&wall.rays);
    let mut v = zeros(fan.dim());
    for i in off.iter() {
        v = crate::exactla::linalg::add(&v, fan.ray(i));
    }
    v
}

impl PLFunction {
    /// Validates per-cone functionals: they must agree on every common ray.
    pub fn from_cone_functionals(fan: &Arc<Fan>, m: Vec<QVector>) -> Result<Self, PlError> {
        if m.len() != fan.max_cones().len() {
            return Err(PlError::WrongLength { expected: fan.max_cones().len(), found: m.len() });
        }
        if let Some(bad) = m.iter().find(|x| x.len() != fan.dim()) {
            return Err(PlError::WrongLength { expected: fan.dim(), found: bad.len() });
        }
        for wall in fan.interior_walls() {
            let diff = sub(&m[wall.left], &m[wall.right]);
            if wall.rays.iter().any(|i| !dot(&diff, fan.ray(i)).is_zero()) {
                return Err(PlError::WallIncompatible { wall: wall.rays.clone() });
            }
        }
        for ray in 0..fan.num_rays() {
            let mut values = fan
                .max_cones()
                .iter()
                .enumerate()
                .filter(|(_, c)| c.ray_indices.contains(ray))
                .map(|(k, _)| dot(&m[k], fan.ray(ray)));
            let first = values.next().expect("every ray lies in a maximal cone");
            if values.any(|v| v != first) {
                return Err(PlError::InconsistentAtRay { ray });
            }
        }
        Ok(PLFunction { fan: Arc::clone(fan), m })
    }

    /// The function with the given values on the rays of a simplicial fan.
    pub fn from_ray_values(fan: &Arc<Fan>, values: &[Rational]) -> Result<Self, PlError> {
        if !fan.is_simplicial() {
            return Err(PlError::NonSimplicialFan);
        }
        Self::from_values_checked(fan, values)
    }

    /// Like [`PLFunction::from_ray_values`] but for any fan: the values must
    /// already lie in `PL(Σ)`.
    pub fn from_values_checked(fan: &Arc<Fan>, values: &[Rational]) -> Result<Self, PlError> {
        if values.len() != fan.num_rays() {
            return Err(PlError::WrongLength { expected: fan.num_rays(), found: values.len() });
        }
        let mut m = Vec::with_capacity(fan.max_cones().len());
        for (c, cone) in fan.max_cones().iter().enumerate() {
            let mc = functional_from_values(fan, c, values);
            if cone.ray_indices.iter().any(|i| dot(&mc, fan.ray(i)) != values[i]) {
                return Err(PlError::InconsistentRayValues { cone: c });
            }
            m.push(mc);
        }
        Ok(PLFunction { fan: Arc::clone(fan), m })
    }

    pub fn linear(fan: &Arc<Fan>, m: QVector) -> Self {
        assert_eq!(m.len(), fan.dim(), "functional must live in the dual space");
        PLFunction { fan: Arc::clone(fan), m: vec![m; fan.max_cones().len()] }
    }

    pub fn zero(fan: &Arc<Fan>) -> Self {
        Self::linear(fan, zeros(fan.dim()))
    }

    pub fn fan(&self) -> &Arc<Fan> {
        &self.fan
    }

    pub fn cone_functionals(&self) -> &[QVector] {
        &self.m
    }

    pub fn ray_value(&self, i: usize) -> Rational {
        let c = self
            .fan
            .max_cones()
            .iter()
            .position(|c| c.ray_indices.contains(i))
            .expect("every ray lies in a maximal cone");
        dot(&self.m[c], self.fan.ray(i))
    }

    pub fn ray_values(&self) -> QVector {
        (0..self.fan.num_rays()).map(|i| self.ray_value(i)).collect()
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational, FanError> {
        let c = self.fan.max_cone_containing(x).ok_or(FanError::OutsideSupport)?;
        Ok(dot(&self.m[c], x))
    }

    /// `⟨m_left − m_right, v⟩` for `v` the sum of left-cone rays off the wall;
    /// nonnegative on every wall exactly when the function is convex.
    pub fn wall_value(&self, wall: &Wall) -> Rational {
        let v = wall_probe(&self.fan, wall);
        dot(&sub(&self.m[wall.left], &self.m[wall.right]), &v)
    }

    pub fn is_convex(&self) -> bool {
        self.fan.interior_walls().iter().all(|w| !self.wall_value(w).is_negative())
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.fan.interior_walls().iter().all(|w| self.wall_value(w).is_positive())
    }

    pub fn add(&self, other: &PLFunction) -> PLFunction {
        assert!(*self.fan == *other.fan, "functions live on different fans");
        let m = self
            .m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| crate::exactla::linalg::add(a, b))
            .collect();
        PLFunction { fan: Arc::clone(&self.fan), m }
    }

    pub fn scale(&self, s: &Rational) -> PLFunction {
        let m = self.m.iter().map(|a| crate::exactla::linalg::scale(s, a)).collect();
        PLFunction { fan: Arc::clone(&self.fan), m }
    }

    /// The same function viewed on a refinement `fine` with the same rays.
    pub fn pullback(&self, fine: &Arc<Fan>) -> Result<PLFunction, PlError> {
        let map = refinement_map(fine, &self.fan)?;
        let m = map.iter().map(|&c| self.m[c].clone()).collect();
        Ok(PLFunction { fan: Arc::clone(fine), m })
    }
}

/// For each maximal cone of `fine`, the first maximal cone of `coarse`
/// containing it. Requires identical ray lists.
pub fn refinement_map(fine: &Fan, coarse: &Fan) -> Result<Vec<usize>, PlError> {
    if fine.dim() != coarse.dim() || fine.rays() != coarse.rays() {
        return Err(PlError::RaysDiffer);
    }
    fine.max_cones()
        .iter()
        .enumerate()
        .map(|(k, fc)| {
            coarse
                .max_cones()
                .iter()
                .position(|cc| fc.ray_indices.iter().all(|i| cc.contains(fine.ray(i))))
                .ok_or(PlError::NotARefinement { fine_cone: k })
        })
        .collect()
}

/// Is `f`, a function on a refinement of `coarse` with the same rays,
/// linear on every cone of `coarse`?
///
/// The answer is computed by comparing functionals of fine cones inside each
/// coarse cone, and cross-checked against the criterion
/// `f(ρ1 + ρ2) = f(ρ1) + f(ρ2)` over two-element primitive collections of
/// the refinement that lie in a coarse cone.
pub fn coarse_membership(f: &PLFunction, coarse: &Fan) -> Result<bool, PlError> {
    let fine = f.fan();
    let map = refinement_map(fine, coarse)?;
    let direct = (0..coarse.max_cones().len()).all(|c| {
        let mut inside = map.iter().enumerate().filter(|&(_, &cm)| cm == c).map(|(k, _)| &f.m[k]);
        match inside.next() {
            Some(first) => inside.all(|m| m == first),
            None => true,
        }
    });
    let mut criterion = true;
    for p in crate::primcoll::enumerate_primitive_collections(fine) {
        if p.len() != 2 || !coarse.contained_in_single_cone(&p.rays) {
            continue;
        }
        let [a, b] = [p.rays.as_slice()[0], p.rays.as_slice()[1]];
        let sum = crate::exactla::linalg::add(fine.ray(a), fine.ray(b));
        if f.evaluate(&sum)? != f.ray_value(a) + f.ray_value(b) {
            criterion = false;
            break;
        }
    }
    assert_eq!(direct, criterion, "linearity on coarse cones must match the two-element criterion");
    Ok(direct)
}

/// Coordinates on `PL(Σ)` and its quotient `Pic(X)_Q = PL(Σ)/M_Q`.
#[derive(Clone, Debug)]
pub struct PLBasis {
    fan: Arc<Fan>,
    /// Rows over `Q^{Σ(1)}` whose common kernel is `PL(Σ)`.
    equalities: Vec<QVector>,
    basis: Vec<QVector>,
    lin_part: Vec<QVector>,
    pinned: Vec<usize>,
    free: Vec<usize>,
    quotient: Vec<QVector>,
}

/// Linear relations among the rays of each maximal cone, written over all
/// ray indices.
fn cone_relation_rows(fan: &Fan) -> Vec<QVector> {
    let mut rows = Vec::new();
    for cone in fan.max_cones() {
        let idx: Vec<usize> = cone.ray_indices.iter().collect();
        let coords: Vec<QVector> = (0..fan.dim())
            .map(|r| idx.iter().map(|&i| fan.ray(i)[r].clone()).collect())
            .collect();
        for k in kernel_basis(&coords, idx.len()) {
            let mut row = zeros(fan.num_rays());
            for (j, &i) in idx.iter().enumerate() {
                row[i] = k[j].clone();
            }
            rows.push(row);
        }
    }
    rows
}

/// Dimension of the space of wall-compatible tuples `(m_σ)`.
fn cone_tuple_dimension(fan: &Fan) -> usize {
    let n = fan.dim();
    let k = fan.max_cones().len();
    let mut rows = Vec::new();
    for wall in fan.interior_walls() {
        for i in wall.rays.iter() {
            let mut row = zeros(n * k);
            for j in 0..n {
                row[wall.left * n + j] = fan.ray(i)[j].clone();
                row[wall.right * n + j] = -fan.ray(i)[j].clone();
            }
            rows.push(row);
        }
    }
    n * k - rank_of(&rows)
}

impl PLBasis {
    pub fn new(fan: &Arc<Fan>) -> PLBasis {
        let r = fan.num_rays();
        let n = fan.dim();
        let equalities = cone_relation_rows(fan);
        let basis = if equalities.is_empty() {
            (0..r).map(|i| crate::exactla::linalg::unit(r, i)).collect()
        } else {
            kernel_basis(&equalities, r)
        };
        assert_eq!(
            basis.len(),
            cone_tuple_dimension(fan),
            "ray-value and cone-functional descriptions of PL disagree in dimension"
        );
        let lin_part: Vec<QVector> = (0..n)
            .map(|j| (0..r).map(|i| fan.ray(i)[j].clone()).collect())
            .collect();

        let first: Vec<usize> = fan.max_cones()[0].ray_indices.iter().collect();
        let first_vecs: Vec<QVector> = first.iter().map(|&i| fan.ray(i).clone()).collect();
        let pinned: Vec<usize> = independent_subset(&first_vecs).into_iter().map(|k| first[k]).collect();
        let mut rows = equalities.clone();
        for &p in &pinned {
            rows.push(crate::exactla::linalg::unit(r, p));
        }
        let quotient = kernel_basis(&rows, r);
        let free: Vec<usize> = quotient
            .iter()
            .map(|q| (0..r).find(|&i| q[i].is_one()).expect("kernel basis vectors carry a unit entry"))
            .collect();
        PLBasis {
            fan: Arc::clone(fan),
            equalities,
            basis,
            lin_part,
            pinned,
            free,
            quotient,
        }
    }

    pub fn fan(&self) -> &Arc<Fan> {
        &self.fan
    }

    pub fn dim_pl(&self) -> usize {
        self.basis.len()
    }

    pub fn dim_pic(&self) -> usize {
        self.quotient.len()
    }

    /// Equations cutting `PL(Σ)` out of `Q^{Σ(1)}`.
    pub fn equalities(&self) -> &[QVector] {
        &self.equalities
    }

    /// Ray-value vectors spanning `PL(Σ)`.
    pub fn basis(&self) -> &[QVector] {
        &self.basis
    }

    /// Ray values of the coordinate functionals `e_1^*, …, e_n^*`.
    pub fn lin_part(&self) -> &[QVector] {
        &self.lin_part
    }

    /// Rays whose values are set to zero to pick representatives modulo `M`.
    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    /// Rays whose values are the coordinates on `Pic`.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Ray-value representatives of a basis of `Pic(X)_Q`.
    pub fn quotient_basis(&self) -> &[QVector] {
        &self.quotient
    }

    pub fn basis_functions(&self) -> Vec<PLFunction> {
        self.basis
            .iter()
            .map(|b| PLFunction::from_values_checked(&self.fan, b).expect("basis vectors lie in PL"))
            .collect()
    }

    pub fn contains(&self, values: &[Rational]) -> bool {
        self.equalities.iter().all(|e| dot(e, values).is_zero())
    }

    /// Subtracts the linear function agreeing with `values` on the pinned rays.
    pub fn normalize(&self, values: &[Rational]) -> QVector {
        let rows: Vec<QVector> = self.pinned.iter().map(|&p| self.fan.ray(p).clone()).collect();
        let rhs: QVector = self.pinned.iter().map(|&p| values[p].clone()).collect();
        let m = solve(&rows, self.fan.dim(), &rhs).expect("pinned rays are independent");
        (0..self.fan.num_rays())
            .map(|i| values[i].clone() - dot(&m, self.fan.ray(i)))
            .collect()
    }

    /// Coordinates of the class of `values ∈ PL(Σ)` in `Pic(X)_Q`.
    pub fn pic_coordinates(&self, values: &[Rational]) -> QVector {
        let a = self.normalize(values);
        self.free.iter().map(|&f| a[f].clone()).collect()
    }

    /// Ray values of the representative with the given `Pic` coordinates.
    pub fn from_pic_coordinates(&self, coords: &[Rational]) -> QVector {
        assert_eq!(coords.len(), self.dim_pic(), "one coordinate per quotient basis vector");
        crate::exactla::linalg::combine(coords, &self.quotient, self.fan.num_rays())
    }

    /// Pairs a relation vector (indexed by rays) with the quotient basis:
    /// the coordinates of its class in the dual of `Pic`.
    pub fn curve_coordinates(&self, relation: &[Rational]) -> QVector {
        self.quotient.iter().map(|q| dot(q, relation)).collect()
    }

    /// A ray-value row functional restated on `Pic` coordinates. Only
    /// meaningful for functionals vanishing on `M`.
    pub fn row_on_pic(&self, row: &[Rational]) -> QVector {
        self.curve_coordinates(row)
    }
}

/// Outcome of the quasi-projectivity test.
#[derive(Clone, Debug)]
pub enum QuasiProjectivity {
    /// A strictly convex function.
    Yes(PLFunction),
    /// Nonnegative multipliers on the wall functionals, summing to one,
    /// whose combination vanishes on `Pic`.
    No(InfeasibilityCertificate),
}

impl QuasiProjectivity {
    pub fn is_quasi_projective(&self) -> bool {
        matches!(self, QuasiProjectivity::Yes(_))
    }

    pub fn witness(&self) -> Option<&PLFunction> {
        match self {
            QuasiProjectivity::Yes(f) => Some(f),
            QuasiProjectivity::No(_) => None,
        }
    }
}

/// Wall functionals restated on `Pic` coordinates, one per interior wall.
pub fn wall_rows_on_pic(basis: &PLBasis) -> Vec<QVector> {
    let fan = basis.fan();
    fan.interior_walls()
        .iter()
        .map(|w| basis.row_on_pic(&wall_functional_row(fan, w)))
        .collect()
}

/// Searches for a strictly convex function by an LP over `Pic` coordinates.
pub fn quasi_projectivity(basis: &PLBasis) -> QuasiProjectivity {
    let rows = wall_rows_on_pic(basis);
    match strict_feasible(&rows, &[], &[], basis.dim_pic()) {
        StrictFeasibility::Feasible(c) => {
            let values = basis.from_pic_coordinates(&c);
            let f = PLFunction::from_values_checked(basis.fan(), &values).expect("quotient vectors lie in PL");
            debug_assert!(f.is_strictly_convex());
            QuasiProjectivity::Yes(f)
        }
        StrictFeasibility::Infeasible(cert) => QuasiProjectivity::No(cert),
    }
}

pub fn is_quasi_projective(fan: &Arc<Fan>) -> bool {
    quasi_projectivity(&PLBasis::new(fan)).is_quasi_projective()
}

/// A strictly convex function on `fan`, if there is one.
pub fn strictly_convex_witness(fan: &Arc<Fan>) -> Option<PLFunction> {
    match quasi_projectivity(&PLBasis::new(fan)) {
        QuasiProjectivity::Yes(f) => Some(f),
        QuasiProjectivity::No(_) => None,
    }
}
