//! Polyhedral cones in H- and V-form: double description conversion,
//! membership with certificates, cone equality and strict feasibility.

use log::debug;

use super::linalg::{combine, dot, is_zero_vec, kernel_basis, neg, rank_of, zeros};
use super::lp::{feasible_point, maximize, LpOutcome};
use super::scalar::{normalize_direction, Field, Rational};
use super::ExactError;

/// Largest ambient dimension accepted by the double description routines.
pub const MAX_DD_DIM: usize = 12;

/// `{x : ⟨h,x⟩ ≥ 0 for h in inequalities, ⟨e,x⟩ = 0 for e in equalities}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HCone<F = Rational> {
    pub inequalities: Vec<Vec<F>>,
    pub equalities: Vec<Vec<F>>,
    pub ambient_dim: usize,
}

/// Nonnegative hull of `generators`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VCone<F = Rational> {
    pub generators: Vec<Vec<F>>,
    pub ambient_dim: usize,
}

/// Either description, for operations that accept both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cone<F = Rational> {
    H(HCone<F>),
    V(VCone<F>),
}

/// Minimal V-description split into extreme rays of the pointed part and a
/// basis of the lineality space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSkeleton<F = Rational> {
    pub rays: Vec<Vec<F>>,
    pub lines: Vec<Vec<F>>,
    pub ambient_dim: usize,
}

impl<F: Field> HCone<F> {
    pub fn new(inequalities: Vec<Vec<F>>, equalities: Vec<Vec<F>>, ambient_dim: usize) -> Self {
        assert!(
            inequalities.iter().chain(&equalities).all(|r| r.len() == ambient_dim),
            "constraint rows must have length {ambient_dim}"
        );
        Self {
            inequalities,
            equalities,
            ambient_dim,
        }
    }

    pub fn contains(&self, x: &[F]) -> bool {
        self.inequalities.iter().all(|h| !dot(h, x).is_negative())
            && self.equalities.iter().all(|e| dot(e, x).is_zero())
    }

    /// Multipliers expressing `h` as a nonnegative combination of the
    /// inequalities plus an arbitrary combination of the equalities, i.e. a
    /// Farkas certificate that `⟨h,x⟩ ≥ 0` is valid on the cone.
    pub fn valid_inequality(&self, h: &[F]) -> Option<DualCertificate<F>> {
        let k = self.inequalities.len();
        let q = self.equalities.len();
        let mut gens = self.inequalities.clone();
        gens.extend(self.equalities.iter().cloned());
        gens.extend(self.equalities.iter().map(|e| neg(e)));
        let coeffs = if gens.is_empty() {
            if is_zero_vec(h) {
                Vec::new()
            } else {
                return None;
            }
        } else {
            nonneg_combination(h, &gens)?
        };
        let ineq = coeffs[..k].to_vec();
        let eq = (0..q)
            .map(|j| coeffs[k + j].clone() - coeffs[k + q + j].clone())
            .collect();
        Some(DualCertificate { inequality_multipliers: ineq, equality_multipliers: eq })
    }

    /// Is `⟨e,x⟩ = 0` valid on the cone?
    pub fn valid_equality(&self, e: &[F]) -> bool {
        self.valid_inequality(e).is_some() && self.valid_inequality(&neg(e)).is_some()
    }
}

impl<F: Field> VCone<F> {
    pub fn new(generators: Vec<Vec<F>>, ambient_dim: usize) -> Self {
        assert!(
            generators.iter().all(|g| g.len() == ambient_dim),
            "generators must have length {ambient_dim}"
        );
        Self { generators, ambient_dim }
    }
}

impl<F: Field> ConeSkeleton<F> {
    pub fn into_vcone(self) -> VCone<F> {
        let mut generators = self.rays;
        for l in self.lines {
            generators.push(neg(&l));
            generators.push(l);
        }
        VCone::new(generators, self.ambient_dim)
    }
}

/// `h = Σ λ_i a_i + Σ μ_j e_j` with `λ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate<F = Rational> {
    pub inequality_multipliers: Vec<F>,
    pub equality_multipliers: Vec<F>,
}

/// Nonnegative coefficients with `Σ c_j gens[j] = target`, if any exist.
fn nonneg_combination<F: Field>(target: &[F], gens: &[Vec<F>]) -> Option<Vec<F>> {
    let dim = target.len();
    let rows: Vec<Vec<F>> = (0..dim)
        .map(|i| gens.iter().map(|g| g[i].clone()).collect())
        .collect();
    feasible_point(&rows, target, gens.len()).map(|s| s.x)
}

/// Positive decomposition of `target` over a linearly independent subset of
/// `gens`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonnegDecomposition<F = Rational> {
    /// Indices into `gens`, increasing.
    pub support: Vec<usize>,
    /// Strictly positive, aligned with `support`.
    pub coefficients: Vec<F>,
}

/// Finds `b > 0` on an independent subset `S` of `gens` with
/// `Σ_{S} b_j gens[j] = target`, via a basic feasible solution of the
/// membership LP. `None` when `target` is outside the cone.
pub fn solve_nonneg_in_span<F: Field>(target: &[F], gens: &[Vec<F>]) -> Option<NonnegDecomposition<F>> {
    assert!(!gens.is_empty(), "solve_nonneg_in_span needs at least one generator");
    let x = nonneg_combination(target, gens)?;
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j].is_positive()).collect();
    let coefficients = support.iter().map(|&j| x[j].clone()).collect();
    Some(NonnegDecomposition { support, coefficients })
}

/// Membership test with certificate: coefficients (one per generator,
/// all `≥ 0`) reproducing `x`.
pub fn cone_contains<F: Field>(c: &VCone<F>, x: &[F]) -> Option<Vec<F>> {
    assert_eq!(x.len(), c.ambient_dim, "point dimension must match the cone");
    if c.generators.is_empty() {
        return is_zero_vec(x).then(Vec::new);
    }
    nonneg_combination(x, &c.generators)
}

/// Double description: extreme rays and lineality of `{x : A x ≥ 0}`.
///
/// Constraints are inserted in lexicographic order. Lines are eliminated
/// first whenever a constraint is not orthogonal to one; otherwise the
/// usual ray-pairing step runs, with adjacency decided by rank of the
/// common tight set.
fn double_description<F: Field>(constraints: &[Vec<F>], dim: usize) -> ConeSkeleton<F> {
    let mut order: Vec<&Vec<F>> = constraints.iter().filter(|h| !is_zero_vec(h)).collect();
    order.sort();
    order.dedup();

    let mut lines: Vec<Vec<F>> = (0..dim)
        .map(|i| {
            let mut v = zeros(dim);
            v[i] = F::one();
            v
        })
        .collect();
    // Each ray carries the indices (into `processed`) of constraints tight on it.
    let mut rays: Vec<(Vec<F>, Vec<usize>)> = Vec::new();
    let mut processed: Vec<Vec<F>> = Vec::new();

    for h in order {
        let idx = processed.len();
        processed.push(h.clone());

        if let Some(pos) = lines.iter().position(|l| !dot(h, l).is_zero()) {
            let mut pivot = lines.remove(pos);
            let mut hp = dot(h, &pivot);
            if hp.is_negative() {
                pivot = neg(&pivot);
                hp = -hp;
            }
            for l in lines.iter_mut() {
                let f = dot(h, l) / hp.clone();
                if !f.is_zero() {
                    *l = l.iter().zip(&pivot).map(|(a, b)| a.clone() - f.clone() * b.clone()).collect();
                }
            }
            for (r, tight) in rays.iter_mut() {
                let f = dot(h, r) / hp.clone();
                if !f.is_zero() {
                    *r = r.iter().zip(&pivot).map(|(a, b)| a.clone() - f.clone() * b.clone()).collect();
                }
                tight.push(idx);
            }
            let tight: Vec<usize> = (0..idx).collect();
            normalize_direction(&mut pivot);
            rays.push((pivot, tight));
            continue;
        }

        let values: Vec<F> = rays.iter().map(|(r, _)| dot(h, r)).collect();
        let target_rank = dim - lines.len();
        let mut next: Vec<(Vec<F>, Vec<usize>)> = Vec::new();
        for (i, (r, tight)) in rays.iter().enumerate() {
            if values[i].is_positive() {
                next.push((r.clone(), tight.clone()));
            } else if values[i].is_zero() {
                let mut t = tight.clone();
                t.push(idx);
                next.push((r.clone(), t));
            }
        }
        for (i, (p, tp)) in rays.iter().enumerate() {
            if !values[i].is_positive() {
                continue;
            }
            for (j, (q, tq)) in rays.iter().enumerate() {
                if !values[j].is_negative() {
                    continue;
                }
                let common: Vec<usize> = tp.iter().filter(|k| tq.contains(k)).copied().collect();
                if target_rank < 2 || common.len() + 2 < target_rank {
                    continue;
                }
                let rows: Vec<Vec<F>> = common.iter().map(|&k| processed[k].clone()).collect();
                if rank_of(&rows) + 2 != target_rank {
                    continue;
                }
                let a = values[i].clone();
                let b = -values[j].clone();
                let mut new: Vec<F> = p
                    .iter()
                    .zip(q)
                    .map(|(x, y)| b.clone() * x.clone() + a.clone() * y.clone())
                    .collect();
                normalize_direction(&mut new);
                let mut t = common;
                t.push(idx);
                next.push((new, t));
            }
        }
        rays = next;
    }

    let mut out_rays: Vec<Vec<F>> = rays.into_iter().map(|(r, _)| r).collect();
    out_rays.sort();
    ConeSkeleton {
        rays: out_rays,
        lines,
        ambient_dim: dim,
    }
}

fn guard(dim: usize) -> Result<(), ExactError> {
    if dim > MAX_DD_DIM {
        Err(ExactError::DimensionTooLarge { dim, max: MAX_DD_DIM })
    } else {
        Ok(())
    }
}

/// Extreme rays and lineality space of an H-cone.
pub fn h_to_skeleton<F: Field>(c: &HCone<F>) -> Result<ConeSkeleton<F>, ExactError> {
    guard(c.ambient_dim)?;
    let mut rows = c.inequalities.clone();
    for e in &c.equalities {
        rows.push(e.clone());
        rows.push(neg(e));
    }
    Ok(double_description(&rows, c.ambient_dim))
}

pub fn h_to_v<F: Field>(c: &HCone<F>) -> Result<VCone<F>, ExactError> {
    Ok(h_to_skeleton(c)?.into_vcone())
}

/// Facet inequalities (extreme rays of the dual) plus equalities spanning
/// the orthogonal complement of the cone's linear span.
pub fn v_to_h<F: Field>(c: &VCone<F>) -> Result<HCone<F>, ExactError> {
    guard(c.ambient_dim)?;
    let gens: Vec<Vec<F>> = c
        .generators
        .iter()
        .filter(|g| {
            let zero = is_zero_vec(g);
            if zero {
                debug!("dropping zero generator from V-cone");
            }
            !zero
        })
        .cloned()
        .collect();
    let dual = double_description(&gens, c.ambient_dim);
    Ok(HCone::new(dual.rays, dual.lines, c.ambient_dim))
}

/// Is every point of `inner` in `outer`?
pub fn cone_subset<F: Field>(inner: &Cone<F>, outer: &Cone<F>) -> Result<bool, ExactError> {
    match (inner, outer) {
        (Cone::V(a), Cone::H(b)) => Ok(a.generators.iter().all(|g| b.contains(g))),
        (Cone::V(a), Cone::V(b)) => Ok(a.generators.iter().all(|g| cone_contains(b, g).is_some())),
        (Cone::H(a), Cone::H(b)) => Ok(b.inequalities.iter().all(|h| a.valid_inequality(h).is_some())
            && b.equalities.iter().all(|e| a.valid_equality(e))),
        (Cone::H(a), Cone::V(_)) => cone_subset(&Cone::V(h_to_v(a)?), outer),
    }
}

impl<F: Field> Cone<F> {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Cone::H(c) => c.ambient_dim,
            Cone::V(c) => c.ambient_dim,
        }
    }
}

/// Mutual inclusion.
pub fn cones_equal<F: Field>(a: &Cone<F>, b: &Cone<F>) -> Result<bool, ExactError> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(ExactError::DimensionMismatch {
            left: a.ambient_dim(),
            right: b.ambient_dim(),
        });
    }
    Ok(cone_subset(a, b)? && cone_subset(b, a)?)
}

/// Proof that no `x` satisfies the strict system: multipliers with
/// `Σ y_s s + Σ y_w w + Σ z e = 0`, `y ≥ 0`, `Σ y_s = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibilityCertificate<F = Rational> {
    pub strict_multipliers: Vec<F>,
    pub weak_multipliers: Vec<F>,
    pub equality_multipliers: Vec<F>,
}

impl<F: Field> InfeasibilityCertificate<F> {
    pub fn verify(&self, strict: &[Vec<F>], weak: &[Vec<F>], eqs: &[Vec<F>], dim: usize) -> bool {
        let ys = &self.strict_multipliers;
        let yw = &self.weak_multipliers;
        if ys.iter().chain(yw).any(|y| y.is_negative()) {
            return false;
        }
        let total = ys.iter().fold(F::zero(), |a, y| a + y.clone());
        if total != F::one() {
            return false;
        }
        let mut sum = combine(ys, strict, dim);
        let w = combine(yw, weak, dim);
        let e = combine(&self.equality_multipliers, eqs, dim);
        for i in 0..dim {
            sum[i] = sum[i].clone() + w[i].clone() + e[i].clone();
        }
        is_zero_vec(&sum)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrictFeasibility<F = Rational> {
    Feasible(Vec<F>),
    Infeasible(InfeasibilityCertificate<F>),
}

impl<F> StrictFeasibility<F> {
    pub fn witness(&self) -> Option<&Vec<F>> {
        match self {
            StrictFeasibility::Feasible(x) => Some(x),
            StrictFeasibility::Infeasible(_) => None,
        }
    }

    pub fn into_witness(self) -> Option<Vec<F>> {
        match self {
            StrictFeasibility::Feasible(x) => Some(x),
            StrictFeasibility::Infeasible(_) => None,
        }
    }
}

/// Looks for `x` with `⟨s,x⟩ > 0`, `⟨w,x⟩ ≥ 0`, `⟨e,x⟩ = 0`.
///
/// Maximizes a slack `t ≤ 1` subject to `⟨s,x⟩ ≥ t`; a positive optimum
/// yields the witness. When the optimum is zero, the alternative system
/// (Motzkin transposition) is solved for an infeasibility certificate.
pub fn strict_feasible<F: Field>(
    strict: &[Vec<F>],
    weak: &[Vec<F>],
    eqs: &[Vec<F>],
    dim: usize,
) -> StrictFeasibility<F> {
    if strict.is_empty() {
        return StrictFeasibility::Feasible(zeros(dim));
    }
    let ns = strict.len();
    let nw = weak.len();
    // Variables: x+ (dim), x- (dim), t, slack per strict row, slack per weak row, slack on t.
    let nvars = 2 * dim + 1 + ns + nw + 1;
    let t_col = 2 * dim;
    let mut a: Vec<Vec<F>> = Vec::new();
    let mut b: Vec<F> = Vec::new();
    let row_for = |h: &[F]| -> Vec<F> {
        let mut row = zeros(nvars);
        for i in 0..dim {
            row[i] = h[i].clone();
            row[dim + i] = -h[i].clone();
        }
        row
    };
    for (k, s) in strict.iter().enumerate() {
        let mut row = row_for(s);
        row[t_col] = -F::one();
        row[t_col + 1 + k] = -F::one();
        a.push(row);
        b.push(F::zero());
    }
    for (k, w) in weak.iter().enumerate() {
        let mut row = row_for(w);
        row[t_col + 1 + ns + k] = -F::one();
        a.push(row);
        b.push(F::zero());
    }
    for e in eqs {
        a.push(row_for(e));
        b.push(F::zero());
    }
    let mut cap = zeros(nvars);
    cap[t_col] = F::one();
    cap[nvars - 1] = F::one();
    a.push(cap);
    b.push(F::one());
    let mut c = zeros(nvars);
    c[t_col] = F::one();

    let sol = match maximize(&a, &b, &c) {
        LpOutcome::Optimal(s) => s,
        other => unreachable!("slack LP is feasible and bounded, got {other:?}"),
    };
    if sol.objective.is_positive() {
        let x = (0..dim)
            .map(|i| sol.x[i].clone() - sol.x[dim + i].clone())
            .collect();
        return StrictFeasibility::Feasible(x);
    }

    // Alternative: y_s ≥ 0, y_w ≥ 0, z = z+ - z-, Σ y_s s + Σ y_w w + Σ z e = 0, Σ y_s = 1.
    let nq = eqs.len();
    let nalt = ns + nw + 2 * nq;
    let mut a2: Vec<Vec<F>> = (0..dim)
        .map(|i| {
            let mut row = Vec::with_capacity(nalt);
            row.extend(strict.iter().map(|s| s[i].clone()));
            row.extend(weak.iter().map(|w| w[i].clone()));
            row.extend(eqs.iter().map(|e| e[i].clone()));
            row.extend(eqs.iter().map(|e| -e[i].clone()));
            row
        })
        .collect();
    let mut b2 = zeros(dim);
    let mut norm = zeros(nalt);
    for v in norm.iter_mut().take(ns) {
        *v = F::one();
    }
    a2.push(norm);
    b2.push(F::one());
    let alt = feasible_point(&a2, &b2, nalt).expect("transposition theorem guarantees an alternative certificate");
    let y = alt.x;
    StrictFeasibility::Infeasible(InfeasibilityCertificate {
        strict_multipliers: y[..ns].to_vec(),
        weak_multipliers: y[ns..ns + nw].to_vec(),
        equality_multipliers: (0..nq)
            .map(|j| y[ns + nw + j].clone() - y[ns + nw + nq + j].clone())
            .collect(),
    })
}

/// Is the cone generated by `gens` pointed (contains no line)?
pub fn is_pointed<F: Field>(gens: &[Vec<F>], dim: usize) -> bool {
    let nonzero: Vec<Vec<F>> = gens.iter().filter(|g| !is_zero_vec(g)).cloned().collect();
    strict_feasible(&nonzero, &[], &[], dim).witness().is_some()
}

/// Basis of the lineality space of `cone(gens)`: spanned by the generators
/// whose negatives also lie in the cone.
pub fn lineality_basis<F: Field>(gens: &[Vec<F>], dim: usize) -> Vec<Vec<F>> {
    let vc = VCone::new(gens.to_vec(), dim);
    let inside: Vec<Vec<F>> = gens
        .iter()
        .filter(|g| !is_zero_vec(g) && cone_contains(&vc, &neg(g)).is_some())
        .cloned()
        .collect();
    super::linalg::row_space_basis(&inside, dim)
}

/// Kernel helper re-exported for callers that think in cones.
pub fn orthogonal_complement<F: Field>(rows: &[Vec<F>], dim: usize) -> Vec<Vec<F>> {
    kernel_basis(rows, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::linalg::positively_proportional;
    use crate::exactla::scalar::{int, qvec, Rational};
    use num_traits::{Signed, Zero};

    fn same_rays(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
        a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| positively_proportional(x, y)))
    }

    #[test]
    fn first_orthant_h_to_v() {
        let c = HCone::new(vec![qvec(&[1, 0]), qvec(&[0, 1])], vec![], 2);
        let v = h_to_v(&c).unwrap();
        assert!(same_rays(&v.generators, &[qvec(&[1, 0]), qvec(&[0, 1])]));
    }

    #[test]
    fn fulton_nef_cone_generators() {
        // a ≥ b and 3b ≥ 2a in coordinates (a, b).
        let c = HCone::new(vec![qvec(&[1, -1]), qvec(&[-2, 3])], vec![], 2);
        let v = h_to_v(&c).unwrap();
        assert!(same_rays(&v.generators, &[qvec(&[1, 1]), qvec(&[3, 2])]));
    }

    #[test]
    fn simplicial_cone_facets() {
        // sigma5 = Cone(rho1, rho2, rho4) of the simplicial five-ray fan.
        let gens = vec![qvec(&[1, 1, 1]), qvec(&[1, -1, 1]), qvec(&[-1, 1, 1])];
        let h = v_to_h(&VCone::new(gens.clone(), 3)).unwrap();
        assert_eq!(h.inequalities.len(), 3);
        assert!(h.equalities.is_empty());
        for g in &gens {
            let tight = h.inequalities.iter().filter(|f| dot(f, g).is_zero()).count();
            assert_eq!(tight, 2);
        }
    }

    #[test]
    fn lower_dimensional_and_nonpointed() {
        let h = v_to_h(&VCone::new(vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0])], 3)).unwrap();
        assert_eq!(h.equalities.len(), 1);
        assert_eq!(h.inequalities.len(), 2);
        let half_plane = HCone::new(vec![qvec(&[0, 1])], vec![], 2);
        let sk = h_to_skeleton(&half_plane).unwrap();
        assert_eq!(sk.lines.len(), 1);
        assert_eq!(sk.rays.len(), 1);
        assert!(h_to_v(&HCone::<Rational>::new(vec![], vec![], 13)).is_err());
    }

    #[test]
    fn containment_and_certificates() {
        let c = VCone::new(vec![qvec(&[1, -1, 1]), qvec(&[-1, 1, 1])], 3);
        let cert = cone_contains(&c, &qvec(&[0, 0, 2])).unwrap();
        assert_eq!(cert, vec![int(1), int(1)]);
        assert_eq!(cone_contains(&c, &qvec(&[0, 0, 0])).unwrap(), vec![int(0), int(0)]);
        assert!(cone_contains(&c, &qvec(&[0, 0, -2])).is_none());
        let d = solve_nonneg_in_span(&qvec(&[0, 0, 2]), &c.generators).unwrap();
        assert_eq!(d.support, vec![0, 1]);
        assert_eq!(d.coefficients, vec![int(1), int(1)]);
    }

    #[test]
    fn equality_of_cones() {
        let orthant = Cone::H(HCone::new(vec![qvec(&[1, 0]), qvec(&[0, 1])], vec![], 2));
        let upper = Cone::H(HCone::new(vec![qvec(&[0, 1])], vec![], 2));
        let orthant_v = Cone::V(VCone::new(vec![qvec(&[2, 0]), qvec(&[0, 3]), qvec(&[1, 1])], 2));
        assert!(cones_equal(&orthant, &orthant).unwrap());
        assert!(!cones_equal(&orthant, &upper).unwrap());
        assert!(cones_equal(&orthant, &orthant_v).unwrap());
        assert!(cones_equal(&orthant_v, &orthant).unwrap());
    }

    #[test]
    fn strict_systems() {
        let w = strict_feasible(&[qvec(&[1])], &[], &[], 1);
        assert!(w.witness().unwrap()[0].is_positive());
        // x > 0 and -x > 0 cannot both hold.
        let strict = vec![qvec(&[1]), qvec(&[-1])];
        match strict_feasible(&strict, &[], &[], 1) {
            StrictFeasibility::Infeasible(cert) => assert!(cert.verify(&strict, &[], &[], 1)),
            other => panic!("expected infeasible, got {other:?}"),
        }
        assert!(is_pointed(&[qvec(&[1, 0]), qvec(&[0, 1])], 2));
        assert!(!is_pointed(&[qvec(&[1, 0]), qvec(&[-1, 0])], 2));
        assert_eq!(lineality_basis(&[qvec(&[1, 0]), qvec(&[-1, 0]), qvec(&[0, 1])], 2).len(), 1);
    }
}
