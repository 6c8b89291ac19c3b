//! Wall relations, curve classes and the Mori cone.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::exactla::linalg::{independent_subset, is_zero_vec, kernel_basis, positively_proportional, scale};
use crate::exactla::scalar::Rational;
use crate::exactla::{cone_contains, is_pointed, lineality_basis, QVector, VCone};
use crate::fan::{Fan, RaySet, Wall};
use crate::plfun::PLBasis;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoriError {
    #[error("the Mori cone contains a line, so extremal rays are undefined")]
    MoriConeNotPointed,
    #[error("rays chosen around wall {0} do not give a one-dimensional relation")]
    DegenerateWall(RaySet),
}

/// A linear relation `Σ r_ρ ρ = 0`, stored densely by ray index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationVector(pub QVector);

impl RelationVector {
    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    /// Does `Σ r_ρ ρ` vanish?
    pub fn holds(&self, fan: &Fan) -> bool {
        let mut total = vec![Rational::zero(); fan.dim()];
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (t, x) in total.iter_mut().zip(fan.ray(i)) {
                *t = t.clone() + c.clone() * x.clone();
            }
        }
        is_zero_vec(&total)
    }

    pub fn support(&self) -> RaySet {
        (0..self.0.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }

    pub fn positive_support(&self) -> RaySet {
        (0..self.0.len()).filter(|&i| self.0[i].is_positive()).collect()
    }

    /// Evaluates the functional `φ ↦ Σ r_ρ φ(ρ)` on ray values.
    pub fn pair(&self, values: &[Rational]) -> Rational {
        crate::exactla::linalg::dot(&self.0, values)
    }
}

impl fmt::Display for RelationVector {
    /// Renders `Σ_{r>0} r ρ = Σ_{r<0} |r| ρ` using `r<i>` for ray `i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |positive: bool| -> String {
            let terms: Vec<String> = self
                .0
                .iter()
                .enumerate()
                .filter(|(_, c)| if positive { c.is_positive() } else { c.is_negative() })
                .map(|(i, c)| {
                    let c = c.abs();
                    if c.is_one() {
                        format!("r{i}")
                    } else {
                        format!("{c}r{i}")
                    }
                })
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join("+")
            }
        };
        write!(f, "{} = {}", side(true), side(false))
    }
}

/// Relation among `chosen` rays (which must have a one-dimensional space of
/// relations), scaled so the coefficient of `last` is 1.
fn relation_on(fan: &Fan, chosen: &[usize], last: usize) -> Option<RelationVector> {
    let n = fan.dim();
    let cols: Vec<QVector> = (0..n)
        .map(|r| chosen.iter().map(|&i| fan.ray(i)[r].clone()).collect())
        .collect();
    let kernel = kernel_basis(&cols, chosen.len());
    if kernel.len() != 1 {
        return None;
    }
    let k = &kernel[0];
    let pos = chosen.iter().position(|&i| i == last)?;
    if k[pos].is_zero() {
        return None;
    }
    let k = scale(&(Rational::one() / k[pos].clone()), k);
    let mut out = vec![Rational::zero(); fan.num_rays()];
    for (j, &i) in chosen.iter().enumerate() {
        out[i] = k[j].clone();
    }
    Some(RelationVector(out))
}

fn wall_relation_from(fan: &Fan, wall: &Wall, base: &[usize], near: usize, far: usize) -> Result<RelationVector, MoriError> {
    let mut chosen = base.to_vec();
    chosen.push(near);
    chosen.push(far);
    let rel = relation_on(fan, &chosen, far).ok_or_else(|| MoriError::DegenerateWall(wall.rays.clone()))?;
    if !rel.0[near].is_positive() {
        return Err(MoriError::DegenerateWall(wall.rays.clone()));
    }
    Ok(rel)
}

/// The wall relation `Σ a_i ρ_i = 0` of an interior wall: `n−1` independent
/// rays of the wall (lexicographically first), the smallest ray of the left
/// cone off the wall (`a_n > 0`) and the smallest ray of the right cone off
/// the wall (`a_{n+1} = 1`).
pub fn wall_relation(fan: &Fan, wall: &Wall) -> Result<RelationVector, MoriError> {
    let rays: Vec<usize> = wall.rays.iter().collect();
    let vecs: Vec<QVector> = rays.iter().map(|&i| fan.ray(i).clone()).collect();
    let base: Vec<usize> = independent_subset(&vecs).into_iter().map(|k| rays[k]).collect();
    let near = fan.max_cones()[wall.left].ray_indices.difference(&wall.rays).iter().next();
    let far = fan.max_cones()[wall.right].ray_indices.difference(&wall.rays).iter().next();
    match (near, far) {
        (Some(near), Some(far)) if base.len() + 1 == fan.dim() => wall_relation_from(fan, wall, &base, near, far),
        _ => Err(MoriError::DegenerateWall(wall.rays.clone())),
    }
}

/// Every wall relation obtainable from an admissible choice of rays: any
/// independent `(n−1)`-subset of the wall and any off-wall ray on each side.
pub fn admissible_wall_relations(fan: &Fan, wall: &Wall) -> Vec<RelationVector> {
    let rays: Vec<usize> = wall.rays.iter().collect();
    let near = fan.max_cones()[wall.left].ray_indices.difference(&wall.rays);
    let far = fan.max_cones()[wall.right].ray_indices.difference(&wall.rays);
    let mut out = Vec::new();
    for base in subsets(&rays, fan.dim() - 1) {
        let vecs: Vec<QVector> = base.iter().map(|&i| fan.ray(i).clone()).collect();
        if crate::exactla::linalg::rank_of(&vecs) != base.len() {
            continue;
        }
        for a in near.iter() {
            for b in far.iter() {
                if let Ok(r) = wall_relation_from(fan, wall, &base, a, b) {
                    out.push(r);
                }
            }
        }
    }
    out
}

/// All `k`-element subsets of `items`, in lexicographic order.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Coordinates of the class of a relation in `N_1`, dual to the quotient
/// basis of `basis`.
pub fn curve_class(basis: &PLBasis, r: &RelationVector) -> QVector {
    basis.curve_coordinates(&r.0)
}

/// The cone generated by the classes of all interior walls.
#[derive(Clone, Debug)]
pub struct MoriCone {
    /// Wall relations, aligned with [`Fan::interior_walls`].
    pub relations: Vec<RelationVector>,
    /// Curve classes, aligned with [`Fan::interior_walls`].
    pub classes: Vec<QVector>,
    pub dim: usize,
}

impl MoriCone {
    pub fn new(basis: &PLBasis) -> Result<MoriCone, MoriError> {
        let fan = basis.fan();
        let mut relations = Vec::new();
        let mut classes = Vec::new();
        for wall in fan.interior_walls() {
            let r = wall_relation(fan, wall)?;
            classes.push(curve_class(basis, &r));
            relations.push(r);
        }
        Ok(MoriCone { relations, classes, dim: basis.dim_pic() })
    }

    pub fn as_vcone(&self) -> VCone {
        VCone::new(self.classes.clone(), self.dim)
    }

    pub fn is_pointed(&self) -> bool {
        is_pointed(&self.classes, self.dim)
    }

    /// Basis of the largest linear subspace inside the cone.
    pub fn lineality(&self) -> Vec<QVector> {
        lineality_basis(&self.classes, self.dim)
    }

    /// Nonnegative multipliers on the wall classes reproducing `x`, if `x`
    /// lies in the cone.
    pub fn contains(&self, x: &[Rational]) -> Option<QVector> {
        cone_contains(&self.as_vcone(), x)
    }

    /// Indices (into the interior walls) whose class spans an extremal ray.
    /// A class is extremal iff it is nonzero and not in the cone spanned by
    /// the classes not proportional to it.
    pub fn extremal_walls(&self) -> Result<Vec<usize>, MoriError> {
        if !self.is_pointed() {
            return Err(MoriError::MoriConeNotPointed);
        }
        let mut out = Vec::new();
        for (i, c) in self.classes.iter().enumerate() {
            if is_zero_vec(c) {
                continue;
            }
            let others: Vec<QVector> = self
                .classes
                .iter()
                .filter(|d| !is_zero_vec(d) && !positively_proportional(c, d))
                .cloned()
                .collect();
            if others.is_empty() || cone_contains(&VCone::new(others, self.dim), c).is_none() {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// One representative class per extremal ray, in wall order.
    pub fn extremal_rays(&self) -> Result<Vec<QVector>, MoriError> {
        let mut rays: Vec<QVector> = Vec::new();
        for i in self.extremal_walls()? {
            let c = &self.classes[i];
            if !rays.iter().any(|r| positively_proportional(r, c)) {
                rays.push(c.clone());
            }
        }
        Ok(rays)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::exactla::scalar::{int, qvec};
    use std::sync::Arc;

    #[test]
    fn square_wall_relation() {
        let f = corpus::ex21();
        let wall = f.wall_by_rays(&RaySet::new([2, 4])).unwrap();
        let r = wall_relation(&f, wall).unwrap();
        assert!(r.holds(&f));
        let expected = qvec(&[0, 1, -1, 1, -1]);
        assert!(positively_proportional(&r.0, &expected));
        assert_eq!(r.positive_support(), RaySet::new([1, 3]));
    }

    #[test]
    fn class_identities() {
        let f = Arc::new(corpus::ex21());
        let b = PLBasis::new(&f);
        let cls = |a: usize, c: usize| {
            let w = f.wall_by_rays(&RaySet::new([a, c])).unwrap();
            curve_class(&b, &wall_relation(&f, w).unwrap())
        };
        let t01 = cls(0, 1);
        let t12 = cls(1, 2);
        let t02 = cls(0, 2);
        let t24 = cls(2, 4);
        assert!(positively_proportional(&t12, &scale(&int(4), &t01)));
        let combo: QVector = t12.iter().zip(&t24).map(|(x, y)| int(2) * x + int(2) * y).collect();
        assert!(positively_proportional(&t02, &combo));
    }

    #[test]
    fn extremal_walls_of_ex21() {
        let f = Arc::new(corpus::ex21());
        let cone = MoriCone::new(&PLBasis::new(&f)).unwrap();
        let ext: Vec<RaySet> = cone
            .extremal_walls()
            .unwrap()
            .into_iter()
            .map(|i| f.interior_walls()[i].rays.clone())
            .collect();
        assert_eq!(ext.len(), 7);
        assert!(!ext.contains(&RaySet::new([0, 2])));
        assert!(!ext.contains(&RaySet::new([0, 4])));
        assert_eq!(cone.extremal_rays().unwrap().len(), 2);
    }

    #[test]
    fn fulton_mori_cone_has_lines() {
        let f = Arc::new(corpus::fulton());
        let cone = MoriCone::new(&PLBasis::new(&f)).unwrap();
        assert!(!cone.is_pointed());
        assert!(!cone.lineality().is_empty());
        assert_eq!(cone.extremal_walls(), Err(MoriError::MoriConeNotPointed));
    }

    #[test]
    fn non_simplicial_wall_choices_agree() {
        let f = Arc::new(corpus::ex31());
        let b = PLBasis::new(&f);
        for wall in f.interior_walls() {
            let classes: Vec<QVector> = admissible_wall_relations(&f, wall)
                .iter()
                .map(|r| curve_class(&b, r))
                .collect();
            assert!(!classes.is_empty());
            for c in &classes {
                assert!(positively_proportional(c, &classes[0]));
            }
        }
    }
}
