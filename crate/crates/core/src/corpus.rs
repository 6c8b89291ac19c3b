//! Built-in example fans.

use std::cmp::Ordering;

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fan::{Fan, FanError, RaySet};

/// Names accepted by [`builtin`]; `ex22` takes a ray count, e.g. `ex22(6)`.
pub const BUILTIN_NAMES: &[&str] = &["ex21", "ex22(r)", "ex31", "fulton"];

/// Rays shared by the simplicial five-ray fan and its non-simplicial
/// coarsening: the apex `ρ0` below and the square `ρ1..ρ4` above.
fn five_rays() -> Vec<Vec<i64>> {
    vec![
        vec![0, 0, -1],
        vec![1, 1, 1],
        vec![1, -1, 1],
        vec![-1, -1, 1],
        vec![-1, 1, 1],
    ]
}

/// Complete simplicial fan in dimension 3 with five rays: the square
/// pyramid subdivided along `Cone(ρ2,ρ4)`.
pub fn ex21() -> Fan {
    Fan::new(
        3,
        five_rays(),
        vec![
            vec![0, 1, 2],
            vec![0, 2, 3],
            vec![0, 3, 4],
            vec![0, 4, 1],
            vec![1, 2, 4],
            vec![2, 3, 4],
        ],
    )
    .expect("built-in fan is valid")
}

/// The same rays with the square cone `Cone(ρ1,ρ2,ρ3,ρ4)` left whole.
pub fn ex31() -> Fan {
    Fan::new(
        3,
        five_rays(),
        vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 4], vec![0, 4, 1], vec![1, 2, 3, 4]],
    )
    .expect("built-in fan is valid")
}

/// Complete smooth fan in dimension 3 with seven rays that admits no
/// strictly convex support function. Ray `i` here is `ρ_{i+1}` in the
/// usual 1-based labelling.
pub fn fulton() -> Fan {
    let rays = vec![
        vec![-1, 0, 0],
        vec![0, -1, 0],
        vec![0, 0, -1],
        vec![1, 1, 1],
        vec![1, 1, 0],
        vec![0, 1, 1],
        vec![1, 0, 1],
    ];
    let one_based = [
        [1, 2, 3],
        [1, 2, 6],
        [1, 3, 5],
        [1, 5, 6],
        [2, 3, 7],
        [2, 6, 7],
        [3, 5, 7],
        [4, 5, 6],
        [4, 5, 7],
        [4, 6, 7],
    ];
    let cones = one_based.iter().map(|c| c.iter().map(|i| i - 1).collect()).collect();
    Fan::new(3, rays, cones).expect("built-in fan is valid")
}

/// Ray pool for the complete planar fans, in insertion order.
const POLYGON_POOL: [[i64; 2]; 12] = [
    [1, 0],
    [0, 1],
    [-1, 0],
    [0, -1],
    [1, 1],
    [-1, -1],
    [-1, 1],
    [1, -1],
    [2, 1],
    [-2, -1],
    [1, 2],
    [-1, -2],
];

/// Counterclockwise angular order starting at the positive x-axis, exact.
pub fn angular_cmp(a: &[i64], b: &[i64]) -> Ordering {
    let half = |v: &[i64]| if v[1] > 0 || (v[1] == 0 && v[0] > 0) { 0 } else { 1 };
    half(a)
        .cmp(&half(b))
        .then_with(|| 0.cmp(&(a[0] * b[1] - a[1] * b[0])))
}

/// Complete planar fan whose rays are taken in the given order by angle.
pub fn planar_fan(mut rays: Vec<Vec<i64>>) -> Result<Fan, FanError> {
    rays.sort_by(|a, b| angular_cmp(a, b));
    let r = rays.len();
    let cones = (0..r).map(|i| vec![i, (i + 1) % r]).collect();
    Fan::new(2, rays, cones)
}

/// Complete planar fan with `r` rays, `4 ≤ r ≤ 12`. For `r = 6` this is the
/// hexagon fan.
pub fn ex22(r: usize) -> Option<Fan> {
    if !(4..=12).contains(&r) {
        return None;
    }
    let rays = POLYGON_POOL[..r].iter().map(|v| v.to_vec()).collect();
    Some(planar_fan(rays).expect("built-in fan is valid"))
}

/// Looks up a built-in fan by name: `ex21`, `ex31`, `fulton`, `ex22(r)` or
/// `ex22:r`.
pub fn builtin(name: &str) -> Option<Fan> {
    match name.trim() {
        "ex21" => Some(ex21()),
        "ex31" | "nonsimpl" => Some(ex31()),
        "fulton" => Some(fulton()),
        other => {
            let rest = other.strip_prefix("ex22")?;
            let arg = rest
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .or_else(|| rest.strip_prefix(':'))?;
            ex22(arg.trim().parse().ok()?)
        }
    }
}

/// Named fans used by the verification suite.
pub fn builtin_corpus() -> Vec<(String, Fan)> {
    let mut out = vec![
        ("ex21".to_string(), ex21()),
        ("ex31".to_string(), ex31()),
        ("fulton".to_string(), fulton()),
    ];
    for r in 4..=10 {
        out.push((format!("ex22({r})"), ex22(r).expect("in range")));
    }
    out
}

/// Stellar subdivision of `fan` at `v = Σ coeffs[k]·ρ_k` over the rays of
/// the face `face` (all coefficients positive, so `v` is in its relative
/// interior). Every maximal cone containing the face is replaced by the
/// cones over `v` and its facets not containing the face.
pub fn star_subdivision(fan: &Fan, face: usize, coeffs: &[i64]) -> Result<Fan, FanError> {
    let face_rays = &fan.faces()[face].ray_indices;
    assert_eq!(face_rays.len(), coeffs.len(), "one coefficient per ray of the face");
    assert!(coeffs.iter().all(|&c| c > 0), "coefficients must be positive");
    let mut v = vec![0i64; fan.dim()];
    for (i, &c) in face_rays.iter().zip(coeffs) {
        for (x, r) in v.iter_mut().zip(&fan.rays()[i]) {
            *x += c * r;
        }
    }
    let g = v.iter().fold(0i64, |g, x| g.gcd(x));
    let v: Vec<i64> = v.iter().map(|x| x / g).collect();
    let new = fan.num_rays();
    let mut rays = fan.rays().to_vec();
    rays.push(v);
    let mut cones = Vec::new();
    for cone in fan.max_cones() {
        if !face_rays.is_subset(&cone.ray_indices) {
            cones.push(cone.ray_indices.as_slice().to_vec());
            continue;
        }
        for facet in &cone.facet_rays {
            if !face_rays.is_subset(facet) {
                cones.push(facet.union(&RaySet::new([new])).as_slice().to_vec());
            }
        }
    }
    Fan::new(fan.dim(), rays, cones)
}

/// Face fan of the octahedron: the eight coordinate orthants.
pub fn cross_polytope_fan() -> Fan {
    let rays = vec![vec![1, 0, 0], vec![-1, 0, 0], vec![0, 1, 0], vec![0, -1, 0], vec![0, 0, 1], vec![0, 0, -1]];
    let mut cones = Vec::new();
    for x in 0..2 {
        for y in 2..4 {
            for z in 4..6 {
                cones.push(vec![x, y, z]);
            }
        }
    }
    Fan::new(3, rays, cones).expect("built-in fan is valid")
}

/// Face fan of the cube `[-1,1]^3`: six cones over squares.
pub fn cube_fan() -> Fan {
    let mut rays = Vec::new();
    for x in [1, -1] {
        for y in [1, -1] {
            for z in [1, -1] {
                rays.push(vec![x, y, z]);
            }
        }
    }
    let mut cones = Vec::new();
    for axis in 0..3 {
        for sign in [1, -1] {
            cones.push(rays.iter().enumerate().filter(|(_, r)| r[axis] == sign).map(|(i, _)| i).collect());
        }
    }
    Fan::new(3, rays, cones).expect("built-in fan is valid")
}

/// Applies `steps` random stellar subdivisions at faces of dimension at
/// least 2, with coefficients in `1..=2`.
fn random_stars(mut fan: Fan, steps: usize, rng: &mut ChaCha8Rng) -> Fan {
    for _ in 0..steps {
        let candidates: Vec<usize> = (0..fan.faces().len()).filter(|&f| fan.faces()[f].dim >= 2).collect();
        let face = *candidates.choose(rng).expect("complete fans have faces of dimension 2");
        let k = fan.faces()[face].ray_indices.len();
        let coeffs: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=2)).collect();
        fan = star_subdivision(&fan, face, &coeffs).expect("stellar subdivisions of fans are fans");
    }
    fan
}

/// One seeded random complete fan in dimension 2 or 3; simplicial or not
/// depending on the base (`index % 5` cycles through planar, octahedron,
/// cube, cube and the seven-ray smooth fan).
pub fn random_fan(seed: u64, index: usize) -> (String, Fan) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64));
    let (base, fan, steps) = match index % 5 {
        0 => ("planar", ex22(4).expect("in range"), rng.gen_range(1..=5)),
        1 => ("octahedron", cross_polytope_fan(), rng.gen_range(0..=4)),
        2 => ("cube", cube_fan(), rng.gen_range(0..=2)),
        3 => ("cube", cube_fan(), rng.gen_range(1..=3)),
        _ => ("fulton", fulton(), rng.gen_range(1..=2)),
    };
    let fan = random_stars(fan, steps, &mut rng);
    (format!("random{index}({base}+{steps})"), fan)
}

/// `count` seeded random fans.
pub fn random_corpus(seed: u64, count: usize) -> Vec<(String, Fan)> {
    (0..count).map(|i| random_fan(seed, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        let f = ex21();
        assert!(f.is_simplicial() && f.is_complete());
        assert_eq!(f.interior_walls().len(), 9);
        let g = ex31();
        assert!(!g.is_simplicial() && g.is_complete());
        let h = fulton();
        assert!(h.is_simplicial() && h.is_complete());
        assert_eq!(h.interior_walls().len(), 15);
        assert_eq!(h.max_cones().len(), 10);
    }

    #[test]
    fn polygon_fans() {
        for r in 4..=12 {
            let f = ex22(r).unwrap();
            assert_eq!(f.num_rays(), r);
            assert_eq!(f.interior_walls().len(), r);
        }
        assert_eq!(ex22(6).unwrap().rays()[1], vec![1, 1]);
        assert!(ex22(3).is_none());
    }

    #[test]
    fn stellar_subdivision_of_square() {
        let cube = cube_fan();
        assert!(!cube.is_simplicial() && cube.is_complete());
        let square = cube.face_of(&cube.max_cones()[0].ray_indices).unwrap();
        let f = star_subdivision(&cube, square, &[1, 1, 1, 1]).unwrap();
        assert_eq!(f.rays()[8], vec![1, 0, 0]);
        assert_eq!(f.max_cones().len(), 9);
    }

    #[test]
    fn random_fans_are_deterministic() {
        let a = random_corpus(11, 10);
        let b = random_corpus(11, 10);
        assert_eq!(a, b);
        for (_, f) in &a {
            assert!(f.is_complete());
            assert!(f.num_rays() <= 11);
        }
        assert!(a.iter().any(|(_, f)| !f.is_simplicial()));
    }

    #[test]
    fn name_lookup() {
        assert_eq!(builtin("ex22(6)"), ex22(6));
        assert_eq!(builtin("ex22:6"), ex22(6));
        assert!(builtin("ex23").is_none());
        assert!(builtin("ex22(x)").is_none());
    }
}
