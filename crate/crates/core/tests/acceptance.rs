//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary is printed even when
//! everything passes.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fanforge::corpus;
use fanforge::exactla::linalg::proportionality;
use fanforge::exactla::scalar::{int, qvec, ratio};
use fanforge::exactla::{cones_equal, Cone, HCone};
use fanforge::plfun::{wall_functional_row, PLBasis};
use fanforge::primcoll::{
    batyrev_primitive_collections, classify_type, enumerate_primitive_collections, nef_description,
    primitive_inequality_cone, primitive_relation, single_inequality_sufficiency, CollectionType,
    PrimitiveCollection,
};
use fanforge::refine::{simplicial_refinement, supported_refinement};
use fanforge::theorems::{check_theorem, FanContext, TheoremId, TheoremReport, Verdict};
use fanforge::{Fan, QVector, RaySet, Rational};
use num_traits::Signed;

type Check = Result<String, String>;

/// A primitive collection and the right-hand side of its relation.
type Listed<'a> = (&'a [usize], &'a [(usize, i64)]);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn sets(fan: &Fan) -> Vec<RaySet> {
    enumerate_primitive_collections(fan).into_iter().map(|p| p.rays).collect()
}

fn set(v: &[usize]) -> RaySet {
    RaySet::new(v.iter().copied())
}

fn sorted_cones(fan: &Fan) -> Vec<Vec<usize>> {
    let mut c = fan.max_cone_lists();
    c.sort();
    c
}

/// Class of the wall spanned by rays `a` and `b`.
fn wall_class(ctx: &FanContext, a: usize, b: usize) -> Result<QVector, String> {
    let walls = ctx.fan.interior_walls();
    let k = walls.iter().position(|w| w.rays == set(&[a, b])).ok_or(format!("no interior wall {{{a},{b}}}"))?;
    Ok(ctx.mori.classes[k].clone())
}

fn positively_proportional(x: &[Rational], y: &[Rational]) -> bool {
    proportionality(x, y).is_some_and(|f| f.is_positive())
}

fn relation_matches(fan: &Fan, p: &[usize], rhs: &[(usize, Rational)]) -> Result<(), String> {
    let pc = PrimitiveCollection { rays: set(p) };
    let rel = primitive_relation(fan, &pc);
    let got: Vec<(usize, Rational)> = rel.support.iter().zip(rel.b.iter().cloned()).collect();
    let mut want = rhs.to_vec();
    want.sort_by_key(|(i, _)| *i);
    ensure!(got == want, "relation of {:?}: got {}", p, rel.equation());
    Ok(())
}

fn criterion_1() -> Check {
    let fan = Arc::new(corpus::ex21());
    ensure!(sets(&fan) == vec![set(&[0, 2, 4]), set(&[1, 3])], "collections {:?}", sets(&fan));
    relation_matches(&fan, &[1, 3], &[(2, int(1)), (4, int(1))])?;
    relation_matches(&fan, &[0, 2, 4], &[(2, ratio(1, 2)), (4, ratio(1, 2))])?;

    let basis = PLBasis::new(&fan);
    let nef = nef_description(&basis);
    let rows: Vec<QVector> = nef.primitive.iter().map(|(_, r)| r.clone()).collect();
    ensure!(rows == vec![qvec(&[2, 0, 1, 0, 1]), qvec(&[0, 1, -1, 1, -1])], "primitive rows {rows:?}");
    ensure!(nef.implied_equalities.is_empty(), "unexpected equalities");
    ensure!(nef.reduced_inequalities.len() == 2, "expected 2 irredundant inequalities");
    let walls = HCone::new(
        fan.interior_walls().iter().map(|w| wall_functional_row(&fan, w)).collect(),
        basis.equalities().to_vec(),
        fan.num_rays(),
    );
    ensure!(
        cones_equal(&Cone::H(walls), &Cone::H(primitive_inequality_cone(&basis))).unwrap(),
        "primitive inequalities do not cut out the convex functions"
    );
    ensure!(fan.interior_walls().len() == 9, "{} interior walls", fan.interior_walls().len());

    // Identities between wall classes hold up to a positive scalar; the
    // classes here come from primitive integer wall relations.
    let ctx = FanContext::new("ex21", fan.clone());
    let t = |a, b| wall_class(&ctx, a, b);
    let t12 = t(1, 2)?;
    for (a, b) in [(3, 4), (2, 3), (1, 4), (0, 1), (0, 3)] {
        ensure!(positively_proportional(&t(a, b)?, &t12), "tau_{{{a},{b}}} is not a positive multiple of tau_{{1,2}}");
    }
    let combo: QVector = t12.iter().zip(&t(2, 4)?).map(|(x, y)| int(2) * x + int(2) * y).collect();
    for (a, b) in [(0, 2), (0, 4)] {
        ensure!(positively_proportional(&t(a, b)?, &combo), "tau_{{{a},{b}}} is not a positive multiple of 2 tau_{{1,2}} + 2 tau_{{2,4}}");
    }
    let extremal = ctx.extremal_walls.clone().ok_or("Mori cone not pointed")?;
    let mut directions: Vec<QVector> = Vec::new();
    for w in extremal {
        let c = &ctx.mori.classes[w];
        if !directions.iter().any(|d| positively_proportional(d, c)) {
            directions.push(c.clone());
        }
    }
    ensure!(directions.len() == 2, "{} extremal directions", directions.len());
    for c in &ctx.primitive_classes {
        ensure!(
            directions.iter().any(|d| positively_proportional(d, c)),
            "a primitive class spans no extremal ray"
        );
    }
    Ok("2 collections, 2 relations, 2 nef inequalities, 9 walls, wall identities hold up to scale, 2 extremal rays".into())
}

fn criterion_2() -> Check {
    for r in 4..=10 {
        let fan = corpus::ex22(r).ok_or(format!("no polygon fan with {r} rays"))?;
        let ps = sets(&fan);
        ensure!(ps.len() == r * (r - 3) / 2, "r = {r}: {} collections", ps.len());
        for p in &ps {
            ensure!(p.len() == 2 && !fan.is_cone(p), "r = {r}: {p} is not a non-adjacent pair");
        }
    }
    Ok("r(r-3)/2 non-adjacent pairs for r = 4..10".into())
}

fn criterion_3() -> Check {
    let fan = Arc::new(corpus::ex31());
    ensure!(sets(&fan) == vec![set(&[0, 1, 3]), set(&[0, 2, 4])], "collections {:?}", sets(&fan));
    ensure!(batyrev_primitive_collections(&fan).is_empty(), "Batyrev enumeration is not empty");

    // {ρ2,ρ4} is not primitive here, so it goes through the general
    // refinement; the primitive {ρ0,ρ2,ρ4} forces the same diagonal.
    let ex21 = corpus::ex21();
    let by_set = simplicial_refinement(&fan, &set(&[2, 4]), 0).map_err(|e| e.to_string())?;
    let p2 = PrimitiveCollection { rays: set(&[0, 2, 4]) };
    let r = supported_refinement(&fan, &p2, 0).map_err(|e| e.to_string())?;
    for fine in [&by_set.fine, &r.fine] {
        ensure!(fine.rays() == ex21.rays(), "refinement changed rays");
        ensure!(sorted_cones(fine) == sorted_cones(&ex21), "refinement is not the simplicial example");
    }

    for q in enumerate_primitive_collections(&r.fine) {
        let ty = classify_type(&q, &r.fine, &fan).map_err(|e| e.to_string())?;
        let want = if q.rays == set(&[1, 3]) { CollectionType::A } else { CollectionType::B };
        ensure!(ty == want, "{} classified as {:?}", q.rays, ty);
    }

    let ctx = FanContext::new("ex31", fan.clone());
    let main = &check_theorem(&ctx, TheoremId::MainTheorem, 0)[0];
    ensure!(main.verdict == Verdict::Holds, "main theorem: {:?}", main.verdict);
    let single = single_inequality_sufficiency(&ctx.basis);
    ensure!(single.len() == 2 && single.iter().all(|(_, ok)| *ok), "single inequalities: {single:?}");
    Ok("Batyrev list empty, refinement reproduces the simplicial example, types A/B, each inequality suffices".into())
}

fn criterion_4() -> Check {
    let fan = Arc::new(corpus::fulton());
    // One-based labels as usually written: P and the right-hand side.
    let listed: [Listed; 7] = [
        (&[2, 4], &[(7, 1)]),
        (&[1, 4], &[(6, 1)]),
        (&[2, 5], &[(3, 1), (7, 1)]),
        (&[3, 6], &[(1, 1), (5, 1)]),
        (&[3, 4], &[(5, 1)]),
        (&[1, 7], &[(2, 1), (6, 1)]),
        (&[5, 6, 7], &[(4, 2)]),
    ];
    let mut want: Vec<RaySet> = listed.iter().map(|(p, _)| RaySet::new(p.iter().map(|i| i - 1))).collect();
    want.sort();
    ensure!(sets(&fan) == want, "collections {:?}", sets(&fan));
    for (p, rhs) in listed {
        let p0: Vec<usize> = p.iter().map(|i| i - 1).collect();
        let rhs0: Vec<(usize, Rational)> = rhs.iter().map(|&(i, c)| (i - 1, int(c))).collect();
        relation_matches(&fan, &p0, &rhs0)?;
    }

    let ctx = FanContext::new("fulton", fan.clone());
    ensure!(ctx.basis.dim_pic() == 4, "dim Pic = {}", ctx.basis.dim_pic());
    ensure!(!ctx.is_quasi_projective(), "reported quasi-projective");

    let nef = nef_description(&ctx.basis);
    ensure!(nef.pinned == vec![0, 1, 2], "pinned {:?}", nef.pinned);
    ensure!(nef.implied_equalities.len() == 3, "{} equalities", nef.implied_equalities.len());
    // a = value on the fourth ray, b = common value on the last three.
    let a = |ca: i64, cb: i64| qvec(&[0, 0, 0, ca, cb, 0, 0]);
    let expected = HCone::new(
        vec![a(1, -1), a(-2, 3)],
        vec![
            qvec(&[1, 0, 0, 0, 0, 0, 0]),
            qvec(&[0, 1, 0, 0, 0, 0, 0]),
            qvec(&[0, 0, 1, 0, 0, 0, 0]),
            qvec(&[0, 0, 0, 0, 1, -1, 0]),
            qvec(&[0, 0, 0, 0, 1, 0, -1]),
        ],
        7,
    );
    let mut prim = primitive_inequality_cone(&ctx.basis);
    prim.equalities.extend((0..3).map(|i| fanforge::exactla::linalg::unit(7, i)));
    ensure!(cones_equal(&Cone::H(prim), &Cone::H(expected)).unwrap(), "normalized cone is not {{a >= b, 3b >= 2a}}");
    let reduced: Vec<QVector> = nef.reduced_inequalities.iter().map(|(r, _)| r.clone()).collect();
    ensure!(reduced == vec![a(1, -1), a(-2, 3)], "reduced rows {reduced:?}");

    let main = &check_theorem(&ctx, TheoremId::MainTheorem, 0)[0];
    ensure!(main.verdict == Verdict::Evidence, "main theorem: {:?}", main.verdict);
    Ok("7 relations verbatim, dim Pic 4, not quasi-projective, a >= b and 3b >= 2a with 3 equalities".into())
}

struct Corpus {
    contexts: Vec<FanContext>,
    build: Duration,
}

fn build_corpus() -> Corpus {
    let start = Instant::now();
    let contexts = corpus::random_corpus(7, 100)
        .into_iter()
        .map(|(name, fan)| FanContext::new(&name, Arc::new(fan)))
        .collect();
    Corpus { contexts, build: start.elapsed() }
}

fn run_theorems(c: &Corpus, theorems: &[TheoremId]) -> Vec<TheoremReport> {
    c.contexts.iter().flat_map(|ctx| theorems.iter().flat_map(move |&t| check_theorem(ctx, t, 7))).collect()
}

fn failures(reports: &[TheoremReport]) -> Result<(), String> {
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed() || !r.certificates_verify())
        .map(|r| format!("{} on {}: {:?}", r.theorem, r.fan, r.verdict))
        .collect();
    ensure!(bad.is_empty(), "{} failing reports, first: {}", bad.len(), bad[0]);
    Ok(())
}

fn count(reports: &[TheoremReport], t: TheoremId, pred: impl Fn(&Verdict) -> bool) -> usize {
    reports.iter().filter(|r| r.theorem == t && pred(&r.verdict)).count()
}

fn criterion_5(c: &Corpus) -> Check {
    let n = c.contexts.len();
    let simplicial = c.contexts.iter().filter(|x| x.fan.is_simplicial()).count();
    let qp = c.contexts.iter().filter(|x| x.is_quasi_projective()).count();
    let dims: Vec<usize> = c.contexts.iter().map(|x| x.fan.dim()).collect();
    ensure!(n >= 100, "only {n} fans");
    ensure!(simplicial > 0 && simplicial < n, "need simplicial and non-simplicial fans");
    ensure!(dims.contains(&2) && dims.contains(&3), "need dimensions 2 and 3");

    let reports = run_theorems(
        c,
        &[
            TheoremId::PrimitiveStructure,
            TheoremId::PrimitiveInMori,
            TheoremId::MainTheorem,
            TheoremId::ExtremalPrimitive,
            TheoremId::ReidConditions,
        ],
    );
    failures(&reports)?;
    let holds = |v: &Verdict| *v == Verdict::Holds;
    ensure!(count(&reports, TheoremId::MainTheorem, holds) == qp, "main theorem must hold on every quasi-projective fan");
    ensure!(count(&reports, TheoremId::ExtremalPrimitive, holds) == qp, "extremal walls must be primitive on every quasi-projective fan");
    let in_mori = reports.iter().filter(|r| r.theorem == TheoremId::PrimitiveInMori);
    ensure!(in_mori.clone().all(|r| !r.certificates.is_empty()), "missing Mori membership certificates");
    Ok(format!(
        "{n} fans ({simplicial} simplicial, {qp} quasi-projective), {} Reid checks",
        count(&reports, TheoremId::ReidConditions, holds)
    ))
}

fn criterion_6(c: &Corpus) -> Check {
    let reports = run_theorems(c, &[TheoremId::Refinement, TheoremId::TypeADescription]);
    failures(&reports)?;
    let qp_variants = reports.iter().filter(|r| r.notes.iter().any(|n| n.starts_with("quasi-projective variant"))).count();
    Ok(format!("{} refinements checked, {qp_variants} quasi-projective variants", c.contexts.len()))
}

fn criterion_7(c: &Corpus) -> Check {
    let reports = run_theorems(c, &[TheoremId::ConvexityOracle, TheoremId::EnumerationOracle]);
    failures(&reports)?;
    let small = c.contexts.iter().filter(|x| x.fan.num_rays() <= 9).count();
    let enumerated = count(&reports, TheoremId::EnumerationOracle, |v| *v == Verdict::Holds);
    ensure!(enumerated >= small, "naive enumeration skipped on a fan with at most 9 rays");
    Ok(format!("convexity agrees on {} fans, enumeration agrees on {enumerated} fans", c.contexts.len()))
}

fn report(k: usize, title: &str, budget: Duration, run: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
        Err(e) => (false, e),
    };
    println!(
        "criterion {k}: {}  {title}  ({:.2}s)  {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= report(1, "simplicial example end-to-end", secs(1), criterion_1);
    ok &= report(2, "polygon fans", secs(1), criterion_2);
    ok &= report(3, "non-simplicial example", secs(1), criterion_3);
    ok &= report(4, "non-projective smooth fan", secs(2), criterion_4);
    let corpus = build_corpus();
    let build = corpus.build;
    // Shared per-fan data is charged to the first suite that uses it.
    ok &= report(5, "property suite over random fans", secs(60).saturating_sub(build), || criterion_5(&corpus));
    ok &= report(6, "refinement suite", secs(60), || criterion_6(&corpus));
    ok &= report(7, "oracle cross-checks", secs(60), || criterion_7(&corpus));
    println!("shared fan data built in {:.2}s", build.as_secs_f64());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
