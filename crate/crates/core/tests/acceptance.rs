//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use syndetic_core::dynamics::{coloring_violation, witness_shift_check};
use syndetic_core::group::CayleyTable;
use syndetic_core::repro::{figure_grids, k_star_table, KSTAR_WINDOW};
use syndetic_core::strong::{
    assign_skip_maps, build_scs_certificate, scs_falsify, standard_cells, verify_scs_certificate, Epsilon, Multiset,
};
use syndetic_core::symmetric::{dense_orbit_finite_exact, dense_orbit_via_symmetric, DenseOrbitMethod};
use syndetic_core::syndetic::{
    check_witness, decide_n_syndetic, direct_cover, direct_thick, intersection_criterion, partition_criterion,
};
use syndetic_core::{
    Certificate, GroupElement, GroupModel, Request, RunConfig, Scope, SetExpr, SetSpec, Subset, Verdict, Word,
};

/// Wall-clock budget per criterion.
const MAX_SECONDS: f64 = 60.0;
/// Required agreement rate for the equivalence and duality suites.
const REQUIRED_AGREEMENT: f64 = 1.0;
const EQUIVALENCE_MAX_MODULUS: u64 = 8;
const EQUIVALENCE_MAX_N_PERIODIC: usize = 3;
const EQUIVALENCE_MAX_ORDER: usize = 6;
const EQUIVALENCE_MAX_N_FINITE: usize = 2;
const DUALITY_SAMPLES: usize = 1000;
const DUALITY_MAX_MODULUS: u64 = 12;
const DUALITY_MAX_N: usize = 3;
/// Least gap bounds for the powers-of-two complement on `[1, 2^20]`, from an
/// independent brute-force scan.
const EXPECTED_K_STAR: [u32; 5] = [1, 4, 5, 8, 9];
const SCS_EPSILONS: [&str; 2] = ["1/4", "1/6"];
const SCS_SUPPORT_RADIUS: u32 = 4;
const SCS_MAX_SIZE: u32 = 12;
const SCS_MAX_MULT: u32 = 4;
const AMENABILITY_MAX_MODULUS: u64 = 6;
const DENSE_WINDOW: u64 = 1 << 20;
const COLORING_RADIUS: u32 = 2;
const SHIFT_RADIUS: u32 = 4;

type Outcome = Result<String, String>;

fn cfg() -> RunConfig {
    RunConfig::default()
}

fn ints(xs: impl IntoIterator<Item = i64>) -> Vec<GroupElement> {
    xs.into_iter().map(GroupElement::Int).collect()
}

fn word(s: &str) -> GroupElement {
    GroupElement::Word(s.parse::<Word>().unwrap())
}

fn z_spec(expr: SetExpr) -> SetSpec {
    SetSpec { group: "z".into(), expr }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(req: &Request) -> Result<syndetic_core::DecisionReport, String> {
    req.execute(&cfg()).map_err(|e| format!("{}: {e}", req.command()))
}

fn c1_fig1() -> Outcome {
    let set = z_spec(SetExpr::multiples(2));
    let one = run(&Request::CheckNsyndetic { set: set.clone(), n: 1 })?;
    ensure(one.verdict == Verdict::Proved && one.scope == Scope::Exact, || format!("n=1: {}", one.verdict))?;
    let Some(Certificate::Syndetic(w)) = &one.certificate else { return Err("n=1: no witness".into()) };
    ensure(w.f == ints([0, 1]), || format!("n=1 witness {:?}", w.f))?;
    let two = run(&Request::CheckNsyndetic { set: set.clone(), n: 2 })?;
    ensure(two.verdict == Verdict::Refuted && two.scope == Scope::Exact, || format!("n=2: {}", two.verdict))?;
    let Some(Certificate::ThickRefutation(t)) = &two.certificate else { return Err("n=2: no tuple".into()) };
    let a = Subset::from_spec(&set).unwrap();
    ensure(t.replay(&a).unwrap(), || "refutation tuple does not replay".into())?;
    Ok(format!(
        "F = {{0,1}}; 2-syndetic refuted by tuple ({}) against F = {{{}}}",
        t.tuple.iter().join(","),
        t.against.iter().join(",")
    ))
}

fn c2_fig2() -> Outcome {
    let mut lines = Vec::new();
    for n in 3..=5u64 {
        let set = z_spec(SetExpr::non_multiples(n));
        let a = Subset::from_spec(&set).unwrap();
        let prev = run(&Request::CheckNsyndetic { set: set.clone(), n: n as usize - 1 })?;
        ensure(prev.verdict == Verdict::Proved && prev.scope.is_exact(), || format!("m={n}: (n-1) {}", prev.verdict))?;
        let Some(Certificate::Syndetic(w)) = &prev.certificate else { return Err(format!("m={n}: no witness")) };
        ensure(w.f == ints(0..n as i64), || format!("m={n}: witness {:?}", w.f))?;
        let at = run(&Request::CheckNsyndetic { set, n: n as usize })?;
        ensure(at.verdict == Verdict::Refuted && at.scope.is_exact(), || format!("m={n}: n {}", at.verdict))?;
        let Some(Certificate::ThickRefutation(t)) = &at.certificate else { return Err(format!("m={n}: no tuple")) };
        ensure(t.replay(&a).unwrap(), || format!("m={n}: tuple does not replay"))?;
        lines.push(format!("m={n}: F={{0..{}}}", n - 1));
    }
    Ok(lines.join("; "))
}

fn c3_pow2() -> Outcome {
    let table = k_star_table(EXPECTED_K_STAR.len(), &cfg()).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (row, &want) in table.iter().zip(&EXPECTED_K_STAR) {
        ensure(row.k_star == Some(want), || format!("n={}: k* = {:?}, expected {want}", row.n, row.k_star))?;
        parts.push(format!(
            "n={} k*={} 2^(n-1)+1={}{} 2^n+1={}{}",
            row.n,
            want,
            row.stated_k,
            if row.stated_k_passes { "(passes)" } else { "(fails)" },
            row.upper_k,
            if row.upper_k_passes { "(passes)" } else { "(fails)" },
        ));
    }
    Ok(format!("window [1,{KSTAR_WINDOW}]: {}", parts.join(", ")))
}

/// The four criteria for one `(A, n, F)`, with `F` in the orientation
/// `fK ⊆ A`.
fn four_criteria(a: &Subset, n: usize, f: &[GroupElement], coords: &[GroupElement]) -> [bool; 4] {
    let g = a.group();
    let cfg = cfg();
    let finv: Vec<GroupElement> = f.iter().map(|x| g.invert(x).unwrap()).collect();
    let cover = direct_cover(a, n, &finv, &cfg).unwrap();
    let lemma = check_witness(a, n, f, &cfg).unwrap().holds;
    let partition = partition_criterion(a, n, f, &cfg).unwrap().holds;
    let intersection = std::iter::repeat_n(coords.iter(), n).multi_cartesian_product().all(|k| {
        let kinv: Vec<GroupElement> = k.into_iter().map(|x| g.invert(x).unwrap()).collect();
        intersection_criterion(a, f, &kinv)
    });
    [cover, lemma, partition, intersection]
}

fn c4_equivalence() -> Outcome {
    let (mut total, mut agree) = (0u64, 0u64);
    let mut first_bad = None;
    let mut tally = |a: &Subset, n: usize, f: &[GroupElement], coords: &[GroupElement], label: String| {
        let r = four_criteria(a, n, f, coords);
        total += 1;
        if r.iter().all(|&x| x == r[0]) {
            agree += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!("{label}: {r:?}"));
        }
    };
    let z = GroupModel::integers();
    for m in 1..=EQUIVALENCE_MAX_MODULUS {
        let coords = ints(0..m as i64);
        for sel in 0u64..1 << m {
            let res: Vec<u64> = (0..m).filter(|r| sel >> r & 1 == 1).collect();
            let a = Subset::new(&z, &SetExpr::residue(m, &res)).unwrap();
            for n in 1..=EQUIVALENCE_MAX_N_PERIODIC {
                for len in 1..=m as i64 {
                    tally(&a, n, &ints(0..len), &coords, format!("m={m} {res:?} n={n} F=0..{len}"));
                }
            }
        }
    }
    let mut groups: Vec<CayleyTable> = (1..=EQUIVALENCE_MAX_ORDER).map(CayleyTable::cyclic).collect();
    groups.push(CayleyTable::symmetric3());
    for t in groups {
        let g = GroupModel::finite(t);
        let elems = g.ball(0).unwrap();
        let order = elems.len();
        for sel in 0u64..1 << order {
            let sub: Vec<GroupElement> = (0..order).filter(|i| sel >> i & 1 == 1).map(GroupElement::Index).collect();
            let a = Subset::new(&g, &SetExpr::FiniteWords { elements: sub }).unwrap();
            for n in 1..=EQUIVALENCE_MAX_N_FINITE {
                for len in 1..=order {
                    tally(&a, n, &elems[..len], &elems, format!("{} {sel:b} n={n} |F|={len}", g.spec_name()));
                }
            }
        }
    }
    let rate = agree as f64 / total as f64;
    ensure(rate >= REQUIRED_AGREEMENT, || {
        format!("{agree}/{total} agree; first disagreement {}", first_bad.clone().unwrap_or_default())
    })?;
    Ok(format!("{agree}/{total} instances agree across cover, fK-lemma, partition, intersection"))
}

/// Thickness by its definition on one period: some n-tuple `h` such that
/// every residue `f` has a coordinate with `f + hᵢ ∈ B`.
fn thick_by_definition(b: &[bool], n: usize) -> bool {
    let m = b.len();
    std::iter::repeat(0..m).take(n).multi_cartesian_product().any(|h| (0..m).all(|f| h.iter().any(|&x| b[(f + x) % m])))
}

fn c5_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg().seed);
    let z = GroupModel::integers();
    let (mut agree, mut first_bad) = (0usize, None);
    for i in 0..DUALITY_SAMPLES {
        let m = rng.gen_range(1..=DUALITY_MAX_MODULUS);
        let n = rng.gen_range(1..=DUALITY_MAX_N);
        let res: Vec<u64> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
        let a = Subset::new(&z, &SetExpr::residue(m, &res)).unwrap();
        let syndetic = decide_n_syndetic(&a, n, &cfg()).unwrap();
        let b = a.complement();
        let (thick, scope, _) = direct_thick(&b, n, &cfg()).unwrap();
        let bits: Vec<bool> = (0..m as i64).map(|x| b.contains(&GroupElement::Int(x))).collect();
        let oracle = thick_by_definition(&bits, n);
        let ok = syndetic.scope.is_exact()
            && scope.is_exact()
            && (syndetic.verdict == Verdict::Proved) == (thick == Verdict::Refuted)
            && (thick == Verdict::Proved) == oracle;
        if ok {
            agree += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!("sample {i}: m={m} {res:?} n={n}"));
        }
    }
    let rate = agree as f64 / DUALITY_SAMPLES as f64;
    ensure(rate >= REQUIRED_AGREEMENT, || {
        format!("{agree}/{DUALITY_SAMPLES}; {}", first_bad.clone().unwrap_or_default())
    })?;
    Ok(format!("{agree}/{DUALITY_SAMPLES} seeded periodic sets: n-syndetic(A) iff not 1/n-thick(A^c)"))
}

fn c6_scs() -> Outcome {
    let g = GroupModel::free(2).unwrap();
    let a = Subset::new(&g, &SetExpr::cylinder("a")).unwrap();
    let mut parts = Vec::new();
    for e in SCS_EPSILONS {
        let eps: Epsilon = e.parse().unwrap();
        let cert = build_scs_certificate(2, eps).map_err(|err| format!("eps={e}: {err}"))?;
        verify_scs_certificate(&cert).map_err(|err| format!("eps={e}: rejected: {err}"))?;
        let out = scs_falsify(&a, eps, &cert.f_elements(), SCS_SUPPORT_RADIUS, SCS_MAX_SIZE, SCS_MAX_MULT, &cfg())
            .map_err(|err| err.to_string())?;
        ensure(out.witness.is_none(), || format!("eps={e}: counterexample {:?}", out.witness))?;
        parts.push(format!(
            "eps={e}: {} cells, |F|={}, falsifier {} ({} types)",
            cert.cells.len(),
            cert.f.len(),
            if out.exhaustive { "exhaustive" } else { "heuristic" },
            out.types
        ));
    }
    let (cells, rem) = standard_cells(2, 1, 2);
    let literal = ["a", "ab"].map(|s| s.parse::<Word>().unwrap());
    let verdict = match assign_skip_maps(2, &cells, &rem, &literal) {
        Ok(_) => "accepted".to_string(),
        Err(e) => format!("rejected ({e})"),
    };
    parts.push(format!("literal F={{a,ab}} at n=2: {verdict}"));
    Ok(parts.join("; "))
}

fn c7_amenability() -> Outcome {
    let f2 = run(&Request::AmenabilityWitness {
        group: "f2".into(),
        epsilon: "1/4".parse().unwrap(),
        max_modulus: AMENABILITY_MAX_MODULUS,
    })?;
    ensure(f2.verdict == Verdict::Proved, || format!("f2: {}", f2.verdict))?;
    let Some(Certificate::Amenability(ev)) = &f2.certificate else { return Err("f2: no evidence".into()) };
    let g2 = GroupModel::free(2).unwrap();
    ensure(ev.replay(&g2).unwrap() && ev.certificates.len() == 2, || "f2: certificates do not replay".into())?;
    ensure(ev.set == Some(SetExpr::cylinder("a")) && ev.complement_subset == Some(SetExpr::cylinder("b")), || {
        format!("f2: pair {:?} / {:?}", ev.set, ev.complement_subset)
    })?;

    let z = run(&Request::AmenabilityWitness {
        group: "z".into(),
        epsilon: "1/4".parse().unwrap(),
        max_modulus: AMENABILITY_MAX_MODULUS,
    })?;
    let Some(Certificate::Amenability(zev)) = &z.certificate else { return Err("z: no evidence".into()) };
    let zg = GroupModel::integers();
    ensure(z.verdict != Verdict::Proved, || "z: a periodic pair survived".into())?;
    ensure(zev.replay(&zg).unwrap(), || "z: refutations do not replay".into())?;
    ensure(zev.refuted.len() as u64 == zev.candidates && zev.candidates > 0, || {
        format!("z: {} of {} candidates refuted", zev.refuted.len(), zev.candidates)
    })?;
    let even = Subset::new(&zg, &SetExpr::multiples(2)).unwrap();
    let k = Multiset::new([(GroupElement::Int(0), 1), (GroupElement::Int(1), 1)]);
    let eps: Epsilon = "1/4".parse().unwrap();
    let defeats = (-64..=64).all(|f| {
        let h = k.hits(&even, &GroupElement::Int(f)).unwrap();
        eps.falls_short(h, k.cardinality())
    });
    ensure(defeats, || "multiset {0,1} does not defeat 2Z".into())?;
    Ok(format!(
        "f2: (B_a, B_b) certified; z: {} periodic candidates with m <= {AMENABILITY_MAX_MODULUS} all falsified ({}); {{0,1}} defeats 2Z at eps=1/4",
        zev.candidates, z.verdict
    ))
}

fn c8_dense_finite() -> Outcome {
    let mut groups: Vec<CayleyTable> = (2..=8).map(CayleyTable::cyclic).collect();
    groups.extend([CayleyTable::symmetric3(), CayleyTable::dihedral(4), CayleyTable::quaternion()]);
    let (mut total, mut agree) = (0u64, 0u64);
    let mut first_bad = None;
    for t in groups {
        let g = GroupModel::finite(t);
        let order = g.order().unwrap();
        for sel in 0u64..1 << order {
            let sub: Vec<GroupElement> = (0..order).filter(|i| sel >> i & 1 == 1).map(GroupElement::Index).collect();
            let a = Subset::new(&g, &SetExpr::FiniteWords { elements: sub }).unwrap();
            let via_subgroups = dense_orbit_finite_exact(&a).unwrap().verdict;
            let via_symmetric = dense_orbit_via_symmetric(&a, &cfg()).unwrap().verdict;
            let whole = sel == (1u64 << order) - 1;
            let expected = if whole { Verdict::Proved } else { Verdict::Refuted };
            total += 1;
            if via_subgroups == expected && via_symmetric == expected {
                agree += 1;
            } else if first_bad.is_none() {
                first_bad = Some(format!("{} {sel:b}: {via_subgroups} / {via_symmetric}", g.spec_name()));
            }
        }
    }
    ensure(agree == total, || format!("{agree}/{total}; {}", first_bad.clone().unwrap_or_default()))?;
    Ok(format!("{agree}/{total} subsets of Z2..Z8, S3, D4, Q8: both oracles give dense orbit iff A = G"))
}

fn c9_dense_z() -> Outcome {
    let odd = run(&Request::DenseOrbit { set: z_spec(SetExpr::residue(2, &[1])) })?;
    ensure(odd.verdict == Verdict::Refuted, || format!("odd: {}", odd.verdict))?;
    let Some(Certificate::DenseOrbit(w)) = &odd.certificate else { return Err("odd: no witness".into()) };
    ensure(w.symmetric_subset == Some(SetExpr::multiples(2)), || format!("odd: B = {:?}", w.symmetric_subset))?;

    let mut c = cfg();
    c.int_window = DENSE_WINDOW;
    let pow =
        Request::DenseOrbit { set: z_spec(SetExpr::PowersOfTwoComplement) }.execute(&c).map_err(|e| e.to_string())?;
    ensure(pow.verdict == Verdict::Proved, || format!("pow2c: {}", pow.verdict))?;
    ensure(pow.scope == Scope::Window { radius: DENSE_WINDOW }, || format!("pow2c scope {}", pow.scope))?;
    let Some(Certificate::DenseOrbit(w)) = &pow.certificate else { return Err("pow2c: no witness".into()) };
    ensure(w.method == DenseOrbitMethod::GapSufficiency, || format!("pow2c method {:?}", w.method))?;
    Ok(format!("odd refuted via B = 2Z; pow2c accepted on window 2^20 with {} growing gaps", w.gaps.len()))
}

fn c10_coloring() -> Outcome {
    let req = Request::Coloring {
        set: SetSpec { group: "f2".into(), expr: SetExpr::cylinder("a") },
        n: 2,
        avoid: vec![word("b")],
        radius: COLORING_RADIUS,
    };
    let r = run(&req)?;
    ensure(r.verdict == Verdict::Proved, || format!("verdict {} {:?}", r.verdict, r.notes))?;
    ensure(r.scale.get("contained_in_a") == Some(&serde_json::json!(true)), || "union leaves A".into())?;
    let Some(Certificate::Coloring(c)) = &r.certificate else { return Err("no coloring".into()) };
    let g = GroupModel::free(2).unwrap();
    ensure(coloring_violation(&g, c).is_none(), || "pairwise disjointness fails".into())?;
    Ok(format!(
        "{} entries over ball({COLORING_RADIUS}); disjointness, containment and avoidance hold",
        c.entries.len()
    ))
}

fn c11_witness_shift() -> Outcome {
    let f2 = GroupModel::free(2).unwrap();
    let ba = Subset::new(&f2, &SetExpr::cylinder("a")).unwrap();
    let r = witness_shift_check(&ba, &[word("b")], true, SHIFT_RADIUS, &cfg()).map_err(|e| e.to_string())?;
    let Some(Certificate::Avoidance(ev)) = &r.certificate else { return Err("B_a: no evidence".into()) };
    ensure(ev.avoiding && ev.avoidance_scope == Scope::Exact, || "B_a: avoidance".into())?;
    ensure(ev.pairwise == Some(true), || format!("B_a: disjoint pair {:?}", ev.disjoint_pair))?;

    let even = Subset::new(&GroupModel::integers(), &SetExpr::multiples(2)).unwrap();
    let r2 = witness_shift_check(&even, &ints([1]), false, SHIFT_RADIUS, &cfg()).map_err(|e| e.to_string())?;
    let Some(Certificate::Avoidance(ev2)) = &r2.certificate else { return Err("2Z: no evidence".into()) };
    ensure(ev2.avoiding, || "2Z: not avoiding".into())?;
    ensure(ev2.two_syndetic == Some(Verdict::Refuted) && r2.verdict == Verdict::Refuted, || "2Z: not flagged".into())?;
    Ok(format!(
        "B_a with F={{b,B}}: exact avoidance, pairwise on ball({}) ({}); 2Z with F={{1}}: avoiding, not 2-syndetic",
        2 * SHIFT_RADIUS,
        r.verdict
    ))
}

/// Every request-driven criterion, run twice.
fn c12_determinism() -> Outcome {
    let f2 = |e: SetExpr| SetSpec { group: "f2".into(), expr: e };
    let requests = vec![
        Request::CheckNsyndetic { set: z_spec(SetExpr::multiples(2)), n: 2 },
        Request::CheckNsyndetic { set: z_spec(SetExpr::non_multiples(4)), n: 4 },
        Request::CheckThick { set: z_spec(SetExpr::multiples(3)), n: 2 },
        Request::CheckScs { set: z_spec(SetExpr::multiples(2)), epsilon: "1/4".parse().unwrap() },
        Request::BuildScsCert { rank: 2, epsilon: "1/6".parse().unwrap(), letter: 1 },
        Request::AmenabilityWitness { group: "z".into(), epsilon: "1/4".parse().unwrap(), max_modulus: 4 },
        Request::DenseOrbit {
            set: SetSpec { group: "q8".into(), expr: SetExpr::FiniteWords { elements: ints([0, 2, 5]) } },
        },
        Request::DenseOrbit { set: z_spec(SetExpr::residue(2, &[1])) },
        Request::Coloring { set: f2(SetExpr::cylinder("a")), n: 2, avoid: vec![word("b")], radius: 1 },
        Request::WitnessShift { set: f2(SetExpr::cylinder("a")), avoid: vec![word("b")], symmetric: true, radius: 2 },
        Request::ReproFigures,
    ];
    let mut checked = Vec::new();
    for req in &requests {
        let a = run(req)?.replay_json();
        let b = run(req)?.replay_json();
        ensure(a == b, || format!("{} differs between runs", req.command()))?;
        checked.push(req.command());
    }
    let grids_a: Vec<String> = figure_grids().unwrap().iter().map(|g| g.to_csv().unwrap()).collect();
    let grids_b: Vec<String> = figure_grids().unwrap().iter().map(|g| g.to_csv().unwrap()).collect();
    ensure(grids_a == grids_b, || "figure CSVs differ".into())?;
    Ok(format!("{} reports byte-identical across two runs: {}", requests.len(), checked.iter().unique().join(", ")))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "2Z syndetic, not 2-syndetic", c1_fig1),
        (2, "Z minus nZ is (n-1)- but not n-syndetic", c2_fig2),
        (3, "powers-of-two complement gap bounds", c3_pow2),
        (4, "four criteria agree", c4_equivalence),
        (5, "syndetic/thick duality", c5_duality),
        (6, "F2 strong complete syndeticity", c6_scs),
        (7, "non-amenability witness", c7_amenability),
        (8, "dense orbit oracles on finite groups", c8_dense_finite),
        (9, "dense orbit sets in Z", c9_dense_z),
        (10, "coloring round trip", c10_coloring),
        (11, "witness shift check", c11_witness_shift),
        (12, "determinism", c12_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| x == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let result = match result {
            Ok(d) if secs > MAX_SECONDS => Err(format!("{d} (took {secs:.1}s, budget {MAX_SECONDS}s)")),
            r => r,
        };
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS [{secs:6.2}s] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL [{secs:6.2}s] {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
