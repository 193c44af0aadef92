//! Serializable requests, their execution, and report verification by replay.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dynamics::{
    amenability_witness, coloring_to_set, default_window, set_to_coloring, strong_amenability_witness,
    subshift_intersection_check, witness_shift_check, Coloring,
};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::report::{canonical_json, Certificate, DecisionReport, Scope, Verdict};
use crate::repro::repro_figures;
use crate::set_algebra::{SetSpec, Subset};
use crate::strong::{build_scs_certificate_for, check_scs, verify_scs_certificate, Epsilon, Multiset, ScsCertificate};
use crate::symmetric::{dense_orbit, symmetric_syndetic, verify_dense_orbit_witness, SymmetricVariant};
use crate::syndetic::{decide_fractionally_thick, decide_n_syndetic, verify_syndetic_witness};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Request {
    CheckNsyndetic { set: SetSpec, n: usize },
    CheckThick { set: SetSpec, n: usize },
    CheckScs { set: SetSpec, epsilon: Epsilon },
    BuildScsCert { rank: u8, epsilon: Epsilon, letter: i8 },
    CheckSymmetric { set: SetSpec, variant: SymmetricVariant },
    DenseOrbit { set: SetSpec },
    Subshift { set: SetSpec, n: usize, window_radius: u32, radius: u32 },
    WitnessShift { set: SetSpec, avoid: Vec<GroupElement>, symmetric: bool, radius: u32 },
    Coloring { set: SetSpec, n: usize, avoid: Vec<GroupElement>, radius: u32 },
    AmenabilityWitness { group: String, epsilon: Epsilon, max_modulus: u64 },
    StrongAmenabilityWitness { group: String, avoid: Vec<GroupElement>, max_cells: usize, depth: u32, max_modulus: u64 },
    ReproFigures,
}

/// A request together with the configuration it ran under; stored in every
/// report so `verify` can re-execute it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invocation {
    pub request: Request,
    pub config: RunConfig,
}

fn coerce_all(g: &GroupModel, xs: &[GroupElement]) -> Result<Vec<GroupElement>> {
    xs.iter().map(|x| g.coerce(x.clone())).collect()
}

impl Request {
    pub fn command(&self) -> &'static str {
        match self {
            Request::CheckNsyndetic { .. } => "check-nsyndetic",
            Request::CheckThick { .. } => "check-thick",
            Request::CheckScs { .. } => "check-scs",
            Request::BuildScsCert { .. } => "build-scs-cert",
            Request::CheckSymmetric { .. } => "check-symmetric",
            Request::DenseOrbit { .. } => "dense-orbit",
            Request::Subshift { .. } => "subshift",
            Request::WitnessShift { .. } => "witness-shift",
            Request::Coloring { .. } => "coloring",
            Request::AmenabilityWitness { .. } => "amenability-witness",
            Request::StrongAmenabilityWitness { .. } => "strong-amenability-witness",
            Request::ReproFigures => "repro-figures",
        }
    }

    /// Runs the request and attaches the invocation to the report.
    pub fn execute(&self, cfg: &RunConfig) -> Result<DecisionReport> {
        let mut report = self.run(cfg)?;
        report.request = Some(serde_json::to_value(Invocation { request: self.clone(), config: cfg.clone() })?);
        Ok(report)
    }

    fn run(&self, cfg: &RunConfig) -> Result<DecisionReport> {
        match self {
            Request::CheckNsyndetic { set, n } => decide_n_syndetic(&Subset::from_spec(set)?, *n, cfg),
            Request::CheckThick { set, n } => decide_fractionally_thick(&Subset::from_spec(set)?, *n, cfg),
            Request::CheckScs { set, epsilon } => check_scs(&Subset::from_spec(set)?, *epsilon, cfg),
            Request::BuildScsCert { rank, epsilon, letter } => {
                let cert = build_scs_certificate_for(*rank, *letter, *epsilon)?;
                Ok(DecisionReport::new("build-scs-cert", &format!("f{rank}"), Verdict::Proved, Scope::Exact)
                    .with_set(SetSpec { group: format!("f{rank}"), expr: cert.target_expr() })
                    .with_scale("epsilon", epsilon.to_string())
                    .with_scale("cells", cert.cells.len())
                    .with_scale("f_size", cert.f.len())
                    .with_certificate(Certificate::Scs(cert)))
            }
            Request::CheckSymmetric { set, variant } => symmetric_syndetic(&Subset::from_spec(set)?, *variant, cfg),
            Request::DenseOrbit { set } => dense_orbit(&Subset::from_spec(set)?, cfg),
            Request::Subshift { set, n, window_radius, radius } => {
                let a = Subset::from_spec(set)?;
                let window = default_window(a.group(), *window_radius)?;
                subshift_intersection_check(&a, *n, &window, *radius, cfg)
            }
            Request::WitnessShift { set, avoid, symmetric, radius } => {
                let a = Subset::from_spec(set)?;
                let avoid = coerce_all(a.group(), avoid)?;
                witness_shift_check(&a, &avoid, *symmetric, *radius, cfg)
            }
            Request::Coloring { set, n, avoid, radius } => coloring_report(set, *n, avoid, *radius, cfg),
            Request::AmenabilityWitness { group, epsilon, max_modulus } => {
                amenability_witness(&GroupModel::from_spec(group)?, *epsilon, *max_modulus, cfg)
            }
            Request::StrongAmenabilityWitness { group, avoid, max_cells, depth, max_modulus } => {
                let g = GroupModel::from_spec(group)?;
                let avoid = coerce_all(&g, avoid)?;
                strong_amenability_witness(&g, &avoid, *max_cells, *depth, *max_modulus, cfg)
            }
            Request::ReproFigures => Ok(repro_figures(cfg)?.0),
        }
    }
}

/// `set → coloring → set`: colors n-subsets of the window from an
/// n-syndetic witness of `A`, then checks that the union is F-avoiding and
/// contained in `A`.
fn coloring_report(
    set: &SetSpec,
    n: usize,
    avoid: &[GroupElement],
    radius: u32,
    cfg: &RunConfig,
) -> Result<DecisionReport> {
    let a = Subset::from_spec(set)?;
    let g = a.group();
    let avoid = coerce_all(g, avoid)?;
    let decided = decide_n_syndetic(&a, n, cfg)?;
    let Some(Certificate::Syndetic(w)) = decided.certificate else {
        return Err(Error::InvalidInput(format!("A is not {n}-syndetic ({}), so it has no coloring", decided.verdict)));
    };
    let coloring = set_to_coloring(&a, n, &avoid, &w, radius, cfg)?;
    let (union, mut r) = coloring_to_set(g, &coloring)?;
    let union = Subset::new(g, &union)?;
    let contained = match (union.nf(), a.nf()) {
        (Some(u), Some(an)) => u.is_subset(an)?,
        _ => coloring.entries.iter().all(|e| e.subset.iter().all(|x| a.contains(&g.mul(&e.color, x)))),
    };
    r = r.with_set(a.spec()).with_scale("contained_in_a", contained);
    if !contained {
        r.verdict = Verdict::Refuted;
        r = r.note("the union of colored subsets leaves A");
    }
    Ok(r)
}

/// Rewrites JSON-decoded elements of a certificate into the group's encoding
/// (finite-group indices are read back as integers).
fn coerce_certificate(g: &GroupModel, cert: &Certificate) -> Result<Certificate> {
    if !g.is_finite() {
        return Ok(cert.clone());
    }
    let c = |x: &GroupElement| g.coerce(x.clone());
    let v = |xs: &[GroupElement]| coerce_all(g, xs);
    let ms = |m: &Multiset| -> Result<Multiset> {
        Ok(Multiset::new(m.entries().iter().map(|e| Ok((c(&e.element)?, e.mult))).collect::<Result<Vec<_>>>()?))
    };
    let mut out = cert.clone();
    match &mut out {
        Certificate::Syndetic(w) => w.f = v(&w.f)?,
        Certificate::ThickRefutation(t) => {
            t.against = v(&t.against)?;
            t.tuple = v(&t.tuple)?;
        }
        Certificate::Multiset(w) => {
            w.f = v(&w.f)?;
            w.k = ms(&w.k)?;
        }
        Certificate::Symmetric(ev) => {
            if let Some(p) = &mut ev.failing {
                p.f1 = v(&p.f1)?;
                p.f2 = v(&p.f2)?;
            }
        }
        Certificate::DenseOrbit(w) => {
            w.subgroup = w.subgroup.as_deref().map(v).transpose()?;
            w.coset_rep = w.coset_rep.as_ref().map(c).transpose()?;
            w.missed = w.missed.as_ref().map(c).transpose()?;
        }
        Certificate::Patterns(p) => {
            p.window = v(&p.window)?;
            for pat in &mut p.patterns {
                pat.translate = c(&pat.translate)?;
            }
            p.empty_meet = p.empty_meet.as_deref().map(v).transpose()?;
        }
        Certificate::Avoidance(ev) => {
            ev.avoid = v(&ev.avoid)?;
            if let Some(col) = &mut ev.collision {
                col.f = c(&col.f)?;
                col.x = c(&col.x)?;
            }
            ev.disjoint_pair = ev.disjoint_pair.as_deref().map(v).transpose()?;
            if let Some(w) = &mut ev.syndetic {
                w.f = v(&w.f)?;
            }
        }
        Certificate::Coloring(col) => {
            col.avoid = v(&col.avoid)?;
            col.palette = v(&col.palette)?;
            for e in &mut col.entries {
                e.subset = v(&e.subset)?;
                e.color = c(&e.color)?;
            }
        }
        Certificate::Amenability(ev) => {
            for r in &mut ev.refuted {
                r.witness.f = v(&r.witness.f)?;
                r.witness.k = ms(&r.witness.k)?;
            }
        }
        Certificate::Scs(_) => {}
        Certificate::Bundle { items } => {
            *items = items.iter().map(|i| coerce_certificate(g, i)).collect::<Result<_>>()?;
        }
    }
    Ok(out)
}

/// Replays a certificate with membership queries. `base` is the set the
/// certificate speaks about (the complement for thickness reports).
fn replay_certificate(
    g: &GroupModel,
    base: Option<&Subset>,
    cert: &Certificate,
    cfg: &RunConfig,
    mismatches: &mut Vec<String>,
) -> Result<()> {
    let need = |what: &str| Error::InvalidInput(format!("{what} certificates need a set"));
    let mut fail = |ok: bool, what: &str| {
        if !ok {
            mismatches.push(format!("{what} certificate does not replay"));
        }
    };
    match cert {
        Certificate::Syndetic(w) => {
            fail(verify_syndetic_witness(base.ok_or_else(|| need("syndetic"))?, w, cfg)?, "syndetic")
        }
        Certificate::ThickRefutation(t) => fail(t.replay(base.ok_or_else(|| need("refutation"))?)?, "refutation"),
        Certificate::Multiset(w) => fail(w.replay(base.ok_or_else(|| need("multiset"))?)?, "multiset"),
        Certificate::Scs(c) => {
            if let Err(e) = verify_scs_certificate(c) {
                mismatches.push(format!("scs certificate rejected: {e}"));
            }
        }
        Certificate::Symmetric(ev) => fail(ev.replay(base.ok_or_else(|| need("symmetric"))?)?, "symmetric"),
        Certificate::DenseOrbit(w) => {
            fail(verify_dense_orbit_witness(base.ok_or_else(|| need("dense orbit"))?, w, cfg)?, "dense orbit")
        }
        Certificate::Patterns(p) => fail(p.replay(base.ok_or_else(|| need("pattern"))?)?, "pattern"),
        Certificate::Avoidance(ev) => {
            let candidate = ev.candidate.as_ref().map(|e| Subset::new(g, e)).transpose()?;
            let Some(a) = base.or(candidate.as_ref()) else { return Ok(()) };
            if let Some(col) = &ev.collision {
                fail(a.contains(&col.x) && a.contains(&g.multiply(&col.f, &col.x)?), "collision");
            }
            if let (Some(c), Some(w)) = (&candidate, &ev.syndetic) {
                fail(verify_syndetic_witness(c, w, cfg)?, "candidate syndetic");
            }
        }
        Certificate::Coloring(col) => fail(coloring_replays(g, base, col)?, "coloring"),
        Certificate::Amenability(ev) => fail(ev.replay(g)?, "amenability"),
        Certificate::Bundle { items } => {
            for i in items {
                replay_certificate(g, base, i, cfg, mismatches)?;
            }
        }
    }
    Ok(())
}

fn coloring_replays(g: &GroupModel, base: Option<&Subset>, col: &Coloring) -> Result<bool> {
    let (_, r) = coloring_to_set(g, col)?;
    let inside = match base {
        Some(a) => col.entries.iter().all(|e| e.subset.iter().all(|x| a.contains(&g.mul(&e.color, x)))),
        None => true,
    };
    Ok(r.verdict == Verdict::Proved && inside)
}

/// Checks a stored report: replays its certificate against the set, then
/// re-executes the recorded request and compares the canonical encodings.
/// Returns a `verify` report, refuted with mismatch notes on any failure.
pub fn verify_report(stored: &DecisionReport) -> Result<DecisionReport> {
    let mut mismatches = Vec::new();
    let invocation: Option<Invocation> = stored.request.clone().map(serde_json::from_value).transpose()?;
    let cfg = invocation.as_ref().map(|i| i.config.clone()).unwrap_or_default();
    let g = GroupModel::from_spec(stored.set.as_ref().map_or(stored.group.as_str(), |s| s.group.as_str()))?;
    let set = stored.set.as_ref().map(Subset::from_spec).transpose()?;
    let base = match (stored.command.as_str(), &set) {
        ("check-thick", Some(b)) => Some(b.complement()),
        _ => set,
    };
    if let Some(cert) = &stored.certificate {
        let cert = coerce_certificate(&g, cert)?;
        replay_certificate(&g, base.as_ref(), &cert, &cfg, &mut mismatches)?;
    }
    let mut replayed = false;
    if let Some(inv) = &invocation {
        let fresh = inv.request.execute(&inv.config)?;
        replayed = true;
        if fresh.verdict != stored.verdict {
            mismatches.push(format!("verdict mismatch: stored {}, replayed {}", stored.verdict, fresh.verdict));
        }
        if fresh.scope != stored.scope {
            mismatches.push(format!("scope mismatch: stored {}, replayed {}", stored.scope, fresh.scope));
        }
        if canonical_json(&fresh.certificate) != canonical_json(&stored.certificate) {
            mismatches.push("certificate differs from the replayed certificate".into());
        }
        if fresh.replay_json() != stored.replay_json() && mismatches.is_empty() {
            mismatches.push("report differs from its replay outside the verdict and certificate".into());
        }
    }
    let verdict = if mismatches.is_empty() { Verdict::Proved } else { Verdict::Refuted };
    let mut r = DecisionReport::new("verify", &stored.group, verdict, stored.scope)
        .with_scale("verified_command", &stored.command)
        .with_scale("stored_verdict", stored.verdict)
        .with_scale("replayed", replayed);
    if let Some(s) = &stored.set {
        r = r.with_set(s.clone());
    }
    for m in mismatches {
        r = r.note(m);
    }
    Ok(r)
}

/// Verifies a bare strong complete syndeticity certificate.
pub fn verify_scs_report(cert: &ScsCertificate) -> DecisionReport {
    let group = format!("f{}", cert.rank);
    let base = DecisionReport::new("verify-scs-cert", &group, Verdict::Proved, Scope::Exact)
        .with_set(SetSpec { group: group.clone(), expr: cert.target_expr() })
        .with_scale("epsilon", cert.epsilon.to_string());
    match verify_scs_certificate(cert) {
        Ok(()) => base,
        Err(e) => {
            let mut r = base.note(e.to_string());
            r.verdict = Verdict::Refuted;
            r
        }
    }
}

/// Verifies a JSON document holding either a report or a bare certificate.
pub fn verify_json(text: &str) -> Result<DecisionReport> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("schema").is_some() {
        return verify_report(&serde_json::from_value(value)?);
    }
    match serde_json::from_value::<Certificate>(value.clone()) {
        Ok(Certificate::Scs(c)) => Ok(verify_scs_report(&c)),
        Ok(Certificate::Amenability(ev)) => {
            let g = GroupModel::free(ev.certificates.first().map_or(2, |c| c.rank))?;
            let ok = ev.replay(&g)?;
            let r = DecisionReport::new("verify", &g.spec_name(), Verdict::Proved, Scope::Exact);
            Ok(if ok {
                r
            } else {
                let mut r = r.note("amenability certificate does not replay");
                r.verdict = Verdict::Refuted;
                r
            })
        }
        Ok(_) => Err(Error::InvalidInput(
            "bare certificates other than scs and amenability need the enclosing report".into(),
        )),
        Err(_) => Ok(verify_scs_report(&serde_json::from_value(value)?)),
    }
}
