//! Subcommand handlers.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::{bail, Result};
use mixed_newton::degeneracy::{check_strong_nondegeneracy, FaceVerdict, SearchConfig};
use mixed_newton::family::{
    check_admissibility, enumerate_strata, pullback_covering, AdmissibilityConfig, AdmissibilityReport, CoveringSpec,
    TSamplingPolicy,
};
use mixed_newton::newton::{build_polyhedron, classify_subspaces, enumerate_nc_boundary, is_convenient, Face,
    SubspaceClassification};
use mixed_newton::probe::{
    check_thom_af, check_whitney_b, spotcheck_regularity, ArcJson, ArcPairJson, LimitReport, ProbeVerdict, SpotMode,
    SpotcheckConfig, SpotcheckReport, ThomOptions, WhitneyOptions,
};
use mixed_newton::tameness::{serialize_radius, tameness_summary, TamenessConfig, TamenessSummary};
use mixed_newton::MixedPolynomial;
use serde::Serialize;

use crate::input::{load_arc, load_family, load_pair, load_poly, parse_complex, Source};
use crate::report::{emit, write_target, Envelope};
use crate::{
    corpus, plot, Command, FacesArgs, FamilyArgs, NondegArgs, PlotArgs, ProbeCommand, SearchArgs, SpotArgs,
    SpotModeArg, TameArgs, ThomArgs, WhitneyArgs, EXIT_FAILED, EXIT_OK,
};

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Faces(a) => faces(a, out),
        Command::Nondeg(a) => nondeg(a, out),
        Command::Tame(a) => tame(a, out),
        Command::Family(a) => family(a, out),
        Command::Probe(ProbeCommand::Whitney(a)) => whitney(a, out),
        Command::Probe(ProbeCommand::Thom(a)) => thom(a, out),
        Command::Probe(ProbeCommand::Spot(a)) => spot(a, out),
        Command::Plot(a) => plot_cmd(a, out),
        Command::Corpus(a) => corpus::run_corpus(a, out),
    }
}

fn exit_for(passes: bool) -> i32 {
    if passes {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn search_config(s: &SearchArgs) -> Result<SearchConfig> {
    let cfg = SearchConfig {
        seed: s.seed,
        multistarts: s.starts,
        tol_accept: s.tol_accept,
        tol_floor: s.tol_floor,
        ..SearchConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn tameness_config(s: &SearchArgs, grid: &Option<Vec<f64>>) -> Result<TamenessConfig> {
    let mut cfg = TamenessConfig {
        inner: search_config(s)?,
        ..TamenessConfig::default()
    };
    if let Some(g) = grid {
        cfg.radius_grid = g.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn point(p: &[i64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn points(ps: &[Vec<i64>]) -> String {
    ps.iter().map(|p| point(p)).collect::<Vec<_>>().join(" ")
}

fn face_line(face: &Face) -> String {
    let w: Vec<i64> = face.weight.iter().map(|&x| x as i64).collect();
    let mut line = format!("dim {}  w={}  d={}  [{}]", face.dim, point(&w), face.d, points(&face.vertices));
    if !face.compact {
        line.push_str(&format!("  I={}", face.direction));
    }
    line
}

#[derive(Debug, Serialize)]
pub struct FacesPayload {
    pub polynomial: String,
    pub convenient: bool,
    pub support: Vec<Vec<i64>>,
    pub vertices: Vec<Vec<i64>>,
    pub compact_faces: Vec<Face>,
    pub essential_noncompact: Vec<Face>,
    pub rejected_noncompact: Vec<Face>,
    pub subspaces: SubspaceClassification,
}

pub fn faces_payload(f: &MixedPolynomial) -> Result<(FacesPayload, Vec<String>)> {
    let poly = build_polyhedron(f)?;
    let b = enumerate_nc_boundary(f)?;
    Ok((
        FacesPayload {
            polynomial: f.to_string(),
            convenient: is_convenient(f),
            support: poly.support,
            vertices: poly.vertices,
            compact_faces: b.compact_faces,
            essential_noncompact: b.essential_noncompact,
            rejected_noncompact: b.rejected_noncompact,
            subspaces: classify_subspaces(f)?,
        },
        b.diagnostics,
    ))
}

/// The text face table used by `faces` and by `plot` for n ≠ 2.
pub fn faces_summary(p: &FacesPayload) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "f = {}", p.polynomial);
    let _ = writeln!(s, "convenient: {}", p.convenient);
    let _ = writeln!(s, "vertices: {}", points(&p.vertices));
    let sections = [
        ("compact faces", &p.compact_faces),
        ("essential non-compact faces", &p.essential_noncompact),
        ("rejected non-compact faces", &p.rejected_noncompact),
    ];
    for (title, faces) in sections {
        let _ = writeln!(s, "{} ({}):", title, faces.len());
        for face in faces {
            let _ = writeln!(s, "  {}", face_line(face));
        }
    }
    s
}

#[derive(Serialize)]
struct PolyEcho<'a, C: Serialize> {
    source: &'a Source,
    config: C,
}

fn faces(a: FacesArgs, out: &mut dyn Write) -> Result<i32> {
    let (src, f) = load_poly(&a.input)?;
    let (payload, diagnostics) = faces_payload(&f)?;
    let mut env = Envelope::new("faces", PolyEcho { source: &src, config: () }, payload);
    env.warnings = diagnostics;
    emit(&env, a.out.json.as_deref(), || faces_summary(&env.payload), out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct NondegPayload {
    polynomial: String,
    convenient: bool,
    /// Label of the worst face verdict.
    verdict: &'static str,
    passes: bool,
    faces: Vec<FaceVerdict>,
}

fn nondeg(a: NondegArgs, out: &mut dyn Write) -> Result<i32> {
    let (src, f) = load_poly(&a.input)?;
    let cfg = search_config(&a.search)?;
    let report = check_strong_nondegeneracy(&f, &cfg)?;
    let verdict = report.worst().map(|v| v.status.label()).unwrap_or("PROVEN_NONDEGENERATE");
    let payload = NondegPayload {
        polynomial: f.to_string(),
        convenient: is_convenient(&f),
        verdict,
        passes: report.passes,
        faces: report.faces,
    };
    let mut env = Envelope::new("nondeg", PolyEcho { source: &src, config: &cfg }, payload);
    env.warnings = env
        .payload
        .faces
        .iter()
        .filter(|v| v.low_margin)
        .map(|v| {
            format!(
                "face {} has minimum residual {:.3e} between tol_accept and tol_floor",
                v.face.as_ref().map(|f| points(&f.vertices)).unwrap_or_default(),
                v.min_residual_seen
            )
        })
        .collect();
    let passes = env.payload.passes;
    emit(
        &env,
        a.out.json.as_deref(),
        || {
            let mut s = format!("f = {}\nverdict: {}\n", env.payload.polynomial, verdict);
            for v in &env.payload.faces {
                let face = v.face.as_ref().map(|f| points(&f.vertices)).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "  [{}]  {}  min residual {:.3e}  starts {}",
                    face,
                    v.status.label(),
                    v.min_residual_seen,
                    v.starts
                );
            }
            s
        },
        out,
    )?;
    Ok(exit_for(passes))
}

#[derive(Serialize)]
struct TameEcho<'a> {
    source: &'a Source,
    config: &'a TamenessConfig,
    #[serde(serialize_with = "serialize_opt_radius")]
    rho: Option<f64>,
}

fn serialize_opt_radius<S: serde::Serializer>(r: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => serialize_radius(r, s),
        None => s.serialize_none(),
    }
}

#[derive(Serialize)]
struct TamePayload {
    polynomial: String,
    summary: TamenessSummary,
    /// `r_nc ≥ rho`, when `--rho` is given.
    passes: Option<bool>,
}

fn radius_text(r: f64) -> String {
    if r.is_infinite() {
        "inf".into()
    } else {
        format!("{:.6}", r)
    }
}

fn residual_text(r: f64) -> String {
    if r.is_infinite() {
        "inf".into()
    } else {
        format!("{:.3e}", r)
    }
}

fn tame(a: TameArgs, out: &mut dyn Write) -> Result<i32> {
    let (src, f) = load_poly(&a.input)?;
    let cfg = tameness_config(&a.search, &a.radius_grid)?;
    if let Some(rho) = a.rho {
        if !(rho > 0.0) {
            bail!("--rho must be positive, got {}", rho);
        }
    }
    let summary = tameness_summary(&f, &cfg)?;
    let passes = a.rho.map(|rho| summary.r_nc >= rho);
    let payload = TamePayload {
        polynomial: f.to_string(),
        summary,
        passes,
    };
    let env = Envelope::new(
        "tame",
        TameEcho {
            source: &src,
            config: &cfg,
            rho: a.rho,
        },
        payload,
    );
    emit(
        &env,
        a.out.json.as_deref(),
        || {
            let s = &env.payload.summary;
            let mut text = format!("f = {}\nr_nc = {}\n", env.payload.polynomial, radius_text(s.r_nc));
            for face in &s.faces {
                let _ = writeln!(
                    text,
                    "  {}  r_lower {}  probes {}",
                    face_line(&face.face),
                    radius_text(face.r_lower),
                    face.probes
                );
            }
            if let Some(p) = passes {
                let _ = writeln!(text, "r_nc >= rho: {}", p);
            }
            text
        },
        out,
    )?;
    Ok(exit_for(passes.unwrap_or(true)))
}

#[derive(Serialize)]
struct FamilyEcho<'a> {
    source: &'a Source,
    cover: Option<&'a CoveringSpec>,
    config: &'a AdmissibilityConfig,
}

#[derive(Serialize)]
struct FamilyPayload {
    family: String,
    strata: Vec<String>,
    report: AdmissibilityReport,
}

fn verdict_label(r: &AdmissibilityReport) -> &'static str {
    if r.verdict.passes() {
        "NUMERICALLY_ADMISSIBLE"
    } else {
        "FAILED"
    }
}

fn family(a: FamilyArgs, out: &mut dyn Write) -> Result<i32> {
    let (src, mut fam) = load_family(&a.input)?;
    let cover = match (&a.cover_nu, &a.cover_mu, a.cover_delta) {
        (Some(nu), Some(mu), Some(delta)) => Some(CoveringSpec::new(nu.clone(), mu.clone(), delta)?),
        (None, None, None) => None,
        _ => bail!("--cover-nu, --cover-mu and --cover-delta go together"),
    };
    if let Some(spec) = &cover {
        fam = pullback_covering(&fam, spec)?;
    }
    let policy = TSamplingPolicy {
        rings: a.rings,
        angles_per_ring: a.angles,
        ..TSamplingPolicy::with_t_max(a.t_max)
    };
    let cfg = AdmissibilityConfig {
        nondegeneracy: search_config(&a.search)?,
        tameness: tameness_config(&a.search, &a.radius_grid)?,
        smoothness_samples: a.smoothness_samples,
    };
    let report = check_admissibility(&fam, a.rho, &policy, &cfg)?;
    let strata = enumerate_strata(&fam)?.iter().map(|s| s.to_string()).collect();
    let passes = report.verdict.passes();
    let mut env = Envelope::new(
        "family",
        FamilyEcho {
            source: &src,
            cover: cover.as_ref(),
            config: &cfg,
        },
        FamilyPayload {
            family: fam.to_string(),
            strata,
            report,
        },
    );
    if let Some(s) = &env.payload.report.smoothness {
        if s.accepted == 0 {
            env.warnings.push("smoothness spot-check found no sample points".into());
        }
    }
    emit(
        &env,
        a.out.json.as_deref(),
        || {
            let r = &env.payload.report;
            let mut s = format!(
                "f_t = {}\nrho = {}  t_max = {}  samples of t: {}\nnewton constant: {}\nmin r_nc = {}\nverdict: {}\n",
                env.payload.family,
                r.rho,
                r.policy.t_max,
                r.per_t.len(),
                r.newton.constant,
                radius_text(r.min_r_nc),
                verdict_label(r)
            );
            for f in &r.failures {
                let _ = writeln!(s, "  {}", f);
            }
            s
        },
        out,
    )?;
    Ok(exit_for(passes))
}

#[derive(Serialize)]
struct WhitneyEcho<'a> {
    family: &'a Source,
    pair_file: String,
    arcs: &'a ArcPairJson,
    options: &'a WhitneyOptions,
}

#[derive(Serialize)]
struct ThomEcho<'a> {
    family: &'a Source,
    arc_file: String,
    arc: &'a ArcJson,
    stratum: &'a str,
    options: &'a ThomOptions,
}

#[derive(Serialize)]
struct ProbePayload {
    verdict: ProbeVerdict,
    report: LimitReport,
}

fn limit_summary(kind: &str, r: &LimitReport) -> String {
    let mut s = format!(
        "{}: {}\n  o(g) = {}  o(h) = {}  reduction steps {}\n  series residual {:.3e}  numeric residual {:.3e}  tol {}\n",
        kind,
        r.verdict.label(),
        r.o_g,
        r.o_h,
        r.reduction_steps,
        r.series_residual,
        r.containment_residual,
        r.tol
    );
    for n in &r.notes {
        let _ = writeln!(s, "  note: {}", n);
    }
    s
}

fn whitney(a: WhitneyArgs, out: &mut dyn Write) -> Result<i32> {
    let (src, fam) = load_family(&a.input)?;
    let (json, p, q) = load_pair(&a.pair, fam.n())?;
    let opts = WhitneyOptions {
        tol: a.tol,
        truncation: a.truncation,
        secant_perturbation: None,
    };
    let report = check_whitney_b(&fam, &p, &q, &opts)?;
    let verdict = report.verdict;
    let env = Envelope::new(
        "probe whitney",
        WhitneyEcho {
            family: &src,
            pair_file: a.pair.display().to_string(),
            arcs: &json,
            options: &opts,
        },
        ProbePayload { verdict, report },
    );
    emit(&env, a.out.json.as_deref(), || limit_summary("whitney (b)", &env.payload.report), out)?;
    Ok(exit_for(verdict == ProbeVerdict::Pass))
}

fn thom(a: ThomArgs, out: &mut dyn Write) -> Result<i32> {
    let (src, fam) = load_family(&a.input)?;
    let (json, arc) = load_arc(&a.arc, fam.n())?;
    let strata = enumerate_strata(&fam)?;
    let Some(stratum) = strata.iter().find(|s| s.to_string() == a.stratum) else {
        let names: Vec<String> = strata.iter().map(|s| s.to_string()).collect();
        bail!("unknown stratum `{}`; this family has {}", a.stratum, names.join(", "));
    };
    let opts = ThomOptions {
        tol: a.tol,
        truncation: a.truncation,
        gradient_override: None,
    };
    let report = check_thom_af(&fam, &arc, stratum, &opts)?;
    let verdict = report.verdict;
    let env = Envelope::new(
        "probe thom",
        ThomEcho {
            family: &src,
            arc_file: a.arc.display().to_string(),
            arc: &json,
            stratum: &a.stratum,
            options: &opts,
        },
        ProbePayload { verdict, report },
    );
    emit(&env, a.out.json.as_deref(), || limit_summary("thom a_f", &env.payload.report), out)?;
    Ok(exit_for(verdict == ProbeVerdict::Pass))
}

#[derive(Serialize)]
struct SpotEcho<'a> {
    family: &'a Source,
    config: &'a SpotcheckConfig,
}

fn spot(a: SpotArgs, out: &mut dyn Write) -> Result<i32> {
    let (src, fam) = load_family(&a.input)?;
    let mode = match a.mode {
        SpotModeArg::Smoothness => SpotMode::Smoothness,
        SpotModeArg::NearbyFibres => SpotMode::NearbyFibres,
    };
    let cfg = SpotcheckConfig {
        radius: a.radius,
        samples: a.samples,
        seed: a.seed,
        t_values: a.t_values.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?,
        eta: a.eta,
        critical_threshold: a.critical_threshold,
        transversality_threshold: a.transversality_threshold,
        ..SpotcheckConfig::new(mode)
    };
    cfg.validate()?;
    let report: SpotcheckReport = spotcheck_regularity(&fam, &cfg)?;
    let passes = report.passes;
    let mut env = Envelope::new("probe spot", SpotEcho { family: &src, config: &cfg }, report);
    if env.payload.accepted == 0 {
        env.warnings.push("no sample points found".into());
    }
    emit(
        &env,
        a.out.json.as_deref(),
        || {
            let r = &env.payload;
            format!(
                "spot-check {:?}: {}\n  accepted {} of {}\n  min criticality {}  min transversality {}\n  failures: {}\n",
                r.mode,
                if r.passes { "PASS" } else { "FAIL" },
                r.accepted,
                r.requested,
                residual_text(r.min_criticality),
                residual_text(r.min_transversality),
                r.failure_summary()
            )
        },
        out,
    )?;
    Ok(exit_for(passes))
}

fn plot_cmd(a: PlotArgs, out: &mut dyn Write) -> Result<i32> {
    let (_, f) = load_poly(&a.input)?;
    let (payload, _) = faces_payload(&f)?;
    if f.n() != 2 {
        eprintln!("warning: SVG diagrams need n = 2; printing the face table instead");
        write_target("-", &faces_summary(&payload), out)?;
        return Ok(EXIT_OK);
    }
    write_target(&a.svg, &plot::render_svg(&payload), out)?;
    Ok(EXIT_OK)
}
