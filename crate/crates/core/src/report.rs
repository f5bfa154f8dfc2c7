//! The whole pipeline for one surface document, collected into a
//! deterministic report: curvature, ends, link at infinity, bounds, double
//! points, the normal-bundle identity and a regression check against the
//! document's expected block.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curvature::{self, BoundOutcome, CurvatureReport, Holomorphic};
use crate::document::{Expected, SurfaceDocument};
use crate::double_points::{self, DoublePoint, DoublePointSearch, SearchConfig};
use crate::error::{Error, Result};
use crate::grassmann::{self, Vec4};
use crate::knots::{self, FoxMilnor, LaurentIntPoly};
use crate::link::{self, IdentityReport, LinkAtInfinity, Reconciliation, WritheReport};
use crate::surface::{self, Conformality, EndProfile, SecondOrder, SurfaceSpec};

#[derive(Clone, Debug)]
pub struct ReportOptions {
    /// Fixed sphere radius for the link; `None` stabilizes per end.
    pub radius: Option<f64>,
    /// Knot samples per end; `None` uses the default density.
    pub samples: Option<usize>,
    pub seed: u64,
    pub double_points: bool,
    pub search_radius: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { radius: None, samples: None, seed: 0, double_points: true, search_radius: 1e3 }
    }
}

/// A pipeline stage: its result, the error that stopped it, or why it did not run.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Stage<T> {
    Ok(T),
    Failed { error: String, exit_code: i32 },
    Skipped { reason: String },
}

impl<T> Stage<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Stage::Ok(v),
            Err(e) => Stage::Failed { error: e.to_string(), exit_code: e.exit_code() },
        }
    }

    fn skipped(reason: &str) -> Self {
        Stage::Skipped { reason: reason.into() }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Stage::Ok(v) => Some(v),
            _ => None,
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            Stage::Failed { exit_code, .. } => *exit_code,
            _ => 0,
        }
    }
}

fn r6(x: f64) -> f64 {
    let y = (x * 1e6).round() / 1e6;
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

fn c6(z: Complex64) -> [f64; 2] {
    [r6(z.re), r6(z.im)]
}

fn v6(v: &Vec4) -> [f64; 4] {
    v.map(r6)
}

fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

fn sig12(x: f64) -> String {
    let s = format!("{x:.11e}");
    if s.starts_with("-0.00000000000e") {
        s[1..].to_string()
    } else {
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConformalitySection {
    /// `exact`, `numeric` or `fails`.
    pub status: String,
    pub residual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImmersionSection {
    pub immersed: bool,
    pub branch_order: usize,
    pub branch_points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusSection {
    pub n: u32,
    pub p: u32,
    pub predicted_e: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndSection {
    pub id: usize,
    pub location: String,
    pub multiplicity: u32,
    pub second_order: String,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub equal_moduli: bool,
    /// Orthonormal basis of the tangent plane at infinity.
    pub tangent_plane: [[String; 4]; 2],
    pub torus: Option<TorusSection>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndsSection {
    pub ends: Vec<EndSection>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureSection {
    pub d_plus: f64,
    pub d_minus: f64,
    pub error_estimate: String,
    pub agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureSection {
    pub d_plus: u32,
    pub d_minus: u32,
    pub total_curvature_over_pi: i64,
    pub normal_curvature_over_pi: i64,
    /// `2(2 − Σ(1+N_i) + B)`.
    pub end_formula_over_pi: i64,
    pub branch_order: usize,
    pub quadrature: QuadratureSection,
    pub holomorphic: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndPairSection {
    pub ends: [usize; 2],
    /// `det[e₁, e₂, f₁, f₂]` of the two orthonormal tangent-plane bases.
    pub plane_det: f64,
    pub transverse: bool,
    pub lk: Option<i64>,
    pub multiplicity_product: u32,
    /// `lk / (N_i N_j)` when it divides.
    pub sigma: Option<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoxMilnorSection {
    pub passes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl FoxMilnorSection {
    fn new(f: &FoxMilnor) -> Self {
        match f {
            FoxMilnor::PassesPossiblySlice { witness } => {
                FoxMilnorSection { passes: true, witness: Some(witness.pretty()), reason: None }
            }
            FoxMilnor::Obstructed { reason } => FoxMilnorSection { passes: false, witness: None, reason: Some(reason.clone()) },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlexanderSection {
    pub polynomial: String,
    pub fox_milnor: FoxMilnorSection,
}

#[derive(Clone, Debug, Serialize)]
pub struct KnotSection {
    pub end: usize,
    pub strands: usize,
    pub word: String,
    pub letters: usize,
    pub e: i64,
    pub min_separation: String,
    pub torus_consistent: Option<bool>,
    pub alexander: Stage<AlexanderSection>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkSection {
    pub radius: f64,
    pub stable_radii: Vec<f64>,
    pub knots: Vec<KnotSection>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WritheSection {
    pub pushoff: [f64; 4],
    pub linking_matrix: Vec<Vec<i64>>,
    pub self_pushoff: Vec<i64>,
    /// `Σ e_i + 2 Σ lk(K_i, K_j)`.
    pub assembled: i64,
    pub direct: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BennequinSection {
    pub end: usize,
    pub e: i64,
    pub n: u32,
    pub rhs: i64,
    pub outcome: String,
    /// Smallest genus for which the inequality would hold.
    pub genus_needed: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjunctionSection {
    pub lhs: i64,
    pub rhs: f64,
    pub consistent: bool,
    pub bound_rhs: i64,
    pub bound_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchBoundSection {
    pub end: usize,
    pub d_lower: i64,
    pub d_upper: i64,
    pub degrees_hold: bool,
    pub e_bound: i64,
    pub e_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcordanceSection {
    pub ends: [usize; 2],
    pub fox_milnor: FoxMilnorSection,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsSection {
    pub genus: u32,
    pub bennequin: Vec<BennequinSection>,
    pub adjunction: Stage<AdjunctionSection>,
    pub branch_order_bounds: Vec<BranchBoundSection>,
    pub concordance: Vec<ConcordanceSection>,
    /// Every obstruction to an embedding that fired.
    pub obstructions: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointSection {
    pub z1: [f64; 2],
    pub z2: [f64; 2],
    pub image: [f64; 4],
    pub sign: Option<i8>,
    pub residual: String,
    pub transversality: f64,
}

impl PointSection {
    fn new(p: &DoublePoint) -> Self {
        PointSection {
            z1: c6(p.z1),
            z2: c6(p.z2),
            image: v6(&p.image),
            sign: p.sign,
            residual: sci(p.residual),
            transversality: r6(p.transversality),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublePointSection {
    pub search_radius: f64,
    pub seed: u64,
    pub seeds: usize,
    pub converged: usize,
    pub count: usize,
    pub signed_total: Option<i64>,
    pub max_residual: String,
    pub family: bool,
    pub family_size: usize,
    /// The family reaches the boundary of the search box.
    pub family_unbounded: bool,
    pub points: Vec<PointSection>,
    pub family_sample: Vec<PointSection>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconciliationSection {
    /// `d₋ − d₊`.
    pub lhs: i64,
    pub writhe: i64,
    pub double_point_sum: Option<i64>,
    pub implied_double_points: Option<i64>,
    /// `holds`, `fails` or `not_applicable`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub equation: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegressionCheck {
    pub key: String,
    pub expected: Value,
    pub actual: Value,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub conformality: ConformalitySection,
    pub immersion: Stage<ImmersionSection>,
    pub ends: Stage<EndsSection>,
    pub curvature: Stage<CurvatureSection>,
    pub end_pairs: Vec<EndPairSection>,
    pub link: Stage<LinkSection>,
    pub writhe: Stage<WritheSection>,
    pub bounds: Stage<BoundsSection>,
    pub double_points: Stage<DoublePointSection>,
    pub reconciliation: Stage<ReconciliationSection>,
    pub regression: Vec<RegressionCheck>,
    /// `embedded-consistent`, `immersed`, `obstructed` or `non-conformal`.
    pub outcome: String,
    pub summary: String,
    pub exit_code: i32,
}

fn conformality_section(c: &Conformality) -> ConformalitySection {
    match c {
        Conformality::Exact => ConformalitySection { status: "exact".into(), residual: "exact 0".into() },
        Conformality::Numeric(r) => ConformalitySection { status: "numeric".into(), residual: sci(*r) },
        Conformality::Fails(f) => ConformalitySection { status: "fails".into(), residual: f.to_string() },
    }
}

fn end_section(e: &EndProfile) -> EndSection {
    let second_order = match e.second {
        SecondOrder::Power(p) => format!("power {p}"),
        SecondOrder::Log => "log".into(),
        SecondOrder::Vanishing => "vanishing".into(),
    };
    let top = e.a.norm().max(e.b.norm());
    EndSection {
        id: e.end_id,
        location: e.location.name().into(),
        multiplicity: e.n,
        second_order,
        a: c6(e.a),
        b: c6(e.b),
        equal_moduli: top > 0.0 && (e.a.norm() - e.b.norm()).abs() <= 1e-9 * top,
        tangent_plane: [e.frame[0].map(sig12), e.frame[1].map(sig12)],
        torus: link::torus_knot_detect(e).map(|t| TorusSection { n: t.n, p: t.p, predicted_e: t.predicted_e }),
    }
}

fn curvature_section(c: &CurvatureReport) -> CurvatureSection {
    CurvatureSection {
        d_plus: c.d_plus,
        d_minus: c.d_minus,
        total_curvature_over_pi: 2 * c.total_kt_over_2pi,
        normal_curvature_over_pi: 2 * c.total_kn_over_2pi,
        end_formula_over_pi: 2 * c.ends_formula_kt,
        branch_order: c.branch_order,
        quadrature: QuadratureSection {
            d_plus: r6(c.quad_d_plus),
            d_minus: r6(c.quad_d_minus),
            error_estimate: sci(c.quad_error),
            agrees: c.quadrature_agrees(),
        },
        holomorphic: c.holomorphic.map(|h| match h {
            Holomorphic::PlusConstant => "gamma_plus_constant".into(),
            Holomorphic::MinusConstant => "gamma_minus_constant".into(),
        }),
    }
}

/// Pairwise position of the tangent planes at infinity.
fn end_pairs(ends: &[EndProfile], lk: Option<&Vec<Vec<i64>>>) -> Vec<EndPairSection> {
    let mut out = Vec::new();
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            let (p, q) = (&ends[i].frame, &ends[j].frame);
            let det = grassmann::det4([p[0], p[1], q[0], q[1]]);
            let l = lk.map(|m| m[i][j]);
            let np = ends[i].n * ends[j].n;
            out.push(EndPairSection {
                ends: [i, j],
                plane_det: r6(det),
                transverse: det.abs() > 1e-6,
                lk: l,
                multiplicity_product: np,
                sigma: l.filter(|l| l % np as i64 == 0).map(|l| l / np as i64),
            });
        }
    }
    out
}

fn knot_section(end: &EndProfile, b: &link::CylinderBraid) -> (KnotSection, Option<LaurentIntPoly>) {
    let alex = knots::alexander_poly(&b.word);
    let poly = alex.as_ref().ok().cloned();
    let alexander = Stage::from_result(
        alex.map(|d| AlexanderSection { polynomial: d.pretty(), fox_milnor: FoxMilnorSection::new(&knots::fox_milnor_test(&d)) }),
    );
    let sec = KnotSection {
        end: end.end_id,
        strands: b.strands,
        word: b.word.to_string(),
        letters: b.word.len(),
        e: b.winding_e,
        min_separation: sci(b.min_separation),
        torus_consistent: link::torus_knot_detect(end).map(|t| t.predicted_e == b.winding_e),
        alexander,
    };
    (sec, poly)
}

fn bounds_section(
    c: &CurvatureReport,
    ends: &[EndProfile],
    link: &LinkAtInfinity,
    polys: &[Option<LaurentIntPoly>],
    identity: Option<&IdentityReport>,
    all_transverse: bool,
) -> BoundsSection {
    let g = 0u32;
    let e = link.e();
    let mut obstructions = Vec::new();
    let branched = c.branch_order > 0;
    let bennequin: Vec<BennequinSection> = ends
        .iter()
        .zip(&e)
        .map(|(end, &ek)| {
            let out = curvature::bennequin_bound(c, ek, end.n, g);
            let excess = ek.abs() - (end.n as i64 - 1);
            if out == BoundOutcome::Violated {
                obstructions.push(if branched {
                    format!("slice-Bennequin |e| = {} > N - 1 = {} at end {} (branched surface)", ek.abs(), end.n - 1, end.end_id)
                } else {
                    format!("slice-Bennequin |e| = {} > N - 1 = {} at end {}", ek.abs(), end.n - 1, end.end_id)
                });
            }
            BennequinSection {
                end: end.end_id,
                e: ek,
                n: end.n,
                rhs: end.n as i64 - 1 + 2 * g as i64,
                outcome: out.name().into(),
                genus_needed: (excess.max(0) as u32).div_ceil(2),
            }
        })
        .collect();
    let adjunction = if ends.len() != 1 {
        Stage::skipped("applies to surfaces with one end")
    } else {
        match curvature::adjunction_bound(c, e[0], ends[0].n, g) {
            Ok(a) => {
                if !a.consistent {
                    obstructions.push(format!("adjunction: 2 d+ d- = {} but the embedded value is {}", a.lhs, a.rhs_twice as f64 / 2.0));
                }
                Stage::Ok(AdjunctionSection {
                    lhs: a.lhs,
                    rhs: a.rhs_twice as f64 / 2.0,
                    consistent: a.consistent,
                    bound_rhs: a.bound_rhs,
                    bound_holds: a.bound_holds,
                })
            }
            Err(Error::HolomorphicSurface) => Stage::skipped("a Gauss factor is constant"),
            Err(err) => Stage::from_result(Err(err)),
        }
    };
    let branch_order_bounds = ends
        .iter()
        .zip(&e)
        .filter_map(|(end, &ek)| {
            let b = curvature::branch_order_bounds(c, end, ek, g)?;
            if !(b.degrees_hold && b.e_holds) {
                obstructions.push(format!("branch-order bounds fail at end {}", end.end_id));
            }
            Some(BranchBoundSection {
                end: end.end_id,
                d_lower: b.d_lower,
                d_upper: b.d_upper,
                degrees_hold: b.degrees_hold,
                e_bound: b.e_bound,
                e_holds: b.e_holds,
            })
        })
        .collect();
    for (k, p) in polys.iter().enumerate() {
        if let Some(p) = p {
            if let FoxMilnor::Obstructed { reason } = knots::fox_milnor_test(p) {
                obstructions.push(format!("Fox-Milnor at end {k}: {reason}"));
            }
        }
    }
    let mut concordance = Vec::new();
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if let (Some(a), Some(b)) = (&polys[i], &polys[j]) {
                let f = knots::concordance_obstruction(a, b);
                if let FoxMilnor::Obstructed { reason } = &f {
                    obstructions.push(format!("concordance of ends {i} and {j}: {reason}"));
                }
                concordance.push(ConcordanceSection { ends: [i, j], fox_milnor: FoxMilnorSection::new(&f) });
            }
        }
    }
    if let Some(id) = identity {
        if !branched && id.implied_double_points != Some(0) {
            let what = match id.implied_double_points {
                Some(d) => format!("normal-bundle identity requires signed double points D = {d}"),
                None => "normal-bundle identity has odd defect".into(),
            };
            obstructions.push(if all_transverse && ends.len() > 1 { format!("{what} (transverse ends)") } else { what });
        }
    }
    BoundsSection { genus: g, bennequin, adjunction, branch_order_bounds, concordance, obstructions }
}

fn double_point_section(d: &DoublePointSearch, cfg: &SearchConfig) -> DoublePointSection {
    let reach = |p: &DoublePoint| p.z1.norm().max(p.z2.norm());
    DoublePointSection {
        search_radius: cfg.radius,
        seed: cfg.seed,
        seeds: d.seeds,
        converged: d.converged,
        count: d.points.len(),
        signed_total: d.signed_total(),
        max_residual: sci(d.points.iter().chain(&d.family).map(|p| p.residual).fold(0.0, f64::max)),
        family: d.is_family,
        family_size: d.family.len(),
        family_unbounded: d.is_family && d.family.iter().any(|p| reach(p) > 0.5 * cfg.radius),
        points: d.points.iter().map(PointSection::new).collect(),
        family_sample: d.family.iter().take(8).map(PointSection::new).collect(),
    }
}

fn signed(x: i64) -> String {
    if x > 0 {
        format!("+{x}")
    } else {
        x.to_string()
    }
}

fn reconciliation_section(id: &IdentityReport) -> ReconciliationSection {
    let (status, reason) = match &id.status {
        Reconciliation::Holds => ("holds", None),
        Reconciliation::Fails => ("fails", None),
        Reconciliation::NotApplicable(r) => ("not_applicable", Some(r.clone())),
    };
    let equation = match id.double_point_sum {
        Some(d) => {
            let two_d = 2 * d;
            let rhs = if two_d >= 0 { format!("{} − {}", id.writhe, two_d) } else { format!("{} + {}", id.writhe, -two_d) };
            format!("{} = {}", id.lhs, rhs)
        }
        None => format!("{} = {} − 2D", id.lhs, id.writhe),
    };
    ReconciliationSection {
        lhs: id.lhs,
        writhe: id.writhe,
        double_point_sum: id.double_point_sum,
        implied_double_points: id.implied_double_points,
        status: status.into(),
        reason,
        equation,
    }
}

fn check(out: &mut Vec<RegressionCheck>, key: &str, expected: Option<Value>, actual: Option<Value>) {
    if let Some(expected) = expected {
        let actual = actual.unwrap_or(Value::Null);
        out.push(RegressionCheck { key: key.into(), ok: expected == actual, expected, actual });
    }
}

fn regression(x: &Expected, r: &Report) -> Vec<RegressionCheck> {
    let mut out = Vec::new();
    let curv = r.curvature.ok();
    let ends = r.ends.ok();
    let link = r.link.ok();
    let dp = r.double_points.ok();
    check(&mut out, "conformal", x.conformal.map(Value::from), Some(Value::from(r.conformality.status != "fails")));
    check(
        &mut out,
        "conformality_residual",
        x.conformality_residual.clone().map(Value::from),
        Some(Value::from(r.conformality.residual.clone())),
    );
    check(&mut out, "d_plus", x.d_plus.map(Value::from), curv.map(|c| json!(c.d_plus)));
    check(&mut out, "d_minus", x.d_minus.map(Value::from), curv.map(|c| json!(c.d_minus)));
    check(
        &mut out,
        "end_multiplicities",
        x.end_multiplicities.as_ref().map(|v| json!(v)),
        ends.map(|e| json!(e.ends.iter().map(|e| e.multiplicity).collect::<Vec<_>>())),
    );
    check(&mut out, "branch_order", x.branch_order.map(Value::from), r.immersion.ok().map(|i| json!(i.branch_order)));
    check(
        &mut out,
        "total_curvature_over_pi",
        x.total_curvature_over_pi.map(Value::from),
        curv.map(|c| json!(c.total_curvature_over_pi)),
    );
    check(&mut out, "e", x.e.as_ref().map(|v| json!(v)), link.map(|l| json!(l.knots.iter().map(|k| k.e).collect::<Vec<_>>())));
    check(&mut out, "writhe", x.writhe.map(Value::from), r.writhe.ok().map(|w| json!(w.assembled)));
    check(
        &mut out,
        "torus",
        x.torus.as_ref().map(|v| json!(v)),
        ends.map(|e| json!(e.ends.iter().map(|e| e.torus.as_ref().map(|t| [t.n, t.p])).collect::<Vec<_>>())),
    );
    check(
        &mut out,
        "transverse_ends",
        x.transverse_ends.map(Value::from),
        ends.map(|_| json!(!r.end_pairs.is_empty() && r.end_pairs.iter().all(|p| p.transverse))),
    );
    // a search switched off by the caller is not a regression
    if !matches!(r.double_points, Stage::Skipped { .. }) {
        check(&mut out, "double_points", x.double_points.map(Value::from), dp.map(|d| json!(d.count)));
        check(&mut out, "signed_double_points", x.signed_double_points.map(Value::from), dp.map(|d| json!(d.signed_total)));
        check(&mut out, "double_point_family", x.double_point_family.map(Value::from), dp.map(|d| json!(d.family)));
    }
    check(&mut out, "link_singular", x.link_singular.map(Value::from), Some(json!(is_singular_link(&r.link))));
    out
}

const SINGULAR: &str = "link at infinity is singular";

fn is_singular_link(s: &Stage<LinkSection>) -> bool {
    matches!(s, Stage::Skipped { reason } if reason.starts_with(SINGULAR))
}

fn e_text(e: &[i64]) -> String {
    match e {
        [x] => x.to_string(),
        _ => format!("{e:?}"),
    }
}

/// Runs every stage on a document.
pub fn build_report(doc: &SurfaceDocument, opts: &ReportOptions) -> Result<Report> {
    let s = doc.to_spec()?;
    Ok(build_report_for(&s, doc, opts))
}

fn build_report_for(s: &SurfaceSpec, doc: &SurfaceDocument, opts: &ReportOptions) -> Report {
    let conf = surface::check_conformal(s);
    let conformality = match &conf {
        Ok(c) => conformality_section(c),
        Err(e) => ConformalitySection { status: "fails".into(), residual: e.to_string() },
    };
    let mut r = Report {
        label: doc.label.clone(),
        note: doc.note.clone(),
        conformality,
        immersion: Stage::skipped("not conformal"),
        ends: Stage::skipped("not conformal"),
        curvature: Stage::skipped("not conformal"),
        end_pairs: vec![],
        link: Stage::skipped("not conformal"),
        writhe: Stage::skipped("not conformal"),
        bounds: Stage::skipped("not conformal"),
        double_points: Stage::skipped("not conformal"),
        reconciliation: Stage::skipped("not conformal"),
        regression: vec![],
        outcome: "non-conformal".into(),
        summary: String::new(),
        exit_code: 1,
    };
    if !matches!(conf, Ok(ref c) if c.holds()) {
        r.summary = format!("non-conformal: f1'f2' + f3'f4' = {}", r.conformality.residual);
        if let Some(x) = &doc.expected {
            r.regression = regression(x, &r);
        }
        return r;
    }

    let (b, pts) = surface::branch_data(s);
    r.immersion = Stage::Ok(ImmersionSection { immersed: b == 0, branch_order: b, branch_points: pts.into_iter().map(c6).collect() });
    let ends = surface::end_profiles(s);
    let curv = curvature::total_curvatures(s);
    r.ends = Stage::from_result(ends.clone().map(|e| EndsSection { ends: e.iter().map(end_section).collect() }));
    r.curvature = Stage::from_result(curv.clone().map(|c| curvature_section(&c)));

    let cfg = SearchConfig { seed: opts.seed, ..SearchConfig::new(opts.search_radius) };
    let search = opts.double_points.then(|| double_points::find_double_points_with(s, &cfg));
    r.double_points = match &search {
        Some(d) => Stage::Ok(double_point_section(d, &cfg)),
        None => Stage::skipped("disabled"),
    };
    let unbounded_family = r.double_points.ok().is_some_and(|d| d.family_unbounded);

    let Ok(ends) = ends else {
        r.link = Stage::skipped("no end profiles");
        r.writhe = Stage::skipped("no end profiles");
        r.bounds = Stage::skipped("no end profiles");
        r.reconciliation = Stage::skipped("no end profiles");
        return finish(r, doc, None);
    };
    r.end_pairs = end_pairs(&ends, None);
    let all_transverse = ends.len() > 1 && r.end_pairs.iter().all(|p| p.transverse);

    let link = match link::link_at_infinity_with(s, &ends, opts.radius, opts.samples) {
        Err(e) if unbounded_family && e.exit_code() == 3 => {
            r.link = Stage::Skipped { reason: format!("{SINGULAR}: the self-intersection curve is unbounded ({e})") };
            None
        }
        Err(e) => {
            r.link = Stage::from_result(Err(e));
            None
        }
        Ok(l) => Some(l),
    };
    let Some(link) = link else {
        r.writhe = Stage::skipped("no link");
        r.bounds = Stage::skipped("no link");
        r.reconciliation = Stage::skipped("no link");
        return finish(r, doc, None);
    };
    let (knots, polys): (Vec<KnotSection>, Vec<Option<LaurentIntPoly>>) =
        ends.iter().zip(&link.braids).map(|(e, b)| knot_section(e, b)).unzip();
    r.link = Stage::Ok(LinkSection {
        radius: r6(link.radius),
        stable_radii: link.stable_radii.iter().map(|&x| r6(x)).collect(),
        knots,
    });

    let writhe: Result<WritheReport> = link::writhe_of_link(&link, &ends, link::default_pushoff(&ends));
    r.writhe = Stage::from_result(writhe.clone().map(|w| WritheSection {
        pushoff: v6(&w.x),
        linking_matrix: w.lk.clone(),
        self_pushoff: w.self_pushoff.clone(),
        assembled: w.assembled,
        direct: w.direct,
    }));
    if let Ok(w) = &writhe {
        r.end_pairs = end_pairs(&ends, Some(&w.lk));
    }

    let dsum = search.as_ref().and_then(DoublePointSearch::signed_total);
    let identity = match (&curv, &writhe) {
        (Ok(c), Ok(w)) => Some(link::normal_identity_check(c, w, dsum)),
        _ => None,
    };
    r.reconciliation = match &identity {
        Some(id) => Stage::Ok(reconciliation_section(id)),
        None => Stage::skipped("curvature or writhe unavailable"),
    };
    r.bounds = match &curv {
        Ok(c) => Stage::Ok(bounds_section(c, &ends, &link, &polys, identity.as_ref(), all_transverse)),
        Err(_) => Stage::skipped("curvature unavailable"),
    };
    let forced = all_transverse && identity.as_ref().is_some_and(|id| id.implied_double_points != Some(0));
    finish(r, doc, Some((link.e(), forced)))
}

fn finish(mut r: Report, doc: &SurfaceDocument, link: Option<(Vec<i64>, bool)>) -> Report {
    let dp = r.double_points.ok();
    let found = dp.is_some_and(|d| d.count > 0 || d.family);
    let obstructions: Vec<String> = r.bounds.ok().map(|b| b.obstructions.clone()).unwrap_or_default();
    let rec = r.reconciliation.ok();
    let rec_text = rec.map(|x| {
        let mark = match x.status.as_str() {
            "holds" => " ✓".to_string(),
            "fails" => " ✗".to_string(),
            _ => format!(" (n/a: {})", x.reason.clone().unwrap_or_default()),
        };
        format!("reconciliation {}{mark}", x.equation)
    });
    let (outcome, summary) = match (&link, dp) {
        (Some((_, true)), _) => {
            let d = rec.and_then(|x| x.implied_double_points).map_or("?".into(), signed);
            let found = dp.and_then(|d| d.signed_total).map_or("not searched".into(), |t| format!("D={} found", signed(t)));
            ("obstructed", format!("obstructed: transverse ends force self-intersection (D={d} required, {found})"))
        }
        (_, Some(d)) if d.family => {
            let tail = if is_singular_link(&r.link) { ", link at infinity singular" } else { "" };
            ("immersed", format!("immersed: curve of self-intersection ({} roots){tail}", d.family_size))
        }
        (Some((e, _)), Some(d)) if found => {
            let dt = d.signed_total.map_or("?".into(), signed);
            ("immersed", format!("immersed: e={}, D={dt}, {}", e_text(e), rec_text.clone().unwrap_or_default()))
        }
        (None, Some(d)) if found => ("immersed", format!("immersed: {} double points", d.count)),
        _ if !obstructions.is_empty() => ("obstructed", format!("obstructed: {}", obstructions.join("; "))),
        _ => {
            let tail = match dp {
                Some(d) => format!("{} double points", d.count),
                None => "double points not searched".into(),
            };
            let head = if link.is_some() { "all obstructions pass" } else { "no link at infinity computed" };
            ("embedded-consistent", format!("embedded-consistent: {head}, {tail}"))
        }
    };
    r.outcome = outcome.into();
    r.summary = summary;
    if let Some(x) = &doc.expected {
        r.regression = regression(x, &r);
    }
    let stage_code = [
        r.immersion.exit_code(),
        r.ends.exit_code(),
        r.curvature.exit_code(),
        r.link.exit_code(),
        r.writhe.exit_code(),
        r.bounds.exit_code(),
        r.double_points.exit_code(),
        r.reconciliation.exit_code(),
    ]
    .into_iter()
    .find(|&c| c != 0);
    let claims_embedded = doc.expected.as_ref().is_some_and(|x| x.double_points == Some(0) && x.branch_order == Some(0));
    r.exit_code = if let Some(c) = stage_code {
        c
    } else if r.regression.iter().any(|c| !c.ok) || (claims_embedded && r.outcome != "embedded-consistent") {
        1
    } else {
        0
    };
    r
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn regression_passes(&self) -> bool {
        self.regression.iter().all(|c| c.ok)
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "surface {}", self.label);
        if let Some(n) = &self.note {
            let _ = writeln!(o, "  note: {n}");
        }
        let _ = writeln!(o, "conformality: {} ({})", self.conformality.status, self.conformality.residual);
        if let Some(i) = self.immersion.ok() {
            let _ = writeln!(o, "immersion: {}", if i.immersed { "yes".to_string() } else { format!("branch order {}", i.branch_order) });
        }
        match &self.curvature {
            Stage::Ok(c) => {
                let _ = writeln!(
                    o,
                    "curvature: d+ = {}, d- = {}, total = {}π, normal = {}π (quadrature {:.4}, {:.4})",
                    c.d_plus, c.d_minus, c.total_curvature_over_pi, c.normal_curvature_over_pi, c.quadrature.d_plus, c.quadrature.d_minus
                );
            }
            other => write_stage(&mut o, "curvature", other),
        }
        if let Some(es) = self.ends.ok() {
            for e in &es.ends {
                let torus = e.torus.as_ref().map_or("-".into(), |t| format!("T({}, {})", t.n, t.p));
                let _ = writeln!(o, "end {} at {}: N = {}, second order {}, torus {}", e.id, e.location, e.multiplicity, e.second_order, torus);
            }
        }
        for p in &self.end_pairs {
            let _ = writeln!(
                o,
                "ends {}–{}: planes {} (det {:.6}), lk = {}",
                p.ends[0],
                p.ends[1],
                if p.transverse { "transverse" } else { "not transverse" },
                p.plane_det,
                p.lk.map_or("?".into(), |l| l.to_string())
            );
        }
        match &self.link {
            Stage::Ok(l) => {
                let _ = writeln!(o, "link at R = {:.6e}", l.radius);
                for k in &l.knots {
                    let word = if k.word.is_empty() { "(empty)" } else { &k.word };
                    let _ = writeln!(o, "  end {}: {} strands, e = {}, word {}", k.end, k.strands, k.e, word);
                    match &k.alexander {
                        Stage::Ok(a) => {
                            let fm = if a.fox_milnor.passes {
                                format!("passes, witness {}", a.fox_milnor.witness.clone().unwrap_or_default())
                            } else {
                                format!("obstructed ({})", a.fox_milnor.reason.clone().unwrap_or_default())
                            };
                            let _ = writeln!(o, "    Alexander {}; Fox–Milnor {fm}", a.polynomial);
                        }
                        other => write_stage(&mut o, "    Alexander", other),
                    }
                }
            }
            other => write_stage(&mut o, "link", other),
        }
        match &self.writhe {
            Stage::Ok(w) => {
                let _ = writeln!(o, "writhe at infinity: {} (direct {})", w.assembled, w.direct);
            }
            other => write_stage(&mut o, "writhe", other),
        }
        if let Some(b) = self.bounds.ok() {
            for x in &b.bennequin {
                let _ = writeln!(o, "slice-Bennequin end {}: |{}| vs {}: {}", x.end, x.e, x.rhs, x.outcome);
            }
            if let Stage::Ok(a) = &b.adjunction {
                let _ = writeln!(o, "adjunction: {} vs {} ({})", a.lhs, a.rhs, if a.consistent { "consistent" } else { "inconsistent" });
            }
            for c in &b.concordance {
                let _ = writeln!(o, "concordance ends {}–{}: {}", c.ends[0], c.ends[1], if c.fox_milnor.passes { "passes" } else { "obstructed" });
            }
        }
        match &self.double_points {
            Stage::Ok(d) => {
                let total = d.signed_total.map_or("-".into(), signed);
                let _ = writeln!(
                    o,
                    "double points (|z| ≤ {}): {} isolated, signed total {}, family {} (max residual {})",
                    d.search_radius, d.count, total, d.family, d.max_residual
                );
                for p in &d.points {
                    let _ = writeln!(
                        o,
                        "  z1 = {:+.6}{:+.6}i, z2 = {:+.6}{:+.6}i, sign {}",
                        p.z1[0],
                        p.z1[1],
                        p.z2[0],
                        p.z2[1],
                        p.sign.map_or("?".into(), |s| signed(s as i64))
                    );
                }
            }
            other => write_stage(&mut o, "double points", other),
        }
        if let Some(x) = self.reconciliation.ok() {
            let _ = writeln!(o, "identity d- − d+ = W − 2D: {} ({})", x.equation, x.status);
        }
        for c in self.regression.iter().filter(|c| !c.ok) {
            let _ = writeln!(o, "regression mismatch {}: expected {}, got {}", c.key, c.expected, c.actual);
        }
        let _ = writeln!(o, "{}", self.summary);
        o
    }
}

fn write_stage<T>(o: &mut String, name: &str, s: &Stage<T>) {
    let _ = match s {
        Stage::Failed { error, .. } => writeln!(o, "{name}: failed: {error}"),
        Stage::Skipped { reason } => writeln!(o, "{name}: skipped ({reason})"),
        Stage::Ok(_) => Ok(()),
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn quick() -> ReportOptions {
        ReportOptions { double_points: false, ..Default::default() }
    }

    #[test]
    fn non_conformal_stops_early() {
        let r = build_report(&gallery::fixture("example3_as_printed").unwrap(), &quick()).unwrap();
        assert_eq!(r.outcome, "non-conformal");
        assert_eq!(r.conformality.residual, "6·z^2");
        assert_eq!(r.exit_code, 1);
        assert!(r.regression_passes());
    }

    #[test]
    fn parabola_report() {
        let r = build_report(&gallery::fixture("holomorphic_parabola").unwrap(), &ReportOptions::default()).unwrap();
        assert_eq!(r.outcome, "embedded-consistent", "{}", r.to_text());
        assert!(r.regression_passes(), "{:?}", r.regression);
        assert_eq!(r.exit_code, 0);
        let b = r.bounds.ok().unwrap();
        assert_eq!(b.bennequin[0].outcome, "equality_holomorphic_case");
    }

    #[test]
    fn stage_serialization() {
        let s: Stage<QuadratureSection> = Stage::Skipped { reason: "x".into() };
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"status":"skipped","reason":"x"}"#);
        assert_eq!(r6(-1e-9), 0.0);
        assert_eq!(sig12(-0.0), "0.00000000000e0");
    }
}
