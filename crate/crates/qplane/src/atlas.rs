//! Orchestration and reporting: run the full pipeline at chosen points of
//! each algebra family (representation, tangent data, local quiver,
//! stabilizer weights, defect, singularity descriptor) and emit
//! deterministic machine-readable reports.

use crate::equivar::{
    canonical_generator, scaling_reduction, stabilizer, weighted_quiver, GroupElement,
};
use crate::field::{parse_scalar, CycMatrix, CycScalar, FieldError, Q};
use crate::heis::HeisPair;
use crate::ncalg::{blowup_presentation, BlowupIdeal, Chart};
use crate::reps::{
    blowup_line_rep, blowup_origin_rep, central_character, classify, module_structure,
    section_rep, standard_rep, CharacterPoint, ModuleStructure, RepError, Representation,
    Stratum,
};
use crate::tanspace::{default_degree_bound, defect, local_quiver, LocalQuiver, TangentVector};
use num::integer::gcd;
use num::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

pub const CONVENTIONS_VERSION: &str = "1";

/// The sign/orientation choices every number in a report depends on.
#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub version: &'static str,
    pub commutator: &'static str,
    pub e1_action: &'static str,
    pub weight_sign: &'static str,
    pub word_order: &'static str,
}

pub fn conventions() -> Conventions {
    Conventions {
        version: CONVENTIONS_VERSION,
        commutator: "[a,b] = a b a^-1 b^-1, so [e1,e2] = rho^k I",
        e1_action: "e1 maps basis vector x_i to x_{i-1}; E1 carries 1 at (i-1 mod n, i)",
        weight_sign: "s.v = rho^w v modulo the orbit; w reported as c*deg plus the \
                      symmetric-window conjugation exponent",
        word_order: "monomial words sorted by generator index",
    }
}

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error(
        "conductor {0} shares a factor with 3; the graded trace structure of these \
         algebras needs gcd(n,3)=1 and n >= 2"
    )]
    Conductor(u32),
    #[error("bad point: {0}")]
    Point(String),
    #[error("mathematical check failed: {0}")]
    Math(String),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub fn check_conductor(n: u32) -> Result<(), AtlasError> {
    if n < 2 || gcd(n, 3) != 1 {
        return Err(AtlasError::Conductor(n));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// points
// ---------------------------------------------------------------------------

/// A concrete member of one of the monomial representation families.
#[derive(Debug, Clone)]
pub enum PointSpec {
    /// x = a E1, y = b E2, z = c rho^j E2^-1 E1^-1
    Plane { a: CycScalar, b: CycScalar, c: CycScalar, j: i64 },
    /// X = a E1, Z = b E2^-1 E1^-1, y = d E2 over the blown-up line
    LineBlowup { a: CycScalar, b: CycScalar, d: CycScalar },
    /// X = a E1, Y = b E2, Z = c rho^j E2^-1 E1^-1 over the blown-up origin
    OriginBlowup { a: CycScalar, b: CycScalar, c: CycScalar, j: i64 },
    /// u = a E1, v = b E2, w = c E2^-1 E1^-depth on a chart section algebra
    Section { chart: Chart, a: CycScalar, b: CycScalar, c: CycScalar },
}

impl PointSpec {
    pub fn algebra_name(&self) -> &'static str {
        match self {
            PointSpec::Plane { .. } => "quantum-plane",
            PointSpec::LineBlowup { .. } => "line-blowup",
            PointSpec::OriginBlowup { .. } => "origin-blowup",
            PointSpec::Section { chart: Chart::Line, .. } => "section-line",
            PointSpec::Section { chart: Chart::Origin, .. } => "section-origin",
        }
    }

    /// Input coordinates as display strings, in family order.
    pub fn coordinates(&self) -> Vec<String> {
        match self {
            PointSpec::Plane { a, b, c, j } => {
                let n = a.conductor();
                vec![
                    a.to_string(),
                    b.to_string(),
                    c.to_string(),
                    CycScalar::zeta_pow(n, *j).to_string(),
                ]
            }
            PointSpec::LineBlowup { a, b, d } => {
                vec![a.to_string(), b.to_string(), d.to_string()]
            }
            PointSpec::OriginBlowup { a, b, c, j } => {
                let n = a.conductor();
                vec![
                    a.to_string(),
                    b.to_string(),
                    c.to_string(),
                    CycScalar::zeta_pow(n, *j).to_string(),
                ]
            }
            PointSpec::Section { a, b, c, .. } => {
                vec![a.to_string(), b.to_string(), c.to_string()]
            }
        }
    }

    pub fn build_rep(&self, n: u32) -> Result<Representation, RepError> {
        match self {
            PointSpec::Plane { a, b, c, j } => standard_rep(n, (a, b, c), *j),
            PointSpec::LineBlowup { a, b, d } => blowup_line_rep(n, (a, b, d)),
            PointSpec::OriginBlowup { a, b, c, j } => blowup_origin_rep(n, (a, b, c), *j),
            PointSpec::Section { chart, a, b, c } => section_rep(*chart, n, (a, b, c)),
        }
    }
}

/// Ambient dimension of the trace-compatible representation scheme the
/// family lives in.
pub fn ambient_dim(spec: &PointSpec, n: u32) -> usize {
    let n2 = (n as usize) * (n as usize);
    match spec {
        PointSpec::Plane { .. } | PointSpec::Section { .. } => n2 + 2,
        PointSpec::LineBlowup { .. } | PointSpec::OriginBlowup { .. } => n2 + 3,
    }
}

/// One-parameter deformation directions along the defining family, used as
/// preferred normal-space representatives at simple points.
fn candidates_for(spec: &PointSpec, n: u32) -> Result<Vec<TangentVector>, RepError> {
    let h = HeisPair::psi(n, 1)?;
    let w = h.e2_inv_e1_inv();
    Ok(match spec {
        PointSpec::Plane { .. } => vec![
            TangentVector::from_slot(n, 3, 0, h.e1().clone()),
            TangentVector::from_slot(n, 3, 1, h.e2().clone()),
            TangentVector::from_slot(n, 3, 2, w),
        ],
        PointSpec::LineBlowup { a, b, .. } => {
            let p = blowup_presentation(BlowupIdeal::XZ, n);
            let slot = |name: &str| p.gen_index(name).unwrap() as usize;
            let gens = p.num_gens();
            let mut lock = TangentVector::from_slot(n, gens, slot("x"), h.e1().scale(a));
            lock.set_slot(slot("z"), w.scale(b));
            vec![
                TangentVector::from_slot(n, gens, slot("X"), h.e1().clone()),
                TangentVector::from_slot(n, gens, slot("Z"), w.clone()),
                TangentVector::from_slot(n, gens, slot("y"), h.e2().clone()),
                lock,
            ]
        }
        PointSpec::OriginBlowup { a, b, c, j } => {
            let p = blowup_presentation(BlowupIdeal::XYZ, n);
            let slot = |name: &str| p.gen_index(name).unwrap() as usize;
            let gens = p.num_gens();
            let wj = w.scale(&CycScalar::zeta_pow(n, *j));
            let mut lock = TangentVector::from_slot(n, gens, slot("x"), h.e1().scale(a));
            lock.set_slot(slot("y"), h.e2().scale(b));
            lock.set_slot(slot("z"), wj.scale(c));
            vec![
                TangentVector::from_slot(n, gens, slot("X"), h.e1().clone()),
                TangentVector::from_slot(n, gens, slot("Y"), h.e2().clone()),
                TangentVector::from_slot(n, gens, slot("Z"), wj),
                lock,
            ]
        }
        PointSpec::Section { chart, .. } => {
            let depth = match chart {
                Chart::Line => 2,
                Chart::Origin => 3,
            };
            let deep = h.e2().pow(-1).unwrap().checked_mul(&h.e1().pow(-depth).unwrap()).unwrap();
            vec![
                TangentVector::from_slot(n, 3, 0, h.e1().clone()),
                TangentVector::from_slot(n, 3, 1, h.e2().clone()),
                TangentVector::from_slot(n, 3, 2, deep),
            ]
        }
    })
}

fn stratum_tag(spec: &PointSpec, character: &CharacterPoint, n: u32) -> String {
    match spec {
        PointSpec::Plane { .. } => match classify(n, character) {
            Stratum::FatPoint => "azumaya-generic".into(),
            Stratum::PointSum { .. } => "azumaya-on-vanishing-locus".into(),
            Stratum::LineType { axis } => format!("line-{axis}"),
            Stratum::Trivial => "origin".into(),
        },
        PointSpec::LineBlowup { a, b, .. } => match (a.is_zero(), b.is_zero()) {
            (false, false) => "exceptional-generic".into(),
            (false, true) => "exceptional-boundary-0".into(),
            (true, false) => "exceptional-boundary-infinity".into(),
            (true, true) => "off-family".into(),
        },
        PointSpec::OriginBlowup { a, b, c, .. } => {
            let zeros = [a, b, c].iter().filter(|s| s.is_zero()).count();
            match zeros {
                0 => "exceptional-interior".into(),
                1 => "exceptional-line".into(),
                2 => "exceptional-line-intersection".into(),
                _ => "off-family".into(),
            }
        }
        PointSpec::Section { a, b, c, .. } => {
            let zeros = [a, b, c].iter().filter(|s| s.is_zero()).count();
            if zeros == 0 {
                "section-generic".into()
            } else if !b.is_zero() && a.is_zero() && c.is_zero() {
                "section-semistable".into()
            } else {
                "section-other".into()
            }
        }
    }
}

/// Scalars of the n-th generator powers plus the product word, the data a
/// central point of the family is read off from.
fn center_point(rep: &Representation) -> Result<Vec<String>, RepError> {
    let pres = rep.presentation();
    if pres.gen_index("x").is_ok() {
        let ch = central_character(rep)?;
        return Ok(vec![
            ch.u.to_string(),
            ch.v.to_string(),
            ch.w.to_string(),
            ch.g.to_string(),
        ]);
    }
    // chart algebras: same shape, different generator names
    let n = rep.conductor();
    let mut out = Vec::new();
    let mut product = CycMatrix::identity(n, rep.size());
    for m in rep.images() {
        let p = m.pow(n as i64).map_err(RepError::Field)?;
        let s = p
            .as_scalar()
            .ok_or_else(|| RepError::NotScalar("generator power".to_string()))?;
        out.push(s.to_string());
        product = product.checked_mul(m).map_err(RepError::Field)?;
    }
    let g = product.as_scalar().unwrap_or_else(|| CycScalar::zero(n));
    out.push(g.to_string());
    Ok(out)
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VertexReport {
    pub multiplicity: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArrowReport {
    pub src: usize,
    pub dst: usize,
    pub count: usize,
    pub marked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuiverReport {
    pub vertices: Vec<VertexReport>,
    pub arrows: Vec<ArrowReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub removed_arrow: usize,
    pub removed_weight: i64,
    pub reduced_weights: Vec<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumReport {
    pub algebra: String,
    pub conductor: u32,
    pub point: Vec<String>,
    pub center_point: Vec<String>,
    pub stratum: String,
    pub module_type: String,
    pub tangent_dim: usize,
    pub orbit_dim: usize,
    pub normal_dim: usize,
    pub ambient_dim: usize,
    pub defect: i64,
    pub quiver: QuiverReport,
    pub stabilizer_order: usize,
    pub stabilizer_generator: GroupElement,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionReport>,
    pub singularity: String,
    pub degree_bound: usize,
}

fn quiver_report(q: &LocalQuiver, weights: Option<&[Vec<i64>]>, twist: Option<Vec<usize>>) -> QuiverReport {
    QuiverReport {
        vertices: q
            .vertices
            .iter()
            .map(|v| VertexReport { multiplicity: v.multiplicity, dim: v.dim })
            .collect(),
        arrows: q
            .arrows
            .iter()
            .enumerate()
            .map(|(i, a)| ArrowReport {
                src: a.src,
                dst: a.dst,
                count: a.count,
                marked: a.marked,
                weights: weights.map(|ws| ws[i].clone()),
            })
            .collect(),
        twist,
    }
}

fn singularity_descriptor(
    n: u32,
    simple: bool,
    defect_value: i64,
    center_at_origin: bool,
    reduced: Option<&[i64]>,
) -> String {
    if simple {
        // a scaling-reduced slice exists exactly when a one-parameter
        // stabilizer acts; the quotient singularity is read off its weights
        if let Some(red) = reduced {
            let nz: Vec<i64> = red.iter().copied().filter(|w| *w != 0).collect();
            return match nz.len() {
                0 | 1 => "smooth".into(),
                2 => {
                    let fixed = red.len() - 2;
                    let prefix = match fixed {
                        0 => String::new(),
                        1 => "C x ".into(),
                        k => format!("C^{k} x "),
                    };
                    format!("{}C^2/Z_{} with weights ({}, {})", prefix, n, nz[0], nz[1])
                }
                _ => {
                    let ws: Vec<String> = nz.iter().map(|w| w.to_string()).collect();
                    format!("cyclic quotient with weights ({})", ws.join(", "))
                }
            };
        }
        if defect_value == 0 {
            return "smooth".into();
        }
        format!("singular (defect {defect_value})")
    } else if center_at_origin {
        "origin-type".into()
    } else {
        "non-isolated singular locus (conifold excluded)".into()
    }
}

pub fn stratify(
    n: u32,
    spec: &PointSpec,
    degree_bound: Option<usize>,
) -> Result<StratumReport, AtlasError> {
    check_conductor(n)?;
    let rep = spec.build_rep(n)?;
    stratify_rep(n, spec, &rep, degree_bound)
}

fn stratify_rep(
    n: u32,
    spec: &PointSpec,
    rep: &Representation,
    degree_bound: Option<usize>,
) -> Result<StratumReport, AtlasError> {
    let check = rep.verify();
    if !check.ok {
        let details: Vec<String> =
            check.failures.iter().map(|(i, msg)| format!("relation {i}: {msg}")).collect();
        return Err(AtlasError::Math(details.join("; ")));
    }
    let structure = module_structure(rep)?;
    let simple = matches!(structure, ModuleStructure::Simple);
    let candidates = if simple { candidates_for(spec, n)? } else { Vec::new() };
    let bound = degree_bound.unwrap_or_else(|| default_degree_bound(rep));
    let quiver = local_quiver(rep, bound, &candidates)?;
    let ambient = ambient_dim(spec, n);
    let defect_value = defect(&quiver, ambient);

    let stab = stabilizer(rep)?;
    let generator = canonical_generator(n, &stab);
    let (arrow_weights, twist, reduction) = if stab.len() > 1 {
        let wq = weighted_quiver(rep, &quiver)?;
        let weights: Vec<Vec<i64>> = wq.arrows.iter().map(|a| a.weights.clone()).collect();
        let red = scaling_reduction(rep, &quiver, &wq)?.map(|r| ReductionReport {
            removed_arrow: r.removed_arrow,
            removed_weight: r.removed_weight,
            reduced_weights: r.reduced_weights,
        });
        (Some(weights), wq.twist.clone(), red)
    } else {
        (None, None, None)
    };

    let centers = center_point(rep)?;
    let center_at_origin = centers.iter().all(|s| s == "0");
    let character = if rep.presentation().gen_index("x").is_ok() {
        Some(central_character(rep)?)
    } else {
        None
    };
    let stratum = match &character {
        Some(ch) => stratum_tag(spec, ch, n),
        None => stratum_tag(
            spec,
            // chart algebras never reach the character-based branch
            &CharacterPoint {
                u: CycScalar::zero(n),
                v: CycScalar::zero(n),
                w: CycScalar::zero(n),
                g: CycScalar::zero(n),
            },
            n,
        ),
    };
    let module_type = match &structure {
        ModuleStructure::Simple => "simple".to_string(),
        ModuleStructure::Semisimple { summands } => {
            format!("semisimple({} summands)", summands.len())
        }
    };
    let singularity = singularity_descriptor(
        n,
        simple,
        defect_value,
        center_at_origin,
        reduction.as_ref().map(|r| r.reduced_weights.as_slice()),
    );

    Ok(StratumReport {
        algebra: spec.algebra_name().to_string(),
        conductor: n,
        point: spec.coordinates(),
        center_point: centers,
        stratum,
        module_type,
        tangent_dim: quiver.tangent_dim,
        orbit_dim: quiver.orbit_dim,
        normal_dim: quiver.normal_dim,
        ambient_dim: ambient,
        defect: defect_value,
        quiver: quiver_report(&quiver, arrow_weights.as_deref(), twist),
        stabilizer_order: stab.len(),
        stabilizer_generator: generator,
        reduction,
        singularity,
        degree_bound: bound,
    })
}

// ---------------------------------------------------------------------------
// witness extraction from a central point
// ---------------------------------------------------------------------------

fn rational_nth_root(n: u32, value: &Q) -> Option<Q> {
    if value.is_zero() {
        return Some(Q::zero());
    }
    if value.is_negative() && n % 2 == 0 {
        return None;
    }
    let mag = value.abs();
    let num = mag.numer().nth_root(n);
    let den = mag.denom().nth_root(n);
    let root = Q::new(num.clone(), den.clone());
    let check = Q::new(num.pow(n), den.pow(n));
    if check != mag {
        return None;
    }
    Some(if value.is_negative() { -root } else { root })
}

/// Find monomial-family witnesses (a, b, c, j) realizing a central point of
/// the plane family, trying the sign convention the even-conductor
/// z-coordinate needs.
pub fn plane_point_from_center(
    n: u32,
    coords: &[CycScalar; 4],
) -> Result<PointSpec, AtlasError> {
    let rational = |s: &CycScalar, name: &str| -> Result<Q, AtlasError> {
        s.as_rational().ok_or_else(|| {
            AtlasError::Point(format!(
                "{name}-coordinate must be rational to extract an n-th power witness"
            ))
        })
    };
    let u = rational(&coords[0], "u")?;
    let v = rational(&coords[1], "v")?;
    let w = rational(&coords[2], "w")?;
    let a = rational_nth_root(n, &u)
        .ok_or_else(|| AtlasError::Point(format!("u = {u} is not a rational n-th power")))?;
    let b = rational_nth_root(n, &v)
        .ok_or_else(|| AtlasError::Point(format!("v = {v} is not a rational n-th power")))?;
    let mut c_options = Vec::new();
    if let Some(c) = rational_nth_root(n, &w) {
        c_options.push(c);
    }
    if let Some(c) = rational_nth_root(n, &-w.clone()) {
        if !c_options.contains(&c) {
            c_options.push(c);
        }
    }
    if c_options.is_empty() {
        return Err(AtlasError::Point(format!(
            "w = {w} is not a rational n-th power up to sign"
        )));
    }
    let a = CycScalar::from_rational(n, a);
    let b = CycScalar::from_rational(n, b);
    for c in c_options {
        let c = CycScalar::from_rational(n, c.clone());
        for j in 0..n as i64 {
            let spec = PointSpec::Plane { a: a.clone(), b: b.clone(), c: c.clone(), j };
            let rep = match spec.build_rep(n) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let ch = central_character(&rep)?;
            if ch.u == coords[0] && ch.v == coords[1] && ch.w == coords[2] && ch.g == coords[3]
            {
                return Ok(spec);
            }
        }
    }
    Err(AtlasError::Point(
        "no monomial-family representation matches this central point".into(),
    ))
}

/// Parse "u,v,w,g" with scalars as cyclotomic polynomial strings.
pub fn parse_point(n: u32, input: &str, arity: usize) -> Result<Vec<CycScalar>, AtlasError> {
    let parts: Vec<&str> = input.split(',').collect();
    if parts.len() != arity {
        return Err(AtlasError::Point(format!(
            "expected {arity} comma-separated coordinates, got {}",
            parts.len()
        )));
    }
    parts.iter().map(|p| parse_scalar(n, p).map_err(AtlasError::Field)).collect()
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algebra {
    Plane,
    LineBlowup,
    OriginBlowup,
}

impl Algebra {
    pub fn name(&self) -> &'static str {
        match self {
            Algebra::Plane => "quantum-plane",
            Algebra::LineBlowup => "line-blowup",
            Algebra::OriginBlowup => "origin-blowup",
        }
    }
}

/// Canonical sweep family per algebra: one point per stratum the local
/// analysis distinguishes.
pub fn sweep_points(algebra: Algebra, n: u32) -> Vec<PointSpec> {
    let o = CycScalar::one(n);
    let z = CycScalar::zero(n);
    match algebra {
        Algebra::Plane => vec![
            PointSpec::Plane { a: o.clone(), b: o.clone(), c: o.clone(), j: 0 },
            PointSpec::Plane { a: o.clone(), b: o.clone(), c: z.clone(), j: 0 },
            PointSpec::Plane { a: z.clone(), b: o.clone(), c: z.clone(), j: 0 },
            PointSpec::Plane { a: z.clone(), b: z.clone(), c: z, j: 0 },
        ],
        Algebra::LineBlowup => vec![
            PointSpec::LineBlowup { a: o.clone(), b: o.clone(), d: o.clone() },
            PointSpec::LineBlowup { a: o.clone(), b: z.clone(), d: o.clone() },
            PointSpec::LineBlowup { a: z, b: o.clone(), d: o },
        ],
        Algebra::OriginBlowup => {
            let mut out = Vec::new();
            for (a, b, c) in [
                (1, 1, 1),
                (1, 1, 0),
                (1, 0, 1),
                (0, 1, 1),
                (1, 0, 0),
                (0, 1, 0),
                (0, 0, 1),
            ] {
                let s = |k: i64| if k == 0 { z.clone() } else { o.clone() };
                out.push(PointSpec::OriginBlowup { a: s(a), b: s(b), c: s(c), j: 0 });
            }
            out
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub point: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilizer_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<StratumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub algebra: String,
    pub conductor: u32,
    pub rows: Vec<SweepRow>,
    /// count of points per singularity descriptor ("error" for rows where
    /// the pipeline could not run to completion)
    pub summary: BTreeMap<String, usize>,
}

fn sweep_one(n: u32, spec: &PointSpec, degree_bound: Option<usize>) -> SweepRow {
    let point = spec.coordinates();
    let rep = match spec.build_rep(n) {
        Ok(r) => r,
        Err(e) => {
            return SweepRow { point, stabilizer_order: None, report: None, error: Some(e.to_string()) }
        }
    };
    let stab_order = stabilizer(&rep).ok().map(|s| s.len());
    match stratify_rep(n, spec, &rep, degree_bound) {
        Ok(report) => {
            SweepRow { point, stabilizer_order: stab_order, report: Some(report), error: None }
        }
        Err(e) => SweepRow {
            point,
            stabilizer_order: stab_order,
            report: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn sweep(
    n: u32,
    algebra: Algebra,
    degree_bound: Option<usize>,
) -> Result<SweepReport, AtlasError> {
    check_conductor(n)?;
    let points = sweep_points(algebra, n);
    let rows: Vec<SweepRow> =
        points.par_iter().map(|spec| sweep_one(n, spec, degree_bound)).collect();
    let mut summary = BTreeMap::new();
    for row in &rows {
        let key = match (&row.report, &row.error) {
            (Some(r), _) => r.singularity.clone(),
            (None, Some(_)) => "error".to_string(),
            (None, None) => unreachable!(),
        };
        *summary.entry(key).or_insert(0) += 1;
    }
    Ok(SweepReport { algebra: algebra.name().to_string(), conductor: n, rows, summary })
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    schema_version: u32,
    conventions: Conventions,
    report: &'a T,
}

/// Wrap any report in the versioned envelope and pretty-print it.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let doc = Document { schema_version: 1, conventions: conventions(), report };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
    s.push('\n');
    s
}

/// DOT diagram of a quiver: vertices labeled by their dimension-vector
/// entry, arrows by count, bullets for marked arrows, bracketed weights.
pub fn quiver_dot(q: &QuiverReport) -> String {
    let mut s = String::from("digraph quiver {\n");
    for (i, v) in q.vertices.iter().enumerate() {
        s.push_str(&format!("  v{} [label=\"{}\"];\n", i, v.multiplicity));
    }
    for a in &q.arrows {
        let mut label = a.count.to_string();
        for _ in 0..a.marked {
            label.push('•');
        }
        if let Some(ws) = &a.weights {
            for w in ws {
                label.push_str(&format!(" [{w}]"));
            }
        }
        s.push_str(&format!("  v{} -> v{} [label=\"{}\"];\n", a.src, a.dst, label));
    }
    if let Some(t) = &q.twist {
        let cycle: Vec<String> = t.iter().map(|i| i.to_string()).collect();
        s.push_str(&format!("  label=\"twist: ({})\";\n", cycle.join(" ")));
    }
    s.push_str("}\n");
    s
}

/// Markdown rendering of a stratum report.
pub fn report_markdown(r: &StratumReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("# {} at n = {}\n\n", r.algebra, r.conductor));
    s.push_str(&format!("- point: ({})\n", r.point.join(", ")));
    s.push_str(&format!("- center point: ({})\n", r.center_point.join(", ")));
    s.push_str(&format!("- stratum: {}\n", r.stratum));
    s.push_str(&format!("- module type: {}\n", r.module_type));
    s.push_str(&format!(
        "- tangent / orbit / normal: {} / {} / {} (ambient {})\n",
        r.tangent_dim, r.orbit_dim, r.normal_dim, r.ambient_dim
    ));
    s.push_str(&format!("- defect: {}\n", r.defect));
    s.push_str(&format!(
        "- stabilizer: order {}, generator ({}, {}, {})\n",
        r.stabilizer_order,
        r.stabilizer_generator.a,
        r.stabilizer_generator.b,
        r.stabilizer_generator.c
    ));
    if let Some(red) = &r.reduction {
        let ws: Vec<String> = red.reduced_weights.iter().map(|w| w.to_string()).collect();
        s.push_str(&format!(
            "- scaling reduction: removed weight {} from arrow {}, leaving ({})\n",
            red.removed_weight,
            red.removed_arrow,
            ws.join(", ")
        ));
    }
    s.push_str(&format!("- singularity: {}\n\n", r.singularity));
    s.push_str("| arrow | count | marked | weights |\n|---|---|---|---|\n");
    for a in &r.quiver.arrows {
        let ws = a
            .weights
            .as_ref()
            .map(|ws| {
                ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ")
            })
            .unwrap_or_default();
        s.push_str(&format!(
            "| {} -> {} | {} | {} | {} |\n",
            a.src, a.dst, a.count, a.marked, ws
        ));
    }
    if let Some(t) = &r.quiver.twist {
        let cycle: Vec<String> = t.iter().map(|i| i.to_string()).collect();
        s.push_str(&format!("\ntwist: ({})\n", cycle.join(" ")));
    }
    s
}

/// Markdown summary table of a sweep.
pub fn sweep_markdown(r: &SweepReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("# sweep of {} at n = {}\n\n", r.algebra, r.conductor));
    s.push_str("| point | stratum | module | defect | stabilizer | singularity |\n");
    s.push_str("|---|---|---|---|---|---|\n");
    for row in &r.rows {
        let point = format!("({})", row.point.join(", "));
        match (&row.report, &row.error) {
            (Some(rep), _) => {
                s.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} |\n",
                    point,
                    rep.stratum,
                    rep.module_type,
                    rep.defect,
                    rep.stabilizer_order,
                    rep.singularity
                ));
            }
            (None, Some(e)) => {
                let stab = row
                    .stabilizer_order
                    .map(|o| o.to_string())
                    .unwrap_or_else(|| "-".into());
                s.push_str(&format!("| {point} | - | - | - | {stab} | error: {e} |\n"));
            }
            (None, None) => unreachable!(),
        }
    }
    s.push_str("\nsummary:\n");
    for (k, v) in &r.summary {
        s.push_str(&format!("- {k}: {v}\n"));
    }
    s
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_spec(n: u32, a: i64, b: i64, c: i64, j: i64) -> PointSpec {
        PointSpec::Plane {
            a: CycScalar::from_int(n, a),
            b: CycScalar::from_int(n, b),
            c: CycScalar::from_int(n, c),
            j,
        }
    }

    #[test]
    fn conductor_multiples_of_three_are_rejected() {
        for n in [3u32, 6, 9] {
            assert!(matches!(check_conductor(n), Err(AtlasError::Conductor(_))));
        }
        for n in [2u32, 4, 5, 7] {
            assert!(check_conductor(n).is_ok());
        }
    }

    #[test]
    fn azumaya_report_is_smooth_with_three_loops() {
        let n = 5;
        let r = stratify(n, &plane_spec(n, 1, 1, 1, 0), None).unwrap();
        assert_eq!(r.stratum, "azumaya-generic");
        assert_eq!(r.module_type, "simple");
        assert_eq!((r.tangent_dim, r.orbit_dim, r.normal_dim), (27, 24, 3));
        assert_eq!(r.defect, 0);
        assert_eq!(r.quiver.vertices.len(), 1);
        assert_eq!(r.quiver.arrows.len(), 1);
        assert_eq!(r.quiver.arrows[0].count, 3);
        assert_eq!(r.stabilizer_order, 1);
        assert!(r.quiver.arrows[0].weights.is_none(), "trivial stabilizer stays unweighted");
        assert_eq!(r.singularity, "smooth");
    }

    #[test]
    fn vanishing_locus_azumaya_report_carries_weights() {
        let n = 5;
        let r = stratify(n, &plane_spec(n, 1, 1, 0, 0), None).unwrap();
        assert_eq!(r.stratum, "azumaya-on-vanishing-locus");
        assert_eq!(r.defect, 0);
        assert_eq!(r.stabilizer_order, 5);
        assert_eq!(r.quiver.arrows[0].weights, Some(vec![0, 0, 3]));
        assert_eq!(r.singularity, "smooth");
    }

    #[test]
    fn line_report_notes_the_missing_isolated_singularity() {
        let n = 5;
        let r = stratify(n, &plane_spec(n, 0, 1, 0, 0), None).unwrap();
        assert_eq!(r.stratum, "line-v");
        assert_eq!(r.module_type, "semisimple(5 summands)");
        assert_eq!(r.defect, (n - 1) as i64);
        assert_eq!(r.quiver.twist, Some(vec![1, 2, 3, 4, 0]));
        assert!(r.singularity.contains("conifold excluded"), "{}", r.singularity);
    }

    #[test]
    fn origin_report_is_origin_type() {
        let n = 5;
        let r = stratify(n, &plane_spec(n, 0, 0, 0, 0), None).unwrap();
        assert_eq!(r.stratum, "origin");
        assert_eq!(r.defect, 2 * 25 - 5);
        assert_eq!(r.singularity, "origin-type");
        assert_eq!(r.quiver.vertices[0].multiplicity, 5);
        assert_eq!(r.quiver.arrows[0].marked, 3);
    }

    #[test]
    fn line_blowup_boundary_reports_the_cyclic_quotient() {
        let n = 5;
        let o = CycScalar::one(n);
        let z = CycScalar::zero(n);
        let r = stratify(
            n,
            &PointSpec::LineBlowup { a: o.clone(), b: z.clone(), d: o.clone() },
            None,
        )
        .unwrap();
        assert_eq!(r.stratum, "exceptional-boundary-0");
        assert_eq!(r.singularity, "C x C^2/Z_5 with weights (-2, 1)");
        let r = stratify(n, &PointSpec::LineBlowup { a: z, b: o.clone(), d: o }, None).unwrap();
        assert_eq!(r.stratum, "exceptional-boundary-infinity");
        assert_eq!(r.singularity, "C x C^2/Z_5 with weights (2, -1)");
    }

    #[test]
    fn plane_sweep_defect_profile() {
        let n = 5;
        let sweep = sweep(n, Algebra::Plane, None).unwrap();
        let defects: Vec<i64> =
            sweep.rows.iter().map(|r| r.report.as_ref().unwrap().defect).collect();
        assert_eq!(defects, vec![0, 0, 4, 45]);
    }

    #[test]
    fn origin_blowup_sweep_flags_three_singular_lines() {
        let n = 5;
        let sweep = sweep(n, Algebra::OriginBlowup, None).unwrap();
        let mut line_count = 0;
        for row in &sweep.rows {
            if let Some(rep) = &row.report {
                match rep.stratum.as_str() {
                    "exceptional-interior" => {
                        assert_eq!(rep.singularity, "smooth");
                        assert_eq!(row.stabilizer_order, Some(1));
                    }
                    "exceptional-line" => {
                        line_count += 1;
                        assert!(rep.singularity.starts_with("C x C^2/Z_5"));
                        assert_eq!(row.stabilizer_order, Some(5));
                    }
                    _ => {}
                }
            } else {
                // intersection points outside the diagonal family still show
                // their nontrivial symmetry
                assert!(row.stabilizer_order.unwrap() > 1);
            }
        }
        assert_eq!(line_count, 3);
    }

    #[test]
    fn sweeps_serialize_identically_across_runs() {
        let n = 4;
        let a = to_json(&sweep(n, Algebra::Plane, None).unwrap());
        let b = to_json(&sweep(n, Algebra::Plane, None).unwrap());
        assert_eq!(a, b);
        assert!(a.contains("\"conventions\""));
    }

    #[test]
    fn witnesses_recover_a_central_point() {
        let n = 5;
        let one = CycScalar::one(n);
        let rho = CycScalar::zeta(n);
        let coords = [one.clone(), one.clone(), one.clone(), rho];
        let spec = plane_point_from_center(n, &coords).unwrap();
        match &spec {
            PointSpec::Plane { j, .. } => assert_eq!(*j, 1),
            _ => panic!("wrong family"),
        }
        let r = stratify(n, &spec, None).unwrap();
        assert_eq!(r.stratum, "azumaya-generic");
        assert_eq!(r.center_point[3], CycScalar::zeta(n).to_string());
    }

    #[test]
    fn witness_extraction_handles_the_even_conductor_sign() {
        let n = 4;
        let one = CycScalar::one(n);
        // the monomial family with rational c realizes w = -c^n when n is even
        let minus = CycScalar::from_int(n, -1);
        let coords = [one.clone(), one.clone(), minus, one.clone()];
        let spec = plane_point_from_center(n, &coords).unwrap();
        match &spec {
            PointSpec::Plane { c, j, .. } => {
                assert_eq!(*c, CycScalar::one(n));
                assert_eq!(*j, 0);
            }
            _ => panic!("wrong family"),
        }
    }

    #[test]
    fn dot_output_lists_vertices_and_weight_labels() {
        let n = 5;
        let r = stratify(n, &plane_spec(n, 1, 1, 0, 0), None).unwrap();
        let dot = quiver_dot(&r.quiver);
        assert!(dot.starts_with("digraph quiver {"));
        assert!(dot.contains("v0 [label=\"1\"]"));
        assert!(dot.contains("[3]"), "{dot}");
    }

    #[test]
    fn chart_section_semistable_report() {
        let n = 5;
        let o = CycScalar::one(n);
        let z = CycScalar::zero(n);
        let r = stratify(
            n,
            &PointSpec::Section { chart: Chart::Origin, a: z.clone(), b: o, c: z },
            None,
        )
        .unwrap();
        assert_eq!(r.algebra, "section-origin");
        assert_eq!(r.stratum, "section-semistable");
        assert_eq!((r.tangent_dim, r.orbit_dim, r.normal_dim), (31, 20, 11));
        assert_eq!(r.defect, 4);
    }
}
