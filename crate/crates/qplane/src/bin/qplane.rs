//! Command-line front end: build representations at chosen points, report
//! tangent data, quivers, stabilizers, and stratified sweeps as JSON,
//! Graphviz, or Markdown.

use clap::{Args, Parser, Subcommand, ValueEnum};
use qplane::atlas::{
    check_conductor, parse_point, plane_point_from_center, quiver_dot, report_markdown,
    sweep, sweep_markdown, to_json, Algebra, AtlasError, PointSpec, StratumReport,
};
use qplane::equivar::{canonical_generator, stabilizer, GroupElement};
use qplane::field::{CycScalar, FieldError};
use qplane::heis::verify_heis_identities;
use qplane::invar::{decompose, is_invariant, recompose};
use qplane::ncalg::{
    blowup_presentation, chart_presentation, BlowupIdeal, Chart, NcPoly, Presentation,
};
use qplane::reps::standard_rep;
use serde::Serialize;
use std::panic::AssertUnwindSafe;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qplane",
    about = "exact local geometry of quantum-plane representation schemes",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum IdealArg {
    /// blow up the ideal (x, z)
    Xz,
    /// blow up the maximal ideal (x, y, z)
    Xyz,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChartArg {
    /// section algebra over a point of the blown-up line
    Line,
    /// section algebra over the blown-up origin
    Origin,
}

#[derive(Args)]
struct OutArgs {
    /// output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// write to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Point selection shared by the per-point commands. Scalars are cyclotomic
/// polynomial strings in z, e.g. "1", "-2/3", "z^2 - 1".
#[derive(Args)]
struct Target {
    /// root-of-unity order (needs gcd(n,3) = 1)
    #[arg(long)]
    n: u32,
    /// comma-separated coordinates: without --ideal/--chart these are
    /// central coordinates u,v,w,g of the plane and a monomial witness is
    /// searched; with --ideal or --chart they are the three family
    /// parameters directly
    #[arg(long)]
    point: String,
    /// work over a blow-up algebra instead of the plane
    #[arg(long, conflicts_with = "chart")]
    ideal: Option<IdealArg>,
    /// work over a chart section algebra instead of the plane
    #[arg(long)]
    chart: Option<ChartArg>,
    /// exponent j twisting the z-image by rho^j (origin blow-up and plane
    /// witnesses only)
    #[arg(long, default_value_t = 0)]
    twist: i64,
}

#[derive(Subcommand)]
enum Cmd {
    /// verify the finite Heisenberg pair identities for every unit exponent
    HeisCheck {
        /// root-of-unity order
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// build the representation at a point and summarize it
    Rep {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        out: OutArgs,
    },
    /// tangent, orbit, and normal dimensions at a point
    Tangent {
        #[command(flatten)]
        target: Target,
        /// trace-relation degree bound (default n+2)
        #[arg(long)]
        trace_bound: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// local quiver at a point, weighted when a stabilizer acts
    Quiver {
        #[command(flatten)]
        target: Target,
        /// trace-relation degree bound (default n+2)
        #[arg(long)]
        trace_bound: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// monomial-family stabilizer at a point
    Stabilizer {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        out: OutArgs,
    },
    /// presentation of a blow-up or chart algebra; blow-ups also report the
    /// ambient embedding, charts verify their relations in the section model
    Blowup {
        /// root-of-unity order
        #[arg(long)]
        n: u32,
        /// blow-up ideal
        #[arg(long, conflicts_with = "chart")]
        ideal: Option<IdealArg>,
        /// chart section algebra
        #[arg(long)]
        chart: Option<ChartArg>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// invariant-monomial scan and the central n-th power relation
    Invariants {
        /// root-of-unity order
        #[arg(long)]
        n: u32,
        /// total-degree bound for the exhaustive scan (default 3n)
        #[arg(long)]
        degree_bound: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// stratify the canonical point family of an algebra
    Sweep {
        /// root-of-unity order
        #[arg(long)]
        n: u32,
        /// sweep a blow-up instead of the plane
        #[arg(long)]
        ideal: Option<IdealArg>,
        /// trace-relation degree bound (default n+2)
        #[arg(long)]
        trace_bound: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
}

enum CliError {
    /// exit code 1
    Math(String),
    /// exit code 2
    Usage(String),
}

impl From<AtlasError> for CliError {
    fn from(e: AtlasError) -> Self {
        match &e {
            AtlasError::Conductor(_) | AtlasError::Point(_) => CliError::Usage(e.to_string()),
            AtlasError::Field(FieldError::Parse(_)) => CliError::Usage(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<qplane::reps::RepError> for CliError {
    fn from(e: qplane::reps::RepError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match &e {
            FieldError::Parse(_) | FieldError::InvalidConductor(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<qplane::ncalg::AlgError> for CliError {
    fn from(e: qplane::ncalg::AlgError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl Target {
    fn resolve(&self) -> Result<(u32, PointSpec), CliError> {
        let n = self.n;
        check_conductor(n)?;
        if let Some(ideal) = self.ideal {
            let coords = parse_point(n, &self.point, 3)?;
            return Ok(match ideal {
                IdealArg::Xz => (
                    n,
                    PointSpec::LineBlowup {
                        a: coords[0].clone(),
                        b: coords[1].clone(),
                        d: coords[2].clone(),
                    },
                ),
                IdealArg::Xyz => (
                    n,
                    PointSpec::OriginBlowup {
                        a: coords[0].clone(),
                        b: coords[1].clone(),
                        c: coords[2].clone(),
                        j: self.twist,
                    },
                ),
            });
        }
        if let Some(chart) = self.chart {
            let coords = parse_point(n, &self.point, 3)?;
            let chart = match chart {
                ChartArg::Line => Chart::Line,
                ChartArg::Origin => Chart::Origin,
            };
            return Ok((
                n,
                PointSpec::Section {
                    chart,
                    a: coords[0].clone(),
                    b: coords[1].clone(),
                    c: coords[2].clone(),
                },
            ));
        }
        let coords = parse_point(n, &self.point, 4)?;
        let coords: [CycScalar; 4] =
            [coords[0].clone(), coords[1].clone(), coords[2].clone(), coords[3].clone()];
        Ok((n, plane_point_from_center(n, &coords)?))
    }
}

fn emit(out: &OutArgs, json: String, md: Option<String>, dot: Option<String>) -> Result<(), CliError> {
    let text = match out.format {
        Format::Json => json,
        Format::Md => md.ok_or_else(|| {
            CliError::Usage("markdown output is not available for this command".into())
        })?,
        Format::Dot => dot.ok_or_else(|| {
            CliError::Usage("dot output needs a quiver-bearing command".into())
        })?,
    };
    match &out.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// per-command reports
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RepSummary {
    algebra: String,
    conductor: u32,
    point: Vec<String>,
    center_point: Vec<String>,
    stratum: String,
    module_type: String,
    relations_hold: bool,
}

#[derive(Serialize)]
struct TangentSummary {
    algebra: String,
    conductor: u32,
    point: Vec<String>,
    tangent_dim: usize,
    orbit_dim: usize,
    normal_dim: usize,
    ambient_dim: usize,
    defect: i64,
    degree_bound: usize,
}

#[derive(Serialize)]
struct StabilizerSummary {
    algebra: String,
    conductor: u32,
    point: Vec<String>,
    order: usize,
    generator: GroupElement,
}

#[derive(Serialize)]
struct RelationLine {
    relation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    ambient_image: Option<String>,
}

#[derive(Serialize)]
struct PresentationSummary {
    algebra: String,
    conductor: u32,
    generators: Vec<GenLine>,
    relations: Vec<RelationLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    embeds_to_zero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_relations_hold: Option<bool>,
}

#[derive(Serialize)]
struct GenLine {
    name: String,
    grading_degree: i64,
}

#[derive(Serialize)]
struct CenterRelation {
    lambda: String,
    rho_power: i64,
    matches_matrix_evaluation: bool,
}

#[derive(Serialize)]
struct InvariantsSummary {
    conductor: u32,
    degree_bound: u64,
    monomials_checked: usize,
    invariant_count: usize,
    congruence_matches_invariance: bool,
    decomposition_failures: usize,
    center_relation: CenterRelation,
}

fn stratum_report(target: &Target, trace_bound: Option<usize>) -> Result<StratumReport, CliError> {
    let (n, spec) = target.resolve()?;
    Ok(qplane::atlas::stratify(n, &spec, trace_bound)?)
}

fn run_heis_check(n: u32, out: &OutArgs) -> Result<(), CliError> {
    check_conductor(n)?;
    let mut rows = Vec::new();
    for k in 1..n as i64 {
        if num::integer::gcd(k, n as i64) != 1 {
            continue;
        }
        rows.push(verify_heis_identities(n, k)?);
    }
    let all_ok = rows.iter().all(|r| r.ok);
    let mut md = format!("# Heisenberg pair identities at n = {n}\n\n");
    md.push_str("| k | orders | commutator | exchange | triple power | ok |\n");
    md.push_str("|---|---|---|---|---|---|\n");
    for r in &rows {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            r.k,
            r.e1_order_divides_n && r.e2_order_divides_n,
            r.commutator_is_rho_k,
            r.exchange_rule,
            r.triple_power,
            r.ok
        ));
    }
    emit(out, to_json(&rows), Some(md), None)?;
    if !all_ok {
        return Err(CliError::Math("a Heisenberg identity failed".into()));
    }
    Ok(())
}

fn run_rep(target: &Target, out: &OutArgs) -> Result<(), CliError> {
    let r = stratum_report(target, None)?;
    let summary = RepSummary {
        algebra: r.algebra.clone(),
        conductor: r.conductor,
        point: r.point.clone(),
        center_point: r.center_point.clone(),
        stratum: r.stratum.clone(),
        module_type: r.module_type.clone(),
        relations_hold: true,
    };
    let md = format!(
        "# {} representation at n = {}\n\n- point: ({})\n- center point: ({})\n- stratum: {}\n- module type: {}\n- relations hold: true\n",
        summary.algebra,
        summary.conductor,
        summary.point.join(", "),
        summary.center_point.join(", "),
        summary.stratum,
        summary.module_type
    );
    emit(out, to_json(&summary), Some(md), None)
}

fn run_tangent(target: &Target, trace_bound: Option<usize>, out: &OutArgs) -> Result<(), CliError> {
    let r = stratum_report(target, trace_bound)?;
    let summary = TangentSummary {
        algebra: r.algebra.clone(),
        conductor: r.conductor,
        point: r.point.clone(),
        tangent_dim: r.tangent_dim,
        orbit_dim: r.orbit_dim,
        normal_dim: r.normal_dim,
        ambient_dim: r.ambient_dim,
        defect: r.defect,
        degree_bound: r.degree_bound,
    };
    let md = format!(
        "# tangent data for {} at n = {}\n\n- point: ({})\n- tangent / orbit / normal: {} / {} / {}\n- ambient: {}\n- defect: {}\n- degree bound: {}\n",
        summary.algebra,
        summary.conductor,
        summary.point.join(", "),
        summary.tangent_dim,
        summary.orbit_dim,
        summary.normal_dim,
        summary.ambient_dim,
        summary.defect,
        summary.degree_bound
    );
    emit(out, to_json(&summary), Some(md), None)
}

fn run_quiver(target: &Target, trace_bound: Option<usize>, out: &OutArgs) -> Result<(), CliError> {
    let r = stratum_report(target, trace_bound)?;
    let dot = quiver_dot(&r.quiver);
    let md = report_markdown(&r);
    emit(out, to_json(&r), Some(md), Some(dot))
}

fn run_stabilizer(target: &Target, out: &OutArgs) -> Result<(), CliError> {
    let (n, spec) = target.resolve()?;
    let rep = spec.build_rep(n)?;
    let stab = stabilizer(&rep)?;
    let generator = canonical_generator(n, &stab);
    let summary = StabilizerSummary {
        algebra: spec.algebra_name().to_string(),
        conductor: n,
        point: spec.coordinates(),
        order: stab.len(),
        generator,
    };
    let md = format!(
        "# stabilizer for {} at n = {}\n\n- point: ({})\n- order: {}\n- generator: ({}, {}, {})\n",
        summary.algebra,
        summary.conductor,
        summary.point.join(", "),
        summary.order,
        summary.generator.a,
        summary.generator.b,
        summary.generator.c
    );
    emit(out, to_json(&summary), Some(md), None)
}

fn run_blowup(
    n: u32,
    ideal: Option<IdealArg>,
    chart: Option<ChartArg>,
    out: &OutArgs,
) -> Result<(), CliError> {
    check_conductor(n)?;
    let pres = match (ideal, chart) {
        (Some(IdealArg::Xz), None) => blowup_presentation(BlowupIdeal::XZ, n),
        (Some(IdealArg::Xyz), None) => blowup_presentation(BlowupIdeal::XYZ, n),
        (None, Some(ChartArg::Line)) => chart_presentation(Chart::Line, n),
        (None, Some(ChartArg::Origin)) => chart_presentation(Chart::Origin, n),
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of --ideal or --chart".into(),
            ))
        }
    };
    // blow-ups embed into the plane polynomially; chart sections are built
    // from fractions, so their relations are checked in the matrix model
    let embedded = pres.ambient().is_some();
    let mut relations = Vec::new();
    let mut embeds = embedded.then_some(true);
    for rel in pres.relations() {
        let ambient_image = if embedded {
            let image = pres.embed(rel)?;
            if !image.is_zero() {
                embeds = Some(false);
            }
            let amb = pres.ambient().unwrap();
            Some(amb.format_poly(&image))
        } else {
            None
        };
        relations.push(RelationLine { relation: pres.format_poly(rel), ambient_image });
    }
    let model_relations_hold = match chart {
        Some(c) => {
            let which = match c {
                ChartArg::Line => Chart::Line,
                ChartArg::Origin => Chart::Origin,
            };
            let one = CycScalar::from_int(n, 1);
            let rep = qplane::reps::section_rep(which, n, (&one, &one, &one))
                .map_err(|e| CliError::Math(e.to_string()))?;
            Some(rep.verify().ok)
        }
        None => None,
    };
    let summary = PresentationSummary {
        algebra: pres.name().to_string(),
        conductor: n,
        generators: pres
            .gens()
            .iter()
            .map(|g| GenLine { name: g.name.clone(), grading_degree: g.cstar_degree })
            .collect(),
        relations,
        embeds_to_zero: embeds,
        model_relations_hold,
    };
    let mut md = format!("# {} at n = {}\n\n", summary.algebra, summary.conductor);
    md.push_str("| generator | grading degree |\n|---|---|\n");
    for g in &summary.generators {
        md.push_str(&format!("| {} | {} |\n", g.name, g.grading_degree));
    }
    if embedded {
        md.push_str("\n| relation | ambient image |\n|---|---|\n");
        for r in &summary.relations {
            md.push_str(&format!(
                "| {} | {} |\n",
                r.relation,
                r.ambient_image.as_deref().unwrap_or("-")
            ));
        }
    } else {
        md.push_str("\n| relation |\n|---|\n");
        for r in &summary.relations {
            md.push_str(&format!("| {} |\n", r.relation));
        }
    }
    if let Some(e) = summary.embeds_to_zero {
        md.push_str(&format!("\nembeds to zero: {e}\n"));
    }
    if let Some(m) = summary.model_relations_hold {
        md.push_str(&format!("\nmodel relations hold: {m}\n"));
    }
    emit(out, to_json(&summary), Some(md), None)?;
    if embeds == Some(false) {
        return Err(CliError::Math(
            "a defining relation does not vanish in the ambient algebra".into(),
        ));
    }
    if model_relations_hold == Some(false) {
        return Err(CliError::Math(
            "a defining relation does not hold in the section model".into(),
        ));
    }
    Ok(())
}

fn center_relation(n: u32) -> Result<CenterRelation, CliError> {
    let pres = Presentation::quantum_plane(n);
    let mut word = Vec::new();
    for _ in 0..n {
        word.extend_from_slice(&[0u8, 1, 2]);
    }
    let (coeff, sorted) = pres.sort_word(&word)?;
    let mut expected = Vec::new();
    for g in 0..3u8 {
        expected.extend(std::iter::repeat(g).take(n as usize));
    }
    if sorted != expected {
        return Err(CliError::Math(
            "normal form of (xyz)^n is not a multiple of x^n y^n z^n".into(),
        ));
    }
    let lambda = coeff.inv()?;
    let rho_power = (0..n as i64)
        .find(|j| CycScalar::zeta_pow(n, *j) == lambda)
        .ok_or_else(|| CliError::Math("the central relation scalar is not a root of unity".into()))?;
    // cross-check on a matrix representation with invertible images
    let one = CycScalar::one(n);
    let rep = standard_rep(n, (&one, &one, &one), 0)?;
    let lhs = rep.eval(&NcPoly::monomial(n, expected, one.clone()));
    let rhs = rep.eval(&NcPoly::monomial(n, word, one)).scale(&lambda);
    Ok(CenterRelation {
        lambda: lambda.to_string(),
        rho_power,
        matches_matrix_evaluation: lhs == rhs,
    })
}

fn run_invariants(n: u32, degree_bound: Option<u64>, out: &OutArgs) -> Result<(), CliError> {
    check_conductor(n)?;
    let bound = degree_bound.unwrap_or(3 * n as u64);
    let mut checked = 0usize;
    let mut invariant_count = 0usize;
    let mut congruence_ok = true;
    let mut failures = 0usize;
    for k in 0..=bound {
        for l in 0..=bound - k {
            for m in 0..=bound - k - l {
                checked += 1;
                let inv = is_invariant(n, (k, l, m));
                let congruent = k % n as u64 == l % n as u64 && l % n as u64 == m % n as u64;
                if inv != congruent {
                    congruence_ok = false;
                }
                match decompose(n, (k, l, m)) {
                    Some(wrd) => {
                        if !inv || recompose(n, &wrd) != (k, l, m) {
                            failures += 1;
                        }
                    }
                    None => {
                        if inv {
                            failures += 1;
                        }
                    }
                }
                if inv {
                    invariant_count += 1;
                }
            }
        }
    }
    let center = center_relation(n)?;
    let center_ok = center.matches_matrix_evaluation;
    let summary = InvariantsSummary {
        conductor: n,
        degree_bound: bound,
        monomials_checked: checked,
        invariant_count,
        congruence_matches_invariance: congruence_ok,
        decomposition_failures: failures,
        center_relation: center,
    };
    let md = format!(
        "# invariants at n = {n}\n\n- degree bound: {}\n- monomials checked: {}\n- invariant: {}\n- congruence test matches: {}\n- decomposition failures: {}\n- center relation: x^n y^n z^n = {} (xyz)^n, matrix check {}\n",
        summary.degree_bound,
        summary.monomials_checked,
        summary.invariant_count,
        summary.congruence_matches_invariance,
        summary.decomposition_failures,
        summary.center_relation.lambda,
        summary.center_relation.matches_matrix_evaluation
    );
    emit(out, to_json(&summary), Some(md), None)?;
    if !congruence_ok || failures > 0 || !center_ok {
        return Err(CliError::Math("an invariance check failed".into()));
    }
    Ok(())
}

fn run_sweep(
    n: u32,
    ideal: Option<IdealArg>,
    trace_bound: Option<usize>,
    out: &OutArgs,
) -> Result<(), CliError> {
    let algebra = match ideal {
        None => Algebra::Plane,
        Some(IdealArg::Xz) => Algebra::LineBlowup,
        Some(IdealArg::Xyz) => Algebra::OriginBlowup,
    };
    let report = sweep(n, algebra, trace_bound)?;
    let md = sweep_markdown(&report);
    emit(out, to_json(&report), Some(md), None)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::HeisCheck { n, out } => run_heis_check(*n, out),
        Cmd::Rep { target, out } => run_rep(target, out),
        Cmd::Tangent { target, trace_bound, out } => run_tangent(target, *trace_bound, out),
        Cmd::Quiver { target, trace_bound, out } => run_quiver(target, *trace_bound, out),
        Cmd::Stabilizer { target, out } => run_stabilizer(target, out),
        Cmd::Blowup { n, ideal, chart, out } => run_blowup(*n, *ideal, *chart, out),
        Cmd::Invariants { n, degree_bound, out } => run_invariants(*n, *degree_bound, out),
        Cmd::Sweep { n, ideal, trace_bound, out } => run_sweep(*n, *ideal, *trace_bound, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(AssertUnwindSafe(|| run(&cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(CliError::Math(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(CliError::Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: mathematical assertion failed");
            ExitCode::from(1)
        }
    }
}
