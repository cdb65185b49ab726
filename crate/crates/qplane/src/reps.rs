//! Finite-dimensional matrix representations of the presented algebras:
//! construction of the standard families, relation checking, central
//! characters, stratum classification, and semisimple decomposition.

use crate::field::{rank_kernel, CycMatrix, CycScalar, FieldError};
use crate::heis::HeisPair;
use crate::ncalg::{AlgError, BlowupIdeal, Chart, NcPoly, Presentation, Word};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error("image count {0} does not match generator count {1}")]
    ImageCount(usize, usize),
    #[error("central element '{0}' does not act by a scalar")]
    NotScalar(String),
    #[error("module structure out of scope: not diagonal and not simple")]
    UnsupportedDecomposition,
    #[error("bad parameters: {0}")]
    BadParameters(String),
}

/// A representation: one square matrix per generator of a presentation.
#[derive(Clone)]
pub struct Representation {
    pres: Arc<Presentation>,
    size: usize,
    images: Vec<CycMatrix>,
}

impl Representation {
    pub fn new(pres: Arc<Presentation>, images: Vec<CycMatrix>) -> Result<Self, RepError> {
        if images.len() != pres.num_gens() {
            return Err(RepError::ImageCount(images.len(), pres.num_gens()));
        }
        let size = images.first().map(|m| m.rows()).unwrap_or(0);
        for m in &images {
            if m.rows() != size || m.cols() != size {
                return Err(RepError::Field(FieldError::ShapeMismatch(
                    m.rows(),
                    m.cols(),
                    size,
                    size,
                )));
            }
            if m.conductor() != pres.conductor() {
                return Err(RepError::Field(FieldError::ConductorMismatch(
                    m.conductor(),
                    pres.conductor(),
                )));
            }
        }
        Ok(Representation { pres, size, images })
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.pres
    }

    pub fn conductor(&self) -> u32 {
        self.pres.conductor()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn images(&self) -> &[CycMatrix] {
        &self.images
    }

    pub fn image(&self, gen: u8) -> &CycMatrix {
        &self.images[gen as usize]
    }

    pub fn image_of(&self, name: &str) -> Result<&CycMatrix, RepError> {
        Ok(&self.images[self.pres.gen_index(name)? as usize])
    }

    pub fn eval_word(&self, word: &[u8]) -> CycMatrix {
        let n = self.conductor();
        let mut acc = CycMatrix::identity(n, self.size);
        for &g in word {
            acc = acc.checked_mul(&self.images[g as usize]).unwrap();
        }
        acc
    }

    pub fn eval(&self, p: &NcPoly) -> CycMatrix {
        let n = self.conductor();
        let mut acc = CycMatrix::zeros(n, self.size, self.size);
        for (w, c) in p.terms() {
            acc = acc.checked_add(&self.eval_word(w).scale(c)).unwrap();
        }
        acc
    }

    /// Evaluate every defining relation; lists the ones that fail.
    pub fn verify(&self) -> RepCheck {
        let mut failures = Vec::new();
        for (i, r) in self.pres.relations().iter().enumerate() {
            if !self.eval(r).is_zero() {
                failures.push((i, self.pres.format_poly(r)));
            }
        }
        RepCheck { ok: failures.is_empty(), failures }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RepCheck {
    pub ok: bool,
    pub failures: Vec<(usize, String)>,
}

// ---------------------------------------------------------------------------
// standard families
// ---------------------------------------------------------------------------

/// The n-dimensional family over the plane: x and y act by the scaled shift
/// and clock, z by the inverse product twisted through the fiber index j.
pub fn standard_rep(
    n: u32,
    params: (&CycScalar, &CycScalar, &CycScalar),
    j: i64,
) -> Result<Representation, RepError> {
    let pres = Presentation::quantum_plane(n);
    let pair = HeisPair::psi(n, 1)?;
    let (alpha, beta, gamma) = params;
    let x = pair.e1().scale(alpha);
    let y = pair.e2().scale(beta);
    let z = pair
        .e2_inv_e1_inv()
        .scale(&gamma.checked_mul(&CycScalar::zeta_pow(n, j))?);
    Representation::new(pres, vec![x, y, z])
}

/// Points of the blown-up line locus: the degree-one generators act through
/// the shift/inverse pair, y through the clock, and the blown-down pair acts
/// by zero.
pub fn blowup_line_rep(
    n: u32,
    params: (&CycScalar, &CycScalar, &CycScalar),
) -> Result<Representation, RepError> {
    let pres = crate::ncalg::blowup_presentation(BlowupIdeal::XZ, n);
    let pair = HeisPair::psi(n, 1)?;
    let (a, b, d) = params;
    let size = n as usize;
    let zero = CycMatrix::zeros(n, size, size);
    let mut images = vec![zero.clone(); pres.num_gens()];
    images[pres.gen_index("X")? as usize] = pair.e1().scale(a);
    images[pres.gen_index("Z")? as usize] = pair.e2_inv_e1_inv().scale(b);
    images[pres.gen_index("y")? as usize] = pair.e2().scale(d);
    Representation::new(pres, images)
}

/// Points of the exceptional locus over the origin: the degree-one
/// generators act in standard position, the plane generators by zero.
pub fn blowup_origin_rep(
    n: u32,
    params: (&CycScalar, &CycScalar, &CycScalar),
    j: i64,
) -> Result<Representation, RepError> {
    let pres = crate::ncalg::blowup_presentation(BlowupIdeal::XYZ, n);
    let pair = HeisPair::psi(n, 1)?;
    let (a, b, c) = params;
    let size = n as usize;
    let zero = CycMatrix::zeros(n, size, size);
    let mut images = vec![zero.clone(); pres.num_gens()];
    images[pres.gen_index("X")? as usize] = pair.e1().scale(a);
    images[pres.gen_index("Y")? as usize] = pair.e2().scale(b);
    images[pres.gen_index("Z")? as usize] = pair
        .e2_inv_e1_inv()
        .scale(&c.checked_mul(&CycScalar::zeta_pow(n, j))?);
    Representation::new(pres, images)
}

/// Representations of the chart algebras. The third generator needs a deeper
/// shift power to match the steeper exchange exponent of the chart.
pub fn section_rep(
    chart: Chart,
    n: u32,
    params: (&CycScalar, &CycScalar, &CycScalar),
) -> Result<Representation, RepError> {
    let pres = crate::ncalg::chart_presentation(chart, n);
    let pair = HeisPair::psi(n, 1)?;
    let (a, b, c) = params;
    let depth = match chart {
        Chart::Line => 2,
        Chart::Origin => 3,
    };
    let u = pair.e1().scale(a);
    let v = pair.e2().scale(b);
    let w = pair
        .e2()
        .pow(-1)?
        .checked_mul(&pair.e1().pow(-depth)?)?
        .scale(c);
    Representation::new(pres, vec![u, v, w])
}

// ---------------------------------------------------------------------------
// central characters and strata
// ---------------------------------------------------------------------------

/// Values of the four central coordinates u = x^n, v = y^n, w = z^n,
/// g = xyz under a representation of the plane or a blow-up algebra.
#[derive(Debug, Clone, Serialize)]
pub struct CharacterPoint {
    pub u: CycScalar,
    pub v: CycScalar,
    pub w: CycScalar,
    pub g: CycScalar,
}

pub fn central_character(rep: &Representation) -> Result<CharacterPoint, RepError> {
    let pres = rep.presentation();
    let n = rep.conductor();
    let x = pres.gen_poly("x")?;
    let y = pres.gen_poly("y")?;
    let z = pres.gen_poly("z")?;
    let elements = [
        ("u", x.pow(n)),
        ("v", y.pow(n)),
        ("w", z.pow(n)),
        ("g", x.mul(&y).mul(&z)),
    ];
    let mut vals = Vec::new();
    for (name, p) in elements {
        let m = rep.eval(&p);
        let s = m.as_scalar().ok_or_else(|| RepError::NotScalar(name.to_string()))?;
        vals.push(s);
    }
    let mut it = vals.into_iter();
    Ok(CharacterPoint {
        u: it.next().unwrap(),
        v: it.next().unwrap(),
        w: it.next().unwrap(),
        g: it.next().unwrap(),
    })
}

/// Central-fiber strata, keyed off which central coordinates vanish.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Stratum {
    /// g != 0: the representation is the full matrix algebra fiber
    FatPoint,
    /// g = 0 with two of u, v, w nonzero; the reported shift pattern of the
    /// summands is bookkeeping only and is not certified by computation
    PointSum { shifts: Vec<i64> },
    /// exactly one of u, v, w nonzero
    LineType { axis: String },
    /// all central coordinates vanish
    Trivial,
}

pub fn classify(n: u32, point: &CharacterPoint) -> Stratum {
    if !point.g.is_zero() {
        return Stratum::FatPoint;
    }
    let nz: Vec<&str> = [("u", &point.u), ("v", &point.v), ("w", &point.w)]
        .iter()
        .filter(|(_, s)| !s.is_zero())
        .map(|(name, _)| *name)
        .collect();
    match nz.len() {
        0 => Stratum::Trivial,
        1 => Stratum::LineType { axis: nz[0].to_string() },
        _ => Stratum::PointSum {
            shifts: (0..n as i64).collect(),
        },
    }
}

// ---------------------------------------------------------------------------
// module structure
// ---------------------------------------------------------------------------

/// One isotypic piece of a diagonal representation: the common value tuple
/// and the coordinate slots carrying it.
#[derive(Debug, Clone, Serialize)]
pub struct Summand {
    pub values: Vec<CycScalar>,
    pub positions: Vec<usize>,
}

impl Summand {
    pub fn multiplicity(&self) -> usize {
        self.positions.len()
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum ModuleStructure {
    /// commutant is one-dimensional
    Simple,
    /// all images diagonal: summands listed in order of first appearance
    Semisimple { summands: Vec<Summand> },
}

/// Dimension of the commutant {T : T phi(g) = phi(g) T for all g}.
pub fn commutant_dimension(rep: &Representation) -> usize {
    let n = rep.conductor();
    let d = rep.size();
    let gens = rep.images().len();
    // unknown T flattened row-major; rows: entries of T phi(g) - phi(g) T
    let mut sys = CycMatrix::zeros(n, gens * d * d, d * d);
    for (gi, m) in rep.images().iter().enumerate() {
        for r in 0..d {
            for s in 0..d {
                let row = gi * d * d + r * d + s;
                // (T m)[r][s] = sum_k T[r][k] m[k][s]
                for k in 0..d {
                    let c = m.get(k, s).clone();
                    if !c.is_zero() {
                        let col = r * d + k;
                        let cur = sys.get(row, col).checked_add(&c).unwrap();
                        sys.set(row, col, cur);
                    }
                }
                // -(m T)[r][s] = -sum_k m[r][k] T[k][s]
                for k in 0..d {
                    let c = m.get(r, k).clone();
                    if !c.is_zero() {
                        let col = k * d + s;
                        let cur = sys.get(row, col).checked_sub(&c).unwrap();
                        sys.set(row, col, cur);
                    }
                }
            }
        }
    }
    rank_kernel(&sys).kernel.len()
}

/// Determine the module structure covered by this crate: simultaneously
/// diagonal images (semisimple with scalar summands) or a simple module.
pub fn module_structure(rep: &Representation) -> Result<ModuleStructure, RepError> {
    let diagonal = rep.images().iter().all(|m| m.is_diagonal());
    if diagonal {
        let mut summands: Vec<Summand> = Vec::new();
        for pos in 0..rep.size() {
            let tuple: Vec<CycScalar> = rep
                .images()
                .iter()
                .map(|m| m.get(pos, pos).clone())
                .collect();
            if let Some(s) = summands.iter_mut().find(|s| s.values == tuple) {
                s.positions.push(pos);
            } else {
                summands.push(Summand { values: tuple, positions: vec![pos] });
            }
        }
        return Ok(ModuleStructure::Semisimple { summands });
    }
    if commutant_dimension(rep) == 1 {
        return Ok(ModuleStructure::Simple);
    }
    Err(RepError::UnsupportedDecomposition)
}

/// A 1x1 representation carrying one diagonal summand, for blockwise work.
pub fn summand_rep(rep: &Representation, s: &Summand) -> Representation {
    let n = rep.conductor();
    let images = s
        .values
        .iter()
        .map(|v| CycMatrix::scalar(n, 1, v))
        .collect();
    Representation::new(rep.presentation().clone(), images).expect("scalar images")
}

/// Trace of the image of a word.
pub fn word_trace(rep: &Representation, word: &Word) -> CycScalar {
    rep.eval_word(word).trace()
}
