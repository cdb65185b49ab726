//! First-order deformation spaces of representations, constrained so that
//! reduced traces of all algebra elements are preserved, together with the
//! conjugation orbit, normal representatives, blockwise extension spaces and
//! the resulting local quiver data.
//!
//! A deformation assigns to each generator g a matrix delta_g; substituting
//! phi(g) + eps * delta_g and expanding to first order in eps turns every
//! defining relation into linear conditions on the deltas, and every trace
//! condition tr(phi_eps(w)) = (matrix size) * central part into further linear
//! rows.  For a central word the full matrix equation is imposed, for a
//! non-central word only the vanishing of the trace.  It suffices to impose
//! the trace rows on exponent-sorted words: any other spelling differs by a
//! combination of relation rows (there is a test for this).

use crate::field::{sparsify, CycMatrix, CycScalar, EchelonSpace, SparseVec};
use crate::ncalg::Word;
use crate::reps::{module_structure, summand_rep, ModuleStructure, RepError, Representation, Summand};
use serde::Serialize;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// tangent vectors
// ---------------------------------------------------------------------------

/// One matrix per generator; the first-order part of a deformed representation.
#[derive(Clone, PartialEq, Eq)]
pub struct TangentVector {
    deltas: Vec<CycMatrix>,
}

impl TangentVector {
    pub fn new(deltas: Vec<CycMatrix>) -> Self {
        assert!(!deltas.is_empty());
        TangentVector { deltas }
    }

    pub fn zero(n: u32, gens: usize, rows: usize, cols: usize) -> Self {
        TangentVector { deltas: vec![CycMatrix::zeros(n, rows, cols); gens] }
    }

    /// Zero in every slot except `slot`, which carries `m`.
    pub fn from_slot(n: u32, gens: usize, slot: usize, m: CycMatrix) -> Self {
        let mut deltas = vec![CycMatrix::zeros(n, m.rows(), m.cols()); gens];
        deltas[slot] = m;
        TangentVector { deltas }
    }

    pub fn set_slot(&mut self, slot: usize, m: CycMatrix) {
        assert_eq!(m.rows(), self.deltas[slot].rows());
        assert_eq!(m.cols(), self.deltas[slot].cols());
        self.deltas[slot] = m;
    }

    pub fn deltas(&self) -> &[CycMatrix] {
        &self.deltas
    }

    pub fn delta(&self, slot: usize) -> &CycMatrix {
        &self.deltas[slot]
    }

    pub fn is_zero(&self) -> bool {
        self.deltas.iter().all(|m| m.is_zero())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let deltas = self
            .deltas
            .iter()
            .zip(&other.deltas)
            .map(|(a, b)| a.checked_sub(b).unwrap())
            .collect();
        TangentVector { deltas }
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        TangentVector { deltas: self.deltas.iter().map(|m| m.scale(s)).collect() }
    }

    /// Coordinates in the order (slot, row, col), row-major per slot.
    pub fn flatten(&self) -> Vec<CycScalar> {
        let mut out = Vec::new();
        for m in &self.deltas {
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    out.push(m.get(r, c).clone());
                }
            }
        }
        out
    }

    pub fn sparse(&self) -> SparseVec {
        sparsify(&self.flatten())
    }

    pub fn unflatten(n: u32, gens: usize, rows: usize, cols: usize, data: &[CycScalar]) -> Self {
        assert_eq!(data.len(), gens * rows * cols);
        let deltas = (0..gens)
            .map(|g| {
                CycMatrix::from_fn(n, rows, cols, |r, c| data[g * rows * cols + r * cols + c].clone())
            })
            .collect();
        TangentVector { deltas }
    }
}

impl std::fmt::Debug for TangentVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.deltas.iter()).finish()
    }
}

// ---------------------------------------------------------------------------
// constraint rows
// ---------------------------------------------------------------------------

/// Default cutoff for the degree of words whose traces are constrained; the
/// dimensions stabilize well below this (see the stability test).
pub fn default_degree_bound(rep: &Representation) -> usize {
    rep.size() + 2
}

fn push_row(out: &mut Vec<SparseVec>, row: BTreeMap<usize, CycScalar>) {
    let v: SparseVec = row.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    if !v.is_empty() {
        out.push(v);
    }
}

fn prefix_products(rep: &Representation, word: &[u8]) -> Vec<CycMatrix> {
    let n = rep.conductor();
    let mut out = Vec::with_capacity(word.len() + 1);
    out.push(CycMatrix::identity(n, rep.size()));
    for &g in word {
        let next = out.last().unwrap().checked_mul(rep.image(g)).unwrap();
        out.push(next);
    }
    out
}

fn suffix_products(rep: &Representation, word: &[u8]) -> Vec<CycMatrix> {
    let n = rep.conductor();
    let mut out = vec![CycMatrix::identity(n, rep.size()); word.len() + 1];
    for pos in (0..word.len()).rev() {
        out[pos] = rep.image(word[pos]).checked_mul(&out[pos + 1]).unwrap();
    }
    out
}

/// Linearizations of the defining relations for deltas in Hom(src, dst):
/// the word g1..gk contributes sum_pos dst(prefix) * delta * src(suffix).
/// `map` sends an unknown (slot, row, col) to its column index, or None to
/// pin it to zero.
fn relation_rows<F>(src: &Representation, dst: &Representation, map: F) -> Vec<SparseVec>
where
    F: Fn(usize, usize, usize) -> Option<usize>,
{
    assert_eq!(src.presentation().name(), dst.presentation().name());
    let dr = dst.size();
    let dc = src.size();
    let mut out = Vec::new();
    for rel in src.presentation().relations() {
        let mut rows: Vec<BTreeMap<usize, CycScalar>> = vec![BTreeMap::new(); dr * dc];
        for (word, coeff) in rel.terms() {
            let pref = prefix_products(dst, word);
            let suf = suffix_products(src, word);
            for pos in 0..word.len() {
                let p = &pref[pos];
                let s = &suf[pos + 1];
                if p.is_zero() || s.is_zero() {
                    continue;
                }
                let g = word[pos] as usize;
                for r in 0..dr {
                    for a in 0..dr {
                        let pv = p.get(r, a);
                        if pv.is_zero() {
                            continue;
                        }
                        let cpv = coeff.checked_mul(pv).unwrap();
                        for b in 0..dc {
                            for t in 0..dc {
                                let sv = s.get(b, t);
                                if sv.is_zero() {
                                    continue;
                                }
                                if let Some(col) = map(g, a, b) {
                                    let add = cpv.checked_mul(sv).unwrap();
                                    let e = rows[r * dc + t]
                                        .entry(col)
                                        .or_insert_with(|| CycScalar::zero(src.conductor()));
                                    *e = e.checked_add(&add).unwrap();
                                }
                            }
                        }
                    }
                }
            }
        }
        for row in rows {
            push_row(&mut out, row);
        }
    }
    out
}

/// Trace-preservation rows contributed by one word.  Central words force the
/// whole matrix identity size * eps-part = tr(eps-part) * id; other words
/// force tr(eps-part) = 0.
fn trace_rows_for_word<F>(
    rep: &Representation,
    word: &[u8],
    zero_image: &[bool],
    map: F,
    out: &mut Vec<SparseVec>,
) -> Result<(), RepError>
where
    F: Fn(usize, usize, usize) -> Option<usize>,
{
    if word.is_empty() {
        return Ok(());
    }
    // with two or more letters mapped to zero every first-order term dies
    if word.iter().filter(|g| zero_image[**g as usize]).count() >= 2 {
        return Ok(());
    }
    let d = rep.size();
    let n = rep.conductor();
    let central = rep.presentation().central_pattern(word)?;
    let pref = prefix_products(rep, word);
    let suf = suffix_products(rep, word);
    if central {
        let size = CycScalar::from_int(n, d as i64);
        let mut rows: Vec<BTreeMap<usize, CycScalar>> = vec![BTreeMap::new(); d * d];
        for pos in 0..word.len() {
            let p = &pref[pos];
            let s = &suf[pos + 1];
            if p.is_zero() || s.is_zero() {
                continue;
            }
            let g = word[pos] as usize;
            for r in 0..d {
                for a in 0..d {
                    let pv = p.get(r, a);
                    if pv.is_zero() {
                        continue;
                    }
                    let spv = size.checked_mul(pv).unwrap();
                    for b in 0..d {
                        for t in 0..d {
                            let sv = s.get(b, t);
                            if sv.is_zero() {
                                continue;
                            }
                            if let Some(col) = map(g, a, b) {
                                let add = spv.checked_mul(sv).unwrap();
                                let e = rows[r * d + t]
                                    .entry(col)
                                    .or_insert_with(|| CycScalar::zero(n));
                                *e = e.checked_add(&add).unwrap();
                            }
                        }
                    }
                }
            }
            let m = s.checked_mul(p).unwrap();
            for b in 0..d {
                for a in 0..d {
                    let v = m.get(b, a);
                    if v.is_zero() {
                        continue;
                    }
                    if let Some(col) = map(g, a, b) {
                        for r in 0..d {
                            let e = rows[r * d + r]
                                .entry(col)
                                .or_insert_with(|| CycScalar::zero(n));
                            *e = e.checked_sub(v).unwrap();
                        }
                    }
                }
            }
        }
        for row in rows {
            push_row(out, row);
        }
    } else {
        let mut row: BTreeMap<usize, CycScalar> = BTreeMap::new();
        for pos in 0..word.len() {
            let p = &pref[pos];
            let s = &suf[pos + 1];
            if p.is_zero() || s.is_zero() {
                continue;
            }
            let g = word[pos] as usize;
            let m = s.checked_mul(p).unwrap();
            for b in 0..d {
                for a in 0..d {
                    let v = m.get(b, a);
                    if v.is_zero() {
                        continue;
                    }
                    if let Some(col) = map(g, a, b) {
                        let e = row.entry(col).or_insert_with(|| CycScalar::zero(n));
                        *e = e.checked_add(v).unwrap();
                    }
                }
            }
        }
        push_row(out, row);
    }
    Ok(())
}

/// All exponent-sorted words over `gens` letters of degree 1..=bound.
fn sorted_monomials(gens: usize, bound: usize) -> Vec<Word> {
    fn rec(g: usize, gens: usize, left: usize, word: &mut Word, out: &mut Vec<Word>) {
        if g == gens {
            if !word.is_empty() {
                out.push(word.clone());
            }
            return;
        }
        for e in 0..=left {
            let before = word.len();
            word.extend(std::iter::repeat(g as u8).take(e));
            rec(g + 1, gens, left - e, word, out);
            word.truncate(before);
        }
    }
    let mut out = Vec::new();
    rec(0, gens, bound, &mut Vec::new(), &mut out);
    out
}

fn zero_image_flags(rep: &Representation) -> Vec<bool> {
    rep.images().iter().map(|m| m.is_zero()).collect()
}

// ---------------------------------------------------------------------------
// tangent / orbit / normal
// ---------------------------------------------------------------------------

/// Kernel of all relation and trace rows: the trace-preserving first-order
/// deformations at the given representation.
pub struct TangentSpace {
    basis: Vec<TangentVector>,
    constraints: EchelonSpace,
    degree_bound: usize,
}

impl TangentSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[TangentVector] {
        &self.basis
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn contains(&self, v: &TangentVector) -> bool {
        self.constraints.annihilates(&v.flatten())
    }
}

fn tangent_constraints(
    rep: &Representation,
    words: &[Word],
) -> Result<EchelonSpace, RepError> {
    let d = rep.size();
    let gens = rep.images().len();
    let map = |g: usize, a: usize, b: usize| Some(g * d * d + a * d + b);
    let mut space = EchelonSpace::new(rep.conductor(), gens * d * d);
    for row in relation_rows(rep, rep, map) {
        space.insert(row);
    }
    let zero_image = zero_image_flags(rep);
    let mut rows = Vec::new();
    for word in words {
        trace_rows_for_word(rep, word, &zero_image, map, &mut rows)?;
    }
    for row in rows {
        space.insert(row);
    }
    Ok(space)
}

pub fn tangent_space(rep: &Representation, degree_bound: usize) -> Result<TangentSpace, RepError> {
    let d = rep.size();
    let gens = rep.images().len();
    let words = sorted_monomials(gens, degree_bound);
    let constraints = tangent_constraints(rep, &words)?;
    let basis = constraints
        .kernel_basis()
        .iter()
        .map(|v| TangentVector::unflatten(rep.conductor(), gens, d, d, v))
        .collect();
    Ok(TangentSpace { basis, constraints, degree_bound })
}

/// Image of conjugation: directions T phi(g) - phi(g) T for traceless T.
pub struct OrbitSpace {
    basis: Vec<TangentVector>,
    row_space: EchelonSpace,
}

impl OrbitSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[TangentVector] {
        &self.basis
    }

    pub fn row_space(&self) -> &EchelonSpace {
        &self.row_space
    }

    pub fn contains(&self, v: &TangentVector) -> bool {
        self.row_space.contains(&v.sparse())
    }
}

pub fn orbit_space(rep: &Representation) -> Result<OrbitSpace, RepError> {
    let n = rep.conductor();
    let d = rep.size();
    let gens = rep.images().len();
    let mut row_space = EchelonSpace::new(n, gens * d * d);
    let mut basis = Vec::new();
    let push = |t: &CycMatrix, basis: &mut Vec<TangentVector>, row_space: &mut EchelonSpace| {
        let deltas: Vec<CycMatrix> = rep
            .images()
            .iter()
            .map(|m| t.checked_mul(m).unwrap().checked_sub(&m.checked_mul(t).unwrap()).unwrap())
            .collect();
        let v = TangentVector::new(deltas);
        if row_space.insert(v.sparse()) {
            basis.push(v);
        }
    };
    for p in 0..d {
        for q in 0..d {
            if p != q {
                let mut t = CycMatrix::zeros(n, d, d);
                t.set(p, q, CycScalar::one(n));
                push(&t, &mut basis, &mut row_space);
            }
        }
    }
    for p in 0..d.saturating_sub(1) {
        let mut t = CycMatrix::zeros(n, d, d);
        t.set(p, p, CycScalar::one(n));
        t.set(p + 1, p + 1, CycScalar::from_int(n, -1));
        push(&t, &mut basis, &mut row_space);
    }
    Ok(OrbitSpace { basis, row_space })
}

/// Tangent modulo orbit, with explicit representatives.  Candidate directions
/// are used first (they must lie in the tangent space); the rest of the basis
/// is filled from the computed tangent basis.
pub struct NormalSpace {
    pub representatives: Vec<TangentVector>,
    pub tangent: TangentSpace,
    pub orbit: OrbitSpace,
}

impl NormalSpace {
    pub fn dim(&self) -> usize {
        self.representatives.len()
    }
}

pub fn normal_space(
    rep: &Representation,
    degree_bound: usize,
    candidates: &[TangentVector],
) -> Result<NormalSpace, RepError> {
    let tangent = tangent_space(rep, degree_bound)?;
    let orbit = orbit_space(rep)?;
    for v in orbit.basis() {
        assert!(tangent.contains(v), "conjugation direction violates a constraint row");
    }
    let mut span = orbit.row_space.clone();
    let mut representatives = Vec::new();
    for c in candidates {
        assert!(tangent.contains(c), "candidate direction is not tangent");
        if span.insert(c.sparse()) {
            representatives.push(c.clone());
        }
    }
    for v in tangent.basis() {
        if span.insert(v.sparse()) {
            representatives.push(v.clone());
        }
    }
    assert_eq!(orbit.dim() + representatives.len(), tangent.dim());
    Ok(NormalSpace { representatives, tangent, orbit })
}

// ---------------------------------------------------------------------------
// extension spaces
// ---------------------------------------------------------------------------

/// Deformations of the off-diagonal block Hom(src, dst) modulo coboundaries
/// T -> dst(g) T - T src(g).  With `trace_bound` set (meaningful when src and
/// dst are the same representation) the trace rows are imposed as well.
pub struct ExtSpace {
    pub representatives: Vec<TangentVector>,
    pub kernel_dim: usize,
    pub coboundary_rank: usize,
}

impl ExtSpace {
    pub fn dim(&self) -> usize {
        self.kernel_dim - self.coboundary_rank
    }
}

pub fn ext_space(
    src: &Representation,
    dst: &Representation,
    trace_bound: Option<usize>,
) -> Result<ExtSpace, RepError> {
    let n = src.conductor();
    let dr = dst.size();
    let dc = src.size();
    let gens = src.images().len();
    let map = |g: usize, a: usize, b: usize| Some(g * dr * dc + a * dc + b);
    let mut space = EchelonSpace::new(n, gens * dr * dc);
    for row in relation_rows(src, dst, map) {
        space.insert(row);
    }
    if let Some(bound) = trace_bound {
        assert_eq!(dr, dc, "trace rows apply to self-extensions");
        let zero_image = zero_image_flags(src);
        let mut rows = Vec::new();
        for word in sorted_monomials(gens, bound) {
            trace_rows_for_word(src, &word, &zero_image, map, &mut rows)?;
        }
        for row in rows {
            space.insert(row);
        }
    }
    let kernel: Vec<TangentVector> = space
        .kernel_basis()
        .iter()
        .map(|v| TangentVector::unflatten(n, gens, dr, dc, v))
        .collect();
    let mut cob = EchelonSpace::new(n, gens * dr * dc);
    for p in 0..dr {
        for q in 0..dc {
            let mut t = CycMatrix::zeros(n, dr, dc);
            t.set(p, q, CycScalar::one(n));
            let deltas: Vec<CycMatrix> = (0..gens)
                .map(|g| {
                    dst.image(g as u8)
                        .checked_mul(&t)
                        .unwrap()
                        .checked_sub(&t.checked_mul(src.image(g as u8)).unwrap())
                        .unwrap()
                })
                .collect();
            cob.insert(TangentVector::new(deltas).sparse());
        }
    }
    let kernel_dim = kernel.len();
    let coboundary_rank = cob.rank();
    let mut span = cob;
    let mut representatives = Vec::new();
    for v in kernel {
        if span.insert(v.sparse()) {
            representatives.push(v);
        }
    }
    assert_eq!(representatives.len(), kernel_dim - coboundary_rank);
    Ok(ExtSpace { representatives, kernel_dim, coboundary_rank })
}

// ---------------------------------------------------------------------------
// diagonal sector
// ---------------------------------------------------------------------------

/// Tangent directions supported on the block-diagonal coordinates (blocks =
/// isotypic summands), modulo orbit.  These survive as the loops of the local
/// quiver.
struct DiagonalSector {
    dim: usize,
    directions: Vec<TangentVector>,
}

fn diagonal_sector(
    rep: &Representation,
    summands: &[Summand],
    degree_bound: usize,
    orbit: &OrbitSpace,
) -> Result<DiagonalSector, RepError> {
    let n = rep.conductor();
    let d = rep.size();
    let gens = rep.images().len();
    let mut block = vec![0usize; d];
    for (i, s) in summands.iter().enumerate() {
        for &p in &s.positions {
            block[p] = i;
        }
    }
    // dense index over the block-diagonal coordinates only
    let mut sub = vec![None; gens * d * d];
    let mut count = 0usize;
    for g in 0..gens {
        for a in 0..d {
            for b in 0..d {
                if block[a] == block[b] {
                    sub[g * d * d + a * d + b] = Some(count);
                    count += 1;
                }
            }
        }
    }
    let map = |g: usize, a: usize, b: usize| sub[g * d * d + a * d + b];
    let mut space = EchelonSpace::new(n, count);
    for row in relation_rows(rep, rep, map) {
        space.insert(row);
    }
    let zero_image = zero_image_flags(rep);
    let mut rows = Vec::new();
    for word in sorted_monomials(gens, degree_bound) {
        trace_rows_for_word(rep, &word, &zero_image, map, &mut rows)?;
    }
    for row in rows {
        space.insert(row);
    }
    // inflate kernel vectors back to full coordinates
    let full_of: Vec<usize> = {
        let mut v = vec![0usize; count];
        for (full, s) in sub.iter().enumerate() {
            if let Some(i) = s {
                v[*i] = full;
            }
        }
        v
    };
    let kernel: Vec<TangentVector> = space
        .kernel_basis()
        .iter()
        .map(|small| {
            let mut dense = vec![CycScalar::zero(n); gens * d * d];
            for (i, c) in small.iter().enumerate() {
                dense[full_of[i]] = c.clone();
            }
            TangentVector::unflatten(n, gens, d, d, &dense)
        })
        .collect();
    // coboundaries of block-diagonal matrices land inside the sector; their
    // rank gives an independent count of the surviving directions
    let mut cob = EchelonSpace::new(n, gens * d * d);
    for a in 0..d {
        for b in 0..d {
            if block[a] != block[b] || (a == b && a == d - 1) {
                continue;
            }
            let mut t = CycMatrix::zeros(n, d, d);
            t.set(a, b, CycScalar::one(n));
            let deltas: Vec<CycMatrix> = rep
                .images()
                .iter()
                .map(|m| t.checked_mul(m).unwrap().checked_sub(&m.checked_mul(&t).unwrap()).unwrap())
                .collect();
            cob.insert(TangentVector::new(deltas).sparse());
        }
    }
    let expected = kernel.len() - cob.rank();
    let mut span = orbit.row_space().clone();
    let mut directions = Vec::new();
    for v in kernel {
        if span.insert(v.sparse()) {
            directions.push(v);
        }
    }
    assert_eq!(directions.len(), expected, "sector quotient disagrees with orbit reduction");
    Ok(DiagonalSector { dim: directions.len(), directions })
}

// ---------------------------------------------------------------------------
// local quiver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct QuiverVertex {
    /// multiplicity of the summand in the module
    pub multiplicity: usize,
    /// dimension of the summand itself
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuiverArrow {
    pub src: usize,
    pub dst: usize,
    pub count: usize,
    /// marked arrows contribute mult^2 - 1 rather than mult^2 trace-preserving
    /// directions
    pub marked: usize,
}

/// The quiver-with-dimension-vector picture of a neighbourhood: vertices are
/// the distinct summands, arrows the surviving extension directions.
pub struct LocalQuiver {
    pub vertices: Vec<QuiverVertex>,
    pub arrows: Vec<QuiverArrow>,
    /// representative big-space directions, parallel to `arrows`
    pub directions: Vec<Vec<TangentVector>>,
    pub structure: ModuleStructure,
    pub tangent_dim: usize,
    pub orbit_dim: usize,
    pub normal_dim: usize,
    /// dimension of trace-preserving extensions counted through the quiver
    pub trace_ext_dim: usize,
}

pub fn local_quiver(
    rep: &Representation,
    degree_bound: usize,
    candidates: &[TangentVector],
) -> Result<LocalQuiver, RepError> {
    let structure = module_structure(rep)?;
    let normal = normal_space(rep, degree_bound, candidates)?;
    let tangent_dim = normal.tangent.dim();
    let orbit_dim = normal.orbit.dim();
    let normal_dim = normal.dim();
    match &structure {
        ModuleStructure::Simple => {
            let vertices = vec![QuiverVertex { multiplicity: 1, dim: rep.size() }];
            let arrows = vec![QuiverArrow { src: 0, dst: 0, count: normal_dim, marked: 0 }];
            let directions = vec![normal.representatives.clone()];
            Ok(LocalQuiver {
                vertices,
                arrows,
                directions,
                structure,
                tangent_dim,
                orbit_dim,
                normal_dim,
                trace_ext_dim: normal_dim,
            })
        }
        ModuleStructure::Semisimple { summands } => {
            let k = summands.len();
            let vertices: Vec<QuiverVertex> = summands
                .iter()
                .map(|s| QuiverVertex { multiplicity: s.multiplicity(), dim: 1 })
                .collect();
            let blocks: Vec<Representation> =
                summands.iter().map(|s| summand_rep(rep, s)).collect();
            let mut arrows = Vec::new();
            let mut directions = Vec::new();
            let mut cross_total = 0usize;
            let n = rep.conductor();
            let d = rep.size();
            let gens = rep.images().len();
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    let ext = ext_space(&blocks[i], &blocks[j], None)?;
                    if ext.dim() == 0 {
                        continue;
                    }
                    if summands[i].multiplicity() != 1 || summands[j].multiplicity() != 1 {
                        return Err(RepError::UnsupportedDecomposition);
                    }
                    let row = summands[j].positions[0];
                    let col = summands[i].positions[0];
                    let inflated: Vec<TangentVector> = ext
                        .representatives
                        .iter()
                        .map(|small| {
                            let deltas: Vec<CycMatrix> = (0..gens)
                                .map(|g| {
                                    let mut m = CycMatrix::zeros(n, d, d);
                                    m.set(row, col, small.delta(g).get(0, 0).clone());
                                    m
                                })
                                .collect();
                            TangentVector::new(deltas)
                        })
                        .collect();
                    cross_total += ext.dim();
                    arrows.push(QuiverArrow { src: i, dst: j, count: ext.dim(), marked: 0 });
                    directions.push(inflated);
                }
            }
            let sector = diagonal_sector(rep, summands, degree_bound, &normal.orbit)?;
            assert_eq!(
                tangent_dim,
                orbit_dim + cross_total + sector.dim,
                "blockwise extension count disagrees with the tangent space"
            );
            if k == 1 {
                let e = summands[0].multiplicity();
                let loops = ext_space(&blocks[0], &blocks[0], None)?.dim();
                assert!(e * e * loops >= sector.dim);
                let marked = e * e * loops - sector.dim;
                assert!(marked <= loops, "more marks than loops");
                arrows.push(QuiverArrow { src: 0, dst: 0, count: loops, marked });
                directions.push(sector.directions);
            } else {
                let mut pool = sector.directions.into_iter();
                let mut left = sector.dim;
                for i in 0..k {
                    if left == 0 {
                        break;
                    }
                    let cap = ext_space(&blocks[i], &blocks[i], None)?.dim();
                    let take = cap.min(left);
                    if take == 0 {
                        continue;
                    }
                    let vecs: Vec<TangentVector> = pool.by_ref().take(take).collect();
                    arrows.push(QuiverArrow { src: i, dst: i, count: take, marked: 0 });
                    directions.push(vecs);
                    left -= take;
                }
                assert_eq!(left, 0, "surviving loops exceed blockwise capacity");
            }
            let mut trace_ext_dim = 0usize;
            for a in &arrows {
                let es = vertices[a.src].multiplicity;
                let ed = vertices[a.dst].multiplicity;
                trace_ext_dim += es * ed * a.count;
                trace_ext_dim -= a.marked;
            }
            assert_eq!(trace_ext_dim, normal_dim, "quiver count disagrees with the normal space");
            Ok(LocalQuiver {
                vertices,
                arrows,
                directions,
                structure,
                tangent_dim,
                orbit_dim,
                normal_dim,
                trace_ext_dim,
            })
        }
    }
}

/// Excess of the infinitesimal count over the actual dimension of the ambient
/// representation variety; zero exactly at its smooth points.
pub fn defect(quiver: &LocalQuiver, ambient_dim: usize) -> i64 {
    quiver.trace_ext_dim as i64 + quiver.orbit_dim as i64 - ambient_dim as i64
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heis::HeisPair;
    use crate::ncalg::{Chart, Presentation};
    use crate::reps::{blowup_line_rep, blowup_origin_rep, section_rep, standard_rep};

    fn one(n: u32) -> CycScalar {
        CycScalar::one(n)
    }

    fn a_candidates(n: u32) -> Vec<TangentVector> {
        let h = HeisPair::psi(n, 1).unwrap();
        vec![
            TangentVector::from_slot(n, 3, 0, h.e1().clone()),
            TangentVector::from_slot(n, 3, 1, h.e2().clone()),
            TangentVector::from_slot(n, 3, 2, h.e2_inv_e1_inv()),
        ]
    }

    #[test]
    fn fat_point_dimension_table() {
        let n = 5;
        let o = one(n);
        let rep = standard_rep(n, (&o, &o, &o), 0).unwrap();
        let normal = normal_space(&rep, default_degree_bound(&rep), &a_candidates(n)).unwrap();
        assert_eq!(normal.tangent.dim(), 27);
        assert_eq!(normal.orbit.dim(), 24);
        assert_eq!(normal.dim(), 3);
        // the canonical one-parameter directions survive as the representatives
        for (got, want) in normal.representatives.iter().zip(a_candidates(n)) {
            assert_eq!(got, &want);
        }
    }

    #[test]
    fn zero_point_dimension_table() {
        let n = 5;
        let z = CycScalar::zero(n);
        let rep = standard_rep(n, (&z, &z, &z), 0).unwrap();
        let normal = normal_space(&rep, default_degree_bound(&rep), &[]).unwrap();
        assert_eq!(normal.tangent.dim(), 72);
        assert_eq!(normal.orbit.dim(), 0);
        assert_eq!(normal.dim(), 72);
    }

    #[test]
    fn line_point_dimension_table() {
        for (n, tangent, orbit, normal_dim) in [(4u32, 21, 12, 9), (5, 31, 20, 11)] {
            let z = CycScalar::zero(n);
            let o = one(n);
            let rep = standard_rep(n, (&z, &o, &z), 0).unwrap();
            let normal = normal_space(&rep, default_degree_bound(&rep), &[]).unwrap();
            assert_eq!(normal.tangent.dim(), tangent);
            assert_eq!(normal.orbit.dim(), orbit);
            assert_eq!(normal.dim(), normal_dim);
        }
    }

    #[test]
    fn dimensions_stable_under_longer_words() {
        let n = 4;
        let z = CycScalar::zero(n);
        let o = one(n);
        for rep in [
            standard_rep(n, (&o, &o, &o), 0).unwrap(),
            standard_rep(n, (&z, &o, &z), 0).unwrap(),
        ] {
            let d0 = default_degree_bound(&rep);
            let t0 = tangent_space(&rep, d0).unwrap().dim();
            let t1 = tangent_space(&rep, d0 + 1).unwrap().dim();
            assert_eq!(t0, t1);
        }
    }

    #[test]
    fn sorted_words_carry_the_full_trace_constraints() {
        // imposing trace rows on every spelling adds nothing beyond the
        // exponent-sorted ones, once the relation rows are present
        let n = 4;
        let bound = 4;
        let z = CycScalar::zero(n);
        let o = one(n);
        for rep in [
            standard_rep(n, (&o, &o, &o), 0).unwrap(),
            standard_rep(n, (&z, &o, &z), 0).unwrap(),
        ] {
            let sorted = sorted_monomials(3, bound);
            let mut all = Vec::new();
            let mut frontier: Vec<Word> = vec![Vec::new()];
            for _ in 0..bound {
                let mut next = Vec::new();
                for w in &frontier {
                    for g in 0..3u8 {
                        let mut v = w.clone();
                        v.push(g);
                        next.push(v);
                    }
                }
                all.extend(next.iter().cloned());
                frontier = next;
            }
            let a = tangent_constraints(&rep, &sorted).unwrap();
            let b = tangent_constraints(&rep, &all).unwrap();
            assert_eq!(a.rank(), b.rank());
        }
    }

    #[test]
    fn extensions_between_line_summands_follow_the_cycle() {
        let n = 5;
        let z = CycScalar::zero(n);
        let o = one(n);
        let rep = standard_rep(n, (&z, &o, &z), 0).unwrap();
        let summands = match module_structure(&rep).unwrap() {
            ModuleStructure::Semisimple { summands } => summands,
            _ => panic!("diagonal"),
        };
        assert_eq!(summands.len(), 5);
        let blocks: Vec<Representation> =
            summands.iter().map(|s| summand_rep(&rep, s)).collect();
        for i in 0..5usize {
            for j in 0..5usize {
                if i == j {
                    continue;
                }
                let ext = ext_space(&blocks[i], &blocks[j], None).unwrap();
                let expected = if j == (i + 4) % 5 || j == (i + 1) % 5 { 1 } else { 0 };
                assert_eq!(ext.dim(), expected, "ext {} -> {}", i, j);
                if j == (i + 4) % 5 {
                    // the first-slot delta survives, the diagonal one is a coboundary
                    let rep0 = &ext.representatives[0];
                    assert!(!rep0.delta(0).is_zero());
                    assert!(rep0.delta(1).is_zero());
                    assert!(rep0.delta(2).is_zero());
                }
                if j == (i + 1) % 5 {
                    let rep0 = &ext.representatives[0];
                    assert!(rep0.delta(0).is_zero());
                    assert!(rep0.delta(1).is_zero());
                    assert!(!rep0.delta(2).is_zero());
                }
            }
        }
    }

    #[test]
    fn self_extensions_with_traces_match_the_normal_space() {
        let n = 4;
        let o = one(n);
        let rep = standard_rep(n, (&o, &o, &o), 0).unwrap();
        let bound = default_degree_bound(&rep);
        let ext = ext_space(&rep, &rep, Some(bound)).unwrap();
        let normal = normal_space(&rep, bound, &a_candidates(n)).unwrap();
        assert_eq!(ext.dim(), normal.dim());
    }

    #[test]
    fn quiver_at_a_fat_point() {
        let n = 5;
        let o = one(n);
        let rep = standard_rep(n, (&o, &o, &o), 0).unwrap();
        let q = local_quiver(&rep, default_degree_bound(&rep), &a_candidates(n)).unwrap();
        assert_eq!(q.vertices.len(), 1);
        assert_eq!(q.vertices[0].multiplicity, 1);
        assert_eq!(q.vertices[0].dim, 5);
        assert_eq!(q.arrows.len(), 1);
        assert_eq!((q.arrows[0].count, q.arrows[0].marked), (3, 0));
        assert_eq!(q.trace_ext_dim, 3);
        assert_eq!(defect(&q, 27), 0);
    }

    #[test]
    fn quiver_at_the_zero_point() {
        let n = 5;
        let z = CycScalar::zero(n);
        let rep = standard_rep(n, (&z, &z, &z), 0).unwrap();
        let q = local_quiver(&rep, default_degree_bound(&rep), &[]).unwrap();
        assert_eq!(q.vertices.len(), 1);
        assert_eq!(q.vertices[0].multiplicity, 5);
        assert_eq!(q.vertices[0].dim, 1);
        assert_eq!(q.arrows.len(), 1);
        assert_eq!((q.arrows[0].count, q.arrows[0].marked), (3, 3));
        assert_eq!(q.trace_ext_dim, 72);
        assert_eq!(defect(&q, 27), 45);
    }

    #[test]
    fn quiver_at_a_line_point() {
        let n = 5;
        let z = CycScalar::zero(n);
        let o = one(n);
        let rep = standard_rep(n, (&z, &o, &z), 0).unwrap();
        let q = local_quiver(&rep, default_degree_bound(&rep), &[]).unwrap();
        assert_eq!(q.vertices.len(), 5);
        assert!(q.vertices.iter().all(|v| v.multiplicity == 1 && v.dim == 1));
        let mut down = 0;
        let mut up = 0;
        let mut loops = 0;
        for a in &q.arrows {
            if a.dst == (a.src + 4) % 5 {
                down += a.count;
            } else if a.dst == (a.src + 1) % 5 {
                up += a.count;
            } else if a.dst == a.src {
                loops += a.count;
                assert_eq!(a.src, 0, "single loop sits at the base vertex");
            } else {
                panic!("unexpected arrow {} -> {}", a.src, a.dst);
            }
        }
        assert_eq!((down, up, loops), (5, 5, 1));
        assert_eq!(q.trace_ext_dim, 11);
        assert_eq!(defect(&q, 27), 4);
    }

    fn b_line_candidates(n: u32, a: &CycScalar, b: &CycScalar) -> Vec<TangentVector> {
        let h = HeisPair::psi(n, 1).unwrap();
        let p = crate::ncalg::blowup_presentation(crate::ncalg::BlowupIdeal::XZ, n);
        let slot = |name: &str| p.gen_index(name).unwrap() as usize;
        let gens = p.num_gens();
        let mut combined = TangentVector::from_slot(n, gens, slot("x"), h.e1().scale(a));
        combined.deltas[slot("z")] = h.e2_inv_e1_inv().scale(b);
        vec![
            TangentVector::from_slot(n, gens, slot("X"), h.e1().clone()),
            TangentVector::from_slot(n, gens, slot("Z"), h.e2_inv_e1_inv()),
            TangentVector::from_slot(n, gens, slot("y"), h.e2().clone()),
            combined,
        ]
    }

    #[test]
    fn blowup_line_generic_point_is_a_smooth_simple_point() {
        let n = 5;
        let o = one(n);
        let rep = blowup_line_rep(n, (&o, &o, &o)).unwrap();
        let cands = b_line_candidates(n, &o, &o);
        let q = local_quiver(&rep, default_degree_bound(&rep), &cands).unwrap();
        assert!(matches!(q.structure, ModuleStructure::Simple));
        assert_eq!(q.tangent_dim, 28);
        assert_eq!(q.orbit_dim, 24);
        assert_eq!(q.normal_dim, 4);
        assert_eq!(defect(&q, 28), 0);
    }

    #[test]
    fn blowup_origin_semistable_quiver() {
        let n = 5;
        let z = CycScalar::zero(n);
        let o = one(n);
        let rep = blowup_origin_rep(n, (&z, &o, &z), 0).unwrap();
        let q = local_quiver(&rep, default_degree_bound(&rep), &[]).unwrap();
        assert_eq!(q.tangent_dim, 32);
        assert_eq!(q.orbit_dim, 20);
        assert_eq!(q.normal_dim, 12);
        assert_eq!(q.vertices.len(), 5);
        let mut down = 0;
        let mut up = 0;
        let mut loops = 0;
        for a in &q.arrows {
            if a.dst == (a.src + 4) % 5 {
                down += a.count;
            } else if a.dst == (a.src + 1) % 5 {
                up += a.count;
            } else if a.dst == a.src {
                loops += a.count;
            } else {
                panic!("unexpected arrow {} -> {}", a.src, a.dst);
            }
        }
        assert_eq!((down, up, loops), (5, 5, 2));
        assert_eq!(defect(&q, 28), 4);
    }

    #[test]
    fn chart_quivers_step_by_the_pattern_exponents() {
        // middle exponent 2 on the line chart, 3 on the origin chart
        for (chart, step, tangent) in [(Chart::Line, 2usize, 31), (Chart::Origin, 3, 31)] {
            let n = 5;
            let z = CycScalar::zero(n);
            let o = one(n);
            let rep = section_rep(chart, n, (&z, &o, &z)).unwrap();
            let q = local_quiver(&rep, default_degree_bound(&rep), &[]).unwrap();
            assert_eq!(q.tangent_dim, tangent);
            assert_eq!(q.orbit_dim, 20);
            assert_eq!(q.normal_dim, 11);
            let mut down = 0;
            let mut stepped = 0;
            let mut loops = 0;
            for a in &q.arrows {
                if a.dst == (a.src + 4) % 5 {
                    down += a.count;
                } else if a.dst == (a.src + step) % 5 {
                    stepped += a.count;
                } else if a.dst == a.src {
                    loops += a.count;
                } else {
                    panic!("unexpected arrow {} -> {}", a.src, a.dst);
                }
            }
            assert_eq!((down, stepped, loops), (5, 5, 1));
            assert_eq!(defect(&q, 27), 4);
        }
    }

    #[test]
    fn presentation_generator_count_matches_slots() {
        // guards the slot indices used for candidate directions
        let p = Presentation::quantum_plane(5);
        assert_eq!(p.gens()[0].name, "x");
        assert_eq!(p.gens()[1].name, "y");
        assert_eq!(p.gens()[2].name, "z");
    }
}
