//! The finite symmetry group acting on representations: conjugation by
//! shift/clock monomials combined with scaling along the generator grading.
//! Provides stabilizers, a canonical choice of stabilizer generator, the
//! twist-relative weight decomposition of local quiver arrows, and the
//! removal of the scaling direction from the normal data.

use crate::field::{rank_kernel, solve, CycMatrix, CycScalar, Solve};
use crate::heis::HeisPair;
use crate::ncalg::Presentation;
use crate::reps::{ModuleStructure, RepError, Representation};
use crate::tanspace::{orbit_space, LocalQuiver, OrbitSpace, TangentVector};
use serde::Serialize;

/// Element (a, b, c): conjugate by the monomial e1^a e2^b and scale each
/// generator g by rho^(c * deg g), deg being the grading degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupElement {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { a: 0, b: 0, c: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }
}

fn conjugators(n: u32, s: GroupElement) -> Result<(CycMatrix, CycMatrix), RepError> {
    let pair = HeisPair::psi(n, 1)?;
    let g = pair.monomial(s.a as i64, s.b as i64);
    let ginv = g.inverse().map_err(RepError::Field)?;
    Ok((g, ginv))
}

fn scaled_degree(n: u32, s: GroupElement, pres: &Presentation, slot: usize) -> CycScalar {
    let deg = pres.gens()[slot].cstar_degree;
    CycScalar::zeta_pow(n, s.c as i64 * deg)
}

/// The transformed representation s . phi.
pub fn act(s: GroupElement, rep: &Representation) -> Result<Representation, RepError> {
    let n = rep.conductor();
    let (g, ginv) = conjugators(n, s)?;
    let mut images = Vec::with_capacity(rep.images().len());
    for (slot, m) in rep.images().iter().enumerate() {
        let lam = scaled_degree(n, s, rep.presentation(), slot);
        let conj = ginv.checked_mul(m)?.checked_mul(&g)?;
        images.push(conj.scale(&lam));
    }
    Representation::new(rep.presentation().clone(), images)
}

/// The same transformation applied to a deformation direction.
pub fn act_tangent(
    s: GroupElement,
    rep: &Representation,
    v: &TangentVector,
) -> Result<TangentVector, RepError> {
    let n = rep.conductor();
    let (g, ginv) = conjugators(n, s)?;
    let mut deltas = Vec::with_capacity(v.deltas().len());
    for (slot, m) in v.deltas().iter().enumerate() {
        let lam = scaled_degree(n, s, rep.presentation(), slot);
        let conj = ginv.checked_mul(m)?.checked_mul(&g)?;
        deltas.push(conj.scale(&lam));
    }
    Ok(TangentVector::new(deltas))
}

/// All group elements fixing the representation exactly (image equality,
/// not mere isomorphism), in lexicographic order.
pub fn stabilizer(rep: &Representation) -> Result<Vec<GroupElement>, RepError> {
    let n = rep.conductor();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let s0 = GroupElement { a, b, c: 0 };
            let (g, ginv) = conjugators(n, s0)?;
            let conj: Vec<CycMatrix> = rep
                .images()
                .iter()
                .map(|m| ginv.checked_mul(m).unwrap().checked_mul(&g).unwrap())
                .collect();
            'next_c: for c in 0..n {
                let s = GroupElement { a, b, c };
                for (slot, m) in rep.images().iter().enumerate() {
                    let lam = scaled_degree(n, s, rep.presentation(), slot);
                    if &conj[slot].scale(&lam) != m {
                        continue 'next_c;
                    }
                }
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Pick the generator used for all reported weights: a fixed preference list
/// of elements known to generate the stabilizer at the named strata, then the
/// lexicographically first element inducing a vertex twist, then the first
/// non-identity element, then the identity.
pub fn canonical_generator(n: u32, stab: &[GroupElement]) -> GroupElement {
    let prefer = [
        GroupElement { a: 1, b: n - 1, c: 1 },
        GroupElement { a: 0, b: 1, c: n - 1 },
        GroupElement { a: 0, b: 1, c: 1 },
    ];
    for p in prefer {
        if stab.contains(&p) {
            return p;
        }
    }
    if let Some(s) = stab.iter().find(|s| s.a % n != 0) {
        return *s;
    }
    if let Some(s) = stab.iter().find(|s| !s.is_identity()) {
        return *s;
    }
    GroupElement::identity()
}

/// Report a residue in the symmetric window (-n/2, n/2].
pub fn symmetric_residue(n: u32, w: i64) -> i64 {
    let m = w.rem_euclid(n as i64);
    if 2 * m > n as i64 {
        m - n as i64
    } else {
        m
    }
}

/// Grading degree shared by every nonzero slot of the direction, when one
/// exists.
fn direction_degree(pres: &Presentation, v: &TangentVector) -> Option<i64> {
    let mut deg = None;
    for (slot, m) in v.deltas().iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        let d = pres.gens()[slot].cstar_degree;
        match deg {
            None => deg = Some(d),
            Some(prev) if prev != d => return None,
            Some(_) => {}
        }
    }
    deg
}

/// Split an eigenvalue exponent into scaling part (an honest integer,
/// c times the slot degree with c taken in the symmetric window) plus a
/// small conjugation part; weights are classes mod the conductor, and this
/// picks the representative matching how the action factors on the slot.
fn reported_weight(n: u32, c: u32, deg: Option<i64>, raw: i64) -> i64 {
    match deg {
        None => symmetric_residue(n, raw),
        Some(d) => {
            let scaled = symmetric_residue(n, c as i64) * d;
            scaled + symmetric_residue(n, raw - scaled)
        }
    }
}

/// Conjugation by e1^a pushes coordinate content from position p to p + a;
/// apply that relabelling to every slot of a deformation direction.
fn shift_coordinates(v: &TangentVector, a: u32) -> TangentVector {
    let deltas: Vec<CycMatrix> = v
        .deltas()
        .iter()
        .map(|m| {
            let d = m.rows();
            let s = a as usize % d;
            CycMatrix::from_fn(m.conductor(), d, d, |r, c| {
                m.get((r + d - s) % d, (c + d - s) % d).clone()
            })
        })
        .collect();
    TangentVector::new(deltas)
}

/// The vertex relabelling induced by the canonical generator on the summands
/// of a diagonal representation.
fn vertex_twist(
    rep: &Representation,
    structure: &ModuleStructure,
    a: u32,
) -> Option<Vec<usize>> {
    let summands = match structure {
        ModuleStructure::Semisimple { summands } if summands.len() > 1 => summands,
        _ => return None,
    };
    if a == 0 {
        return None;
    }
    let d = rep.size();
    let mut block = vec![0usize; d];
    for (i, s) in summands.iter().enumerate() {
        for &p in &s.positions {
            block[p] = i;
        }
    }
    let mut sigma = vec![0usize; summands.len()];
    for (i, s) in summands.iter().enumerate() {
        let target = block[(s.positions[0] + a as usize) % d];
        for &p in &s.positions {
            assert_eq!(block[(p + a as usize) % d], target, "twist tears a summand apart");
        }
        sigma[i] = target;
    }
    if sigma.iter().enumerate().all(|(i, &t)| i == t) {
        None
    } else {
        Some(sigma)
    }
}

/// Weights of a family of directions: each vector v must satisfy
/// s . v = rho^w sigma(v) modulo the conjugation orbit, either one vector at
/// a time or after an eigen-split of the span.
fn weight_split(
    rep: &Representation,
    s: GroupElement,
    twist: bool,
    orbit: &OrbitSpace,
    dirs: &[TangentVector],
) -> Result<(Vec<i64>, bool), RepError> {
    let n = rep.conductor();
    let mut weights = Vec::with_capacity(dirs.len());
    let mut unresolved = false;
    for v in dirs {
        let image = act_tangent(s, rep, v)?;
        let target = if twist { shift_coordinates(v, s.a) } else { v.clone() };
        let mut found = None;
        for w in 0..n {
            let diff = image.sub(&target.scale(&CycScalar::zeta_pow(n, w as i64)));
            if diff.is_zero() || orbit.contains(&diff) {
                found = Some(w as i64);
                break;
            }
        }
        match found {
            Some(w) => weights.push(w),
            None => {
                unresolved = true;
                break;
            }
        }
    }
    if !unresolved {
        return Ok((weights, true));
    }
    // mixed basis: express the action matrix on the span and split eigenvalues
    let targets: Vec<Vec<CycScalar>> = dirs
        .iter()
        .map(|v| if twist { shift_coordinates(v, s.a) } else { v.clone() }.flatten())
        .collect();
    let ambient = targets[0].len();
    let cols = dirs.len() + orbit.dim();
    let mut m = CycMatrix::zeros(n, ambient, cols);
    for (j, t) in targets.iter().enumerate() {
        for (i, val) in t.iter().enumerate() {
            m.set(i, j, val.clone());
        }
    }
    for (j, o) in orbit.basis().iter().enumerate() {
        for (i, val) in o.flatten().iter().enumerate() {
            m.set(i, dirs.len() + j, val.clone());
        }
    }
    let k = dirs.len();
    let mut action = CycMatrix::zeros(n, k, k);
    for (col, v) in dirs.iter().enumerate() {
        let rhs = act_tangent(s, rep, v)?.flatten();
        match solve(&m, &rhs).map_err(RepError::Field)? {
            Solve::Unique(x) => {
                for row in 0..k {
                    action.set(row, col, x[row].clone());
                }
            }
            Solve::Affine(x, _) => {
                for row in 0..k {
                    action.set(row, col, x[row].clone());
                }
            }
            Solve::Inconsistent => panic!("group action leaves the arrow span"),
        }
    }
    let mut weights = Vec::new();
    for w in 0..n {
        let lam = CycScalar::zeta_pow(n, w as i64);
        let shifted = action.checked_sub(&CycMatrix::scalar(n, k, &lam))?;
        let null = rank_kernel(&shifted).kernel.len();
        weights.extend(std::iter::repeat(w as i64).take(null));
    }
    assert_eq!(weights.len(), k, "arrow span does not split into weight lines");
    Ok((weights, false))
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedArrow {
    pub src: usize,
    pub dst: usize,
    pub count: usize,
    pub marked: usize,
    /// symmetric-window weights, one per surviving direction
    pub weights: Vec<i64>,
}

/// Local quiver arrows decorated with weights under the canonical stabilizer
/// generator.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedQuiver {
    pub generator: GroupElement,
    pub stabilizer_order: usize,
    /// vertex relabelling induced by the generator, when non-trivial
    pub twist: Option<Vec<usize>>,
    pub arrows: Vec<WeightedArrow>,
}

impl WeightedQuiver {
    /// All arrow weights as one multiset, sorted.
    pub fn weight_multiset(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self.arrows.iter().flat_map(|a| a.weights.clone()).collect();
        out.sort_unstable();
        out
    }
}

pub fn weighted_quiver(
    rep: &Representation,
    quiver: &LocalQuiver,
) -> Result<WeightedQuiver, RepError> {
    let n = rep.conductor();
    let stab = stabilizer(rep)?;
    let generator = canonical_generator(n, &stab);
    let orbit = orbit_space(rep)?;
    let twist = vertex_twist(rep, &quiver.structure, generator.a);
    let semisimple = matches!(quiver.structure, ModuleStructure::Semisimple { .. });
    let mut arrows = Vec::new();
    for (arrow, dirs) in quiver.arrows.iter().zip(&quiver.directions) {
        let (raw, aligned) = weight_split(rep, generator, semisimple, &orbit, dirs)?;
        let degs: Vec<Option<i64>> = dirs
            .iter()
            .map(|v| direction_degree(rep.presentation(), v))
            .collect();
        let common = if !degs.is_empty() && degs.iter().all(|d| *d == degs[0]) {
            degs[0]
        } else {
            None
        };
        let weights = raw
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                let deg = if aligned { degs[i] } else { common };
                reported_weight(n, generator.c, deg, w)
            })
            .collect();
        arrows.push(WeightedArrow {
            src: arrow.src,
            dst: arrow.dst,
            count: arrow.count,
            marked: arrow.marked,
            weights,
        });
    }
    Ok(WeightedQuiver { generator, stabilizer_order: stab.len(), twist, arrows })
}

/// Derivative of the grading torus: each generator slot carries deg(g) times
/// its image.  Zero when every generator has degree zero.
pub fn scaling_direction(rep: &Representation) -> TangentVector {
    let n = rep.conductor();
    let deltas: Vec<CycMatrix> = rep
        .presentation()
        .gens()
        .iter()
        .zip(rep.images())
        .map(|(info, m)| m.scale(&CycScalar::from_int(n, info.cstar_degree)))
        .collect();
    TangentVector::new(deltas)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReduction {
    /// index into the quiver's arrow list
    pub removed_arrow: usize,
    pub removed_weight: i64,
    /// remaining weights, kept in arrow/direction order
    pub reduced_weights: Vec<i64>,
}

/// Remove the scaling direction from the normal data: it spans one direction
/// inside exactly one arrow bucket, whose weight is dropped once from the
/// multiset.  Returns None when the grading acts trivially on the point.
pub fn scaling_reduction(
    rep: &Representation,
    quiver: &LocalQuiver,
    weighted: &WeightedQuiver,
) -> Result<Option<ScalingReduction>, RepError> {
    let euler = scaling_direction(rep);
    if euler.is_zero() {
        return Ok(None);
    }
    let n = rep.conductor();
    let orbit = orbit_space(rep)?;
    let flats: Vec<Vec<CycScalar>> = quiver
        .directions
        .iter()
        .flat_map(|dirs| dirs.iter().map(|v| v.flatten()))
        .collect();
    let ambient = euler.flatten().len();
    let cols = orbit.dim() + flats.len();
    let mut m = CycMatrix::zeros(n, ambient, cols);
    for (j, o) in orbit.basis().iter().enumerate() {
        for (i, val) in o.flatten().iter().enumerate() {
            m.set(i, j, val.clone());
        }
    }
    for (j, f) in flats.iter().enumerate() {
        for (i, val) in f.iter().enumerate() {
            m.set(i, orbit.dim() + j, val.clone());
        }
    }
    let x = match solve(&m, &euler.flatten()).map_err(RepError::Field)? {
        Solve::Unique(x) => x,
        Solve::Affine(x, _) => x,
        Solve::Inconsistent => {
            panic!("scaling direction escapes the tangent space");
        }
    };
    // locate the arrow bucket carrying the direction
    let mut offset = orbit.dim();
    let mut removed: Option<(usize, usize, i64)> = None;
    for (ai, dirs) in quiver.directions.iter().enumerate() {
        let mut hit: Option<(usize, i64)> = None;
        for (k, _) in dirs.iter().enumerate() {
            if !x[offset + k].is_zero() {
                let w = weighted.arrows[ai].weights[k];
                match hit {
                    None => hit = Some((k, w)),
                    Some((_, prev)) => {
                        assert_eq!(prev, w, "scaling direction mixes weights inside an arrow")
                    }
                }
            }
        }
        if let Some((k, w)) = hit {
            assert!(removed.is_none(), "scaling direction spread over several arrows");
            removed = Some((ai, k, w));
        }
        offset += dirs.len();
    }
    let (removed_arrow, removed_dir, removed_weight) =
        removed.expect("scaling direction lies in the conjugation orbit");
    let mut reduced = Vec::new();
    for (ai, a) in weighted.arrows.iter().enumerate() {
        for (k, &w) in a.weights.iter().enumerate() {
            if ai == removed_arrow && k == removed_dir {
                continue;
            }
            reduced.push(w);
        }
    }
    Ok(Some(ScalingReduction { removed_arrow, removed_weight, reduced_weights: reduced }))
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
