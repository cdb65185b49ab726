//! Presentations of the quantum plane, its blow-up subalgebras, and the
//! associated chart algebras, together with free-word arithmetic and exact
//! normal forms for quasi-commutative relation patterns.
//!
//! A quasi-commutative presentation stores the full antisymmetric exponent
//! table q with g_i g_j = rho^(q[i][j]) g_j g_i. Blow-up algebras are kept as
//! embedded presentations: generators map to monomials in an ambient
//! quasi-commutative algebra (the plane with a central variable adjoined),
//! and all linear questions are answered after embedding.

use crate::field::{CycScalar, FieldError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("operation requires a quasi-commutative presentation")]
    NotQuasiCommutative,
    #[error("operation requires an embedded presentation")]
    NotEmbedded,
    #[error("exponent table must be antisymmetric")]
    BadExponentTable,
}

/// A word in the free algebra: a sequence of generator indices.
pub type Word = Vec<u8>;

/// Element of the free algebra over Q(zeta_n) on an implicit generator set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcPoly {
    n: u32,
    terms: BTreeMap<Word, CycScalar>,
}

impl NcPoly {
    pub fn zero(n: u32) -> Self {
        NcPoly { n, terms: BTreeMap::new() }
    }

    pub fn one(n: u32) -> Self {
        Self::monomial(n, Word::new(), CycScalar::one(n))
    }

    pub fn gen(n: u32, idx: u8) -> Self {
        Self::monomial(n, vec![idx], CycScalar::one(n))
    }

    pub fn monomial(n: u32, word: Word, coeff: CycScalar) -> Self {
        assert_eq!(coeff.conductor(), n);
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(word, coeff);
        }
        NcPoly { n, terms }
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &CycScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, word: Word, coeff: CycScalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.remove(&word) {
            None => {
                self.terms.insert(word, coeff);
            }
            Some(old) => {
                let s = old.checked_add(&coeff).expect("conductor mismatch");
                if !s.is_zero() {
                    self.terms.insert(word, s);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(w, c)| (w.clone(), c.negate()))
            .collect();
        NcPoly { n: self.n, terms }
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        let mut out = Self::zero(self.n);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.checked_mul(s).expect("conductor mismatch"));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(w, c1.checked_mul(c2).expect("conductor mismatch"));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.n);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// One generator of a presentation, with the weight the torus action gives it.
#[derive(Debug, Clone)]
pub struct GenInfo {
    pub name: String,
    pub cstar_degree: i64,
}

enum Kind {
    /// g_i g_j = rho^(q[i][j]) g_j g_i
    QuasiCommutative { q: Vec<Vec<i64>> },
    /// generators map to monomials of an ambient quasi-commutative algebra
    Embedded { ambient: Arc<Presentation>, images: Vec<NcPoly> },
}

pub struct Presentation {
    name: String,
    n: u32,
    gens: Vec<GenInfo>,
    kind: Kind,
    relations: Vec<NcPoly>,
}

impl Presentation {
    /// Build a quasi-commutative presentation from the full exponent table.
    pub fn quasi_commutative(
        name: &str,
        n: u32,
        gens: Vec<(&str, i64)>,
        q: Vec<Vec<i64>>,
    ) -> Result<Arc<Self>, AlgError> {
        let g = gens.len();
        if q.len() != g || q.iter().any(|row| row.len() != g) {
            return Err(AlgError::BadExponentTable);
        }
        for i in 0..g {
            if q[i][i].rem_euclid(n as i64) != 0 {
                return Err(AlgError::BadExponentTable);
            }
            for j in 0..g {
                if (q[i][j] + q[j][i]).rem_euclid(n as i64) != 0 {
                    return Err(AlgError::BadExponentTable);
                }
            }
        }
        let mut relations = Vec::new();
        for i in 0..g {
            for j in i + 1..g {
                // g_i g_j - rho^(q[i][j]) g_j g_i
                let lhs = NcPoly::monomial(n, vec![i as u8, j as u8], CycScalar::one(n));
                let rhs = NcPoly::monomial(
                    n,
                    vec![j as u8, i as u8],
                    CycScalar::zeta_pow(n, q[i][j]),
                );
                relations.push(lhs.sub(&rhs));
            }
        }
        Ok(Arc::new(Presentation {
            name: name.to_string(),
            n,
            gens: gens
                .into_iter()
                .map(|(nm, d)| GenInfo { name: nm.to_string(), cstar_degree: d })
                .collect(),
            kind: Kind::QuasiCommutative { q },
            relations,
        }))
    }

    /// Cyclic 3-generator pattern: g0 g1 = rho^(e0) g1 g0,
    /// g1 g2 = rho^(e1) g2 g1, g2 g0 = rho^(e2) g0 g2.
    pub fn cyclic_quantum_space(
        name: &str,
        n: u32,
        gens: Vec<(&str, i64)>,
        exps: [i64; 3],
    ) -> Result<Arc<Self>, AlgError> {
        assert_eq!(gens.len(), 3);
        let q = vec![
            vec![0, exps[0], -exps[2]],
            vec![-exps[0], 0, exps[1]],
            vec![exps[2], -exps[1], 0],
        ];
        Self::quasi_commutative(name, n, gens, q)
    }

    /// The quantum plane with its cyclically symmetric relations and the
    /// projective torus weights.
    pub fn quantum_plane(n: u32) -> Arc<Self> {
        Self::cyclic_quantum_space(
            "quantum_plane",
            n,
            vec![("x", 1), ("y", 1), ("z", 1)],
            [1, 1, 1],
        )
        .expect("fixed table")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn gens(&self) -> &[GenInfo] {
        &self.gens
    }

    pub fn gen_index(&self, name: &str) -> Result<u8, AlgError> {
        self.gens
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as u8)
            .ok_or_else(|| AlgError::UnknownGenerator(name.to_string()))
    }

    pub fn gen_poly(&self, name: &str) -> Result<NcPoly, AlgError> {
        Ok(NcPoly::gen(self.n, self.gen_index(name)?))
    }

    pub fn relations(&self) -> &[NcPoly] {
        &self.relations
    }

    pub fn is_quasi_commutative(&self) -> bool {
        matches!(self.kind, Kind::QuasiCommutative { .. })
    }

    pub fn ambient(&self) -> Option<&Arc<Presentation>> {
        match &self.kind {
            Kind::Embedded { ambient, .. } => Some(ambient),
            _ => None,
        }
    }

    pub fn images(&self) -> Option<&[NcPoly]> {
        match &self.kind {
            Kind::Embedded { images, .. } => Some(images),
            _ => None,
        }
    }

    /// Torus weight of a word (sum of generator weights).
    pub fn word_cstar_degree(&self, word: &[u8]) -> i64 {
        word.iter()
            .map(|&g| self.gens[g as usize].cstar_degree)
            .sum()
    }

    /// Scalar picked up when sorting a word into non-decreasing generator
    /// order, together with the sorted word. Quasi-commutative only.
    pub fn sort_word(&self, word: &[u8]) -> Result<(CycScalar, Word), AlgError> {
        let Kind::QuasiCommutative { q } = &self.kind else {
            return Err(AlgError::NotQuasiCommutative);
        };
        // moving g_a left past g_b (a > b) uses g_a g_b = rho^(q[a][b]) g_b g_a;
        // summing q[a][b] over inversion pairs gives the total exponent
        let mut exp: i64 = 0;
        for p1 in 0..word.len() {
            for p2 in p1 + 1..word.len() {
                let (a, b) = (word[p1] as usize, word[p2] as usize);
                if a > b {
                    exp += q[a][b];
                }
            }
        }
        let mut sorted = word.to_vec();
        sorted.sort_unstable();
        Ok((CycScalar::zeta_pow(self.n, exp), sorted))
    }

    /// Normal form: every word sorted into non-decreasing generator order.
    pub fn normal_form(&self, p: &NcPoly) -> Result<NcPoly, AlgError> {
        let mut out = NcPoly::zero(self.n);
        for (w, c) in &p.terms {
            let (s, sorted) = self.sort_word(w)?;
            out.add_term(sorted, c.checked_mul(&s)?);
        }
        Ok(out)
    }

    /// Push an element of an embedded presentation into its ambient algebra
    /// and normal-form it there. Equality of embedded elements means equality
    /// of these images.
    pub fn embed(&self, p: &NcPoly) -> Result<NcPoly, AlgError> {
        let Kind::Embedded { ambient, images } = &self.kind else {
            return Err(AlgError::NotEmbedded);
        };
        let mut out = NcPoly::zero(self.n);
        for (w, c) in &p.terms {
            let mut acc = NcPoly::monomial(self.n, Word::new(), c.clone());
            for &g in w {
                acc = acc.mul(&images[g as usize]);
            }
            out = out.add(&acc);
        }
        ambient.normal_form(&out)
    }

    /// Test whether an element is central, by commuting it with every
    /// generator and checking the difference vanishes (after embedding, for
    /// embedded presentations).
    pub fn is_central(&self, p: &NcPoly) -> Result<bool, AlgError> {
        for idx in 0..self.gens.len() {
            let g = NcPoly::gen(self.n, idx as u8);
            let diff = p.mul(&g).sub(&g.mul(p));
            let reduced = match &self.kind {
                Kind::QuasiCommutative { .. } => self.normal_form(&diff)?,
                Kind::Embedded { .. } => self.embed(&diff)?,
            };
            if !reduced.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether a monomial's exponent pattern is central: the commutation
    /// exponent with every generator vanishes mod n. For embedded
    /// presentations the test runs on the ambient image of the word.
    pub fn central_pattern(&self, word: &[u8]) -> Result<bool, AlgError> {
        match &self.kind {
            Kind::QuasiCommutative { q } => {
                let mut counts = vec![0i64; self.gens.len()];
                for &g in word {
                    counts[g as usize] += 1;
                }
                for i in 0..self.gens.len() {
                    let mut e: i64 = 0;
                    for (j, cnt) in counts.iter().enumerate() {
                        e += q[i][j] * cnt;
                    }
                    if e.rem_euclid(self.n as i64) != 0 {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Kind::Embedded { ambient, images } => {
                let mut ambient_word = Word::new();
                for &g in word {
                    let img = &images[g as usize];
                    assert_eq!(img.num_terms(), 1, "generator images must be monomials");
                    let (w, _) = img.terms().next().unwrap();
                    ambient_word.extend_from_slice(w);
                }
                ambient.central_pattern(&ambient_word)
            }
        }
    }

    /// Human-readable rendering with generator names and collected exponents.
    pub fn format_poly(&self, p: &NcPoly) -> String {
        if p.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (w, c)) in p.terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let coeff = c.to_string();
            let coeff_str = if coeff == "1" && !w.is_empty() {
                String::new()
            } else if coeff.contains(' ') || coeff.starts_with('-') {
                format!("({coeff})")
            } else {
                coeff
            };
            let mut word_str = String::new();
            let mut idx = 0;
            while idx < w.len() {
                let g = w[idx];
                let mut run = 1;
                while idx + run < w.len() && w[idx + run] == g {
                    run += 1;
                }
                if !word_str.is_empty() {
                    word_str.push('*');
                }
                if run == 1 {
                    let _ = write!(word_str, "{}", self.gens[g as usize].name);
                } else {
                    let _ = write!(word_str, "{}^{}", self.gens[g as usize].name, run);
                }
                idx += run;
            }
            match (coeff_str.is_empty(), word_str.is_empty()) {
                (true, true) => out.push('1'),
                (true, false) => out.push_str(&word_str),
                (false, true) => out.push_str(&coeff_str),
                (false, false) => {
                    out.push_str(&coeff_str);
                    out.push('*');
                    out.push_str(&word_str);
                }
            }
        }
        out
    }
}

/// Which monomial ideal is blown up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupIdeal {
    /// the ideal (x, z): a line on the degenerate locus
    XZ,
    /// the ideal (x, y, z): the base point of the central fibration
    XYZ,
}

impl BlowupIdeal {
    pub fn capital_letters(&self) -> &'static [&'static str] {
        match self {
            BlowupIdeal::XZ => &["X", "Z"],
            BlowupIdeal::XYZ => &["X", "Y", "Z"],
        }
    }

    fn lowercase_of(letter: &str) -> &'static str {
        match letter {
            "X" => "x",
            "Y" => "y",
            "Z" => "z",
            _ => unreachable!(),
        }
    }
}

/// The ambient algebra for blow-ups: the plane with one extra central
/// generator t of torus weight one (plane generators carry weight zero here;
/// the blow-up generators inherit their weights through their images).
pub fn plane_with_central_parameter(n: u32) -> Arc<Presentation> {
    let q = vec![
        vec![0, 1, -1, 0],
        vec![-1, 0, 1, 0],
        vec![1, -1, 0, 0],
        vec![0, 0, 0, 0],
    ];
    Presentation::quasi_commutative(
        "plane_with_parameter",
        n,
        vec![("x", 0), ("y", 0), ("z", 0), ("t", 1)],
        q,
    )
    .expect("fixed table")
}

/// Degree-one part generators G = g t for g among the ideal letters, adjoined
/// to the plane generators. Relations are generated mechanically from the
/// ambient exchange rules:
///   - plane relations among x, y, z;
///   - G H = rho^(q[g][h]) H G between degree-one generators;
///   - g H = rho^(q[g][h]) H g, mixing degree zero and one;
///   - g H = G h whenever both capitals exist (the central parameter
///     mediates between the two placements).
pub fn blowup_presentation(ideal: BlowupIdeal, n: u32) -> Arc<Presentation> {
    let ambient = plane_with_central_parameter(n);
    let q_plane: [[i64; 3]; 3] = [[0, 1, -1], [-1, 0, 1], [1, -1, 0]];
    let lower = ["x", "y", "z"];
    let caps = ideal.capital_letters();

    let mut gens: Vec<(&str, i64)> = lower.iter().map(|g| (*g, 0)).collect();
    for c in caps {
        gens.push((*c, 1));
    }

    let t_idx = ambient.gen_index("t").unwrap();
    let mut images = Vec::new();
    for (gname, _) in &gens {
        let img = if gname.chars().next().unwrap().is_lowercase() {
            ambient.gen_poly(gname).unwrap()
        } else {
            let base = BlowupIdeal::lowercase_of(gname);
            ambient
                .gen_poly(base)
                .unwrap()
                .mul(&NcPoly::gen(n, t_idx))
        };
        images.push(img);
    }

    let idx_of = |name: &str| gens.iter().position(|(g, _)| *g == name).unwrap() as u8;
    let plane_idx = |name: &str| lower.iter().position(|g| *g == name).unwrap();

    let mut relations: Vec<NcPoly> = Vec::new();
    let mono = |w: Word, e: i64| NcPoly::monomial(n, w, CycScalar::zeta_pow(n, e));

    // plane relations among the degree-zero generators
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (idx_of(lower[i]), idx_of(lower[j]));
            relations.push(mono(vec![a, b], 0).sub(&mono(vec![b, a], q_plane[i][j])));
        }
    }
    // exchange among the degree-one generators
    for i in 0..caps.len() {
        for j in i + 1..caps.len() {
            let (gi, gj) = (
                plane_idx(BlowupIdeal::lowercase_of(caps[i])),
                plane_idx(BlowupIdeal::lowercase_of(caps[j])),
            );
            let (a, b) = (idx_of(caps[i]), idx_of(caps[j]));
            relations.push(mono(vec![a, b], 0).sub(&mono(vec![b, a], q_plane[gi][gj])));
        }
    }
    // mixed exchange: lowercase past capital
    for g in lower {
        for h in caps.iter() {
            let (gi, hj) = (plane_idx(g), plane_idx(BlowupIdeal::lowercase_of(h)));
            let (a, b) = (idx_of(g), idx_of(h));
            relations.push(mono(vec![a, b], 0).sub(&mono(vec![b, a], q_plane[gi][hj])));
        }
    }
    // the parameter mediates: g H = G h when both capitals exist
    for g in lower {
        for h in lower {
            if g == h {
                continue;
            }
            let gc = g.to_uppercase();
            let hc = h.to_uppercase();
            if caps.contains(&gc.as_str()) && caps.contains(&hc.as_str()) {
                let lhs = mono(vec![idx_of(g), idx_of(&hc)], 0);
                let rhs = mono(vec![idx_of(&gc), idx_of(h)], 0);
                relations.push(lhs.sub(&rhs));
            }
        }
    }

    let name = match ideal {
        BlowupIdeal::XZ => "blowup_line",
        BlowupIdeal::XYZ => "blowup_origin",
    };
    Arc::new(Presentation {
        name: name.to_string(),
        n,
        gens: gens
            .into_iter()
            .map(|(nm, d)| GenInfo { name: nm.to_string(), cstar_degree: d })
            .collect(),
        kind: Kind::Embedded { ambient, images },
        relations,
    })
}

/// Which affine chart of the fiber-wise projective picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// chart over the blown-up line (exponent pattern 1, 2, 1)
    Line,
    /// chart over the blown-up origin (exponent pattern 1, 3, 1)
    Origin,
}

/// Degree-zero section algebra of a chart: a three-generator
/// quasi-commutative algebra with the indicated cyclic pattern. The torus
/// acts trivially on sections, so all weights vanish.
pub fn chart_presentation(chart: Chart, n: u32) -> Arc<Presentation> {
    let (name, exps) = match chart {
        Chart::Line => ("chart_line", [1, 2, 1]),
        Chart::Origin => ("chart_origin", [1, 3, 1]),
    };
    Presentation::cyclic_quantum_space(name, n, vec![("u", 0), ("v", 0), ("w", 0)], exps)
        .expect("fixed table")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CycScalar, EchelonSpace, SparseVec};
    use std::collections::{HashMap, HashSet, VecDeque};

    fn nf_string(pres: &Presentation, p: &NcPoly) -> String {
        pres.format_poly(&pres.normal_form(p).unwrap())
    }

    #[test]
    fn plane_has_three_relations_and_rewrites() {
        let a = Presentation::quantum_plane(5);
        assert_eq!(a.relations().len(), 3);
        let x = a.gen_poly("x").unwrap();
        let y = a.gen_poly("y").unwrap();
        // y x = rho^-1 x y, i.e. coefficient zeta^4 at conductor 5
        let yx = y.mul(&x);
        let nf = a.normal_form(&yx).unwrap();
        let expect = x.mul(&y).scale(&CycScalar::zeta_pow(5, -1));
        assert_eq!(nf, expect);
        assert_eq!(nf_string(&a, &yx), nf_string(&a, &expect));
    }

    #[test]
    fn relations_normal_form_to_zero() {
        for n in [4u32, 5, 7] {
            let a = Presentation::quantum_plane(n);
            for r in a.relations() {
                assert!(a.normal_form(r).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn sorting_is_confluent_for_small_words() {
        // every sequence of adjacent exchanges must assign the sorted word the
        // same scalar; explore all exchange orders by BFS over (word, exponent)
        let n = 5u32;
        let amb = plane_with_central_parameter(n);
        let gens = 4usize;
        let q: Vec<Vec<i64>> = vec![
            vec![0, 1, -1, 0],
            vec![-1, 0, 1, 0],
            vec![1, -1, 0, 0],
            vec![0, 0, 0, 0],
        ];
        for len in 2..=5usize {
            for code in 0..gens.pow(len as u32) {
                let mut w = Word::with_capacity(len);
                let mut c = code;
                for _ in 0..len {
                    w.push((c % gens) as u8);
                    c /= gens;
                }
                let mut seen: HashSet<(Word, i64)> = HashSet::new();
                let mut queue = VecDeque::new();
                queue.push_back((w.clone(), 0i64));
                let mut terminal_exps: HashSet<i64> = HashSet::new();
                while let Some((cur, exp)) = queue.pop_front() {
                    if !seen.insert((cur.clone(), exp.rem_euclid(n as i64))) {
                        continue;
                    }
                    let mut is_sorted = true;
                    for p in 0..cur.len() - 1 {
                        let (a, b) = (cur[p], cur[p + 1]);
                        if a > b {
                            is_sorted = false;
                        }
                        if a != b {
                            // g_a g_b = rho^(q[a][b]) g_b g_a in either direction
                            let mut nxt = cur.clone();
                            nxt.swap(p, p + 1);
                            queue.push_back((nxt, exp + q[a as usize][b as usize]));
                        }
                    }
                    if is_sorted {
                        terminal_exps.insert(exp.rem_euclid(n as i64));
                    }
                }
                assert_eq!(
                    terminal_exps.len(),
                    1,
                    "exchange order changed the scalar for word {w:?}"
                );
                let (s, _) = amb.sort_word(&w).unwrap();
                let bfs_exp = *terminal_exps.iter().next().unwrap();
                assert_eq!(s, CycScalar::zeta_pow(n, bfs_exp));
            }
        }
    }

    #[test]
    fn nth_powers_and_product_generate_the_center() {
        for n in [4u32, 5] {
            let a = Presentation::quantum_plane(n);
            let x = a.gen_poly("x").unwrap();
            let y = a.gen_poly("y").unwrap();
            let z = a.gen_poly("z").unwrap();
            for p in [
                x.pow(n),
                y.pow(n),
                z.pow(n),
                x.mul(&y).mul(&z),
            ] {
                assert!(a.is_central(&p).unwrap());
            }
            // x, y themselves are not central
            assert!(!a.is_central(&x).unwrap());
            // neither is x*y
            assert!(!a.is_central(&x.mul(&y)).unwrap());
        }
    }

    #[test]
    fn power_product_relation_in_the_center() {
        // x^n y^n z^n = rho^(n(n-1)/2) (xyz)^n
        for n in [4u32, 5, 7] {
            let a = Presentation::quantum_plane(n);
            let x = a.gen_poly("x").unwrap();
            let y = a.gen_poly("y").unwrap();
            let z = a.gen_poly("z").unwrap();
            let lhs = a.normal_form(&x.pow(n).mul(&y.pow(n)).mul(&z.pow(n))).unwrap();
            let g_n = a.normal_form(&x.mul(&y).mul(&z).pow(n)).unwrap();
            let lambda = CycScalar::zeta_pow(n, (n as i64) * (n as i64 - 1) / 2);
            assert_eq!(lhs, g_n.scale(&lambda), "n = {n}");
        }
        // concrete scalars: trivial at n = 5, a sign at n = 4
        assert!(CycScalar::zeta_pow(5, 10).is_one());
        assert_eq!(CycScalar::zeta_pow(4, 6), CycScalar::from_int(4, -1));
    }

    #[test]
    fn central_pattern_agrees_with_centrality() {
        let n = 4u32;
        let a = Presentation::quantum_plane(n);
        // all exponent vectors with entries <= n
        for ex in 0..=n {
            for ey in 0..=n {
                for ez in 0..=n {
                    let mut w = Word::new();
                    w.extend(std::iter::repeat(0).take(ex as usize));
                    w.extend(std::iter::repeat(1).take(ey as usize));
                    w.extend(std::iter::repeat(2).take(ez as usize));
                    let mono = NcPoly::monomial(n, w.clone(), CycScalar::one(n));
                    assert_eq!(
                        a.central_pattern(&w).unwrap(),
                        a.is_central(&mono).unwrap(),
                        "exponents ({ex},{ey},{ez})"
                    );
                }
            }
        }
    }

    #[test]
    fn blowup_relation_counts() {
        assert_eq!(blowup_presentation(BlowupIdeal::XZ, 5).relations().len(), 12);
        assert_eq!(blowup_presentation(BlowupIdeal::XYZ, 5).relations().len(), 21);
    }

    #[test]
    fn blowup_relations_embed_to_zero() {
        for n in [4u32, 5, 7] {
            for ideal in [BlowupIdeal::XZ, BlowupIdeal::XYZ] {
                let b = blowup_presentation(ideal, n);
                for r in b.relations() {
                    let img = b.embed(r).unwrap();
                    assert!(
                        img.is_zero(),
                        "relation {} fails at n={n}",
                        b.format_poly(r)
                    );
                }
            }
        }
    }

    #[test]
    fn blowup_line_relation_snapshot() {
        let b = blowup_presentation(BlowupIdeal::XZ, 5);
        let rendered: Vec<String> = b.relations().iter().map(|r| b.format_poly(r)).collect();
        // at conductor 5 the inverse root reduces into the power basis:
        // -zeta^-1 = 1 + z + z^2 + z^3
        let expect = vec![
            "x*y + (-z)*y*x",
            "x*z + (1 + z + z^2 + z^3)*z*x",
            "y*z + (-z)*z*y",
            "X*Z + (1 + z + z^2 + z^3)*Z*X",
            "x*X + (-1)*X*x",
            "x*Z + (1 + z + z^2 + z^3)*Z*x",
            "y*X + (1 + z + z^2 + z^3)*X*y",
            "y*Z + (-z)*Z*y",
            "z*X + (-z)*X*z",
            "z*Z + (-1)*Z*z",
            "x*Z + (-1)*X*z",
            "z*X + (-1)*Z*x",
        ];
        assert_eq!(rendered, expect);
    }

    #[test]
    fn blowup_center_contains_plane_powers() {
        let n = 5u32;
        let b = blowup_presentation(BlowupIdeal::XZ, n);
        let x = b.gen_poly("x").unwrap();
        let y = b.gen_poly("y").unwrap();
        let z = b.gen_poly("z").unwrap();
        let xyz = x.mul(&y).mul(&z);
        for p in [x.pow(n), y.pow(n), z.pow(n), xyz] {
            assert!(b.is_central(&p).unwrap());
        }
        let cap_x = b.gen_poly("X").unwrap();
        assert!(!b.is_central(&cap_x).unwrap());
    }

    /// Every linear dependence among low-degree words that holds after
    /// embedding must already follow from the listed relations: the two-sided
    /// ideal they span (in matching degree) contains each difference.
    fn separation_holds(ideal: BlowupIdeal, n: u32, max_len: usize) {
        let b = blowup_presentation(ideal, n);
        let g = b.num_gens() as u8;
        // enumerate words by length
        let mut words: Vec<Word> = vec![Word::new()];
        let mut all: Vec<Word> = vec![Word::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &words {
                for gi in 0..g {
                    let mut v = w.clone();
                    v.push(gi);
                    next.push(v);
                }
            }
            all.extend(next.iter().cloned());
            words = next;
        }
        let word_index: HashMap<Word, usize> =
            all.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();

        // span of a r b for listed relations r and words a, b within degree
        let mut span = EchelonSpace::new(n, all.len());
        for r in b.relations() {
            let rlen = r.terms().next().unwrap().0.len();
            for a in &all {
                for bb in &all {
                    if a.len() + rlen + bb.len() > max_len {
                        continue;
                    }
                    let pa = NcPoly::monomial(n, a.clone(), CycScalar::one(n));
                    let pb = NcPoly::monomial(n, bb.clone(), CycScalar::one(n));
                    let prod = pa.mul(r).mul(&pb);
                    let sv: SparseVec = prod
                        .terms()
                        .map(|(w, c)| (word_index[w], c.clone()))
                        .collect();
                    let mut sv = sv;
                    sv.sort_by_key(|(i, _)| *i);
                    span.insert(sv);
                }
            }
        }

        // group words by their embedded ambient image (a single monomial with
        // scalar); normalize each word by that scalar and subtract in pairs
        let mut groups: HashMap<Word, Vec<(usize, CycScalar)>> = HashMap::new();
        for w in &all {
            let mono = NcPoly::monomial(n, w.clone(), CycScalar::one(n));
            let img = b.embed(&mono).unwrap();
            assert_eq!(img.num_terms(), 1);
            let (aw, ac) = img.terms().next().unwrap();
            groups
                .entry(aw.clone())
                .or_default()
                .push((word_index[w], ac.clone()));
        }
        for (_, members) in groups {
            if members.len() < 2 {
                continue;
            }
            let (i0, c0) = &members[0];
            for (i1, c1) in &members[1..] {
                // c0^-1 w0 - c1^-1 w1 embeds to zero
                let mut sv: SparseVec = vec![
                    (*i0, c0.inv().unwrap()),
                    (*i1, c1.inv().unwrap().negate()),
                ];
                sv.sort_by_key(|(i, _)| *i);
                assert!(
                    span.contains(&sv),
                    "dependence between words {:?} and {:?} is not a relation consequence",
                    all[*i0],
                    all[*i1]
                );
            }
        }
    }

    #[test]
    fn listed_relations_separate_line_blowup_words() {
        separation_holds(BlowupIdeal::XZ, 5, 4);
        separation_holds(BlowupIdeal::XZ, 4, 4);
    }

    #[test]
    fn listed_relations_separate_origin_blowup_words() {
        separation_holds(BlowupIdeal::XYZ, 4, 4);
    }

    #[test]
    fn chart_presentations_have_cyclic_patterns() {
        let line = chart_presentation(Chart::Line, 5);
        assert_eq!(line.relations().len(), 3);
        let u = line.gen_poly("u").unwrap();
        let v = line.gen_poly("v").unwrap();
        let w = line.gen_poly("w").unwrap();
        // u v = rho v u
        assert_eq!(
            line.normal_form(&v.mul(&u)).unwrap(),
            u.mul(&v).scale(&CycScalar::zeta_pow(5, -1))
        );
        // v w = rho^2 w v
        assert_eq!(
            line.normal_form(&w.mul(&v)).unwrap(),
            v.mul(&w).scale(&CycScalar::zeta_pow(5, -2))
        );
        let origin = chart_presentation(Chart::Origin, 5);
        let v = origin.gen_poly("v").unwrap();
        let w = origin.gen_poly("w").unwrap();
        assert_eq!(
            origin.normal_form(&w.mul(&v)).unwrap(),
            v.mul(&w).scale(&CycScalar::zeta_pow(5, -3))
        );
    }

    #[test]
    fn blowup_generator_weights() {
        let b = blowup_presentation(BlowupIdeal::XYZ, 5);
        for g in b.gens() {
            let expect = if g.name.chars().next().unwrap().is_uppercase() {
                1
            } else {
                0
            };
            assert_eq!(g.cstar_degree, expect, "generator {}", g.name);
        }
        let w: Word = vec![
            b.gen_index("x").unwrap(),
            b.gen_index("X").unwrap(),
            b.gen_index("Y").unwrap(),
        ];
        assert_eq!(b.word_cstar_degree(&w), 2);
    }
}
