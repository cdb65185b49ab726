//! Monomial invariants of the finite symmetry group.
//!
//! The group is the kernel of the sum map (Z_n)^3 -> Z_n. It acts on a
//! monomial x^k y^l z^m through the character (a, b, c) |-> rho^(ak+bl+cm),
//! so a monomial is invariant exactly when k, l, m agree mod n. Every
//! invariant monomial factors through the four basic invariants
//! u = x^n, v = y^n, w = z^n, g = xyz.

use serde::Serialize;

/// Elements (a, b, c) of (Z_n)^3 with a + b + c = 0 mod n.
pub fn group_elements(n: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let c = (2 * n - a - b) % n;
            out.push((a, b, c));
        }
    }
    out
}

/// Scalar exponent picked up by x^k y^l z^m under (a, b, c): ak + bl + cm.
pub fn action_exponent(s: (u32, u32, u32), exps: (u64, u64, u64)) -> u64 {
    s.0 as u64 * exps.0 + s.1 as u64 * exps.1 + s.2 as u64 * exps.2
}

/// Invariance of x^k y^l z^m under the whole kernel group.
pub fn is_invariant(n: u32, exps: (u64, u64, u64)) -> bool {
    let n = n as u64;
    exps.0 % n == exps.1 % n && exps.1 % n == exps.2 % n
}

/// An invariant monomial written over the basic invariants:
/// x^k y^l z^m = u^pu * v^pv * w^pw * g^pg (as exponent bookkeeping; the
/// algebra-level reordering scalar is tracked elsewhere).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InvariantWord {
    pub p_u: u64,
    pub p_v: u64,
    pub p_w: u64,
    pub p_g: u64,
}

/// Greedy decomposition: strip g = xyz down to the smallest exponent, then
/// divide the remaining pure powers by n. Returns None for non-invariant
/// exponent triples.
pub fn decompose(n: u32, exps: (u64, u64, u64)) -> Option<InvariantWord> {
    if !is_invariant(n, exps) {
        return None;
    }
    let n = n as u64;
    let d = exps.0.min(exps.1).min(exps.2);
    let (rk, rl, rm) = (exps.0 - d, exps.1 - d, exps.2 - d);
    debug_assert!(rk % n == 0 && rl % n == 0 && rm % n == 0);
    Some(InvariantWord {
        p_u: rk / n,
        p_v: rl / n,
        p_w: rm / n,
        p_g: d,
    })
}

/// Exponents reconstructed from a decomposition.
pub fn recompose(n: u32, w: &InvariantWord) -> (u64, u64, u64) {
    let n = n as u64;
    (
        n * w.p_u + w.p_g,
        n * w.p_v + w.p_g,
        n * w.p_w + w.p_g,
    )
}
