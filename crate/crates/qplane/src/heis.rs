//! The finite Heisenberg pair: the shift and clock matrices that generate the
//! irreducible n-dimensional picture, plus consistency checks on the
//! identities every other module leans on.

use crate::field::{CycMatrix, CycScalar, FieldError};
use serde::Serialize;

/// The pair (e1, e2) in M_n over Q(zeta_n), with e2 twisted by a power k
/// coprime to n. e1 is the shift taking the j-th basis vector to the
/// (j-1)-st (indices mod n); e2 is diagonal with entries rho^(k*i).
#[derive(Clone)]
pub struct HeisPair {
    n: u32,
    k: i64,
    e1: CycMatrix,
    e2: CycMatrix,
}

impl HeisPair {
    pub fn psi(n: u32, k: i64) -> Result<Self, FieldError> {
        if n == 0 {
            return Err(FieldError::InvalidConductor(0));
        }
        let size = n as usize;
        let mut e1 = CycMatrix::zeros(n, size, size);
        for j in 0..size {
            let i = (j + size - 1) % size;
            e1.set(i, j, CycScalar::one(n));
        }
        let e2 = CycMatrix::from_fn(n, size, size, |r, c| {
            if r == c {
                CycScalar::zeta_pow(n, k * r as i64)
            } else {
                CycScalar::zero(n)
            }
        });
        Ok(HeisPair { n, k, e1, e2 })
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn twist(&self) -> i64 {
        self.k
    }

    pub fn e1(&self) -> &CycMatrix {
        &self.e1
    }

    pub fn e2(&self) -> &CycMatrix {
        &self.e2
    }

    /// e1^a * e2^b, exponents taken in Z.
    pub fn monomial(&self, a: i64, b: i64) -> CycMatrix {
        self.e1
            .pow(a)
            .unwrap()
            .checked_mul(&self.e2.pow(b).unwrap())
            .unwrap()
    }

    /// e2^-1 * e1^-1, the third vertex of the standard triple.
    pub fn e2_inv_e1_inv(&self) -> CycMatrix {
        self.e2
            .pow(-1)
            .unwrap()
            .checked_mul(&self.e1.pow(-1).unwrap())
            .unwrap()
    }
}

/// Outcome of checking the defining identities of one pair.
#[derive(Debug, Clone, Serialize)]
pub struct HeisReport {
    pub n: u32,
    pub k: i64,
    pub e1_order_divides_n: bool,
    pub e2_order_divides_n: bool,
    /// e1 e2 e1^-1 e2^-1 == rho^k I
    pub commutator_is_rho_k: bool,
    /// e1 e2 == rho^k e2 e1
    pub exchange_rule: bool,
    /// (e2^-1 e1^-1)^n is scalar
    pub triple_power_scalar: bool,
    /// that scalar equals rho^(k n (n-1) / 2)
    pub triple_power_value: bool,
    pub triple_power: String,
    pub ok: bool,
}

/// Check every identity the rest of the crate assumes about psi(n, k).
pub fn verify_heis_identities(n: u32, k: i64) -> Result<HeisReport, FieldError> {
    let pair = HeisPair::psi(n, k)?;
    let size = n as usize;
    let id = CycMatrix::identity(n, size);
    let rho_k = CycScalar::zeta_pow(n, k);

    let e1_order = pair.e1.pow(n as i64)? == id;
    let e2_order = pair.e2.pow(n as i64)? == id;

    let comm = CycMatrix::commutator_group(&pair.e1, &pair.e2)?;
    let commutator_ok = comm == CycMatrix::scalar(n, size, &rho_k);

    let lhs = pair.e1.checked_mul(&pair.e2)?;
    let rhs = pair.e2.checked_mul(&pair.e1)?.scale(&rho_k);
    let exchange = lhs == rhs;

    let third = pair.e2_inv_e1_inv();
    let power = third.pow(n as i64)?;
    let scalar = power.as_scalar();
    let expected = CycScalar::zeta_pow(n, k * (n as i64) * (n as i64 - 1) / 2);
    let triple_scalar = scalar.is_some();
    let triple_value = scalar.as_ref().map(|s| *s == expected).unwrap_or(false);
    let triple_display = scalar
        .map(|s| s.to_string())
        .unwrap_or_else(|| "not scalar".to_string());

    let ok = e1_order && e2_order && commutator_ok && exchange && triple_scalar && triple_value;
    Ok(HeisReport {
        n,
        k,
        e1_order_divides_n: e1_order,
        e2_order_divides_n: e2_order,
        commutator_is_rho_k: commutator_ok,
        exchange_rule: exchange,
        triple_power_scalar: triple_scalar,
        triple_power_value: triple_value,
        triple_power: triple_display,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CycScalar;
    use num::integer::gcd;

    #[test]
    fn shift_matrix_entries_n5() {
        let pair = HeisPair::psi(5, 1).unwrap();
        // column j carries a single 1 in row j-1 (mod 5)
        for j in 0..5usize {
            for i in 0..5usize {
                let expect = i == (j + 4) % 5;
                assert_eq!(pair.e1().get(i, j).is_one(), expect, "entry ({i},{j})");
                assert_eq!(pair.e1().get(i, j).is_zero(), !expect, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn clock_matrix_entries_n5() {
        let pair = HeisPair::psi(5, 1).unwrap();
        for i in 0..5usize {
            assert_eq!(*pair.e2().get(i, i), CycScalar::zeta_pow(5, i as i64));
        }
    }

    #[test]
    fn shift_acts_by_decrement() {
        // e1 applied to the j-th coordinate vector yields the (j-1)-st
        let pair = HeisPair::psi(5, 1).unwrap();
        let n = 5;
        for j in 0..5usize {
            let mut v = CycMatrix::zeros(n, 5, 1);
            v.set(j, 0, CycScalar::one(n));
            let out = pair.e1().checked_mul(&v).unwrap();
            for i in 0..5usize {
                let expect = i == (j + 4) % 5;
                assert_eq!(out.get(i, 0).is_one(), expect);
            }
        }
    }

    #[test]
    fn twisted_commutator_n5_k2() {
        let pair = HeisPair::psi(5, 2).unwrap();
        let comm = CycMatrix::commutator_group(pair.e1(), pair.e2()).unwrap();
        assert_eq!(
            comm,
            CycMatrix::scalar(5, 5, &CycScalar::zeta_pow(5, 2))
        );
    }

    #[test]
    fn triple_power_scalar_small_cases() {
        // odd n: the n-th power of e2^-1 e1^-1 is the identity;
        // n = 4: it is rho^2 = -1 times the identity
        let r5 = verify_heis_identities(5, 1).unwrap();
        assert!(r5.ok);
        assert_eq!(r5.triple_power, "1");

        let r4 = verify_heis_identities(4, 1).unwrap();
        assert!(r4.ok);
        let minus_one = CycScalar::zeta_pow(4, 2);
        assert_eq!(r4.triple_power, minus_one.to_string());
        assert_eq!(minus_one, CycScalar::from_int(4, -1));
    }

    #[test]
    fn identities_hold_for_all_small_conductors() {
        for n in 1..=12u32 {
            for k in 1..=n as i64 {
                if gcd(k, n as i64) != 1 {
                    continue;
                }
                let report = verify_heis_identities(n, k).unwrap();
                assert!(report.ok, "identities failed at n={n}, k={k}: {report:?}");
            }
        }
    }

    #[test]
    fn monomial_group_relations() {
        let pair = HeisPair::psi(7, 1).unwrap();
        // e2^-1 e1 e2 = rho e1 and e1^-1 e2 e1 = rho^-1 e2
        let lhs = pair
            .e2()
            .pow(-1)
            .unwrap()
            .checked_mul(pair.e1())
            .unwrap()
            .checked_mul(pair.e2())
            .unwrap();
        assert_eq!(lhs, pair.e1().scale(&CycScalar::zeta_pow(7, 1)));
        let lhs = pair
            .e1()
            .pow(-1)
            .unwrap()
            .checked_mul(pair.e2())
            .unwrap()
            .checked_mul(pair.e1())
            .unwrap();
        assert_eq!(lhs, pair.e2().scale(&CycScalar::zeta_pow(7, -1)));
        // monomial exponent bookkeeping
        assert_eq!(pair.monomial(3, 2), pair.monomial(10, 9).scale(&CycScalar::zeta_pow(7, 0)));
    }
}
