//! Finite groups: explicit multiplication tables, the Heisenberg group over
//! `Z/p` and the symmetric groups.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Largest prime accepted for the Heisenberg group (order `p³`).
pub const HEISENBERG_MAX_P: u32 = 101;
/// Largest `m` for which `S_m` is materialized.
pub const SYMMETRIC_MAX_M: usize = 7;
const ASSOCIATIVITY_SAMPLES: usize = 200;

#[derive(Debug, Clone)]
enum Law {
    Table {
        mult: Vec<Vec<usize>>,
        inv: Vec<usize>,
        identity: usize,
    },
    /// `(a, b, c)(a', b', c') = (a + a', b + b', c + c' + a b')`, element index `a p² + b p + c`.
    Heisenberg {
        p: usize,
    },
    /// Permutations in lexicographic order; `(g h)(i) = g(h(i))`.
    Symmetric {
        m: usize,
        perms: Vec<Vec<u8>>,
    },
}

#[derive(Debug, Clone)]
pub struct FiniteGroup {
    label: String,
    order: usize,
    law: Law,
}

impl FiniteGroup {
    /// Group from a multiplication table `mult[g][h] = g h`. The identity and
    /// inverses are read off the table; the axioms are checked.
    pub fn from_table(label: impl Into<String>, mult: Vec<Vec<usize>>) -> Result<Self> {
        let order = mult.len();
        if order == 0 || mult.iter().any(|row| row.len() != order || row.iter().any(|&k| k >= order)) {
            return Err(Error::DimensionMismatch("multiplication table must be square with entries in range".into()));
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| mult[e][g] == g && mult[g][e] == g))
            .ok_or_else(|| Error::InvalidParameter("table has no identity".into()))?;
        let inv = (0..order)
            .map(|g| {
                (0..order).find(|&h| mult[g][h] == identity).ok_or_else(|| Error::InvalidParameter(format!("element {g} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        let group = Self { label: label.into(), order, law: Law::Table { mult, inv, identity } };
        group.check_axioms(0)?;
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if group.mul(group.mul(a, b), c) != group.mul(a, group.mul(b, c)) {
                        return Err(Error::InvalidParameter(format!("table is not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(group)
    }

    pub fn cyclic(k: usize) -> Result<Self> {
        Self::from_table(format!("cyclic:{k}"), (0..k).map(|g| (0..k).map(|h| (g + h) % k).collect()).collect())
    }

    pub fn heisenberg(p: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > HEISENBERG_MAX_P {
            return Err(Error::TooLarge { what: "Heisenberg prime", size: p as usize, limit: HEISENBERG_MAX_P as usize });
        }
        let p = p as usize;
        Ok(Self { label: format!("heis:{p}"), order: p * p * p, law: Law::Heisenberg { p } })
    }

    pub fn symmetric(m: usize) -> Result<Self> {
        if m > SYMMETRIC_MAX_M {
            return Err(Error::TooLarge { what: "symmetric group degree", size: m, limit: SYMMETRIC_MAX_M });
        }
        if m < 2 {
            return Err(Error::InvalidParameter(format!("symmetric group needs m >= 2, got {m}")));
        }
        let mut perms = Vec::new();
        let mut cur: Vec<u8> = (0..m as u8).collect();
        loop {
            perms.push(cur.clone());
            if !next_permutation(&mut cur) {
                break;
            }
        }
        Ok(Self { label: format!("sym:{m}"), order: perms.len(), law: Law::Symmetric { m, perms } })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        match &self.law {
            Law::Table { identity, .. } => *identity,
            Law::Heisenberg { .. } | Law::Symmetric { .. } => 0,
        }
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        match &self.law {
            Law::Table { mult, .. } => mult[g][h],
            Law::Heisenberg { p } => {
                let p = *p;
                let (a, b, c) = heis_coords(g, p);
                let (a2, b2, c2) = heis_coords(h, p);
                heis_index((a + a2) % p, (b + b2) % p, (c + c2 + a * b2) % p, p)
            }
            Law::Symmetric { perms, .. } => {
                let (pg, ph) = (&perms[g], &perms[h]);
                let prod: Vec<u8> = ph.iter().map(|&i| pg[i as usize]).collect();
                lehmer_rank(&prod)
            }
        }
    }

    pub fn inv(&self, g: usize) -> usize {
        match &self.law {
            Law::Table { inv, .. } => inv[g],
            Law::Heisenberg { p } => {
                let p = *p;
                let (a, b, c) = heis_coords(g, p);
                heis_index((p - a) % p, (p - b) % p, (a * b % p + p - c) % p, p)
            }
            Law::Symmetric { perms, .. } => {
                let pg = &perms[g];
                let mut inv = vec![0u8; pg.len()];
                for (i, &j) in pg.iter().enumerate() {
                    inv[j as usize] = i as u8;
                }
                lehmer_rank(&inv)
            }
        }
    }

    /// `(a, b, c)` for a Heisenberg group element.
    pub fn heisenberg_coords(&self, g: usize) -> Option<(usize, usize, usize)> {
        match &self.law {
            Law::Heisenberg { p } => Some(heis_coords(g, *p)),
            _ => None,
        }
    }

    pub fn heisenberg_prime(&self) -> Option<usize> {
        match &self.law {
            Law::Heisenberg { p } => Some(*p),
            _ => None,
        }
    }

    /// The permutation of `{0, .., m-1}` for a symmetric group element.
    pub fn permutation(&self, g: usize) -> Option<&[u8]> {
        match &self.law {
            Law::Symmetric { perms, .. } => Some(&perms[g]),
            _ => None,
        }
    }

    pub fn symmetric_degree(&self) -> Option<usize> {
        match &self.law {
            Law::Symmetric { m, .. } => Some(*m),
            _ => None,
        }
    }

    /// Identity and inverse laws on every element, associativity on sampled triples.
    pub fn check_axioms(&self, seed: u64) -> Result<()> {
        let e = self.identity();
        for g in 0..self.order {
            if self.mul(e, g) != g || self.mul(g, e) != g {
                return Err(Error::HypothesisViolated(format!("identity law fails at {g}")));
            }
            let gi = self.inv(g);
            if self.mul(g, gi) != e || self.mul(gi, g) != e {
                return Err(Error::HypothesisViolated(format!("inverse law fails at {g}")));
            }
        }
        let mut r = rng::seeded(seed);
        for _ in 0..ASSOCIATIVITY_SAMPLES {
            let (a, b, c) = (r.random_range(0..self.order), r.random_range(0..self.order), r.random_range(0..self.order));
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(Error::HypothesisViolated(format!("associativity fails at ({a}, {b}, {c})")));
            }
        }
        Ok(())
    }
}

fn heis_coords(g: usize, p: usize) -> (usize, usize, usize) {
    (g / (p * p), (g / p) % p, g % p)
}

fn heis_index(a: usize, b: usize, c: usize, p: usize) -> usize {
    a * p * p + b * p + c
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Rank of a permutation in lexicographic order.
fn lehmer_rank(perm: &[u8]) -> usize {
    let m = perm.len();
    let mut rank = 0;
    for i in 0..m {
        let smaller = perm[i + 1..].iter().filter(|&&q| q < perm[i]).count();
        rank = rank * (m - i) + smaller;
    }
    rank
}

fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(is_prime(67) && is_prime(3) && !is_prime(9) && !is_prime(1));
        assert_eq!(FiniteGroup::heisenberg(9).unwrap_err(), Error::NotPrime(9));
        assert_eq!(FiniteGroup::heisenberg(2).unwrap_err(), Error::NotPrime(2));
    }

    #[test]
    fn heisenberg_axioms_and_table_agreement() {
        let g = FiniteGroup::heisenberg(3).unwrap();
        assert_eq!(g.order(), 27);
        g.check_axioms(1).unwrap();
        let table: Vec<Vec<usize>> = (0..27).map(|a| (0..27).map(|b| g.mul(a, b)).collect()).collect();
        let t = FiniteGroup::from_table("heis3-table", table).unwrap();
        assert!((0..27).all(|x| t.inv(x) == g.inv(x)));
        FiniteGroup::heisenberg(67).unwrap().check_axioms(2).unwrap();
    }

    #[test]
    fn symmetric_groups() {
        let s4 = FiniteGroup::symmetric(4).unwrap();
        assert_eq!(s4.order(), 24);
        s4.check_axioms(0).unwrap();
        assert_eq!(s4.permutation(0).unwrap(), &[0, 1, 2, 3]);
        for (i, p) in (0..24).map(|i| (i, s4.permutation(i).unwrap())) {
            assert_eq!(lehmer_rank(p), i);
        }
        let table: Vec<Vec<usize>> = (0..24).map(|a| (0..24).map(|b| s4.mul(a, b)).collect()).collect();
        FiniteGroup::from_table("s4", table).unwrap();
        assert!(FiniteGroup::symmetric(8).is_err());
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(FiniteGroup::from_table("x", vec![vec![0, 0], vec![0, 1]]).is_err());
        FiniteGroup::cyclic(6).unwrap();
    }
}
