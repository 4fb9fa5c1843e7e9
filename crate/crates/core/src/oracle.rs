//! Exhaustive reference computations for small n. Every routine refuses
//! dimensions above its budget instead of running for hours.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::f2core::{basis_is_isotropic, Basis, BitVec, SympVec};
use crate::funcspace::{i_pow, wht_unnormalized, TableFn, C64};
use crate::sampling::{char_dist, conv_dist, DistTable};
use crate::stabilizer::{Quadratic, StabilizerState};

/// Largest n each routine accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub u3_exact: usize,
    pub gowers_u3_exact: usize,
    pub stabilizers: usize,
    pub dist_tables: usize,
}

pub const ORACLE_BUDGET: OracleBudget = OracleBudget {
    u3_exact: 6,
    gowers_u3_exact: 5,
    stabilizers: 3,
    dist_tables: 6,
};

fn check(routine: &'static str, max: usize, n: usize) -> Result<()> {
    if n > max {
        return Err(Error::BudgetExceeded { routine, max, n });
    }
    Ok(())
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// max_q |E f(x)(−1)^{q(x)}| over quadratics without constant term, with an
/// argmax. Quadratic parts are visited in Gray-code order, each step flipping
/// the sign of the points where one monomial is 1; a transform then covers
/// every linear part at once. Ties go to the lexicographically smallest
/// (upper rows, linear part).
pub fn u3_exact(t: &TableFn) -> Result<(f64, Quadratic)> {
    let n = t.dim();
    check("u3_exact", ORACLE_BUDGET.u3_exact, n)?;
    let size = 1usize << n;
    let monomials = pairs(n);
    let mut g: Vec<C64> = t.values().to_vec();
    let mut upper = vec![0u32; n];
    let mut best = (f64::NEG_INFINITY, Quadratic::zero(n));
    let mut buf = vec![C64::new(0.0, 0.0); size];
    for step in 0u64..1 << monomials.len() {
        if step > 0 {
            let (i, j) = monomials[step.trailing_zeros() as usize];
            upper[i] ^= 1 << j;
            let both = (1u32 << i) | (1 << j);
            for (x, v) in g.iter_mut().enumerate() {
                if x as u32 & both == both {
                    *v = -*v;
                }
            }
        }
        buf.copy_from_slice(&g);
        wht_unnormalized(&mut buf);
        for (lin, c) in buf.iter().enumerate() {
            let value = c.norm() / size as f64;
            let better = value > best.0 + 1e-12
                || (value > best.0 - 1e-12 && (upper.as_slice(), lin as u32) < (best.1.upper(), best.1.lin()));
            if better {
                best = (value, Quadratic::new(n, upper.clone(), lin as u32, false)?);
            }
        }
    }
    Ok((best.0.max(0.0), best.1))
}

/// ‖f‖_{U³} from the defining average over (x, a, b, c).
pub fn gowers_u3_exact(t: &TableFn) -> Result<f64> {
    let n = t.dim();
    check("gowers_u3_exact", ORACLE_BUDGET.gowers_u3_exact, n)?;
    let size = 1u32 << n;
    let f = |x: u32| t.get(x);
    let mut acc = C64::new(0.0, 0.0);
    for x in 0..size {
        for a in 0..size {
            let p1 = f(x) * f(x ^ a).conj();
            for b in 0..size {
                let p2 = p1 * f(x ^ b).conj() * f(x ^ a ^ b);
                for c in 0..size {
                    acc += p2
                        * f(x ^ c).conj()
                        * f(x ^ a ^ c)
                        * f(x ^ b ^ c)
                        * f(x ^ a ^ b ^ c).conj();
                }
            }
        }
    }
    let mean = acc / (size as f64).powi(4);
    if mean.im.abs() > 1e-10 * mean.norm().max(1.0) || mean.re < -1e-10 {
        return Err(Error::Internal(format!("U3 average {mean} is not a nonnegative real")));
    }
    Ok(mean.re.max(0.0).powf(0.125))
}

/// {(a,b) : |Δ_af^(b)|² ≥ 0.7‖f‖₂⁴}, empty for f ≡ 0.
pub fn spec_exact(t: &TableFn) -> Result<BTreeSet<SympVec>> {
    let n = t.dim();
    check("spec_exact", ORACLE_BUDGET.u3_exact, n)?;
    let size = 1usize << n;
    let norm2 = t.norm2sq();
    let mut out = BTreeSet::new();
    if norm2 == 0.0 {
        return Ok(out);
    }
    let threshold = 0.7 * norm2 * norm2;
    for a in 0..size as u32 {
        let mut d = t.derivative(a).into_values();
        wht_unnormalized(&mut d);
        for (b, c) in d.iter().enumerate() {
            if (c / size as f64).norm_sqr() >= threshold - 1e-12 {
                out.insert(SympVec::new(BitVec::truncated(a, n), BitVec::truncated(b as u32, n))?);
            }
        }
    }
    let basis = Basis::from_words(2 * n, out.iter().map(|p| p.pack()));
    if !basis_is_isotropic(&basis) {
        return Err(Error::Internal("exact spectral set is not isotropic".into()));
    }
    Ok(out)
}

/// The characteristic and convolved distributions P_f and Q_f.
pub fn distribution_tables(t: &TableFn) -> Result<(DistTable, DistTable)> {
    check("distribution_tables", ORACLE_BUDGET.dist_tables, t.dim())?;
    let p = char_dist(t)?;
    let q = conv_dist(&p);
    Ok((p, q))
}

/// Table rounded to a grid after rotating the first nonzero value onto the
/// positive real axis, so that states equal up to phase get equal keys.
fn phase_key(t: &TableFn) -> Vec<(i64, i64)> {
    let first = t.values().iter().find(|v| v.norm() > 1e-9).copied();
    let rot = first.map_or(C64::new(1.0, 0.0), |v| v.conj() / v.norm());
    t.values()
        .iter()
        .map(|v| {
            let w = v * rot;
            ((w.re * 1e8).round() as i64, (w.im * 1e8).round() as i64)
        })
        .collect()
}

fn all_subspaces(n: usize) -> Vec<Basis> {
    let nonzero: Vec<u64> = (1..1u64 << n).collect();
    let mut seen = BTreeSet::new();
    let mut out = vec![Basis::empty(n)];
    seen.insert(Vec::new());
    for subset in 1u64..1 << nonzero.len() {
        if subset.count_ones() as usize > n {
            continue;
        }
        let b = Basis::from_words(n, nonzero.iter().enumerate().filter(|(k, _)| subset >> k & 1 == 1).map(|(_, &w)| w));
        if seen.insert(b.rows().to_vec()) {
            out.push(b);
        }
    }
    out
}

/// Every stabilizer state up to global phase, each parametrization
/// deduplicated by its full table.
pub fn enumerate_stabilizers(n: usize) -> Result<Vec<StabilizerState>> {
    check("enumerate_stabilizers", ORACLE_BUDGET.stabilizers, n)?;
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut keys = HashSet::new();
    let mut out = Vec::new();
    let monomials = pairs(n);
    for v in all_subspaces(n) {
        let mut cosets = BTreeSet::new();
        for u in 0..1u32 << n {
            cosets.insert(v.reduce(u as u64) as u32);
        }
        for &u in &cosets {
            for qmask in 0u64..1 << monomials.len() {
                let mut upper = vec![0u32; n];
                for (k, &(i, j)) in monomials.iter().enumerate() {
                    if qmask >> k & 1 == 1 {
                        upper[i] |= 1 << j;
                    }
                }
                for lin in 0..1u32 << n {
                    for diag in 0..1u32 << n {
                        let s = StabilizerState::new(
                            n,
                            v.clone(),
                            BitVec::truncated(u, n),
                            upper.clone(),
                            BitVec::truncated(lin, n),
                            BitVec::truncated(diag, n),
                        )?;
                        if keys.insert(phase_key(&s.table())) {
                            out.push(s);
                        }
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Tables of (φ + iˡW_{c,d}φ)/√2 over ℓ ∈ {0,1,2,3} and (c,d) outside 𝓛(φ),
/// deduplicated up to phase.
pub fn neighbor_tables(phi: &StabilizerState) -> Result<Vec<TableFn>> {
    let n = phi.dim();
    check("neighbor_tables", ORACLE_BUDGET.stabilizers, n)?;
    let lagr = phi.lagrangian();
    let t = phi.table();
    let mut keys = HashSet::new();
    let mut out = Vec::new();
    for w in 0..1u64 << (2 * n) {
        if lagr.contains_word(w) {
            continue;
        }
        let p = SympVec::unpack(w, n);
        let moved = t.weyl(p.a.bits(), p.b.bits());
        for l in 0..4 {
            let ph = i_pow(l);
            let nb = t.map(|x, v| (v + ph * moved.get(x)) / 2f64.sqrt());
            let overlap = t.inner(&nb).norm_sqr();
            if (overlap - 0.5).abs() > 1e-9 {
                return Err(Error::Internal(format!("neighbor overlap {overlap} differs from 1/2")));
            }
            if keys.insert(phase_key(&nb)) {
                out.push(nb);
            }
        }
    }
    Ok(out)
}

/// |⟨f,φ⟩|² ≥ γ·|⟨f,φ′⟩|² for every neighbor φ′ of φ.
pub fn local_max_check(t: &TableFn, phi: &StabilizerState, gamma: f64) -> Result<bool> {
    if t.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: t.dim(),
            right: phi.dim(),
        });
    }
    let own = t.inner(&phi.table()).norm_sqr();
    let best = neighbor_tables(phi)?
        .iter()
        .map(|nb| t.inner(nb).norm_sqr())
        .fold(0.0, f64::max);
    Ok(own >= gamma * best - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2core::is_lagrangian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(n: usize, r: &mut ChaCha8Rng) -> TableFn {
        TableFn::from_fn(n, |_| C64::from_polar(r.gen_range(0.0..1.0), r.gen_range(0.0..std::f64::consts::TAU)))
    }

    /// Plain loop over every quadratic including the constant.
    fn naive_u3(t: &TableFn) -> f64 {
        let n = t.dim();
        let mon = pairs(n);
        let mut best = 0.0f64;
        for qm in 0u64..1 << mon.len() {
            let mut upper = vec![0u32; n];
            for (k, &(i, j)) in mon.iter().enumerate() {
                if qm >> k & 1 == 1 {
                    upper[i] |= 1 << j;
                }
            }
            for lin in 0..1u32 << n {
                for constant in [false, true] {
                    let q = Quadratic::new(n, upper.clone(), lin, constant).unwrap();
                    best = best.max(t.inner(&TableFn::from_quadratic(&q)).norm());
                }
            }
        }
        best
    }

    #[test]
    fn u3_of_a_quadratic_phase_and_of_zero() {
        let q = Quadratic::new(3, vec![0b010, 0, 0], 0b100, false).unwrap();
        let (v, arg) = u3_exact(&TableFn::from_quadratic(&q)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(arg, q);
        let (v, arg) = u3_exact(&TableFn::zero(4)).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(arg, Quadratic::zero(4));
    }

    #[test]
    fn u3_matches_naive_enumeration() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            for _ in 0..4 {
                let t = random_table(n, &mut r);
                let (v, arg) = u3_exact(&t).unwrap();
                assert!((v - naive_u3(&t)).abs() < 1e-10);
                assert!((t.inner(&TableFn::from_quadratic(&arg)).norm() - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn budgets_are_enforced() {
        assert!(matches!(u3_exact(&TableFn::zero(7)), Err(Error::BudgetExceeded { max: 6, .. })));
        assert!(matches!(gowers_u3_exact(&TableFn::zero(6)), Err(Error::BudgetExceeded { max: 5, .. })));
        assert!(matches!(spec_exact(&TableFn::zero(7)), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(enumerate_stabilizers(4), Err(Error::BudgetExceeded { max: 3, .. })));
        assert!(matches!(distribution_tables(&TableFn::zero(7)), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn gowers_norm_examples() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let q = StabilizerState::random(4, &mut r).classical_part();
        assert!((gowers_u3_exact(&TableFn::from_quadratic(&q)).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(gowers_u3_exact(&TableFn::zero(3)).unwrap(), 0.0);
        for _ in 0..100 {
            let n = r.gen_range(1..=3);
            let t = random_table(n, &mut r);
            let u = gowers_u3_exact(&t).unwrap();
            assert!(u <= t.norm2sq().sqrt() + 1e-12);
            assert!((u.powi(8) - crate::funcspace::u3norm8_of_table(&t)).abs() < 1e-10);
        }
    }

    #[test]
    fn spec_of_phase_constant_and_random() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let phi = StabilizerState::random(3, &mut r);
        let lagr = phi.lagrangian();
        let got = spec_exact(&phi.table()).unwrap();
        let want: BTreeSet<SympVec> = lagr.elements().into_iter().map(|w| SympVec::unpack(w, 3)).collect();
        assert_eq!(got, want);
        let c = spec_exact(&TableFn::from_fn(2, |_| C64::new(0.5, 0.0))).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|p| p.b.is_zero()));
        assert!(spec_exact(&TableFn::zero(2)).unwrap().is_empty());
        for _ in 0..50 {
            spec_exact(&random_table(3, &mut r)).unwrap();
        }
    }

    #[test]
    fn stabilizer_counts_and_geometry() {
        let counts: Vec<usize> = (1..=3).map(|n| enumerate_stabilizers(n).unwrap().len()).collect();
        assert_eq!(counts, vec![6, 60, 1080]);
        for n in 1..=2 {
            for s in enumerate_stabilizers(n).unwrap() {
                assert!((s.table().norm2sq() - 1.0).abs() < 1e-12);
                assert!(is_lagrangian(&s.lagrangian()));
            }
        }
    }

    #[test]
    fn local_max_examples() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let phi = StabilizerState::random(2, &mut r);
            let t = phi.table();
            assert!(local_max_check(&t, &phi, 1.0).unwrap());
            let nb = neighbor_tables(&phi).unwrap();
            assert!(!local_max_check(&nb[0], &phi, 0.99).unwrap());
        }
    }
}
