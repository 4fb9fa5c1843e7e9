//! Seeded test instances.

use std::path::PathBuf;

use anyhow::{ensure, Result};
use qgl_core::funcspace::{TableFn, C64};
use qgl_core::stabilizer::{Quadratic, StabilizerState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qglf::FunctionFile;

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    /// λ(−1)^q + (1−λ)·(random sign).
    PlantedQuadratic,
    /// A uniformly random quadratic with each bit flipped at rate η.
    NoisyRmCodeword,
    /// λφ/‖φ‖_∞ + (1−λ)·(random unit phase) for a random stabilizer state φ.
    PlantedStabilizer,
    /// ½(−1)^{q₁} + ½(−1)^{q₂}, with q₂ = q₁ + one quadratic monomial.
    TwoPhaseMix,
    /// Independent values with modulus and phase uniform.
    RandomBounded,
    FromFile(PathBuf),
}

impl Kind {
    pub fn parse(name: &str, path: Option<PathBuf>) -> Result<Self> {
        Ok(match name {
            "planted-quadratic" => Self::PlantedQuadratic,
            "noisy-rm-codeword" => Self::NoisyRmCodeword,
            "planted-stabilizer" => Self::PlantedStabilizer,
            "two-phase-mix" => Self::TwoPhaseMix,
            "random-bounded" => Self::RandomBounded,
            "from-file" => Self::FromFile(path.ok_or_else(|| anyhow::anyhow!("from-file needs --in"))?),
            other => anyhow::bail!("unknown instance kind {other:?}"),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub n: usize,
    pub kind: Kind,
    /// Weight of the planted part.
    pub lambda: f64,
    /// Flip rate of the noisy codeword.
    pub eta: f64,
    pub seed: u64,
}

/// A generated function and the structure planted in it, if any.
#[derive(Clone, Debug)]
pub struct Instance {
    pub file: FunctionFile,
    pub planted: Option<Quadratic>,
}

pub fn random_quadratic<R: Rng + ?Sized>(n: usize, r: &mut R) -> Quadratic {
    let upper = (0..n).map(|i| r.gen::<u32>() & (((1u64 << n) - 1) as u32) & !((2u32 << i) - 1)).collect();
    let lin = r.gen::<u32>() & (((1u64 << n) - 1) as u32);
    Quadratic::new(n, upper, lin, false).expect("rows above the diagonal")
}

fn sign(b: bool) -> f64 {
    if b {
        -1.0
    } else {
        1.0
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.kind, Kind::FromFile(_)) {
            ensure!((1..=24).contains(&self.n), "n = {} outside 1..=24", self.n);
        }
        ensure!((0.0..=1.0).contains(&self.lambda), "lambda = {} outside [0, 1]", self.lambda);
        ensure!((0.0..=0.5).contains(&self.eta), "eta = {} outside [0, 1/2]", self.eta);
        if self.kind == Kind::TwoPhaseMix {
            ensure!(self.n >= 2, "two-phase-mix needs n >= 2");
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Instance> {
        self.validate()?;
        let n = self.n;
        let lambda = self.lambda;
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(match &self.kind {
            Kind::PlantedQuadratic => {
                let q = random_quadratic(n, &mut r);
                let t = TableFn::from_fn(n, |x| {
                    C64::new(lambda * sign(q.eval_word(x)) + (1.0 - lambda) * sign(r.gen()), 0.0)
                });
                Instance { file: FunctionFile::Values(t), planted: Some(q) }
            }
            Kind::NoisyRmCodeword => {
                let q = random_quadratic(n, &mut r);
                let bits = (0..1u32 << n).map(|x| q.eval_word(x) ^ (r.gen::<f64>() < self.eta)).collect();
                Instance { file: FunctionFile::Boolean { n, bits }, planted: Some(q) }
            }
            Kind::PlantedStabilizer => {
                let phi = StabilizerState::random(n, &mut r);
                let t = phi.table();
                let s = t.sup_norm();
                let t = t.map(|_, v| {
                    v * (lambda / s) + C64::from_polar(1.0 - lambda, r.gen_range(0.0..std::f64::consts::TAU))
                });
                Instance { file: FunctionFile::Values(t), planted: None }
            }
            Kind::TwoPhaseMix => {
                let q1 = random_quadratic(n, &mut r);
                let i = r.gen_range(0..n - 1);
                let j = r.gen_range(i + 1..n);
                let mut upper = q1.upper().to_vec();
                upper[i] ^= 1 << j;
                let q2 = Quadratic::new(n, upper, q1.lin(), false)?;
                let t = TableFn::from_fn(n, |x| C64::new(0.5 * sign(q1.eval_word(x)) + 0.5 * sign(q2.eval_word(x)), 0.0));
                Instance { file: FunctionFile::Values(t), planted: Some(q1) }
            }
            Kind::RandomBounded => {
                let t = TableFn::from_fn(n, |_| {
                    C64::from_polar(r.gen_range(0.0..1.0), r.gen_range(0.0..std::f64::consts::TAU))
                });
                Instance { file: FunctionFile::Values(t), planted: None }
            }
            Kind::FromFile(path) => Instance { file: FunctionFile::load(path)?, planted: None },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: Kind) -> InstanceSpec {
        InstanceSpec { n: 6, kind, lambda: 0.7, eta: 0.1, seed: 9 }
    }

    #[test]
    fn generation_is_deterministic_and_bounded() {
        for kind in [
            Kind::PlantedQuadratic,
            Kind::NoisyRmCodeword,
            Kind::PlantedStabilizer,
            Kind::TwoPhaseMix,
            Kind::RandomBounded,
        ] {
            let a = spec(kind.clone()).generate().unwrap();
            let b = spec(kind).generate().unwrap();
            assert_eq!(a.file, b.file);
            assert!(a.file.table().sup_norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn planted_quadratic_correlation_is_lambda_on_average() {
        let s = InstanceSpec { n: 12, ..spec(Kind::PlantedQuadratic) };
        let inst = s.generate().unwrap();
        let q = inst.planted.unwrap();
        let c = inst.file.table().inner(&TableFn::from_quadratic(&q)).re;
        assert!((c - 0.7).abs() < 0.03, "{c}");
    }

    #[test]
    fn random_quadratics_have_no_stray_bits() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=8 {
            let q = random_quadratic(n, &mut r);
            for (i, row) in q.upper().iter().enumerate() {
                assert_eq!(row & ((2u32 << i) - 1), 0);
                assert_eq!(row >> n, 0);
            }
        }
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        assert!(InstanceSpec { lambda: 1.5, ..spec(Kind::PlantedQuadratic) }.generate().is_err());
        assert!(InstanceSpec { eta: 0.7, ..spec(Kind::NoisyRmCodeword) }.generate().is_err());
        assert!(InstanceSpec { n: 0, ..spec(Kind::RandomBounded) }.generate().is_err());
        assert!(Kind::parse("from-file", None).is_err());
        assert!(Kind::parse("bogus", None).is_err());
    }
}
