//! Quadratic Goldreich–Levin and its applications: Reed–Muller
//! self-correction, the polynomial inverse theorem for U³, and a greedy
//! quadratic decomposition.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::funcspace::{
    correlation_estimate, correlation_estimates_par, sign, uniform_point, wht_unnormalized, EstimatorConfig,
    QueryFn, C64,
};
use crate::learner::{list_decode, LearnerParams};
use crate::stabilizer::{expand_to_quadratics, Quadratic};

/// Parameters of [`qgl_main_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QglConfig {
    pub eps: f64,
    pub delta: f64,
    /// Learner knobs; τ = ε and γ = ½ + ε² unless overridden.
    pub learner: LearnerParams,
    /// Final estimation uses m = ⌈corr_const·ln(6|L′|/δ)/ε²⌉ shared points.
    pub corr_const: f64,
    /// Estimate ‖f‖₂² first and use it as the learner's energy.
    pub calibrate_energy: bool,
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("eps = {eps} outside (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(())
}

impl QglConfig {
    /// Practical learner constants with τ = ε, γ = ½ + ε².
    pub fn practical(eps: f64, delta: f64) -> Result<Self> {
        check_eps_delta(eps, delta)?;
        Ok(Self {
            eps,
            delta,
            learner: LearnerParams::practical(eps, (0.5 + eps * eps).min(1.0), delta)?,
            corr_const: 32.0,
            calibrate_energy: true,
        })
    }

    /// Constants of the analysis, derived at min(ε, 1/100).
    pub fn theoretical(eps: f64, delta: f64) -> Result<Self> {
        check_eps_delta(eps, delta)?;
        let e = eps.min(0.01);
        Ok(Self {
            eps,
            delta,
            learner: LearnerParams::theoretical(e, 0.5 + e * e, delta)?,
            corr_const: 32.0,
            calibrate_energy: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_eps_delta(self.eps, self.delta)?;
        if !(self.corr_const > 0.0) {
            return Err(invalid("corr_const must be positive"));
        }
        self.learner.validate()
    }

    pub fn corr_samples(&self, candidates: usize) -> u64 {
        (self.corr_const * (6.0 * candidates.max(1) as f64 / self.delta).ln() / (self.eps * self.eps)).ceil() as u64
    }
}

/// Result of one run of the quadratic Goldreich–Levin algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct QglReport {
    pub chosen: Quadratic,
    pub est_correlation: C64,
    /// Stabilizer states returned by list-decoding.
    pub list_size: usize,
    /// States left after the codimension cut.
    pub kept_states: usize,
    /// Quadratics compared in the final step.
    pub candidates: usize,
    pub rounds: usize,
    /// Energy the learner's thresholds were calibrated against.
    pub energy: f64,
    pub queries_used: u64,
    pub seed: Option<u64>,
    pub params: QglConfig,
}

pub fn qgl_main<R: Rng + ?Sized>(f: &QueryFn, eps: f64, delta: f64, rng: &mut R) -> Result<QglReport> {
    qgl_main_with(f, &QglConfig::practical(eps, delta)?, rng)
}

/// [`qgl_main_with`] driven by a ChaCha stream seeded with `seed`.
pub fn qgl_main_seeded(f: &QueryFn, cfg: &QglConfig, seed: u64) -> Result<QglReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = qgl_main_with(f, cfg, &mut rng)?;
    report.seed = Some(seed);
    Ok(report)
}

/// List-decode stabilizer states, drop those whose support has codimension
/// above 2·log₂(1/τ), expand the rest to classical quadratics, and return the
/// one with the largest estimated |⟨f, (−1)^q⟩|. With no state left, the only
/// candidate is the zero polynomial.
pub fn qgl_main_with<R: Rng + ?Sized>(f: &QueryFn, cfg: &QglConfig, rng: &mut R) -> Result<QglReport> {
    cfg.validate()?;
    if f.bound() > 1.0 + 1e-9 {
        return Err(invalid(format!("bound {} exceeds 1", f.bound())));
    }
    let n = f.dim();
    let q0 = f.queries();
    let mut learner = cfg.learner;
    if cfg.calibrate_energy {
        let tau2 = learner.tau * learner.tau;
        let acc = learner.spec_norm_acc.min(tau2 / 2.0);
        let e = learner.estimators.norm2sq_estimate(f, acc, cfg.delta / 4.0, rng)?;
        learner.energy = e.clamp(tau2, 1.0);
    }
    let list = list_decode(f, &learner, rng)?;
    let cap = cfg.learner.codim_cap();
    let kept: Vec<_> = list
        .states
        .iter()
        .filter(|s| (n - s.support_dim()) as f64 <= cap + 1e-9)
        .collect();
    let mut candidates = Vec::new();
    for s in &kept {
        candidates.extend(expand_to_quadratics(s)?);
    }
    candidates.sort();
    candidates.dedup();
    if candidates.is_empty() {
        candidates.push(Quadratic::zero(n));
    }
    let m = cfg.corr_samples(candidates.len());
    let est = if cfg.learner.estimators.dense_fallback && m >= 1u64 << n {
        exact_correlations(f, &candidates)
    } else {
        correlation_estimates_par(f, &candidates, m, cfg.learner.threads, rng)?
    };
    let best = (0..candidates.len())
        .max_by(|&i, &j| est[i].norm().total_cmp(&est[j].norm()).then(j.cmp(&i)))
        .expect("nonempty");
    Ok(QglReport {
        chosen: candidates[best].clone(),
        est_correlation: est[best],
        list_size: list.states.len(),
        kept_states: kept.len(),
        candidates: candidates.len(),
        rounds: list.rounds,
        energy: learner.energy,
        queries_used: f.queries() - q0,
        seed: None,
        params: *cfg,
    })
}

/// ⟨f, (−1)^q⟩ for every q from one read of the table, one transform per
/// distinct quadratic part.
fn exact_correlations(f: &QueryFn, qs: &[Quadratic]) -> Vec<C64> {
    let t = f.table();
    let n = f.dim();
    let size = 1usize << n;
    let mut spectra: BTreeMap<&[u32], Vec<C64>> = BTreeMap::new();
    qs.iter()
        .map(|q| {
            let h = spectra.entry(q.upper()).or_insert_with(|| {
                let part = Quadratic::new(n, q.upper().to_vec(), 0, false).expect("valid rows");
                let mut v: Vec<C64> = (0..size as u32).map(|x| t.get(x) * sign(part.eval_word(x))).collect();
                wht_unnormalized(&mut v);
                v
            });
            h[q.lin() as usize] * sign(q.constant()) / size as f64
        })
        .collect()
}

/// Outcome of [`rm_self_correct`].
#[derive(Clone, Debug, PartialEq)]
pub struct RmOutcome {
    pub quadratic: Quadratic,
    /// Estimated E (−1)^{fb(x) + p(x)} before any negation.
    pub sign_estimate: f64,
    pub negated: bool,
    pub report: QglReport,
}

/// Nearest quadratic to a Boolean function, given as its ±1 form (−1)^{fb}.
pub fn rm_self_correct<R: Rng + ?Sized>(g: &QueryFn, eps: f64, rng: &mut R) -> Result<RmOutcome> {
    check_eps_delta(eps, 0.5)?;
    rm_self_correct_with(g, eps, &QglConfig::practical(eps / 4.0, 1.0 / 6.0)?, rng)
}

/// Runs the given configuration (normally ε/4, δ = 1/6), then fixes the
/// constant term by the sign of ⌈512/ε²⌉ sampled correlations.
pub fn rm_self_correct_with<R: Rng + ?Sized>(
    g: &QueryFn,
    eps: f64,
    cfg: &QglConfig,
    rng: &mut R,
) -> Result<RmOutcome> {
    check_eps_delta(eps, 0.5)?;
    let q0 = g.queries();
    let mut report = qgl_main_with(g, cfg, rng)?;
    let p = report.chosen.clone();
    let m = (512.0 / (eps * eps)).ceil() as u64;
    let sign_estimate = correlation_estimate(g, &p, m, rng)?.re;
    let negated = sign_estimate < 0.0;
    report.queries_used = g.queries() - q0;
    Ok(RmOutcome {
        quadratic: if negated { p.negated() } else { p },
        sign_estimate,
        negated,
        report,
    })
}

/// ε = γ^c/2^{c+1} for the polynomial inverse theorem with exponent c.
pub fn pgi_eps(gamma: f64, c_exp: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("gamma = {gamma} outside (0, 1]")));
    }
    if !(c_exp > 1.0) {
        return Err(invalid(format!("c_exp = {c_exp} must exceed 1")));
    }
    Ok(gamma.powf(c_exp) / 2f64.powf(c_exp + 1.0))
}

/// A quadratic correlating with f whenever ‖f‖_{U³} ≥ γ; absent when
/// list-decoding returned nothing.
pub fn pgi<R: Rng + ?Sized>(f: &QueryFn, gamma: f64, c_exp: f64, rng: &mut R) -> Result<Option<Quadratic>> {
    let report = qgl_main_with(f, &QglConfig::practical(pgi_eps(gamma, c_exp)?, 1.0 / 3.0)?, rng)?;
    Ok((report.list_size > 0).then_some(report.chosen))
}

/// Per-round success floor of decompose's inner runs. Residuals are often
/// mixes whose best phase is reachable only after a rare projection.
pub const DECOMPOSE_P_HAT: f64 = 0.005;

/// Parameters of [`decompose_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecomposeConfig {
    pub eps: f64,
    pub delta: f64,
    /// Configuration of each inner run; its ε is the correlation target ρ.
    pub qgl: QglConfig,
    pub estimators: EstimatorConfig,
}

impl DecomposeConfig {
    /// ρ = ε/(2B) with B = 1/(2ε), δ = 1/6, and inner runs with success
    /// floor [`DECOMPOSE_P_HAT`].
    pub fn practical(eps: f64) -> Result<Self> {
        check_eps_delta(eps, 0.5)?;
        let delta = 1.0 / 6.0;
        let rho = eps / (2.0 * Self::scale_of(eps));
        let mut qgl = QglConfig::practical(rho, delta)?;
        qgl.learner.p_hat = DECOMPOSE_P_HAT;
        Ok(Self {
            eps,
            delta,
            qgl,
            estimators: qgl.learner.estimators,
        })
    }

    fn scale_of(eps: f64) -> f64 {
        (1.0 / (2.0 * eps)).max(1.0)
    }

    /// B = 1/(2ε), at least 1.
    pub fn scale(&self) -> f64 {
        Self::scale_of(self.eps)
    }

    /// ⌈4/ρ²⌉.
    pub fn term_cap(&self) -> usize {
        (4.0 / (self.qgl.eps * self.qgl.eps)).ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The residual's estimated U³ norm fell below the threshold.
    Uniform,
    TermCap,
    /// The inner run found nothing above the acceptance floor.
    NoProgress,
}

/// f = Σ c_i(−1)^{p_i} + residual, with the residual defined by subtraction.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub terms: Vec<(C64, Quadratic)>,
    /// Final estimate of ‖residual‖_{U³}⁸.
    pub residual_u3_pow8_estimate: f64,
    /// Its eighth root.
    pub residual_u3_estimate: f64,
    /// Estimate of E|residual|.
    pub residual_l1_estimate: f64,
    /// The ‖residual‖_{U³}⁸ estimate before each step.
    pub u3_pow8_trace: Vec<f64>,
    pub stop: StopReason,
    pub queries_used: u64,
}

impl Decomposition {
    /// x ↦ Σ c_i(−1)^{p_i(x)}.
    pub fn structured_value(&self, x: u32) -> C64 {
        self.terms.iter().map(|(c, p)| c * sign(p.eval_word(x))).sum()
    }
}

/// Inner searches per step before the loop gives up.
const DECOMPOSE_ATTEMPTS: usize = 3;

pub fn decompose<R: Rng + ?Sized>(f: &QueryFn, eps: f64, rng: &mut R) -> Result<Decomposition> {
    decompose_with(f, &DecomposeConfig::practical(eps)?, rng)
}

/// Greedy energy increment: while the residual's U³ norm looks large, find a
/// correlating quadratic phase on the rescaled residual and subtract its
/// estimated projection.
///
/// A term is accepted only if |c| ≥ s·ρ, four times the estimation error,
/// which makes each accepted step lower ‖residual‖₂² by at least |c|²/2.
pub fn decompose_with<R: Rng + ?Sized>(f: &QueryFn, cfg: &DecomposeConfig, rng: &mut R) -> Result<Decomposition> {
    check_eps_delta(cfg.eps, cfg.delta)?;
    cfg.qgl.validate()?;
    let q0 = f.queries();
    let eps = cfg.eps;
    let acc = eps.powi(8) / 2.0;
    let threshold = (eps / 2.0).powi(8) + acc;
    let rho = cfg.qgl.eps;
    let mut terms: Vec<(C64, Quadratic)> = Vec::new();
    let mut trace = Vec::new();
    let mut g = f.clone();
    let stop = loop {
        let u8 = cfg.estimators.u3norm8_estimate(&g, acc, cfg.delta, rng)?;
        trace.push(u8);
        if u8 <= threshold {
            break StopReason::Uniform;
        }
        if terms.len() >= cfg.term_cap() {
            break StopReason::TermCap;
        }
        let s = cfg.scale().max(g.bound());
        let h = g.scale(1.0 / s);
        let mut found = None;
        for _ in 0..DECOMPOSE_ATTEMPTS {
            let report = qgl_main_with(&h, &cfg.qgl, rng)?;
            let c = report.est_correlation * s;
            if report.list_size > 0 && c.norm() >= s * rho {
                found = Some((c, report));
                break;
            }
        }
        let Some((c, report)) = found else {
            break StopReason::NoProgress;
        };
        let p = report.chosen.clone();
        let q = p.clone();
        g = g.map(g.bound() + c.norm(), move |x, v| v - c * sign(q.eval_word(x)));
        terms.push((c, p));
    };
    let l1 = mean_abs_estimate(&g, eps / 4.0, cfg.delta, &cfg.estimators, rng)?;
    let last = *trace.last().expect("at least one estimate");
    Ok(Decomposition {
        terms,
        residual_u3_pow8_estimate: last,
        residual_u3_estimate: last.max(0.0).powf(0.125),
        residual_l1_estimate: l1,
        u3_pow8_trace: trace,
        stop,
        queries_used: f.queries() - q0,
    })
}

/// E|g| to accuracy `acc` with probability 1 − δ (Hoeffding), exact when
/// reading the table is no more expensive.
fn mean_abs_estimate<R: Rng + ?Sized>(
    g: &QueryFn,
    acc: f64,
    delta: f64,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Result<f64> {
    let n = g.dim();
    let b = g.bound().max(1e-12);
    let m = (b * b * (2.0 / delta).ln() / (2.0 * acc * acc)).ceil() as u64;
    if cfg.dense_fallback && m >= 1u64 << n {
        let t = g.table();
        return Ok(t.values().iter().map(|v| v.norm()).sum::<f64>() / (1u64 << n) as f64);
    }
    Ok((0..m).map(|_| g.eval(uniform_point(rng, n)).norm()).sum::<f64>() / m as f64)
}
