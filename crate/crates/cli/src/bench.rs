//! Query-scaling sweep over planted quadratic instances.

use anyhow::{ensure, Result};
use qgl_core::funcspace::QueryFn;
use qgl_core::qgl::{qgl_main_seeded, QglConfig};

use crate::instance::{InstanceSpec, Kind};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub eps: f64,
    pub delta: f64,
    pub lambda: f64,
    pub ns: Vec<usize>,
    pub seeds: u64,
    /// Projection cap; the learner's default when absent.
    pub t_max: Option<usize>,
    pub p_hat: f64,
    pub rounds: Option<usize>,
    /// Off by default so the counts reflect the sampling algorithms.
    pub dense_fallback: bool,
    pub threads: usize,
}

impl Default for BenchConfig {
    /// The practical algorithm with p̂ = ½, i.e. five rounds at δ = 1/6.
    fn default() -> Self {
        Self {
            eps: 0.25,
            delta: 1.0 / 6.0,
            lambda: 0.8,
            ns: vec![8, 12, 16, 20],
            seeds: 20,
            t_max: None,
            p_hat: 0.5,
            rounds: None,
            dense_fallback: false,
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub seed: u64,
    pub queries: u64,
    /// The returned quadratic equals the planted one up to its constant.
    pub recovered: bool,
}

impl BenchConfig {
    pub fn qgl_config(&self) -> Result<QglConfig> {
        let mut cfg = QglConfig::practical(self.eps, self.delta)?;
        if let Some(t) = self.t_max {
            cfg.learner.t_max = t;
        }
        cfg.learner.p_hat = self.p_hat;
        cfg.learner.rounds = self.rounds;
        cfg.learner.threads = self.threads;
        cfg.learner.estimators.dense_fallback = self.dense_fallback;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn run_one(&self, n: usize, seed: u64) -> Result<BenchRow> {
        let inst = InstanceSpec { n, kind: Kind::PlantedQuadratic, lambda: self.lambda, eta: 0.0, seed }.generate()?;
        let f = QueryFn::from_table(inst.file.table());
        let rep = qgl_main_seeded(&f, &self.qgl_config()?, seed)?;
        let planted = inst.planted.expect("planted kind");
        Ok(BenchRow { n, seed, queries: rep.queries_used, recovered: rep.chosen.with_constant(false) == planted })
    }

    pub fn run(&self) -> Result<Vec<BenchRow>> {
        ensure!(self.seeds > 0 && !self.ns.is_empty(), "bench needs at least one n and one seed");
        let mut rows = Vec::new();
        for &n in &self.ns {
            for seed in 0..self.seeds {
                rows.push(self.run_one(n, seed)?);
            }
        }
        Ok(rows)
    }
}

/// (n, mean queries) per distinct n, in first-seen order.
pub fn mean_queries(rows: &[BenchRow]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64, u64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|e| e.0 == r.n) {
            Some(e) => {
                e.1 += r.queries as f64;
                e.2 += 1;
            }
            None => out.push((r.n, r.queries as f64, 1)),
        }
    }
    out.into_iter().map(|(n, s, c)| (n, s / c as f64)).collect()
}

/// Least-squares slope of log(mean queries) against log n.
pub fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("n,seed,queries,recovered\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.n, r.seed, r.queries, r.recovered as u8));
    }
    s
}
