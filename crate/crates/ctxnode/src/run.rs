//! Hindcast, baseline and sweep drivers over a prepared configuration.

use std::thread;

use ctxnode_core::mpc::Decision;
use ctxnode_core::sim::{self, TraceRecord, TraceSummary};

use crate::config::{Prepared, RunConfig};
use crate::error::{Error, Result};

/// Receding-horizon hindcast.
pub fn simulate(p: &Prepared) -> Result<Vec<TraceRecord>> {
    sim::run_hindcast(&p.dataset, &p.model, &p.mpc, p.z_initial, &p.sim).map_err(Error::model("simulate"))
}

/// Fixed-frequency baseline.
pub fn baseline(p: &Prepared, f_s: f64, f_t: f64) -> Result<Vec<TraceRecord>> {
    if !(f_s.is_finite() && f_t.is_finite() && f_t >= 0.0) {
        return Err(Error::Usage(format!("baseline frequencies must be finite and nonnegative, got ({f_s}, {f_t})")));
    }
    if f_s < f_t {
        return Err(Error::Usage(format!("baseline needs f_s >= f_t, got f_s = {f_s} < f_t = {f_t}")));
    }
    sim::run_static_baseline(&p.dataset, Decision::new(f_s, f_t), &p.model, p.mpc.weights, p.z_initial, &p.sim)
        .map_err(Error::model("baseline"))
}

/// One hindcast per value of `key`, run in parallel, in input order.
pub fn sweep(config: &RunConfig, key: &str, values: &[f64]) -> Result<Vec<TraceSummary>> {
    if values.is_empty() {
        return Err(Error::Usage("sweep needs at least one value".into()));
    }
    let prepared = values
        .iter()
        .map(|&v| config.with_param(key, v)?.prepare())
        .collect::<Result<Vec<_>>>()?;
    thread::scope(|s| {
        let handles: Vec<_> = prepared
            .iter()
            .map(|p| s.spawn(move || simulate(p).map(|t| sim::summarize(&t))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_config() -> RunConfig {
        let mut c = RunConfig::default();
        c.dataset.days = 1;
        c.mpc.horizon = 3;
        c.set_initial_soe(0.3);
        c
    }

    #[test]
    fn baseline_rejects_inverted_frequencies() {
        let p = short_config().prepare().unwrap();
        let err = baseline(&p, 10.0, 50.0).unwrap_err().to_string();
        assert!(err.contains("f_s >= f_t"), "{err}");
        assert_eq!(baseline(&p, 50.0, 50.0).unwrap().len(), p.dataset.len() - 1);
    }

    #[test]
    fn sweep_of_one_value_matches_simulate() {
        let c = short_config();
        let s = sweep(&c, "voi.lambda_c", &[1.4]).unwrap();
        let direct = sim::summarize(&simulate(&c.prepare().unwrap()).unwrap());
        assert_eq!(s, vec![direct]);
    }

    #[test]
    fn sweep_rejects_empty_and_unknown() {
        let c = short_config();
        assert!(matches!(sweep(&c, "mpc.w_e", &[]), Err(Error::Usage(_))));
        assert!(matches!(sweep(&c, "mpc.bogus", &[1.0]), Err(Error::Usage(_))));
    }
}
