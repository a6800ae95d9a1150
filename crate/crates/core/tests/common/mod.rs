#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use zk_virial::grid::GridFunction;
use zk_virial::{verify_pipeline, Pipeline, RadialGrid, VerifyConfig};

/// Default-config pipeline for `p`, computed once per test binary.
pub fn pipeline(p: f64) -> &'static Pipeline {
    static CACHE: OnceLock<Mutex<BTreeMap<u64, &'static Pipeline>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let key = p.to_bits();
    if let Some(pipe) = cache.lock().unwrap().get(&key) {
        return pipe;
    }
    let pipe: &'static Pipeline = Box::leak(Box::new(
        verify_pipeline(p, &VerifyConfig::default()).unwrap_or_else(|e| panic!("p = {p}: {e}")),
    ));
    cache.lock().unwrap().insert(key, pipe);
    pipe
}

/// `r e^{−((r−c)/w)²}`: smooth, vanishes at the origin like `r` and is negligible at `r_max`.
pub fn bump(grid: &std::sync::Arc<RadialGrid>, c: f64, w: f64) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |r| r * (-((r - c) / w).powi(2)).exp()).unwrap()
}

pub fn rel_close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}
