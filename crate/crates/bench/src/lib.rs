//! Shared fixtures for the criterion benchmarks: deterministic simulated
//! panels of a few representative sizes.

use twoway_core::montecarlo::{simulate, Design, DgpConfig, SeedStream};
use twoway_core::BalancedPanel;

/// A dependence-design panel of the given dimensions, fixed seed.
pub fn panel(n: usize, t: usize, rho: f64) -> BalancedPanel {
    let cfg = DgpConfig {
        design: Design::Baseline,
        n_units: n,
        n_periods: t,
        rho,
        weights: DgpConfig::dependence_weights(Design::Baseline),
        beta0: 1.0,
        beta1: 1.0,
        seed: 42,
    };
    simulate(&cfg, &SeedStream::new(cfg.seed).child(0)).expect("valid config")
}
