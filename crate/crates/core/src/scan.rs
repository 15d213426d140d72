//! Bound scan over the number of blocks `p` for a fixed `n`.

use serde::Serialize;

use crate::bell::bell_values;
use crate::error::Result;
use crate::exec::Execution;
use crate::matrix::{check_site_count, product_expectation};
use crate::partition::{max_violation_bound, p_even_sum, Partition};
use crate::states::{block_product_state, saturating_settings};

/// Largest acceptable gap between the achieved and the bound values.
pub const SATURATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub p: usize,
    pub blocks: Vec<Vec<usize>>,
    /// `2^{(n-p)/2}`.
    pub bound: f64,
    /// `|tr ρB|` on the block-product state.
    pub achieved: f64,
    /// `2^{n-p}`.
    pub bound_squared: f64,
    pub partition_bound_value: f64,
    /// `max(|achieved - bound|, |partition_bound_value - bound_squared|)`.
    pub saturation_residual: f64,
    pub saturated: bool,
}

/// One row per `p = 1..=n`, using the partition `{1}, …, {p-1}, {p..n}`, the
/// block-product state with the given phase and the matching saturating settings.
pub fn bound_scan(n: usize, phase: f64, exec: Execution) -> Result<Vec<ScanRow>> {
    check_site_count(n)?;
    exec.try_map(n, |k| {
        let p = k + 1;
        let partition = Partition::leading_singletons(n, p)?;
        let rho = block_product_state(&partition, phase)?;
        let config = saturating_settings(&partition, phase)?;
        let (value, _) = bell_values(product_expectation(&rho, &config.contractions()));
        let bound = max_violation_bound(n, p)?;
        let bound_squared = 2f64.powi((n - p) as i32);
        let pbv = p_even_sum(&rho, &config.commutator_terms(), &partition);
        let achieved = value.abs();
        let residual = (achieved - bound).abs().max((pbv - bound_squared).abs());
        Ok(ScanRow {
            p,
            blocks: partition.block_members(),
            bound,
            achieved,
            bound_squared,
            partition_bound_value: pbv,
            saturation_residual: residual,
            saturated: residual <= SATURATION_TOL,
        })
    })
}
