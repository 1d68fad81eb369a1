use crate::error::{Error, Result};
use crate::mesh::Counts;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplineDimensions {
    /// `2E0 - E + 3V0 + sigma + K` before clamping.
    pub raw: i64,
    /// `dim S^4_h`, the raw value clamped at 0.
    pub dim_s: i64,
    /// `dim S^4_h + 6(E - E0) - sigma_b`, an upper bound for the dimension of
    /// the spline space without boundary conditions.
    pub unconstrained_bound: i64,
    /// Strang dimension `E + 4V - V0 + sigma_i`.
    pub strang: i64,
    /// `E0 + 3V0 + sigma >= E - E0`.
    pub hypothesis: bool,
    /// With `K = 0` and the hypothesis, whether the bound equals the Strang
    /// dimension; `None` otherwise.
    pub identity: Option<bool>,
}

pub fn strang_dimensions(c: &Counts, sigma_i: usize, sigma_b: usize, k: usize) -> Result<SplineDimensions> {
    if !c.simply_connected() {
        return Err(Error::NotSimplyConnected(c.euler()));
    }
    let (e, e0, v, v0) = (c.e as i64, c.e0 as i64, c.v as i64, c.v0 as i64);
    let sigma = (sigma_i + sigma_b) as i64;
    let raw = 2 * e0 - e + 3 * v0 + sigma + k as i64;
    let dim_s = raw.max(0);
    let unconstrained_bound = dim_s + 6 * (e - e0) - sigma_b as i64;
    let strang = e + 4 * v - v0 + sigma_i as i64;
    let hypothesis = e0 + 3 * v0 + sigma >= e - e0;
    let identity = (k == 0 && hypothesis).then_some(unconstrained_bound == strang);
    Ok(SplineDimensions { raw, dim_s, unconstrained_bound, strang, hypothesis, identity })
}
