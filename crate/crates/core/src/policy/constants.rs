use super::PolicyError;
use crate::action::ActionSet;
use crate::cost::ConcentrationParams;

/// Exploration constant `w = max{b / (m d zeta u0)^2, 4 b / c^2}` for the
/// log-schedule with known constants. Requires `b > 2m / a` and `c > 0`,
/// where `(a, zeta, u0)` hold for each edge cost.
pub fn edge_level_w(
    params: ConcentrationParams,
    m: usize,
    d: usize,
    b: f64,
    c: f64,
) -> Result<f64, PolicyError> {
    let bound = 2.0 * m as f64 / params.a;
    if !(b > bound) {
        return Err(PolicyError::InvalidB { b, bound });
    }
    if !(c > 0.0) {
        return Err(PolicyError::InvalidC(c));
    }
    let scale = m as f64 * d as f64 * params.zeta * params.u0;
    Ok((b / (scale * scale)).max(4.0 * b / (c * c)))
}

/// Per-epoch exploration constant `w = max{b / (d zeta u0)^2, 4 b / c^2}`
/// with `b > 2 / a`, where `(a, zeta, u0)` hold for each action's cost.
pub fn solo_w(params: ConcentrationParams, d: usize, b: f64, c: f64) -> Result<f64, PolicyError> {
    let bound = 2.0 / params.a;
    if !(b > bound) {
        return Err(PolicyError::InvalidB { b, bound });
    }
    if !(c > 0.0) {
        return Err(PolicyError::InvalidC(c));
    }
    let scale = d as f64 * params.zeta * params.u0;
    Ok((b / (scale * scale)).max(4.0 * b / (c * c)))
}

/// Constants for the cost `C · x` of every action `x`, given constants for
/// each independent cost coordinate: `zeta = max_x Σ x_j^2 zeta_j` and
/// `u0 = min u0_j / |x_j|` over nonzero entries.
///
/// For 0/1 path vectors this is the edge constant scaled by the longest path
/// length, which never exceeds the `m`-scaling used for paths.
pub fn action_concentration(
    per_coordinate: &[ConcentrationParams],
    actions: &ActionSet,
) -> ConcentrationParams {
    assert_eq!(per_coordinate.len(), actions.width(), "coordinate count mismatch");
    let mut zeta = 0.0f64;
    let mut u0 = f64::INFINITY;
    for x in actions.vectors() {
        let mut z = 0.0;
        for (xj, p) in x.iter().zip(per_coordinate) {
            if *xj != 0.0 {
                z += xj * xj * p.zeta;
                u0 = u0.min(p.u0 / xj.abs());
            }
        }
        zeta = zeta.max(z);
    }
    ConcentrationParams::from_zeta(zeta, u0)
}
