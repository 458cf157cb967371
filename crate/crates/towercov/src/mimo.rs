//! Regularized zero-forcing precoding and max-min power control.
//!
//! The downlink chain per Monte-Carlo drop: precode the channel (RZF with
//! the MMSE-style regularizer `α = K·σ²/P`), reduce to the effective gain
//! matrix `G_kj = |h_kᴴ w_j|²`, then balance per-user SINRs by solving the
//! max-min power-allocation problem under a total power budget. With
//! max-min control every user of a drop ends at the same SINR, so a drop
//! passes or fails its rate target as a block — the statistic the coverage
//! sweep builds on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::RadioConfig;
use crate::error::{Error, Result};
use crate::linalg;

/// Condition-number estimate beyond which the regularized Gram matrix is
/// treated as numerically singular.
const MAX_CONDITION: f64 = 1e14;

/// Relative bracket tolerance of the SINR bisection.
const BISECTION_TOL: f64 = 1e-6;
/// Iteration budget of the SINR bisection.
const BISECTION_MAX_ITERS: usize = 200;
/// Iteration budget of the balancing fixed-point polish.
const POLISH_MAX_ITERS: usize = 300;

/// Unit-norm precoding columns plus the regularizer they were computed with.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    /// `M × K`; column `j` is the beam serving user `j`, `‖w_j‖ = 1`.
    pub w: DMatrix<Complex64>,
    /// The regularizer `α = K·σ²/P` actually used.
    pub regularization: f64,
}

/// Regularized zero-forcing: `W ∝ H (HᴴH + αI)⁻¹`, columns normalized to
/// unit power so the power allocation happens downstream.
///
/// `α = K·σ²/P` trades off interference suppression against noise
/// amplification; `α → 0` recovers zero-forcing, large `α` approaches
/// maximum-ratio transmission.
pub fn rzf_precode(
    channel: &DMatrix<Complex64>,
    noise_power_w: f64,
    total_power_w: f64,
) -> Result<PrecodingMatrix> {
    let (m, k) = channel.shape();
    if k == 0 {
        return Err(Error::InvalidArgument("channel has no users".into()));
    }
    if k > m {
        return Err(Error::InvalidArgument(format!(
            "{k} users exceed {m} antennas; RZF needs K <= M"
        )));
    }
    if !channel.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument("channel has non-finite entries".into()));
    }
    if !(noise_power_w.is_finite() && noise_power_w >= 0.0) {
        return Err(Error::InvalidArgument("noise power must be >= 0".into()));
    }
    if !(total_power_w.is_finite() && total_power_w > 0.0) {
        return Err(Error::InvalidArgument("total power must be > 0".into()));
    }

    let alpha = k as f64 * noise_power_w / total_power_w;
    let mut gram = linalg::adjoint_mul(channel, channel);
    for i in 0..k {
        gram[(i, i)] += Complex64::new(alpha, 0.0);
    }
    let chol = nalgebra::linalg::Cholesky::new(gram).ok_or(Error::IllConditioned {
        cond: f64::INFINITY,
    })?;
    // Cheap condition estimate from the Cholesky diagonal: cond₂(G) ≈
    // (max lᵢᵢ / min lᵢᵢ)². Catches the rank-deficient α → 0 case.
    let l = chol.l_dirty();
    let (mut lmin, mut lmax) = (f64::INFINITY, 0.0f64);
    for i in 0..k {
        let d = l[(i, i)].re;
        lmin = lmin.min(d);
        lmax = lmax.max(d);
    }
    let cond = (lmax / lmin).powi(2);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::IllConditioned { cond });
    }

    let inv = chol.inverse();
    let mut w = linalg::mul(channel, &inv);
    for j in 0..k {
        let norm = w.column(j).norm();
        if norm < 1e-150 {
            return Err(Error::DegenerateChannel(format!(
                "precoding column {j} has no energy (user channel is zero)"
            )));
        }
        w.column_mut(j).unscale_mut(norm);
    }
    Ok(PrecodingMatrix {
        w,
        regularization: alpha,
    })
}

/// Effective gain matrix `G_kj = |h_kᴴ w_j|²` (row = user, column = beam).
pub fn effective_gains(
    channel: &DMatrix<Complex64>,
    precoding: &PrecodingMatrix,
) -> Result<DMatrix<f64>> {
    if channel.nrows() != precoding.w.nrows() || channel.ncols() != precoding.w.ncols() {
        return Err(Error::InvalidArgument(format!(
            "channel is {}x{} but precoder is {}x{}",
            channel.nrows(),
            channel.ncols(),
            precoding.w.nrows(),
            precoding.w.ncols()
        )));
    }
    let cross = linalg::adjoint_mul(channel, &precoding.w);
    Ok(cross.map(|z| z.norm_sqr()))
}

/// Result of max-min power balancing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// Per-beam transmit power [W]; sums to the power budget.
    pub p: Vec<f64>,
    /// The balanced SINR every user attains.
    pub common_sinr: f64,
}

/// Max-min SINR power control under a sum-power budget.
///
/// Maximizes `min_k SINR_k` subject to `Σ p ≤ P`, `p ≥ 0`, where
/// `SINR_k = p_k G_kk / (σ² + Σ_{j≠k} p_j G_kj)`. At the optimum all SINRs
/// are equal and the budget is tight. The target SINR `t` is bracketed by
/// bisection — `t` is feasible iff `(I − tB) p = t·u` has a nonnegative
/// solution within budget, with `B_kj = G_kj/G_kk` (zero diagonal) and
/// `u_k = σ²/G_kk` — then the bracket is closed with a normalized
/// fixed-point iteration that converges to the balanced point at machine
/// precision, so `Σp = P` exactly and the returned SINRs agree to ~1e-12.
pub fn maxmin_power(
    gains: &DMatrix<f64>,
    noise_power_w: f64,
    total_power_w: f64,
) -> Result<PowerAllocation> {
    let k = gains.nrows();
    if k == 0 || gains.ncols() != k {
        return Err(Error::InvalidArgument(format!(
            "gain matrix must be square and nonempty, got {}x{}",
            gains.nrows(),
            gains.ncols()
        )));
    }
    if !gains.iter().all(|g| g.is_finite() && *g >= 0.0) {
        return Err(Error::InvalidArgument(
            "gains must be finite and nonnegative".into(),
        ));
    }
    if !(noise_power_w.is_finite() && noise_power_w > 0.0) {
        return Err(Error::InvalidArgument("noise power must be > 0".into()));
    }
    if !(total_power_w.is_finite() && total_power_w > 0.0) {
        return Err(Error::InvalidArgument("total power must be > 0".into()));
    }
    for i in 0..k {
        if gains[(i, i)] <= 0.0 {
            return Err(Error::DegenerateChannel(format!(
                "user {i} has zero direct gain; its SINR cannot be positive"
            )));
        }
    }

    if k == 1 {
        return Ok(PowerAllocation {
            p: vec![total_power_w],
            common_sinr: total_power_w * gains[(0, 0)] / noise_power_w,
        });
    }

    // Normalized interference matrix and noise vector.
    let mut b = DMatrix::<f64>::zeros(k, k);
    let mut u = DVector::<f64>::zeros(k);
    for i in 0..k {
        let direct = gains[(i, i)];
        for j in 0..k {
            if j != i {
                b[(i, j)] = gains[(i, j)] / direct;
            }
        }
        u[i] = noise_power_w / direct;
        if !u[i].is_finite() || !b.row(i).iter().all(|x| x.is_finite()) {
            return Err(Error::DegenerateChannel(format!(
                "user {i} direct gain too small relative to interference"
            )));
        }
    }

    let feasible = |t: f64| -> Option<DVector<f64>> {
        // A = I − t·B (B has zero diagonal).
        let a = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { -t * b[(i, j)] });
        let lu = a.lu();
        let p = lu.solve(&(t * &u))?;
        let sum: f64 = p.iter().sum();
        if p.iter().all(|x| x.is_finite() && *x >= -1e-12 * total_power_w)
            && sum <= total_power_w * (1.0 + 1e-12)
        {
            Some(p)
        } else {
            None
        }
    };

    // Bisect t between 0 (trivially feasible) and the interference-free
    // upper bound max_k P·G_kk/σ².
    let mut t_lo = 0.0f64;
    let mut t_hi = (0..k)
        .map(|i| total_power_w * gains[(i, i)] / noise_power_w)
        .fold(0.0, f64::max);
    let mut best: Option<DVector<f64>> = None;
    let mut converged = false;
    for _ in 0..BISECTION_MAX_ITERS {
        if t_hi - t_lo <= BISECTION_TOL * t_hi {
            converged = true;
            break;
        }
        let mid = 0.5 * (t_lo + t_hi);
        match feasible(mid) {
            Some(p) => {
                t_lo = mid;
                best = Some(p);
            }
            None => t_hi = mid,
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "max-min SINR bisection",
            iterations: BISECTION_MAX_ITERS,
        });
    }

    // Close the bracket: normalized fixed-point iteration on p = t(Bp + u)
    // with Σp pinned to the budget. The map is a Hilbert-metric contraction
    // for positive u, so this converges to the balanced allocation; from the
    // bisection's warm start it takes a handful of iterations.
    let mut x = best.unwrap_or_else(|| {
        DVector::from_element(k, total_power_w / k as f64)
    });
    if x.iter().sum::<f64>() <= 0.0 {
        x = DVector::from_element(k, total_power_w / k as f64);
    }
    let mut polished = false;
    for _ in 0..POLISH_MAX_ITERS {
        let mut y = &b * &x;
        y += &u;
        let s: f64 = y.iter().sum();
        let scale = total_power_w / s;
        let mut delta = 0.0f64;
        for i in 0..k {
            let xi = y[i] * scale;
            delta = delta.max((xi - x[i]).abs());
            x[i] = xi;
        }
        if delta <= 1e-14 * total_power_w {
            polished = true;
            break;
        }
    }
    let sinr = |p: &DVector<f64>, i: usize| -> f64 {
        let mut interference = 0.0;
        for j in 0..k {
            if j != i {
                interference += gains[(i, j)] * p[j];
            }
        }
        p[i] * gains[(i, i)] / (noise_power_w + interference)
    };
    let (mut s_min, mut s_max) = (f64::INFINITY, 0.0f64);
    for i in 0..k {
        let s = sinr(&x, i);
        s_min = s_min.min(s);
        s_max = s_max.max(s);
    }
    if !polished && (s_max - s_min) > 1e-6 * s_min {
        return Err(Error::NonConvergence {
            what: "max-min SINR balancing",
            iterations: POLISH_MAX_ITERS,
        });
    }
    Ok(PowerAllocation {
        p: x.iter().copied().collect(),
        common_sinr: s_min,
    })
}

/// Per-user SINRs and achievable rates for an allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub sinr: Vec<f64>,
    pub rate_bps: Vec<f64>,
}

/// Evaluates per-user SINR and rate for a given power allocation.
pub fn user_rates(
    allocation: &PowerAllocation,
    gains: &DMatrix<f64>,
    radio: &RadioConfig,
) -> Result<RateReport> {
    let k = gains.nrows();
    if allocation.p.len() != k || gains.ncols() != k {
        return Err(Error::InvalidArgument(format!(
            "allocation serves {} users but gains are {}x{}",
            allocation.p.len(),
            gains.nrows(),
            gains.ncols()
        )));
    }
    radio.validate()?;
    let noise = radio.noise_power_w();
    let mut sinr = Vec::with_capacity(k);
    let mut rate = Vec::with_capacity(k);
    for i in 0..k {
        let mut interference = 0.0;
        for j in 0..k {
            if j != i {
                interference += gains[(i, j)] * allocation.p[j];
            }
        }
        let s = allocation.p[i] * gains[(i, i)] / (noise + interference);
        sinr.push(s);
        rate.push(radio.rate_bps(s));
    }
    Ok(RateReport {
        sinr,
        rate_bps: rate,
    })
}
