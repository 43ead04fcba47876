//! Closed-form lower bounds for the L_r fundamental tone of a piece of
//! hypersurface trapped in an ambient geodesic ball, and the derived
//! extrinsic-radius constants. Formula selection follows the ambient
//! curvature sign and whether the local curvature bound h_{r+1} vanishes.

use super::{BoundConstants, BoundName};
use crate::error::{Error, Result};

/// Strictness guard for the admissibility windows: configurations within this
/// distance of the window edge are rejected (the bound degenerates there).
const WINDOW_GUARD: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct BallBound {
    pub bound: f64,
    pub admissible: bool,
    /// Which formula branch applied.
    pub item: BoundName,
    /// Upper end of the admissible radius window (infinite when unrestricted).
    pub window: f64,
}

/// Lower bound for the L_r tone of a connected piece of hypersurface inside
/// the ambient ball of radius `ball_radius`, given inf S_r over the piece and
/// the local bound `h_next` on |S_{r+1}|.
pub fn ball_bound(
    consts: &BoundConstants,
    curvature: i32,
    r: usize,
    n: usize,
    ball_radius: f64,
    inf_sr: f64,
    h_next: f64,
) -> Result<BallBound> {
    if !matches!(curvature, -1 | 0 | 1) {
        return Err(Error::domain("curvature sign must be -1, 0 or 1"));
    }
    if n < 1 || r >= n {
        return Err(Error::domain(format!("order r={r} out of range for n={n}")));
    }
    if ball_radius <= 0.0 {
        return Err(Error::domain("ball radius must be positive"));
    }
    if inf_sr <= 0.0 {
        return Err(Error::domain(
            "inf S_r must be positive (ellipticity hypothesis)",
        ));
    }
    if h_next < 0.0 {
        return Err(Error::domain("h_{r+1} is a supremum of absolute values"));
    }
    let nr = (n - r) as f64;
    let rp1 = (r + 1) as f64;
    let radius = ball_radius;
    if curvature == 1 {
        // Window: R < arccot((r+1) h / ((n-r) inf S_r)), which is pi/2 at h=0.
        let window = (nr * inf_sr).atan2(rp1 * h_next);
        let admissible = radius + WINDOW_GUARD < window;
        let bound =
            consts.thm32_front_i / radius * (nr * inf_sr / radius.tan() - rp1 * h_next);
        Ok(BallBound {
            bound,
            admissible,
            item: BoundName::Thm32I,
            window,
        })
    } else if h_next > 0.0 {
        let window = nr * inf_sr / (rp1 * h_next);
        let admissible = radius + WINDOW_GUARD < window;
        let bound = consts.thm32_front_ii / (radius * radius)
            * (nr * inf_sr - rp1 * radius * h_next);
        Ok(BallBound {
            bound,
            admissible,
            item: BoundName::Thm32Ii,
            window,
        })
    } else {
        let bound = consts.thm32_front_iii * nr * inf_sr / (radius * radius);
        Ok(BallBound {
            bound,
            admissible: true,
            item: BoundName::Thm32Iii,
            window: f64::INFINITY,
        })
    }
}

/// Extrinsic-radius constant: every closed hypersurface with S_{r+1} > 0 has
/// extrinsic radius at least this value.
pub fn radius_constant(
    consts: &BoundConstants,
    curvature: i32,
    r: usize,
    n: usize,
    inf_sr: f64,
    sup_srnext: f64,
) -> Result<f64> {
    if !matches!(curvature, -1 | 0 | 1) {
        return Err(Error::domain("curvature sign must be -1, 0 or 1"));
    }
    if n < 1 || r >= n {
        return Err(Error::domain(format!("order r={r} out of range for n={n}")));
    }
    if inf_sr <= 0.0 {
        return Err(Error::domain("inf S_r must be positive"));
    }
    let nr = (n - r) as f64;
    let rp1 = (r + 1) as f64;
    if curvature == 1 {
        if sup_srnext < 0.0 {
            return Err(Error::domain("sup S_{r+1} must be nonnegative"));
        }
        // arccot of a nonnegative ratio; pi/2 in the minimal (S_{r+1} -> 0) case.
        Ok(consts.lambda_r_scale * (nr * inf_sr).atan2(rp1 * sup_srnext))
    } else {
        if sup_srnext <= 0.0 {
            return Err(Error::domain(
                "sup S_{r+1} must be positive for flat or hyperbolic ambients",
            ));
        }
        Ok(consts.lambda_r_scale * nr * inf_sr / (rp1 * sup_srnext))
    }
}
