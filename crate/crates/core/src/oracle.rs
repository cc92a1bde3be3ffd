//! Closed-form reference values used to check the production code paths.
//!
//! Nothing here is used by the solver itself.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::gl_weights::check_alpha;

/// `ln|Γ(z)|` and `sign Γ(z)` for any `z` that is not a pole.
fn signed_ln_gamma(z: f64) -> (f64, f64) {
    if z > 0.0 {
        return (ln_gamma(z), 1.0);
    }
    // Γ(z) Γ(1 - z) = π / sin(πz)
    let s = (PI * z).sin();
    let ln_abs = PI.ln() - s.abs().ln() - ln_gamma(1.0 - z);
    (ln_abs, s.signum())
}

fn is_pole(z: f64) -> bool {
    z <= 0.0 && z == z.round()
}

/// `(-1)^j Γ(α+1) / (Γ(j+1) Γ(α-j+1))`, evaluated in log space with the sign
/// carried separately. Returns exactly zero where `Γ(α-j+1)` has a pole.
pub fn weight_oracle(alpha: f64, j: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let denom_arg = alpha - j as f64 + 1.0;
    if is_pole(denom_arg) {
        return Ok(0.0);
    }
    let (ln_num, sign_num) = signed_ln_gamma(alpha + 1.0);
    let (ln_fact, _) = signed_ln_gamma(j as f64 + 1.0);
    let (ln_den, sign_den) = signed_ln_gamma(denom_arg);
    let parity = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(parity * sign_num * sign_den * (ln_num - ln_fact - ln_den).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_index_values() {
        assert_relative_eq!(weight_oracle(1.0, 1).unwrap(), -1.0, max_relative = 1e-13);
        assert_relative_eq!(weight_oracle(0.5, 1).unwrap(), -0.5, max_relative = 1e-13);
        assert_relative_eq!(weight_oracle(0.5, 2).unwrap(), -0.125, max_relative = 1e-13);
        assert_relative_eq!(weight_oracle(0.3, 0).unwrap(), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn unit_order_poles_are_zero() {
        for j in 2..20 {
            assert_eq!(weight_oracle(1.0, j).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_out_of_range_order() {
        assert!(weight_oracle(1.2, 3).is_err());
    }
}
