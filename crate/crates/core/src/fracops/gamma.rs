//! Gamma function.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use crate::{Error, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

static FAULT: AtomicBool = AtomicBool::new(false);

/// Debug hook: when enabled, [`gamma`] returns values perturbed by 1 %.
///
/// Only meant for exercising the verification suites' failure paths.
#[doc(hidden)]
pub fn set_gamma_fault(enabled: bool) {
    FAULT.store(enabled, Ordering::SeqCst);
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires a finite x > 0, got {x}")));
    }
    let value = gamma_unchecked(x);
    if FAULT.load(Ordering::Relaxed) {
        Ok(value * 1.01)
    } else {
        Ok(value)
    }
}

/// Γ(x) for any real x that is not a non-positive integer; no fault hook.
pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else if x == x.floor() && x <= 25.0 {
        // exact factorial for small integers
        (1..x as u64).fold(1.0, |acc, k| acc * k as f64)
    } else {
        let z = x - 1.0;
        let mut sum = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            sum += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
    }
}

/// Γ evaluated through the fault-aware entry point, panicking only on
/// arguments the callers have already validated as positive.
pub(crate) fn gamma_pos(x: f64) -> f64 {
    gamma(x).expect("gamma argument validated by caller")
}
