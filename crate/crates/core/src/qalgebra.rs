//! Arithmetic of the q-deformed oscillator with `q = e^τ`.
//!
//! All factorial-like quantities are carried in the log domain so that
//! ratios such as `[m]_q! / [n]_q!` stay accurate for `n` up to the basis size.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Trap deformation `τ`, with `q = e^τ` cached. `τ = 0` is the harmonic trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DeformationParam {
    tau: f64,
    q: f64,
}

impl DeformationParam {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must be finite, got {tau}")));
        }
        Ok(Self { tau, q: tau.exp() })
    }

    pub const fn harmonic() -> Self {
        Self { tau: 0.0, q: 1.0 }
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn is_harmonic(&self) -> bool {
        self.tau == 0.0
    }
}

impl Default for DeformationParam {
    fn default() -> Self {
        Self::harmonic()
    }
}

impl TryFrom<f64> for DeformationParam {
    type Error = Error;

    fn try_from(tau: f64) -> Result<Self> {
        Self::new(tau)
    }
}

impl From<DeformationParam> for f64 {
    fn from(d: DeformationParam) -> f64 {
        d.tau
    }
}

/// The q-number `[x]_q = (q^x - q^-x) / (q - q^-1)`.
///
/// Evaluated as `sinh(xτ) / sinh(τ)`, which is the same quotient without the
/// cancellation of the difference form at small `τ`. `τ = 0` returns `x`.
#[inline]
pub fn q_number(x: f64, d: DeformationParam) -> f64 {
    if d.tau == 0.0 {
        x
    } else {
        (x * d.tau).sinh() / d.tau.sinh()
    }
}

/// `ln([n]_q!)`, with `[0]_q! = [1]_q! = 1`.
pub fn q_log_factorial(n: usize, d: DeformationParam) -> f64 {
    (2..=n).map(|k| q_number(k as f64, d).ln()).sum()
}

/// `[n]_q!`. Overflows for large `n`; prefer [`q_log_factorial`] in ratios.
pub fn q_factorial(n: usize, d: DeformationParam) -> f64 {
    q_log_factorial(n, d).exp()
}

/// Table of `ln([k]_q!)` for `k = 0..=n_max`, built by cumulative summation.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    values: Vec<f64>,
}

impl LogFactorials {
    pub fn new(n_max: usize, d: DeformationParam) -> Self {
        let mut values = Vec::with_capacity(n_max + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for k in 1..=n_max {
            if k >= 2 {
                acc += q_number(k as f64, d).ln();
            }
            values.push(acc);
        }
        Self { values }
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Truncated q-exponential `Σ_{n < n_terms} x^n / [n]_q!`.
///
/// Callers building coherent states pass `n_terms = n_max + 1` so the
/// normalization matches the truncated Fock space exactly.
pub fn q_exp(x: f64, d: DeformationParam, n_terms: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 0..n_terms {
        if n > 0 {
            term *= x / q_number(n as f64, d);
        }
        sum += term;
    }
    sum
}

/// The nonlinear map `f(n) = ([n]_q / n)^{1/2}` with `A = a f(N)`.
///
/// `f(0)` is 0/0 in closed form; it is defined as 1 here. Since `A|0> = 0`
/// the value never enters a matrix element.
pub fn f_of_n(n: usize, d: DeformationParam) -> f64 {
    if n == 0 {
        1.0
    } else {
        (q_number(n as f64, d) / n as f64).sqrt()
    }
}

/// Amplitudes `c_n = β^n / sqrt([n]_q!)` of the q-coherent state `|β>_q` on
/// `n = 0..=n_max`, normalized with the truncated q-exponential.
///
/// The returned vector has unit Euclidean norm by construction.
pub fn coherent_amplitudes(beta: C64, d: DeformationParam, n_max: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut a = C64::new(1.0, 0.0);
    amps.push(a);
    for n in 1..=n_max {
        a = a * beta / q_number(n as f64, d).sqrt();
        amps.push(a);
    }
    let norm = q_exp(beta.norm_sqr(), d, n_max + 1).sqrt();
    for c in amps.iter_mut() {
        *c /= norm;
    }
    amps
}

/// `ln e_q(x)` for `x >= 0` with the series summed to convergence.
pub fn q_exp_ln(x: f64, d: DeformationParam) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let mut log_terms = vec![0.0];
    let mut lt = 0.0;
    let mut peak = 0.0f64;
    for n in 1.. {
        lt += lx - q_number(n as f64, d).ln();
        peak = peak.max(lt);
        log_terms.push(lt);
        if n as f64 > x && lt < peak - 45.0 {
            break;
        }
    }
    peak + log_terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln()
}

/// The untruncated q-coherent state `|β>_q` projected onto `n = 0..=n_max`.
/// Unlike [`coherent_amplitudes`] the result is not renormalized, so these
/// vectors keep the overcompleteness relation of the full states.
pub fn coherent_projection(beta: C64, d: DeformationParam, n_max: usize) -> Vec<C64> {
    let half_norm = 0.5 * q_exp_ln(beta.norm_sqr(), d);
    let (r, theta) = beta.to_polar();
    let lr = r.ln();
    let mut log_fact = 0.0;
    (0..=n_max)
        .map(|n| {
            if n > 0 {
                log_fact += q_number(n as f64, d).ln();
            }
            if r == 0.0 {
                return C64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0);
            }
            let modulus = (n as f64 * lr - 0.5 * log_fact - half_norm).exp();
            C64::from_polar(modulus, n as f64 * theta)
        })
        .collect()
}

/// Expectation `_q<α| g(N) |α>_q` in the truncated q-coherent state.
pub fn coherent_expectation<F>(alpha: C64, d: DeformationParam, n_max: usize, g: F) -> f64
where
    F: Fn(usize) -> f64,
{
    coherent_amplitudes(alpha, d, n_max)
        .iter()
        .enumerate()
        .map(|(n, c)| c.norm_sqr() * g(n))
        .sum()
}

/// Trap level `E_n = (ω/2)([n+1]_q + [n]_q)`.
pub fn trap_level_energy(n: usize, omega: f64, d: DeformationParam) -> f64 {
    0.5 * omega * (q_number((n + 1) as f64, d) + q_number(n as f64, d))
}

/// Small-`τ` expansion of [`trap_level_energy`], accurate through `τ²`.
pub fn trap_level_energy_taylor(n: usize, omega: f64, d: DeformationParam) -> f64 {
    let x = n as f64 + 0.5;
    let t2 = d.tau * d.tau;
    omega * (x * (1.0 - t2 / 24.0) + x.powi(3) * t2 / 6.0)
}

/// Lowest-order Rabi frequency on the red sideband `Δ = -ω` with `ω ≫ Ω`:
/// `μ(n) = sqrt(((ω/2)(cosh(2(n+1)τ) - 1))² + Ω²ε²[n+1]_q)`.
pub fn rabi_frequency_estimate(
    n: usize,
    omega: f64,
    rabi: f64,
    epsilon: f64,
    d: DeformationParam,
) -> f64 {
    let np1 = (n + 1) as f64;
    let anharmonic = 0.5 * omega * ((2.0 * np1 * d.tau).cosh() - 1.0);
    (anharmonic * anharmonic + rabi * rabi * epsilon * epsilon * q_number(np1, d)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converged_q_exp() {
        let h = DeformationParam::harmonic();
        for x in [0.0, 0.5, 16.0, 72.0, 400.0] {
            assert!((q_exp_ln(x, h) - x).abs() < 1e-12 * x.max(1.0), "x={x}");
        }
        let d = DeformationParam::new(0.004).unwrap();
        // the truncated sum has converged by 200 terms at x = 16
        assert!((q_exp_ln(16.0, d) - q_exp(16.0, d, 200).ln()).abs() < 1e-13);
    }

    #[test]
    fn projection_matches_poisson_weights() {
        let h = DeformationParam::harmonic();
        let c = coherent_projection(C64::new(0.0, 2.0), h, 10);
        let mut fact = 1.0;
        for (n, a) in c.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            let p = (-4.0f64).exp() * 4f64.powi(n as i32) / fact;
            assert!((a.norm_sqr() - p).abs() < 1e-15);
        }
        assert!((c[3] / c[3].norm() - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert_eq!(coherent_projection(C64::new(0.0, 0.0), h, 3)[0], C64::new(1.0, 0.0));
    }
    use proptest::prelude::*;

    fn d(tau: f64) -> DeformationParam {
        DeformationParam::new(tau).unwrap()
    }

    #[test]
    fn rejects_non_finite_tau() {
        assert!(DeformationParam::new(f64::NAN).is_err());
        assert!(DeformationParam::new(f64::INFINITY).is_err());
        assert_eq!(d(0.004).q(), 0.004f64.exp());
    }

    #[test]
    fn q_number_harmonic_limit_is_exact() {
        for n in 0..64 {
            assert_eq!(q_number(n as f64, DeformationParam::harmonic()), n as f64);
        }
    }

    #[test]
    fn q_number_two_is_two_cosh() {
        for tau in [0.001, 0.004, 0.1, 0.7] {
            let lhs = q_number(2.0, d(tau));
            assert!((lhs - 2.0 * tau.cosh()).abs() < 1e-14, "tau = {tau}");
        }
        // 2 cosh(0.004) at 40 digits: 2.000016000021333344711114...
        assert!((q_number(2.0, d(0.004)) - 2.000_016_000_021_333).abs() < 1e-15);
    }

    #[test]
    fn small_log_factorials() {
        for tau in [0.0, 0.004, 0.1] {
            assert_eq!(q_log_factorial(0, d(tau)), 0.0);
            assert_eq!(q_log_factorial(1, d(tau)), 0.0);
        }
        assert!((q_log_factorial(3, d(0.0)) - 6f64.ln()).abs() < 1e-15);
        let table = LogFactorials::new(40, d(0.0047));
        for n in 0..=40 {
            assert!((table.get(n) - q_log_factorial(n, d(0.0047))).abs() < 1e-12);
        }
    }

    #[test]
    fn q_exp_values() {
        assert_eq!(q_exp(0.0, d(0.004), 33), 1.0);
        // direct summation to convergence
        let e = q_exp(3.0, d(0.0), 80);
        assert!((e - 3f64.exp()).abs() / 3f64.exp() < 1e-15);
        // Σ_{n<33} 16^n/[n]_q! at τ = 0.004, summed with 40-digit arithmetic
        let v = q_exp(16.0, d(0.004), 33);
        assert!((v - 8_843_690.738_735_798).abs() / v < 1e-13, "{v}");
        let v0 = q_exp(16.0, d(0.0), 33);
        assert!((v0 - 8_884_949.384_527_749).abs() / v0 < 1e-13, "{v0}");
    }

    #[test]
    fn f_of_n_values() {
        assert_eq!(f_of_n(0, d(0.3)), 1.0);
        for n in 1..40 {
            assert_eq!(f_of_n(n, DeformationParam::harmonic()), 1.0);
        }
        // sqrt(sinh(5τ)/(5 sinh τ)) at τ = 0.003, 40 digits: 1.0000180000216004536
        assert!((f_of_n(5, d(0.003)) - 1.000_018_000_021_600_5).abs() < 1e-15);
    }

    #[test]
    fn coherent_amplitude_examples() {
        let vac = coherent_amplitudes(C64::new(0.0, 0.0), d(0.004), 10);
        assert_eq!(vac[0], C64::new(1.0, 0.0));
        assert!(vac[1..].iter().all(|c| c.norm() == 0.0));

        let c = coherent_amplitudes(C64::new(4.0, 0.0), d(0.0), 32);
        let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((c[16] / c[15] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn coherent_expectation_of_f_at_alpha_4() {
        // 40-digit reference over the truncated state n <= 32
        let ef = coherent_expectation(C64::new(4.0, 0.0), d(0.003), 32, |n| f_of_n(n, d(0.003)));
        assert!((ef - 1.000_202_980_542_335_3).abs() < 1e-13, "{ef}");
        let ef2 = coherent_expectation(C64::new(4.0, 0.0), d(0.003), 32, |n| {
            f_of_n(n, d(0.003)).powi(2)
        });
        assert!((ef2 - 1.000_406_012_297_930_3).abs() < 1e-13, "{ef2}");
    }

    #[test]
    fn energy_examples() {
        for n in 0..40 {
            let e = trap_level_energy(n, 50.0, DeformationParam::harmonic());
            assert_eq!(e, 50.0 * (n as f64 + 0.5));
            assert_eq!(trap_level_energy_taylor(n, 50.0, DeformationParam::harmonic()), e);
        }
        // 40-digit evaluation of 25([4]_q + [3]_q) at τ = 0.0047
        let e3 = trap_level_energy(3, 50.0, d(0.0047));
        assert!((e3 - 175.007_731_599_627_41).abs() < 1e-11, "{e3}");
        let taylor = trap_level_energy_taylor(3, 50.0, d(0.0047));
        assert!((e3 - taylor).abs() / e3 < 1e-9);
        let spacing: Vec<f64> = (0..40)
            .map(|n| trap_level_energy(n + 1, 1.0, d(0.004)) - trap_level_energy(n, 1.0, d(0.004)))
            .collect();
        assert!(spacing.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn taylor_window_and_fourth_order_residual() {
        for tau in [0.001, 0.004, 0.0047, 0.008, 0.01] {
            for n in 0..=32 {
                let exact = trap_level_energy(n, 1.0, d(tau));
                let taylor = trap_level_energy_taylor(n, 1.0, d(tau));
                assert!((exact - taylor).abs() / exact <= 1e-4, "tau={tau} n={n}");
            }
        }
        // the residual is O(τ⁴ (n+½)⁵): halving τ divides it by ~16
        let r = |tau: f64| {
            let e = trap_level_energy(32, 1.0, d(tau));
            (e - trap_level_energy_taylor(32, 1.0, d(tau))) / e
        };
        let ratio = r(0.008) / r(0.004);
        assert!((ratio - 16.0).abs() < 0.5, "{ratio}");
        let c = r(0.008) / (0.008f64.powi(4) * 32.5f64.powi(5));
        assert!(c > 0.0 && c < 0.1, "{c}");
    }

    #[test]
    fn rabi_estimate() {
        let mu0 = rabi_frequency_estimate(0, 50.0, 1.0, 0.05, DeformationParam::harmonic());
        assert!((mu0 - 0.05).abs() < 1e-16);
        for n in 0..40 {
            let mu = rabi_frequency_estimate(n, 50.0, 1.0, 0.05, DeformationParam::harmonic());
            assert!((mu - 0.05 * ((n + 1) as f64).sqrt()).abs() < 1e-15);
        }
        // 40-digit reference
        let mu = rabi_frequency_estimate(16, 50.0, 1.0, 0.05, d(0.004));
        assert!((mu - 0.310_082_400_977_269_8).abs() < 1e-14, "{mu}");
        // anharmonic term ~ (n+1)^4 at small τ: log-log slope over n = 5..30
        let tau = d(1e-4);
        let pts: Vec<(f64, f64)> = (5..=30)
            .map(|n| {
                let a = 0.5 * 50.0 * ((2.0 * (n + 1) as f64 * tau.tau()).cosh() - 1.0);
                (((n + 1) as f64).ln(), (a * a).ln())
            })
            .collect();
        let k = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / k, sy / k);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - 4.0).abs() < 0.01, "{slope}");
    }

    proptest! {
        #[test]
        fn q_number_even_in_tau(x in 0.0f64..64.0, tau in 0.0f64..0.5) {
            prop_assert_eq!(q_number(x, d(tau)), q_number(x, d(-tau)));
        }

        #[test]
        fn q_number_increasing(x in 0.0f64..63.0, dx in 0.01f64..1.0, tau in -0.5f64..0.5) {
            prop_assert!(q_number(x + dx, d(tau)) > q_number(x, d(tau)));
        }

        #[test]
        fn factorial_recursion(n in 1usize..=64, tau in -0.2f64..0.2) {
            let lhs = q_factorial(n, d(tau));
            let rhs = q_number(n as f64, d(tau)) * q_factorial(n - 1, d(tau));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        }

        #[test]
        fn coherent_unit_norm(re in -6.0f64..6.0, im in -6.0f64..6.0, tau in 0.0f64..0.1, n_max in 1usize..48) {
            let c = coherent_amplitudes(C64::new(re, im), d(tau), n_max);
            let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }

        #[test]
        fn deformed_spectrum_stretches_upward(n in 1usize..64, tau in 1e-4f64..0.2) {
            let harmonic = 50.0 * (n as f64 + 0.5);
            prop_assert!(trap_level_energy(n, 50.0, d(tau)) > harmonic);
            // [1]_q = 1 pins the ground level for every τ
            prop_assert_eq!(trap_level_energy(0, 50.0, d(tau)), 25.0);
        }
    }
}
