//! Fock-basis matrix elements of the laser coupling operator
//! `F_q = e^{-ε²/2} e^{iεA†} e^{iεA}`.
//!
//! [`fq_element`] is the closed-form sum used by the simulator. Two
//! independent routes check it: [`fq_series_oracle`] applies the ladder
//! operators term by term, and [`f_harmonic_closed_form`] is the associated
//! Laguerre form of the harmonic (`τ = 0`) displacement operator.

use std::io::Write;

use num_complex::Complex64 as C64;

use crate::qalgebra::{q_number, DeformationParam, LogFactorials};
use crate::{Error, Result};

/// `i^k`.
#[inline]
fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Dense `(n_max+1)²` matrix of `<m|F_q|n>`, stored row-major.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    n_max: usize,
    epsilon: f64,
    deformation: DeformationParam,
    elements: Vec<C64>,
}

impl CouplingMatrix {
    /// Harmonic-trap matrix built from the Laguerre closed form.
    pub fn harmonic_closed_form(n_max: usize, epsilon: f64) -> Self {
        Self::from_fn(n_max, epsilon, DeformationParam::harmonic(), |m, n| {
            f_harmonic_closed_form(m, n, epsilon)
        })
    }

    fn from_fn<F>(n_max: usize, epsilon: f64, deformation: DeformationParam, f: F) -> Self
    where
        F: Fn(usize, usize) -> C64,
    {
        let dim = n_max + 1;
        let mut elements = vec![C64::new(0.0, 0.0); dim * dim];
        for m in 0..dim {
            for n in m..dim {
                let v = f(m, n);
                elements[m * dim + n] = v;
                elements[n * dim + m] = v;
            }
        }
        Self { n_max, epsilon, deformation, elements }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn deformation(&self) -> DeformationParam {
        self.deformation
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.elements[m * self.dim() + n]
    }

    /// `(F†)_{mn}` of the truncated matrix.
    #[inline]
    pub fn adjoint(&self, m: usize, n: usize) -> C64 {
        self.get(n, m).conj()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.elements
    }

    /// Writes `row,col,re,im` lines for every entry.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,col,re,im")?;
        let dim = self.dim();
        for m in 0..dim {
            for n in 0..dim {
                let v = self.get(m, n);
                writeln!(w, "{m},{n},{},{}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Precomputed log-factorials shared by all elements of one matrix.
struct ElementTables {
    q_fact: LogFactorials,
    fact: LogFactorials,
}

impl ElementTables {
    fn new(n_max: usize, d: DeformationParam) -> Self {
        Self {
            q_fact: LogFactorials::new(n_max, d),
            fact: LogFactorials::new(2 * n_max + 1, DeformationParam::harmonic()),
        }
    }
}

fn element_with(m: usize, n: usize, epsilon: f64, tables: &ElementTables) -> C64 {
    let (m, n) = if m <= n { (m, n) } else { (n, m) };
    if epsilon == 0.0 {
        return if m == n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let diff = n - m;
    let ln_eps = epsilon.abs().ln();
    let qf = &tables.q_fact;
    let f = &tables.fact;
    // sqrt([m]!/[n]!) · [n]!/[m-k]! = sqrt([m]! [n]!) / [m-k]!
    let half = 0.5 * (qf.get(m) + qf.get(n));
    let mut sum = 0.0;
    for k in 0..=m {
        let ln_mag = 2.0 * k as f64 * ln_eps + half - f.get(k) - f.get(diff + k) - qf.get(m - k);
        let term = (ln_mag + diff as f64 * ln_eps).exp();
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let sign = if epsilon < 0.0 && diff % 2 == 1 { -1.0 } else { 1.0 };
    i_pow(diff) * (sign * (-0.5 * epsilon * epsilon).exp() * sum)
}

/// `<m|F_q|n>` from the closed-form finite sum, every factorial ratio taken
/// in the log domain. For `m > n` the transpose symmetry `<m|F_q|n> =
/// <n|F_q|m>` is used.
pub fn fq_element(m: usize, n: usize, epsilon: f64, d: DeformationParam) -> C64 {
    let tables = ElementTables::new(m.max(n), d);
    element_with(m, n, epsilon, &tables)
}

/// Full coupling matrix on `n = 0..=n_max`.
pub fn fq_matrix(n_max: usize, epsilon: f64, d: DeformationParam) -> Result<CouplingMatrix> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be finite, got {epsilon}")));
    }
    let tables = ElementTables::new(n_max, d);
    Ok(CouplingMatrix::from_fn(n_max, epsilon, d, |m, n| element_with(m, n, epsilon, &tables)))
}

/// Evaluates `<m| e^{-ε²/2} Σ_a (iε)^a A†^a/a! Σ_b (iε)^b A^b/b! |n>` by
/// explicitly applying the ladder actions `A|j> = [j]^{1/2}|j-1>` and
/// `A†|j> = [j+1]^{1/2}|j+1>` to Fock-space vectors, keeping `a, b < terms`.
///
/// Fails with [`Error::NonConvergence`] when a retained term with `a` or `b`
/// equal to `terms - 1` still has a Fock-space vector norm above `1e-14`.
pub fn fq_series_oracle(
    m: usize,
    n: usize,
    epsilon: f64,
    d: DeformationParam,
    terms: usize,
) -> Result<C64> {
    if terms == 0 {
        return Err(Error::InvalidParameter("terms must be positive".into()));
    }
    let len = m.max(n) + terms + 1;
    let ie = C64::new(0.0, epsilon);
    let lower = |v: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for j in 1..v.len() {
            out[j - 1] = v[j] * q_number(j as f64, d).sqrt();
        }
        out
    };
    let raise = |v: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for j in 0..v.len() - 1 {
            out[j + 1] = v[j] * q_number((j + 1) as f64, d).sqrt();
        }
        out
    };

    let mut ket = vec![C64::new(0.0, 0.0); len];
    ket[n] = C64::new(1.0, 0.0);
    let mut total = C64::new(0.0, 0.0);
    let mut boundary = 0.0f64;
    let mut coeff_b = C64::new(1.0, 0.0);
    for b in 0..terms {
        if b > 0 {
            coeff_b = coeff_b * ie / b as f64;
            ket = lower(&ket);
        }
        let mut bra_side = ket.clone();
        let mut coeff_a = C64::new(1.0, 0.0);
        for a in 0..terms {
            if a > 0 {
                coeff_a = coeff_a * ie / a as f64;
                bra_side = raise(&bra_side);
            }
            total += coeff_a * coeff_b * bra_side[m];
            if a == terms - 1 || b == terms - 1 {
                let vec_norm = bra_side.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                boundary = boundary.max((coeff_a * coeff_b).norm() * vec_norm);
            }
        }
    }
    let result = total * (-0.5 * epsilon * epsilon).exp();
    if boundary > 1e-14 {
        return Err(Error::NonConvergence { terms, last_term: boundary });
    }
    Ok(result)
}

/// Associated Laguerre polynomial `L_k^{(a)}(x)` by the three-term recurrence.
pub fn laguerre(k: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Harmonic-trap `<m|F|n> = e^{-ε²/2} (iε)^{n-m} sqrt(m!/n!) L_m^{(n-m)}(ε²)`
/// for `m <= n`, extended to `m > n` by symmetry.
pub fn f_harmonic_closed_form(m: usize, n: usize, epsilon: f64) -> C64 {
    let (m, n) = if m <= n { (m, n) } else { (n, m) };
    let diff = n - m;
    let ln_ratio: f64 = -((m + 1)..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let mag = (-0.5 * epsilon * epsilon).exp()
        * epsilon.powi(diff as i32)
        * (0.5 * ln_ratio).exp()
        * laguerre(m, diff as f64, epsilon * epsilon);
    i_pow(diff) * mag
}
