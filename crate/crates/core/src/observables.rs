//! Ion populations, coherences, the partial mutual entropy and the Husimi Q-function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::dynamics::{AmplitudeState, Evolution};
use crate::qalgebra::{coherent_projection, DeformationParam};
use crate::{to_plot_time, C64, Error, Result};

/// Full-state probabilities are floored here before they divide anything.
pub const PROB_FLOOR: f64 = 1e-300;
/// Below this |C_ge| the coherence logarithm is not evaluated.
pub const COHERENCE_FLOOR: f64 = 1e-30;

/// Reduced ionic density matrix: two populations and the off-diagonal element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonReduced {
    pub p_g: f64,
    pub p_e: f64,
    pub c_ge: C64,
}

impl IonReduced {
    pub fn of(s: &AmplitudeState) -> Self {
        let (p_g, p_e) = populations(s);
        IonReduced { p_g, p_e, c_ge: coherence(s) }
    }

    pub fn inversion(&self) -> f64 {
        self.p_g - self.p_e
    }
}

pub fn populations(s: &AmplitudeState) -> (f64, f64) {
    let p_g = s.g.iter().map(|c| c.norm_sqr()).sum();
    let p_e = s.e.iter().map(|c| c.norm_sqr()).sum();
    (p_g, p_e)
}

pub fn inversion(s: &AmplitudeState) -> f64 {
    let (p_g, p_e) = populations(s);
    p_g - p_e
}

/// `Σ_n g_n* e_n`
pub fn coherence(s: &AmplitudeState) -> C64 {
    s.g.iter().zip(&s.e).map(|(g, e)| g.conj() * e).sum()
}

fn kl_term(p: f64, reference: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * (p / reference.max(PROB_FLOOR)).ln()
    }
}

/// `2 Re[c_i · conj(ln(c_i / c))]`, `None` when `|c|` is too small.
fn coherence_term(branch: C64, full: C64) -> Option<f64> {
    if full.norm() < COHERENCE_FLOOR {
        return None;
    }
    if branch == C64::new(0.0, 0.0) {
        return Some(0.0);
    }
    Some(2.0 * (branch * (branch / full).ln().conj()).re)
}

/// Population part of the relative entropy of one branch against the full state.
pub fn population_relative_entropy(branch: &IonReduced, full: &IonReduced) -> f64 {
    kl_term(branch.p_g, full.p_g) + kl_term(branch.p_e, full.p_e)
}

/// Relative entropy of one branch including its coherence term.
pub fn relative_entropy(branch: &IonReduced, full: &IonReduced) -> Option<f64> {
    coherence_term(branch.c_ge, full.c_ge).map(|c| population_relative_entropy(branch, full) + c)
}

/// S(P) with equal branch weights, natural log.
pub fn partial_mutual_entropy(full: &IonReduced, b1: &IonReduced, b2: &IonReduced) -> f64 {
    0.5 * (population_relative_entropy(b1, full) + population_relative_entropy(b2, full))
}

/// S(C) = S_m − S(P), principal branch of the complex log.
pub fn coherence_entropy_term(full: &IonReduced, b1: &IonReduced, b2: &IonReduced) -> Option<f64> {
    let c1 = coherence_term(b1.c_ge, full.c_ge)?;
    let c2 = coherence_term(b2.c_ge, full.c_ge)?;
    Some(0.5 * (c1 + c2))
}

/// S_m summed branch by branch.
pub fn mutual_entropy(full: &IonReduced, b1: &IonReduced, b2: &IonReduced) -> Option<f64> {
    Some(0.5 * (relative_entropy(b1, full)? + relative_entropy(b2, full)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSample {
    pub t_plot: f64,
    pub full: IonReduced,
    pub branch1: IonReduced,
    pub branch2: IonReduced,
    pub s_p: f64,
    pub s_c: Option<f64>,
}

impl ObservableSample {
    pub fn from_states(
        t_plot: f64,
        full: &AmplitudeState,
        b1: &AmplitudeState,
        b2: &AmplitudeState,
    ) -> Self {
        let (full, branch1, branch2) = (IonReduced::of(full), IonReduced::of(b1), IonReduced::of(b2));
        ObservableSample {
            t_plot,
            s_p: partial_mutual_entropy(&full, &branch1, &branch2),
            s_c: coherence_entropy_term(&full, &branch1, &branch2),
            full,
            branch1,
            branch2,
        }
    }

    pub fn inversion(&self) -> f64 {
        self.full.inversion()
    }
}

/// Zips the cat trajectory with both branch trajectories on their common grid.
pub fn sample_trajectories(
    cat: &Evolution,
    b1: &Evolution,
    b2: &Evolution,
) -> Result<Vec<ObservableSample>> {
    let n = cat.states.len();
    for other in [b1, b2] {
        if other.states.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: other.states.len() });
        }
    }
    Ok(cat
        .states
        .iter()
        .zip(&b1.states)
        .zip(&b2.states)
        .map(|((c, x), y)| ObservableSample::from_states(to_plot_time(c.t), c, x, y))
        .collect())
}

/// Rectangular window in the α plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QAxes {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub step: f64,
}

impl Default for QAxes {
    fn default() -> Self {
        QAxes { re_min: -6.0, re_max: 6.0, im_min: -6.0, im_max: 6.0, step: 0.1 }
    }
}

impl QAxes {
    pub fn symmetric(half_width: f64, step: f64) -> Self {
        QAxes { re_min: -half_width, re_max: half_width, im_min: -half_width, im_max: half_width, step }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.re_min, self.re_max, self.im_min, self.im_max, self.step];
        if vals.iter().any(|v| !v.is_finite()) || self.step <= 0.0 {
            return Err(Error::InvalidParameter("Q-function axes must be finite with step > 0".into()));
        }
        if self.re_max < self.re_min || self.im_max < self.im_min {
            return Err(Error::InvalidParameter("Q-function axis max below min".into()));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| lo + k as f64 * step).collect()
    }

    pub fn re_axis(&self) -> Vec<f64> {
        Self::axis(self.re_min, self.re_max, self.step)
    }

    pub fn im_axis(&self) -> Vec<f64> {
        Self::axis(self.im_min, self.im_max, self.step)
    }
}

/// Q(α) sampled on a grid; `values[i * re.len() + j]` sits at `(re[j], im[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub alpha_re: Vec<f64>,
    pub alpha_im: Vec<f64>,
    pub step: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPeak {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub value: f64,
}

impl QGrid {
    pub fn get(&self, i_im: usize, j_re: usize) -> f64 {
        self.values[i_im * self.alpha_re.len() + j_re]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Riemann sum of Q dα².
    pub fn grid_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step * self.step
    }

    /// Interior points strictly above their eight neighbours and above
    /// `rel_floor` times the grid maximum, sorted by decreasing value.
    pub fn local_maxima(&self, rel_floor: f64) -> Vec<QPeak> {
        let (nr, ni) = (self.alpha_re.len(), self.alpha_im.len());
        let floor = rel_floor * self.max();
        let mut out = Vec::new();
        for i in 1..ni.saturating_sub(1) {
            for j in 1..nr.saturating_sub(1) {
                let v = self.get(i, j);
                if v <= floor {
                    continue;
                }
                let is_max = (-1i64..=1).all(|di| {
                    (-1i64..=1).all(|dj| {
                        (di == 0 && dj == 0)
                            || v > self.get((i as i64 + di) as usize, (j as i64 + dj) as usize)
                    })
                });
                if is_max {
                    out.push(QPeak { alpha_re: self.alpha_re[j], alpha_im: self.alpha_im[i], value: v });
                }
            }
        }
        out.sort_by(|a, b| b.value.total_cmp(&a.value));
        out
    }

    /// CSV with header `alpha_re,alpha_im,q`, rows ordered by α_i then α_r.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "alpha_re,alpha_im,q")?;
        for (i, ai) in self.alpha_im.iter().enumerate() {
            for (j, ar) in self.alpha_re.iter().enumerate() {
                writeln!(w, "{ar},{ai},{}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Husimi function of the motional state with the ion traced out. Probes are
/// full q-coherent states projected onto the truncated basis.
pub fn q_function(s: &AmplitudeState, axes: &QAxes, d: DeformationParam) -> Result<QGrid> {
    axes.validate()?;
    let n_max = s.n_max();
    let (re, im) = (axes.re_axis(), axes.im_axis());
    let values: Vec<f64> = im
        .par_iter()
        .flat_map_iter(|&ai| {
            let re = &re;
            re.iter().map(move |&ar| {
                let c = coherent_projection(C64::new(ar, ai), d, n_max);
                let og: C64 = c.iter().zip(&s.g).map(|(c, g)| c.conj() * g).sum();
                let oe: C64 = c.iter().zip(&s.e).map(|(c, e)| c.conj() * e).sum();
                (og.norm_sqr() + oe.norm_sqr()) / PI
            })
        })
        .collect();
    Ok(QGrid { alpha_re: re, alpha_im: im, step: axes.step, values })
}
