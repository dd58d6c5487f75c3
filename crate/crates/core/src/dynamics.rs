//! Coupled amplitude equations for `Ψ(t) = Σ g_m|g,m> + Σ e_m|e,m>` and their
//! time integration.
//!
//! The generator is the Hermitian matrix `H` with `i d/dt (g; e) = H (g; e)`:
//!
//! ```text
//! H = [ diag((ω/2)([m+1]+[m]) - Δ/2)        (1/2) F†            ]
//!     [ (1/2) F                    diag((ω/2)([m+1]+[m]) + Δ/2) ]
//! ```
//!
//! Integration is classical fourth-order Runge-Kutta with a fixed step. The
//! default [`Scheme::InteractionPicture`] applies RK4 to the amplitudes in
//! the frame of the diagonal part of `H`, re-anchored at the start of every
//! step. Diagonal phases up to `ω (n_max + 1)` are then carried exactly and
//! only the coupling and the detunings between coupled levels must be
//! resolved by `dt`. [`Scheme::Lab`] is plain RK4 on `H` and is only stable
//! when `dt · max|H|` is small.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::interaction::CouplingMatrix;
use crate::qalgebra::{coherent_amplitudes, q_number, DeformationParam};
use crate::{Error, Result};

/// Largest allowed `ω̄ · dt`.
pub const STEP_GUARD: f64 = 0.05;
/// Default physical step.
pub const DEFAULT_DT: f64 = 5e-4;
/// Norm drift that aborts an evolution.
pub const NORM_ABORT: f64 = 1e-6;
/// Tail occupancy above which a truncation warning is raised.
pub const TAIL_WARN: f64 = 1e-6;

/// Dimensionless system parameters (all frequencies in units of `Ω`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    pub omega_bar: f64,
    pub delta_bar: f64,
    pub epsilon: f64,
    pub beta: C64,
    pub phi: f64,
    #[serde(rename = "tau")]
    pub deformation: DeformationParam,
    pub n_max: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega_bar: 50.0,
            delta_bar: -50.0,
            epsilon: 0.05,
            beta: C64::new(4.0, 0.0),
            phi: 0.0,
            deformation: DeformationParam::harmonic(),
            n_max: 32,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_bar, self.delta_bar, self.epsilon, self.beta.re, self.beta.im, self.phi];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        if self.omega_bar <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega_bar must be positive, got {}",
                self.omega_bar
            )));
        }
        Ok(())
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        self.deformation = DeformationParam::new(tau)?;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: C64) -> Self {
        self.beta = beta;
        self
    }
}

/// Amplitudes `g_m`, `e_m` for `m = 0..=n_max` at physical time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub g: Vec<C64>,
    pub e: Vec<C64>,
    pub t: f64,
}

impl AmplitudeState {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            g: vec![C64::new(0.0, 0.0); n_max + 1],
            e: vec![C64::new(0.0, 0.0); n_max + 1],
            t: 0.0,
        }
    }

    pub fn n_max(&self) -> usize {
        self.g.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.g.iter().chain(&self.e).map(|c| c.norm_sqr()).sum()
    }

    /// Occupation of the three highest Fock levels, both ionic states.
    pub fn tail_occupancy(&self) -> f64 {
        let start = self.g.len().saturating_sub(3);
        self.g[start..].iter().chain(&self.e[start..]).map(|c| c.norm_sqr()).sum()
    }

    /// `a·self + b·other` at `self.t`.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Self {
        let mix = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        Self { g: mix(&self.g, &other.g), e: mix(&self.e, &other.e), t: self.t }
    }

    fn to_vec(&self) -> Vec<C64> {
        self.g.iter().chain(&self.e).copied().collect()
    }

    fn from_vec(v: &[C64], t: f64) -> Self {
        let dim = v.len() / 2;
        Self { g: v[..dim].to_vec(), e: v[dim..].to_vec(), t }
    }
}

/// The Hermitian generator `H`, kept as its diagonal plus the two coupling
/// blocks.
#[derive(Debug, Clone)]
pub struct Generator {
    n_max: usize,
    omega_bar: f64,
    /// `[g block; e block]` diagonal energies.
    diag: Vec<f64>,
    /// Row `m` of the g-block coupling: `(1/2)(F†)_{mn}`, row-major.
    ground_coupling: Vec<C64>,
    /// Row `m` of the e-block coupling: `(1/2)F_{mn}`, row-major.
    excited_coupling: Vec<C64>,
}

/// Builds `H` from the system parameters and a coupling matrix of the same
/// size, `ε` and `τ`.
pub fn build_generator(p: &SystemParams, f: &CouplingMatrix) -> Result<Generator> {
    p.validate()?;
    if f.n_max() != p.n_max {
        return Err(Error::DimensionMismatch { expected: p.n_max, found: f.n_max() });
    }
    if f.epsilon() != p.epsilon || f.deformation() != p.deformation {
        return Err(Error::InvalidParameter(
            "coupling matrix was built with a different epsilon or tau".into(),
        ));
    }
    let dim = p.n_max + 1;
    let d = p.deformation;
    let mut diag = vec![0.0; 2 * dim];
    for m in 0..dim {
        let trap = 0.5 * p.omega_bar * (q_number((m + 1) as f64, d) + q_number(m as f64, d));
        diag[m] = trap - 0.5 * p.delta_bar;
        diag[dim + m] = trap + 0.5 * p.delta_bar;
    }
    let mut ground_coupling = vec![C64::new(0.0, 0.0); dim * dim];
    let mut excited_coupling = vec![C64::new(0.0, 0.0); dim * dim];
    for m in 0..dim {
        for n in 0..dim {
            ground_coupling[m * dim + n] = 0.5 * f.adjoint(m, n);
            excited_coupling[m * dim + n] = 0.5 * f.get(m, n);
        }
    }
    Ok(Generator { n_max: p.n_max, omega_bar: p.omega_bar, diag, ground_coupling, excited_coupling })
}

impl Generator {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Dense row-major `H` of size `2(n_max+1)`.
    pub fn hamiltonian(&self) -> Vec<C64> {
        let half = self.n_max + 1;
        let dim = 2 * half;
        let mut h = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            h[i * dim + i] = C64::new(self.diag[i], 0.0);
        }
        for m in 0..half {
            for n in 0..half {
                h[m * dim + half + n] = self.ground_coupling[m * half + n];
                h[(half + m) * dim + n] = self.excited_coupling[m * half + n];
            }
        }
        h
    }

    /// `out = -i C v` where `C` is the off-diagonal (coupling) part of `H`.
    fn apply_coupling(&self, v: &[C64], out: &mut [C64]) {
        let half = self.n_max + 1;
        let (vg, ve) = v.split_at(half);
        let (og, oe) = out.split_at_mut(half);
        block_matvec(&self.ground_coupling, ve, og);
        block_matvec(&self.excited_coupling, vg, oe);
        for o in out.iter_mut() {
            *o = C64::new(o.im, -o.re);
        }
    }

    /// `out = -i H v`.
    fn apply_full(&self, v: &[C64], out: &mut [C64]) {
        self.apply_coupling(v, out);
        for ((o, x), d) in out.iter_mut().zip(v).zip(&self.diag) {
            *o += C64::new(x.im * d, -x.re * d);
        }
    }

    /// `H v`.
    pub fn apply(&self, s: &AmplitudeState) -> AmplitudeState {
        let v = s.to_vec();
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        self.apply_full(&v, &mut out);
        let hv: Vec<C64> = out.iter().map(|c| C64::new(-c.im, c.re)).collect();
        AmplitudeState::from_vec(&hv, s.t)
    }

    /// `<Ψ|H|Ψ>`.
    pub fn energy(&self, s: &AmplitudeState) -> f64 {
        let hv = self.apply(s);
        s.g.iter()
            .chain(&s.e)
            .zip(hv.g.iter().chain(&hv.e))
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

#[inline]
fn block_matvec(block: &[C64], v: &[C64], out: &mut [C64]) {
    let n = v.len();
    for (row, o) in block.chunks_exact(n).zip(out.iter_mut()) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (a, x) in row.iter().zip(v) {
            re += a.re * x.re - a.im * x.im;
            im += a.re * x.im + a.im * x.re;
        }
        *o = C64::new(re, im);
    }
}

/// `(|g,β>_q + e^{iφ}|e,-β>_q)/√2` at `t = 0`.
pub fn initial_cat_state(p: &SystemParams) -> AmplitudeState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phase = C64::from_polar(1.0, p.phi);
    let plus = coherent_amplitudes(p.beta, p.deformation, p.n_max);
    let minus = coherent_amplitudes(-p.beta, p.deformation, p.n_max);
    AmplitudeState {
        g: plus.iter().map(|c| c * s).collect(),
        e: minus.iter().map(|c| c * phase * s).collect(),
        t: 0.0,
    }
}

/// Which component of the cat evolves alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `|g, β>_q`
    Ground,
    /// `|e, -β>_q`
    Excited,
}

impl Branch {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Branch::Ground),
            2 => Ok(Branch::Excited),
            _ => Err(Error::InvalidParameter(format!("branch index must be 1 or 2, got {i}"))),
        }
    }
}

pub fn initial_branch_state(branch: Branch, p: &SystemParams) -> AmplitudeState {
    let mut s = AmplitudeState::zeros(p.n_max);
    match branch {
        Branch::Ground => s.g = coherent_amplitudes(p.beta, p.deformation, p.n_max),
        Branch::Excited => s.e = coherent_amplitudes(-p.beta, p.deformation, p.n_max),
    }
    s
}

/// Integration scheme; both are classical RK4 with a fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// RK4 in the frame of the diagonal part of `H`, re-anchored each step.
    #[default]
    InteractionPicture,
    /// RK4 directly on `H`.
    Lab,
}

/// States on a time grid with run diagnostics.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub states: Vec<AmplitudeState>,
    /// Largest `|‖Ψ(t)‖² - ‖Ψ(0)‖²| / ‖Ψ(0)‖²` over the grid.
    pub max_norm_drift: f64,
    /// Largest `|E(t) - E(0)| / |E(0)|` over the grid.
    pub max_energy_drift: f64,
    /// Largest occupation of the top three Fock levels over the grid.
    pub max_tail_occupancy: f64,
    /// Number of RK4 steps taken.
    pub steps: u64,
}

impl Evolution {
    pub fn tail_warning(&self) -> bool {
        self.max_tail_occupancy >= TAIL_WARN
    }
}

/// Integrates from `s0` through every point of `t_grid` (physical time).
///
/// `t_grid` must start at `s0.t` and increase strictly. Each interval is cut
/// into the fewest equal substeps no longer than `dt`, so the states land
/// exactly on the grid. The norm is never renormalized.
pub fn evolve(s0: &AmplitudeState, g: &Generator, t_grid: &[f64], dt: f64) -> Result<Evolution> {
    evolve_with(s0, g, t_grid, dt, Scheme::default())
}

pub fn evolve_with(
    s0: &AmplitudeState,
    g: &Generator,
    t_grid: &[f64],
    dt: f64,
    scheme: Scheme,
) -> Result<Evolution> {
    if s0.n_max() != g.n_max {
        return Err(Error::DimensionMismatch { expected: g.n_max, found: s0.n_max() });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if g.omega_bar * dt > STEP_GUARD * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "step guard violated: omega_bar * dt = {} > {STEP_GUARD}",
            g.omega_bar * dt
        )));
    }
    match t_grid.first() {
        None => return Err(Error::InvalidParameter("empty time grid".into())),
        Some(&t0) if (t0 - s0.t).abs() > 1e-12 * (1.0 + s0.t.abs()) => {
            return Err(Error::InvalidParameter(format!(
                "time grid starts at {t0}, state is at {}",
                s0.t
            )))
        }
        _ => {}
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }

    let mut stepper = Stepper::new(g, scheme);
    let mut y = s0.to_vec();
    let norm0 = s0.norm_sqr();
    let energy0 = g.energy(s0);
    let mut out = Evolution {
        states: Vec::with_capacity(t_grid.len()),
        max_norm_drift: 0.0,
        max_energy_drift: 0.0,
        max_tail_occupancy: s0.tail_occupancy(),
        steps: 0,
    };
    out.states.push(AmplitudeState { t: t_grid[0], ..s0.clone() });

    let intervals: Vec<Interval> = t_grid.windows(2).map(|w| Interval::new(w[1] - w[0], dt)).collect();
    let mut cache = PropagatorCache::new(&intervals, g.dim());
    let mut tmp = vec![C64::new(0.0, 0.0); y.len()];

    for (w, iv) in t_grid.windows(2).zip(&intervals) {
        match cache.get(iv, &mut stepper) {
            Some(m) => {
                block_matvec(m, &y, &mut tmp);
                std::mem::swap(&mut y, &mut tmp);
            }
            None => {
                stepper.set_step(iv.h);
                for _ in 0..iv.n_sub {
                    stepper.step(&mut y);
                }
            }
        }
        out.steps += iv.n_sub;

        let s = AmplitudeState::from_vec(&y, w[1]);
        let norm = s.norm_sqr();
        let drift = if norm0 > 0.0 { (norm - norm0).abs() / norm0 } else { norm };
        if drift > NORM_ABORT || !drift.is_finite() {
            return Err(Error::NormDrift { drift, t: w[1], limit: NORM_ABORT });
        }
        out.max_norm_drift = out.max_norm_drift.max(drift);
        let energy = g.energy(&s);
        let e_drift = (energy - energy0).abs() / energy0.abs().max(f64::MIN_POSITIVE);
        out.max_energy_drift = out.max_energy_drift.max(e_drift);
        out.max_tail_occupancy = out.max_tail_occupancy.max(s.tail_occupancy());
        out.states.push(s);
    }
    Ok(out)
}

/// One grid interval cut into `n_sub` equal RK4 steps of length `h`.
#[derive(Debug, Clone, Copy)]
struct Interval {
    n_sub: u64,
    h: f64,
}

impl Interval {
    fn new(span: f64, dt: f64) -> Self {
        let n_sub = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        Interval { n_sub, h: span / n_sub as f64 }
    }

    fn same(&self, other: &Interval) -> bool {
        self.n_sub == other.n_sub && (self.h - other.h).abs() <= 1e-12 * self.h
    }
}

/// The RK4 step map is linear and time independent, so `n_sub` steps over a
/// repeated interval collapse into one dense matrix. It is built column by
/// column by stepping basis vectors, and pays off once an interval recurs
/// more often than the state dimension.
struct PropagatorCache {
    groups: Vec<(Interval, usize, Option<Vec<C64>>)>,
    dim: usize,
}

impl PropagatorCache {
    fn new(intervals: &[Interval], dim: usize) -> Self {
        let mut groups: Vec<(Interval, usize, Option<Vec<C64>>)> = Vec::new();
        for iv in intervals {
            match groups.iter_mut().find(|g| g.0.same(iv)) {
                Some(g) => g.1 += 1,
                None => groups.push((*iv, 1, None)),
            }
        }
        PropagatorCache { groups, dim }
    }

    fn get(&mut self, iv: &Interval, stepper: &mut Stepper) -> Option<&[C64]> {
        let dim = self.dim;
        let group = self.groups.iter_mut().find(|g| g.0.same(iv))?;
        if group.1 <= dim {
            return None;
        }
        if group.2.is_none() {
            let rep = group.0;
            stepper.set_step(rep.h);
            let mut m = vec![C64::new(0.0, 0.0); dim * dim];
            let mut col = vec![C64::new(0.0, 0.0); dim];
            for j in 0..dim {
                col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
                col[j] = C64::new(1.0, 0.0);
                for _ in 0..rep.n_sub {
                    stepper.step(&mut col);
                }
                for i in 0..dim {
                    m[i * dim + j] = col[i];
                }
            }
            group.2 = Some(m);
        }
        group.2.as_deref()
    }
}

/// Scratch buffers and cached phase factors for one step size.
struct Stepper<'a> {
    g: &'a Generator,
    scheme: Scheme,
    h: f64,
    half_phase: Vec<C64>,
    full_phase: Vec<C64>,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl<'a> Stepper<'a> {
    fn new(g: &'a Generator, scheme: Scheme) -> Self {
        let dim = g.dim();
        let zero = || vec![C64::new(0.0, 0.0); dim];
        Self {
            g,
            scheme,
            h: f64::NAN,
            half_phase: zero(),
            full_phase: zero(),
            k: [zero(), zero(), zero(), zero()],
            tmp: zero(),
        }
    }

    fn set_step(&mut self, h: f64) {
        if h == self.h {
            return;
        }
        self.h = h;
        for (i, &d) in self.g.diag.iter().enumerate() {
            self.half_phase[i] = C64::from_polar(1.0, -0.5 * d * h);
            self.full_phase[i] = C64::from_polar(1.0, -d * h);
        }
    }

    fn step(&mut self, y: &mut [C64]) {
        match self.scheme {
            Scheme::InteractionPicture => self.step_interaction(y),
            Scheme::Lab => self.step_lab(y),
        }
    }

    // RK4 on w(s) = E(-s) y(t_n + s), E(s) = exp(-i D s), mapped back to y.
    fn step_interaction(&mut self, y: &mut [C64]) {
        let h = self.h;
        let g = self.g;
        let (e2, e1) = (&self.half_phase, &self.full_phase);
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;

        g.apply_coupling(y, k1);
        for i in 0..y.len() {
            tmp[i] = e2[i] * (y[i] + 0.5 * h * k1[i]);
        }
        g.apply_coupling(tmp, k2);
        for i in 0..y.len() {
            tmp[i] = e2[i] * y[i] + 0.5 * h * k2[i];
        }
        g.apply_coupling(tmp, k3);
        for i in 0..y.len() {
            tmp[i] = e1[i] * y[i] + h * e2[i] * k3[i];
        }
        g.apply_coupling(tmp, k4);
        let sixth = h / 6.0;
        for i in 0..y.len() {
            y[i] = e1[i] * (y[i] + sixth * k1[i]) + sixth * (2.0 * e2[i] * (k2[i] + k3[i]) + k4[i]);
        }
    }

    fn step_lab(&mut self, y: &mut [C64]) {
        let h = self.h;
        let g = self.g;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;

        g.apply_full(y, k1);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        g.apply_full(tmp, k2);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        g.apply_full(tmp, k3);
        for i in 0..y.len() {
            tmp[i] = y[i] + h * k3[i];
        }
        g.apply_full(tmp, k4);
        let sixth = h / 6.0;
        for i in 0..y.len() {
            y[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::fq_matrix;
    use crate::qalgebra::trap_level_energy;

    fn params(tau: f64, eps: f64, beta: f64, n_max: usize) -> SystemParams {
        SystemParams { epsilon: eps, beta: C64::new(beta, 0.0), n_max, ..Default::default() }
            .with_tau(tau)
            .unwrap()
    }

    fn generator(p: &SystemParams) -> Generator {
        build_generator(p, &fq_matrix(p.n_max, p.epsilon, p.deformation).unwrap()).unwrap()
    }

    #[test]
    fn generator_is_hermitian() {
        let p = params(0.0047, 0.05, 3.0, 12);
        let g = generator(&p);
        let h = g.hamiltonian();
        let dim = g.dim();
        for i in 0..dim {
            for j in 0..dim {
                assert_eq!(h[i * dim + j], h[j * dim + i].conj());
            }
        }
    }

    #[test]
    fn generator_diagonal_and_sideband_resonance() {
        let p = params(0.0, 0.05, 4.0, 32);
        let g = generator(&p);
        let half = 33;
        for m in 0..half {
            let trap = trap_level_energy(m, 50.0, p.deformation);
            assert_eq!(g.diagonal()[m], trap + 25.0);
            assert_eq!(g.diagonal()[half + m], trap - 25.0);
        }
        // with Δ̄ = -ω̄ the degenerate pairs are |g,m> and |e,m+1>
        for m in 0..half - 1 {
            assert_eq!(g.diagonal()[m], g.diagonal()[half + m + 1]);
            assert!((g.diagonal()[m + 1] - g.diagonal()[half + m]).abs() == 100.0);
        }
    }

    #[test]
    fn mismatched_coupling_is_rejected() {
        let p = params(0.0, 0.05, 4.0, 32);
        let f = fq_matrix(16, 0.05, p.deformation).unwrap();
        assert!(matches!(build_generator(&p, &f), Err(Error::DimensionMismatch { .. })));
        let f = fq_matrix(32, 0.05, DeformationParam::new(0.004).unwrap()).unwrap();
        assert!(build_generator(&p, &f).is_err());
    }

    #[test]
    fn initial_states() {
        let p = params(0.0, 0.05, 0.0, 8);
        let cat = initial_cat_state(&p);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((cat.g[0] - C64::new(s, 0.0)).norm() < 1e-16);
        assert!((cat.e[0] - C64::new(s, 0.0)).norm() < 1e-16);
        assert!(cat.g[1..].iter().chain(&cat.e[1..]).all(|c| c.norm() == 0.0));

        let p = params(0.0, 0.05, 4.0, 32);
        let cat = initial_cat_state(&p);
        assert!((cat.norm_sqr() - 1.0).abs() < 1e-14);
        let pg: f64 = cat.g.iter().map(|c| c.norm_sqr()).sum();
        assert!((pg - 0.5).abs() < 1e-14);
        let peak = (0..=32).max_by(|&a, &b| cat.g[a].norm().total_cmp(&cat.g[b].norm())).unwrap();
        assert!(peak == 15 || peak == 16);
        assert!((cat.g[16].norm() - cat.g[15].norm()).abs() < 1e-15);

        let b1 = initial_branch_state(Branch::Ground, &p);
        let b2 = initial_branch_state(Branch::Excited, &p);
        assert!((b1.g.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((b2.e.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-14);
        for m in 0..=32 {
            let avg_g = 0.5 * (b1.g[m].norm_sqr() + b2.g[m].norm_sqr());
            let avg_e = 0.5 * (b1.e[m].norm_sqr() + b2.e[m].norm_sqr());
            assert!((avg_g - cat.g[m].norm_sqr()).abs() < 1e-16);
            assert!((avg_e - cat.e[m].norm_sqr()).abs() < 1e-16);
        }
        assert!(Branch::from_index(3).is_err());
    }

    /// Exact `exp(-iHt) (1, 0)ᵀ` for `H = [[a, c], [c, b]]` with real `c`.
    fn two_level(a: f64, b: f64, c: f64, t: f64) -> (C64, C64) {
        let mean = 0.5 * (a + b);
        let half_gap = 0.5 * (a - b);
        let w = (half_gap * half_gap + c * c).sqrt();
        let global = C64::from_polar(1.0, -mean * t);
        let upper = C64::new((w * t).cos(), -half_gap / w * (w * t).sin());
        let lower = C64::new(0.0, -c / w * (w * t).sin());
        (global * upper, global * lower)
    }

    #[test]
    fn zero_epsilon_is_carrier_only() {
        // F = 1 at ε = 0: every m is an isolated pair |g,m> <-> |e,m>
        let p = params(0.004, 0.0, 2.0, 16);
        let g = generator(&p);
        let s0 = initial_branch_state(Branch::Ground, &p);
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.7).collect();
        let ev = evolve(&s0, &g, &grid, 5e-4).unwrap();
        for s in &ev.states {
            for m in 0..=16 {
                let occ = s.g[m].norm_sqr() + s.e[m].norm_sqr();
                assert!((occ - s0.g[m].norm_sqr()).abs() < 1e-12);
            }
        }
        let last = ev.states.last().unwrap();
        let t = *grid.last().unwrap();
        for m in [0, 4, 9] {
            let (up, low) = two_level(g.diagonal()[m], g.diagonal()[17 + m], 0.5, t);
            let dg = (last.g[m] - s0.g[m] * up).norm(); assert!(dg < 1e-9, "m={m} dg={dg:e}");
            assert!((last.e[m] - s0.g[m] * low).norm() < 1e-9, "m={m}");
        }
        // off-resonant carrier: P_e stays below 4c²/(δ² + 4c²)
        let bound = 1.0 / (50.0f64.powi(2) + 1.0);
        for s in &ev.states {
            let pe: f64 = s.e.iter().map(|c| c.norm_sqr()).sum();
            assert!(pe <= bound * (1.0 + 1e-9));
        }
    }

    #[test]
    fn lab_and_interaction_match_exact_two_level() {
        let p = params(0.0, 0.0, 0.0, 4);
        let g = generator(&p);
        let mut single = AmplitudeState::zeros(4);
        single.g[0] = C64::new(1.0, 0.0);
        let (up, low) = two_level(g.diagonal()[0], g.diagonal()[5], 0.5, 1.3);
        for (scheme, dt) in [(Scheme::InteractionPicture, 5e-4), (Scheme::Lab, 2e-4)] {
            let ev = evolve_with(&single, &g, &[0.0, 1.3], dt, scheme).unwrap();
            let dg = (ev.states[1].g[0] - up).norm();
            assert!(dg < 2e-8, "{scheme:?} dg={dg:e}");
            assert!((ev.states[1].e[0] - low).norm() < 2e-8, "{scheme:?}");
        }
    }

    #[test]
    fn composed_propagator_matches_stepping() {
        let p = params(0.004, 0.05, 1.5, 6);
        let g = generator(&p);
        let s0 = initial_cat_state(&p);
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.3).collect();
        // 40 equal intervals > dim 14: the cached matrix is used
        let fast = evolve(&s0, &g, &grid, 5e-4).unwrap();
        let mut s = s0.clone();
        for w in grid.windows(2) {
            s = evolve(&s, &g, w, 5e-4).unwrap().states.pop().unwrap();
        }
        let last = fast.states.last().unwrap();
        let diff = s.combine(C64::new(1.0, 0.0), last, C64::new(-1.0, 0.0)).norm_sqr().sqrt();
        assert!(diff < 1e-12, "diff={diff:e}");
        assert_eq!(fast.steps, 40 * 600);
    }

    #[test]
    fn guards() {
        let p = params(0.0, 0.05, 2.0, 8);
        let g = generator(&p);
        let s0 = initial_cat_state(&p);
        assert!(evolve(&s0, &g, &[0.0, 1.0], 2e-3).is_err());
        assert!(evolve(&s0, &g, &[0.5, 1.0], 5e-4).is_err());
        assert!(evolve(&s0, &g, &[0.0, 1.0, 1.0], 5e-4).is_err());
        assert!(evolve(&s0, &g, &[], 5e-4).is_err());
        assert!(evolve(&AmplitudeState::zeros(4), &g, &[0.0, 1.0], 5e-4).is_err());
    }

    #[test]
    fn lab_frame_drift_is_caught() {
        // fast diagonal phases |ω̄ (n + ½)| dt ~ 0.8 make lab-frame RK4 lossy
        let p = params(0.0, 0.05, 4.0, 32);
        let g = generator(&p);
        let s0 = initial_cat_state(&p);
        let err = evolve_with(&s0, &g, &[0.0, 200.0], 5e-4, Scheme::Lab).unwrap_err();
        assert!(matches!(err, Error::NormDrift { .. }), "{err}");
    }

    #[test]
    fn schemes_agree_with_small_step() {
        let p = params(0.0047, 0.05, 1.5, 10);
        let g = generator(&p);
        let s0 = initial_cat_state(&p);
        let grid = [0.0, 2.0];
        let a = evolve_with(&s0, &g, &grid, 5e-4, Scheme::InteractionPicture).unwrap();
        let b = evolve_with(&s0, &g, &grid, 4e-6, Scheme::Lab).unwrap();
        let (x, y) = (&a.states[1], &b.states[1]);
        let diff = x.g.iter().chain(&x.e).zip(y.g.iter().chain(&y.e)).map(|(p, q)| (p - q).norm());
        assert!(diff.fold(0.0, f64::max) < 1e-9);
    }

    #[test]
    fn lands_on_grid_and_counts_steps() {
        let p = params(0.0, 0.05, 2.0, 8);
        let g = generator(&p);
        let s0 = initial_cat_state(&p);
        let ev = evolve(&s0, &g, &[0.0, 0.001, 0.0013], 5e-4).unwrap();
        assert_eq!(ev.steps, 3);
        assert_eq!(ev.states[2].t, 0.0013);
    }

    #[test]
    fn linearity() {
        let p = params(0.004, 0.05, 3.0, 20);
        let g = generator(&p);
        let s1 = initial_branch_state(Branch::Ground, &p);
        let mut s2 = initial_branch_state(Branch::Excited, &p);
        s2.g[3] = C64::new(0.3, -0.2);
        let (a, b) = (C64::new(0.6, 0.1), C64::new(-0.2, 0.7));
        let grid = [0.0, 5.0, 10.0];
        let e1 = evolve(&s1, &g, &grid, 5e-4).unwrap();
        let e2 = evolve(&s2, &g, &grid, 5e-4).unwrap();
        let mixed = evolve(&s1.combine(a, &s2, b), &g, &grid, 5e-4).unwrap();
        let expect = e1.states[2].combine(a, &e2.states[2], b);
        let got = &mixed.states[2];
        for (x, y) in got.g.iter().chain(&got.e).zip(expect.g.iter().chain(&expect.e)) {
            assert!((x - y).norm() < 1e-9);
        }
    }
}
