//! Peak extraction from S(P), collapse/revival classification and the peak table.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakKind {
    Initial,
    Revival,
    Collapse,
    Unclassified,
}

impl fmt::Display for PeakKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeakKind::Initial => "initial",
            PeakKind::Revival => "revival",
            PeakKind::Collapse => "collapse",
            PeakKind::Unclassified => "unclassified",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub t_plot: f64,
    pub s_value: f64,
    pub kind: PeakKind,
    pub envelope_amplitude: f64,
}

/// Tunables of the peak pipeline, all in plotted-time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeakParams {
    pub smooth_window: f64,
    pub prominence: f64,
    pub envelope_window: f64,
    pub threshold: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams { smooth_window: 3.0, prominence: 0.02, envelope_window: 10.0, threshold: 0.05 }
    }
}

impl PeakParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.smooth_window >= 0.0
            && self.prominence > 0.0
            && self.envelope_window >= 0.0
            && self.threshold > 0.0
            && [self.smooth_window, self.prominence, self.envelope_window, self.threshold]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid peak parameters {self:?}")))
        }
    }
}

fn spacing(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Ok(0.0);
    }
    let h = t[1] - t[0];
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("time samples must increase".into()));
    }
    let uniform = t.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-6 * h.max(1.0));
    if !uniform {
        return Err(Error::InvalidParameter("time samples must be uniform".into()));
    }
    Ok(h)
}

fn half_width(window: f64, h: f64) -> usize {
    if h == 0.0 {
        0
    } else {
        (window / (2.0 * h)).round() as usize
    }
}

fn span(i: usize, w: usize, n: usize) -> std::ops::RangeInclusive<usize> {
    i.saturating_sub(w)..=(i + w).min(n - 1)
}

/// Running maximum over `±w` samples: the upper envelope of a fast oscillation.
pub fn upper_envelope(s: &[f64], w: usize) -> Vec<f64> {
    (0..s.len())
        .map(|i| s[span(i, w, s.len())].iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// Centered moving average over `±w` samples, truncated at the ends.
pub fn moving_average(s: &[f64], w: usize) -> Vec<f64> {
    let mut prefix = vec![0.0; s.len() + 1];
    for (i, v) in s.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..s.len())
        .map(|i| {
            let r = span(i, w, s.len());
            let (a, b) = (*r.start(), *r.end());
            (prefix[b + 1] - prefix[a]) / (b + 1 - a) as f64
        })
        .collect()
}

/// Interior local maxima with their topographic prominence. A flat top
/// counts once, at its middle sample.
pub fn prominent_maxima(y: &[f64]) -> Vec<(usize, f64)> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let peak = (i + j) / 2;
                let mut left_min = y[i];
                let mut k = i;
                while k > 0 {
                    k -= 1;
                    if y[k] > y[i] {
                        break;
                    }
                    left_min = left_min.min(y[k]);
                }
                let mut right_min = y[i];
                let mut k = j;
                while k + 1 < n {
                    k += 1;
                    if y[k] > y[i] {
                        break;
                    }
                    right_min = right_min.min(y[k]);
                }
                out.push((peak, y[i] - left_min.max(right_min)));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Peaks of S(P). The series is reduced to its upper envelope (running max
/// over `smooth_window`), smoothed by a moving average of the same width, and
/// maxima of the result with enough prominence are kept. Each peak reports the
/// raw maximum of S(P) within half a window. The first sample is always
/// returned as the `initial` record.
pub fn detect_peaks(t: &[f64], s: &[f64], smooth_window: f64, prominence: f64) -> Result<Vec<PeakRecord>> {
    if t.is_empty() || s.is_empty() {
        return Err(Error::EmptySeries);
    }
    if t.len() != s.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), found: s.len() });
    }
    if !(smooth_window >= 0.0) || !(prominence > 0.0) {
        return Err(Error::InvalidParameter("smooth_window >= 0 and prominence > 0 required".into()));
    }
    let w = half_width(smooth_window, spacing(t)?);
    let smooth = moving_average(&upper_envelope(s, w), w);
    let mut out = vec![PeakRecord {
        t_plot: t[0],
        s_value: s[0],
        kind: PeakKind::Initial,
        envelope_amplitude: 0.0,
    }];
    let mut last = 0;
    for (i, prom) in prominent_maxima(&smooth) {
        if prom < prominence {
            continue;
        }
        let r = span(i, w, s.len());
        let start = *r.start();
        let k = start
            + s[r]
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc })
                .0;
        if k == 0 || k == last {
            continue;
        }
        last = k;
        out.push(PeakRecord { t_plot: t[k], s_value: s[k], kind: PeakKind::Unclassified, envelope_amplitude: 0.0 });
    }
    Ok(out)
}

/// RMS of `I − mean(I)` over samples with `|t_k − t0| <= window`.
pub fn envelope_amplitude(t: &[f64], inversion: &[f64], t0: f64, window: f64) -> f64 {
    let vals: Vec<f64> = t
        .iter()
        .zip(inversion)
        .filter(|(tk, _)| (**tk - t0).abs() <= window + 1e-9)
        .map(|(_, v)| *v)
        .collect();
    if vals.is_empty() {
        return 0.0;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt()
}

/// Labels each peak by the inversion envelope around it. The `initial` record
/// keeps its label but gets its amplitude filled in.
pub fn classify_peaks(
    peaks: &[PeakRecord],
    t: &[f64],
    inversion: &[f64],
    window: f64,
    threshold: f64,
) -> Vec<PeakRecord> {
    peaks
        .iter()
        .map(|p| {
            let amp = envelope_amplitude(t, inversion, p.t_plot, window);
            let kind = if p.kind == PeakKind::Initial {
                PeakKind::Initial
            } else if (amp - threshold).abs() <= 0.2 * threshold {
                PeakKind::Unclassified
            } else if amp >= threshold {
                PeakKind::Revival
            } else {
                PeakKind::Collapse
            };
            PeakRecord { envelope_amplitude: amp, kind, ..*p }
        })
        .collect()
}

/// Lowest value of the S(P) upper envelope between each pair of consecutive
/// peaks, as `(t_left, t_right, floor)`.
pub fn inter_peak_floors(t: &[f64], s: &[f64], peaks: &[PeakRecord], smooth_window: f64) -> Result<Vec<(f64, f64, f64)>> {
    let w = half_width(smooth_window, spacing(t)?);
    let env = upper_envelope(s, w);
    let index = |tp: f64| t.partition_point(|&x| x < tp - 1e-9);
    Ok(peaks
        .windows(2)
        .map(|pair| {
            let (a, b) = (index(pair[0].t_plot), index(pair[1].t_plot));
            let floor = env[a..=b.min(env.len() - 1)].iter().cloned().fold(f64::INFINITY, f64::min);
            (pair[0].t_plot, pair[1].t_plot, floor)
        })
        .collect())
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn sci6(x: f64) -> String {
    let s = format!("{x:.5e}");
    let (m, e) = s.split_once('e').expect("exponent");
    format!("{}e{e}", trim_zeros(m))
}

/// `%.6g`-style formatting.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        return sci6(x);
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a seventh digit, e.g. 999999.7
    if s.replace(['-', '.'], "").trim_start_matches('0').len() > 6 {
        return sci6(x);
    }
    trim_zeros(&s).to_string()
}

/// Classified peaks with the derived summary numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakTable {
    pub records: Vec<PeakRecord>,
}

impl PeakTable {
    pub fn new(records: Vec<PeakRecord>) -> Self {
        PeakTable { records }
    }

    /// Detection plus classification with one parameter set.
    pub fn from_series(t: &[f64], s: &[f64], inversion: &[f64], p: &PeakParams) -> Result<Self> {
        p.validate()?;
        if inversion.len() != t.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), found: inversion.len() });
        }
        let raw = detect_peaks(t, s, p.smooth_window, p.prominence)?;
        Ok(PeakTable::new(classify_peaks(&raw, t, inversion, p.envelope_window, p.threshold)))
    }

    fn of_kind(&self, kind: PeakKind) -> impl Iterator<Item = &PeakRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    pub fn revival_maxima(&self) -> Vec<f64> {
        self.of_kind(PeakKind::Revival).map(|r| r.s_value).collect()
    }

    /// `None` with fewer than two revivals.
    pub fn revivals_decreasing(&self) -> Option<bool> {
        let v = self.revival_maxima();
        (v.len() >= 2).then(|| v.windows(2).all(|w| w[1] < w[0]))
    }

    /// Largest revival envelope over the mean collapse envelope.
    pub fn contrast(&self) -> Option<f64> {
        let rev = self.of_kind(PeakKind::Revival).map(|r| r.envelope_amplitude).fold(None, |m: Option<f64>, v| {
            Some(m.map_or(v, |m| m.max(v)))
        })?;
        let col: Vec<f64> = self.of_kind(PeakKind::Collapse).map(|r| r.envelope_amplitude).collect();
        if col.is_empty() {
            return None;
        }
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        (mean > 0.0).then(|| rev / mean)
    }

    /// CSV with header `t_plot,s_p,kind,envelope_amplitude`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_plot,s_p,kind,envelope_amplitude")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_sig6(r.t_plot),
                fmt_sig6(r.s_value),
                r.kind,
                fmt_sig6(r.envelope_amplitude)
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn verdict(&self) -> &'static str {
        match self.revivals_decreasing() {
            Some(true) => "revival maxima decrease monotonically",
            Some(false) => "revival maxima do not decrease monotonically",
            None => "fewer than two revivals",
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:>10}  {:>8}  {:<12}  {:>9}\n", "t", "S(P)", "kind", "envelope");
        for r in &self.records {
            out += &format!(
                "{:>10.1}  {:>8.3}  {:<12}  {:>9.4}\n",
                r.t_plot,
                r.s_value,
                r.kind.to_string(),
                r.envelope_amplitude
            );
        }
        out += self.verdict();
        out.push('\n');
        if let Some(c) = self.contrast() {
            out += &format!("contrast {c:.3}\n");
        }
        out
    }
}
