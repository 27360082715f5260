use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::run::SweepRecord;
use crate::bits::BitBudgetModel;
use crate::error::{Error, Result};
use crate::helmholtz::{detect_knee, fit_curve, q_to_quality, noise_bits_estimate, CurvePoint, NoiseBits};

/// Minimum number of quality points for a knee.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Image,
    Audio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub quality: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub bits_per_pixel: f64,
    pub mean_accuracy: f64,
    pub mean_epochs: f64,
    /// Successful runs averaged into this point.
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSummary {
    pub arch: String,
    pub params: usize,
    /// Sorted by `Q`.
    pub points: Vec<SummaryPoint>,
    /// Scale of `c · ln(100 − 100·Q)` fitted on points at or below the knee.
    pub c: Option<f64>,
    pub fit_points: usize,
    pub q_knee: Option<f64>,
    /// JPEG quality at the knee (image sweeps).
    pub quality_knee: Option<u8>,
    pub noise_bits: Option<NoiseBits>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub domain: Domain,
    pub knee_tolerance: f64,
    pub archs: Vec<ArchSummary>,
}

impl SummaryReport {
    /// Fitted `c` per architecture, for plot overlays.
    pub fn fitted_scales(&self) -> BTreeMap<String, f64> {
        self.archs.iter().filter_map(|a| Some((a.arch.clone(), a.c?))).collect()
    }
}

fn points_for(records: &[&SweepRecord]) -> Vec<SummaryPoint> {
    let mut by_q: BTreeMap<u64, Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        by_q.entry(r.q.to_bits()).or_default().push(r);
    }
    let mut pts: Vec<SummaryPoint> = by_q
        .into_values()
        .filter_map(|rs| {
            let ok: Vec<&&SweepRecord> = rs.iter().filter(|r| r.status.is_ok() && r.test_accuracy.is_some()).collect();
            if ok.is_empty() {
                return None;
            }
            let n = ok.len() as f64;
            Some(SummaryPoint {
                quality: rs[0].quality,
                q: rs[0].q,
                bits_per_pixel: rs[0].bits_per_pixel,
                mean_accuracy: ok.iter().map(|r| r.test_accuracy.unwrap()).sum::<f64>() / n,
                mean_epochs: ok.iter().map(|r| r.epochs_to_converge.unwrap_or(0) as f64).sum::<f64>() / n,
                runs: ok.len(),
            })
        })
        .collect();
    pts.sort_by(|a, b| a.q.total_cmp(&b.q));
    pts
}

fn summarize_arch(arch: &str, records: &[&SweepRecord], domain: Domain, tau: f64, budget: &BitBudgetModel) -> Result<ArchSummary> {
    let points = points_for(records);
    let mut s = ArchSummary {
        arch: arch.to_string(),
        params: records.iter().map(|r| r.params).max().unwrap_or(0),
        points,
        c: None,
        fit_points: 0,
        q_knee: None,
        quality_knee: None,
        noise_bits: None,
        note: None,
    };
    if s.points.len() < MIN_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_POINTS, got: s.points.len() });
    }
    let curve: Vec<CurvePoint> = s.points.iter().map(|p| CurvePoint::new(p.q, p.mean_accuracy)).collect();
    let knee = detect_knee(&curve, tau)?;
    s.q_knee = Some(knee);
    let mut plateau: Vec<CurvePoint> = curve.iter().copied().filter(|p| p.q <= knee).collect();
    if plateau.len() < 2 {
        plateau = curve.clone();
        s.note = Some("knee at the first point; c fitted on every point".into());
    }
    s.c = Some(fit_curve(&plateau)?);
    s.fit_points = plateau.len();
    if domain == Domain::Image {
        let qk = q_to_quality(knee);
        s.quality_knee = Some(qk);
        s.noise_bits = Some(noise_bits_estimate(qk, budget)?);
    }
    Ok(s)
}

fn group(records: &[SweepRecord]) -> Vec<(String, Vec<&SweepRecord>)> {
    let mut order: Vec<String> = Vec::new();
    let mut map: BTreeMap<&str, Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        if !map.contains_key(r.arch.as_str()) {
            order.push(r.arch.clone());
        }
        map.entry(&r.arch).or_default().push(r);
    }
    order.into_iter().map(|a| { let v = map[a.as_str()].clone(); (a, v) }).collect()
}

/// Per-architecture curve fit, knee and noise-bit split.
///
/// Fails unless every architecture has at least [`MIN_POINTS`] qualities with
/// a successful run.
pub fn summarize(records: &[SweepRecord], domain: Domain, tau: f64, budget: &BitBudgetModel) -> Result<SummaryReport> {
    if records.is_empty() {
        return Err(Error::InsufficientPoints { needed: MIN_POINTS, got: 0 });
    }
    let archs = group(records)
        .into_iter()
        .map(|(a, rs)| summarize_arch(&a, &rs, domain, tau, budget))
        .collect::<Result<_>>()?;
    Ok(SummaryReport { domain, knee_tolerance: tau, archs })
}

/// Like [`summarize`], but an architecture that cannot be summarized keeps
/// its averaged points and records the reason in `note`.
pub fn summarize_lenient(records: &[SweepRecord], domain: Domain, tau: f64, budget: &BitBudgetModel) -> SummaryReport {
    let archs = group(records)
        .into_iter()
        .map(|(a, rs)| {
            summarize_arch(&a, &rs, domain, tau, budget).unwrap_or_else(|e| ArchSummary {
                arch: a.clone(),
                params: rs.iter().map(|r| r.params).max().unwrap_or(0),
                points: points_for(&rs),
                c: None,
                fit_points: 0,
                q_knee: None,
                quality_knee: None,
                noise_bits: None,
                note: Some(e.to_string()),
            })
        })
        .collect();
    SummaryReport { domain, knee_tolerance: tau, archs }
}

pub fn write_summary_csv<W: std::io::Write>(report: &SummaryReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["arch", "quality", "Q", "bits_per_pixel", "mean_accuracy", "mean_epochs", "runs"])?;
    for a in &report.archs {
        for p in &a.points {
            w.write_record([
                a.arch.clone(),
                format!("{}", p.quality),
                format!("{}", p.q),
                format!("{:.6}", p.bits_per_pixel),
                format!("{:.6}", p.mean_accuracy),
                format!("{:.3}", p.mean_epochs),
                p.runs.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
