//! Segmentation, depth and photometric evaluation, plus the weighted loss sum.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mpi::{depth_to_disparity, DepthInput};
use crate::raster::{LabelMap, Raster};

/// One JSON metric line: `{metric, value, valid_pixels, params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    pub value: Value,
    pub valid_pixels: usize,
    pub params: Value,
}

impl MetricRecord {
    fn new(metric: &str, value: Value, valid_pixels: usize, params: Value) -> Self {
        MetricRecord {
            metric: metric.to_owned(),
            value,
            valid_pixels,
            params,
        }
    }
}

/// Rows are ground truth, columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        ConfusionMatrix {
            num_classes,
            counts: vec![0; num_classes * num_classes],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn count(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.num_classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, gt: usize) -> u64 {
        (0..self.num_classes).map(|p| self.count(gt, p)).sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        (0..self.num_classes).map(|g| self.count(g, pred)).sum()
    }

    /// Adds another tile's counts; merging is associative and commutative.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.num_classes != self.num_classes {
            return Err(Error::invalid(format!(
                "cannot merge confusion matrices over {} and {} classes",
                self.num_classes, other.num_classes
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

/// Accumulates `(gt, pred)` pairs. Pixels whose ground truth equals `ignore`
/// are skipped; every other label must be below `num_classes`.
pub fn confusion(
    pred: &LabelMap,
    gt: &LabelMap,
    num_classes: usize,
    ignore: Option<u32>,
) -> Result<ConfusionMatrix> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::invalid(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let mut cm = ConfusionMatrix::new(num_classes);
    let w = gt.width();
    for (i, (&p, &g)) in pred.labels().iter().zip(gt.labels()).enumerate() {
        if Some(g) == ignore {
            continue;
        }
        for label in [g, p] {
            if label as usize >= num_classes {
                return Err(Error::LabelOutOfRange {
                    x: i % w,
                    y: i / w,
                    label,
                    num_classes,
                });
            }
        }
        cm.counts[g as usize * num_classes + p as usize] += 1;
    }
    Ok(cm)
}

/// Class-averaged scores in percent. Classes absent from the ground truth
/// are `None` and excluded from the means.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationScores {
    pub mean_class_accuracy: f64,
    pub mean_iou: f64,
    pub per_class_accuracy: Vec<Option<f64>>,
    pub per_class_iou: Vec<Option<f64>>,
    pub evaluated_pixels: u64,
}

impl SegmentationScores {
    pub fn to_records(&self) -> Vec<MetricRecord> {
        let params = json!({
            "num_classes": self.per_class_iou.len(),
            "averaging": "class_mean_over_gt_present",
            "units": "percent",
            "per_class_accuracy": self.per_class_accuracy,
            "per_class_iou": self.per_class_iou,
        });
        let n = self.evaluated_pixels as usize;
        vec![
            MetricRecord::new("mean_class_accuracy", json!(self.mean_class_accuracy), n, params.clone()),
            MetricRecord::new("mean_iou", json!(self.mean_iou), n, params),
        ]
    }
}

pub fn class_accuracy_and_iou(cm: &ConfusionMatrix) -> Result<SegmentationScores> {
    let l = cm.num_classes;
    let mut acc = Vec::with_capacity(l);
    let mut iou = Vec::with_capacity(l);
    for c in 0..l {
        let row = cm.row_sum(c);
        if row == 0 {
            acc.push(None);
            iou.push(None);
            continue;
        }
        let tp = cm.count(c, c) as f64;
        let union = (row + cm.col_sum(c)) as f64 - tp;
        acc.push(Some(100.0 * tp / row as f64));
        iou.push(Some(100.0 * tp / union));
    }
    let present: Vec<usize> = (0..l).filter(|c| acc[*c].is_some()).collect();
    if present.is_empty() {
        return Err(Error::NoValidPixels);
    }
    let mean = |v: &[Option<f64>]| v.iter().flatten().sum::<f64>() / present.len() as f64;
    Ok(SegmentationScores {
        mean_class_accuracy: mean(&acc),
        mean_iou: mean(&iou),
        per_class_accuracy: acc,
        per_class_iou: iou,
        evaluated_pixels: cm.total(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthMetrics {
    pub sc_inv: f64,
    pub l1_rel: f64,
    pub l1_inv: f64,
    pub valid_pixel_count: usize,
}

impl DepthMetrics {
    pub fn to_records(&self, z_min: f64, z_max: f64) -> Vec<MetricRecord> {
        let params = json!({ "range": [z_min, z_max] });
        let n = self.valid_pixel_count;
        vec![
            MetricRecord::new("sc_inv", json!(self.sc_inv), n, params.clone()),
            MetricRecord::new("l1_rel", json!(self.l1_rel), n, params.clone()),
            MetricRecord::new("l1_inv", json!(self.l1_inv), n, params),
        ]
    }
}

/// Scale-invariant log error, relative L1 and inverse-depth L1 over the
/// pixels whose ground truth lies in `[z_min, z_max]`.
///
/// `sc_inv = sqrt(mean(e²) - mean(e)²)` with `e = ln pred - ln gt`, evaluated
/// as the square root of the centred second moment.
pub fn depth_metrics(pred: &Raster, gt: &Raster, z_min: f64, z_max: f64) -> Result<DepthMetrics> {
    if pred.dims() != gt.dims() || gt.channels() != 1 {
        return Err(Error::invalid(format!(
            "depth maps must be matching single-channel rasters, got {:?} and {:?}",
            pred.dims(),
            gt.dims()
        )));
    }
    if !(z_min <= z_max) {
        return Err(Error::invalid(format!("empty depth range [{z_min}, {z_max}]")));
    }
    let pairs: Vec<(f64, f64)> = pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(p, g)| (*p as f64, *g as f64))
        .filter(|(_, g)| *g >= z_min && *g <= z_max)
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoValidPixels);
    }
    let bad = pairs.iter().filter(|(p, g)| *p <= 0.0 || *g <= 0.0).count();
    if bad > 0 {
        return Err(Error::NonPositiveDepth { count: bad });
    }
    let n = pairs.len() as f64;
    let log_err: Vec<f64> = pairs.iter().map(|(p, g)| p.ln() - g.ln()).collect();
    let mean_e = log_err.iter().sum::<f64>() / n;
    let var = log_err.iter().map(|e| (e - mean_e).powi(2)).sum::<f64>() / n;
    Ok(DepthMetrics {
        sc_inv: var.max(0.0).sqrt(),
        l1_rel: pairs.iter().map(|(p, g)| (p - g).abs() / g).sum::<f64>() / n,
        l1_inv: pairs.iter().map(|(p, g)| (1.0 / p - 1.0 / g).abs()).sum::<f64>() / n,
        valid_pixel_count: pairs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    /// Identical images.
    Infinite,
}

impl Psnr {
    pub fn to_json(self) -> Value {
        match self {
            Psnr::Finite(v) => json!(v),
            Psnr::Infinite => json!("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photometric {
    pub l1: f64,
    pub mse: f64,
    pub psnr: Psnr,
    pub valid_pixels: usize,
}

impl Photometric {
    pub fn to_records(&self) -> Vec<MetricRecord> {
        let params = json!({ "peak": 1.0 });
        vec![
            MetricRecord::new("l1", json!(self.l1), self.valid_pixels, params.clone()),
            MetricRecord::new("psnr", self.psnr.to_json(), self.valid_pixels, params),
        ]
    }
}

/// Mean absolute error and PSNR for images with unit peak.
pub fn photometric(pred: &Raster, gt: &Raster) -> Result<Photometric> {
    if pred.dims() != gt.dims() {
        return Err(Error::invalid(format!(
            "images differ in shape: {:?} vs {:?}",
            pred.dims(),
            gt.dims()
        )));
    }
    let n = gt.data().len();
    if n == 0 {
        return Err(Error::NoValidPixels);
    }
    let (mut abs, mut sq) = (0.0f64, 0.0f64);
    for (p, g) in pred.data().iter().zip(gt.data()) {
        let d = *p as f64 - *g as f64;
        abs += d.abs();
        sq += d * d;
    }
    let mse = sq / n as f64;
    Ok(Photometric {
        l1: abs / n as f64,
        mse,
        psnr: if mse == 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Finite(10.0 * (1.0 / mse).log10())
        },
        valid_pixels: gt.width() * gt.height(),
    })
}

pub const DEFAULT_NLL_EPS: f64 = 1e-8;

/// Mean of `-ln max(p[gt], eps)` over all pixels.
pub fn semantic_nll(pred_probs: &Raster, gt: &LabelMap, eps: f64) -> Result<f64> {
    if pred_probs.width() != gt.width() || pred_probs.height() != gt.height() {
        return Err(Error::invalid("probabilities and labels differ in size"));
    }
    let l = pred_probs.channels();
    let mut total = 0.0;
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            let label = gt.get(x, y);
            if label as usize >= l {
                return Err(Error::LabelOutOfRange {
                    x,
                    y,
                    label,
                    num_classes: l,
                });
            }
            let p = pred_probs.get(x, y, label as usize) as f64;
            total -= p.max(eps).ln();
        }
    }
    let n = gt.width() * gt.height();
    if n == 0 {
        return Err(Error::NoValidPixels);
    }
    Ok(total / n as f64)
}

/// Depth term: L1 between disparities derived from inverse depth maps.
pub fn depth_loss(pred_inv: &Raster, gt_inv: &Raster, fx: f64, baseline: f64) -> Result<f64> {
    let p = depth_to_disparity(pred_inv, fx, baseline, DepthInput::InverseDepth)?;
    let g = depth_to_disparity(gt_inv, fx, baseline, DepthInput::InverseDepth)?;
    Ok(photometric(&p, &g)?.l1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub sem: f64,
    pub dep: f64,
    pub col: f64,
    pub gan: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            sem: 1.0,
            dep: 0.1,
            col: 1.0,
            gan: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossTerms {
    pub sem: f64,
    pub dep: f64,
    pub col: f64,
    /// Adversarial term; absent means zero.
    #[serde(default)]
    pub gan: Option<f64>,
}

pub fn aggregate_loss(terms: &LossTerms, w: &LossWeights) -> Result<f64> {
    let gan = terms.gan.unwrap_or(0.0);
    let all = [terms.sem, terms.dep, terms.col, gan, w.sem, w.dep, w.col, w.gan];
    if !all.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("loss terms and weights must be finite"));
    }
    Ok(w.sem * terms.sem + w.dep * terms.dep + w.col * terms.col + w.gan * gan)
}
