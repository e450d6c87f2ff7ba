//! Serializable run reports.

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use tnnr::ObservationMask;

/// Floats that may be infinite are written as the string `"inf"`.
fn finite_or_inf<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConfigEcho {
    pub dims: [usize; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub mask: String,
    pub sampling_ratio: f64,
    pub lambda: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub epsilon: f64,
    pub lf: f64,
    pub mu: f64,
    pub mu_mode: String,
    pub max_iters: usize,
    pub tol_rel_change: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_ground_truth: Option<f64>,
    pub penalty: String,
    pub preset: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Metrics {
    #[serde(serialize_with = "finite_or_inf")]
    pub psnr: f64,
    pub ssim: f64,
    pub rel_error: f64,
    pub iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub config: ConfigEcho,
    pub metrics: Metrics,
    pub stop: String,
    pub mask_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Summary {
    #[serde(serialize_with = "finite_or_inf")]
    pub psnr: f64,
    pub ssim: f64,
    pub rel_error: f64,
    pub iterations: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub mean: Summary,
    pub std: Summary,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.iter().any(|v| v.is_infinite()) {
        let all_same = values.iter().all(|&v| v == values[0]);
        return (mean, if all_same { 0.0 } else { f64::NAN });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Population mean and standard deviation of every metric.
pub fn aggregate(reports: &[RunReport]) -> Option<Aggregate> {
    if reports.is_empty() {
        return None;
    }
    let column = |f: fn(&Metrics) -> f64| mean_std(&reports.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>());
    let (psnr, ssim, rel, iters, secs) = (
        column(|m| m.psnr),
        column(|m| m.ssim),
        column(|m| m.rel_error),
        column(|m| m.iterations as f64),
        column(|m| m.seconds),
    );
    Some(Aggregate {
        runs: reports.len(),
        mean: Summary { psnr: psnr.0, ssim: ssim.0, rel_error: rel.0, iterations: iters.0, seconds: secs.0 },
        std: Summary { psnr: psnr.1, ssim: ssim.1, rel_error: rel.1, iterations: iters.1, seconds: secs.1 },
    })
}

/// First 16 hex digits of the SHA-256 of the mask indicator bytes.
pub fn mask_hash(mask: &ObservationMask) -> String {
    let mut h = Sha256::new();
    let (n1, n2, n3) = mask.dims();
    for n in [n1, n2, n3] {
        h.update((n as u64).to_le_bytes());
    }
    h.update(mask.indicator().iter().map(|&b| u8::from(b)).collect::<Vec<u8>>());
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(psnr: f64, iterations: usize) -> Metrics {
        Metrics { psnr, ssim: 0.5, rel_error: 0.1, iterations, seconds: 1.0 }
    }

    #[test]
    fn infinite_psnr_serializes_as_inf() {
        let json = serde_json::to_string(&metrics(f64::INFINITY, 3)).unwrap();
        assert!(json.contains("\"psnr\":\"inf\""), "{json}");
        let json = serde_json::to_string(&metrics(20.5, 3)).unwrap();
        assert!(json.contains("\"psnr\":20.5"));
    }

    #[test]
    fn aggregate_statistics() {
        let base = RunReport {
            command: "synth".into(),
            config: ConfigEcho {
                dims: [1, 1, 1],
                rank: None,
                mask: "full".into(),
                sampling_ratio: 1.0,
                lambda: 1.0,
                theta1: 0.0,
                theta2: 0.0,
                epsilon: 0.01,
                lf: 2.0,
                mu: 2.0,
                mu_mode: "auto".into(),
                max_iters: 1,
                tol_rel_change: 1e-4,
                tol_ground_truth: None,
                penalty: "identity".into(),
                preset: "tnn".into(),
                seed: 0,
            },
            metrics: metrics(10.0, 2),
            stop: "max_iters".into(),
            mask_hash: String::new(),
            trace_path: None,
        };
        let mut other = base.clone();
        other.metrics = metrics(20.0, 4);
        let agg = aggregate(&[base.clone(), other]).unwrap();
        assert_eq!(agg.runs, 2);
        assert_eq!(agg.mean.psnr, 15.0);
        assert_eq!(agg.std.psnr, 5.0);
        assert_eq!(agg.mean.iterations, 3.0);
        assert!(aggregate(&[]).is_none());
    }

    #[test]
    fn mask_hash_is_stable_and_sensitive() {
        let a = ObservationMask::uniform((5, 5, 2), 0.5, 1).unwrap();
        let b = ObservationMask::uniform((5, 5, 2), 0.5, 2).unwrap();
        assert_eq!(mask_hash(&a), mask_hash(&a.clone()));
        assert_ne!(mask_hash(&a), mask_hash(&b));
        assert_eq!(mask_hash(&a).len(), 16);
    }
}
