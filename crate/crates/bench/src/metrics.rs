//! Image quality metrics on tensors whose frontal slices are images with
//! values nominally in `[0, 1]`.

use tnnr::Tensor;

use crate::error::BenchError;

fn check_dims(x: &Tensor, reference: &Tensor) -> Result<(), BenchError> {
    if x.dims() != reference.dims() {
        return Err(BenchError::Solver(tnnr::Error::Shape(format!(
            "{:?} vs {:?}",
            x.dims(),
            reference.dims()
        ))));
    }
    Ok(())
}

/// `10 log10(peak^2 / MSE)`; `+inf` when the tensors are identical.
pub fn psnr(x: &Tensor, reference: &Tensor, peak: f64) -> Result<f64, BenchError> {
    check_dims(x, reference)?;
    if !(peak > 0.0) {
        return Err(BenchError::Usage(format!("peak must be positive, got {peak}")));
    }
    let mse = x.distance(reference)?.powi(2) / x.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let w: Vec<f64> = (0..size).map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Separable 'valid' filtering of a column-major `rows x cols` image.
fn filter_valid(img: &[f64], rows: usize, cols: usize, kernel: &[f64]) -> Vec<f64> {
    let w = kernel.len();
    let (out_r, out_c) = (rows + 1 - w, cols + 1 - w);
    let mut along_rows = vec![0.0; out_r * cols];
    for j in 0..cols {
        for i in 0..out_r {
            along_rows[i + out_r * j] = (0..w).map(|d| kernel[d] * img[i + d + rows * j]).sum();
        }
    }
    let mut out = vec![0.0; out_r * out_c];
    for j in 0..out_c {
        for i in 0..out_r {
            out[i + out_r * j] = (0..w).map(|d| kernel[d] * along_rows[i + out_r * (j + d)]).sum();
        }
    }
    out
}

fn ssim_slice(x: &[f64], y: &[f64], rows: usize, cols: usize, kernel: &[f64]) -> f64 {
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let prod = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p * q).collect() };
    let mx = filter_valid(x, rows, cols, kernel);
    let my = filter_valid(y, rows, cols, kernel);
    let sxx = filter_valid(&prod(x, x), rows, cols, kernel);
    let syy = filter_valid(&prod(y, y), rows, cols, kernel);
    let sxy = filter_valid(&prod(x, y), rows, cols, kernel);
    let n = mx.len();
    let total: f64 = (0..n)
        .map(|p| {
            let (ux, uy) = (mx[p], my[p]);
            let vx = sxx[p] - ux * ux;
            let vy = syy[p] - uy * uy;
            let cov = sxy[p] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    total / n as f64
}

/// Mean structural similarity over frontal slices: 11x11 Gaussian window with
/// sigma 1.5, `C1 = 0.01^2`, `C2 = 0.03^2`, valid window positions only.
/// Slices smaller than the window use the largest odd window that fits.
pub fn ssim(x: &Tensor, reference: &Tensor) -> Result<f64, BenchError> {
    check_dims(x, reference)?;
    let (n1, n2, n3) = x.dims();
    let mut size = SSIM_WINDOW.min(n1).min(n2);
    if size % 2 == 0 {
        size -= 1;
    }
    if size < SSIM_WINDOW {
        log::info!("slices of {n1}x{n2} are smaller than the SSIM window; using {size}x{size}");
    }
    let kernel = gaussian_kernel(size, SSIM_SIGMA);
    let plane = n1 * n2;
    let total: f64 = (0..n3)
        .map(|k| {
            let xs = &x.as_slice()[k * plane..(k + 1) * plane];
            let ys = &reference.as_slice()[k * plane..(k + 1) * plane];
            ssim_slice(xs, ys, n1, n2, &kernel)
        })
        .sum();
    Ok(total / n3 as f64)
}
