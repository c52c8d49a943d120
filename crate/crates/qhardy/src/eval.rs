//! Noise-robustness evaluation: noise injection (Poisson, Gaussian,
//! salt-and-pepper, speckle), SNR/PSNR/SSIM scoring, and the benchmark
//! grid comparing detector edge maps on clean vs noisy inputs.
//!
//! All randomness flows through seeded ChaCha8 generators with row-major
//! draw order, so equal seeds give bit-identical noise on every platform.

use crate::detectors::{run_detector, DetectorConfig, DetectorKind};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::postprocess::{hysteresis, non_max_suppress, normalize_magnitude, EdgeMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Poisson,
    Gaussian,
    SaltPepper,
    Speckle,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Poisson,
        NoiseKind::Gaussian,
        NoiseKind::SaltPepper,
        NoiseKind::Speckle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Poisson => "poisson",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::SaltPepper => "salt_pepper",
            NoiseKind::Speckle => "speckle",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Variance of the relative fluctuation (gaussian, speckle).
    pub variance: f64,
    /// Corrupted-pixel fraction (salt_pepper).
    pub density: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        NoiseSpec {
            kind,
            variance: 0.01,
            density: 0.05,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.variance < 0.0 || self.density < 0.0 || self.density > 1.0 {
            return Err(Error::BadNoiseSpec(format!(
                "variance {} / density {} out of range",
                self.variance, self.density
            )));
        }
        Ok(())
    }
}

/// Apply noise to an image with pixel values in `[0, 255]`; the output is
/// clipped back to that range.
pub fn add_noise(img: &ScalarField, spec: &NoiseSpec) -> Result<ScalarField> {
    spec.validate()?;
    if let Some(&bad) = img.data.iter().find(|v| !(0.0..=255.0).contains(*v)) {
        return Err(Error::PixelOutOfRange(bad));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = img.clone();
    match spec.kind {
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, spec.variance.sqrt() * 255.0).unwrap();
            for v in out.data.iter_mut() {
                *v = (*v + normal.sample(&mut rng)).clamp(0.0, 255.0);
            }
        }
        NoiseKind::SaltPepper => {
            for v in out.data.iter_mut() {
                if rng.gen::<f64>() < spec.density {
                    *v = if rng.gen::<bool>() { 255.0 } else { 0.0 };
                }
            }
        }
        NoiseKind::Speckle => {
            let normal = Normal::new(0.0, spec.variance.sqrt()).unwrap();
            for v in out.data.iter_mut() {
                *v = (*v * (1.0 + normal.sample(&mut rng))).clamp(0.0, 255.0);
            }
        }
        NoiseKind::Poisson => {
            for v in out.data.iter_mut() {
                if *v > 0.0 {
                    let draw = Poisson::new(*v).unwrap().sample(&mut rng);
                    *v = draw.clamp(0.0, 255.0);
                }
            }
        }
    }
    Ok(out)
}

/// `10 log10(sum clean^2 / sum (clean - noisy)^2)`; `+inf` when the images
/// are identical.
pub fn snr(clean: &ScalarField, noisy: &ScalarField) -> Result<f64> {
    clean.same_shape(noisy)?;
    let (mut sig, mut err) = (0.0f64, 0.0f64);
    for i in 0..clean.data.len() {
        sig += clean.data[i] * clean.data[i];
        let d = clean.data[i] - noisy.data[i];
        err += d * d;
    }
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (sig / err).log10())
}

/// `10 log10(255^2 / MSE)`; `+inf` when the images are identical
/// (MSE = 0).
pub fn psnr(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.same_shape(b)?;
    let mut sq = 0.0f64;
    for i in 0..a.data.len() {
        let d = a.data[i] - b.data[i];
        sq += d * d;
    }
    let mse = sq / a.data.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);
const SSIM_WINDOW: usize = 8;

/// Mean local SSIM over an 8x8 uniform sliding window, clamped to
/// `[0, 1]`. Equal inputs give exactly 1.
pub fn ssim(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.same_shape(b)?;
    let w = SSIM_WINDOW;
    if a.height < w || a.width < w {
        return Err(Error::DimensionMismatch(a.height, a.width, w, w));
    }
    let n = (w * w) as f64;
    let mut total = 0.0f64;
    let mut windows = 0usize;
    for r0 in 0..=a.height - w {
        for c0 in 0..=a.width - w {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for r in r0..r0 + w {
                for c in c0..c0 + w {
                    let (x, y) = (a.at(r, c), b.at(r, c));
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    syy += y * y;
                    sxy += x * y;
                }
            }
            let (mx, my) = (sx / n, sy / n);
            let vx = sxx / n - mx * mx;
            let vy = syy / n - my * my;
            let cov = sxy / n - mx * my;
            let num = (2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2);
            total += num / den;
            windows += 1;
        }
    }
    Ok((total / windows as f64).clamp(0.0, 1.0))
}

/// Bisect the noise parameter (variance, or density for salt-and-pepper)
/// until the measured SNR is within `tol_db` of `target_db`. Poisson noise
/// has no free parameter and is rejected.
pub fn calibrate_to_snr(
    img: &ScalarField,
    kind: NoiseKind,
    target_db: f64,
    tol_db: f64,
    seed: u64,
) -> Result<NoiseSpec> {
    if kind == NoiseKind::Poisson {
        return Err(Error::BadNoiseSpec(
            "poisson noise has no adjustable parameter".into(),
        ));
    }
    let measure = |param: f64| -> Result<f64> {
        let mut spec = NoiseSpec::new(kind, seed);
        match kind {
            NoiseKind::SaltPepper => spec.density = param,
            _ => spec.variance = param,
        }
        snr(img, &add_noise(img, &spec)?)
    };
    let (mut lo, mut hi): (f64, f64) = match kind {
        NoiseKind::SaltPepper => (1e-6, 1.0),
        _ => (1e-8, 10.0),
    };
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        let s = measure(mid)?;
        if (s - target_db).abs() <= tol_db {
            let mut spec = NoiseSpec::new(kind, seed);
            match kind {
                NoiseKind::SaltPepper => spec.density = mid,
                _ => spec.variance = mid,
            }
            return Ok(spec);
        }
        // SNR decreases as the parameter grows.
        if s > target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::BadNoiseSpec(format!(
        "could not reach {target_db} dB for {}",
        kind.name()
    )))
}

/// Per-noise scales: 5.8 for salt-and-pepper, 4.5 otherwise.
pub fn noise_scale(kind: NoiseKind) -> f64 {
    match kind {
        NoiseKind::SaltPepper => 5.8,
        _ => 4.5,
    }
}

/// Default hysteresis thresholds per detector: 15/27 for MSDLA, 3.8/5.5
/// for the rest.
pub fn default_thresholds(det: DetectorKind) -> (f64, f64) {
    match det {
        DetectorKind::Msdla => (15.0, 27.0),
        _ => (3.8, 5.5),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub base_seed: u64,
    pub nms_radius: f64,
    /// Rescale NMS magnitudes to a 0..100 peak before thresholding.
    pub normalize: bool,
    pub canny_sigma: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            base_seed: 0,
            nms_radius: 1.5,
            normalize: false,
            canny_sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchCell {
    pub image: String,
    pub noise: String,
    pub snr_db: f64,
    pub detector: String,
    pub psnr_db: f64,
    pub ssim: f64,
    pub error: Option<String>,
}

/// FNV-1a mix of the base seed with the cell's identifying names; gives
/// each (image, noise, detector) cell its own deterministic noise seed.
pub fn cell_seed(base: u64, image: &str, noise: &str, detector: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ base;
    for b in image
        .bytes()
        .chain([0u8])
        .chain(noise.bytes())
        .chain([0u8])
        .chain(detector.bytes())
    {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Run a detector + NMS + hysteresis at the given scales and thresholds.
pub fn edge_pipeline(
    img: &ScalarField,
    detector: DetectorKind,
    y: f64,
    nms_radius: f64,
    low: f64,
    high: f64,
    normalize: bool,
    canny_sigma: f64,
) -> Result<EdgeMap> {
    let mut dc = DetectorConfig::new(detector);
    dc.y1 = y;
    dc.y2 = y;
    dc.canny_sigma = canny_sigma;
    let gm = run_detector(img, &dc)?;
    let mut nms = non_max_suppress(&gm, nms_radius);
    if normalize {
        nms = normalize_magnitude(&nms);
    }
    hysteresis(&nms, low, high)
}

fn edge_map_as_image(em: &EdgeMap) -> ScalarField {
    ScalarField::new(
        em.height,
        em.width,
        1.0,
        em.data.iter().map(|&v| if v != 0 { 255.0 } else { 0.0 }).collect(),
    )
}

/// Full evaluation grid: for every (image, noise, detector) cell, compare
/// the edge map of the noisy image against the edge map of the clean image
/// (both rendered as 0/255). An empty noise list scores each clean image
/// against itself under the label "none".
pub fn benchmark(
    images: &[(String, ScalarField)],
    detectors: &[DetectorKind],
    noises: &[NoiseSpec],
    cfg: &BenchConfig,
) -> Vec<BenchCell> {
    let mut cells = Vec::new();
    for (name, img) in images {
        let variants: Vec<(String, Option<NoiseSpec>)> = if noises.is_empty() {
            vec![("none".to_string(), None)]
        } else {
            noises
                .iter()
                .map(|ns| (ns.kind.name().to_string(), Some(*ns)))
                .collect()
        };
        for (noise_name, spec) in &variants {
            for &det in detectors {
                let cell = run_cell(name, img, noise_name, spec.as_ref(), det, cfg);
                cells.push(cell);
            }
        }
    }
    cells
}

fn run_cell(
    image: &str,
    img: &ScalarField,
    noise: &str,
    spec: Option<&NoiseSpec>,
    det: DetectorKind,
    cfg: &BenchConfig,
) -> BenchCell {
    let mut cell = BenchCell {
        image: image.to_string(),
        noise: noise.to_string(),
        snr_db: f64::NAN,
        detector: det.name().to_string(),
        psnr_db: f64::NAN,
        ssim: f64::NAN,
        error: None,
    };
    let result = (|| -> Result<()> {
        let noisy = match spec {
            Some(ns) => {
                let mut ns = *ns;
                ns.seed = cell_seed(cfg.base_seed ^ ns.seed, image, noise, det.name());
                add_noise(img, &ns)?
            }
            None => img.clone(),
        };
        cell.snr_db = snr(img, &noisy)?;
        let y = spec.map_or(4.5, |ns| noise_scale(ns.kind));
        let (low, high) = default_thresholds(det);
        let clean_edges =
            edge_pipeline(img, det, y, cfg.nms_radius, low, high, cfg.normalize, cfg.canny_sigma)?;
        let noisy_edges =
            edge_pipeline(&noisy, det, y, cfg.nms_radius, low, high, cfg.normalize, cfg.canny_sigma)?;
        let a = edge_map_as_image(&clean_edges);
        let b = edge_map_as_image(&noisy_edges);
        cell.psnr_db = psnr(&a, &b)?;
        cell.ssim = ssim(&a, &b)?;
        Ok(())
    })();
    if let Err(e) = result {
        cell.error = Some(e.to_string());
    }
    cell
}

fn fmt_metric(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else if v.is_nan() {
        String::new()
    } else {
        format!("{v:.4}")
    }
}

/// Render benchmark cells as CSV (`image,noise,snr_db,detector,psnr_db,
/// ssim`; 4 decimals, LF line endings). Failed cells carry empty metric
/// fields.
pub fn to_csv(cells: &[BenchCell]) -> String {
    let mut out = String::from("image,noise,snr_db,detector,psnr_db,ssim\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.image,
            c.noise,
            fmt_metric(c.snr_db),
            c.detector,
            fmt_metric(c.psnr_db),
            fmt_metric(c.ssim),
        ));
    }
    out
}
