//! Acceptance gate: one test per shipped guarantee, each printing a
//! single PASS/FAIL line (run with `--nocapture` to see them). The
//! tolerances here are the contract; do not loosen them to make a
//! failing build green.

use qhardy::cli;
use qhardy::detectors::{
    mqdla, msdla, qdla, run_detector, sdla, DetectorConfig, DetectorKind,
};
use qhardy::eval::{
    add_noise, calibrate_to_snr, default_thresholds, edge_pipeline, psnr, snr, ssim, to_csv,
    benchmark, BenchConfig, NoiseKind, NoiseSpec,
};
use qhardy::features::{cr_residuals_cfg, default_eps};
use qhardy::field::{QuaternionField, ScalarField};
use qhardy::postprocess::{hysteresis, non_max_suppress, normalize_magnitude, EdgeMap};
use qhardy::qft::{hilbert_partial_1, hilbert_total, spectrum_onesided_check};
use qhardy::quat::Quaternion;
use qhardy::scale_space::{
    hardy_lift, hardy_lift_derivs, hardy_lift_derivs_specs, hardy_lift_specs, KernelSpec,
    LiftConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::AssertUnwindSafe;
use std::time::Instant;

fn criterion(name: &str, body: impl FnOnce()) {
    let result = std::panic::catch_unwind(AssertUnwindSafe(body));
    match &result {
        Ok(()) => println!("PASS  {name}"),
        Err(_) => println!("FAIL  {name}"),
    }
    if let Err(payload) = result {
        std::panic::resume_unwind(payload);
    }
}

fn rand_quat(rng: &mut impl Rng) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

/// Smooth strictly-positive test image: broad Gaussian bump over a
/// mid-gray pedestal, values in (0, 255).
fn smooth_image(n: usize, spacing: f64) -> ScalarField {
    let half = n as f64 * spacing / 2.0;
    let sigma = n as f64 * spacing / 6.0;
    ScalarField::from_fn(n, n, spacing, |r, c| {
        let x = (r as f64 + 0.5) * spacing - half;
        let y = (c as f64 + 0.5) * spacing - half;
        100.0 + 120.0 * (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()
    })
}

/// Pure nonnegative Gaussian blob (no pedestal); the same continuum image
/// sampled at any resolution, for refinement studies.
fn blob_image(n: usize, spacing: f64, sigma: f64, amp: f64) -> ScalarField {
    let half = n as f64 * spacing / 2.0;
    ScalarField::from_fn(n, n, spacing, |r, c| {
        let x = (r as f64 + 0.5) * spacing - half;
        let y = (c as f64 + 0.5) * spacing - half;
        amp * (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()
    })
}

#[test]
fn c01_quaternion_algebra_laws() {
    criterion("quaternion algebra laws (1e-12, 10^4 triples, <1s)", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..10_000 {
            let (a, b, c) = (rand_quat(&mut rng), rand_quat(&mut rng), rand_quat(&mut rng));
            let scale = a.modulus() * b.modulus() + 1.0;
            assert!(((a * b).modulus() - a.modulus() * b.modulus()).abs() <= 1e-12 * scale);
            let assoc = ((a * b) * c - a * (b * c)).modulus();
            assert!(assoc <= 1e-12 * (scale * c.modulus() + 1.0), "assoc {assoc}");
            let anti = ((a * b).conjugate() - b.conjugate() * a.conjugate()).modulus();
            assert!(anti <= 1e-12 * scale, "conjugate anti-homomorphism {anti}");
        }
        assert!(start.elapsed().as_secs_f64() < 1.0, "took {:?}", start.elapsed());
    });
}

#[test]
fn c02_spectral_identity() {
    criterion("one-sided spectrum identity (20 random 32x32, <1e-8, <5s)", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        for _ in 0..20 {
            let img = ScalarField::from_fn(32, 32, 1.0, |_, _| rng.gen_range(0.0..255.0));
            let report = spectrum_onesided_check(&img).unwrap();
            assert!(report.max_leak < 1e-8, "max_leak {}", report.max_leak);
            assert!(report.factor_error < 1e-8, "factor_error {}", report.factor_error);
        }
        assert!(start.elapsed().as_secs_f64() < 5.0, "took {:?}", start.elapsed());
    });
}

#[test]
fn c03_hilbert_pairs() {
    criterion("Hilbert pairs H1[cos]=sin, Ht[cos cos]=sin sin (1e-10)", || {
        use std::f64::consts::PI;
        let n = 64usize;
        let f = QuaternionField::from_real(&ScalarField::from_fn(n, n, 1.0, |_, c| {
            (2.0 * PI * c as f64 / n as f64).cos()
        }));
        let h1 = hilbert_partial_1(&f);
        for r in 0..n {
            for c in 0..n {
                let want = (2.0 * PI * c as f64 / n as f64).sin();
                assert!((h1.at(r, c).q0 - want).abs() < 1e-10);
            }
        }
        let g = QuaternionField::from_real(&ScalarField::from_fn(n, n, 1.0, |r, c| {
            (2.0 * PI * c as f64 / n as f64).cos() * (2.0 * PI * r as f64 / n as f64).cos()
        }));
        let ht = hilbert_total(&g);
        for r in 0..n {
            for c in 0..n {
                let want = (2.0 * PI * c as f64 / n as f64).sin()
                    * (2.0 * PI * r as f64 / n as f64).sin();
                assert!((ht.at(r, c).q0 - want).abs() < 1e-10);
            }
        }
    });
}

#[test]
fn c04_poisson_semigroup() {
    criterion("Poisson semigroup within 2% interior (128x128, R=8y)", || {
        let img = smooth_image(128, 1.0);
        let (ya, yb) = (0.8, 0.7);
        let once = hardy_lift(&img, ya + yb, ya + yb).unwrap();
        let first = hardy_lift(&img, ya, ya).unwrap();
        let second = hardy_lift(&first.r, yb, yb).unwrap();
        let border = 2 * once.radius_px(8.0).max(first.radius_px(8.0));
        let diff = once.r.zip_map(&second.r, |a, b| a - b);
        let scale = once.r.interior_max_abs(border);
        let err = diff.interior_max_abs(border);
        assert!(err <= 0.02 * scale, "semigroup err {err} vs 2% of {scale}");
    });
}

#[test]
fn c05_boundary_recovery() {
    criterion("boundary recovery monotone in y in {0.4,0.2,0.1,0.05}", || {
        let img = smooth_image(96, 0.25);
        // Common interior band from the largest kernel.
        let border = 2 * hardy_lift(&img, 0.4, 0.4).unwrap().radius_px(8.0);
        let mut prev = f64::INFINITY;
        for y in [0.4, 0.2, 0.1, 0.05] {
            let frame = hardy_lift(&img, y, y).unwrap();
            let err = frame
                .r
                .zip_map(&img, |a, b| a - b)
                .interior_max_abs(border);
            assert!(err < prev, "y={y}: err {err} !< {prev}");
            prev = err;
        }
    });
}

#[test]
fn c06_scale_derivative_correctness() {
    criterion("hardy_lift_derivs matches central FD (delta=1e-4, 1e-5)", || {
        let img = smooth_image(32, 1.0);
        let (y1, y2) = (1.3, 1.1);
        let delta = 1e-4;
        let (dy1, dy2) = hardy_lift_derivs(&img, y1, y2).unwrap();
        let fp = hardy_lift(&img, y1 + delta, y2).unwrap();
        let fm = hardy_lift(&img, y1 - delta, y2).unwrap();
        for (field, hi, lo) in [
            (&dy1.r, &fp.r, &fm.r),
            (&dy1.m1, &fp.m1, &fm.m1),
            (&dy1.m2, &fp.m2, &fm.m2),
            (&dy1.m3, &fp.m3, &fm.m3),
        ] {
            let fd = hi.zip_map(lo, |a, b| (a - b) / (2.0 * delta));
            let err = field.zip_map(&fd, |a, b| a - b).max_abs();
            assert!(err < 1e-5, "dy1 err {err}");
        }
        let gp = hardy_lift(&img, y1, y2 + delta).unwrap();
        let gm = hardy_lift(&img, y1, y2 - delta).unwrap();
        for (field, hi, lo) in [
            (&dy2.r, &gp.r, &gm.r),
            (&dy2.m1, &gp.m1, &gm.m1),
            (&dy2.m2, &gp.m2, &gm.m2),
            (&dy2.m3, &gp.m3, &gm.m3),
        ] {
            let fd = hi.zip_map(lo, |a, b| (a - b) / (2.0 * delta));
            let err = field.zip_map(&fd, |a, b| a - b).max_abs();
            assert!(err < 1e-5, "dy2 err {err}");
        }
    });
}

#[test]
fn c07_cr_residual_convergence() {
    criterion("CR residual maxima shrink by >=1.5x under refinement (<30s)", || {
        let start = Instant::now();
        let cfg = LiftConfig {
            y1: 2.0,
            y2: 2.0,
            radius_factor: 16.0,
            normalize: false,
        };
        let coarse = cr_residuals_cfg(&blob_image(160, 1.0, 4.0, 50.0), &cfg).unwrap();
        let fine = cr_residuals_cfg(&blob_image(320, 0.5, 4.0, 50.0), &cfg).unwrap();
        for (name, c, f) in [
            ("t1", coarse.max_t1, fine.max_t1),
            ("y1", coarse.max_y1, fine.max_y1),
            ("t2", coarse.max_t2, fine.max_t2),
            ("y2", coarse.max_y2, fine.max_y2),
        ] {
            assert!(c / f >= 1.5, "{name}: ratio {} (coarse {c}, fine {f})", c / f);
        }
        assert!(start.elapsed().as_secs_f64() < 30.0, "took {:?}", start.elapsed());
    });
}

struct EquivalenceErrs {
    mqdla_vs_qdla: f64,
    msdla_vs_sdla: f64,
}

fn equivalence_errs(n: usize, spacing: f64) -> EquivalenceErrs {
    let img = blob_image(n, spacing, 4.0, 50.0);
    let spec = KernelSpec {
        scale: 2.0,
        truncation_radius: 32.0,
        normalize: false,
    };
    let frame = hardy_lift_specs(&img, &spec, &spec).unwrap();
    let (dy1, dy2) = hardy_lift_derivs_specs(&img, &spec, &spec).unwrap();
    let eps = default_eps(&frame);
    let border = (2.0 * spec.truncation_radius / spacing).ceil() as usize;
    let q = qdla(&frame, eps);
    let mq = mqdla(&frame, &dy1, &dy2, eps);
    let s = sdla(&frame, &dy1, &dy2, eps);
    let ms = msdla(&frame, eps);
    let pair_err = |a: &ScalarField, b: &ScalarField| {
        a.zip_map(b, |x, y| x - y).interior_max_abs(border)
    };
    EquivalenceErrs {
        mqdla_vs_qdla: pair_err(&q.g1, &mq.g1).max(pair_err(&q.g2, &mq.g2)),
        msdla_vs_sdla: pair_err(&s.g1, &ms.g1).max(pair_err(&s.g2, &ms.g2)),
    }
}

#[test]
fn c08_detector_equivalences() {
    criterion("MQDLA~QDLA and MSDLA~SDLA within 5e-3, improving", || {
        let coarse = equivalence_errs(160, 1.0);
        assert!(coarse.mqdla_vs_qdla < 5e-3, "mqdla {}", coarse.mqdla_vs_qdla);
        assert!(coarse.msdla_vs_sdla < 5e-3, "msdla {}", coarse.msdla_vs_sdla);
        let fine = equivalence_errs(320, 0.5);
        assert!(fine.mqdla_vs_qdla < coarse.mqdla_vs_qdla);
        assert!(fine.msdla_vs_sdla < coarse.msdla_vs_sdla);
    });
}

/// Run detector -> NMS -> normalize -> hysteresis on a fixture.
fn localized_edges(img: &ScalarField, det: DetectorKind) -> EdgeMap {
    let gm = run_detector(img, &DetectorConfig::new(det)).unwrap();
    let nms = normalize_magnitude(&non_max_suppress(&gm, 1.5));
    hysteresis(&nms, 30.0, 50.0).unwrap()
}

/// Assert every edge pixel lies within `tol` (Chebyshev, in pixels) of
/// the truth set and that at least `coverage` of the truth pixels have an
/// edge pixel nearby.
fn assert_localized(edges: &EdgeMap, truth: &[(usize, usize)], tol: i64, coverage: f64, tag: &str) {
    let on: Vec<(i64, i64)> = (0..edges.height)
        .flat_map(|r| (0..edges.width).map(move |c| (r, c)))
        .filter(|&(r, c)| edges.at(r, c) != 0)
        .map(|(r, c)| (r as i64, c as i64))
        .collect();
    assert!(!on.is_empty(), "{tag}: empty edge map");
    let dist = |(r, c): (i64, i64), set: &[(i64, i64)]| {
        set.iter()
            .map(|&(tr, tc)| (r - tr).abs().max((c - tc).abs()))
            .min()
            .unwrap()
    };
    let truth_i: Vec<(i64, i64)> = truth.iter().map(|&(r, c)| (r as i64, c as i64)).collect();
    for &p in &on {
        let d = dist(p, &truth_i);
        assert!(d <= tol, "{tag}: edge pixel {p:?} is {d} px from ground truth");
    }
    let covered = truth_i.iter().filter(|&&t| dist(t, &on) <= tol).count();
    let frac = covered as f64 / truth_i.len() as f64;
    assert!(frac >= coverage, "{tag}: only {frac:.2} of ground truth covered");
}

#[test]
fn c09_localization_and_detect_speed() {
    criterion("step/square localization within 1px; detect < 2s", || {
        // Vertical step at the column-31/32 boundary; both flanking
        // columns count as ground truth.
        let step = ScalarField::from_fn(64, 64, 1.0, |_, c| if c < 32 { 40.0 } else { 200.0 });
        let step_truth: Vec<(usize, usize)> = (0..64)
            .flat_map(|r| [(r, 31), (r, 32)])
            .collect();
        // 200-valued square on rows/cols 16..48 over a 40 background;
        // truth is the inner/outer pixel ring either side of the contour.
        let square = ScalarField::from_fn(64, 64, 1.0, |r, c| {
            if (16..48).contains(&r) && (16..48).contains(&c) {
                200.0
            } else {
                40.0
            }
        });
        let mut square_truth = Vec::new();
        for k in 15..49 {
            for ring in [15usize, 16, 47, 48] {
                square_truth.push((ring, k));
                square_truth.push((k, ring));
            }
        }
        square_truth.sort_unstable();
        square_truth.dedup();

        let detectors = [
            DetectorKind::Qdla,
            DetectorKind::Mqdla,
            DetectorKind::Sdla,
            DetectorKind::Msdla,
            DetectorKind::Sobel,
        ];
        let start = Instant::now();
        for det in detectors {
            let edges = localized_edges(&step, det);
            assert_localized(&edges, &step_truth, 1, 0.9, &format!("step/{}", det.name()));
            let edges = localized_edges(&square, det);
            assert_localized(&edges, &square_truth, 1, 0.8, &format!("square/{}", det.name()));
        }
        let per_image = start.elapsed().as_secs_f64() / (2.0 * detectors.len() as f64);
        assert!(per_image < 2.0, "detect took {per_image:.2} s per image");
    });
}

#[test]
fn c10_pipeline_defaults_snapshot() {
    criterion("shipped defaults: y 0.3/0.3, NMS 1.5, 15/27 + 3.8/5.5", || {
        assert_eq!(cli::DEFAULT_Y1, 0.3);
        assert_eq!(cli::DEFAULT_Y2, 0.3);
        assert_eq!(cli::DEFAULT_NMS_RADIUS, 1.5);
        for det in DetectorKind::ALL {
            let dc = DetectorConfig::new(det);
            assert_eq!((dc.y1, dc.y2), (0.3, 0.3));
            let want = if det == DetectorKind::Msdla {
                (15.0, 27.0)
            } else {
                (3.8, 5.5)
            };
            assert_eq!(default_thresholds(det), want, "{}", det.name());
        }
    });
}

#[test]
fn c11_noise_robustness_direction() {
    criterion("salt&pepper @ 15dB: QDLA/SDLA/MSDLA beat Canny on SSIM", || {
        let img = ScalarField::from_fn(128, 128, 1.0, |r, c| {
            if (32..96).contains(&r) && (32..96).contains(&c) {
                200.0
            } else {
                40.0
            }
        });
        let base = calibrate_to_snr(&img, NoiseKind::SaltPepper, 15.0, 0.2, 900).unwrap();
        let y = 5.8;
        let (radius, low, high, norm) = (1.5, 10.0, 25.0, true);
        let render = |em: &EdgeMap| {
            ScalarField::new(
                em.height,
                em.width,
                1.0,
                em.data.iter().map(|&v| if v != 0 { 255.0 } else { 0.0 }).collect(),
            )
        };
        let dets = [
            DetectorKind::Qdla,
            DetectorKind::Sdla,
            DetectorKind::Msdla,
            DetectorKind::Canny,
        ];
        let mut mean = std::collections::HashMap::new();
        for det in dets {
            let clean = render(&edge_pipeline(&img, det, y, radius, low, high, norm, 1.0).unwrap());
            let mut acc = 0.0;
            for seed in 0..20 {
                let mut spec = base;
                spec.seed = 1000 + seed;
                let noisy_img = add_noise(&img, &spec).unwrap();
                let noisy =
                    render(&edge_pipeline(&noisy_img, det, y, radius, low, high, norm, 1.0).unwrap());
                acc += ssim(&clean, &noisy).unwrap();
            }
            mean.insert(det.name(), acc / 20.0);
        }
        let canny = mean["canny"];
        for det in ["qdla", "sdla", "msdla"] {
            assert!(
                mean[det] > canny,
                "{det} mean SSIM {} !> canny {canny}",
                mean[det]
            );
        }
    });
}

#[test]
fn c12_metric_contract() {
    criterion("ssim(x,x)=1; psnr(MSE=1)=48.13+-0.01; CSV byte-stable", || {
        let img = smooth_image(32, 1.0);
        assert_eq!(ssim(&img, &img).unwrap(), 1.0);
        assert_eq!(snr(&img, &img).unwrap(), f64::INFINITY);
        let off = img.map(|v| v + 1.0);
        let p = psnr(&img, &off).unwrap();
        assert!((p - 48.13).abs() <= 0.01, "psnr {p}");

        let images = vec![(
            "blob".to_string(),
            smooth_image(96, 1.0),
        )];
        let mut spec = NoiseSpec::new(NoiseKind::Gaussian, 17);
        spec.variance = 0.005;
        let cfg = BenchConfig::default();
        let run = || to_csv(&benchmark(&images, &[DetectorKind::Sobel], &[spec], &cfg));
        assert_eq!(run(), run());
    });
}
