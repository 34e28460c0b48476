//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The corpus is deterministic, so every threshold asserted here is
//! reproducible bit for bit.

use std::process::Command;
use std::time::Instant;

use chaosveil_core::analysis::{self, Direction};
use chaosveil_core::chaoscrypt::{self, CnnTemplate};
use chaosveil_core::image::Image;
use chaosveil_core::keyforge::{self, RawKey};
use chaosveil_core::pipeline::{self, SchemeConfig};
use chaosveil_core::sift;
use chaosveil_core::test_utils::{corpus, gaussian_blobs, message_image, TestRng};

fn cfg() -> SchemeConfig {
    SchemeConfig::default()
}

/// Criterion 1: 100 conceal/reveal round trips, bit-exact, under 60 s.
#[test]
fn c01_round_trip_100_pairs() {
    let cfg = cfg();
    let covers = corpus(256, 256);
    let start = Instant::now();
    for i in 0..100usize {
        let cover = &covers[i % covers.len()].1;
        let message = message_image(9_000 + i as u64, 64, 64);
        let outcome = pipeline::conceal(cover, &message, &cfg)
            .unwrap_or_else(|e| panic!("conceal failed on pair {i}: {e}"));
        let recovered = pipeline::reveal(&outcome.stego, &cfg)
            .unwrap_or_else(|e| panic!("reveal failed on pair {i}: {e}"));
        assert_eq!(recovered, message, "round trip mismatch on pair {i}");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "100 round trips took {elapsed:?}, budget is 60 s"
    );
    println!("ACCEPTANCE C1 round-trip (100 pairs, bit-exact, {elapsed:?}): PASS");
}

mod cubic_oracle {
    //! Durand-Kerner root finder, independent of the analytic solver in the
    //! library.

    #[derive(Clone, Copy, Debug)]
    pub struct C {
        pub re: f64,
        pub im: f64,
    }

    impl C {
        fn sub(self, o: C) -> C {
            C {
                re: self.re - o.re,
                im: self.im - o.im,
            }
        }
        fn mul(self, o: C) -> C {
            C {
                re: self.re * o.re - self.im * o.im,
                im: self.re * o.im + self.im * o.re,
            }
        }
        fn div(self, o: C) -> C {
            let d = o.re * o.re + o.im * o.im;
            C {
                re: (self.re * o.re + self.im * o.im) / d,
                im: (self.im * o.re - self.re * o.im) / d,
            }
        }
        fn abs(self) -> f64 {
            (self.re * self.re + self.im * self.im).sqrt()
        }
    }

    /// Roots of `z^3 + a z^2 + b z + c`.
    pub fn roots(a: f64, b: f64, c: f64) -> [C; 3] {
        let poly = |z: C| -> C {
            let z2 = z.mul(z);
            let z3 = z2.mul(z);
            C {
                re: z3.re + a * z2.re + b * z.re + c,
                im: z3.im + a * z2.im + b * z.im,
            }
        };
        let seed = C { re: 0.4, im: 0.9 };
        let mut z = [seed, seed.mul(seed), seed.mul(seed).mul(seed)];
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..3 {
                let mut denom = C { re: 1.0, im: 0.0 };
                for j in 0..3 {
                    if i != j {
                        denom = denom.mul(z[i].sub(z[j]));
                    }
                }
                let delta = poly(z[i]).div(denom);
                z[i] = z[i].sub(delta);
                moved = moved.max(delta.abs());
            }
            if moved < 1e-14 {
                break;
            }
        }
        z
    }
}

/// Criterion 2: the default template's linear part is unstable (chaos
/// precondition) and the analytic eigenvalues agree with an independent
/// polynomial-root oracle to 1e-9.
#[test]
fn c02_chaos_condition_eigenvalues() {
    let tpl = CnnTemplate::default();
    let eig = tpl.eigenvalues();
    assert!(tpl.has_chaotic_linear_part());

    // Characteristic polynomial coefficients of W, assembled independently.
    let w = tpl.w_matrix();
    let trace = w[0][0] + w[1][1] + w[2][2];
    let minors = (w[0][0] * w[1][1] - w[0][1] * w[1][0])
        + (w[0][0] * w[2][2] - w[0][2] * w[2][0])
        + (w[1][1] * w[2][2] - w[1][2] * w[2][1]);
    let det = w[0][0] * (w[1][1] * w[2][2] - w[1][2] * w[2][1])
        - w[0][1] * (w[1][0] * w[2][2] - w[1][2] * w[2][0])
        + w[0][2] * (w[1][0] * w[2][1] - w[1][1] * w[2][0]);
    let mut oracle = cubic_oracle::roots(-trace, minors, -det);
    oracle.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    for (e, o) in eig.iter().zip(&oracle) {
        assert!(
            (e.re - o.re).abs() < 1e-9 && (e.im - o.im).abs() < 1e-9,
            "eigenvalue {e:?} vs oracle {o:?}"
        );
    }
    // One negative real root, one conjugate pair with positive real part.
    assert!(eig[0].im == 0.0 && eig[0].re < 0.0);
    assert!(eig[1].re > 0.0 && eig[1].im != 0.0);
    assert_eq!(eig[1].re, eig[2].re);
    println!(
        "ACCEPTANCE C2 chaos condition (roots {:.4}, {:.4}±{:.4}i vs oracle <1e-9): PASS",
        eig[0].re, eig[1].re, eig[2].im
    );
}

/// Criterion 3: self-keyed ciphers of the 25-image corpus average at most
/// 0.06 |adjacent correlation| and at least 7.9 bits of entropy.
#[test]
fn c03_cipher_statistics() {
    let cfg = cfg();
    let mut entropy_sum = 0.0;
    let mut corr_sum = 0.0;
    for (name, img) in corpus(256, 256) {
        let key = pipeline::derive_raw_key(&img, &cfg).unwrap();
        let params = keyforge::derive_params(&key, &img);
        let ks = chaoscrypt::generate_keystream(&params, &cfg.template, img.pixel_count(), cfg.dt)
            .unwrap();
        let cipher = Image::new(
            img.width(),
            img.height(),
            chaoscrypt::xor_transform(img.pixels(), &ks).unwrap(),
        )
        .unwrap();
        entropy_sum += analysis::shannon_entropy(&cipher);
        corr_sum += analysis::adjacent_correlation(&cipher, Direction::Horizontal)
            .unwrap_or_else(|e| panic!("{name}: {e}"))
            .abs();
    }
    let mean_entropy = entropy_sum / 25.0;
    let mean_corr = corr_sum / 25.0;
    assert!(mean_entropy >= 7.9, "mean cipher entropy {mean_entropy}");
    assert!(mean_corr <= 0.06, "mean |adjacent corr| {mean_corr}");
    println!(
        "ACCEPTANCE C3 cipher statistics (entropy {mean_entropy:.4} >= 7.9, |corr| {mean_corr:.4} <= 0.06): PASS"
    );
}

/// Criterion 4: corpus stego fidelity at no more than half capacity.
#[test]
fn c04_stego_fidelity() {
    let cfg = cfg();
    let mut corr_sum = 0.0;
    let mut ssim_sum = 0.0;
    let mut psnr_sum = 0.0;
    for (i, (name, cover)) in corpus(256, 256).into_iter().enumerate() {
        let message = message_image(500 + i as u64, 44, 44);
        let outcome = pipeline::conceal(&cover, &message, &cfg).unwrap();
        let utilization = outcome.payload_bits as f64 / outcome.capacity_bits as f64;
        assert!(
            utilization <= 0.5,
            "{name}: utilization {utilization:.3} above 50%"
        );
        corr_sum += analysis::correlation(&outcome.stego, &cover).unwrap();
        ssim_sum += analysis::ssim(&outcome.stego, &cover).unwrap();
        psnr_sum += analysis::psnr(&outcome.stego, &cover).unwrap();
    }
    let (corr, ssim, psnr) = (corr_sum / 25.0, ssim_sum / 25.0, psnr_sum / 25.0);
    assert!(corr >= 0.99, "mean stego correlation {corr}");
    assert!(ssim >= 0.98, "mean stego SSIM {ssim}");
    assert!(psnr >= 45.0, "mean stego PSNR {psnr}");
    println!(
        "ACCEPTANCE C4 stego fidelity (corr {corr:.4} >= 0.99, SSIM {ssim:.4} >= 0.98, PSNR {psnr:.2} dB >= 45): PASS"
    );
}

/// Criterion 5: decrypted-message PSNR never increases with the occlusion
/// fraction, on every corpus image, and extraction always completes.
#[test]
fn c05_occlusion_robustness() {
    let cfg = cfg();
    let fractions = [0.0, 1.0 / 36.0, 1.0 / 18.0, 1.0 / 12.0];
    for (i, (name, cover)) in corpus(256, 256).into_iter().enumerate() {
        let message = message_image(700 + i as u64, 44, 44);
        let points = pipeline::occlusion_attack(&cover, &message, &fractions, &cfg)
            .unwrap_or_else(|e| panic!("{name}: occlusion attack failed: {e}"));
        assert_eq!(points.len(), fractions.len());
        for pair in points.windows(2) {
            assert!(
                pair[0].psnr_db >= pair[1].psnr_db,
                "{name}: PSNR rose between fractions: {pair:?}"
            );
        }
    }
    println!(
        "ACCEPTANCE C5 occlusion robustness (monotone PSNR over 4 fractions x 25 images): PASS"
    );
}

/// Criterion 6: flipping any sampled raw-key bit rewrites at least 25% of
/// a 64x64 keystream.
#[test]
fn c06_key_avalanche() {
    let cfg = cfg();
    let mut rng = TestRng::new(2024);
    let mut min_fraction = 1.0f64;
    for sample in 0..20 {
        let mut t = [0u8; 16];
        for b in &mut t {
            *b = rng.byte();
        }
        let key = RawKey::new(t);
        let bit = (rng.next_u32() % 128) as u8;
        let (h1, h2) = (rng.byte(), rng.byte());
        let base = keyforge::derive_params_from_hashes(&key, h1, h2);
        let flipped = keyforge::derive_params_from_hashes(&key.with_flipped_bit(bit), h1, h2);
        let a = chaoscrypt::generate_keystream(&base, &cfg.template, 4096, cfg.dt).unwrap();
        let b = chaoscrypt::generate_keystream(&flipped, &cfg.template, 4096, cfg.dt).unwrap();
        let differing = a
            .bytes()
            .iter()
            .zip(b.bytes())
            .filter(|(x, y)| x != y)
            .count();
        let fraction = differing as f64 / 4096.0;
        assert!(
            fraction >= 0.25,
            "sample {sample} (bit {bit}): only {fraction:.3} of bytes changed"
        );
        min_fraction = min_fraction.min(fraction);
    }
    println!(
        "ACCEPTANCE C6 key avalanche (min changed fraction {min_fraction:.4} >= 0.25 over 20 samples): PASS"
    );
}

/// Criterion 7: the dt = 0.005 RK4 trajectory stays within 1e-6 of a
/// dt = 1e-5 reference over t in [0, 1] in the linear regime.
#[test]
fn c07_integrator_accuracy() {
    let tpl = CnnTemplate::default();
    let x0 = [0.01, 0.01, 0.01];

    let mut state = chaoscrypt::CnnState::new(x0[0], x0[1], x0[2]);
    for _ in 0..200 {
        state = chaoscrypt::rk4_step(&state, &tpl, 0.005).unwrap();
    }

    // Independent reference integrator at dt = 1e-5.
    let f = |x: [f64; 3]| -> [f64; 3] {
        let sat = |v: f64| ((v + 1.0).abs() - (v - 1.0).abs()) / 2.0;
        let y = [sat(x[0]), sat(x[1]), sat(x[2])];
        [
            -x[0] + tpl.a1 * y[0] + tpl.b11 * y[0] + tpl.b12 * y[1],
            -x[1] + y[0] + y[2],
            -x[2] + tpl.b32 * y[1] + tpl.b33 * y[2],
        ]
    };
    let dt = 1e-5;
    let mut x = x0;
    let mut max_abs = 0.0f64;
    for _ in 0..100_000 {
        let k1 = f(x);
        let k2 = f([
            x[0] + dt / 2.0 * k1[0],
            x[1] + dt / 2.0 * k1[1],
            x[2] + dt / 2.0 * k1[2],
        ]);
        let k3 = f([
            x[0] + dt / 2.0 * k2[0],
            x[1] + dt / 2.0 * k2[1],
            x[2] + dt / 2.0 * k2[2],
        ]);
        let k4 = f([x[0] + dt * k3[0], x[1] + dt * k3[1], x[2] + dt * k3[2]]);
        for j in 0..3 {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            max_abs = max_abs.max(x[j].abs());
        }
    }
    assert!(
        max_abs < 1.0,
        "trajectory left the linear regime: {max_abs}"
    );
    let err = (0..3)
        .map(|j| (state.x[j] - x[j]).abs())
        .fold(0.0f64, f64::max);
    assert!(err < 1e-6, "integrator error {err:.3e}");
    println!(
        "ACCEPTANCE C7 integrator accuracy (max error {err:.3e} < 1e-6 over t in [0,1]): PASS"
    );
}

/// Criterion 8: two identical CLI invocations produce byte-identical
/// artifacts and stdout.
#[test]
fn c08_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cover_path = dir.path().join("cover.pgm");
    let message_path = dir.path().join("message.pgm");
    chaosveil::codec::save_image(&corpus(256, 256)[0].1, &cover_path).unwrap();
    chaosveil::codec::save_image(&message_image(42, 48, 48), &message_path).unwrap();

    let run_all = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let sub = dir.path().join(tag);
        std::fs::create_dir_all(&sub).unwrap();
        let stego = sub.join("stego.pgm");
        let out = sub.join("revealed.pgm");
        let csv = sub.join("report.csv");
        let mut artifacts = Vec::new();
        for (name, args) in [
            (
                "conceal",
                vec![
                    cover_path.to_str().unwrap().to_string(),
                    message_path.to_str().unwrap().to_string(),
                    stego.to_str().unwrap().to_string(),
                ],
            ),
            (
                "reveal",
                vec![
                    stego.to_str().unwrap().to_string(),
                    out.to_str().unwrap().to_string(),
                ],
            ),
        ] {
            let output = Command::new(env!("CARGO_BIN_EXE_chaosveil"))
                .arg(name)
                .args(&args)
                .output()
                .unwrap();
            assert!(output.status.success(), "{name} failed: {output:?}");
            artifacts.push((format!("{name}-stdout"), output.stdout));
        }
        // Relative CSV path with a per-run working directory keeps the
        // echoed path identical between runs.
        let output = Command::new(env!("CARGO_BIN_EXE_chaosveil"))
            .current_dir(&sub)
            .args([
                "analyze",
                stego.to_str().unwrap(),
                "--reference",
                cover_path.to_str().unwrap(),
                "--csv",
                "report.csv",
            ])
            .output()
            .unwrap();
        assert!(output.status.success(), "analyze failed: {output:?}");
        artifacts.push(("analyze-stdout".into(), output.stdout));
        for (label, path) in [("stego", &stego), ("revealed", &out), ("csv", &csv)] {
            artifacts.push((label.to_string(), std::fs::read(path).unwrap()));
        }
        artifacts
    };

    let first = run_all("a");
    let second = run_all("b");
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(&second) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "{name_a} differs between runs");
    }
    println!("ACCEPTANCE C8 determinism (conceal/reveal/analyze byte-identical across runs): PASS");
}

/// Criterion 9: synthetic five-blob image; every blob localized within
/// 2 px, descriptors unit-norm, and +20% brightness leaves matched
/// descriptors unchanged within 1e-5.
#[test]
fn c09_sift_sanity() {
    let cfg = cfg();
    let blobs = [
        (52.0, 52.0, 3.0, 200.0),
        (204.0, 52.0, 4.0, 195.0),
        (52.0, 204.0, 3.5, 190.0),
        (204.0, 204.0, 4.5, 200.0),
        (128.0, 128.0, 3.0, 185.0),
    ];
    // Pixel values are multiples of 5, so the 6/5 brightness scale is exact
    // in u8 and cannot introduce quantization noise.
    let img = gaussian_blobs(256, 256, &blobs, 5);
    let descriptors = sift::detect_and_describe(&img, &cfg.sift).unwrap();

    let mut located = 0;
    for &(cx, cy, _, _) in &blobs {
        if descriptors
            .iter()
            .any(|d| (d.keypoint.x - cx).abs() <= 2.0 && (d.keypoint.y - cy).abs() <= 2.0)
        {
            located += 1;
        }
    }
    assert!(
        located >= 5,
        "only {located} of 5 blobs localized within 2 px"
    );

    for d in &descriptors {
        let norm: f64 = d.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6, "descriptor norm {norm}");
    }

    let brighter = img.map(|p| (p as u16 * 6 / 5) as u8);
    let descriptors2 = sift::detect_and_describe(&brighter, &cfg.sift).unwrap();
    let mut matched = 0;
    let mut max_diff = 0.0f64;
    for a in &descriptors {
        for b in &descriptors2 {
            if (a.keypoint.x - b.keypoint.x).abs() < 0.5
                && (a.keypoint.y - b.keypoint.y).abs() < 0.5
                && (a.keypoint.theta - b.keypoint.theta).abs() < 0.01
            {
                matched += 1;
                for (u, v) in a.values.iter().zip(&b.values) {
                    max_diff = max_diff.max((u - v).abs());
                }
            }
        }
    }
    assert!(
        matched >= 5,
        "only {matched} descriptors matched across brightness change"
    );
    assert!(
        max_diff < 1e-5,
        "descriptor drift {max_diff:.2e} under +20% brightness"
    );
    println!(
        "ACCEPTANCE C9 detector sanity ({located}/5 blobs, unit norms, brightness drift {max_diff:.1e} < 1e-5): PASS"
    );
}

/// Criterion 10: the raw key derived from the cover equals the raw key
/// derived from the stego image, for 50 random pairs.
#[test]
fn c10_key_stability() {
    let cfg = cfg();
    let covers = corpus(256, 256);
    for i in 0..50usize {
        let cover = &covers[i % covers.len()].1;
        let message = message_image(1_100 + i as u64, 32, 32);
        let sender_key = pipeline::derive_raw_key(cover, &cfg).unwrap();
        let outcome = pipeline::conceal(cover, &message, &cfg).unwrap();
        let receiver_key = pipeline::derive_raw_key(&outcome.stego, &cfg).unwrap();
        assert_eq!(sender_key, receiver_key, "key mismatch on pair {i}");
    }
    println!("ACCEPTANCE C10 key stability (cover key == stego key, 50 pairs): PASS");
}
