//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any failed. The full-dataset criteria
//! (1, 7, 8) run the complete pipeline twice.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use hifdiff::features::{Cwt, WaveletParams};
use hifdiff::learn::{fit, Criterion, Dataset, Distance, FittedState, Hyperparameters, KernelKind, Matrix};
use hifdiff::metrics::{balanced_accuracy, dependability, security, ConfusionCounts};
use hifdiff::pipeline::{
    cmd_features, cmd_generate, cmd_train_eval, load_manifest, PipelineConfig, TrainEvalReport, FEATURES_FILE,
    MANIFEST_FILE, RANKING_FILE, REPORT_JSON,
};
use hifdiff::scenario::{enumerate_external, enumerate_hif};
use hifdiff::synth::{synthesize_external_detailed, synthesize_hif_detailed, SynthConfig, SynthModels};
use hifdiff::{ClassLabel, EventType};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// ---------------------------------------------------------------- 1

fn dataset_population(dir: &Path) -> Outcome {
    let cfg = PipelineConfig {
        out_dir: dir.to_path_buf(),
        ..PipelineConfig::default()
    };
    let t = Instant::now();
    cmd_generate(&cfg).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let specs = load_manifest(dir).map_err(|e| e.to_string())?;
    let count = |t: EventType| specs.iter().filter(|s| s.event_type == t).count();
    let (t1, hif, ext) = (
        count(EventType::Type1Internal),
        count(EventType::Type2Hif),
        count(EventType::ExternalCtSat),
    );
    let detail = format!("type-1 {t1}, HIF {hif}, external {ext}, {:.1} s", elapsed.as_secs_f64());
    check(t1 == 875 && hif == 300 && ext == 1000, detail.clone())?;
    check(elapsed < Duration::from_secs(300), format!("too slow: {detail}"))?;
    Ok(detail)
}

// ---------------------------------------------------------------- 2

fn metric_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let c = ConfusionCounts {
            tp: rng.gen_range(0..3000),
            fn_: rng.gen_range(0..3000),
            tn: rng.gen_range(0..3000),
            fp: rng.gen_range(0..3000),
        };
        if c.positives() == 0 || c.negatives() == 0 {
            continue;
        }
        let mut pairs = Vec::new();
        let (i, e) = (ClassLabel::Internal, ClassLabel::External);
        pairs.extend(std::iter::repeat((i, i)).take(c.tp as usize));
        pairs.extend(std::iter::repeat((e, i)).take(c.fn_ as usize));
        pairs.extend(std::iter::repeat((e, e)).take(c.tn as usize));
        pairs.extend(std::iter::repeat((i, e)).take(c.fp as usize));
        pairs.shuffle(&mut rng);

        // brute-force recount over (prediction, label)
        let (mut hit_pos, mut n_pos, mut hit_neg, mut n_neg) = (0u64, 0u64, 0u64, 0u64);
        for &(pred, actual) in &pairs {
            if actual == ClassLabel::Internal {
                n_pos += 1;
                hit_pos += u64::from(pred == ClassLabel::Internal);
            } else {
                n_neg += 1;
                hit_neg += u64::from(pred == ClassLabel::External);
            }
        }
        let dep = hit_pos as f64 / n_pos as f64;
        let sec = hit_neg as f64 / n_neg as f64;
        let ba = 0.5 * (dep + sec);

        let counted = ConfusionCounts::from_predictions(pairs.iter().copied());
        for cc in [c, counted] {
            let d: f64 = dependability(&cc).map_err(|e| e.to_string())?;
            let s: f64 = security(&cc).map_err(|e| e.to_string())?;
            let b: f64 = balanced_accuracy(&cc).map_err(|e| e.to_string())?;
            check(
                d.to_bits() == dep.to_bits() && s.to_bits() == sec.to_bits() && b.to_bits() == ba.to_bits(),
                format!("{cc:?}: ({d}, {s}, {b}) vs ({dep}, {sec}, {ba})"),
            )?;
        }
    }
    Ok("1000 random count sets agree bit-for-bit".into())
}

// ---------------------------------------------------------------- 3

fn psi_oracle(t: f64, p: f64, q: f64) -> f64 {
    let u = (t - q) / p;
    2.0 / ((3.0 * p).sqrt() * std::f64::consts::PI.powf(0.25)) * (1.0 - u * u) * (-0.5 * u * u).exp()
}

fn cwt_oracle() -> Outcome {
    let cfg = SynthConfig::default();
    let dt = cfg.dt();
    let n = cfg.sample_count();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        // log-uniform scale over the configured 0.25..32 ms range
        let p = 0.25e-3 * 2f64.powf(rng.gen_range(0.0..7.0));
        let params = WaveletParams {
            scales: vec![p],
            ..WaveletParams::default()
        };
        let cwt = Cwt::new(params, dt).map_err(|e| e.to_string())?;
        let h = cwt.half_width(0);
        let q = rng.gen_range(h..n - h);
        // a wavelet-shaped component at the analysed (p, q) keeps the
        // coefficient away from zero so the relative error is meaningful
        let bump = rng.gen_range(0.5..2.0);
        let tones: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| (rng.gen_range(0.1..1.0), rng.gen_range(10.0..2000.0), rng.gen_range(0.0..6.3)))
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                bump * psi_oracle(t, p, q as f64 * dt)
                    + tones.iter().map(|(a, f, ph)| a * (2.0 * std::f64::consts::PI * f * t + ph).sin()).sum::<f64>()
                    + 0.05 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
            })
            .collect();
        let (got, flagged) = cwt.coefficient(&y, 0, q);
        let oracle: f64 = (0..n).map(|k| y[k] * psi_oracle(k as f64 * dt, p, q as f64 * dt) * dt).sum();
        let rel = (got - oracle).abs() / oracle.abs();
        worst = worst.max(rel);
        check(!flagged, format!("interior shift flagged at p={p}"))?;
        check(rel <= 1e-6, format!("p={p:.3e} q={q}: {got} vs {oracle} (rel {rel:.2e})"))?;
    }
    let mut worst_mean: f64 = 0.0;
    let wp = WaveletParams::<f64>::default();
    let cwt = Cwt::new(wp.clone(), dt).map_err(|e| e.to_string())?;
    for (i, &p) in wp.scales.iter().enumerate() {
        let h = cwt.half_width(i) as i64;
        let mean: f64 = (-h..=h).map(|k| psi_oracle(k as f64 * dt, p, 0.0) * dt).sum();
        worst_mean = worst_mean.max(mean.abs()).max(cwt.kernel_mean(i).abs());
    }
    check(worst_mean <= 1e-6, format!("discrete mean {worst_mean:.2e}"))?;
    Ok(format!(
        "20 triples, max rel error {worst:.2e}; max |discrete mean| {worst_mean:.2e} over {} scales",
        wp.scales.len()
    ))
}

// ---------------------------------------------------------------- 4

fn hif_properties() -> Outcome {
    let cfg = SynthConfig::default();
    let models = SynthModels::default();
    let n0 = cfg.fault_start_index();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let specs: Vec<_> = enumerate_hif(rng.gen()).choose_multiple(&mut rng, 10).cloned().collect();
    let expected_seg = (0.2e-3 * cfg.sampling_rate_hz).round() as usize;
    for spec in &specs {
        let r = synthesize_hif_detailed(spec, &cfg, &models.hif).map_err(|e| e.to_string())?;
        let i = &r.clean_current;
        for k in 0..i.len() {
            let v = r.phase_voltage[k];
            let in_band = k < n0 || (r.vn[k] < v && v < r.vp[k]);
            check(!in_band || i[k] == 0.0, format!("scenario {}: i[{k}] = {} in dead band", spec.id, i[k]))?;
        }
        check(
            (r.vp_nominal.abs() - r.vn_nominal.abs()).abs() > 0.0,
            format!("scenario {}: symmetric sources", spec.id),
        )?;
        let pos = i.iter().cloned().fold(0.0, f64::max);
        let neg = -i.iter().cloned().fold(0.0, f64::min);
        check(
            pos > 0.0 && neg > 0.0 && (pos - neg).abs() > 1e-3 * pos.max(neg),
            format!("scenario {}: half-cycle peaks {pos} / {neg}", spec.id),
        )?;
        for rs in [&r.rp, &r.rn] {
            let mut k = n0;
            while k < rs.len() {
                let mut end = k + 1;
                while end < rs.len() && rs[end] == rs[k] {
                    end += 1;
                }
                let len = end - k;
                let last = end == rs.len();
                check(
                    len == expected_seg || (last && len < expected_seg),
                    format!("scenario {}: resistance segment of {len} samples at {k}", spec.id),
                )?;
                k = end;
            }
        }
    }
    Ok(format!("10 HIF scenarios: dead band exact, asymmetric peaks, {expected_seg}-sample resistance segments"))
}

// ---------------------------------------------------------------- 5

fn ct_properties() -> Outcome {
    let cfg = SynthConfig::default();
    let base = SynthModels::default().ct;
    let n0 = cfg.fault_start_index();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let specs: Vec<_> = enumerate_external(rng.gen()).choose_multiple(&mut rng, 10).cloned().collect();
    let noise = cfg.noise_std();
    let mut saturating = 0;
    for spec in &specs {
        let b = base.burden_ohm[1];
        let equal = hifdiff::synth::CtParams {
            burden_ohm: [b, b],
            ..base.clone()
        };
        let eq = synthesize_external_detailed(spec, &cfg, &equal).map_err(|e| e.to_string())?;
        check(
            eq.clean_differential.iter().flatten().all(|&v| v == 0.0),
            format!("scenario {}: equal burdens leave a differential", spec.id),
        )?;
        for p in 0..3 {
            let rms = eq.waveform.rms(p, 0..eq.waveform.len());
            check(rms < 1.2 * noise, format!("scenario {}: rms {rms} above noise {noise}", spec.id))?;
        }

        let uneq = synthesize_external_detailed(spec, &cfg, &base).map_err(|e| e.to_string())?;
        if let Some(onset) = uneq.differential_onset() {
            saturating += 1;
            check(onset > n0, format!("scenario {}: onset {onset} <= inception {n0}", spec.id))?;
        }

        let unclamped = hifdiff::synth::CtParams {
            saturation_flux_vs: f64::INFINITY,
            ..base.clone()
        };
        let inf = synthesize_external_detailed(spec, &cfg, &unclamped).map_err(|e| e.to_string())?;
        check(
            inf.waveform == eq.waveform,
            format!("scenario {}: infinite clamp differs from equal burdens", spec.id),
        )?;
    }
    check(saturating > 0, "no sampled external scenario saturates")?;
    Ok(format!("10 external scenarios ({saturating} saturating): equal burdens at noise floor, onset after inception, infinite clamp matches"))
}

// ---------------------------------------------------------------- 6

fn ds(rows: Vec<Vec<f64>>, y: &[bool]) -> Dataset {
    let d = rows[0].len();
    Dataset::new(
        (0..rows.len() as u64).collect(),
        Matrix::from_rows(&rows).unwrap(),
        y.iter().map(|&b| if b { ClassLabel::Internal } else { ClassLabel::External }).collect(),
        (0..d).map(|j| format!("x{j}")).collect(),
    )
    .unwrap()
}

fn train_accuracy(m: &hifdiff::learn::TrainedModel, rows: &[Vec<f64>], y: &[bool]) -> f64 {
    rows.iter()
        .zip(y)
        .filter(|(r, &t)| m.predict_row(r).unwrap().is_positive() == t)
        .count() as f64
        / rows.len() as f64
}

fn classifier_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let normal = |rng: &mut ChaCha8Rng| Distribution::<f64>::sample(&StandardNormal, rng);

    let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..5).map(|_| normal(&mut rng)).collect()).collect();
    let y: Vec<bool> = rows.iter().map(|r| r[0] * r[1] + r[2] > 0.0).collect();
    let knn = fit(
        &Hyperparameters::Knn {
            leaf_size: 3,
            neighbors: 1,
            distance: Distance::Euclidean,
        },
        &ds(rows.clone(), &y),
        0,
    )
    .map_err(|e| e.to_string())?;
    let knn_acc = train_accuracy(&knn, &rows, &y);
    check(knn_acc == 1.0, format!("1-NN training accuracy {knn_acc}"))?;

    let sep: Vec<Vec<f64>> = (0..100)
        .map(|i| vec![normal(&mut rng), if i % 2 == 0 { 1.0 } else { -1.0 } + 0.3 * normal(&mut rng).clamp(-2.0, 2.0)])
        .collect();
    let sy: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
    let tree = fit(
        &Hyperparameters::DecisionTree {
            criterion: Criterion::Entropy,
        },
        &ds(sep.clone(), &sy),
        0,
    )
    .map_err(|e| e.to_string())?;
    let FittedState::DecisionTree(t) = &tree.state else { unreachable!() };
    let tree_acc = train_accuracy(&tree, &sep, &sy);
    check(t.depth() == 1 && tree_acc == 1.0, format!("tree depth {} accuracy {tree_acc}", t.depth()))?;

    let blobs = |n: usize, rng: &mut ChaCha8Rng| {
        let mut r = Vec::new();
        let mut l = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 0;
            let m = if pos { 3.0 } else { -3.0 };
            r.push((0..2).map(|_| m + normal(rng)).collect::<Vec<f64>>());
            l.push(pos);
        }
        (r, l)
    };
    let (tr, ty) = blobs(500, &mut rng);
    let (te, tey) = blobs(1000, &mut rng);
    let nb = fit(&Hyperparameters::NaiveBayes, &ds(tr, &ty), 0).map_err(|e| e.to_string())?;
    let nb_acc = train_accuracy(&nb, &te, &tey);
    let bayes_acc = te.iter().zip(&tey).filter(|(r, &t)| (r[0] + r[1] > 0.0) == t).count() as f64 / 1000.0;
    check(nb_acc > 0.99, format!("naive Bayes accuracy {nb_acc} (Bayes rule {bayes_acc})"))?;

    let svm_rows: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| normal(&mut rng)).collect()).collect();
    let svm_y: Vec<bool> = svm_rows.iter().map(|r| r[0] - r[1] * r[2] > 0.0).collect();
    let gamma = 0.3;
    let svm = fit(
        &Hyperparameters::Svm {
            c: 100.0,
            gamma,
            kernel: KernelKind::Rbf,
        },
        &ds(svm_rows, &svm_y),
        0,
    )
    .map_err(|e| e.to_string())?;
    let FittedState::Svm(s) = &svm.state else { unreachable!() };
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| 2.0 * normal(&mut rng)).collect();
        let z: Vec<f64> = (0..3).map(|j| (x[j] - svm.standardizer.mean[j]) / svm.standardizer.scale[j]).collect();
        let mut oracle = s.intercept;
        for i in 0..s.support_vectors.rows() {
            let sv = s.support_vectors.row(i);
            let d2: f64 = (0..3).map(|j| (sv[j] - z[j]).powi(2)).sum();
            oracle += s.dual_coef[i] * (-gamma * d2).exp();
        }
        let got = svm.score_row(&x).map_err(|e| e.to_string())?;
        worst = worst.max((got - oracle).abs());
        check(
            svm.predict_row(&x).unwrap().is_positive() == (oracle > 0.0),
            "svm prediction disagrees with the sign of the oracle",
        )?;
    }
    check(worst <= 1e-6, format!("svm decision differs from oracle by {worst:.2e}"))?;
    Ok(format!(
        "1-NN {knn_acc}, depth-1 tree {tree_acc}, naive Bayes {nb_acc} (Bayes rule {bayes_acc}), svm |f - oracle| <= {worst:.1e}"
    ))
}

// ---------------------------------------------------------------- 7, 8

struct FullRun {
    report: TrainEvalReport,
    elapsed: Duration,
}

fn full_run(data: &Path, work: &Path, generate: bool) -> Result<FullRun, String> {
    let cfg = PipelineConfig::default();
    let t = Instant::now();
    if generate {
        cmd_generate(&PipelineConfig {
            out_dir: data.to_path_buf(),
            ..cfg.clone()
        })
        .map_err(|e| e.to_string())?;
    }
    let feat = work.join("features");
    cmd_features(
        data,
        &PipelineConfig {
            out_dir: feat.clone(),
            ..cfg.clone()
        },
    )
    .map_err(|e| e.to_string())?;
    let report = cmd_train_eval(
        &feat,
        &PipelineConfig {
            out_dir: work.join("eval"),
            ..cfg
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(FullRun {
        report,
        elapsed: t.elapsed(),
    })
}

fn directional_reproduction(run: &FullRun) -> Outcome {
    let r = &run.report;
    let good = r.reports.iter().filter(|e| e.balanced_accuracy >= 0.95).count();
    let best = r.best().ok_or("no reports")?;
    let table: Vec<String> = r
        .reports
        .iter()
        .map(|e| {
            format!(
                "{} {:.4}/{:.4}/{:.4} hif {:.4}",
                e.classifier,
                e.balanced_accuracy,
                e.dependability,
                e.security,
                e.hif_dependability.unwrap_or(f64::NAN)
            )
        })
        .collect();
    let detail = format!(
        "{good}/7 with BA >= 0.95; best {} BA {:.4} dependability {:.4} HIF-only dependability {:.4}; wavelet feature in top 20: {}; {:.0} s; [{}]",
        best.classifier,
        best.balanced_accuracy,
        best.dependability,
        best.hif_dependability.unwrap_or(f64::NAN),
        r.wavelet_in_top_ranked,
        run.elapsed.as_secs_f64(),
        table.join("; ")
    );
    check(r.reports.len() == 7, detail.clone())?;
    check(good >= 4, detail.clone())?;
    check(best.balanced_accuracy >= 0.98 && best.dependability >= 0.97, detail.clone())?;
    check(run.elapsed <= Duration::from_secs(3600), detail.clone())?;
    Ok(detail)
}

fn reproducibility(a_data: &Path, a_work: &Path, b_data: &Path, b_work: &Path) -> Outcome {
    full_run(b_data, b_work, true)?;
    let pairs: [(PathBuf, PathBuf); 4] = [
        (a_data.join(MANIFEST_FILE), b_data.join(MANIFEST_FILE)),
        (a_work.join("features").join(FEATURES_FILE), b_work.join("features").join(FEATURES_FILE)),
        (a_work.join("features").join(RANKING_FILE), b_work.join("features").join(RANKING_FILE)),
        (a_work.join("eval").join(REPORT_JSON), b_work.join("eval").join(REPORT_JSON)),
    ];
    for (a, b) in &pairs {
        let x = fs::read(a).map_err(|e| format!("{}: {e}", a.display()))?;
        let y = fs::read(b).map_err(|e| format!("{}: {e}", b.display()))?;
        check(x == y, format!("{} differs between runs", a.file_name().unwrap().to_string_lossy()))?;
    }
    Ok("manifest, feature CSV, ranking and report JSON byte-identical across two runs".into())
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let (ok, line) = match &outcome {
        Ok(d) => (true, format!("[PASS] {name}: {d}")),
        Err(d) => (false, format!("[FAIL] {name}: {d}")),
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
    ok
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let a_data = tmp.path().join("a/data");
    let a_work = tmp.path().join("a");
    let mut results = Vec::new();

    results.push(run("1 dataset population", || dataset_population(&a_data)));
    results.push(run("2 metric exactness", metric_exactness));
    results.push(run("3 cwt oracle", cwt_oracle));
    results.push(run("4 hif model properties", hif_properties));
    results.push(run("5 ct saturation properties", ct_properties));
    results.push(run("6 classifier sanity", classifier_sanity));

    let first = if a_data.join(MANIFEST_FILE).is_file() {
        full_run(&a_data, &a_work, false)
    } else {
        Err("dataset from criterion 1 missing".into())
    };
    results.push(run("7 directional reproduction", || match &first {
        Ok(r) => directional_reproduction(r),
        Err(e) => Err(e.clone()),
    }));
    results.push(run("8 reproducibility", || {
        first.as_ref().map_err(Clone::clone)?;
        reproducibility(&a_data, &a_work, &tmp.path().join("b/data"), &tmp.path().join("b"))
    }));

    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
