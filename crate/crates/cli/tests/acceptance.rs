//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`. Set `ACCEPTANCE_ONLY=2,7` to run
//! a subset.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use mos::flow::{block_match_flow, tvl1_flow, Tvl1Params};
use mos::fusion::{fuse, multi_split_average, predict_video, FusionWeights};
use mos::io::flo::{read_flo, write_flo};
use mos::io::manifest::{Manifest, Split};
use mos::io::pnm::{read_pgm, read_ppm, write_pgm, write_ppm};
use mos::io::synth::{gen_synthetic, SyntheticSpec};
use mos::io::tensor::{read_tensor, write_tensor};
use mos::io::{read_file, read_frames};
use mos::motion::{angle_degrees, magnitude, mos_images, mos_pixel, orientation, rescale_to_byte, xy_images, MosPair, MosParams};
use mos::net::{gradient_check, read_checkpoint, train, write_checkpoint, LayerSpec, Net, NetConfig, Shape, TrainConfig};
use mos::pipeline::{frames_to_mos, Clip, PipelineParams};
use mos::texture::{random_texture, translate};
use mos::volume::{ChannelSelect, InputVolume, StackSpec};
use mos::{ByteImage, FlowField, RescaleBounds, RgbImage, Rng, ScoreVector};

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [Criterion; 10] = [
        (1, "equation examples", equations),
        (2, "flow accuracy", flow_accuracy),
        (3, "zero motion", zero_motion),
        (4, "gradient checks", gradient_checks),
        (5, "end-to-end classification", end_to_end),
        (6, "magnitude ablation", ablation),
        (7, "fusion arithmetic", fusion_arithmetic),
        (8, "split average", split_average),
        (9, "format round trips", round_trips),
        (10, "pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (n, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail} ({secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn equations() -> Outcome {
    let start = Instant::now();
    let b = RescaleBounds::new(-15.0, 15.0).unwrap();
    for (value, byte) in [(-15.0, 0), (15.0, 255), (20.0, 255), (0.0, 128), (-20.0, 0)] {
        check(rescale_to_byte(value, b) == byte, format!("rescale({value}) != {byte}"))?;
    }
    for ((u, v), m) in [((3.0, 4.0), 5.0), ((0.0, 0.0), 0.0), ((-3.0, -4.0), 5.0)] {
        let got = magnitude(&FlowField::uniform(1, 1, u, v)).data()[0];
        check(got == m, format!("|({u},{v})| = {got}"))?;
    }
    for ((u, v), deg) in [((1.0, 1.0), 45.0), ((-1.0, 0.0), 180.0), ((0.0, 0.0), 0.0), ((-1.0, -0.0), 180.0)] {
        let got = orientation(&FlowField::uniform(1, 1, u, v)).data()[0];
        check(got == deg, format!("angle({u},{v}) = {got}"))?;
    }
    check(angle_degrees(0.0, -1.0) == -90.0, "angle(0,-1)")?;
    let d = MosParams::default();
    check(mos_pixel(0.0, 0.0, &d) == (128, 128), "still pixel")?;
    check(mos_pixel(10.0, 0.0, &d) == (213, 128), "(10,0) pixel")?;
    let filtered = MosParams {
        mag_bounds: RescaleBounds::new(0.0, 10.2).unwrap(),
        ..d
    };
    check(mos_pixel(0.0, 4.0, &filtered) == (100, 128), "m = 128 filter")?;
    let pair = mos_images(&FlowField::uniform(3, 2, 3.0, 0.0), &d);
    check(pair.magnitude.data().iter().all(|&m| m == 153), "speed-3 magnitude byte")?;
    let xy = xy_images(&FlowField::zeros(2, 2), b);
    check(xy.flow_x.data().iter().chain(xy.flow_y.data()).all(|&p| p == 128), "zero flow x/y")?;
    check(xy_images(&FlowField::uniform(2, 2, 15.0, 0.0), b).flow_x.data() == [255; 4], "u = 15")?;
    check(xy_images(&FlowField::uniform(2, 2, -20.0, 0.0), b).flow_x.data() == [0; 4], "u = -20")?;
    let t = start.elapsed();
    check(t < Duration::from_secs(1), format!("took {t:?}"))?;
    Ok("rescale, magnitude, orientation and filter examples bit-exact".into())
}

const MARGIN: f64 = 0.1;

fn flow_accuracy() -> Outcome {
    let params = Tvl1Params::default();
    let (mut worst_tv, mut worst_cross, mut slowest) = (0.0f64, 0.0f64, Duration::ZERO);
    for seed in 0..20 {
        let mut rng = Rng::with_stream(seed, 7);
        let (dx, dy) = loop {
            let dx = rng.uniform(9).unwrap() as i64 - 4;
            let dy = rng.uniform(9).unwrap() as i64 - 4;
            if dx * dx + dy * dy <= 16 {
                break (dx as f64, dy as f64);
            }
        };
        let prev = random_texture(128, 128, 1.5, &mut rng);
        let next = translate(&prev, dx, dy);
        let truth = FlowField::uniform(128, 128, dx, dy);
        let start = Instant::now();
        let tv = tvl1_flow(&prev, &next, &params).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        let oracle = block_match_flow(&prev, &next, 7, 4).map_err(|e| e.to_string())?;
        let tv_epe = tv.interior_epe(&truth, MARGIN);
        let oracle_epe = oracle.interior_epe(&truth, MARGIN);
        let cross = tv.interior_epe(&oracle, MARGIN);
        check(tv_epe <= 0.3, format!("seed {seed} shift ({dx},{dy}): TV-L1 EPE {tv_epe:.4}"))?;
        check(oracle_epe == 0.0, format!("seed {seed}: block-match EPE {oracle_epe}"))?;
        check(cross <= 0.75, format!("seed {seed}: TV-L1 vs oracle {cross:.4}"))?;
        worst_tv = worst_tv.max(tv_epe);
        worst_cross = worst_cross.max(cross);
    }
    check(slowest < Duration::from_secs(2), format!("slowest pair {slowest:?}"))?;
    Ok(format!(
        "worst TV-L1 EPE {worst_tv:.4} px, oracle exact, worst cross EPE {worst_cross:.4} px, slowest pair {:.0} ms",
        slowest.as_secs_f64() * 1e3
    ))
}

fn zero_motion() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let img = random_texture(64, 64, 1.5, &mut Rng::new(seed));
        let flow = tvl1_flow(&img, &img, &Tvl1Params::default()).map_err(|e| e.to_string())?;
        let mean = flow.mean_magnitude();
        check(mean <= 0.05, format!("seed {seed}: mean |flow| {mean}"))?;
        let pair = mos_images(&flow, &MosParams::default());
        check(
            pair.magnitude.data().iter().all(|&m| m.abs_diff(128) <= 1),
            format!("seed {seed}: magnitude byte off 128"),
        )?;
        worst = worst.max(mean);
    }
    Ok(format!("worst mean |flow| {worst:.2e} px, magnitude bytes within 128 +- 1"))
}

fn gradient_checks() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for seed in 0..20u64 {
        let mut rng = Rng::with_stream(seed, 4);
        let input = Shape::new(1 + rng.uniform(3).unwrap(), 6 + rng.uniform(4).unwrap(), 6 + rng.uniform(4).unwrap());
        let kernel = 1 + rng.uniform(3).unwrap();
        let config = NetConfig {
            input,
            classes: 3,
            layers: vec![
                LayerSpec::Conv {
                    out_channels: 2,
                    kernel,
                    stride: 1 + rng.uniform(2).unwrap(),
                    padding: rng.uniform(kernel).unwrap(),
                },
                LayerSpec::Relu,
                LayerSpec::Conv {
                    out_channels: 3,
                    kernel: 1,
                    stride: 1,
                    padding: 0,
                },
                LayerSpec::MaxPool,
                LayerSpec::Dense { outputs: 6 },
                LayerSpec::Relu,
                LayerSpec::Dropout { rate: 0.5 },
                LayerSpec::Dense { outputs: 3 },
            ],
        };
        let mut net = Net::new(config, &mut rng).map_err(|e| format!("seed {seed}: {e}"))?;
        // every parameter random, so no gradient is trivially zero
        for p in net.params_mut() {
            p.iter_mut().for_each(|w| *w = rng.range(-0.5, 0.5));
        }
        let data = (0..input.len()).map(|_| rng.range(-1.0, 1.0)).collect();
        let x = InputVolume::new(input.c, input.h, input.w, data).unwrap();
        let target = rng.uniform(3).unwrap();
        let r = gradient_check(&net, &x, target, seed, 1e-5).map_err(|e| e.to_string())?;
        check(
            r.max_relative_error <= 1e-5,
            format!("seed {seed}: relative error {:.2e}", r.max_relative_error),
        )?;
        worst = worst.max(r.max_relative_error);
        checked += 1;
    }
    Ok(format!("{checked} seeds, conv/relu/pool/dense/dropout, worst relative error {worst:.2e}"))
}

/// Shared data of criteria 5 and 6.
struct Task {
    train: Vec<Clip<MosPair>>,
    test: Vec<Clip<MosPair>>,
    classes: usize,
    prep: Duration,
}

const E2E_SEED: u64 = 2026;

fn task() -> &'static Result<Task, String> {
    static TASK: OnceLock<Result<Task, String>> = OnceLock::new();
    TASK.get_or_init(|| {
        let start = Instant::now();
        let spec = SyntheticSpec {
            seed: E2E_SEED,
            ..SyntheticSpec::default()
        };
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let manifest = gen_synthetic(&spec, dir.path()).map_err(|e| e.to_string())?;
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for e in manifest.entries() {
            let frames = read_frames(&dir.path().join(&e.path)).map_err(|e| e.to_string())?;
            let pairs = frames_to_mos(&frames, &Tvl1Params::default(), &MosParams::default()).map_err(|e| e.to_string())?;
            let clip = Clip {
                id: e.path.clone(),
                class: e.class_index,
                pairs,
            };
            match e.split {
                Split::Train => train.push(clip),
                Split::Test => test.push(clip),
            }
        }
        Ok(Task {
            train,
            test,
            classes: manifest.class_count(),
            prep: start.elapsed(),
        })
    })
}

const OUT_SIDE: usize = 32;

fn train_and_score(select: ChannelSelect) -> Result<(f64, Duration), String> {
    let task = task().as_ref().map_err(|e| e.clone())?;
    let start = Instant::now();
    let pipeline = PipelineParams {
        stack: StackSpec {
            select,
            ..StackSpec::default()
        },
        out_side: OUT_SIDE,
        ..PipelineParams::default()
    };
    let cfg = TrainConfig {
        lr_step: 1500,
        max_iter: 2000,
        batch_size: 16,
        seed: E2E_SEED,
        ..TrainConfig::default()
    };
    let input = Shape::new(pipeline.stack.channels(), OUT_SIDE, OUT_SIDE);
    let mut net = Net::new(NetConfig::small(input, task.classes, 8, 16, 32, 0.5), &mut Rng::new(E2E_SEED)).map_err(|e| e.to_string())?;
    train(&mut net, &task.train, &pipeline, &cfg).map_err(|e| e.to_string())?;
    let mut correct = 0;
    for clip in &task.test {
        let p = predict_video(&net, &clip.id, &clip.pairs, &pipeline).map_err(|e| e.to_string())?;
        correct += usize::from(p.predicted() == clip.class);
    }
    Ok((correct as f64 / task.test.len() as f64, start.elapsed()))
}

static FULL_ACCURACY: OnceLock<Result<f64, String>> = OnceLock::new();

fn full_accuracy() -> Result<(f64, Option<Duration>), String> {
    let mut took = None;
    let acc = FULL_ACCURACY.get_or_init(|| {
        let (acc, t) = train_and_score(ChannelSelect::Both)?;
        took = Some(t);
        Ok(acc)
    });
    acc.clone().map(|a| (a, took))
}

fn end_to_end() -> Outcome {
    let (acc, took) = full_accuracy()?;
    let prep = task().as_ref().map_err(|e| e.clone())?.prep;
    let total = prep + took.unwrap_or_default();
    check(acc >= 0.9, format!("test accuracy {:.1}% < 90%", 100.0 * acc))?;
    check(total < Duration::from_secs(15 * 60), format!("took {total:?}"))?;
    Ok(format!(
        "test accuracy {:.1}% (data + flow {:.0} s, train + test {:.0} s)",
        100.0 * acc,
        prep.as_secs_f64(),
        took.unwrap_or_default().as_secs_f64()
    ))
}

fn ablation() -> Outcome {
    let (full, _) = full_accuracy()?;
    let (ori_only, _) = train_and_score(ChannelSelect::SecondOnly)?;
    let gap = 100.0 * (full - ori_only);
    check(
        gap >= 25.0,
        format!("orientation-only {:.1}% vs full {:.1}%: gap {gap:.1} pp", 100.0 * ori_only, 100.0 * full),
    )?;
    Ok(format!(
        "orientation-only {:.1}% vs full {:.1}%: gap {gap:.1} pp",
        100.0 * ori_only,
        100.0 * full
    ))
}

fn fusion_arithmetic() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "video_id,class_0,class_1\nv,0.8,0.2\n").unwrap();
    std::fs::write(&b, "video_id,class_0,class_1\nv,0.2,0.8\n").unwrap();
    let fused = |extra: &[&str]| -> Result<String, String> {
        let out = dir.path().join("f.csv");
        let status = Command::new(env!("CARGO_BIN_EXE_mos"))
            .arg("fuse")
            .args([&a, &b])
            .args(extra)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        check(status.success(), "fuse failed")?;
        std::fs::read_to_string(&out).map_err(|e| e.to_string())
    };
    let weighted = fused(&["--weights", "2,1"])?;
    check(
        weighted == "video_id,class_0,class_1\nv,0.600000000,0.400000000\n",
        format!("weighted fuse wrote {weighted:?}"),
    )?;
    let plain = fused(&[])?;
    check(
        plain == "video_id,class_0,class_1\nv,0.500000000,0.500000000\n",
        format!("unweighted fuse wrote {plain:?}"),
    )?;

    let mut rng = Rng::new(77);
    let random_scores = |rng: &mut Rng| ScoreVector::normalized((0..5).map(|_| rng.unit() + 1e-6).collect()).unwrap();
    for trial in 0..10_000 {
        let streams = [random_scores(&mut rng), random_scores(&mut rng)];
        let w = FusionWeights::new(vec![rng.range(0.1, 3.0), rng.range(0.1, 3.0)]).unwrap();
        let base = fuse(&streams, &w).unwrap().argmax();
        let c = rng.range(0.01, 100.0);
        let scaled_w = FusionWeights::new(w.weights().iter().map(|x| x * c).collect()).unwrap();
        check(fuse(&streams, &scaled_w).unwrap().argmax() == base, format!("trial {trial}: weight scaling"))?;
        let (w0, w1) = (w.weights()[0], w.weights()[1]);
        let raw: Vec<f64> = streams[0]
            .scores()
            .iter()
            .zip(streams[1].scores())
            .map(|(a, b)| w0 * (c * a) + w1 * (c * b))
            .collect();
        check(
            ScoreVector::normalized(raw).unwrap().argmax() == base,
            format!("trial {trial}: score scaling"),
        )?;
    }
    Ok("weights 2,1 -> 0.6/0.4, unweighted -> 0.5/0.5, argmax invariant over 10^4 random pairs".into())
}

fn split_average() -> Outcome {
    let mean = multi_split_average(&[90.8, 89.3, 91.5]).map_err(|e| e.to_string())?;
    let shown = format!("{mean:.1}");
    check(shown == "90.5", format!("reported {shown}"))?;
    Ok(format!("mean {mean:.4} reported as {shown}"))
}

fn round_trips() -> Outcome {
    for seed in 0..100u64 {
        let mut rng = Rng::with_stream(seed, 9);
        let w = 1 + rng.uniform(17).unwrap();
        let h = 1 + rng.uniform(17).unwrap();
        let bytes = |n: usize, rng: &mut Rng| (0..n).map(|_| rng.uniform(256).unwrap() as u8).collect::<Vec<u8>>();

        let gray = ByteImage::new(w, h, bytes(w * h, &mut rng)).unwrap();
        let file = write_pgm(&gray);
        check(read_pgm(&file).ok().as_ref() == Some(&gray), format!("seed {seed}: PGM"))?;
        check(write_pgm(&read_pgm(&file).unwrap()) == file, format!("seed {seed}: PGM bytes"))?;

        let rgb = RgbImage::new(w, h, bytes(3 * w * h, &mut rng)).unwrap();
        let file = write_ppm(&rgb);
        check(read_ppm(&file).ok().as_ref() == Some(&rgb), format!("seed {seed}: PPM"))?;

        let f32s = |n: usize, rng: &mut Rng| (0..n).map(|_| rng.range(-50.0, 50.0) as f32 as f64).collect::<Vec<f64>>();
        let flow = FlowField::new(w, h, f32s(w * h, &mut rng), f32s(w * h, &mut rng)).unwrap();
        let file = write_flo(&flow);
        check(read_flo(&file).ok().as_ref() == Some(&flow), format!("seed {seed}: .flo"))?;

        let c = 1 + rng.uniform(6).unwrap();
        let vol = InputVolume::new(c, h, w, f32s(c * w * h, &mut rng)).unwrap();
        let file = write_tensor(&vol);
        check(read_tensor(&file).ok().as_ref() == Some(&vol), format!("seed {seed}: tensor"))?;

        let classes = 2 + rng.uniform(4).unwrap();
        let config = NetConfig {
            input: Shape::new(c, h.max(2), w.max(2)),
            classes,
            layers: vec![
                LayerSpec::conv3(2),
                LayerSpec::Relu,
                LayerSpec::MaxPool,
                LayerSpec::Dropout { rate: rng.unit() * 0.9 },
                LayerSpec::Dense { outputs: classes },
            ],
        };
        let net = Net::new(config, &mut rng).unwrap();
        let mut file = Vec::new();
        write_checkpoint(&net, &mut file).unwrap();
        let back = read_checkpoint(&file).map_err(|e| format!("seed {seed}: {e}"))?;
        let mut again = Vec::new();
        write_checkpoint(&back, &mut again).unwrap();
        check(back == net && again == file, format!("seed {seed}: checkpoint"))?;
    }
    Ok("PGM, PPM, .flo, tensor and checkpoint bit-exact over 100 seeds each".into())
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mos"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(
        out.status.success(),
        format!("mos {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()),
    )
}

fn chain(root: &Path) -> Result<(), String> {
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let manifest = p("data/manifest.tsv");
    fn with_seed<'a>(args: &[&'a str]) -> Vec<&'a str> {
        [&["--seed", "11"][..], args].concat()
    }
    run_cli(&with_seed(&["synth", &p("data"), "--clips-per-class", "3", "--width", "32", "--height", "32"]))?;
    run_cli(&with_seed(&["flow", &p("data"), &p("flow"), "--manifest", &manifest]))?;
    run_cli(&with_seed(&["mos", &p("flow"), &p("mos"), "--manifest", &manifest]))?;
    run_cli(&with_seed(&["volume", &p("mos"), &p("vol"), "--manifest", &manifest]))?;
    run_cli(&with_seed(&[
        "train", "--manifest", &manifest, "--data", &p("mos"), "--out", &p("net.mosn"), "--loss-csv", &p("loss.csv"),
        "--input-side", "24", "--iterations", "15", "--batch-size", "4", "--conv1", "4", "--conv2", "4", "--hidden", "8",
    ]))?;
    run_cli(&with_seed(&[
        "predict", "--manifest", &manifest, "--data", &p("mos"), "--checkpoint", &p("net.mosn"), "--out", &p("scores.csv"),
        "--samples", "3",
    ]))?;
    run_cli(&with_seed(&["fuse", &p("scores.csv"), &p("scores.csv"), "--weights", "2,1", "--out", &p("fused.csv")]))?;
    run_cli(&with_seed(&[
        "eval", &p("fused.csv"), "--manifest", &manifest, "--confusion-csv", &p("confusion.csv"), "--confusion-pgm",
        &p("confusion.pgm"),
    ]))?;
    run_cli(&with_seed(&["viz", &p("flow/right_s3/clip_0000/flow_0000.flo"), &p("viz.ppm")]))
}

fn files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, read_file(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    chain(a.path())?;
    chain(b.path())?;
    let (fa, fb) = (files(a.path()), files(b.path()));
    check(fa.len() == fb.len(), "different file sets")?;
    for ((na, da), (nb, db)) in fa.iter().zip(&fb) {
        check(na == nb && da == db, format!("{na} differs"))?;
    }
    let kinds = ["flo", "pgm", "mosv", "mosn", "csv", "ppm"];
    for kind in kinds {
        check(fa.iter().any(|(n, _)| n.ends_with(kind)), format!("no .{kind} artifact"))?;
    }
    let manifest = Manifest::parse(&String::from_utf8(read_file(&a.path().join("data/manifest.tsv")).unwrap()).unwrap())
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "two seeded CLI runs over {} clips: {} artifacts byte-identical",
        manifest.entries().len(),
        fa.len()
    ))
}
