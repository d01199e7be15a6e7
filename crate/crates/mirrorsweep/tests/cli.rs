use std::path::Path;
use std::process::{Command, Output};

use mirrorsweep::pfm::{decode_pfm, encode_pfm};
use mirrorsweep::scene_spec::{parse_scene_spec, scene_from_spec};
use mirrorsweep::RunConfig;
use mirrorsweep_core::photo::DepthMap;
use proptest::prelude::*;
use tempfile::TempDir;

fn ms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mirrorsweep"))
        .args(args)
        .env_remove("MIRRORSWEEP_THREADS")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    ms(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn render(dir: &Path, builtin: &str, extra: &[&str]) {
    let mut args = vec!["render", "--builtin", builtin, "--out", p(dir)];
    args.extend_from_slice(extra);
    let o = ms(&args);
    assert!(o.status.success(), "render failed: {}", stderr(&o));
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn render_writes_every_output() {
    let dir = TempDir::new().unwrap();
    render(dir.path(), "benchmark-0", &["--emit-spec"]);
    for f in ["rgb.png", "depth.pfm", "occlusion.png", "camera.json", "gt.json", "scene.json"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let depth = decode_pfm(&std::fs::read(dir.path().join("depth.pfm")).unwrap()).unwrap();
    assert_eq!((depth.width(), depth.height()), (256, 256));
    let gt = json(&dir.path().join("gt.json"));
    assert_eq!(gt["width"], 256);
    assert_eq!(gt["valid_pixels"].as_u64().unwrap() as usize, depth.valid_count());
    assert_eq!(gt["plane"]["w"].as_array().unwrap().len(), 3);
    let cam = json(&dir.path().join("camera.json"));
    assert!(cam["R"].is_array() && cam["t"].is_array());
}

#[test]
fn emitted_spec_reproduces_the_render() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    render(a.path(), "occlusion-free-2", &["--emit-spec"]);
    let spec = a.path().join("scene.json");
    let o = ms(&["render", "--spec", p(&spec), "--out", p(b.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["rgb.png", "depth.pfm", "occlusion.png"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn scaled_render_differs_only_in_depth_units() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    render(a.path(), "benchmark-5", &[]);
    render(b.path(), "benchmark-5", &["--scale", "3"]);
    for f in ["rgb.png", "occlusion.png"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let d1 = decode_pfm(&std::fs::read(a.path().join("depth.pfm")).unwrap()).unwrap();
    let d3 = decode_pfm(&std::fs::read(b.path().join("depth.pfm")).unwrap()).unwrap();
    assert_eq!(d1.mask(), d3.mask());
    for (x, y) in d1.values().as_slice().iter().zip(d3.values().as_slice()) {
        if x.is_finite() {
            assert_eq!(*y as f32, (3.0 * x) as f32);
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["render", "--bogus"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["render", "--out", "x"]), 2);
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&["render", "--builtin", "benchmark-99", "--out", p(dir.path())]), 2);
    assert_eq!(code(&["--help"]), 0);
    let o = ms(&["depth", "--image", "a.png", "--camera", "c.json", "--out", "o.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).trim().lines().count(), 1);
}

#[test]
fn missing_files_exit_3() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let o = ms(&["render", "--spec", p(&missing), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("nope.json"));
    let pfm = dir.path().join("nope.pfm");
    assert_eq!(code(&["eval", "--pred", p(&pfm), "--gt", p(&pfm)]), 3);
}

#[test]
fn invalid_inputs_exit_4() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, "{\n  \"mesh\": {\"kind\": \"blob\", \"radii\": [1, 1, 1]},\n  \"colour\": 3\n}\n").unwrap();
    let o = ms(&["render", "--spec", p(&spec), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    let pfm = dir.path().join("bad.pfm");
    std::fs::write(&pfm, b"Pf\n4 4\n-1.0\n\0\0").unwrap();
    let o = ms(&["eval", "--pred", p(&pfm), "--gt", p(&pfm)]);
    assert_eq!(o.status.code(), Some(4));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\"depth_count\": 1}").unwrap();
    assert_eq!(code(&["--config", p(&cfg), "selfcheck", "--cases", "10"]), 4);
}

#[test]
fn multi_needs_a_full_camera() {
    let dir = TempDir::new().unwrap();
    render(dir.path(), "doubly-occluded", &[]);
    let cam = dir.path().join("intrinsics.json");
    let full = json(&dir.path().join("camera.json"));
    let k = serde_json::json!({"fx": full["fx"], "fy": full["fy"], "cx": full["cx"], "cy": full["cy"]});
    std::fs::write(&cam, k.to_string()).unwrap();
    let out = dir.path().join("multi.json");
    let img = dir.path().join("rgb.png");
    assert_eq!(code(&["multi", "--image", p(&img), "--camera", p(&cam), "--out", p(&out), "--transforms", "M2"]), 4);
    let cam = dir.path().join("camera.json");
    assert_eq!(code(&["multi", "--image", p(&img), "--camera", p(&cam), "--out", p(&out), "--transforms", "M5"]), 2);
}

#[test]
fn depth_then_eval_reports_metrics() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    render(d, "occlusion-free-0", &[]);
    let out = d.join("depth.json");
    let pred = d.join("pred.pfm");
    let o = ms(&[
        "--no-timings",
        "depth",
        "--image",
        p(&d.join("rgb.png")),
        "--camera",
        p(&d.join("camera.json")),
        "--plane",
        p(&d.join("gt.json")),
        "--out",
        p(&out),
        "--depth-out",
        p(&pred),
        "--gt-depth",
        p(&d.join("depth.pfm")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = json(&out);
    assert_eq!(doc["command"], "depth");
    assert!(doc["metrics"]["silog"].is_number());
    assert!(doc.get("timings").is_none());

    let gt = d.join("gt.json");
    let o = ms(&[
        "eval",
        "--pred",
        p(&pred),
        "--gt",
        p(&d.join("depth.pfm")),
        "--pred-plane",
        p(&gt),
        "--gt-plane",
        p(&gt),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(m["l_dpt"].as_f64().unwrap() >= 0.0);
    assert!(m["absrel"].as_f64().unwrap() < 0.2);
}

#[test]
fn curves_writes_a_cdf() {
    let dir = TempDir::new().unwrap();
    let errors = dir.path().join("errors.txt");
    std::fs::write(&errors, "# degrees\n0.5\n3\n\n1.5\n0.2\n").unwrap();
    let out = dir.path().join("curve.csv");
    assert_eq!(code(&["curves", "--errors", p(&errors), "--out", p(&out)]), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("threshold,fraction"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    assert_eq!(rows.last().unwrap().1, 1.0);
}

#[test]
fn selfcheck_passes() {
    let o = ms(&["selfcheck", "--cases", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn config_documents_round_trip() {
    let c = RunConfig { depth_count: 32, threads: 2, seed: 7, ..RunConfig::default() };
    assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    assert!(RunConfig::from_json("{\"depth_cnt\": 3}").is_err());
}

#[test]
fn spec_text_builds_the_same_scene_twice() {
    let text = r#"{"mesh": {"kind": "blob", "radii": [0.3, 0.2, 0.25], "bump_centers": [[0.1, 0.1, 0.2]], "bump_amplitude": 0.02},
        "camera": {"fx": 300, "fy": 300, "cx": 32, "cy": 32, "R": [1,0,0, 0,1,0, 0,0,1], "t": [0.05, 0, 1]},
        "texture": {"kind": "noise", "scale": 8, "seed": 3, "asymmetry": 0}}"#;
    let spec = parse_scene_spec(text).unwrap();
    assert_eq!(spec.symmetries.len(), 1);
    let a = scene_from_spec(text).unwrap();
    let b = scene_from_spec(text).unwrap();
    assert_eq!(a.gt_plane(), b.gt_plane());
}

fn depth_map() -> impl Strategy<Value = DepthMap> {
    (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop_oneof![1 => Just(f64::NAN), 9 => (0.01f32..100.0).prop_map(f64::from)], w * h)
            .prop_map(move |v| DepthMap::from_values(w, h, v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pfm_round_trips(d in depth_map()) {
        let back = decode_pfm(&encode_pfm(&d)).unwrap();
        prop_assert_eq!(back.mask(), d.mask());
        for (a, b) in back.values().as_slice().iter().zip(d.values().as_slice()) {
            prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }
}
