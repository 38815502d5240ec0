//! End-to-end acceptance checks. Runs every criterion in order, prints one
//! line per criterion and exits non-zero if any failed.
//!
//! Datasets, network weights and run files are cached under the cargo
//! target tmpdir, so a rerun only redoes what changed. Set
//! `SIMBO_ACCEPTANCE=1,5` to run a subset.

use std::io::BufRead;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use simbo::bo::*;
use simbo::control::{rollout, ControllerDims, CostId, ParamSpace, SpeedProfile};
use simbo::exp::*;
use simbo::features::*;
use simbo::gp::*;
use simbo::nn::*;
use simbo::sim::*;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Fixtures {
    dir: PathBuf,
    l1: Option<(PathBuf, Arc<Dataset>)>,
    l2: Option<(PathBuf, Arc<Dataset>)>,
    weights: Option<PathBuf>,
}

impl Fixtures {
    fn new() -> Self {
        let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
        std::fs::create_dir_all(&dir).unwrap();
        Self { dir, l1: None, l2: None, weights: None }
    }

    fn collect(&self, fidelity: Fidelity) -> (PathBuf, Arc<Dataset>) {
        let mut config = Config::parse("").unwrap();
        config.collect.fidelity = fidelity;
        let spec = config.collect_spec().unwrap();
        let fp = fingerprint(&spec).unwrap();
        let path = self.dir.join(format!("{}_{}.csv", fidelity.tag(), &fp[..16]));
        if let Ok(d) = Dataset::load(&path) {
            return (path, Arc::new(d));
        }
        let start = Instant::now();
        let d = collect_dataset(&spec, workers_from_env()).unwrap();
        d.save(&path).unwrap();
        eprintln!(
            "collected {} rows at {} in {:.0} s, {:.1}% walking",
            d.len(),
            fidelity,
            start.elapsed().as_secs_f64(),
            100.0 * d.walking_fraction()
        );
        (path, Arc::new(d))
    }

    fn l1(&mut self) -> (PathBuf, Arc<Dataset>) {
        if self.l1.is_none() {
            self.l1 = Some(self.collect(Fidelity::L1SimpleGear));
        }
        self.l1.clone().unwrap()
    }

    fn l2(&mut self) -> (PathBuf, Arc<Dataset>) {
        if self.l2.is_none() {
            self.l2 = Some(self.collect(Fidelity::L2NoBoom));
        }
        self.l2.clone().unwrap()
    }

    fn weights(&mut self) -> PathBuf {
        if let Some(w) = &self.weights {
            return w.clone();
        }
        let (path, d) = self.l1();
        let config = TrainConfig::default();
        let data_fp = file_fingerprint(&path).unwrap();
        let fp = fingerprint(&(&data_fp, &config)).unwrap();
        let out = self.dir.join(format!("nn_{}.json", &fp[..16]));
        if MlpWeights::load(&out).is_err() {
            let start = Instant::now();
            let points: Vec<Vec<f64>> = d.rows.iter().map(|r| r.point.clone()).collect();
            let targets: Vec<Vec<f64>> = d.rows.iter().map(|r| r.summary.clone()).collect();
            let indices: Vec<usize> = d.rows.iter().map(|r| r.index).collect();
            let report = train(&points, &targets, &indices, &config, &data_fp).unwrap();
            report.weights.save(&out).unwrap();
            eprintln!(
                "trained network in {:.0} s, validation loss {:.4}",
                start.elapsed().as_secs_f64(),
                report.weights.meta.validation_loss
            );
        }
        self.weights = Some(out.clone());
        out
    }

    /// Run (or resume) a campaign and summarize it.
    fn campaign(&self, name: &str, dataset: &Path, weights: Option<&Path>, cost: CostId, methods: &[Method]) -> (CurveReport, Manifest) {
        let mut config = Config::parse("").unwrap();
        let c = &mut config.campaign;
        c.name = name.into();
        c.objective = Fidelity::L0Hardware;
        c.methods = methods.to_vec();
        c.cost = cost;
        c.dataset = dataset.to_path_buf();
        c.weights = weights.map(Path::to_path_buf);
        c.output = self.dir.join("runs").join(name);
        let output = c.output.clone();
        let start = Instant::now();
        let files = run_campaign(&config, workers_from_env()).unwrap();
        eprintln!("campaign {name}: {:.0} s", start.elapsed().as_secs_f64());
        let runs: Vec<RunFile> = files.iter().map(|p| RunFile::load(p).unwrap()).collect();
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(output.join(MANIFEST_FILE)).unwrap()).unwrap();
        (build_report(&runs).unwrap(), manifest)
    }
}

fn curve<'a>(r: &'a CurveReport, m: Method) -> &'a MethodCurve {
    r.method(m).unwrap()
}

fn describe(r: &CurveReport, methods: &[Method]) -> String {
    methods
        .iter()
        .map(|&m| {
            let c = curve(r, m);
            format!(
                "{m} walk {:.0}% first {} best {:.3}",
                100.0 * c.final_walking_fraction(),
                c.median_first_walk(),
                c.median_final_best()
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn random_points(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random()).collect()).collect()
}

fn min_eigenvalue(spec: &KernelSpec, points: &[Vec<f64>]) -> f64 {
    let mut m = GpModel::new(spec.clone(), PriorMean::Constant);
    m.set_data(points.to_vec(), vec![0.0; points.len()]).unwrap();
    m.gram_matrix().symmetric_eigenvalues().min()
}

fn random_mismatch(rng: &mut ChaCha8Rng, points: &[Vec<f64>]) -> MismatchModel {
    let mut mm = MismatchModel::new(1);
    for _ in 0..10 {
        let x = &points[rng.random_range(0..points.len())];
        mm.update(x, &[rng.random_range(-2.0..2.0)], &[rng.random_range(-2.0..2.0)]).unwrap();
    }
    mm
}

fn kernel_validity(fx: &mut Fixtures) -> Check {
    let (_, l1) = fx.l1();
    let weights = MlpWeights::load(&fx.weights()).unwrap();
    let start = Instant::now();
    let dog: Arc<dyn Transform> = Arc::new(DogTransform::from_dataset(&l1));
    let nn: Arc<dyn Transform> = Arc::new(NnTransform { weights });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [f64::INFINITY; 5];
    for _ in 0..100 {
        // Dataset rows, so DoG values come from the table.
        let pts: Vec<Vec<f64>> = (0..30).map(|_| l1.rows[rng.random_range(0..l1.len())].point.clone()).collect();
        let mut specs = vec![
            KernelSpec::new(KernelVariant::Se, 9),
            KernelSpec::new(KernelVariant::Transform(dog.clone()), 9),
            KernelSpec::new(KernelVariant::Transform(nn.clone()), 9),
            KernelSpec::new(KernelVariant::Adjusted { phi: dog.clone(), mismatch: random_mismatch(&mut rng, &pts) }, 9),
            KernelSpec::new(KernelVariant::AdjustedV2 { phi: dog.clone(), mismatch: random_mismatch(&mut rng, &pts) }, 9),
        ];
        for (k, spec) in specs.iter_mut().enumerate() {
            let n = spec.feature_dim();
            spec.hyper.lengths = (0..n).map(|_| rng.random_range(0.05..2.0)).collect();
            spec.hyper.signal_var = rng.random_range(0.1..10.0);
            worst[k] = worst[k].min(min_eigenvalue(spec, &pts));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let lowest = worst.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(
        lowest >= -1e-6 && secs < 60.0,
        format!("min eigenvalue per kernel {}, {secs:.1} s", worst.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join(" ")),
    )
}

/// The adjusted kernel on `[φ; ḡ]` and the corrected kernel on `φ - ḡ`
/// differ by `exp(-prod/2)` with `prod = 2 (φ_i - φ_j)ᵀ L⁻² (ḡ_j - ḡ_i)`,
/// when both use one length scale.
fn adjusted_identity(_: &mut Fixtures) -> Check {
    struct Warp;
    impl Transform for Warp {
        fn dim(&self) -> usize {
            2
        }
        fn apply(&self, x: &[f64]) -> simbo::Result<Vec<f64>> {
            Ok(vec![(2.0 * x[0]).sin() + x[2], x[1] * x[1] - x[0]])
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let phi: Arc<dyn Transform> = Arc::new(Warp);
    let mut mm = MismatchModel::new(2);
    for p in random_points(8, 3, &mut rng) {
        mm.update(&p, &[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], &[0.0, 0.0]).unwrap();
    }
    let (sigma2, l) = (1.7, 0.8);
    let mut adj = KernelSpec::new(KernelVariant::Adjusted { phi: phi.clone(), mismatch: mm.clone() }, 3);
    adj.hyper.signal_var = sigma2;
    adj.hyper.lengths = vec![l; 4];
    let mut v2 = KernelSpec::new(KernelVariant::AdjustedV2 { phi: phi.clone(), mismatch: mm.clone() }, 3);
    v2.hyper.signal_var = sigma2;
    v2.hyper.lengths = vec![l; 2];
    let mut worst: f64 = 0.0;
    let mut literal: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b) = (random_points(1, 3, &mut rng).remove(0), random_points(1, 3, &mut rng).remove(0));
        let (pa, pb) = (phi.apply(&a).unwrap(), phi.apply(&b).unwrap());
        let (ga, gb) = (mm.mean(&a), mm.mean(&b));
        let prod: f64 = 2.0 * (0..2).map(|d| (pa[d] - pb[d]) * (gb[d] - ga[d])).sum::<f64>() / (l * l);
        let k_adj = kernel_eval(&adj, &a, &b).unwrap();
        let k_v2 = kernel_eval(&v2, &a, &b).unwrap();
        worst = worst.max((k_v2 - (-prod / 2.0).exp() * k_adj).abs());
        literal = literal.max((k_v2 - sigma2 * (-prod).exp() * k_adj).abs());
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:.1e} over 1000 pairs (literal form {literal:.1e})"))
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn numerical_checks(_: &mut Fixtures) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut notes = Vec::new();
    let mut ok = true;

    let mut m = GpModel::new(KernelSpec::new(KernelVariant::Se, 3), PriorMean::Constant);
    m.kernel.hyper = GpHyper { signal_var: 1.3, lengths: vec![0.5, 0.8, 0.3], noise: 0.2, mean: 0.1 };
    let x = random_points(20, 3, &mut rng);
    let y: Vec<f64> = x.iter().map(|p| (4.0 * p[0]).cos() + p[1] - p[2] * p[2]).collect();
    m.set_data(x, y).unwrap();
    let (_, grad) = m.log_marginal_likelihood().unwrap();
    let theta = m.kernel.hyper.to_log();
    let mut gp_err: f64 = 0.0;
    for (i, g) in grad.iter().enumerate() {
        let at = |d: f64| {
            let mut t = theta.clone();
            t[i] += d;
            let mut mm = m.clone();
            mm.kernel.hyper = GpHyper::from_log(&t, 0.1);
            mm.refit().unwrap();
            mm.log_marginal_likelihood().unwrap().0
        };
        gp_err = gp_err.max(rel((at(1e-5) - at(-1e-5)) / 2e-5, *g));
    }
    ok &= gp_err <= 1e-4;
    notes.push(format!("GP gradient rel {gp_err:.1e}"));

    let mut spec = MlpSpec::new(9, 4);
    spec.hidden = vec![16, 16];
    let w = MlpWeights::init(spec, 3).unwrap();
    let xs = random_points(10, 9, &mut rng);
    let ys = random_points(10, 4, &mut rng);
    let xr: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
    let yr: Vec<&[f64]> = ys.iter().map(|v| v.as_slice()).collect();
    let (_, g) = w.grad(&xr, &yr).unwrap();
    let flat = g.flat();
    let params = w.params_flat();
    let mut nn_err: f64 = 0.0;
    for i in (0..params.len()).step_by(7) {
        let at = |d: f64| {
            let mut p = params.clone();
            p[i] += d;
            let mut m = w.clone();
            m.set_params_flat(&p).unwrap();
            m.loss(&xr, &yr).unwrap()
        };
        let fd = (at(1e-6) - at(-1e-6)) / 2e-6;
        if fd.abs().max(flat[i].abs()) > 1e-6 {
            nn_err = nn_err.max(rel(fd, flat[i]));
        }
    }
    ok &= nn_err <= 1e-4;
    notes.push(format!("NN gradient rel {nn_err:.1e}"));

    let mut worst_z: f64 = 0.0;
    for (mean, var, best) in [(0.3, 0.5, 0.0), (1.0, 2.0, 1.5), (-0.2, 0.01, -0.1)] {
        let n = 1_000_000;
        let sd = f64::sqrt(var);
        let d: Vec<f64> = (0..n).map(|_| (best - mean - sd * standard_normal(&mut rng)).max(0.0)).collect();
        let mu = d.iter().sum::<f64>() / n as f64;
        let s = (d.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        worst_z = worst_z.max((expected_improvement(mean, var, best) - mu).abs() / (s / (n as f64).sqrt()));
    }
    ok &= worst_z <= 3.0;
    notes.push(format!("EI vs Monte Carlo {worst_z:.2} SE"));

    let mut m = GpModel::new(KernelSpec::new(KernelVariant::Se, 1), PriorMean::Constant);
    m.set_data(vec![vec![0.0], vec![0.5]], vec![1.0, -1.0]).unwrap();
    let k12 = (-0.125f64).exp();
    let det = 1.01 * 1.01 - k12 * k12;
    let inv = [[1.01 / det, -k12 / det], [-k12 / det, 1.01 / det]];
    let ks = [(-0.02f64).exp(), (-0.045f64).exp()];
    let alpha = [inv[0][0] - inv[0][1], inv[1][0] - inv[1][1]];
    let mean = ks[0] * alpha[0] + ks[1] * alpha[1];
    let quad: f64 = (0..2).map(|i| (0..2).map(|j| ks[i] * inv[i][j] * ks[j]).sum::<f64>()).sum();
    let (mu, var) = m.posterior(&[0.2]).unwrap();
    let post_err = (mu - mean).abs().max((var - (1.0 - quad)).abs());
    ok &= post_err <= 1e-10;
    notes.push(format!("posterior {post_err:.1e}"));
    ensure(ok, notes.join(", "))
}

fn simulator_physics(fx: &mut Fixtures) -> Check {
    let model = RobotModel::default();
    let config = SimConfig::default().with_fidelity(Fidelity::L2NoBoom);
    let mut s = initial_state(&model, &config);
    s.q[1] += 2.0;
    s.qd = [0.3, 0.5, 0.8, 1.5, -2.0, -1.0, 2.5];
    s.anchor = [None, None];
    s.contact = [false, false];
    let zero = [0.0; NJ];
    let energy = |s: &SimState| mechanical_energy(&model, &s.q, &synchronized_velocity(s, &zero, &model, &config).unwrap());
    let e0 = energy(&s);
    let mut drift: f64 = 0.0;
    for _ in 0..(0.5 / config.dt).round() as usize {
        s = step_dynamics(&s, &zero, &model, &config).unwrap();
        drift = drift.max((energy(&s) - e0).abs() / e0);
    }

    let space = ParamSpace::new(ControllerDims::Nine, 0, model.nominal_com_height);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut min_force = f64::INFINITY;
    let mut repeat_ok = true;
    for (i, u) in random_points(30, 9, &mut rng).iter().enumerate() {
        let fidelity = [Fidelity::L0Hardware, Fidelity::L1SimpleGear, Fidelity::L2NoBoom][i % 3];
        let c = SimConfig { record_hz: 1000.0, ..SimConfig::default().with_fidelity(fidelity).with_horizon(3.0) };
        let p = space.params(u).unwrap();
        let a = rollout(&p, &SpeedProfile::preset("varying").unwrap(), &model, &c).unwrap();
        let b = rollout(&p, &SpeedProfile::preset("varying").unwrap(), &model, &c).unwrap();
        repeat_ok &= a == b;
        min_force = a.samples.iter().flat_map(|s| s.normal_force).fold(min_force, f64::min);
    }

    let (_, l1) = fx.l1();
    let mut spec = l1.meta.spec.clone();
    spec.n = 150;
    let workers_ok = collect_dataset(&spec, 1).unwrap() == collect_dataset(&spec, 4).unwrap();
    let prefix_ok = collect_dataset(&spec, 2).unwrap().rows[..] == l1.rows[..150];
    ensure(
        drift <= 1e-3 && min_force >= 0.0 && repeat_ok && workers_ok && prefix_ok,
        format!(
            "energy drift {:.3}%, min normal force {min_force:.3} N, repeat {repeat_ok}, workers {workers_ok}, cached prefix {prefix_ok}",
            100.0 * drift
        ),
    )
}

struct OracleEvent {
    time: f64,
    leg: usize,
    apex: f64,
    speed: f64,
    heights: (f64, f64),
    pitches: (f64, f64),
}

/// Step events and DoG score recomputed from serialized samples alone.
fn oracle_dog(text: &[u8], th: &DogThresholds) -> (Vec<OracleEvent>, f64) {
    let mut header = None;
    let mut samples = Vec::new();
    for line in text.lines() {
        let v: Value = serde_json::from_str(&line.unwrap()).unwrap();
        match v.get("header") {
            Some(h) => header = Some(h.clone()),
            None => samples.push(v["sample"].clone()),
        }
    }
    let header = header.unwrap();
    let dt = header["dt"].as_f64().unwrap();
    let hold = (TOUCHDOWN_HOLD / dt - 1e-9).ceil().max(1.0) as usize;
    let f = |s: &Value, leg: usize| s["normal_force"][leg].as_f64().unwrap();
    let point = |s: &Value| {
        (
            s["state"]["time"].as_f64().unwrap(),
            s["com"][0].as_f64().unwrap(),
            s["com"][1].as_f64().unwrap(),
            s["state"]["q"][2].as_f64().unwrap(),
        )
    };
    let body = &samples[..samples.len() - 1];
    let mut loaded = [f(&body[0], 0) > TOUCHDOWN_FORCE, f(&body[0], 1) > TOUCHDOWN_FORCE];
    let mut apex = [0, 1].map(|leg| body[0]["foot_height"][leg].as_f64().unwrap());
    let mut held = [0usize; 2];
    let mut onset: [Option<(f64, f64, f64, f64)>; 2] = [None, None];
    let mut boundary = point(&body[0]);
    boundary.0 = 0.0;
    let mut events = Vec::new();
    for s in body {
        for leg in 0..2 {
            let foot_z = s["foot_height"][leg].as_f64().unwrap();
            if f(s, leg) > TOUCHDOWN_FORCE {
                if !loaded[leg] {
                    let o = *onset[leg].get_or_insert(point(s));
                    held[leg] += 1;
                    if held[leg] >= hold {
                        loaded[leg] = true;
                        if o.0 > boundary.0 {
                            events.push(OracleEvent {
                                time: o.0,
                                leg,
                                apex: apex[leg],
                                speed: (o.1 - boundary.1) / (o.0 - boundary.0),
                                heights: (boundary.2, o.2),
                                pitches: (boundary.3, o.3),
                            });
                            boundary = o;
                        }
                        onset[leg] = None;
                        held[leg] = 0;
                    }
                }
            } else {
                onset[leg] = None;
                held[leg] = 0;
                if loaded[leg] && !s["state"]["contact"][leg].as_bool().unwrap() {
                    loaded[leg] = false;
                    apex[leg] = foot_z;
                }
            }
            if !loaded[leg] {
                apex[leg] = apex[leg].max(foot_z);
            }
        }
    }
    let mut total = 0.0;
    for e in &events {
        let m1 = (e.apex > th.clearance) as u8 as f64;
        let m2 = ((e.heights.0 - e.heights.1).abs() <= th.height_tolerance) as u8 as f64;
        let m3 = ((e.pitches.0 - e.pitches.1).abs() <= th.pitch_tolerance) as u8 as f64;
        for m in [m1, m2, m3, e.speed.max(0.0)] {
            total += m;
        }
    }
    let t_max = header["t_max"].as_f64().unwrap();
    let t_sim = header["t_sim"].as_f64().unwrap();
    (events, t_sim.min(t_max) / t_max * total)
}

fn dog_oracle(_: &mut Fixtures) -> Check {
    let model = RobotModel::default();
    let space = ParamSpace::new(ControllerDims::Nine, 0, model.nominal_com_height);
    let th = DogThresholds::default();
    let config = SimConfig { record_hz: 1000.0, ..SimConfig::default().with_fidelity(Fidelity::L1SimpleGear).with_horizon(5.0) };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut matched, mut steps, mut walkers) = (0, 0, 0);
    for u in random_points(100, 9, &mut rng) {
        let t = rollout(&space.params(&u).unwrap(), &SpeedProfile::constant(0.4), &model, &config).unwrap();
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let (events, score) = oracle_dog(&buf, &th);
        let same_events = events.len() == t.step_count()
            && events.iter().zip(t.events()).all(|(o, e)| {
                o.time == e.time
                    && o.leg == e.leg.index()
                    && o.apex == e.apex_clearance
                    && o.speed == e.mean_speed
                    && o.heights == (e.com_height_start, e.com_height_end)
                    && o.pitches == (e.pitch_start, e.pitch_end)
            });
        matched += (same_events && score.to_bits() == dog_score(&t, &th).score.to_bits()) as usize;
        steps += t.step_count();
        walkers += t.walked() as usize;
    }
    ensure(matched == 100, format!("{matched}/100 exact ({steps} steps, {walkers} walkers)"))
}

fn low_mismatch(fx: &mut Fixtures) -> Check {
    let (l1, _) = fx.l1();
    let w = fx.weights();
    let methods = [Method::Se, Method::Dog, Method::TrajNn];
    let (r, _) = fx.campaign("l1_to_l0", &l1, Some(&w), CostId::Hardware, &methods);
    let se = curve(&r, Method::Se);
    let mut ok = true;
    for m in [Method::Dog, Method::TrajNn] {
        let c = curve(&r, m);
        ok &= c.final_walking_fraction() - se.final_walking_fraction() >= 0.15 - 1e-12;
        ok &= c.median_first_walk() <= 0.5 * se.median_first_walk();
    }
    ensure(ok, describe(&r, &methods))
}

fn severe_mismatch(fx: &mut Fixtures) -> Check {
    let (l2, _) = fx.l2();
    let methods = [Method::Se, Method::AdjustedDog, Method::CostPrior, Method::ItneWithPrior];
    let (r, _) = fx.campaign("l2_to_l0", &l2, None, CostId::Hardware, &methods);
    let adj = curve(&r, Method::AdjustedDog);
    let se = curve(&r, Method::Se);
    let cp = curve(&r, Method::CostPrior);
    let (_, p) = rank_sum_test(&adj.final_best, &cp.final_best);
    let ordered = adj.median_final_best() <= se.median_final_best() && se.median_final_best() <= cp.median_final_best();
    ensure(ordered && p < 0.05, format!("{}; rank-sum p {p:.3}", describe(&r, &methods[..3])))
}

fn itne_confinement(fx: &mut Fixtures) -> Check {
    let (l2_path, l2) = fx.l2();
    let mut config = Config::parse("").unwrap();
    config.campaign.objective = Fidelity::L0Hardware;
    let profile = SpeedProfile::preset(&config.campaign.profile).unwrap();
    let sim = config.sim.clone().with_fidelity(Fidelity::L0Hardware).with_horizon(config.campaign.horizon);
    let space = l2.meta.spec.space.clone();
    let model = config.model.clone();
    let eval = |x: &[f64]| -> simbo::Result<Evaluation> {
        let t = rollout(&space.params(x)?, &profile, &model, &sim)?;
        Ok(Evaluation { cost: CostId::Hardware.eval(&t, &profile), walked: t.walked(), phi_hw: None })
    };

    // Keep only stored controllers that fall on the objective.
    let mut map = build_behavior_map(&l2, CostId::Hardware, "fp").unwrap();
    let mut removed = 0;
    for cell in &mut map.cells {
        let before = cell.len();
        cell.retain(|e| !eval(&e.point).unwrap().walked);
        removed += before - cell.len();
    }
    let budget = config.campaign.budget;
    let itne = ItneConfig { budget, ..ItneConfig::default() };
    let mut confined = true;
    for seed in 0..3 {
        let a = itne_run(&map, seed, &itne, &mut |x: &[f64]| eval(x), RunHistory::new("itne", seed, "fp")).unwrap();
        let b = itne_run(&map, seed, &itne, &mut |x: &[f64]| eval(x), RunHistory::new("itne", seed, "fp")).unwrap();
        confined &= a.first_walk.is_none() && a.without_timing() == b.without_timing();
    }

    let methods = [Method::Se, Method::AdjustedDog, Method::CostPrior, Method::ItneWithPrior];
    let (r, _) = fx.campaign("l2_to_l0", &l2_path, None, CostId::Hardware, &methods);
    let itne_wf = curve(&r, Method::ItneWithPrior).final_walking_fraction();
    let adj_wf = curve(&r, Method::AdjustedDog).final_walking_fraction();
    ensure(
        confined && itne_wf < adj_wf,
        format!(
            "falls-only map ({} cells, {removed} walkers removed) never walks: {confined}; {}",
            map.occupancy(),
            describe(&r, &[Method::ItneWithPrior, Method::AdjustedDog])
        ),
    )
}

fn cost_agnostic(fx: &mut Fixtures) -> Check {
    let (l1, _) = fx.l1();
    let w = fx.weights();
    let methods = [Method::Se, Method::TrajNn];
    let mut ok = true;
    let mut notes = Vec::new();
    let mut weight_fps = Vec::new();
    for (name, cost) in [("l1_to_l0_smooth", CostId::Smooth), ("l1_to_l0_nonsmooth", CostId::Nonsmooth)] {
        let (r, manifest) = fx.campaign(name, &l1, Some(&w), cost, &methods);
        let gap = curve(&r, Method::TrajNn).final_walking_fraction() - curve(&r, Method::Se).final_walking_fraction();
        ok &= gap >= 0.15 - 1e-12;
        weight_fps.push(manifest.weights_fingerprint);
        notes.push(format!("{cost}: {}", describe(&r, &methods)));
    }
    ok &= weight_fps[0].is_some() && weight_fps[0] == weight_fps[1];
    ensure(ok, notes.join(" | "))
}

type Criterion = (usize, &'static str, fn(&mut Fixtures) -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "kernel validity", kernel_validity),
        (2, "adjusted kernel identity", adjusted_identity),
        (3, "numerical checks", numerical_checks),
        (4, "simulator physics", simulator_physics),
        (5, "DoG oracle equivalence", dog_oracle),
        (6, "low-mismatch informed kernels", low_mismatch),
        (7, "severe-mismatch ordering", severe_mismatch),
        (8, "IT&E confinement", itne_confinement),
        (9, "cost agnosticism", cost_agnostic),
    ];
    let selected: Option<Vec<usize>> = std::env::var("SIMBO_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    // Respect `cargo test -- --list` and similar harness probes.
    if std::env::args().any(|a| a == "--list") {
        for (n, name, _) in &criteria {
            println!("criterion_{n}_{}: test", name.replace(' ', "_"));
        }
        return;
    }

    let mut fx = Fixtures::new();
    let mut failed = 0;
    for (n, name, check) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&mut fx)))
            .unwrap_or_else(|e| Err(format!("panicked: {}", e.downcast_ref::<String>().cloned().unwrap_or_default())));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n} {tag} {name} ({:.0} s): {detail}", start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
