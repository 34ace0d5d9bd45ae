//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use helmfield_cli::commands::oracle_agreement;
use helmfield_cli::RunConfig;
use helmfield_core::causality::run_causality;
use helmfield_core::field::{ratio, Field};
use helmfield_core::generate::{gen_localized, gen_random_series, gen_random_smooth, LocalizedKind};
use helmfield_core::greens::{lemma_check, propagate_mode, retarded_propagate, SpaceTimeKernel};
use helmfield_core::helmholtz::{decompose, decompose_4d, decompose_direct_integral, decompose_series};
use helmfield_core::maxwell::ResidualReport;
use helmfield_core::sources::SourceSpectra;
use helmfield_core::vec3::{CVec3, CZERO};
use helmfield_core::{engine, spectral, Complex64, FieldSeries, Grid, GridSpec, RealVectorField};

struct Outcome {
    pass: bool,
    detail: String,
}

fn grid(n: usize, box_len: f64, dt: f64, nt: usize) -> Grid {
    Grid::new(GridSpec::cubic(n, box_len, dt, nt)).expect("valid grid")
}

fn dot(a: &RealVectorField, b: &RealVectorField) -> f64 {
    (0..3).map(|c| a.component(c).iter().zip(b.component(c)).map(|(x, y)| x * y).sum::<f64>()).sum::<f64>()
        * a.grid().cell_volume()
}

fn max_wavenumber(g: &Grid) -> f64 {
    (0..3).map(|a| g.wavenumbers(a).iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max)
}

fn projector_algebra() -> Outcome {
    let g = grid(32, 10.0, 0.1, 1);
    let kmax = max_wavenumber(&g);
    let mut worst = [0.0f64; 6];
    for seed in 0..20 {
        let raw = gen_random_smooth(&g, 1000 + seed, 0.7);
        let mean = raw.mean();
        let a = RealVectorField::from_fn(&g, |i| {
            let v = raw.at(i);
            [v[0] - mean[0], v[1] - mean[1], v[2] - mean[2]]
        })
        .unwrap();
        let norm = a.l2_norm();
        let s = spectral::forward(&a);
        let par = spectral::inverse(&spectral::project_longitudinal(&s));
        let perp = spectral::inverse(&spectral::project_transverse(&s));
        let par_s = spectral::forward(&par);
        let perp_s = spectral::forward(&perp);
        let twice_par = spectral::inverse(&spectral::project_longitudinal(&par_s));
        let twice_perp = spectral::inverse(&spectral::project_transverse(&perp_s));
        let cross = spectral::inverse(&spectral::project_longitudinal(&perp_s));
        let values = [
            (&twice_par - &par).l2_norm().max((&twice_perp - &perp).l2_norm()) / norm,
            cross.l2_norm().max(dot(&par, &perp).abs() / norm) / norm,
            (&(&par + &perp) - &a).l2_norm() / norm,
            spectral::curl(&par_s).l2_norm() / (kmax * norm),
            spectral::divergence(&perp_s).l2_norm() / (kmax * norm),
            ratio((par.l2_norm().powi(2) + perp.l2_norm().powi(2) - norm * norm).abs(), norm * norm),
        ];
        for (w, v) in worst.iter_mut().zip(values) {
            *w = w.max(v);
        }
    }
    Outcome {
        pass: worst.iter().all(|&w| w <= 1e-12),
        detail: format!(
            "idempotence {:.1e} orthogonality {:.1e} completeness {:.1e} curl_par {:.1e} div_perp {:.1e} pythagoras {:.1e} (<= 1e-12, 20 fields 32^3)",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    }
}

fn time_passivity() -> Outcome {
    let g = grid(8, 8.0, 0.25, 8);
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let s = gen_random_series(&g, 8, 0.25, 2000 + seed, 0.8).unwrap();
        let (par4, perp4) = decompose_4d(&s);
        let (par, perp) = decompose_series(&s);
        worst = worst.max(par4.max_relative_diff(&par, &s)).max(perp4.max_relative_diff(&perp, &s));
    }
    Outcome { pass: worst <= 1e-12, detail: format!("4d vs slice-wise {worst:.1e} (<= 1e-12, 10 series 8^3x8)") }
}

fn real_space_oracle() -> Outcome {
    let g = grid(24, 16.5, 0.25, 1);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for kind in [LocalizedKind::Gradient, LocalizedKind::Curl, LocalizedKind::Mix] {
        for seed in [1, 2] {
            let a = gen_localized(&g, kind, [8.25; 3], 1.0, seed).unwrap();
            let d = decompose(&a);
            match decompose_direct_integral(&a, 2) {
                Ok(direct) => worst = worst.max(oracle_agreement(&a, &d.a_par, &direct)),
                Err(e) => return Outcome { pass: false, detail: format!("direct integral failed: {e}") },
            }
            cases += 1;
        }
    }
    Outcome {
        pass: worst <= 1e-3,
        detail: format!("fft vs direct integral {worst:.2e} (<= 1e-3, {cases} localized fields 24^3)"),
    }
}

fn convolution_lemma() -> Outcome {
    let g = grid(16, 16.0, 0.25, 16);
    let kernels = [
        (SpaceTimeKernel::Gaussian { space_sigma: 2.0, time_sigma: 0.5 }, 1e-10),
        (SpaceTimeKernel::Delta, 1e-10),
        (SpaceTimeKernel::Retarded, 1e-8),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (kernel, tol) in kernels {
        let mut worst = 0.0f64;
        for seed in 0..20 {
            let j = gen_random_series(&g, 16, 0.25, 3000 + seed, 0.6).unwrap();
            worst = worst.max(lemma_check(&kernel, &j).unwrap().residual_rel);
        }
        pass &= worst <= tol;
        parts.push(format!("{} {worst:.1e} (<= {tol:.0e})", kernel.name()));
    }
    Outcome { pass, detail: format!("{} over 20 seeds 16^3x16", parts.join(", ")) }
}

fn single(v: f64) -> CVec3 {
    [Complex64::new(v, 0.0), CZERO[1], CZERO[2]]
}

/// Largest error of the per-mode propagator against `exact` on `[0, t_end]`.
fn mode_error(omega: f64, dt: f64, t_end: f64, source: impl Fn(f64) -> f64, exact: impl Fn(f64) -> f64) -> f64 {
    let nt = (t_end / dt).round() as usize + 1;
    let src: Vec<CVec3> = (0..nt).map(|n| single(source(n as f64 * dt))).collect();
    let (u, _) = propagate_mode(omega, dt, &src);
    u.iter().enumerate().map(|(n, v)| (v[0].re - exact(n as f64 * dt)).abs() + v[0].im.abs()).fold(0.0, f64::max)
}

fn retarded_propagator() -> Outcome {
    let s0 = 1.7;
    let mut constant = 0.0f64;
    for omega in [0.0, 0.4, 2.3, 7.5] {
        let exact =
            |t: f64| if omega == 0.0 { 0.5 * s0 * t * t } else { s0 * (1.0 - (omega * t).cos()) / (omega * omega) };
        let scale = (0..=300).map(|n| exact(n as f64 * 0.01).abs()).fold(0.0, f64::max);
        constant = constant.max(mode_error(omega, 0.01, 3.0, |_| s0, exact) / scale);
    }

    let g = grid(16, 8.0, 0.2, 12);
    let field = gen_random_smooth(&g, 77, 0.8);
    let series = FieldSeries::new(&g, 0.2, vec![field.clone(); 12]).unwrap();
    let u = retarded_propagate(&series);
    let spec = spectral::forward(&field);
    let mut field_err = 0.0f64;
    for n in 0..12 {
        let t = n as f64 * 0.2;
        let exact = spectral::inverse(&spec.map_modes(|idx, v| {
            let w2: f64 = g.wavevector(idx).iter().map(|p| p * p).sum();
            let f = if w2 == 0.0 { 0.5 * t * t } else { (1.0 - (w2.sqrt() * t).cos()) / w2 };
            v.map(|c| c * f)
        }));
        field_err = field_err.max(ratio((u.slice(n) - &exact).l2_norm(), exact.l2_norm().max(1e-300)));
    }

    let (omega, nu) = (3.0, 1.3);
    let smooth = |t: f64| ((nu * t).cos() - (omega * t).cos()) / (omega * omega - nu * nu);
    let errors: Vec<f64> =
        [0.1, 0.05, 0.025, 0.0125].iter().map(|&dt| mode_error(omega, dt, 4.0, |t| (nu * t).cos(), smooth)).collect();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    let on = 6;
    let mut slices = vec![RealVectorField::zeros(&g); on];
    slices.extend((0..10).map(|k| gen_random_smooth(&g, 500 + k, 0.8)));
    let switched = retarded_propagate(&FieldSeries::new(&g, 0.2, slices).unwrap());
    let peak = switched.iter().map(|s| s.linf_norm()).fold(0.0, f64::max);
    let before = switched.iter().take(on).map(|s| s.linf_norm()).fold(0.0, f64::max) / peak;

    let pass =
        constant <= 1e-12 && field_err <= 1e-12 && orders.iter().all(|o| (o - 2.0).abs() <= 0.2) && before <= 1e-14;
    let orders: Vec<String> = orders.iter().map(|o| format!("{o:.3}")).collect();
    Outcome {
        pass,
        detail: format!(
            "constant source mode {constant:.1e} field {field_err:.1e} (<= 1e-12); smooth-source orders [{}] (2 +- 0.2); before switch-on {before:.1e} (<= 1e-14)",
            orders.join(", ")
        ),
    }
}

fn maxwell_run(dt: f64) -> ResidualReport {
    let t_end = 16.3;
    let cfg = RunConfig { dt, nt: (t_end / dt).round() as usize + 1, ramp: 16.0, ..RunConfig::default() };
    cfg.validate().expect("acceptance config is valid");
    let source = SourceSpectra::new(&cfg.model(), &cfg.grid().unwrap(), dt).unwrap();
    engine::run(&source, cfg.nt, &[]).unwrap().report
}

fn order(coarse: &ResidualReport, fine: &ResidualReport, id: &str) -> f64 {
    (coarse.max(id).unwrap() / fine.max(id).unwrap()).log2()
}

fn rohrlich(coarse: &ResidualReport, fine: &ResidualReport) -> Outcome {
    let r = coarse.max("rohrlich_equality").unwrap();
    let o = order(coarse, fine, "rohrlich_equality");
    Outcome {
        pass: r <= 1e-6 && (o - 2.0).abs() <= 0.2,
        detail: format!(
            "max over slices {r:.2e} (<= 1e-6) at dt 0.02; halving ratio {:.2} (order {o:.3}, 2 +- 0.2)",
            2f64.powf(o)
        ),
    }
}

const EQUATIONS: [&str; 8] =
    ["gauss", "gauss_par", "continuity_par", "identity_29", "poisson_par", "wave_total", "wave_par", "wave_perp"];

fn identities(coarse: &ResidualReport, fine: &ResidualReport) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (id, tol) in
        [("perp_36_vs_complement", 1e-8), ("split_22", 1e-6), ("tau_par_26", 1e-8), ("heras_par_gap", 1e-6)]
    {
        let v = coarse.max(id).unwrap();
        pass &= v <= tol;
        parts.push(format!("{id} {v:.1e}"));
    }
    for id in EQUATIONS {
        let v = coarse.max(id).unwrap();
        pass &= v <= 1e-5;
        if v > 1e-10 {
            let o = order(coarse, fine, id);
            pass &= (o - 2.0).abs() <= 0.2;
            parts.push(format!("{id} {v:.1e} order {o:.2}"));
        } else {
            parts.push(format!("{id} {v:.1e}"));
        }
    }
    Outcome { pass, detail: parts.join(", ") }
}

fn causality() -> Outcome {
    let cfg = RunConfig::default();
    let source = SourceSpectra::new(&cfg.model(), &cfg.grid().unwrap(), cfg.dt).unwrap();
    let rep = run_causality(&source, cfg.nt, &cfg.causality()).unwrap();
    let speed = rep.fit.map(|f| f.speed);
    let ratio = rep.max_ratio();
    let pass = speed.is_some_and(|s| (s - 1.0).abs() <= 0.05) && rep.instantaneous() && ratio <= 1e-3;
    Outcome {
        pass,
        detail: format!(
            "front speed {} (1 +- 0.05, {} shells); longitudinal field at L/3 from t = {} (onset {}, step {}); outside-cone ratio {ratio:.1e} (<= 1e-3); monotone {}",
            speed.map_or("none".into(), |s| format!("{s:.3}")),
            rep.fit.map_or(0, |f| f.points),
            rep.par_at_third.map_or("never".into(), |t| format!("{t}")),
            rep.t_on,
            rep.dt,
            rep.monotone_total()
        ),
    }
}

fn run_cli(dir: &Path, threads: &str, args: &[&str]) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_helmfield"))
        .args(args)
        .env("HF_THREADS", threads)
        .current_dir(dir)
        .output()
        .ok()
        .and_then(|o| o.status.code())
}

fn comparable(path: &Path) -> Vec<u8> {
    let bytes = fs::read(path).unwrap_or_default();
    if path.file_name().is_some_and(|n| n == "manifest.txt") {
        let text = String::from_utf8_lossy(&bytes);
        return text.lines().filter(|l| !l.starts_with("created_unix")).collect::<Vec<_>>().join("\n").into_bytes();
    }
    bytes
}

fn reproducibility() -> Outcome {
    let Ok(root) = tempfile::tempdir() else {
        return Outcome { pass: false, detail: "no temporary directory".into() };
    };
    let sim = "n = 32\nbox_len = 16\nsigma = 1\ndt = 0.25\nnt = 12\nt_on = 0.5\nramp = 2\nseparation = 2\n\
tol_equations = 1\nsnapshot_every = 5\nout_dir = sim\n";
    let cause = "n = 32\nbox_len = 16\nsigma = 1\ndt = 0.25\nnt = 28\nt_on = 0.5\nramp = 1\nseparation = 2\n\
speed_band = 1\nratio_bound = 1\nout_dir = cause\n";
    let commands: [&[&str]; 4] = [
        &["oracle", "--generate", "mix", "--grid", "24", "--box", "16.5", "--seed", "5", "--out", "mix"],
        &["lemma", "--kernel", "all", "--seeds", "2"],
        &["simulate", "--config", "../sim.cfg"],
        &["causality", "--config", "../cause.cfg"],
    ];
    let mut runs = Vec::new();
    for threads in ["1", "2"] {
        let dir = root.path().join(format!("t{threads}"));
        fs::create_dir_all(&dir).unwrap();
        fs::write(root.path().join("sim.cfg"), sim).unwrap();
        fs::write(root.path().join("cause.cfg"), cause).unwrap();
        for args in commands {
            if !matches!(run_cli(&dir, threads, args), Some(0 | 1)) {
                return Outcome { pass: false, detail: format!("command {args:?} did not complete") };
            }
        }
        runs.push(dir);
    }
    let mut files = Vec::new();
    let mut stack = vec![runs[0].clone()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p.strip_prefix(&runs[0]).unwrap().to_path_buf());
            }
        }
    }
    files.sort();
    let fields = files.iter().filter(|f| f.extension().is_some_and(|e| e == "vf")).count();
    let differing: Vec<String> = files
        .iter()
        .filter(|f| comparable(&runs[0].join(f)) != comparable(&runs[1].join(f)))
        .map(|f| f.display().to_string())
        .collect();
    Outcome {
        pass: differing.is_empty() && fields > 0,
        detail: if differing.is_empty() {
            format!("{} files ({fields} field files) identical across 1 and 2 threads", files.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    }
}

fn report(number: usize, title: &str, budget: Option<Duration>, elapsed: Duration, outcome: &Outcome) -> bool {
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = outcome.pass && in_time;
    let timing = match budget {
        Some(b) => format!("{:.1}s of {}s", elapsed.as_secs_f64(), b.as_secs()),
        None => format!("{:.1}s", elapsed.as_secs_f64()),
    };
    println!("criterion {number} {} {title}: {} [{timing}]", if pass { "PASS" } else { "FAIL" }, outcome.detail);
    pass
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;
    let (o, t) = timed(projector_algebra);
    all &= report(1, "projector algebra", Some(secs(10)), t, &o);
    let (o, t) = timed(time_passivity);
    all &= report(2, "time passivity", Some(secs(5)), t, &o);
    let (o, t) = timed(real_space_oracle);
    all &= report(3, "real-space oracle", Some(secs(120)), t, &o);
    let (o, t) = timed(convolution_lemma);
    all &= report(4, "convolution lemma", Some(secs(60)), t, &o);
    let (o, t) = timed(retarded_propagator);
    all &= report(5, "retarded propagator", Some(secs(30)), t, &o);

    let start = Instant::now();
    let coarse = maxwell_run(0.02);
    let fine = maxwell_run(0.01);
    let t = start.elapsed();
    all &= report(6, "Rohrlich equality", Some(secs(300)), t, &rohrlich(&coarse, &fine));
    all &= report(7, "component identities", Some(secs(300)), t, &identities(&coarse, &fine));

    let (o, t) = timed(causality);
    all &= report(8, "causality and cancellation", Some(secs(600)), t, &o);
    let (o, t) = timed(reproducibility);
    all &= report(9, "reproducibility", None, t, &o);

    println!("acceptance: {}", if all { "all criteria pass" } else { "some criteria FAIL" });
    if !all {
        std::process::exit(1);
    }
}
