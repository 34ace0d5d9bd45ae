use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use helmfield_core::causality::run_causality;
use helmfield_core::field::{ratio, Field};
use helmfield_core::generate::{gen_localized, gen_random_series, gen_random_smooth, LocalizedKind};
use helmfield_core::greens::{lemma_check, SpaceTimeKernel};
use helmfield_core::helmholtz::{decompose, decompose_direct_integral};
use helmfield_core::maxwell::Check;
use helmfield_core::sources::SourceSpectra;
use helmfield_core::{engine, io, Grid, GridSpec, RealVectorField};

use crate::report::{self, LemmaRow};
use crate::{
    Cli, CliError, Command, DecomposeArgs, Generator, KernelChoice, LemmaArgs, RunArgs, RunConfig, SourceKind, Status,
};

/// Runs one command, printing its summary to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    match &cli.command {
        Command::Decompose(args) => cmd_decompose(args, out),
        Command::Oracle(args) => cmd_decompose(&DecomposeArgs { oracle: true, ..args.clone() }, out),
        Command::Lemma(args) => cmd_lemma(args, out),
        Command::Simulate(args) => cmd_simulate(args, out),
        Command::Causality(args) => cmd_causality(args, out),
        Command::InitConfig => {
            out.write_all(RunConfig::default().to_text().as_bytes())?;
            Ok(Status::Pass)
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_field(args: &DecomposeArgs) -> Result<RealVectorField, CliError> {
    if let Some(path) = &args.input {
        return Ok(io::read_field(path)?.into_vector()?);
    }
    let generator = args.generate.ok_or_else(|| CliError::Usage("give --input or --generate".into()))?;
    let grid = Grid::new(GridSpec::cubic(args.grid, args.box_len, 0.5 * args.box_len / args.grid as f64, 1))?;
    let center = [0.5 * args.box_len; 3];
    let kind = match generator {
        Generator::Random => {
            if !(args.cutoff > 0.0 && args.cutoff <= 1.0) {
                return Err(CliError::Usage(format!("--cutoff {} must lie in (0, 1]", args.cutoff)));
            }
            return Ok(gen_random_smooth(&grid, args.seed, args.cutoff));
        }
        Generator::Gradient => LocalizedKind::Gradient,
        Generator::Curl => LocalizedKind::Curl,
        Generator::Mix => LocalizedKind::Mix,
    };
    Ok(gen_localized(&grid, kind, center, args.sigma, args.seed)?)
}

/// `|fft_par - direct_par| / |a|`. The transverse parts differ by the same amount.
pub fn oracle_agreement(a: &RealVectorField, fft_par: &RealVectorField, direct_par: &RealVectorField) -> f64 {
    ratio((fft_par - direct_par).l2_norm(), a.l2_norm())
}

fn cmd_decompose(args: &DecomposeArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let a = load_field(args)?;
    let d = decompose(&a);
    io::write_vector(with_suffix(&args.out, "_par.vf"), &d.a_par)?;
    io::write_vector(with_suffix(&args.out, "_perp.vf"), &d.a_perp)?;
    let norm = a.l2_norm();
    let dc = d.dc.iter().map(|v| v * v).sum::<f64>().sqrt();
    writeln!(
        out,
        "residual {:.3e} dc {:.3e} par_fraction {:.3e} perp_fraction {:.3e} curl_par {:.3e} div_perp {:.3e}",
        d.residual,
        dc,
        ratio(d.a_par.l2_norm(), norm),
        ratio(d.a_perp.l2_norm(), norm),
        d.curl_par_rel(),
        d.div_perp_rel()
    )?;
    let mut pass = d.residual <= args.tol;
    if args.oracle {
        let direct = decompose_direct_integral(&a, args.refine)?;
        let agreement = oracle_agreement(&a, &d.a_par, &direct);
        writeln!(out, "oracle_agreement {agreement:.3e} refine {}", args.refine)?;
        pass &= agreement <= args.oracle_tol;
    }
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(Status::from_pass(pass))
}

fn kernels(args: &LemmaArgs) -> Vec<(SpaceTimeKernel, f64)> {
    let gaussian = SpaceTimeKernel::Gaussian { space_sigma: args.space_sigma, time_sigma: args.time_sigma };
    match args.kernel {
        KernelChoice::Gaussian => vec![(gaussian, args.tol)],
        KernelChoice::Delta => vec![(SpaceTimeKernel::Delta, args.tol)],
        KernelChoice::Retarded => vec![(SpaceTimeKernel::Retarded, args.tol_retarded)],
        KernelChoice::All => vec![
            (gaussian, args.tol),
            (SpaceTimeKernel::Delta, args.tol),
            (SpaceTimeKernel::Retarded, args.tol_retarded),
        ],
    }
}

fn cmd_lemma(args: &LemmaArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    if !(args.cutoff > 0.0 && args.cutoff <= 1.0) {
        return Err(CliError::Usage(format!("--cutoff {} must lie in (0, 1]", args.cutoff)));
    }
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be positive".into()));
    }
    let grid = Grid::new(GridSpec::cubic(args.grid, args.box_len, args.dt, args.nt))?;
    let mut rows = Vec::new();
    for (kernel, tolerance) in kernels(args) {
        for seed in args.seed..args.seed + args.seeds {
            let j = gen_random_series(&grid, args.nt, args.dt, seed, args.cutoff)?;
            let mut report = lemma_check(&kernel, &j)?;
            report.seed = Some(seed);
            let row = LemmaRow { report, tolerance };
            writeln!(
                out,
                "{:9} seed {seed:4} residual {:.3e} tol {:.1e} {}",
                kernel.name(),
                row.report.residual_rel,
                tolerance,
                if row.pass() { "PASS" } else { "FAIL" }
            )?;
            rows.push(row);
        }
    }
    report::write_lemma_csv(&args.out, &rows)?;
    Ok(Status::from_pass(rows.iter().all(LemmaRow::pass)))
}

fn load_config(args: &RunArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let text = fs::read_to_string(&args.config)?;
    let cfg = RunConfig::parse(&text)?;
    let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    fs::create_dir_all(&dir)?;
    Ok((cfg, dir))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn cmd_simulate(args: &RunArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let (cfg, dir) = load_config(args)?;
    let grid = cfg.grid()?;
    let source = SourceSpectra::new(&cfg.model(), &grid, cfg.dt)?;
    let run = engine::run(&source, cfg.nt, &cfg.snapshot_levels())?;
    for snap in &run.snapshots {
        for (name, field) in snap.named() {
            io::write_vector(dir.join(format!("{name}_{:06}.vf", snap.level)), field)?;
        }
    }
    report::write_residuals_csv(&dir.join("residuals.csv"), &run.report)?;
    let mut pass = true;
    let mut results = Vec::new();
    for check in Check::ALL {
        let max = run.report.max(check.id()).unwrap_or(0.0);
        let tol = cfg.tolerance(check);
        let ok = max <= tol;
        pass &= ok;
        writeln!(out, "{:24} max {max:.3e} tol {tol:.1e} {}", check.id(), if ok { "PASS" } else { "FAIL" })?;
        results.push((format!("max.{}", check.id()), report::num(max)));
    }
    results.push(("status".into(), verdict(pass).into()));
    report::write_manifest(&dir.join("manifest.txt"), "simulate", &cfg.to_text(), &results)?;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(Status::from_pass(pass))
}

fn cmd_causality(args: &RunArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let (cfg, dir) = load_config(args)?;
    if cfg.source != SourceKind::SwitchOn {
        return Err(CliError::Config(format!("causality needs source = switch_on, got {}", cfg.source.name())));
    }
    let grid = cfg.grid()?;
    let source = SourceSpectra::new(&cfg.model(), &grid, cfg.dt)?;
    let rep = run_causality(&source, cfg.nt, &cfg.causality())?;
    report::write_fronts_csv(&dir.join("fronts.csv"), &rep)?;
    report::write_cone_csv(&dir.join("cone.csv"), &rep)?;

    let degenerate = rep.arrivals[0].peak == 0.0;
    let ratio = rep.max_ratio();
    let speed = rep.fit.map(|f| f.speed);
    let pass = if degenerate {
        eprintln!("warning: the source never changes; every arrival is never");
        true
    } else {
        speed.is_some_and(|s| (s - 1.0).abs() <= cfg.speed_band) && ratio <= cfg.ratio_bound
    };
    let show = |v: Option<f64>| v.map_or_else(|| report::NEVER.to_string(), |v| format!("{v:.4}"));
    writeln!(
        out,
        "speed {} points {} max_ratio {ratio:.3e} par_at_third {} instantaneous {} monotone {}",
        show(speed),
        rep.fit.map_or(0, |f| f.points),
        show(rep.par_at_third),
        rep.instantaneous(),
        rep.monotone_total()
    )?;
    let results = vec![
        ("speed".to_string(), speed.map_or_else(|| report::NEVER.to_string(), report::num)),
        ("max_ratio".to_string(), report::num(ratio)),
        ("par_at_third".to_string(), rep.par_at_third.map_or_else(|| report::NEVER.to_string(), report::num)),
        ("instantaneous".to_string(), rep.instantaneous().to_string()),
        ("monotone".to_string(), rep.monotone_total().to_string()),
        ("status".to_string(), verdict(pass).to_string()),
    ];
    report::write_manifest(&dir.join("manifest.txt"), "causality", &cfg.to_text(), &results)?;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(Status::from_pass(pass))
}
