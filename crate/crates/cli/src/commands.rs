use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use robfsc::ingest::{
    gen_aircraft, gen_spacecraft, parse_model, parse_policy, write_model, write_policy,
};
use robfsc::ingest::{AircraftParams, SpacecraftParams};
use robfsc::lp::BackendKind;
use robfsc::{
    induce_imc, memory_product, nominal, robust_value_iteration, scp_solve, to_simple, Interval,
    ScpConfig, ScpOutcome, SpecThreshold, UPomdp, ViOptions,
};

use crate::manifest::{sidecar, FileRecord, RunManifest};
use crate::mapping::{product_mapping, simple_mapping};
use crate::{
    read, write, AircraftArgs, Backend, Cli, CliError, CliResult, Command, Direction, GenerateCmd,
    SolveArgs, SpacecraftArgs, TransformCmd, VerifyArgs, EXIT_OK, EXIT_UNSATISFIED,
};

/// Slack allowed between a reported success and the independent re-check.
const SOUNDNESS_TOL: f64 = 1e-6;

pub fn run(cli: &Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Solve(args) => solve(args),
        Command::Verify(args) => verify(args),
        Command::Generate(GenerateCmd::Spacecraft(args)) => generate_spacecraft(args),
        Command::Generate(GenerateCmd::Aircraft(args)) => generate_aircraft(args),
        Command::Transform(cmd) => transform(cmd),
    }
}

fn load_model(path: &Path) -> CliResult<(UPomdp, FileRecord)> {
    let text = read(path)?;
    let model = parse_model(&text).map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })?;
    Ok((model, FileRecord::of(path, text.as_bytes())))
}

fn emit(path: &Path, text: &str, manifest: &mut RunManifest) -> CliResult<()> {
    write(path, text)?;
    manifest.outputs.push(FileRecord::of(path, text.as_bytes()));
    Ok(())
}

/// Keeps satisfied runs over unsatisfied ones, then higher β, then the
/// lower seed.
fn better(a: &(u64, ScpOutcome), b: &(u64, ScpOutcome)) -> bool {
    let key =
        |(seed, o): &(u64, ScpOutcome)| (o.is_satisfied(), o.beta(), std::cmp::Reverse(*seed));
    let (ka, kb) = (key(a), key(b));
    (ka.0, ka.1) > (kb.0, kb.1) || ((ka.0, ka.1) == (kb.0, kb.1) && ka.2 > kb.2)
}

fn solve(args: &SolveArgs) -> CliResult<i32> {
    let (model, input) = load_model(&args.model)?;
    let model = if args.nominal {
        nominal(&model)?
    } else {
        model
    };
    let spec = SpecThreshold::at_least(args.kappa);
    let base = ScpConfig {
        tau: args.tau,
        delta0: args.delta,
        gamma: args.gamma,
        omega: args.omega,
        max_iters: args.max_iters,
        seed: args.seed,
        backend: match args.backend {
            Backend::Sparse => BackendKind::Sparse,
            Backend::Dense => BackendKind::Dense,
        },
        wall_clock: args.wall_clock,
        ..ScpConfig::default()
    };
    base.check()?;

    let seeds: Vec<u64> = (0..=args.restarts)
        .map(|i| args.seed.wrapping_add(i))
        .collect();
    let runs: Vec<(u64, ScpOutcome)> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = ScpConfig {
                seed,
                ..base.clone()
            };
            scp_solve(&model, &spec, args.memory, &cfg).map(|o| (seed, o))
        })
        .collect::<Result<_, _>>()?;
    let mut runs = runs.into_iter();
    let mut best = runs.next().expect("at least one run");
    for run in runs {
        if better(&run, &best) {
            best = run;
        }
    }
    let (seed, outcome) = best;

    // independent re-check of the returned controller
    let imc = induce_imc(&outcome.product.product, &outcome.product_policy)?;
    let checked = robust_value_iteration(&imc, &spec, ViOptions::default())?.beta;
    if outcome.is_satisfied() && checked < args.kappa - SOUNDNESS_TOL {
        return Err(CliError::Invalid(format!(
            "solver reported success but re-verification gives {checked} < {}",
            args.kappa
        )));
    }

    let config = json!({
        "kappa": args.kappa,
        "memory": args.memory,
        "tau": args.tau,
        "delta": args.delta,
        "gamma": args.gamma,
        "omega": args.omega,
        "max_iters": args.max_iters,
        "restarts": args.restarts,
        "nominal": args.nominal,
        "backend": format!("{:?}", args.backend).to_lowercase(),
        "wall_clock": args.wall_clock,
        "best_seed": seed,
    });
    let mut manifest = RunManifest::new("solve", config, Some(args.seed));
    manifest.inputs.push(input);
    if let Some(path) = &args.trace {
        emit(path, &outcome.trace.to_csv(), &mut manifest)?;
    }
    if let Some(path) = &args.policy {
        emit(
            path,
            &write_policy(args.memory, &outcome.product_policy),
            &mut manifest,
        )?;
    }
    let manifest_path = args.manifest.clone().or_else(|| {
        args.policy
            .as_deref()
            .or(args.trace.as_deref())
            .map(sidecar)
    });
    if let Some(path) = manifest_path {
        manifest.save(&path)?;
    }

    println!("beta {}", outcome.beta());
    println!("iterations {}", outcome.trace.rows.len());
    if outcome.is_satisfied() {
        println!("satisfied");
        Ok(EXIT_OK)
    } else {
        println!("not satisfied ({:?})", outcome.status);
        Ok(EXIT_UNSATISFIED)
    }
}

fn verify(args: &VerifyArgs) -> CliResult<i32> {
    let (model, _) = load_model(&args.model)?;
    let model = if args.nominal {
        nominal(&model)?
    } else {
        model
    };
    let text = read(&args.policy)?;
    let stored = parse_policy(&text).map_err(|source| CliError::Input {
        path: args.policy.clone(),
        source,
    })?;
    let spec = match args.direction {
        Direction::Maximize => SpecThreshold::at_least(args.kappa),
        Direction::Minimize => SpecThreshold::at_most(args.kappa),
    };
    let target = if stored.memory > 1 {
        memory_product(&model, stored.memory)?.product
    } else {
        model
    };
    let imc = induce_imc(&target, &stored.policy).map_err(|source| CliError::Input {
        path: args.policy.clone(),
        source,
    })?;
    let opts = ViOptions {
        tol: args.tol,
        ..ViOptions::default()
    };
    let beta = robust_value_iteration(&imc, &spec, opts)?.beta;
    println!("beta {beta}");
    if spec.is_satisfied_by(beta) {
        println!("satisfied");
        Ok(EXIT_OK)
    } else {
        println!("violated");
        Ok(EXIT_UNSATISFIED)
    }
}

fn interval(v: &[f64]) -> Interval {
    Interval::new(v[0], v[1])
}

fn write_generated(
    model: &UPomdp,
    out: &Path,
    command: &str,
    config: serde_json::Value,
    seed: u64,
) -> CliResult<i32> {
    let text = write_model(model)?;
    let mut manifest = RunManifest::new(command, config, Some(seed));
    emit(out, &text, &mut manifest)?;
    manifest.save(&sidecar(out))?;
    Ok(EXIT_OK)
}

fn generate_spacecraft(args: &SpacecraftArgs) -> CliResult<i32> {
    let params = SpacecraftParams {
        nmt_count: args.nmts,
        time_resolution: args.res,
        switch_radius: args.radius,
        switch_success: interval(&args.switch_success),
        detect_success: interval(&args.detect_success),
        object_cells: args.objects.clone(),
        random_objects: args.random_objects,
        obs_cells: args.obs_cells,
        orbit_observable: !args.hide_orbit,
        seed: args.seed,
    };
    let model = gen_spacecraft(&params)?;
    let config = json!({
        "nmts": args.nmts,
        "res": args.res,
        "radius": args.radius,
        "switch": args.switch_success,
        "detect": args.detect_success,
        "objects": args.objects,
        "random_objects": args.random_objects,
        "obs_cells": args.obs_cells,
        "hide_orbit": args.hide_orbit,
    });
    write_generated(&model, &args.out, "generate spacecraft", config, args.seed)
}

fn generate_aircraft(args: &AircraftArgs) -> CliResult<i32> {
    let params = AircraftParams {
        position_cells: args.pos,
        speed_cells: args.speed,
        intruder_accel: interval(&args.intruder_accel),
        pilot_responsive: interval(&args.pilot_responsive),
        sensor_quantization: args.quant,
        unsafe_radius: args.unsafe_radius,
        seed: args.seed,
    };
    let model = gen_aircraft(&params)?;
    let config = json!({
        "pos": args.pos,
        "speed": args.speed,
        "accel": args.intruder_accel,
        "pilot": args.pilot_responsive,
        "quant": args.quant,
        "unsafe_radius": args.unsafe_radius,
    });
    write_generated(&model, &args.out, "generate aircraft", config, args.seed)
}

/// `<path>.map`.
fn map_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".map");
    PathBuf::from(s)
}

fn transform(cmd: &TransformCmd) -> CliResult<i32> {
    let (input, output, command, config) = match cmd {
        TransformCmd::Simple { input, output } => (input, output, "transform simple", json!({})),
        TransformCmd::Product {
            memory,
            input,
            output,
        } => (
            input,
            output,
            "transform product",
            json!({ "memory": memory }),
        ),
    };
    let (model, record) = load_model(input)?;
    let (text, mapping) = match cmd {
        TransformCmd::Simple { .. } => {
            let sf = to_simple(&model)?;
            (write_model(&sf.simple)?, simple_mapping(&sf))
        }
        TransformCmd::Product { memory, .. } => {
            let mp = memory_product(&model, *memory)?;
            (write_model(&mp.product)?, product_mapping(&model, &mp))
        }
    };
    let mut manifest = RunManifest::new(command, config, None);
    manifest.inputs.push(record);
    emit(output, &text, &mut manifest)?;
    emit(&map_path(output), &mapping, &mut manifest)?;
    manifest.save(&sidecar(output))?;
    Ok(EXIT_OK)
}
