//! Implementations of the five subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DVector;
use serde::Serialize;

use regobs_core::state::restrict;
use regobs_core::{
    build_basis, counterexample_1d, default_region_truncation, rank_test, regional_gramian,
    simulate_output, EigenBasis, Method, Region, Sensor, SensorGeometry, SensorSuite,
    SpectralState, TimeGrid,
};

use crate::config::{RunConfig, StateSpec, StudyConfig};
use crate::csvio::{self, SweepRow};

/// Exit codes: strategic/success, not-strategic, usage or config error.
pub const EXIT_STRATEGIC: u8 = 0;
pub const EXIT_NOT_STRATEGIC: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Treats a closed stdout (e.g. piping into `head`) as success.
fn ignore_pipe(err: std::io::Error) -> Result<()> {
    if err.kind() == std::io::ErrorKind::BrokenPipe {
        Ok(())
    } else {
        Err(err.into())
    }
}

/// Same tolerance for results whose io error is buried in the chain.
fn tolerate_pipe(result: Result<()>) -> Result<()> {
    match result {
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            Ok(())
        }
        other => other,
    }
}

fn write_output(out: Option<&Path>, payload: &impl Serialize) -> Result<()> {
    let json = serde_json::to_string_pretty(payload)?;
    match out {
        Some(path) => {
            let mut f = BufWriter::new(
                File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
            );
            writeln!(f, "{json}")?;
        }
        None => {
            if let Err(e) = writeln!(std::io::stdout().lock(), "{json}") {
                return ignore_pipe(e);
            }
        }
    }
    Ok(())
}

fn suite_from(config: &RunConfig) -> Result<SensorSuite> {
    let suite = SensorSuite::new(config.sensors.clone())?;
    suite.validate_in(&config.domain)?;
    Ok(suite)
}

fn effective_region(config: &RunConfig) -> (Region, bool) {
    let full = config.domain.full_region();
    match config.region {
        Some(region) if !region.approx_eq(&full) => (region, true),
        _ => (full, false),
    }
}

fn effective_method(config: &RunConfig, flag: Option<Method>, regional: bool) -> Method {
    flag.or(config.method).unwrap_or(if regional {
        Method::Gramian
    } else {
        Method::Rank
    })
}

fn global_basis(config: &RunConfig) -> Result<EigenBasis> {
    Ok(build_basis(
        &config.domain,
        None,
        config.basis.n,
        config.basis.convention,
    )?)
}

/// Regional basis sizing: explicit `basis.n_region` wins; otherwise the
/// rank route reuses `n` (it never leaves the region's own modes) while the
/// Gramian/reconstruction routes apply the decay-rate rule.
fn region_basis(
    config: &RunConfig,
    global: &EigenBasis,
    region: &Region,
    method: Method,
) -> Result<EigenBasis> {
    let n = match (config.basis.n_region, method) {
        (Some(n), _) => n,
        (None, Method::Rank) => config.basis.n,
        (None, Method::Gramian) => default_region_truncation(global, region)?,
    };
    Ok(build_basis(
        &config.domain,
        Some(region),
        n,
        config.basis.convention,
    )?)
}

/// Gramian-route verdict in report form.
#[derive(Serialize)]
struct GramianVerdict {
    schema: u32,
    method: Method,
    strategic: bool,
    channels: usize,
    truncation: usize,
    region_truncation: usize,
    horizon: f64,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
    threshold: f64,
    observability_constant: Option<f64>,
}

pub fn cmd_strategic(
    config: &RunConfig,
    method_flag: Option<Method>,
    out: Option<&Path>,
) -> Result<u8> {
    let suite = suite_from(config)?;
    let (region, regional) = effective_region(config);
    let method = effective_method(config, method_flag, regional);
    let strategic = match method {
        Method::Rank => {
            let basis = if regional {
                region_basis(config, &global_basis(config)?, &region, Method::Rank)?
            } else {
                global_basis(config)?
            };
            let report = rank_test(&suite, &basis, &config.thresholds)?;
            write_output(out, &report)?;
            report.strategic
        }
        Method::Gramian => {
            let basis = global_basis(config)?;
            let rb = region_basis(config, &basis, &region, Method::Gramian)?;
            let gramian = regional_gramian(
                suite.sensors(),
                &basis,
                &rb,
                config.time.horizon,
                &config.thresholds,
            )?;
            let report = GramianVerdict {
                schema: 1,
                method: Method::Gramian,
                strategic: gramian.is_positive(),
                channels: suite.len(),
                truncation: basis.len(),
                region_truncation: rb.len(),
                horizon: gramian.horizon(),
                min_eigenvalue: gramian.min_eigenvalue(),
                max_eigenvalue: gramian.max_eigenvalue(),
                threshold: gramian.threshold(),
                observability_constant: gramian.observability_constant(),
            };
            write_output(out, &report)?;
            report.strategic
        }
    };
    Ok(if strategic {
        EXIT_STRATEGIC
    } else {
        EXIT_NOT_STRATEGIC
    })
}

fn build_state(spec: &StateSpec, basis: &EigenBasis) -> Result<SpectralState> {
    match spec {
        StateSpec::Mode { mode } => {
            if *mode == 0 || *mode > basis.len() {
                bail!(
                    "initial-state mode {mode} outside the {}-mode basis (modes are numbered from 1)",
                    basis.len()
                );
            }
            Ok(SpectralState::mode(basis.clone(), mode - 1)?)
        }
        StateSpec::Coefficients { coefficients } => Ok(SpectralState::new(
            basis.clone(),
            DVector::from_vec(coefficients.clone()),
        )?),
    }
}

pub fn cmd_simulate(config: &RunConfig, out: Option<&Path>) -> Result<u8> {
    let suite = suite_from(config)?;
    let basis = global_basis(config)?;
    let spec = config
        .initial_state
        .as_ref()
        .ok_or_else(|| anyhow!("config field `initial_state` is required for simulate"))?;
    let x0 = build_state(spec, &basis)?;
    let grid = TimeGrid::uniform(config.time.horizon, config.time.samples)?;
    let trajectory = simulate_output(&x0, &suite, &grid)?;
    match out {
        Some(path) => {
            let f = BufWriter::new(
                File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
            );
            csvio::write_trajectory(f, &trajectory)?;
        }
        None => tolerate_pipe(csvio::write_trajectory(std::io::stdout().lock(), &trajectory))?,
    }
    Ok(EXIT_STRATEGIC)
}

/// Places the swept sensor at new coordinates, keeping everything else.
fn reposition(sensor: &Sensor, coords: &[(usize, f64)]) -> Result<Sensor> {
    match sensor.geometry() {
        SensorGeometry::Pointwise { point } => {
            let mut c = (0..point.dim()).map(|ax| point.coord(ax)).collect::<Vec<_>>();
            for &(axis, v) in coords {
                c[axis] = v;
            }
            let point = match c.len() {
                1 => regobs_core::Point::D1(c[0]),
                _ => regobs_core::Point::D2(c[0], c[1]),
            };
            Ok(Sensor::new(
                sensor.label(),
                SensorGeometry::Pointwise { point },
                None,
            )?)
        }
        SensorGeometry::Zone { support } => {
            let dim = support.dim();
            let mut lo = Vec::with_capacity(dim);
            let mut hi = Vec::with_capacity(dim);
            for ax in 0..dim {
                let (a, b) = support.span(ax);
                lo.push(a);
                hi.push(b);
            }
            for &(axis, v) in coords {
                let half = 0.5 * (hi[axis] - lo[axis]);
                lo[axis] = v - half;
                hi[axis] = v + half;
            }
            let support = match dim {
                1 => Region::Interval { a: lo[0], b: hi[0] },
                _ => Region::Rect {
                    x: (lo[0], hi[0]),
                    y: (lo[1], hi[1]),
                },
            };
            Ok(Sensor::new(
                sensor.label(),
                SensorGeometry::Zone { support },
                sensor.profile().cloned(),
            )?)
        }
        _ => bail!("the sweep moves pointwise sensors or zone centers only"),
    }
}

#[derive(Serialize)]
struct SweepSummary {
    schema: u32,
    method: Method,
    points: usize,
    strategic_points: usize,
    strategic_fraction: f64,
    /// Grid coordinates where the verdict is not strategic.
    non_strategic_loci: Vec<Vec<f64>>,
    seed: Option<u64>,
}

pub fn cmd_sweep(
    config: &RunConfig,
    method_flag: Option<Method>,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<u8> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow!("config field `sweep` is required for sweep"))?;
    let base_suite = suite_from(config)?;
    let (region, regional) = effective_region(config);
    let method = effective_method(config, method_flag, regional);
    let basis = global_basis(config)?;
    let rb = if regional || method == Method::Gramian {
        Some(region_basis(config, &basis, &region, method)?)
    } else {
        None
    };
    let test_basis = rb.as_ref().unwrap_or(&basis);

    let axes: Vec<(usize, Vec<f64>)> = sweep
        .axes
        .iter()
        .map(|a| (a.coord, a.values()))
        .collect();
    let mut points: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
    for (coord, values) in &axes {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for p in &points {
            for v in values {
                let mut q = p.clone();
                q.push((*coord, *v));
                next.push(q);
            }
        }
        points = next;
    }

    // Fail fast on any grid point leaving the domain, before spending time.
    let suites: Vec<SensorSuite> = points
        .iter()
        .map(|coords| {
            let mut sensors = base_suite.sensors().to_vec();
            sensors[sweep.sensor] = reposition(&sensors[sweep.sensor], coords)?;
            let suite = SensorSuite::new(sensors)?;
            suite.validate_in(&config.domain).with_context(|| {
                let at: Vec<f64> = coords.iter().map(|&(_, v)| v).collect();
                format!("grid point {at:?} leaves the domain")
            })?;
            Ok(suite)
        })
        .collect::<Result<_>>()?;

    let evaluate = |suite: &SensorSuite| -> Result<(bool, f64, usize)> {
        match method {
            Method::Rank => {
                let report = rank_test(suite, test_basis, &config.thresholds)?;
                let min_sv = report
                    .groups
                    .iter()
                    .map(|g| g.min_singular_value)
                    .fold(f64::INFINITY, f64::min);
                Ok((report.strategic, min_sv, report.failing_groups.len()))
            }
            Method::Gramian => {
                let gramian = regional_gramian(
                    suite.sensors(),
                    &basis,
                    test_basis,
                    config.time.horizon,
                    &config.thresholds,
                )?;
                let positive = gramian.is_positive();
                Ok((positive, gramian.min_eigenvalue(), usize::from(!positive)))
            }
        }
    };

    let pool = worker_pool(config.threads)?;
    let outcomes: Vec<Result<(bool, f64, usize)>> = pool.install(|| {
        use rayon::prelude::*;
        suites.par_iter().map(evaluate).collect()
    });

    let mut rows = Vec::with_capacity(points.len());
    for (coords, outcome) in points.iter().zip(outcomes) {
        let (strategic, min_sv, failing_groups) = outcome?;
        rows.push(SweepRow {
            coords: coords.iter().map(|&(_, v)| v).collect(),
            strategic,
            min_sv,
            failing_groups,
        });
    }

    let strategic_points = rows.iter().filter(|r| r.strategic).count();
    let summary = SweepSummary {
        schema: 1,
        method,
        points: rows.len(),
        strategic_points,
        strategic_fraction: strategic_points as f64 / rows.len() as f64,
        non_strategic_loci: rows
            .iter()
            .filter(|r| !r.strategic)
            .map(|r| r.coords.clone())
            .collect(),
        seed: seed.or(config.seed),
    };

    match out {
        Some(path) => {
            let f = BufWriter::new(
                File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
            );
            csvio::write_sweep(f, &rows)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        None => {
            tolerate_pipe(csvio::write_sweep(std::io::stdout().lock(), &rows))?;
            eprintln!("{}", serde_json::to_string(&summary)?);
        }
    }
    Ok(EXIT_STRATEGIC)
}

fn worker_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = match std::env::var("REGOBS_THREADS") {
        Ok(s) => Some(
            s.parse::<usize>()
                .context("REGOBS_THREADS must be a positive integer")?,
        ),
        Err(_) => threads,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.unwrap_or(0))
        .build()
        .context("cannot build the sweep worker pool")
}

#[derive(Serialize)]
struct ReconstructReport {
    schema: u32,
    region_truncation: usize,
    coefficients: Vec<f64>,
    residual: f64,
    gramian_min_eigenvalue: f64,
    gramian_threshold: f64,
    observability_constant: Option<f64>,
    /// Error of the regional solve against the restricted ground truth.
    #[serde(skip_serializing_if = "Option::is_none")]
    regional_error: Option<f64>,
    /// Error of a whole-domain solve, measured over the whole domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    global_error_on_domain: Option<f64>,
    /// The same whole-domain solve's error, measured over the region only.
    /// Restriction never increases a norm, so this cannot exceed the
    /// domain-wide figure.
    #[serde(skip_serializing_if = "Option::is_none")]
    global_error_on_region: Option<f64>,
}

pub fn cmd_reconstruct(config: &RunConfig, out: Option<&Path>) -> Result<u8> {
    let rc = config
        .reconstruct
        .as_ref()
        .ok_or_else(|| anyhow!("config field `reconstruct` is required for reconstruct"))?;
    let suite = suite_from(config)?;
    let basis = global_basis(config)?;
    let (region, _) = effective_region(config);
    let rb = region_basis(config, &basis, &region, Method::Gramian)?;
    let labels = suite
        .sensors()
        .iter()
        .map(|s| s.label().to_string())
        .collect();
    let trajectory = csvio::read_trajectory(&rc.trajectory, labels)?;
    let recon = regobs_core::reconstruct_initial_state(
        &trajectory,
        &suite,
        &basis,
        &rb,
        rc.ridge,
        &config.thresholds,
    )?;

    let mut report = ReconstructReport {
        schema: 1,
        region_truncation: rb.len(),
        coefficients: recon.state.coefficients().iter().copied().collect(),
        residual: recon.residual,
        gramian_min_eigenvalue: recon.gramian.min_eigenvalue(),
        gramian_threshold: recon.gramian.threshold(),
        observability_constant: recon.gramian.observability_constant(),
        regional_error: None,
        global_error_on_domain: None,
        global_error_on_region: None,
    };

    if let Some(truth_spec) = &rc.ground_truth {
        let truth = build_state(truth_spec, &basis)?;
        let truth_on_region = restrict(&truth, &region, &rb)?;
        report.regional_error = Some(
            (truth_on_region.coefficients() - recon.state.coefficients()).norm(),
        );
        // Whole-domain solve for the norm comparison, when feasible.
        let global_solve = regobs_core::reconstruct_initial_state(
            &trajectory,
            &suite,
            &basis,
            &basis,
            rc.ridge,
            &config.thresholds,
        );
        if let Ok(gsolve) = global_solve {
            let err = truth.coefficients() - gsolve.state.coefficients();
            report.global_error_on_domain = Some(err.norm());
            let err_state = SpectralState::new(basis.clone(), err)?;
            report.global_error_on_region =
                Some(restrict(&err_state, &region, &rb)?.norm());
        }
    }

    write_output(out, &report)?;
    Ok(EXIT_STRATEGIC)
}

pub fn cmd_counterexample(study: &StudyConfig, out: Option<&Path>) -> Result<u8> {
    let report = counterexample_1d(study.alpha, study.b, study.n, study.horizon)?;
    write_output(out, &report)?;
    Ok(EXIT_STRATEGIC)
}
