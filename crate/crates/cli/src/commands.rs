use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use log::info;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use steerfiber::calib::{bend_loss, fit_bend_line, power_budget, register_fiducials, BendSample};
use steerfiber::config::{ConfigError, RunConfig};
use steerfiber::geom::io::{atomic_write, write_colored_ply, write_stl_ascii, write_stl_binary};
use steerfiber::geom::{load_mesh, PoseRecord, TriMesh};
use steerfiber::reach::{build_map, synthetic_larynx, FiberMode, Gating, SceneModel};
use steerfiber::sheath::{ClosurePolicy, FiberConfig, SheathModel};

use crate::{
    BendCurveArgs, Cli, Command, FitArgs, FkArgs, Failure, GenPhantomArgs, OutArgs, PowerArgs,
    RegisterArgs, WorkspaceArgs,
};

type Outcome = Result<(), Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn runtime_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

pub fn run(cli: &Cli) -> Outcome {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(config_err)?,
        None => RunConfig::default(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(runtime_err)?;
    pool.install(|| match &cli.command {
        Command::Fk(a) => fk(config, a),
        Command::BendCurve(a) => bend_curve(config, a),
        Command::Limits(a) => limits(config, a),
        Command::Workspace(a) => workspace(config, a),
        Command::Fit(a) => fit(a),
        Command::Register(a) => register(a),
        Command::Power(a) => power(a),
        Command::GenPhantom(a) => gen_phantom(a),
    })
}

fn sheath_model(config: &RunConfig) -> Result<SheathModel, Failure> {
    config.validate().map_err(config_err)?;
    SheathModel::new(config.sheath).map_err(config_err)
}

/// Writes `data` atomically to `path`, or to stdout when no path is given.
fn emit(out: Option<&Path>, data: &[u8]) -> Outcome {
    match out {
        Some(path) => atomic_write(path, data)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(runtime_err),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(data)
                .and_then(|_| stdout.flush())
                .map_err(runtime_err)
        }
    }
}

fn to_json(value: &impl Serialize) -> Vec<u8> {
    let mut buf = serde_json::to_vec_pretty(value).expect("plain data serializes");
    buf.push(b'\n');
    buf
}

fn emit_json(out: &OutArgs, value: &impl Serialize) -> Outcome {
    emit(out.out.as_deref(), &to_json(value))
}

/// JSON has no infinity; unbounded values are written as null.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Serialize)]
struct FkReport {
    dl_mm: f64,
    z_mm: f64,
    theta_deg: f64,
    bend_angle_deg: f64,
    bend_radius_mm: Option<f64>,
    tip: PoseRecord,
    backbone_mm: Vec<[f64; 3]>,
}

fn fk(config: RunConfig, a: &FkArgs) -> Outcome {
    let model = sheath_model(&config)?;
    let policy = if a.clamp { ClosurePolicy::Clamp } else { ClosurePolicy::Error };
    let request = FiberConfig::new(a.dl, a.z, a.theta.to_radians());
    let pose = model
        .forward_kinematics_with(&request, policy)
        .map_err(runtime_err)?;
    let dl = a.dl.min(model.max_tendon_displacement());
    emit_json(
        &a.out,
        &FkReport {
            dl_mm: dl,
            z_mm: a.z,
            theta_deg: a.theta,
            bend_angle_deg: model.bend_angle(dl).to_degrees(),
            bend_radius_mm: finite(model.bend_radius(dl)),
            tip: pose.tip.to_record(),
            backbone_mm: pose.backbone.iter().map(|p| p.translation.into()).collect(),
        },
    )
}

fn bend_curve(config: RunConfig, a: &BendCurveArgs) -> Outcome {
    let model = sheath_model(&config)?;
    if a.steps == 0 {
        return Err(config_err(anyhow!("--steps must be at least 1")));
    }
    let dl_max = model.max_tendon_displacement();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dl_mm", "phi_deg"]).map_err(runtime_err)?;
    for k in 0..=a.steps {
        let dl = dl_max * k as f64 / a.steps as f64;
        let phi = model.bend_angle(dl).to_degrees();
        w.write_record([dl.to_string(), phi.to_string()])
            .map_err(runtime_err)?;
    }
    let data = w.into_inner().map_err(|e| runtime_err(anyhow!("{e}")))?;
    emit(a.out.out.as_deref(), &data)
}

#[derive(Serialize)]
struct LimitsReport {
    phi_max_deg: f64,
    min_bend_radius_mm: f64,
    neutral_plane_mm: f64,
    closure_dl_mm: f64,
    max_dl_mm: f64,
    notch_count: u32,
}

fn limits(config: RunConfig, a: &OutArgs) -> Outcome {
    let model = sheath_model(&config)?;
    emit_json(
        a,
        &LimitsReport {
            phi_max_deg: model.max_bend_angle().to_degrees(),
            min_bend_radius_mm: model.min_bend_radius(),
            neutral_plane_mm: model.neutral_plane(),
            closure_dl_mm: model.closure_displacement(),
            max_dl_mm: model.max_tendon_displacement(),
            notch_count: model.design().notch_count,
        },
    )
}

#[derive(Serialize)]
struct WorkspaceSummary {
    seed: u64,
    mode: FiberMode,
    gating: Gating,
    mesh: String,
    faces_total: usize,
    mesh_area_cm2: f64,
    configs_requested: usize,
    configs_evaluated: usize,
    shortfall: bool,
    rays_per_config: usize,
    divergence_deg: f64,
    faces_laser_hit: usize,
    faces_reachable: usize,
    laser_area_cm2: f64,
    coverage_cm2: f64,
}

fn workspace(mut config: RunConfig, a: &WorkspaceArgs) -> Outcome {
    if let Some(m) = &a.mesh {
        config.io.mesh = Some(m.clone());
    }
    if let Some(s) = a.scale {
        config.io.scale = s;
    }
    if let Some(n) = a.n {
        config.sampling.n = n;
    }
    if let Some(r) = a.rays {
        config.beam.rays_per_config = r;
    }
    if let Some(s) = a.seed {
        config.sampling.seed = s;
    }
    if let Some(m) = a.mode {
        config.map.mode = m.into();
    }
    if let Some(g) = a.gating {
        config.map.gating = g.into();
    }
    if let Some(c) = a.clearance {
        config.sampling.clearance = c;
    }
    if let Some(d) = a.divergence {
        config.beam.divergence = d.to_radians();
    }
    for (slot, flag) in [
        (&mut config.io.ply, &a.ply),
        (&mut config.io.summary, &a.summary),
        (&mut config.io.faces, &a.faces),
    ] {
        if let Some(p) = flag {
            *slot = Some(p.clone());
        }
    }
    let sheath = sheath_model(&config)?;
    let scene = SceneModel::new(sheath, config.scope).map_err(config_err)?;

    let (mesh, mesh_name) = load_scene_mesh(&config.io.mesh, config.io.scale)?;
    info!(
        "mesh: {} faces; sampling {} configurations, {} rays each",
        mesh.face_count(),
        config.sampling.n,
        config.beam.rays_per_config
    );
    let map = build_map(&mesh, &scene, &config.sampling, &config.beam, &config.map)
        .map_err(runtime_err)?;

    let summary = WorkspaceSummary {
        seed: map.seed,
        mode: config.map.mode,
        gating: config.map.gating,
        mesh: mesh_name,
        faces_total: map.face_count(),
        mesh_area_cm2: mesh.total_area() / 100.0,
        configs_requested: map.configs_requested,
        configs_evaluated: map.configs_evaluated,
        shortfall: map.shortfall,
        rays_per_config: config.beam.rays_per_config,
        divergence_deg: config.beam.divergence.to_degrees(),
        faces_laser_hit: map.laser_faces().len(),
        faces_reachable: map.reachable_faces().len(),
        laser_area_cm2: map.laser_area(),
        coverage_cm2: map.coverage_area(),
    };

    // everything is rendered before the first file is touched
    let mut artifacts: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    if let Some(p) = &config.io.ply {
        let mut buf = Vec::new();
        write_colored_ply(&mesh, &map.labels(), &mut buf).map_err(runtime_err)?;
        artifacts.push((p.clone(), buf));
    }
    if let Some(p) = &config.io.faces {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["face", "area_mm2", "laser_hits", "reachable"])
            .map_err(runtime_err)?;
        for f in 0..map.face_count() {
            w.write_record([
                f.to_string(),
                map.face_areas()[f].to_string(),
                map.laser_hits[f].to_string(),
                u8::from(map.jointly_reachable[f]).to_string(),
            ])
            .map_err(runtime_err)?;
        }
        let buf = w.into_inner().map_err(|e| runtime_err(anyhow!("{e}")))?;
        artifacts.push((p.clone(), buf));
    }
    let summary_json = to_json(&summary);
    for (path, data) in &artifacts {
        emit(Some(path), data)?;
    }
    emit(config.io.summary.as_deref(), &summary_json)
}

fn load_scene_mesh(path: &Option<PathBuf>, scale: f64) -> Result<(TriMesh, String), Failure> {
    let (mesh, name) = match path {
        Some(p) => (
            load_mesh(p)
                .with_context(|| format!("loading {}", p.display()))
                .map_err(runtime_err)?,
            p.display().to_string(),
        ),
        None => (synthetic_larynx(), "synthetic-larynx".to_string()),
    };
    if scale == 1.0 {
        return Ok((mesh, name));
    }
    Ok((mesh.scaled(scale).map_err(runtime_err)?, name))
}

#[derive(Deserialize)]
struct BendRow {
    dl_mm: f64,
    phi_deg: f64,
}

#[derive(Serialize)]
struct FitReport {
    samples: usize,
    slope_rad_per_mm: f64,
    slope_deg_per_mm: f64,
    intercept_rad: f64,
    intercept_deg: f64,
    r_squared: f64,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(runtime_err)?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(runtime_err)
}

fn fit(a: &FitArgs) -> Outcome {
    let rows: Vec<BendRow> = read_csv(&a.input)?;
    let samples: Vec<BendSample> = rows
        .iter()
        .map(|r| BendSample {
            dl: r.dl_mm,
            phi: r.phi_deg.to_radians(),
        })
        .collect();
    let line = fit_bend_line(&samples).map_err(runtime_err)?;
    emit_json(
        &a.out,
        &FitReport {
            samples: samples.len(),
            slope_rad_per_mm: line.slope,
            slope_deg_per_mm: line.slope.to_degrees(),
            intercept_rad: line.intercept,
            intercept_deg: line.intercept.to_degrees(),
            r_squared: line.r_squared,
        },
    )
}

#[derive(Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize)]
struct RegisterReport {
    points: usize,
    rotation: [[f64; 3]; 3],
    translation_mm: [f64; 3],
    rms_error_mm: f64,
}

fn register(a: &RegisterArgs) -> Outcome {
    let load = |p: &Path| -> Result<Vec<Vector3<f64>>, Failure> {
        Ok(read_csv::<PointRow>(p)?
            .into_iter()
            .map(|r| Vector3::new(r.x, r.y, r.z))
            .collect())
    };
    let src = load(&a.src)?;
    let dst = load(&a.dst)?;
    let reg = register_fiducials(&src, &dst).map_err(runtime_err)?;
    let r = reg.rotation;
    emit_json(
        &a.out,
        &RegisterReport {
            points: src.len(),
            rotation: std::array::from_fn(|i| std::array::from_fn(|j| r[(i, j)])),
            translation_mm: reg.translation.into(),
            rms_error_mm: reg.rms_error,
        },
    )
}

#[derive(Serialize)]
struct PowerReport {
    input_w: f64,
    bend_radius_mm: Option<f64>,
    bend_loss: f64,
    delivered_w: f64,
}

fn power(a: &PowerArgs) -> Outcome {
    let delivered = power_budget(a.input_w, a.bend_radius).map_err(config_err)?;
    emit_json(
        &a.out,
        &PowerReport {
            input_w: a.input_w,
            bend_radius_mm: finite(a.bend_radius),
            bend_loss: bend_loss(a.bend_radius).map_err(config_err)?,
            delivered_w: delivered,
        },
    )
}

fn gen_phantom(a: &GenPhantomArgs) -> Outcome {
    let mesh = synthetic_larynx();
    let mut buf = Vec::new();
    if a.ascii {
        write_stl_ascii(&mesh, &mut buf)
    } else {
        write_stl_binary(&mesh, &mut buf)
    }
    .map_err(runtime_err)?;
    emit(Some(&a.out), &buf)
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.into())
    }
}
