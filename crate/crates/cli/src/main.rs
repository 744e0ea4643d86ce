//! `verne`: command-line driver for the workspace library.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
//! 3 kinematic rejection (no solution, ambiguous, or not admissible),
//! 4 validation agreement below the requested threshold.

mod manifest;

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use verne_core::config::{geometry_hash, load_machine_config_file, reference_geometry};
use verne_core::constraints::{admissible, d_pu_for_tool, interference_box};
use verne_core::export::{build_boundary_mesh, write_ply, write_point_cloud, write_slice_svg, MeshParams};
use verne_core::kinematics::{inverse_kinematics, inverse_kinematics_at, Pose};
use verne_core::sweep::{
    classify_z, constant_interval, estimate_volume, slice_at, sweep, validate_against_oracle,
    z_grid, Classification, PointCloud, SliceSet, SweepParams, ValidationParams,
};
use verne_core::{Error, MachineGeometry, Rod};

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "verne", version, about = "Constant-orientation workspace of the VERNE parallel module")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate a machine configuration; print the tilt bound, the
    /// interference box and the z classification.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        tool: f64,
        #[arg(long = "z-steps", default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
        z_steps: u64,
    },
    /// Inverse kinematics and constraint report for one platform position.
    Ik {
        #[command(flatten)]
        common: Common,
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        #[arg(allow_negative_numbers = true)]
        z: f64,
        /// Use this tilt instead of solving it from (x, y).
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        tool: f64,
    },
    /// One horizontal slice: SVG plot, CSV samples and manifest.
    Slice {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
        #[command(flatten)]
        sweep: SweepFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full workspace: point-cloud CSV, PLY boundary mesh, volume, manifest.
    Workspace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepFlags,
        #[arg(long = "z-steps", default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
        z_steps: u64,
        /// Raster cells per side for volume and mesh.
        #[arg(long, default_value_t = 96, value_parser = clap::value_parser!(u64).range(16..))]
        resolution: u64,
        /// Also write one SVG per slice.
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare sweep membership with the brute-force oracle on a grid.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepFlags,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
        nx: u64,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
        ny: u64,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(2..))]
        nz: u64,
        /// Required agreement in percent.
        #[arg(long, default_value_t = 99.0)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Machine configuration file; the built-in reference machine when absent.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepFlags {
    #[arg(long = "alpha-steps", default_value_t = 181, value_parser = clap::value_parser!(u64).range(2..))]
    alpha_steps: u64,
    #[arg(long = "arc-samples", default_value_t = 512, value_parser = clap::value_parser!(u64).range(2..))]
    arc_samples: u64,
    /// Tool length below the platform's tool mount [m].
    #[arg(long, default_value_t = 0.0)]
    tool: f64,
    /// Oracle comparison band [m]; 1e-4 L1 when absent.
    #[arg(long = "boundary-band")]
    boundary_band: Option<f64>,
}

impl SweepFlags {
    fn params(&self, geom: &MachineGeometry, z_steps: usize) -> Result<SweepParams, Failure> {
        check_tool(self.tool)?;
        let mut p = SweepParams::defaults(geom);
        p.alpha_steps = self.alpha_steps as usize;
        p.arc_samples = self.arc_samples as usize;
        p.z_steps = z_steps;
        p.d_pu = d_pu_for_tool(geom, self.tool);
        if let Some(b) = self.boundary_band {
            p.boundary_band = b;
        }
        p.validate()?;
        Ok(p)
    }
}

/// A command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => 1,
            Error::NoSolution(_) | Error::Ambiguous { .. } | Error::ImaginaryAxis { .. } | Error::DegenerateDirection => 3,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

fn check_tool(tool: f64) -> Result<(), Failure> {
    if tool.is_finite() && tool >= 0.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!("--tool must be a finite length >= 0, got {tool}")))
    }
}

fn load(common: &Common) -> Result<(MachineGeometry, String), Failure> {
    match &common.config {
        Some(path) => Ok((load_machine_config_file(path)?, path.display().to_string())),
        None => Ok((reference_geometry(), "<reference G0>".to_string())),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })
}

fn classification_name(c: Classification) -> &'static str {
    match c {
        Classification::Constant => "constant",
        Classification::LowerTransition => "lower-transition",
        Classification::UpperTransition => "upper-transition",
        Classification::Empty => "empty",
    }
}

fn cmd_check(common: &Common, tool: f64, z_steps: usize) -> Result<(), Failure> {
    check_tool(tool)?;
    let (geom, source) = load(common)?;
    println!("config = {source}");
    println!("geometry_hash = {}", geometry_hash(&geom));
    println!("alpha_1 = {:.12} rad", geom.max_tilt());
    let d_pu = d_pu_for_tool(&geom, tool);
    let b = interference_box(&geom, d_pu)?;
    println!("d_pu = {d_pu}");
    println!("box.x = ({}, {})", b.x_min, b.x_max);
    println!("box.y = ({}, {})", b.y_min, b.y_max);
    println!("box.z = ({}, {})", b.z_min, b.z_max);
    match constant_interval(&geom) {
        Some((lo, hi)) => println!("constant_band = ({lo}, {hi})"),
        None => println!("constant_band = none"),
    }
    let mut counts = [0usize; 4];
    for z in z_grid(&geom, &b, z_steps) {
        counts[match classify_z(&geom, z) {
            Classification::Constant => 0,
            Classification::LowerTransition => 1,
            Classification::UpperTransition => 2,
            Classification::Empty => 3,
        }] += 1;
    }
    println!(
        "z_classes = constant {} / lower-transition {} / upper-transition {} / empty {} (of {z_steps})",
        counts[0], counts[1], counts[2], counts[3]
    );
    println!("valid");
    Ok(())
}

fn cmd_ik(common: &Common, x: f64, y: f64, z: f64, alpha: Option<f64>, tool: f64) -> Result<(), Failure> {
    check_tool(tool)?;
    let (geom, _) = load(common)?;
    let sol = match alpha {
        Some(a) => inverse_kinematics_at(&geom, &Pose::new(x, y, z, a))?,
        None => inverse_kinematics(&geom, x, y, z)?,
    };
    let a = sol.actuators;
    println!("alpha = {:.12}", sol.alpha);
    println!("rho1 = {:.12}", a.rho1);
    println!("rho2 = {:.12}", a.rho2);
    println!("rho3 = {:.12}", a.rho3);
    println!("in_stroke = {:?}", sol.in_stroke);
    let position = Pose::new(x, y, z, sol.alpha).position();
    let report = admissible(&geom, &position, sol.alpha, d_pu_for_tool(&geom, tool));
    for rod in Rod::ALL {
        let k = rod.index();
        println!(
            "rod {}: reach {} base_joint {} platform_joint {}",
            rod.label(),
            report.in_rod_reach[k],
            report.in_base_joint[k],
            report.in_platform_joint[k]
        );
    }
    println!("in_box = {}", report.in_box);
    println!("closure_half_ok = {}", report.closure_half_ok);
    println!("on_coupling = {}", report.on_coupling);
    println!("tool_clear = {}", report.tool_clear);
    println!("branch_ok = {}", report.branch_ok);
    let ok = report.admissible && sol.all_in_stroke();
    println!("admissible = {ok}");
    if ok {
        Ok(())
    } else {
        Err(Failure { code: 3, message: format!("not admissible: {}", report.failures().join(", ")) })
    }
}

fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<(), Failure> {
    write_point_cloud(cloud, create(path)?)?;
    Ok(())
}

fn cmd_slice(common: &Common, z: f64, flags: &SweepFlags, out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let (geom, source) = load(common)?;
    let params = flags.params(&geom, 2)?;
    let b = interference_box(&geom, params.d_pu)?;
    if !(z > b.z_min && z < b.z_max) {
        return Err(Failure::usage(format!("z = {z} is outside the interference box ({}, {})", b.z_min, b.z_max)));
    }
    let slice = slice_at(&geom, z, &params)?;
    let svg = with_suffix(out, ".svg");
    write_slice_svg(&slice, &b, create(&svg)?)?;
    let mut outputs = vec![svg];
    let set = SliceSet { params, bounds: b, slices: vec![slice] };
    let cloud = PointCloud::from_slices(&geom, &set);
    if cloud.is_empty() {
        eprintln!("warning: slice at z = {z} is empty; no CSV written");
    } else {
        let csv = with_suffix(out, ".csv");
        write_cloud(&csv, &cloud)?;
        outputs.push(csv);
    }
    let slice = &set.slices[0];
    println!("z = {z}");
    println!("classification = {}", classification_name(slice.classification));
    println!("points = {}", slice.point_count());
    let manifest = RunManifest::new("slice", &geom, &source, Some(params), outputs, start, cloud.len(), 1)
        .with_extra(json!({ "z": z, "classification": classification_name(slice.classification) }));
    manifest.write(&with_suffix(out, ".manifest.json"))?;
    Ok(())
}

fn cmd_workspace(
    common: &Common,
    flags: &SweepFlags,
    z_steps: usize,
    resolution: usize,
    svg: bool,
    out: &Path,
) -> Result<(), Failure> {
    let start = Instant::now();
    let (geom, source) = load(common)?;
    let params = flags.params(&geom, z_steps)?;
    let (cloud, set) = sweep(&geom, &params)?;
    let mut outputs = Vec::new();
    let mut extra = serde_json::Map::new();
    let volume = if cloud.is_empty() {
        eprintln!("warning: the workspace is empty");
        0.0
    } else {
        let csv = with_suffix(out, ".csv");
        write_cloud(&csv, &cloud)?;
        outputs.push(csv);
        match build_boundary_mesh(&geom, &set, &MeshParams { resolution, ..MeshParams::default() }) {
            Ok(mesh) => {
                let ply = with_suffix(out, ".ply");
                write_ply(&mesh, create(&ply)?)?;
                outputs.push(ply);
                extra.insert("mesh_vertices".into(), json!(mesh.vertices.len()));
                extra.insert("mesh_triangles".into(), json!(mesh.triangles.len()));
            }
            Err(e) => {
                eprintln!("warning: no boundary mesh written: {e}");
                extra.insert("mesh_error".into(), json!(e.to_string()));
            }
        }
        estimate_volume(&set, &geom, resolution)?
    };
    if svg {
        for (k, slice) in set.slices.iter().enumerate() {
            let path = with_suffix(out, &format!(".slice_{k:03}.svg"));
            write_slice_svg(slice, &set.bounds, create(&path)?)?;
            outputs.push(path);
        }
    }
    println!("points = {}", cloud.len());
    println!("slices = {}", set.slices.len());
    println!("volume = {volume:.9} m^3");
    extra.insert("volume".into(), json!(volume));
    extra.insert("tool".into(), json!(flags.tool));
    extra.insert("resolution".into(), json!(resolution));
    let manifest = RunManifest::new("workspace", &geom, &source, Some(params), outputs, start, cloud.len(), set.slices.len())
        .with_extra(serde_json::Value::Object(extra));
    manifest.write(&with_suffix(out, ".manifest.json"))?;
    Ok(())
}

fn cmd_validate(
    common: &Common,
    flags: &SweepFlags,
    nx: usize,
    ny: usize,
    nz: usize,
    threshold: f64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let start = Instant::now();
    if !(0.0..=100.0).contains(&threshold) {
        return Err(Failure::usage(format!("--threshold must be a percentage in [0, 100], got {threshold}")));
    }
    let (geom, source) = load(common)?;
    let params = flags.params(&geom, nz)?;
    let report = validate_against_oracle(&geom, &ValidationParams { nx, ny, nz, sweep: params })?;
    let percent = 100.0 * report.agreement;
    println!("grid = {nx} x {ny} x {nz} ({} points)", report.grid_points);
    println!("near_boundary = {}", report.near_boundary);
    println!("compared = {}", report.compared);
    println!("sweep_only = {}", report.sweep_only);
    println!("oracle_only = {}", report.oracle_only);
    println!("agreement = {percent:.4}%");
    println!("worst_disagreement_distance = {:e} m", report.worst_disagreement_distance);
    if let Some(out) = out {
        let manifest = RunManifest::new("validate", &geom, &source, Some(params), Vec::new(), start, 0, nz)
            .with_extra(serde_json::to_value(report).expect("report serializes"));
        manifest.write(&with_suffix(out, ".manifest.json"))?;
    }
    if percent >= threshold {
        Ok(())
    } else {
        Err(Failure { code: 4, message: format!("agreement {percent:.4}% below threshold {threshold}%") })
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Check { common, tool, z_steps } => cmd_check(common, *tool, *z_steps as usize),
        Command::Ik { common, x, y, z, alpha, tool } => cmd_ik(common, *x, *y, *z, *alpha, *tool),
        Command::Slice { common, z, sweep, out } => cmd_slice(common, *z, sweep, out),
        Command::Workspace { common, sweep, z_steps, resolution, svg, out } => {
            cmd_workspace(common, sweep, *z_steps as usize, *resolution as usize, *svg, out)
        }
        Command::Validate { common, sweep, nx, ny, nz, threshold, out } => {
            cmd_validate(common, sweep, *nx as usize, *ny as usize, *nz as usize, *threshold, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
