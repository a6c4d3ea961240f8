use std::path::PathBuf;

use clap::Args;
use hilbert_core::convergence::{density_convergence, smoothing_sequence, Grid};
use hilbert_core::hyperbolicity::delta_probe;
use hilbert_core::john::{john_ellipsoid, sandwich_check};
use hilbert_core::local_geometry::{metric_ball, theorem12_report, Theorem12Config};
use hilbert_core::measure::{hilbert_density, VolumeMethod};
use hilbert_core::metric::{finsler_norm, hilbert_distance};
use hilbert_core::spectrum::{
    cheeger_quotient, cylinder_sandwich, cylinder_spectral_bound, fact2_check, minimize_rayleigh,
    sobolev_quotient, Family, QuotientConfig, RadialTrial, CYLINDER_C1, CYLINDER_C2,
};
use hilbert_core::{BodySpec, ConvexBody, GeometryError, Point};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::output::{Format, Report, Table};
use crate::svg::Picture;
use crate::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type Result<T> = std::result::Result<T, CliError>;

/// A comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct List(pub Vec<f64>);

/// Semicolon-separated lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Points(pub Vec<Vec<f64>>);

fn numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{x}` is not a number"))
        })
        .collect()
}

fn parse_list(s: &str) -> std::result::Result<List, String> {
    numbers(s).map(List)
}

fn parse_points(s: &str) -> std::result::Result<Points, String> {
    s.split(';')
        .map(numbers)
        .collect::<std::result::Result<_, _>>()
        .map(Points)
}

fn parse_grid(s: &str) -> std::result::Result<List, String> {
    grid_values(s).map(List)
}

fn grid_values(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:end:count".into());
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad start `{}`", parts[0]))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad end `{}`", parts[1]))?;
    let k: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad count `{}`", parts[2]))?;
    Ok(match k {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..k)
            .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
            .collect(),
    })
}

/// Path to a body JSON file, or the JSON text itself.
#[derive(Args, Debug, Clone, Serialize)]
pub struct BodyArg {
    #[arg(long)]
    pub body: String,
}

fn load_body(arg: &str) -> Result<(ConvexBody, Value)> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| CliError::Input(format!("cannot read body file `{arg}`: {e}")))?
    };
    let spec = BodySpec::from_json(&text)?;
    let body = spec.build()?;
    let echo = serde_json::to_value(&spec).map_err(|e| CliError::Input(e.to_string()))?;
    Ok((body, echo))
}

fn point(body: &ConvexBody, coords: &Option<List>, field: &str) -> Result<Point> {
    match coords.as_ref().map(|l| &l.0) {
        None => Ok(body.interior_point().clone()),
        Some(c) if c.len() != body.dim() => Err(CliError::Input(format!(
            "--{field}: expected {} coordinates, got {}",
            body.dim(),
            c.len()
        ))),
        Some(c) => Ok(DVector::from_vec(c.clone())),
    }
}

fn required(body: &ConvexBody, coords: &[f64], field: &str) -> Result<Point> {
    point(body, &Some(List(coords.to_vec())), field)
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn vec_json(p: &Point) -> Value {
    json!(p.as_slice())
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub body: BodyArg,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub p: List,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub q: List,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NormArgs {
    #[command(flatten)]
    pub body: BodyArg,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub p: List,
    /// Tangent vector.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub v: List,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub body: BodyArg,
    /// Base point (default: the body's interior point).
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub p: Option<List>,
    /// Directions for the tangent-ball volume.
    #[arg(long, default_value_t = 512)]
    pub resolution: usize,
    /// Use Monte-Carlo with this many samples in dimension >= 3.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BallArgs {
    #[command(flatten)]
    pub body: BodyArg,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub p: Option<List>,
    /// Hilbert radius.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct JohnArgs {
    #[command(flatten)]
    pub body: BodyArg,
    /// Facets of the outer polytope for non-polytope bodies.
    #[arg(long, default_value_t = 128)]
    pub facet_budget: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Theorem12Args {
    #[command(flatten)]
    pub body: BodyArg,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub p: Option<List>,
    /// Ball boundary directions (default 512 in the plane, 2048 in space).
    #[arg(long)]
    pub boundary_directions: Option<usize>,
    /// Interior sample points (default 256 / 1024).
    #[arg(long)]
    pub interior_points: Option<usize>,
    /// Directions per interior point (default 64 / 128).
    #[arg(long)]
    pub step_directions: Option<usize>,
    /// Tolerance subtracted from the gap bound.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CylinderArgs {
    /// Heights as start:end:count.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "-0.9:0.9:7")]
    pub tgrid: List,
    /// Disk points `x,y;x,y;...`.
    #[arg(long, value_parser = parse_points, allow_hyphen_values = true, default_value = "0,0")]
    pub q: Points,
    /// Monte-Carlo samples per tangent ball.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Slack on the sandwich window.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Tent,
    Exponential,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RayleighArgs {
    #[command(flatten)]
    pub body: BodyArg,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub center: Option<List>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Exponential)]
    pub family: FamilyArg,
    /// Support radii.
    #[arg(long, value_parser = parse_list, default_value = "4,8,12")]
    pub radii: List,
    #[arg(long, default_value_t = 8192)]
    pub samples: usize,
    #[arg(long, default_value_t = 64)]
    pub dual_resolution: usize,
    /// Fail if any radius's best quotient is below this by more than
    /// 3 standard errors.
    #[arg(long)]
    pub lower_bound: Option<f64>,
    /// Use the cylinder's derived bound `C1 / (4 C2)` as `--lower-bound`.
    #[arg(long)]
    pub cylinder_bound: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CheegerArgs {
    #[command(flatten)]
    pub body: BodyArg,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub center: Option<List>,
    /// Hilbert radius of the ball.
    #[arg(long)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 8192)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConvergeArgs {
    /// The limit body.
    #[command(flatten)]
    pub body: BodyArg,
    /// Sequence members are Minkowski sums with balls of radius 1/k.
    #[arg(long, value_parser = parse_list, default_value = "2,4,8,16")]
    pub ks: List,
    /// The compact set is the limit scaled by this factor.
    #[arg(long, default_value_t = 0.5)]
    pub a_scale: f64,
    /// Fail if the final density deviation exceeds this.
    #[arg(long)]
    pub max_deviation: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub body: BodyArg,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub center: Option<List>,
    #[arg(long, value_parser = parse_list, default_value = "2,4,6")]
    pub scales: List,
    #[arg(long, default_value_t = 10_000)]
    pub quadruples: usize,
}

pub fn default_format(cmd: &Command) -> Format {
    match cmd {
        Command::Distance(_) | Command::Norm(_) | Command::Density(_) => Format::Text,
        Command::Cylinder(_) | Command::Converge(_) | Command::Delta(_) => Format::Csv,
        _ => Format::Json,
    }
}

fn config(cli: &Cli, args: &impl Serialize, body: Option<Value>) -> Value {
    let mut c = json!({ "common": to_json(&cli.common), "args": to_json(args) });
    if let Some(b) = body {
        c["body_spec"] = b;
    }
    c
}

fn write_svg(path: &Option<PathBuf>, pic: Option<Picture>) -> Result<()> {
    if let Some(path) = path {
        let pic = pic.ok_or_else(|| CliError::Input("--svg needs a planar body".into()))?;
        std::fs::write(path, pic.render())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Report> {
    let seed = cli.common.seed;
    if cli.common.svg.is_some() && !matches!(cli.command, Command::Ball(_) | Command::John(_)) {
        return Err(CliError::Input(
            "--svg is only supported by `ball` and `john`".into(),
        ));
    }
    match &cli.command {
        Command::Distance(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let p = required(&body, &a.p.0, "p")?;
            let q = required(&body, &a.q.0, "q")?;
            let d = hilbert_distance(&body, &p, &q)?;
            let mut r = Report::new(
                "distance",
                config(cli, a, Some(spec)),
                json!({ "distance": d }),
            );
            r.scalar = Some(d);
            Ok(r)
        }
        Command::Norm(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let p = required(&body, &a.p.0, "p")?;
            let v = required(&body, &a.v.0, "v")?;
            let f = finsler_norm(&body, &p, &v)?;
            let mut r = Report::new("norm", config(cli, a, Some(spec)), json!({ "norm": f }));
            r.scalar = Some(f);
            Ok(r)
        }
        Command::Density(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let p = point(&body, &a.p, "p")?;
            let method = match (body.dim(), a.samples) {
                (2, _) => VolumeMethod::Polygon {
                    resolution: a.resolution,
                },
                (_, Some(samples)) => VolumeMethod::MonteCarlo { samples, seed },
                _ => VolumeMethod::Quadrature {
                    resolution: a.resolution,
                },
            };
            let d = hilbert_density(&body, &p, method)?;
            let mut r = Report::new("density", config(cli, a, Some(spec)), to_json(&d));
            r.scalar = Some(d.h);
            Ok(r)
        }
        Command::Ball(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let p = point(&body, &a.p, "p")?;
            let ball = metric_ball(&body, &p, a.radius, a.resolution)?;
            let convex = ball.convexity_probe()?;
            let results = json!({
                "center": vec_json(&p),
                "radius": a.radius,
                "directions": ball.directions.iter().map(|u| u.as_slice().to_vec()).collect::<Vec<_>>(),
                "radii": ball.radii,
                "convex": convex,
            });
            let mut r = Report::new("ball", config(cli, a, Some(spec)), results);
            r.pass = convex;
            let pic = if body.dim() == 2 {
                let mut pic = Picture::new(&body)?;
                pic.add(ball.boundary_points(), "#c0392b");
                Some(pic)
            } else {
                None
            };
            write_svg(&cli.common.svg, pic)?;
            Ok(r)
        }
        Command::John(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let e = john_ellipsoid(&body, a.facet_budget)?;
            let s = sandwich_check(&body, &e, None)?;
            let results = json!({
                "center": vec_json(&e.center),
                "shape": (0..e.dim()).map(|i| e.shape.row(i).iter().cloned().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "volume": e.volume(),
                "sandwich": to_json(&s),
            });
            let mut r = Report::new("john", config(cli, a, Some(spec)), results);
            r.bounds = json!({ "cover_factor": s.bound });
            r.witnesses = json!({ "cover_direction": s.witness });
            r.pass = s.contained && s.within_bound;
            let pic = if body.dim() == 2 {
                let mut pic = Picture::new(&body)?;
                let outline = hilbert_core::directions::circle(256)
                    .iter()
                    .map(|u| e.boundary_point(u))
                    .collect();
                pic.add(outline, "#2471a3");
                Some(pic)
            } else {
                None
            };
            write_svg(&cli.common.svg, pic)?;
            Ok(r)
        }
        Command::Theorem12(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let p = point(&body, &a.p, "p")?;
            let mut cfg = Theorem12Config::default_for(body.dim());
            if let Some(k) = a.boundary_directions {
                cfg.boundary_directions = k;
            }
            if let Some(k) = a.interior_points {
                cfg.interior_points = k;
            }
            if let Some(k) = a.step_directions {
                cfg.step_directions = k;
            }
            let rep = theorem12_report(&body, &p, &cfg)?;
            let mut r = Report::new("theorem12", config(cli, a, Some(spec)), to_json(&rep));
            r.bounds = to_json(&rep.bounds);
            r.witnesses = json!({
                "gap": { "q": rep.gap.q, "q0": rep.gap.q0 },
                "chord": {
                    "x": rep.survey.chord_witness_point,
                    "direction": rep.survey.chord_witness_direction,
                    "exit": rep.survey.chord_witness_exit,
                },
            });
            r.pass = rep.pass && rep.gap.d0 >= rep.bounds.gap - a.tol;
            Ok(r)
        }
        Command::Cylinder(a) => {
            let mut points = Vec::new();
            for q in &a.q.0 {
                if q.len() != 2 {
                    return Err(CliError::Input(format!(
                        "--q: expected 2 coordinates, got {}",
                        q.len()
                    )));
                }
                for &t in &a.tgrid.0 {
                    points.push(([q[0], q[1]], t));
                }
            }
            if points.is_empty() {
                return Err(CliError::Input("--tgrid is empty".into()));
            }
            let rep = cylinder_sandwich(&points, a.samples, seed)?;
            let slabs = [(1.0, 1.0), (1.0, 3.0)]
                .iter()
                .map(|&(l1, l2)| fact2_check(l1, l2, &[0.0, 0.1, 0.2]))
                .collect::<hilbert_core::Result<Vec<_>>>()?;
            let fact2_ok = slabs.iter().all(|f| f.max_defect < 1e-6);
            let window_ok = rep
                .rows
                .iter()
                .all(|r| r.ratio >= CYLINDER_C1 - a.tol && r.ratio <= CYLINDER_C2 + a.tol);
            let mut table = Table::new(&[
                "qx",
                "qy",
                "t",
                "alpha",
                "tub_volume",
                "tub_stderr",
                "section_volume",
                "ratio",
                "ratio_stderr",
                "ratio_without_alpha",
                "fact1_defect",
                "within",
            ]);
            for (row, f1) in rep.rows.iter().zip(&rep.fact1) {
                let within = row.ratio >= CYLINDER_C1 - a.tol && row.ratio <= CYLINDER_C2 + a.tol;
                table.push(vec![
                    json!(row.q[0]),
                    json!(row.q[1]),
                    json!(row.t),
                    json!(row.alpha),
                    json!(row.tub_volume),
                    json!(row.tub_stderr),
                    json!(row.section_volume),
                    json!(row.ratio),
                    json!(row.ratio_stderr),
                    json!(row.ratio_without_alpha),
                    json!(f1.defect),
                    json!(within),
                ]);
            }
            let mut r = Report::new(
                "cylinder",
                config(cli, a, None),
                json!({ "sandwich": to_json(&rep), "fact2": to_json(&slabs) }),
            );
            r.bounds = json!({
                "c1": CYLINDER_C1,
                "c2": CYLINDER_C2,
                "tol": a.tol,
                "fact1": 1e-9,
                "fact2": 1e-6,
                "spectral": cylinder_spectral_bound(),
            });
            r.pass = window_ok && rep.fact1_max_defect < 1e-9 && fact2_ok;
            r.table = Some(table);
            Ok(r)
        }
        Command::Rayleigh(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let c = point(&body, &a.center, "center")?;
            let cfg = QuotientConfig {
                samples: a.samples,
                seed,
                dual_resolution: a.dual_resolution,
            };
            let family = match a.family {
                FamilyArg::Tent => Family::Tent,
                FamilyArg::Exponential => Family::Exponential,
            };
            let m = minimize_rayleigh(&body, &c, family, &a.radii.0, &cfg)?;
            let trial = RadialTrial::new(c.clone(), m.best.profile)?;
            let sob = sobolev_quotient(&body, &trial, &cfg)?;
            let bound = if a.cylinder_bound {
                Some(cylinder_spectral_bound())
            } else {
                a.lower_bound
            };
            let mut r = Report::new(
                "rayleigh",
                config(cli, a, Some(spec)),
                json!({ "minimization": to_json(&m), "sobolev_at_best": to_json(&sob) }),
            );
            if let Some(b) = bound {
                r.bounds = json!({ "lower_bound": b });
                let bad: Vec<_> = m
                    .per_radius
                    .iter()
                    .filter(|t| t.quotient < b - 3.0 * t.stderr)
                    .collect();
                r.pass = bad.is_empty();
                r.witnesses = to_json(&bad);
            }
            let mut table = Table::new(&["profile", "radius", "s", "quotient", "stderr"]);
            for t in &m.per_radius {
                let (name, s) = match t.profile {
                    hilbert_core::spectrum::Profile::Tent { .. } => ("tent", Value::Null),
                    hilbert_core::spectrum::Profile::Exponential { s, .. } => {
                        ("exponential", json!(s))
                    }
                };
                table.push(vec![
                    json!(name),
                    json!(t.profile.radius()),
                    s,
                    json!(t.quotient),
                    json!(t.stderr),
                ]);
            }
            r.table = Some(table);
            Ok(r)
        }
        Command::Cheeger(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let c = point(&body, &a.center, "center")?;
            let e = cheeger_quotient(&body, &c, a.radius, a.eps, a.samples, seed)?;
            Ok(Report::new(
                "cheeger",
                config(cli, a, Some(spec)),
                to_json(&e),
            ))
        }
        Command::Converge(a) => {
            let (limit, spec) = load_body(&a.body.body)?;
            if !(a.a_scale > 0.0 && a.a_scale < 1.0) {
                return Err(CliError::Input("--a-scale must lie in (0, 1)".into()));
            }
            let c = limit.interior_point().clone();
            let n = limit.dim();
            let map = nalgebra::DMatrix::identity(n, n) * a.a_scale;
            let set = limit.affine_image(&map, &(&c * (1.0 - a.a_scale)))?;
            let grid = Grid::default_for(&set)?;
            let mut ks = Vec::with_capacity(a.ks.0.len());
            for &k in &a.ks.0 {
                if k < 1.0 || k.fract() != 0.0 {
                    return Err(CliError::Input(format!(
                        "--ks: `{k}` is not a positive integer"
                    )));
                }
                ks.push(k as usize);
            }
            let members = smoothing_sequence(&limit, &ks)?;
            let conv = density_convergence(&members, &limit, &grid)?;
            let mut table = Table::new(&[
                "k",
                "inf_norm_ratio",
                "sup_norm_ratio",
                "density_deviation",
                "min_density_ratio",
                "max_density_ratio",
                "envelope_lower",
                "within_envelope",
                "norm_monotone",
            ]);
            for (row, k) in conv.rows.iter().zip(&ks) {
                table.push(vec![
                    json!(k),
                    json!(row.inf_norm_ratio),
                    json!(row.sup_norm_ratio),
                    json!(row.density_deviation),
                    json!(row.min_density_ratio),
                    json!(row.max_density_ratio),
                    json!(row.envelope_lower),
                    json!(row.within_envelope),
                    json!(row.norm_monotone),
                ]);
            }
            let mut r = Report::new("converge", config(cli, a, Some(spec)), to_json(&conv));
            let dev_ok = a.max_deviation.is_none_or(|m| conv.final_deviation <= m);
            r.bounds = json!({ "max_deviation": a.max_deviation, "ratio_upper": 1.0 });
            r.pass = conv.norm_monotone && conv.within_envelope && dev_ok;
            r.table = Some(table);
            Ok(r)
        }
        Command::Delta(a) => {
            let (body, spec) = load_body(&a.body.body)?;
            let c = point(&body, &a.center, "center")?;
            let est = delta_probe(&body, &c, &a.scales.0, a.quadruples, seed)?;
            let mut table = Table::new(&["scale", "quadruples", "max_defect"]);
            for e in &est {
                table.push(vec![
                    json!(e.scale),
                    json!(e.quadruples),
                    json!(e.max_defect),
                ]);
            }
            let mut r = Report::new(
                "delta",
                config(cli, a, Some(spec)),
                json!({ "estimates": to_json(&est), "label": "lower-bound evidence" }),
            );
            r.witnesses = json!(est.iter().map(|e| e.witness.clone()).collect::<Vec<_>>());
            r.table = Some(table);
            Ok(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_parse() {
        assert_eq!(parse_grid("-1:1:3").unwrap().0, vec![-1.0, 0.0, 1.0]);
        assert!(parse_grid("0:1").is_err());
        assert_eq!(
            parse_points("0,0;0.7,0").unwrap().0,
            vec![vec![0.0, 0.0], vec![0.7, 0.0]]
        );
        assert!(parse_list("1,x").is_err());
    }
}
