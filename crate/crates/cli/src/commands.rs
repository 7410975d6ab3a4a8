use crate::config::{Checkerboard, CheckerboardField, RunConfig, TextureSettings};
use crate::error::{CliError, Result};
use crate::output::{Column, Emitter, PlotStyle, Table};
use semsans_core::interferometry::{
    exact_phase, fringe_visibility, larmor_phase_first_order, phase_second_order, uniform_divergence, Screen,
};
use semsans_core::raytrace::{arrival_times, exact_focus, focal_locus_slope, focus_closed_form, trace_exact, Region};
use semsans_core::refraction::{deflection_first_order, refract_exact};
use semsans_core::textures::{
    checkerboard_fields_with_cap, oam_density, solve_checkerboard_fields, spin_texture, FieldGrid, GridSpec, KappaSpec,
};
use semsans_core::{Geometry, Spin};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Half-width of the texture window when a gradient vanishes and no extent is set, m.
pub const FALLBACK_EXTENT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Refract,
    Trace,
    Focus,
    Phase,
    Fringe,
    SolveFields,
    Texture,
    Oam,
    Validate,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Refract,
        Command::Trace,
        Command::Focus,
        Command::Phase,
        Command::Fringe,
        Command::SolveFields,
        Command::Texture,
        Command::Oam,
        Command::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Refract => "refract",
            Command::Trace => "trace",
            Command::Focus => "focus",
            Command::Phase => "phase",
            Command::Fringe => "fringe",
            Command::SolveFields => "solve-fields",
            Command::Texture => "texture",
            Command::Oam => "oam",
            Command::Validate => "validate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub config_sha256: String,
    pub seed: u64,
}

/// Files written plus the `key=value` summary printed on stdout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: BTreeMap<String, String>,
}

impl Report {
    pub fn lines(&self) -> Vec<String> {
        self.summary.iter().map(|(k, v)| format!("{k}={v}")).collect()
    }
}

fn sci(v: f64) -> String {
    format!("{v:.9e}")
}

pub fn run_command(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Report> {
    let emitter = Emitter {
        out_dir: opts.out_dir.clone(),
        command: cmd.name().to_string(),
        config_sha256: opts.config_sha256.clone(),
        seed: (cmd == Command::Validate).then_some(opts.seed),
    };
    let (stem, table, style, summary) = match cmd {
        Command::Refract => refract(cfg)?,
        Command::Trace => trace(cfg)?,
        Command::Focus => focus(cfg)?,
        Command::Phase => phase(cfg)?,
        Command::Fringe => fringe(cfg)?,
        Command::SolveFields => solve_fields(cfg)?,
        Command::Texture => texture(cfg, false)?,
        Command::Oam => texture(cfg, true)?,
        Command::Validate => {
            let outcome = crate::suite::run(cfg, opts.seed);
            let (table, summary) = outcome.report();
            let path = emitter.emit("validate", table, PlotStyle::Lines, &summary)?;
            let failed = outcome.failures();
            if failed > 0 {
                for line in summary.iter().filter(|(_, v)| v.starts_with("FAIL")) {
                    eprintln!("{}={}", line.0, line.1);
                }
                return Err(CliError::Invariants(failed));
            }
            return Ok(Report { files: vec![path], summary });
        }
    };
    let path = emitter.emit(stem, table, style, &summary)?;
    Ok(Report { files: vec![path], summary })
}

type Output = (&'static str, Table, PlotStyle, BTreeMap<String, String>);

fn refract(cfg: &RunConfig) -> Result<Output> {
    let c = &cfg.constants;
    let jump = match (cfg.refract.field_jump, cfg.pairs.first()) {
        (Some(j), _) => j,
        (None, Some(p)) => 2.0 * p.b1,
        (None, None) => return Err(CliError::Validation("[refract] needs `field_jump` or a [pair] section".into())),
    };
    let v = cfg.neutron.speed;
    let mut table = Table::new(vec![
        Column::new("theta_in", "rad"),
        Column::new("theta_out_up", "rad"),
        Column::new("theta_out_down", "rad"),
        Column::new("deflection_up", "rad"),
        Column::new("deflection_down", "rad"),
        Column::new("deflection_first_order_up", "rad"),
        Column::new("speed_up", "m/s"),
        Column::new("speed_down", "m/s"),
    ]);
    let n = cfg.refract.samples;
    let mut blocked = 0;
    for i in 0..n {
        let theta = -cfg.refract.theta_max + 2.0 * cfg.refract.theta_max * i as f64 / (n - 1) as f64;
        let mut row = vec![theta];
        let out: Vec<_> = Spin::BOTH.iter().map(|s| refract_exact(theta, v, s.moment(c), jump, c)).collect();
        for r in &out {
            row.push(r.as_ref().map_or(f64::NAN, |r| r.theta_out));
        }
        for r in &out {
            row.push(r.as_ref().map_or(f64::NAN, |r| r.deflection(theta)));
        }
        row.push(deflection_first_order(theta, v, Spin::Up.moment(c), jump, c));
        for r in &out {
            row.push(r.as_ref().map_or(f64::NAN, |r| r.speed_out));
        }
        blocked += out.iter().filter(|r| r.is_err()).count();
        table.push(row);
    }
    let mut s = BTreeMap::new();
    s.insert("field_jump_T".into(), sci(jump));
    s.insert("speed_m_per_s".into(), sci(v));
    s.insert("blocked_samples".into(), blocked.to_string());
    Ok(("refract", table, PlotStyle::Lines, s))
}

fn trace(cfg: &RunConfig) -> Result<Output> {
    let beamline = cfg.beamline()?;
    let r = trace_exact(&beamline, &cfg.neutron)?;
    let mut table = Table::new(vec![
        Column::new("spin", "1"),
        Column::new("pair", "1"),
        Column::new("prism", "1"),
        Column::new("half", "1"),
        Column::new("x_start", "m"),
        Column::new("y_start", "m"),
        Column::new("z_start", "m"),
        Column::new("x_end", "m"),
        Column::new("y_end", "m"),
        Column::new("z_end", "m"),
        Column::new("vx", "m/s"),
        Column::new("vy", "m/s"),
        Column::new("vz", "m/s"),
        Column::new("field", "T"),
    ]);
    for t in [&r.up, &r.down] {
        for seg in &t.segments {
            let (pair, prism, half) = match seg.region {
                Region::Free => (-1.0, 0.0, -1.0),
                Region::Prism { pair, prism, half } => (pair as f64, prism as f64, half as f64),
            };
            let mut row = vec![seg.spin.sign(), pair, prism, half];
            row.extend(seg.start);
            row.extend(seg.end);
            row.extend(seg.velocity);
            row.push(seg.field);
            table.push(row);
        }
    }
    let mut s = BTreeMap::new();
    s.insert("time_up_s".into(), sci(r.up.time));
    s.insert("time_down_s".into(), sci(r.down.time));
    s.insert("larmor_phase_up_rad".into(), sci(r.up.larmor_phase));
    s.insert("larmor_phase_down_rad".into(), sci(r.down.larmor_phase));
    s.insert("eikonal_difference_rad".into(), sci(r.up.eikonal - r.down.eikonal));
    if let Some(f) = r.focus {
        s.insert("focus_y_m".into(), sci(f.y));
        s.insert("focus_z_m".into(), sci(f.z));
    }
    Ok(("trace", table, PlotStyle::Lines, s))
}

fn focus(cfg: &RunConfig) -> Result<Output> {
    let spec = *cfg.first_pair()?;
    let c = &cfg.constants;
    let local = spec.at(0.0);
    let mut table = Table::new(vec![
        Column::new("y0", "m"),
        Column::new("z_closed", "m"),
        Column::new("y_closed", "m"),
        Column::new("z_exact", "m"),
        Column::new("y_exact", "m"),
        Column::new("t_up", "s"),
        Column::new("t_down", "s"),
    ]);
    let n = cfg.focus_samples;
    let span = 0.45 * spec.edge;
    for i in 0..n {
        let y0 = -span + 2.0 * span * i as f64 / (n - 1) as f64;
        let state = cfg.neutron.with_entry(cfg.neutron.x0, y0);
        let closed = focus_closed_form(&local, &state, c)?;
        let exact = exact_focus(&local, &state, c);
        let times = arrival_times(&local, &state, c)?;
        let (ze, ye) = exact.map_or((f64::NAN, f64::NAN), |f| (f.z, f.y));
        table.push(vec![y0, closed.z, closed.y, ze, ye, times.up, times.down]);
    }
    let z = cfg.detector_z()? - spec.position;
    let mut s = BTreeMap::new();
    s.insert("focal_distance_m".into(), sci(spec.focal_distance()?));
    s.insert("focal_locus_slope".into(), sci(focal_locus_slope(&spec)?));
    s.insert("detector_z_local_m".into(), sci(z));
    s.insert("focusing_residual_T_m".into(), sci(spec.focusing_mismatch(z)));
    Ok(("focus", table, PlotStyle::Lines, s))
}

fn phase(cfg: &RunConfig) -> Result<Output> {
    let spec = *cfg.first_pair()?;
    let c = &cfg.constants;
    let local = spec.at(0.0);
    let z = cfg.detector_z()? - spec.position;
    let phi = cfg.neutron.divergence;
    let (lo, hi) = cfg.phase.y_range.unwrap_or((-spec.edge / 4.0, spec.edge / 4.0));
    let mut table = Table::new(vec![
        Column::new("y", "m"),
        Column::new("phi1", "rad"),
        Column::new("phi2", "rad"),
        Column::new("phi1_plus_phi2", "rad"),
        Column::new("phi_exact", "rad"),
    ]);
    let n = cfg.phase.samples;
    let mut missed = 0;
    for i in 0..n {
        let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let p1 = larmor_phase_first_order(&local, y, z, phi, &cfg.neutron, c);
        let p2 = phase_second_order(&local, y, z, phi, &cfg.neutron, c);
        let exact = match exact_phase(&local, y, z, phi, &cfg.neutron, c) {
            Ok(e) => e.relative,
            Err(e) if e.is_validation() => return Err(e.into()),
            Err(_) => {
                missed += 1;
                f64::NAN
            }
        };
        table.push(vec![y, p1, p2, p1 + p2, exact]);
    }
    let mut s = BTreeMap::new();
    s.insert("detector_z_local_m".into(), sci(z));
    s.insert("divergence_rad".into(), sci(phi));
    s.insert("unreachable_samples".into(), missed.to_string());
    Ok(("phase", table, PlotStyle::Lines, s))
}

fn fringe(cfg: &RunConfig) -> Result<Output> {
    let spec = *cfg.first_pair()?;
    let local = spec.at(0.0);
    let screen = Screen::from_orientation(cfg.orientation, &spec, cfg.detector_z()?);
    let dist = uniform_divergence(cfg.fringe.half_width, cfg.fringe.samples);
    let f = fringe_visibility(&local, screen, &dist, &cfg.neutron, &cfg.constants)?;
    let mut table = Table::new(vec![Column::new("y", "m"), Column::new("intensity", "1")]);
    for (y, i) in &f.profile {
        table.push(vec![*y, *i]);
    }
    let mut s = BTreeMap::new();
    s.insert("visibility".into(), format!("{:.6}", f.visibility));
    s.insert("period_m".into(), sci(f.period));
    s.insert("i_max".into(), sci(f.i_max));
    s.insert("i_min".into(), sci(f.i_min));
    Ok(("fringe", table, PlotStyle::Lines, s))
}

/// All four checkerboard fields `B1..B4`, tesla.
pub fn checkerboard_fields(board: &Checkerboard) -> Result<[f64; 4]> {
    Ok(match board.field {
        CheckerboardField::Cap(b_max) => checkerboard_fields_with_cap(b_max, board.distances)?,
        CheckerboardField::First(b1) => {
            let [b2, b3, b4] = solve_checkerboard_fields(b1, board.distances)?;
            [b1, b2, b3, b4]
        }
    })
}

fn solve_fields(cfg: &RunConfig) -> Result<Output> {
    let board = cfg
        .checkerboard
        .as_ref()
        .ok_or_else(|| CliError::Validation("solve-fields needs a [checkerboard] section".into()))?;
    let fields = checkerboard_fields(board)?;
    let mut table = Table::new(vec![Column::new("prism", "1"), Column::new("distance", "m"), Column::new("field", "T")]);
    for (k, (l, b)) in board.distances.iter().zip(fields).enumerate() {
        table.push(vec![(k + 1) as f64, *l, b]);
    }
    let l = board.distances;
    let mut s = BTreeMap::new();
    for (k, b) in fields.iter().enumerate() {
        s.insert(format!("B{}_T", k + 1), sci(*b));
    }
    s.insert("focus_residual_x_T_m".into(), sci(fields[0] * l[0] - fields[1] * l[1]));
    s.insert("focus_residual_y_T_m".into(), sci(fields[2] * l[2] - fields[3] * l[3]));
    s.insert("gradient_mismatch_T".into(), sci((fields[0] - fields[1]).abs() - (fields[2] - fields[3]).abs()));
    Ok(("solve-fields", table, PlotStyle::Lines, s))
}

/// Transverse gradients for the texture commands.
///
/// A `[checkerboard]` section wins; otherwise the first pair sets `kappa_y` and
/// the second pair, if any, sets `kappa_x`.
pub fn kappa_for(cfg: &RunConfig) -> Result<KappaSpec> {
    let (fields, geometry) = match (&cfg.checkerboard, cfg.pairs.as_slice()) {
        (Some(board), _) => (checkerboard_fields(board)?, Geometry::Parallelogram),
        (None, [p]) => ([p.b1, p.b2, 0.0, 0.0], p.geometry),
        (None, [p, q, ..]) => ([p.b1, p.b2, q.b1, q.b2], p.geometry),
        (None, []) => return Err(CliError::Validation("texture commands need [checkerboard] or [pair] sections".into())),
    };
    Ok(KappaSpec::from_fields(fields, geometry, cfg.neutron.divergence, cfg.neutron.speed, &cfg.constants))
}

pub fn texture_grid(kappa: &KappaSpec, t: &TextureSettings) -> GridSpec {
    let half = |k: f64| match t.extent {
        Some(e) => e,
        None if k > 0.0 => t.cells as f64 * PI / k,
        None => FALLBACK_EXTENT,
    };
    let (hx, hy) = (half(kappa.kappa_x), half(kappa.kappa_y));
    GridSpec { nx: t.grid, ny: t.grid, x_range: (-hx, hx), y_range: (-hy, hy) }
}

fn texture(cfg: &RunConfig, with_oam: bool) -> Result<Output> {
    let kappa = kappa_for(cfg)?;
    let grid = texture_grid(&kappa, &cfg.texture);
    let (theta, phi) = (cfg.neutron.theta_in, cfg.neutron.phi_in);
    let map: FieldGrid = if with_oam {
        let k0z = 2.0 * PI / cfg.neutron.wavelength;
        oam_density(&kappa, k0z, theta, phi, &grid, cfg.texture.subtract_carrier)?
    } else {
        spin_texture(&kappa, theta, phi, &grid)?
    };
    let mut columns = vec![
        Column::new("x", "m"),
        Column::new("y", "m"),
        Column::new("sx", "1"),
        Column::new("sy", "1"),
        Column::new("sz", "1"),
        Column::new("azimuth", "rad"),
    ];
    if with_oam {
        columns.extend([Column::new("lx", "hbar"), Column::new("ly", "hbar"), Column::new("lz", "hbar")]);
    }
    let mut table = Table::new(columns);
    for k in 0..map.len() {
        let (x, y) = map.point(k);
        let b = map.bloch[k];
        let mut row = vec![x, y, b[0], b[1], b[2], map.phase[k]];
        if let Some(l) = &map.oam {
            row.extend(l[k]);
        }
        table.push(row);
    }
    let mut s = BTreeMap::new();
    s.insert("kappa_x_per_m".into(), sci(kappa.kappa_x));
    s.insert("kappa_y_per_m".into(), sci(kappa.kappa_y));
    s.insert("grid".into(), format!("{}x{}", grid.nx, grid.ny));
    if with_oam {
        s.insert("carrier_subtracted".into(), cfg.texture.subtract_carrier.to_string());
    }
    Ok((if with_oam { "oam" } else { "texture" }, table, PlotStyle::Map, s))
}
