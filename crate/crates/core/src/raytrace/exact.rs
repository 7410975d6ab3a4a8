//! Exact piecewise-straight ray tracer.
//!
//! Every film (entry face, hypotenuse, exit face of each prism) refracts the
//! ray with the exact magnetic Snell law. The engine is generic over the scalar
//! so phase differences can be accumulated in double-double.

use crate::beamline::{BeamlineConfig, DetectorOrientation, Geometry, NeutronState, PrismPairSpec};
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::raytrace::closed::{focal_locus_slope, Focus};
use crate::real::{DoubleDouble, Real};
use crate::refraction::{refract_velocity, Spin};

type V3<R> = [R; 3];

fn lit3<R: Real>(v: [f64; 3]) -> V3<R> {
    [R::lit(v[0]), R::lit(v[1]), R::lit(v[2])]
}

fn dot<R: Real>(a: V3<R>, b: V3<R>) -> R {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn axpy<R: Real>(a: V3<R>, t: R, b: V3<R>) -> V3<R> {
    [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]]
}

fn norm<R: Real>(a: V3<R>) -> R {
    dot(a, a).sqrt()
}

fn lossy3<R: Real>(a: V3<R>) -> [f64; 3] {
    [a[0].to_f64_lossy(), a[1].to_f64_lossy(), a[2].to_f64_lossy()]
}

/// Field region a segment runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Free,
    /// `half` is 0 upstream of the hypotenuse and 1 downstream.
    Prism { pair: usize, prism: u8, half: u8 },
}

/// One straight piece of a spin path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySegment {
    pub region: Region,
    pub spin: Spin,
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub velocity: [f64; 3],
    /// Signed field along the owning pair's axis, tesla.
    pub field: f64,
}

impl RaySegment {
    pub fn speed(&self) -> f64 {
        let v = self.velocity;
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    pub fn length(&self) -> f64 {
        let d = [self.end[0] - self.start[0], self.end[1] - self.start[1], self.end[2] - self.start[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// Angle with the beam axis, measured towards `axis`.
    pub fn angle(&self, axis: [f64; 3]) -> f64 {
        let v = self.velocity;
        (v[0] * axis[0] + v[1] * axis[1] + v[2] * axis[2]).atan2(v[2])
    }
}

/// Everything accumulated along one spin's path.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinTrace {
    pub spin: Spin,
    pub segments: Vec<RaySegment>,
    /// Hypotenuse crossing points, two per pair.
    pub crossings: Vec<[f64; 3]>,
    pub exit_position: [f64; 3],
    pub exit_velocity: [f64; 3],
    pub end: [f64; 3],
    /// Time from the entry face to the end point, s.
    pub time: f64,
    pub larmor_phase: f64,
    pub kinetic_phase: f64,
    /// Action integral `int p . dl / hbar` including the incoming plane wave.
    pub eikonal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub up: SpinTrace,
    pub down: SpinTrace,
    /// Intersection of the two outgoing rays; single pairs only.
    pub focus: Option<Focus>,
    /// Time from the entry face to the focus for each spin.
    pub focus_times: Option<(f64, f64)>,
}

impl TraceResult {
    pub fn get(&self, spin: Spin) -> &SpinTrace {
        match spin {
            Spin::Up => &self.up,
            Spin::Down => &self.down,
        }
    }
}

#[derive(Clone, Copy)]
enum Check<R> {
    Face { pair: usize },
    Hypotenuse { z_lo: R, z_hi: R },
}

#[derive(Clone, Copy)]
struct Step<R> {
    normal: V3<R>,
    offset: R,
    surface: &'static str,
    check: Check<R>,
    field_after: R,
    region_after: Region,
}

fn pair_steps<R: Real>(p: &PrismPairSpec, index: usize) -> Vec<Step<R>> {
    let pos = R::lit(p.position);
    let half = R::lit(p.edge) / R::lit(2.0);
    let sep = R::lit(p.separation());
    let e = lit3::<R>(p.phase_axis());
    let inv = R::one().quot(R::lit(2.0).sqrt());
    let zhat = [R::zero(), R::zero(), R::one()];
    let (b1, b2) = (R::lit(p.b1), R::lit(p.b2));
    // Hypotenuse 1: s - (z - pos) = 0.
    let h1 = [e[0] * inv, e[1] * inv, -inv];
    let (h2, h2_off, a2, b2_after) = match p.geometry {
        Geometry::Parallelogram => (h1, -(pos + sep) * inv, b2, -b2),
        Geometry::Triangular => ([e[0] * inv, e[1] * inv, inv], (pos + sep) * inv, -b2, b2),
    };
    let region = |prism, half| Region::Prism { pair: index, prism, half };
    let face = |z: R, surface, field_after, region_after| Step {
        normal: zhat,
        offset: z,
        surface,
        check: Check::Face { pair: index },
        field_after,
        region_after,
    };
    vec![
        face(pos - half, "entry face of prism 1", -b1, region(1, 0)),
        Step {
            normal: h1,
            offset: -pos * inv,
            surface: "hypotenuse of prism 1",
            check: Check::Hypotenuse { z_lo: pos - half, z_hi: pos + half },
            field_after: b1,
            region_after: region(1, 1),
        },
        face(pos + half, "exit face of prism 1", R::zero(), Region::Free),
        face(pos + sep - half, "entry face of prism 2", a2, region(2, 0)),
        Step {
            normal: h2,
            offset: h2_off,
            surface: "hypotenuse of prism 2",
            check: Check::Hypotenuse { z_lo: pos + sep - half, z_hi: pos + sep + half },
            field_after: b2_after,
            region_after: region(2, 1),
        },
        face(pos + sep + half, "exit face of prism 2", R::zero(), Region::Free),
    ]
}

/// Plane `normal . r = offset` where a trace stops.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Plane<R> {
    pub normal: V3<R>,
    pub offset: R,
}

impl<R: Real> Plane<R> {
    pub fn transverse(z: R) -> Self {
        Plane { normal: [R::zero(), R::zero(), R::one()], offset: z }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RawSegment<R> {
    pub region: Region,
    pub start: V3<R>,
    pub end: V3<R>,
    pub velocity: V3<R>,
    pub field: R,
}

#[derive(Clone, Debug)]
pub(crate) struct RawPath<R> {
    pub segments: Vec<RawSegment<R>>,
    pub crossings: Vec<V3<R>>,
    pub exit_position: V3<R>,
    pub exit_velocity: V3<R>,
    pub end: V3<R>,
    pub exit_time: R,
    pub time: R,
    pub larmor: R,
    pub kinetic: R,
    pub eikonal: R,
}

/// Launch parameters shared by both spins.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Launch<R> {
    pub speed: R,
    /// Position on the first entry face.
    pub entry: V3<R>,
    /// Unit direction of the incoming plane wave.
    pub direction: V3<R>,
}

impl<R: Real> Launch<R> {
    /// Entry point `x0 n + y0 e` on the first pair's entry face, incoming angle `divergence` towards `e`.
    pub fn new(first: &PrismPairSpec, speed: R, x0: R, y0: R, divergence: R) -> Self {
        let n = lit3::<R>(first.field_axis);
        let e = lit3::<R>(first.phase_axis());
        let z = R::lit(first.position) - R::lit(first.edge) / R::lit(2.0);
        let entry = [x0 * n[0] + y0 * e[0], x0 * n[1] + y0 * e[1], z];
        let (s, c) = divergence.sin_cos_acc();
        Launch {
            speed,
            entry,
            direction: [s * e[0], s * e[1], c],
        }
    }
}

fn aperture_check<R: Real>(pairs: &[PrismPairSpec], step: &Step<R>, at: V3<R>) -> Result<()> {
    match step.check {
        Check::Face { pair } => {
            let p = &pairs[pair];
            let half = R::lit(p.edge) / R::lit(2.0);
            for axis in [p.phase_axis(), p.field_axis] {
                let t = dot(lit3::<R>(axis), at);
                if !(t.abs() < half) {
                    return Err(Error::MissedAperture { surface: step.surface, position: t.to_f64_lossy() });
                }
            }
        }
        Check::Hypotenuse { z_lo, z_hi } => {
            if !(at[2] > z_lo && at[2] < z_hi) {
                return Err(Error::MissedAperture { surface: step.surface, position: at[2].to_f64_lossy() });
            }
        }
    }
    Ok(())
}

/// Trace one spin through every pair and optionally on to `end`.
pub(crate) fn trace_path<R: Real>(
    pairs: &[PrismPairSpec],
    c: &Constants,
    spin: Spin,
    launch: &Launch<R>,
    end: Option<Plane<R>>,
) -> Result<RawPath<R>> {
    let mass = R::lit(c.neutron_mass);
    let hbar = R::lit(c.hbar);
    let moment = R::lit(spin.moment(c));
    let v0 = launch.speed;
    let speed_in = |field: R| -> Result<R> {
        let r = v0 * v0 + (R::lit(2.0) * moment * field).quot(mass);
        if !(r > R::zero()) {
            return Err(Error::ClassicallyForbidden { radicand: r.to_f64_lossy() });
        }
        Ok(r.sqrt())
    };

    let mut pos = launch.entry;
    let mut vel = [launch.direction[0] * v0, launch.direction[1] * v0, launch.direction[2] * v0];
    let mut field = R::zero();
    let mut region = Region::Free;
    let mut out = RawPath {
        segments: Vec::new(),
        crossings: Vec::new(),
        exit_position: pos,
        exit_velocity: vel,
        end: pos,
        exit_time: R::zero(),
        time: R::zero(),
        larmor: R::zero(),
        kinetic: R::zero(),
        eikonal: (mass * v0 * dot(launch.direction, launch.entry)).quot(hbar),
    };

    let advance = |out: &mut RawPath<R>, pos: &mut V3<R>, vel: V3<R>, t: R, field: R, region: Region| {
        if t > R::zero() {
            let next = axpy(*pos, t, vel);
            let u = norm(vel);
            let length = u * t;
            out.time = out.time + t;
            out.kinetic = out.kinetic + (mass * u * length).quot(R::lit(2.0) * hbar);
            out.larmor = out.larmor + (moment * field * t).quot(hbar);
            out.eikonal = out.eikonal + (mass * u * length).quot(hbar);
            out.segments.push(RawSegment { region, start: *pos, end: next, velocity: vel, field });
            *pos = next;
        }
    };

    for (index, pair) in pairs.iter().enumerate() {
        for step in pair_steps::<R>(pair, index) {
            let rate = dot(step.normal, vel);
            let gap = step.offset - dot(step.normal, pos);
            let t = if gap == R::zero() { R::zero() } else { gap.quot(rate) };
            if !(t >= R::zero()) || !t.is_finite() {
                return Err(Error::MissedAperture { surface: step.surface, position: pos[2].to_f64_lossy() });
            }
            advance(&mut out, &mut pos, vel, t, field, region);
            aperture_check(pairs, &step, pos)?;
            if let Check::Hypotenuse { .. } = step.check {
                out.crossings.push(pos);
            }
            let v_out = speed_in(step.field_after)?;
            vel = refract_velocity(vel, step.normal, v_out)?;
            field = step.field_after;
            region = step.region_after;
        }
    }
    out.exit_position = pos;
    out.exit_velocity = vel;
    out.exit_time = out.time;
    if let Some(plane) = end {
        let t = (plane.offset - dot(plane.normal, pos)).quot(dot(plane.normal, vel));
        if !(t >= R::zero()) || !t.is_finite() {
            return Err(Error::invalid("detector", "end plane is not downstream of the last prism"));
        }
        advance(&mut out, &mut pos, vel, t, field, region);
    }
    out.end = pos;
    Ok(out)
}

/// Intersection of two rays projected on the plane spanned by `axis` and the beam.
pub(crate) fn ray_intersection<R: Real>(p1: V3<R>, v1: V3<R>, p2: V3<R>, v2: V3<R>, axis: V3<R>) -> Result<(R, R, V3<R>)> {
    let s = |v: V3<R>| dot(v, axis);
    // p1 + t1 v1 = p2 + t2 v2 in (s, z).
    let det = s(v1) * (-v2[2]) + s(v2) * v1[2];
    if det == R::zero() {
        return Err(Error::DegenerateFocusing);
    }
    let ds = s(p2) - s(p1);
    let dz = p2[2] - p1[2];
    let t1 = (ds * (-v2[2]) + s(v2) * dz).quot(det);
    let t2 = (s(v1) * dz - v1[2] * ds).quot(det);
    let a = axpy(p1, t1, v1);
    let b = axpy(p2, t2, v2);
    let half = R::lit(0.5);
    Ok((t1, t2, [(a[0] + b[0]) * half, (a[1] + b[1]) * half, (a[2] + b[2]) * half]))
}

/// Detector plane for the configuration; the tilted plane follows the first pair's focusing locus.
pub(crate) fn detector_plane<R: Real>(config: &BeamlineConfig) -> Result<Plane<R>> {
    match config.orientation {
        DetectorOrientation::Vertical => Ok(Plane::transverse(R::lit(config.detector_z))),
        DetectorOrientation::FocusingPlane { offset } => {
            let p = &config.pairs[0];
            let slope = R::lit(focal_locus_slope(p)?);
            let e = lit3::<R>(p.phase_axis());
            let raw = [-slope * e[0], -slope * e[1], R::one()];
            let n = norm(raw);
            let z0 = R::lit(p.position) + R::lit(p.focal_distance()?) + R::lit(offset);
            Ok(Plane { normal: [raw[0].quot(n), raw[1].quot(n), raw[2].quot(n)], offset: z0.quot(n) })
        }
    }
}

fn finish<R: Real>(spin: Spin, raw: &RawPath<R>) -> SpinTrace {
    SpinTrace {
        spin,
        segments: raw
            .segments
            .iter()
            .map(|s| RaySegment {
                region: s.region,
                spin,
                start: lossy3(s.start),
                end: lossy3(s.end),
                velocity: lossy3(s.velocity),
                field: s.field.to_f64_lossy(),
            })
            .collect(),
        crossings: raw.crossings.iter().map(|&p| lossy3(p)).collect(),
        exit_position: lossy3(raw.exit_position),
        exit_velocity: lossy3(raw.exit_velocity),
        end: lossy3(raw.end),
        time: raw.time.to_f64_lossy(),
        larmor_phase: raw.larmor.to_f64_lossy(),
        kinetic_phase: raw.kinetic.to_f64_lossy(),
        eikonal: raw.eikonal.to_f64_lossy(),
    }
}

fn launch_for<R: Real>(config: &BeamlineConfig, state: &NeutronState) -> Launch<R> {
    let c = &config.constants;
    let speed = R::lit(c.planck).quot(R::lit(c.neutron_mass) * R::lit(state.wavelength));
    Launch::new(&config.pairs[0], speed, R::lit(state.x0), R::lit(state.y0), R::lit(state.divergence))
}

/// Trace both spin states of one neutron to the detector in double-double precision.
pub fn trace_exact(config: &BeamlineConfig, state: &NeutronState) -> Result<TraceResult> {
    config.validate()?;
    state.validate(&config.constants)?;
    type D = DoubleDouble;
    let c = &config.constants;
    let launch = launch_for::<D>(config, state);
    let plane = detector_plane::<D>(config)?;
    let up = trace_path(&config.pairs, c, Spin::Up, &launch, Some(plane))?;
    let down = trace_path(&config.pairs, c, Spin::Down, &launch, Some(plane))?;
    let (focus, focus_times) = if config.pairs.len() == 1 {
        match ray_intersection(
            up.exit_position,
            up.exit_velocity,
            down.exit_position,
            down.exit_velocity,
            lit3::<D>(config.pairs[0].phase_axis()),
        ) {
            Ok((t1, t2, p)) => {
                let e = config.pairs[0].phase_axis();
                let p = lossy3(p);
                let focus = Focus {
                    x: p[0] * config.pairs[0].field_axis[0] + p[1] * config.pairs[0].field_axis[1],
                    y: p[0] * e[0] + p[1] * e[1],
                    z: p[2] - config.pairs[0].position,
                };
                let t_up = up.exit_time + t1;
                let t_down = down.exit_time + t2;
                (Some(focus), Some((t_up.to_f64_lossy(), t_down.to_f64_lossy())))
            }
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(TraceResult {
        up: finish(Spin::Up, &up),
        down: finish(Spin::Down, &down),
        focus,
        focus_times,
    })
}

/// Focus of a single pair from the exact trace, in the pair's local frame.
pub fn exact_focus(spec: &PrismPairSpec, state: &NeutronState, c: &Constants) -> Result<Focus> {
    let config = BeamlineConfig {
        pairs: vec![spec.at(0.0)],
        detector_z: 1e3,
        orientation: DetectorOrientation::Vertical,
        constants: *c,
    };
    let r = trace_exact(&config, state)?;
    r.focus.ok_or(Error::DegenerateFocusing)
}

/// Path of `spin` entering with `divergence` that lands on transverse position
/// `target` of the plane `z = plane_z`. Solved by secant iteration on the entry height.
#[allow(clippy::too_many_arguments)]
pub(crate) fn path_to_target<R: Real>(
    pairs: &[PrismPairSpec],
    c: &Constants,
    spin: Spin,
    speed: R,
    x0: R,
    divergence: R,
    target: R,
    plane_z: R,
) -> Result<RawPath<R>> {
    let first = &pairs[0];
    let e = lit3::<R>(first.phase_axis());
    let plane = Plane::transverse(plane_z);
    let shoot = |y0: R| -> Result<(R, RawPath<R>)> {
        let launch = Launch::new(first, speed, x0, y0, divergence);
        let path = trace_path(pairs, c, spin, &launch, Some(plane))?;
        Ok((dot(e, path.end) - target, path))
    };
    let z_entry = R::lit(first.position) - R::lit(first.edge) / R::lit(2.0);
    let (s, co) = divergence.sin_cos_acc();
    let mut y_a = target - s.quot(co) * (plane_z - z_entry);
    let mut y_b = y_a + R::lit(1e-7);
    let (mut f_a, _) = shoot(y_a)?;
    let (mut f_b, mut best) = shoot(y_b)?;
    let tol = R::lit(1e-29);
    for _ in 0..60 {
        if f_b.abs() < tol || f_b == f_a {
            break;
        }
        let y_c = y_b - (f_b * (y_b - y_a)).quot(f_b - f_a);
        let (f_c, p) = shoot(y_c)?;
        y_a = y_b;
        f_a = f_b;
        y_b = y_c;
        f_b = f_c;
        best = p;
    }
    Ok(best)
}
