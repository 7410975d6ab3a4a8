//! Sectioned `key = value` run configuration.
//!
//! ```text
//! [neutron]
//! wavelength = 1 nm
//!
//! [pair]
//! b1 = 103.85 mT
//! b2 = 150 mT
//! ```
//!
//! Every physical value needs a unit suffix. `[pair]` may repeat; other
//! sections appear at most once. Keys are case-insensitive and `#` starts a
//! comment.

use crate::error::{CliError, Result};
use semsans_core::units::{self, Dimension};
use semsans_core::{BeamlineConfig, Constants, DetectorOrientation, Geometry, NeutronState, PrismPairSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Checkerboard {
    /// Prism-centre to detector distances `L1 > L2 > L3 > L4`.
    pub distances: [f64; 4],
    pub field: CheckerboardField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckerboardField {
    /// Largest field in any prism.
    Cap(f64),
    /// Field of the first prism.
    First(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefractSweep {
    pub theta_max: f64,
    pub samples: usize,
    /// Field discontinuity; defaults to the first pair's hypotenuse jump `2 B1`.
    pub field_jump: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSweep {
    pub y_range: Option<(f64, f64)>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeSettings {
    pub half_width: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextureSettings {
    pub grid: usize,
    pub cells: usize,
    /// Half-width of the sampled square; defaults to `cells` unit cells.
    pub extent: Option<f64>,
    pub subtract_carrier: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub constants: Constants,
    pub neutron: NeutronState,
    pub pairs: Vec<PrismPairSpec>,
    /// Beamline `z` of the detector; defaults to the first pair's focal plane.
    pub detector_z: Option<f64>,
    pub orientation: DetectorOrientation,
    pub checkerboard: Option<Checkerboard>,
    pub refract: RefractSweep,
    pub focus_samples: usize,
    pub phase: PhaseSweep,
    pub fringe: FringeSettings,
    pub texture: TextureSettings,
}

impl RunConfig {
    pub fn first_pair(&self) -> Result<&PrismPairSpec> {
        self.pairs.first().ok_or_else(|| CliError::Validation("this command needs a [pair] section".into()))
    }

    pub fn detector_z(&self) -> Result<f64> {
        match self.detector_z {
            Some(z) => Ok(z),
            None => {
                let p = self.first_pair()?;
                Ok(p.position + p.focal_distance()?)
            }
        }
    }

    pub fn beamline(&self) -> Result<BeamlineConfig> {
        self.first_pair()?;
        let b = BeamlineConfig {
            pairs: self.pairs.clone(),
            detector_z: self.detector_z()?,
            orientation: self.orientation,
            constants: self.constants,
        };
        b.validate()?;
        Ok(b)
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
    used: bool,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn char_col(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::parse(n, char_col(raw, indent), "section header is missing ']'"))?
                .trim();
            if name.is_empty() {
                return Err(CliError::parse(n, char_col(raw, indent), "empty section name"));
            }
            sections.push(Section { name: name.to_string(), line: n, entries: Vec::new() });
            continue;
        }
        let eq = content
            .find('=')
            .ok_or_else(|| CliError::parse(n, char_col(raw, indent), "expected `key = value` or `[section]`"))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| CliError::parse(n, char_col(raw, indent), "entry appears before any [section]"))?;
        let key = content[..eq].trim().to_ascii_lowercase();
        let key = key.as_str();
        if key.is_empty() {
            return Err(CliError::parse(n, char_col(raw, indent), "missing key before '='"));
        }
        let after = &content[eq + 1..];
        let value = after.trim();
        let value_byte = eq + 1 + (after.len() - after.trim_start().len());
        if value.is_empty() {
            return Err(CliError::parse(n, char_col(raw, value_byte), format!("missing value for `{key}`")));
        }
        if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
            return Err(CliError::parse(
                n,
                char_col(raw, indent),
                format!("duplicate key `{key}` (first set on line {})", prev.line),
            ));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line: n,
            key_col: char_col(raw, indent),
            value_col: char_col(raw, value_byte),
            used: false,
        });
    }
    Ok(sections)
}

/// Split `"150 mT"` or `"150mT"` into the number and the unit text.
fn split_number(value: &str) -> Option<(f64, &str, usize)> {
    let numeric_end = value
        .char_indices()
        .find(|(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | '+' | '-' | 'e' | 'E')))
        .map(|(i, _)| i)
        .unwrap_or(value.len());
    let mut end = numeric_end;
    while end > 0 {
        if let Ok(v) = value[..end].parse::<f64>() {
            let rest = &value[end..];
            let unit_offset = end + (rest.len() - rest.trim_start().len());
            return Some((v, rest.trim(), unit_offset));
        }
        end -= 1;
    }
    None
}

struct Reader<'a> {
    section: &'a mut Section,
}

impl<'a> Reader<'a> {
    fn entry(&mut self, key: &str) -> Option<&mut Entry> {
        let e = self.section.entries.iter_mut().find(|e| e.key == key)?;
        e.used = true;
        Some(e)
    }

    fn parse_quantity(text: &str, line: usize, col: usize, key: &str, dim: Dimension) -> Result<f64> {
        let (v, unit, unit_at) = split_number(text)
            .ok_or_else(|| CliError::parse(line, col, format!("`{key}` expects a number with a unit, got `{text}`")))?;
        let allowed = || units::symbols(dim).collect::<Vec<_>>().join(", ");
        if unit.is_empty() {
            return Err(CliError::parse(
                line,
                col + text.chars().count(),
                format!("`{key}` is missing a unit; use one of {}", allowed()),
            ));
        }
        let unit_col = col + text[..unit_at].chars().count();
        match units::lookup(unit) {
            Some((d, scale)) if d == dim => {
                let si = v * scale;
                if !si.is_finite() {
                    return Err(CliError::parse(line, col, format!("`{key}` must be finite")));
                }
                Ok(si)
            }
            Some((d, _)) => Err(CliError::parse(
                line,
                unit_col,
                format!("`{key}` expects a {} ({}), got a {} unit `{unit}`", dim_name(dim), allowed(), dim_name(d)),
            )),
            None => Err(CliError::parse(line, unit_col, format!("unknown unit `{unit}` for `{key}`; use one of {}", allowed()))),
        }
    }

    fn quantity(&mut self, key: &str, dim: Dimension) -> Result<Option<f64>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => Self::parse_quantity(&e.value, e.line, e.value_col, key, dim).map(Some),
        }
    }

    fn required(&mut self, key: &str, dim: Dimension) -> Result<f64> {
        let line = self.section.line;
        let name = self.section.name.clone();
        self.quantity(key, dim)?
            .ok_or_else(|| CliError::parse(line, 1, format!("[{name}] needs `{key}`")))
    }

    fn quantities(&mut self, key: &str, dim: Dimension) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        let (line, base) = (e.line, e.value_col);
        let mut out = Vec::new();
        let mut offset = 0;
        for part in e.value.split(',') {
            let lead = part.len() - part.trim_start().len();
            let col = base + e.value[..offset + lead].chars().count();
            out.push(Self::parse_quantity(part.trim(), line, col, key, dim)?);
            offset += part.len() + 1;
        }
        Ok(Some(out))
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        e.value
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::parse(e.line, e.value_col, format!("`{key}` expects a non-negative integer, got `{}`", e.value)))
    }

    fn word(&mut self, key: &str, choices: &[&str]) -> Result<Option<String>> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        if choices.contains(&e.value.as_str()) {
            Ok(Some(e.value.clone()))
        } else {
            Err(CliError::parse(
                e.line,
                e.value_col,
                format!("`{key}` must be one of {}, got `{}`", choices.join(", "), e.value),
            ))
        }
    }

    fn flag(&mut self, key: &str) -> Result<Option<bool>> {
        Ok(self.word(key, &["true", "false"])?.map(|w| w == "true"))
    }

    fn finish(self) -> Result<()> {
        match self.section.entries.iter().find(|e| !e.used) {
            Some(e) => Err(CliError::parse(e.line, e.key_col, format!("unknown key `{}` in [{}]", e.key, self.section.name))),
            None => Ok(()),
        }
    }
}

fn dim_name(d: Dimension) -> &'static str {
    match d {
        Dimension::Length => "length",
        Dimension::Field => "field",
        Dimension::Angle => "angle",
        Dimension::Speed => "speed",
    }
}

const SECTIONS: &[&str] =
    &["constants", "neutron", "pair", "detector", "checkerboard", "refract", "focus", "phase", "fringe", "texture"];

fn invalid(what: &str, e: semsans_core::Error) -> CliError {
    CliError::Validation(format!("{what}: {e}"))
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut sections = split_sections(text)?;
    for (i, s) in sections.iter().enumerate() {
        if !SECTIONS.contains(&s.name.as_str()) {
            return Err(CliError::parse(s.line, 1, format!("unknown section [{}]", s.name)));
        }
        if s.name != "pair" {
            if let Some(prev) = sections[..i].iter().find(|p| p.name == s.name) {
                return Err(CliError::parse(s.line, 1, format!("[{}] repeated (first on line {})", s.name, prev.line)));
            }
        }
    }
    let find = |name: &str| sections.iter().position(|s| s.name == name);
    let constants_at = find("constants");
    let neutron_at = find("neutron");
    let detector_at = find("detector");
    let board_at = find("checkerboard");
    let refract_at = find("refract");
    let focus_at = find("focus");
    let phase_at = find("phase");
    let fringe_at = find("fringe");
    let texture_at = find("texture");

    let mut constants = Constants::default();
    if let Some(i) = constants_at {
        let mut r = Reader { section: &mut sections[i] };
        if let Some(w) = r.word("moment_ratio", &["codata", "rounded"])? {
            constants = if w == "codata" { Constants::codata2018() } else { Constants::rounded() };
        }
        r.finish()?;
    }
    constants.validate().map_err(|e| invalid("[constants]", e))?;

    let Some(i) = neutron_at else {
        return Err(CliError::parse(1, 1, "missing [neutron] section"));
    };
    let neutron = {
        let mut r = Reader { section: &mut sections[i] };
        let wavelength = r.required("wavelength", Dimension::Length)?;
        let mut n = NeutronState::from_wavelength(wavelength, &constants).map_err(|e| invalid("[neutron]", e))?;
        n.divergence = r.quantity("divergence", Dimension::Angle)?.unwrap_or(0.0);
        n.x0 = r.quantity("x0", Dimension::Length)?.unwrap_or(0.0);
        n.y0 = r.quantity("y0", Dimension::Length)?.unwrap_or(0.0);
        n.theta_in = r.quantity("spin_theta", Dimension::Angle)?.unwrap_or(n.theta_in);
        n.phi_in = r.quantity("spin_phi", Dimension::Angle)?.unwrap_or(n.phi_in);
        r.finish()?;
        n.validate(&constants).map_err(|e| invalid("[neutron]", e))?;
        n
    };

    let mut pairs = Vec::new();
    let pair_indices: Vec<usize> = sections.iter().enumerate().filter(|(_, s)| s.name == "pair").map(|(i, _)| i).collect();
    for (k, &i) in pair_indices.iter().enumerate() {
        let line = sections[i].line;
        let mut r = Reader { section: &mut sections[i] };
        let geometry = match r.word("geometry", &["parallelogram", "triangular"])?.as_deref() {
            Some("triangular") => Geometry::Triangular,
            _ => Geometry::Parallelogram,
        };
        let axis = match r.word("axis", &["x", "y"])?.as_deref() {
            Some("y") => [0.0, 1.0, 0.0],
            _ => [1.0, 0.0, 0.0],
        };
        let edge = r.quantity("edge", Dimension::Length)?.unwrap_or(0.04);
        let gap = r.quantity("gap", Dimension::Length)?.unwrap_or(0.36);
        let b1 = r.required("b1", Dimension::Field)?;
        let b2 = r.required("b2", Dimension::Field)?;
        let position = match r.quantity("position", Dimension::Length)? {
            Some(p) => p,
            None if k == 0 => 0.0,
            None => return Err(CliError::parse(line, 1, format!("[pair] #{} needs `position`", k + 1))),
        };
        r.finish()?;
        let spec = PrismPairSpec::new(edge, gap, b1, b2, geometry).with_axis(axis).at(position);
        spec.validate().map_err(|e| invalid(&format!("[pair] #{}", k + 1), e))?;
        pairs.push(spec);
    }

    let (mut detector_z, mut orientation) = (None, DetectorOrientation::Vertical);
    if let Some(i) = detector_at {
        let mut r = Reader { section: &mut sections[i] };
        detector_z = r.quantity("z", Dimension::Length)?;
        let offset = r.quantity("offset", Dimension::Length)?;
        if let Some(w) = r.word("orientation", &["vertical", "focusing"])? {
            if w == "focusing" {
                orientation = DetectorOrientation::FocusingPlane { offset: offset.unwrap_or(0.0) };
            }
        }
        if offset.is_some() && orientation == DetectorOrientation::Vertical {
            return Err(CliError::Validation("[detector] offset only applies to orientation = focusing".into()));
        }
        r.finish()?;
    }

    let checkerboard = match board_at {
        None => None,
        Some(i) => {
            let line = sections[i].line;
            let mut r = Reader { section: &mut sections[i] };
            let d = r
                .quantities("distances", Dimension::Length)?
                .ok_or_else(|| CliError::parse(line, 1, "[checkerboard] needs `distances`"))?;
            let distances: [f64; 4] = d
                .try_into()
                .map_err(|v: Vec<f64>| CliError::Validation(format!("[checkerboard] distances: need 4 values, got {}", v.len())))?;
            let field = match (r.quantity("b_max", Dimension::Field)?, r.quantity("b1", Dimension::Field)?) {
                (Some(b), None) => CheckerboardField::Cap(b),
                (None, Some(b)) => CheckerboardField::First(b),
                _ => return Err(CliError::Validation("[checkerboard] needs exactly one of `b_max` or `b1`".into())),
            };
            r.finish()?;
            let board = Checkerboard { distances, field };
            crate::commands::checkerboard_fields(&board).map_err(|e| match e {
                CliError::Physics(p) => invalid("[checkerboard]", p),
                other => other,
            })?;
            Some(board)
        }
    };

    let mut refract = RefractSweep { theta_max: 80f64.to_radians(), samples: 161, field_jump: None };
    if let Some(i) = refract_at {
        let mut r = Reader { section: &mut sections[i] };
        refract.theta_max = r.quantity("theta_max", Dimension::Angle)?.unwrap_or(refract.theta_max);
        refract.samples = r.count("samples")?.unwrap_or(refract.samples);
        refract.field_jump = r.quantity("field_jump", Dimension::Field)?;
        r.finish()?;
    }
    if !(refract.theta_max > 0.0 && refract.theta_max < std::f64::consts::FRAC_PI_2) || refract.samples < 2 {
        return Err(CliError::Validation("[refract] needs 0 < theta_max < 90 deg and samples >= 2".into()));
    }

    let mut focus_samples = 21;
    if let Some(i) = focus_at {
        let mut r = Reader { section: &mut sections[i] };
        focus_samples = r.count("samples")?.unwrap_or(focus_samples);
        r.finish()?;
    }
    if focus_samples < 2 {
        return Err(CliError::Validation("[focus] samples must be at least 2".into()));
    }

    let mut phase = PhaseSweep { y_range: None, samples: 201 };
    if let Some(i) = phase_at {
        let mut r = Reader { section: &mut sections[i] };
        let lo = r.quantity("y_min", Dimension::Length)?;
        let hi = r.quantity("y_max", Dimension::Length)?;
        phase.samples = r.count("samples")?.unwrap_or(phase.samples);
        phase.y_range = match (lo, hi) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(CliError::Validation("[phase] set both y_min and y_max or neither".into())),
        };
        r.finish()?;
    }
    if phase.samples < 2 || phase.y_range.is_some_and(|(a, b)| !(b > a)) {
        return Err(CliError::Validation("[phase] needs y_max > y_min and samples >= 2".into()));
    }

    let mut fringe = FringeSettings { half_width: 5e-3, samples: 201 };
    if let Some(i) = fringe_at {
        let mut r = Reader { section: &mut sections[i] };
        fringe.half_width = r.quantity("half_width", Dimension::Angle)?.unwrap_or(fringe.half_width);
        fringe.samples = r.count("samples")?.unwrap_or(fringe.samples);
        r.finish()?;
    }
    if !(fringe.half_width >= 0.0) || fringe.samples == 0 {
        return Err(CliError::Validation("[fringe] needs half_width >= 0 and samples >= 1".into()));
    }

    let mut texture = TextureSettings {
        grid: semsans_core::textures::DEFAULT_GRID_POINTS,
        cells: 1,
        extent: None,
        subtract_carrier: false,
    };
    if let Some(i) = texture_at {
        let mut r = Reader { section: &mut sections[i] };
        texture.grid = r.count("grid")?.unwrap_or(texture.grid);
        texture.cells = r.count("cells")?.unwrap_or(texture.cells);
        texture.extent = r.quantity("extent", Dimension::Length)?;
        texture.subtract_carrier = r.flag("subtract_carrier")?.unwrap_or(false);
        r.finish()?;
    }
    validate_texture(&texture)?;

    Ok(RunConfig {
        constants,
        neutron,
        pairs,
        detector_z,
        orientation,
        checkerboard,
        refract,
        focus_samples,
        phase,
        fringe,
        texture,
    })
}

pub fn validate_texture(t: &TextureSettings) -> Result<()> {
    if t.grid < 2 || t.cells == 0 || t.extent.is_some_and(|e| !(e > 0.0)) {
        return Err(CliError::Validation("[texture] needs grid >= 2, cells >= 1 and a positive extent".into()));
    }
    Ok(())
}
