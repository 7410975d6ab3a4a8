//! Unit suffixes accepted in configuration text. Everything else is SI.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Field,
    Angle,
    Speed,
}

impl Dimension {
    pub fn si_symbol(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Field => "T",
            Dimension::Angle => "rad",
            Dimension::Speed => "m/s",
        }
    }
}

const TABLE: &[(&str, Dimension, f64)] = &[
    ("m", Dimension::Length, 1.0),
    ("cm", Dimension::Length, 1e-2),
    ("mm", Dimension::Length, 1e-3),
    ("um", Dimension::Length, 1e-6),
    ("µm", Dimension::Length, 1e-6),
    ("nm", Dimension::Length, 1e-9),
    ("A", Dimension::Length, 1e-10),
    ("T", Dimension::Field, 1.0),
    ("mT", Dimension::Field, 1e-3),
    ("uT", Dimension::Field, 1e-6),
    ("µT", Dimension::Field, 1e-6),
    ("G", Dimension::Field, 1e-4),
    ("rad", Dimension::Angle, 1.0),
    ("mrad", Dimension::Angle, 1e-3),
    ("urad", Dimension::Angle, 1e-6),
    ("deg", Dimension::Angle, std::f64::consts::PI / 180.0),
    ("m/s", Dimension::Speed, 1.0),
];

/// Scale factor to SI for a unit symbol.
pub fn lookup(symbol: &str) -> Option<(Dimension, f64)> {
    TABLE
        .iter()
        .find(|(s, _, _)| *s == symbol)
        .map(|&(_, d, f)| (d, f))
}

pub fn symbols(dim: Dimension) -> impl Iterator<Item = &'static str> {
    TABLE.iter().filter(move |e| e.1 == dim).map(|e| e.0)
}
