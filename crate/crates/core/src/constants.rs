use crate::error::{Error, Result};

/// Physical constants used throughout the simulator (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub neutron_mass: f64,
    pub nuclear_magneton: f64,
    /// Half the neutron g-factor; negative.
    pub g_half: f64,
    /// Magnetic moment `g_half * nuclear_magneton`; negative.
    pub moment: f64,
    pub planck: f64,
    pub hbar: f64,
    pub light_speed: f64,
}

impl Constants {
    pub const CODATA_2018_G_HALF: f64 = -1.91304273;
    pub const ROUNDED_G_HALF: f64 = -1.913;

    /// CODATA 2018 values.
    pub fn codata2018() -> Self {
        Self::with_g_half(Self::CODATA_2018_G_HALF)
    }

    /// CODATA values with the moment ratio rounded to four digits.
    pub fn rounded() -> Self {
        Self::with_g_half(Self::ROUNDED_G_HALF)
    }

    pub fn with_g_half(g_half: f64) -> Self {
        let planck = 6.626_070_15e-34;
        let nuclear_magneton = 5.050_783_746_1e-27;
        Constants {
            neutron_mass: 1.674_927_498_04e-27,
            nuclear_magneton,
            g_half,
            moment: g_half * nuclear_magneton,
            planck,
            hbar: planck / (2.0 * std::f64::consts::PI),
            light_speed: 299_792_458.0,
        }
    }

    /// |mu| in J/T.
    pub fn moment_abs(&self) -> f64 {
        self.moment.abs()
    }

    pub fn validate(&self) -> Result<()> {
        if self.moment >= 0.0 {
            return Err(Error::invalid("moment", "neutron moment must be negative"));
        }
        if !(1.91..=1.92).contains(&self.g_half.abs()) {
            return Err(Error::invalid(
                "g_half",
                format!("|g_half| = {} outside [1.91, 1.92]", self.g_half.abs()),
            ));
        }
        let ratio = self.planck / (2.0 * std::f64::consts::PI * self.hbar);
        if (ratio - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("hbar", "planck != 2 pi hbar"));
        }
        if ((self.moment - self.g_half * self.nuclear_magneton) / self.moment).abs() > 1e-12 {
            return Err(Error::invalid("moment", "moment != g_half * nuclear_magneton"));
        }
        for (name, v) in [
            ("neutron_mass", self.neutron_mass),
            ("nuclear_magneton", self.nuclear_magneton),
            ("planck", self.planck),
            ("light_speed", self.light_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::codata2018()
    }
}
