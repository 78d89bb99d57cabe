//! Clock rates, Doppler shifts and Unruh temperatures for an ISS to Lunar
//! Gateway link.
//!
//! Both stations are treated as circular orbits in a static weak field. The
//! Gateway estimate is deliberately crude: its own lunar orbit sets the
//! potential, while the kinetic term uses the Moon's orbit about the Earth.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AstroError {
    #[error("invalid orbit: {0}")]
    InvalidOrbit(String),
    #[error("speed {0} m/s is not below c")]
    Superluminal(f64),
    #[error("metric radicand {0} is not positive")]
    NonPositiveRadicand(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

macro_rules! quantity {
    ($($name:ident: $unit:literal),* $(,)?) => {$(
        #[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub f64);

        impl $name {
            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:.4e} {}", self.0, $unit)
            }
        }
    )*};
}

quantity! {
    Meters: "m",
    Seconds: "s",
    Kilograms: "kg",
    MetersPerSecond: "m/s",
    MetersPerSecondSquared: "m/s^2",
    RadiansPerSecond: "rad/s",
    Kelvin: "K",
}

impl Div<MetersPerSecond> for Meters {
    type Output = Seconds;
    fn div(self, v: MetersPerSecond) -> Seconds {
        Seconds(self.0 / v.0)
    }
}

impl Mul<RadiansPerSecond> for Meters {
    type Output = MetersPerSecond;
    fn mul(self, w: RadiansPerSecond) -> MetersPerSecond {
        MetersPerSecond(self.0 * w.0)
    }
}

const DAY: f64 = 86_400.0;

/// Physical constants and the parameters of the two stations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyCatalog {
    pub g: f64,
    pub c: MetersPerSecond,
    pub m_earth: Kilograms,
    pub m_moon: Kilograms,
    pub r_earth: Meters,
    pub r_moon_orbit: Meters,
    pub hbar: f64,
    pub k_b: f64,
    pub r_iss: Meters,
    pub omega_iss: RadiansPerSecond,
    pub iss_acceleration: MetersPerSecondSquared,
    pub r_gateway: Meters,
    pub gateway_periapsis: Meters,
    /// Sidereal month.
    pub omega_moon: RadiansPerSecond,
}

impl BodyCatalog {
    /// The rounded values the link estimates are quoted with.
    pub fn paper() -> Self {
        Self {
            g: 6.67e-11,
            c: MetersPerSecond(3e8),
            m_earth: Kilograms(5.97e24),
            m_moon: Kilograms(7.35e22),
            r_earth: Meters(6.37e6),
            r_moon_orbit: Meters(3.85e8),
            hbar: 1.054_571_817e-34,
            k_b: 1.380_649e-23,
            r_iss: Meters(6.77e6),
            omega_iss: RadiansPerSecond(1.1e-3),
            iss_acceleration: MetersPerSecondSquared(8.7),
            r_gateway: Meters(1e7),
            gateway_periapsis: Meters(3e6),
            omega_moon: RadiansPerSecond(2.0 * PI / (27.32 * DAY)),
        }
    }

    /// CODATA constants and mean ephemeris values.
    pub fn modern() -> Self {
        Self {
            g: 6.674_30e-11,
            c: MetersPerSecond(299_792_458.0),
            m_earth: Kilograms(5.9722e24),
            m_moon: Kilograms(7.342e22),
            r_earth: Meters(6.371e6),
            r_moon_orbit: Meters(3.844e8),
            r_iss: Meters(6.78e6),
            omega_iss: RadiansPerSecond(2.0 * PI / 5_556.0),
            omega_moon: RadiansPerSecond(2.0 * PI / (27.321_661 * DAY)),
            ..Self::paper()
        }
    }

    fn check(&self) -> Result<(), AstroError> {
        let all = [
            self.g,
            self.c.0,
            self.m_earth.0,
            self.m_moon.0,
            self.r_earth.0,
            self.r_moon_orbit.0,
            self.hbar,
            self.k_b,
            self.r_iss.0,
            self.r_gateway.0,
            self.gateway_periapsis.0,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) && self.omega_iss.0 >= 0.0 && self.omega_moon.0 >= 0.0 {
            Ok(())
        } else {
            Err(AstroError::InvalidArgument("catalog values must be positive".into()))
        }
    }

    pub fn iss_orbit(&self) -> Result<CircularOrbit, AstroError> {
        CircularOrbit::new(self, self.m_earth, self.r_iss, self.omega_iss)
    }

    /// Lunar orbit for the potential, plus the Earth's potential at the Moon;
    /// the kinetic term rides on the Moon's orbit.
    pub fn gateway_orbit(&self) -> Result<CircularOrbit, AstroError> {
        Ok(CircularOrbit::new(self, self.m_moon, self.r_gateway, self.omega_moon)?
            .with_extra_potential(self.g * self.m_earth.0 / self.r_moon_orbit.0)
            .with_speed_radius(self.r_moon_orbit))
    }
}

impl Default for BodyCatalog {
    fn default() -> Self {
        Self::paper()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircularOrbit {
    pub central_mass: Kilograms,
    pub radius: Meters,
    pub angular_speed: RadiansPerSecond,
    /// Additional Newtonian potential `GM/r` from other bodies, m²/s².
    pub extra_potential: f64,
    /// Radius entering the kinetic term; the orbit radius if absent.
    pub speed_radius: Option<Meters>,
}

impl CircularOrbit {
    pub fn new(
        catalog: &BodyCatalog,
        central_mass: Kilograms,
        radius: Meters,
        angular_speed: RadiansPerSecond,
    ) -> Result<Self, AstroError> {
        catalog.check()?;
        let rs = 2.0 * catalog.g * central_mass.0 / (catalog.c.0 * catalog.c.0);
        if !(central_mass.0 >= 0.0) || !(radius.0 > 10.0 * rs) || !(radius.0.is_finite()) {
            return Err(AstroError::InvalidOrbit(format!(
                "radius {} must exceed ten Schwarzschild radii ({rs:e} m)",
                radius
            )));
        }
        if !(angular_speed.0 >= 0.0) {
            return Err(AstroError::InvalidOrbit("negative angular speed".into()));
        }
        Ok(Self {
            central_mass,
            radius,
            angular_speed,
            extra_potential: 0.0,
            speed_radius: None,
        })
    }

    pub fn with_extra_potential(mut self, phi: f64) -> Self {
        self.extra_potential = phi;
        self
    }

    pub fn with_speed_radius(mut self, r: Meters) -> Self {
        self.speed_radius = Some(r);
        self
    }

    pub fn speed(&self) -> MetersPerSecond {
        self.speed_radius.unwrap_or(self.radius) * self.angular_speed
    }
}

/// `1 − dτ/dt`, computed without cancellation.
pub fn proper_time_deficit(orbit: &CircularOrbit, catalog: &BodyCatalog) -> Result<f64, AstroError> {
    let c2 = catalog.c.0 * catalog.c.0;
    let v = orbit.speed().0;
    let x = 2.0 * (catalog.g * orbit.central_mass.0 / orbit.radius.0 + orbit.extra_potential) / c2 + v * v / c2;
    if x >= 1.0 {
        return Err(AstroError::NonPositiveRadicand(1.0 - x));
    }
    Ok(x / (1.0 + (1.0 - x).sqrt()))
}

/// `dτ/dt = √[(1 − 2GM/(c²r) − 2Φ/c²) − v²/c²]`.
pub fn proper_time_rate(orbit: &CircularOrbit, catalog: &BodyCatalog) -> Result<f64, AstroError> {
    Ok(1.0 - proper_time_deficit(orbit, catalog)?)
}

/// How far clock A falls behind clock B over `elapsed` coordinate time.
pub fn clock_offset(rate_a: f64, rate_b: f64, elapsed: Seconds) -> Seconds {
    Seconds((rate_b - rate_a) * elapsed.0)
}

fn beta(v: MetersPerSecond, c: MetersPerSecond) -> Result<f64, AstroError> {
    let b = v.0 / c.0;
    if !(b.abs() < 1.0) {
        return Err(AstroError::Superluminal(v.0));
    }
    Ok(b)
}

/// `√((1+β)/(1−β)) − 1`; positive for recession.
pub fn radial_doppler(v: MetersPerSecond, c: MetersPerSecond) -> Result<f64, AstroError> {
    let b = beta(v, c)?;
    let f = (1.0 + b) / (1.0 - b);
    Ok(2.0 * b / (1.0 - b) / (f.sqrt() + 1.0))
}

/// `γ − 1`.
pub fn transverse_doppler(v: MetersPerSecond, c: MetersPerSecond) -> Result<f64, AstroError> {
    let b = beta(v, c)?;
    let b2 = b * b;
    let gamma = 1.0 / (1.0 - b2).sqrt();
    Ok(b2 / (1.0 - b2) / (gamma + 1.0))
}

/// `ħa / (2π k_B c)`.
pub fn unruh_temperature(a: MetersPerSecondSquared, catalog: &BodyCatalog) -> Result<Kelvin, AstroError> {
    if !(a.0 >= 0.0) {
        return Err(AstroError::InvalidArgument(format!("acceleration {a}")));
    }
    Ok(Kelvin(catalog.hbar * a.0 / (2.0 * PI * catalog.k_b * catalog.c.0)))
}

/// Semi-major axis of the ISS–Moon transfer ellipse.
pub fn hohmann_half_radius(catalog: &BodyCatalog) -> Meters {
    Meters(0.5 * (catalog.r_iss.0 + catalog.r_moon_orbit.0))
}

/// `√(GM_⊕ / r_½)`.
pub fn hohmann_midpoint_speed(catalog: &BodyCatalog) -> MetersPerSecond {
    circular_speed(catalog.g * catalog.m_earth.0, hohmann_half_radius(catalog))
}

pub fn circular_speed(gm: f64, r: Meters) -> MetersPerSecond {
    MetersPerSecond((gm / r.0).sqrt())
}

pub fn light_travel_time(distance: Meters, catalog: &BodyCatalog) -> Result<Seconds, AstroError> {
    if !(distance.0 >= 0.0) {
        return Err(AstroError::InvalidArgument(format!("distance {distance}")));
    }
    Ok(distance / catalog.c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryBound {
    pub first: f64,
    pub second: f64,
}

impl MemoryBound {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }
}

/// `5N^{−1/2+ε} + 5√(3/2π) N^{−ε} exp(−N^{2ε}/6)` on finite-run CHSH violations.
pub fn memory_loophole_bound(n: u64, epsilon: f64) -> Result<MemoryBound, AstroError> {
    if n == 0 || !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(AstroError::InvalidArgument(format!("N = {n}, epsilon = {epsilon}")));
    }
    let n = n as f64;
    Ok(MemoryBound {
        first: 5.0 * n.powf(-0.5 + epsilon),
        second: 5.0 * (3.0 / (2.0 * PI)).sqrt() * n.powf(-epsilon) * (-n.powf(2.0 * epsilon) / 6.0).exp(),
    })
}

/// Every derived link quantity for one catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub iss_rate_deficit: f64,
    pub gateway_rate_deficit: f64,
    pub clock_offset_per_second: Seconds,
    pub light_time_surface_to_moon: Seconds,
    pub radial_doppler_relative: f64,
    pub transverse_doppler_iss: f64,
    pub hohmann_half_radius: Meters,
    pub hohmann_midpoint_speed: MetersPerSecond,
    pub radial_doppler_transfer: f64,
    pub unruh_iss: Kelvin,
    pub gateway_acceleration: MetersPerSecondSquared,
    pub unruh_gateway: Kelvin,
    pub unruh_ratio: f64,
}

/// Relative ISS–Gateway speed used for the radial estimate.
pub const RELATIVE_SPEED: MetersPerSecond = MetersPerSecond(1e4);
/// ISS orbital speed used for the transverse estimate.
pub const ISS_SPEED: MetersPerSecond = MetersPerSecond(7.7e3);

pub fn link_report(catalog: &BodyCatalog) -> Result<LinkReport, AstroError> {
    let iss = catalog.iss_orbit()?;
    let lg = catalog.gateway_orbit()?;
    let rate_a = proper_time_rate(&iss, catalog)?;
    let rate_b = proper_time_rate(&lg, catalog)?;
    let v_half = hohmann_midpoint_speed(catalog);
    let a_lg = MetersPerSecondSquared(catalog.g * catalog.m_moon.0 / catalog.gateway_periapsis.0.powi(2));
    let t_iss = unruh_temperature(catalog.iss_acceleration, catalog)?;
    let t_lg = unruh_temperature(a_lg, catalog)?;
    Ok(LinkReport {
        iss_rate_deficit: proper_time_deficit(&iss, catalog)?,
        gateway_rate_deficit: proper_time_deficit(&lg, catalog)?,
        clock_offset_per_second: clock_offset(rate_a, rate_b, Seconds(1.0)),
        light_time_surface_to_moon: light_travel_time(Meters(catalog.r_moon_orbit.0 - catalog.r_earth.0), catalog)?,
        radial_doppler_relative: radial_doppler(RELATIVE_SPEED, catalog.c)?,
        transverse_doppler_iss: transverse_doppler(ISS_SPEED, catalog.c)?,
        hohmann_half_radius: hohmann_half_radius(catalog),
        hohmann_midpoint_speed: v_half,
        radial_doppler_transfer: radial_doppler(v_half, catalog.c)?,
        unruh_iss: t_iss,
        gateway_acceleration: a_lg,
        unruh_gateway: t_lg,
        unruh_ratio: t_lg.0 / t_iss.0,
    })
}

impl fmt::Display for LinkReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 13] = [
            ("ISS clock-rate deficit", format!("{:.4e}", self.iss_rate_deficit)),
            ("Gateway clock-rate deficit", format!("{:.4e}", self.gateway_rate_deficit)),
            ("ISS lag per second", self.clock_offset_per_second.to_string()),
            ("Earth surface to Moon light time", self.light_time_surface_to_moon.to_string()),
            ("radial Doppler at 1e4 m/s", format!("{:.4e}", self.radial_doppler_relative)),
            ("transverse Doppler at 7.7e3 m/s", format!("{:.4e}", self.transverse_doppler_iss)),
            ("transfer semi-major axis", self.hohmann_half_radius.to_string()),
            ("transfer mid-point speed", self.hohmann_midpoint_speed.to_string()),
            ("radial Doppler at mid-point speed", format!("{:.4e}", self.radial_doppler_transfer)),
            ("Unruh temperature, ISS", self.unruh_iss.to_string()),
            ("Gateway acceleration at periapsis", self.gateway_acceleration.to_string()),
            ("Unruh temperature, Gateway", self.unruh_gateway.to_string()),
            ("Gateway/ISS Unruh ratio", format!("{:.4}", self.unruh_ratio)),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<36} {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_limit_is_special_relativity() {
        let cat = BodyCatalog::paper();
        let o = CircularOrbit::new(&cat, Kilograms(0.0), Meters(1e7), RadiansPerSecond(3e-3)).unwrap();
        let v: f64 = 3e4 / 3e8;
        assert!((proper_time_rate(&o, &cat).unwrap() - (1.0 - v * v).sqrt()).abs() < 1e-12);
        let still = CircularOrbit::new(&cat, Kilograms(0.0), Meters(1.0), RadiansPerSecond(0.0)).unwrap();
        assert_eq!(proper_time_rate(&still, &cat).unwrap(), 1.0);
    }

    #[test]
    fn orbit_inside_ten_schwarzschild_radii_rejected() {
        let cat = BodyCatalog::paper();
        assert!(CircularOrbit::new(&cat, cat.m_earth, Meters(0.05), RadiansPerSecond(0.0)).is_err());
    }

    #[test]
    fn doppler_limits() {
        let c = MetersPerSecond(3e8);
        assert_eq!(radial_doppler(MetersPerSecond(0.0), c).unwrap(), 0.0);
        assert!(radial_doppler(MetersPerSecond(3e8), c).is_err());
        for v in [1.0, 1e3, 1e5] {
            let approx = v * v / (2.0 * 9e16);
            let t = transverse_doppler(MetersPerSecond(v), c).unwrap();
            assert!((t - approx).abs() / approx < 1e-2);
        }
    }

    #[test]
    fn memory_bound_regimes() {
        let b = memory_loophole_bound(1_000_000, 0.25).unwrap();
        assert!((b.total() - 0.158).abs() < 1e-3 && b.second < 1e-70);
        let small = memory_loophole_bound(10_000, 0.01).unwrap();
        assert!(small.second > small.first);
        assert!(memory_loophole_bound(0, 0.1).is_err());
    }

    #[test]
    fn report_renders_every_row() {
        let r = link_report(&BodyCatalog::paper()).unwrap();
        assert_eq!(r.to_string().lines().count(), 13);
        let json = serde_json::to_string(&r).unwrap();
        let back: LinkReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
