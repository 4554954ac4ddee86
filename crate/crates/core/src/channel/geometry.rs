//! Cell geometry, log-distance path loss and the scenario config file.
//!
//! Every link class uses
//!
//! ```text
//! gain_dB = -(L0 + 10 * alpha * log10(d / d0) + L_pen)
//! ```
//!
//! When per-Hz normalization is on, the returned variance is additionally
//! divided by the receiver noise density (thermal noise plus noise figure),
//! so a transmit power expressed in mW/Hz times the variance is an SNR and
//! all noise variances become 1.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LinkGains, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioMode {
    SnrParameterized,
    CoverageExtension,
    CoverageHole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    BsRs,
    RsTue,
    RsRue,
    BsUe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossModel {
    /// Loss at the reference distance, dB.
    pub ref_loss_db: f64,
    pub ref_distance_m: f64,
    pub exponent: f64,
    pub penetration_loss_db: f64,
}

impl PathLossModel {
    pub fn loss_db(&self, distance_m: f64) -> f64 {
        self.ref_loss_db
            + 10.0 * self.exponent * (distance_m / self.ref_distance_m).log10()
            + self.penetration_loss_db
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.ref_distance_m > 0.0 && self.exponent > 0.0) {
            return Err(Error::Config(format!(
                "path loss `{name}`: reference distance and exponent must be > 0"
            )));
        }
        if !(self.ref_loss_db.is_finite() && self.penetration_loss_db.is_finite()) {
            return Err(Error::Config(format!("path loss `{name}`: losses must be finite")));
        }
        Ok(())
    }
}

/// Radio parameters of the cellular layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioParams {
    pub carrier_ghz: f64,
    pub thermal_noise_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub bs_power_dbm: f64,
    pub ue_power_dbm: f64,
    pub rs_power_dbm: f64,
    pub bs_height_m: f64,
    pub rs_height_m: f64,
    pub ue_height_m: f64,
}

impl RadioParams {
    fn cellular(rs_power_dbm: f64) -> Self {
        Self {
            carrier_ghz: 2.0,
            thermal_noise_dbm_hz: -174.0,
            bandwidth_hz: 10e6,
            noise_figure_db: 7.0,
            bs_power_dbm: 46.0,
            ue_power_dbm: 24.0,
            rs_power_dbm,
            bs_height_m: 30.0,
            rs_height_m: 15.0,
            ue_height_m: 1.0,
        }
    }

    /// Receiver noise density in dBm/Hz.
    pub fn noise_floor_dbm_hz(&self) -> f64 {
        self.thermal_noise_dbm_hz + self.noise_figure_db
    }
}

/// Transmit power spread over the band, in dBm/Hz.
pub fn per_hz_power_dbm(power_dbm: f64, bandwidth_hz: f64) -> f64 {
    power_dbm - 10.0 * bandwidth_hz.log10()
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Layout and propagation parameters for one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGeometry {
    pub mode: ScenarioMode,
    pub bs_rs_distance_m: f64,
    pub rs_tue_distance_m: f64,
    pub rs_rue_distance_m: f64,
    pub bs_rs: PathLossModel,
    pub rs_ue: PathLossModel,
    pub bs_ue: PathLossModel,
    pub radio: RadioParams,
    pub per_hz: bool,
}

// Free-space loss at 100 m and 2 GHz, used as the reference for every class.
const FSPL_100M_2GHZ_DB: f64 = 78.5;

impl ScenarioGeometry {
    /// Cell-edge relay site of radius 500 m, RUE at the site edge.
    pub fn coverage_extension() -> Self {
        Self {
            mode: ScenarioMode::CoverageExtension,
            bs_rs_distance_m: 1000.0,
            rs_tue_distance_m: 300.0,
            rs_rue_distance_m: 500.0,
            bs_rs: PathLossModel {
                ref_loss_db: FSPL_100M_2GHZ_DB,
                ref_distance_m: 100.0,
                exponent: 2.8,
                penetration_loss_db: 0.0,
            },
            rs_ue: PathLossModel {
                ref_loss_db: FSPL_100M_2GHZ_DB,
                ref_distance_m: 100.0,
                exponent: 3.5,
                penetration_loss_db: 0.0,
            },
            bs_ue: PathLossModel {
                ref_loss_db: FSPL_100M_2GHZ_DB,
                ref_distance_m: 100.0,
                exponent: 3.76,
                penetration_loss_db: 0.0,
            },
            radio: RadioParams::cellular(39.0),
            per_hz: true,
        }
    }

    /// Coverage hole of radius 100 m around the relay, RUE 50 m away.
    ///
    /// The BS-UE class carries 20 dB of excess loss on top of the building
    /// penetration loss; that obstruction is what makes the area a hole.
    pub fn coverage_hole() -> Self {
        Self {
            mode: ScenarioMode::CoverageHole,
            bs_rs_distance_m: 1000.0,
            rs_tue_distance_m: 50.0,
            rs_rue_distance_m: 50.0,
            bs_rs: PathLossModel {
                ref_loss_db: FSPL_100M_2GHZ_DB,
                ref_distance_m: 100.0,
                exponent: 2.8,
                penetration_loss_db: 0.0,
            },
            rs_ue: PathLossModel {
                ref_loss_db: FSPL_100M_2GHZ_DB,
                ref_distance_m: 100.0,
                exponent: 3.0,
                penetration_loss_db: 10.0,
            },
            bs_ue: PathLossModel {
                ref_loss_db: FSPL_100M_2GHZ_DB + 20.0,
                ref_distance_m: 100.0,
                exponent: 3.76,
                penetration_loss_db: 10.0,
            },
            radio: RadioParams::cellular(30.0),
            per_hz: true,
        }
    }

    pub fn for_mode(mode: ScenarioMode) -> Option<Self> {
        match mode {
            ScenarioMode::CoverageExtension => Some(Self::coverage_extension()),
            ScenarioMode::CoverageHole => Some(Self::coverage_hole()),
            ScenarioMode::SnrParameterized => None,
        }
    }

    /// Default TUE-relay distances swept for this mode.
    pub fn default_tue_distances(&self) -> Vec<f64> {
        match self.mode {
            ScenarioMode::CoverageHole => (1..=10).map(|k| 10.0 * k as f64).collect(),
            _ => (1..=5).map(|k| 100.0 * k as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for d in [self.bs_rs_distance_m, self.rs_tue_distance_m, self.rs_rue_distance_m] {
            if !(d > 0.0) {
                return Err(Error::Config("distances must be > 0".into()));
            }
        }
        self.bs_rs.validate("bs_rs")?;
        self.rs_ue.validate("rs_ue")?;
        self.bs_ue.validate("bs_ue")?;
        if !(self.radio.bandwidth_hz > 0.0) {
            return Err(Error::Config("bandwidth must be > 0".into()));
        }
        Ok(())
    }

    fn model(&self, link: LinkKind) -> &PathLossModel {
        match link {
            LinkKind::BsRs => &self.bs_rs,
            LinkKind::RsTue | LinkKind::RsRue => &self.rs_ue,
            LinkKind::BsUe => &self.bs_ue,
        }
    }

    /// Transmit power in the units that pair with [`link_gain`]: mW/Hz when
    /// per-Hz normalization is on, mW otherwise.
    pub fn tx_power(&self, power_dbm: f64) -> f64 {
        if self.per_hz {
            dbm_to_mw(per_hz_power_dbm(power_dbm, self.radio.bandwidth_hz))
        } else {
            dbm_to_mw(power_dbm)
        }
    }

    /// Noise variance matching [`link_gain`]: 1 when the noise floor is folded
    /// into the gains, the in-band noise power in mW otherwise.
    pub fn noise_variance(&self) -> f64 {
        if self.per_hz {
            1.0
        } else {
            dbm_to_mw(self.radio.noise_floor_dbm_hz() + 10.0 * self.radio.bandwidth_hz.log10())
        }
    }

    /// System configuration for the relay schemes in this layout.
    pub fn system_config(&self, n: usize, m: usize, weights: (f64, f64)) -> SystemConfig {
        let noise = self.noise_variance();
        SystemConfig {
            m_antennas: m,
            n_antennas: n,
            p_u: self.tx_power(self.radio.ue_power_dbm),
            p_b: self.tx_power(self.radio.bs_power_dbm),
            p_r: self.tx_power(self.radio.rs_power_dbm),
            sigma2_r: noise,
            sigma2: noise,
            weights_u: vec![weights.0; m],
            weights_b: vec![weights.1; m],
        }
    }

    /// Relay-link variances with the TUE at `rs_tue_distance_m` from the relay.
    pub fn relay_gains(&self, rs_tue_distance_m: f64) -> LinkGains {
        let bs_rs = link_gain(self, LinkKind::BsRs, self.bs_rs_distance_m);
        LinkGains {
            h_u2: link_gain(self, LinkKind::RsTue, rs_tue_distance_m),
            h_b2: bs_rs,
            g_u2: link_gain(self, LinkKind::RsRue, self.rs_rue_distance_m),
            g_b2: bs_rs,
        }
    }

    /// Direct-link variances `(BS -> RUE, TUE -> BS)`. The UEs sit on the far
    /// side of the relay, on the BS-relay line.
    pub fn direct_gains(&self, rs_tue_distance_m: f64) -> (f64, f64) {
        let bs_rue = self.bs_rs_distance_m + self.rs_rue_distance_m;
        let bs_tue = self.bs_rs_distance_m + rs_tue_distance_m;
        (
            link_gain(self, LinkKind::BsUe, bs_rue),
            link_gain(self, LinkKind::BsUe, bs_tue),
        )
    }
}

/// Linear per-entry channel variance of a link at `distance_m`.
pub fn link_gain(geometry: &ScenarioGeometry, link: LinkKind, distance_m: f64) -> f64 {
    assert!(distance_m > 0.0, "distance must be positive");
    let mut gain_db = -geometry.model(link).loss_db(distance_m);
    if geometry.per_hz {
        gain_db -= geometry.radio.noise_floor_dbm_hz();
    }
    10f64.powf(gain_db / 10.0)
}

/// Channel variances for the SNR-parameterized sweeps with unit powers and
/// unit noise: BS-relay hops get `snr_b_db`, TUE/RUE hops get `snr_u_db`.
pub fn snr_parameterized_gains(snr_b_db: f64, snr_u_db: f64) -> LinkGains {
    let b = 10f64.powf(snr_b_db / 10.0);
    let u = 10f64.powf(snr_u_db / 10.0);
    LinkGains { h_u2: u, h_b2: b, g_u2: u, g_b2: b }
}

/// Optional overrides loaded from a TOML scenario file.
///
/// ```toml
/// [geometry]
/// bs_rs_distance_m = 1000.0
/// rs_rue_distance_m = 500.0
///
/// [radio]
/// rs_power_dbm = 36.0
///
/// [path_loss.rs_ue]
/// exponent = 3.2
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub geometry: GeometryOverrides,
    #[serde(default)]
    pub radio: RadioOverrides,
    #[serde(default)]
    pub path_loss: PathLossOverrides,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryOverrides {
    pub bs_rs_distance_m: Option<f64>,
    pub rs_rue_distance_m: Option<f64>,
    pub per_hz: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioOverrides {
    pub carrier_ghz: Option<f64>,
    pub thermal_noise_dbm_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub noise_figure_db: Option<f64>,
    pub bs_power_dbm: Option<f64>,
    pub ue_power_dbm: Option<f64>,
    pub rs_power_dbm: Option<f64>,
    pub bs_height_m: Option<f64>,
    pub rs_height_m: Option<f64>,
    pub ue_height_m: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossOverrides {
    pub bs_rs: Option<PathLossPatch>,
    pub rs_ue: Option<PathLossPatch>,
    pub bs_ue: Option<PathLossPatch>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossPatch {
    pub ref_loss_db: Option<f64>,
    pub ref_distance_m: Option<f64>,
    pub exponent: Option<f64>,
    pub penetration_loss_db: Option<f64>,
}

fn patch(target: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *target = v;
    }
}

impl PathLossPatch {
    fn apply(&self, m: &mut PathLossModel) {
        patch(&mut m.ref_loss_db, self.ref_loss_db);
        patch(&mut m.ref_distance_m, self.ref_distance_m);
        patch(&mut m.exponent, self.exponent);
        patch(&mut m.penetration_loss_db, self.penetration_loss_db);
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Overwrites the fields present in the file and re-validates.
    pub fn apply(&self, g: &mut ScenarioGeometry) -> Result<()> {
        patch(&mut g.bs_rs_distance_m, self.geometry.bs_rs_distance_m);
        patch(&mut g.rs_rue_distance_m, self.geometry.rs_rue_distance_m);
        if let Some(v) = self.geometry.per_hz {
            g.per_hz = v;
        }
        let r = &self.radio;
        let radio = &mut g.radio;
        patch(&mut radio.carrier_ghz, r.carrier_ghz);
        patch(&mut radio.thermal_noise_dbm_hz, r.thermal_noise_dbm_hz);
        patch(&mut radio.bandwidth_hz, r.bandwidth_hz);
        patch(&mut radio.noise_figure_db, r.noise_figure_db);
        patch(&mut radio.bs_power_dbm, r.bs_power_dbm);
        patch(&mut radio.ue_power_dbm, r.ue_power_dbm);
        patch(&mut radio.rs_power_dbm, r.rs_power_dbm);
        patch(&mut radio.bs_height_m, r.bs_height_m);
        patch(&mut radio.rs_height_m, r.rs_height_m);
        patch(&mut radio.ue_height_m, r.ue_height_m);
        if let Some(p) = &self.path_loss.bs_rs {
            p.apply(&mut g.bs_rs);
        }
        if let Some(p) = &self.path_loss.rs_ue {
            p.apply(&mut g.rs_ue);
        }
        if let Some(p) = &self.path_loss.bs_ue {
            p.apply(&mut g.bs_ue);
        }
        g.validate()
    }
}
