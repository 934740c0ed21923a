//! System parameters and the config-file loader.
//!
//! Config files are TOML with keys named exactly like the fields below. Values
//! are either plain numbers in SI units (except `noise_psd`, which is always
//! dBm/Hz) or strings carrying a unit suffix, e.g. `bandwidth_B = "2 MHz"`,
//! `Q_avg = "20 Mbits"`, `noise_psd = "-174 dBm/Hz"`. Every key is optional;
//! missing keys take the reference defaults listed in [`SystemConfig::default`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A parameter that is either shared by every terminal device or given per device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerTd {
    Uniform(f64),
    PerDevice(Vec<f64>),
}

impl PerTd {
    #[inline]
    pub fn at(&self, n: usize) -> f64 {
        match self {
            PerTd::Uniform(v) => *v,
            PerTd::PerDevice(v) => v[n],
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            PerTd::Uniform(v) => vec![*v],
            PerTd::PerDevice(v) => v.clone(),
        }
    }
}

/// How task sizes are drawn each slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalMode {
    /// Exponentially distributed with mean `arrival_mean_lambda`.
    Stochastic,
    /// Exactly `arrival_mean_lambda` bits every slot.
    Fixed,
}

/// How channel gains evolve across slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// i.i.d. Rician fading around the path-loss mean every slot.
    Stochastic,
    /// The path-loss mean gain, every slot.
    Fixed,
}

/// Every physical and algorithmic parameter of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub num_tds: usize,
    /// Sub-channel bandwidth (Hz).
    #[serde(rename = "bandwidth_B")]
    pub bandwidth: f64,
    /// Noise power spectral density (dBm/Hz).
    pub noise_psd: f64,
    /// Computation intensity (cycles/bit).
    #[serde(rename = "intensity_I")]
    pub intensity: PerTd,
    pub kappa_local: PerTd,
    pub kappa_mec: f64,
    /// Slot length (s).
    pub slot_tau: f64,
    /// Drift-plus-penalty control weight.
    #[serde(rename = "V")]
    pub v: f64,
    /// Extraction-workload coefficient.
    pub a: f64,
    /// Extraction-workload exponent (> 1).
    pub k: f64,
    /// Remote intensity exponent (> 0).
    pub p_exp: f64,
    /// Result-to-raw-data size ratio.
    #[serde(rename = "U")]
    pub u: f64,
    /// Target time-average total backlog (bits).
    #[serde(rename = "Q_avg")]
    pub q_avg: f64,
    /// Target time-average processing rate (bits/s).
    #[serde(rename = "R_avg")]
    pub r_avg: f64,
    /// Maximum local CPU frequency (Hz).
    pub f_local_max: PerTd,
    /// MEC server CPU capacity (Hz).
    #[serde(rename = "F_mec")]
    pub f_mec: f64,
    /// Maximum uplink transmit power (W).
    pub p_uplink_max: PerTd,
    /// Base-station downlink power budget (W).
    #[serde(rename = "P_mec")]
    pub p_mec: f64,
    pub beta_min: f64,
    #[serde(rename = "antenna_gain_A")]
    pub antenna_gain: f64,
    /// Carrier frequency (Hz).
    pub carrier_fc: f64,
    #[serde(rename = "pathloss_exp_ell")]
    pub pathloss_exp: f64,
    /// Line-of-sight power fraction of the Rician channel.
    pub rician_gamma: f64,
    /// Device distances (m). Empty means evenly spaced over 120..=255 m.
    pub distances: Vec<f64>,
    /// Mean task arrival per slot (bits).
    pub arrival_mean_lambda: PerTd,
    #[serde(rename = "horizon_T")]
    pub horizon: usize,
    pub seed: u64,
    pub arrival_mode: ArrivalMode,
    pub channel_mode: ChannelMode,
    #[serde(skip)]
    noise_power: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let mut cfg = SystemConfig {
            num_tds: 10,
            bandwidth: 2e6,
            noise_psd: -174.0,
            intensity: PerTd::Uniform(70.0),
            kappa_local: PerTd::Uniform(1e-26),
            kappa_mec: 1e-26,
            slot_tau: 1.0,
            v: 1e16,
            a: 1e-3,
            k: 4.0,
            p_exp: 1.0,
            u: 0.01,
            q_avg: 20e6,
            r_avg: 4e6,
            f_local_max: PerTd::Uniform(1e9),
            f_mec: 30e9,
            p_uplink_max: PerTd::Uniform(0.3),
            p_mec: 1.5,
            beta_min: 0.3,
            antenna_gain: 3.0,
            carrier_fc: 915e6,
            pathloss_exp: 3.0,
            rician_gamma: 0.3,
            distances: Vec::new(),
            arrival_mean_lambda: PerTd::Uniform(3e6),
            horizon: 20_000,
            seed: 1,
            arrival_mode: ArrivalMode::Stochastic,
            channel_mode: ChannelMode::Stochastic,
            noise_power: 0.0,
        };
        cfg.refresh_derived();
        cfg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dim {
    Count,
    Dimensionless,
    Frequency,
    Power,
    Bits,
    Rate,
    Time,
    Psd,
    Distance,
    Intensity,
    Energy,
    Mode,
}

const KEYS: &[(&str, Dim)] = &[
    ("num_tds", Dim::Count),
    ("bandwidth_B", Dim::Frequency),
    ("noise_psd", Dim::Psd),
    ("intensity_I", Dim::Intensity),
    ("kappa_local", Dim::Energy),
    ("kappa_mec", Dim::Energy),
    ("slot_tau", Dim::Time),
    ("V", Dim::Dimensionless),
    ("a", Dim::Dimensionless),
    ("k", Dim::Dimensionless),
    ("p_exp", Dim::Dimensionless),
    ("U", Dim::Dimensionless),
    ("Q_avg", Dim::Bits),
    ("R_avg", Dim::Rate),
    ("f_local_max", Dim::Frequency),
    ("F_mec", Dim::Frequency),
    ("p_uplink_max", Dim::Power),
    ("P_mec", Dim::Power),
    ("beta_min", Dim::Dimensionless),
    ("antenna_gain_A", Dim::Dimensionless),
    ("carrier_fc", Dim::Frequency),
    ("pathloss_exp_ell", Dim::Dimensionless),
    ("rician_gamma", Dim::Dimensionless),
    ("distances", Dim::Distance),
    ("arrival_mean_lambda", Dim::Bits),
    ("horizon_T", Dim::Count),
    ("seed", Dim::Count),
    ("arrival_mode", Dim::Mode),
    ("channel_mode", Dim::Mode),
];

fn unit_scale(dim: Dim, unit: &str) -> Option<f64> {
    let u = unit.trim();
    let scale = match dim {
        Dim::Frequency => match u {
            "Hz" => 1.0,
            "kHz" => 1e3,
            "MHz" => 1e6,
            "GHz" => 1e9,
            _ => return None,
        },
        Dim::Power => match u {
            "W" | "Watt" | "Watts" => 1.0,
            "mW" => 1e-3,
            _ => return None,
        },
        Dim::Bits => match u {
            "bit" | "bits" => 1.0,
            "kbits" => 1e3,
            "Mbits" => 1e6,
            "Gbits" => 1e9,
            _ => return None,
        },
        Dim::Rate => match u {
            "bps" | "bits/s" => 1.0,
            "kbps" | "kbits/s" => 1e3,
            "Mbps" | "Mbits/s" => 1e6,
            "Gbps" | "Gbits/s" => 1e9,
            _ => return None,
        },
        Dim::Time => match u {
            "s" => 1.0,
            "ms" => 1e-3,
            _ => return None,
        },
        Dim::Distance => match u {
            "m" => 1.0,
            "km" => 1e3,
            _ => return None,
        },
        Dim::Intensity => match u {
            "cycles/bit" => 1.0,
            _ => return None,
        },
        Dim::Psd => match u {
            "dBm/Hz" => 1.0,
            _ => return None,
        },
        Dim::Count | Dim::Dimensionless | Dim::Energy | Dim::Mode => return None,
    };
    Some(scale)
}

fn parse_scalar(key: &str, dim: Dim, value: &toml::Value) -> Result<f64> {
    match value {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) => Ok(*f),
        toml::Value::String(s) => {
            let s = s.trim();
            let split = s
                .find(|c: char| c.is_whitespace())
                .ok_or_else(|| Error::config(key, format!("`{s}` has no unit; write `<number> <unit>`")))?;
            let (num, unit) = s.split_at(split);
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| Error::config(key, format!("`{num}` is not a number")))?;
            let scale = unit_scale(dim, unit)
                .ok_or_else(|| Error::config(key, format!("unit `{}` is not valid for {dim:?}", unit.trim())))?;
            Ok(num * scale)
        }
        other => Err(Error::config(key, format!("expected a number, got {}", other.type_str()))),
    }
}

fn parse_per_td(key: &str, dim: Dim, value: &toml::Value) -> Result<PerTd> {
    match value {
        toml::Value::Array(items) => items
            .iter()
            .map(|v| parse_scalar(key, dim, v))
            .collect::<Result<Vec<_>>>()
            .map(PerTd::PerDevice),
        v => parse_scalar(key, dim, v).map(PerTd::Uniform),
    }
}

fn parse_count(key: &str, value: &toml::Value) -> Result<u64> {
    match value {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        toml::Value::Float(f) if *f >= 0.0 && f.fract() == 0.0 => Ok(*f as u64),
        other => Err(Error::config(key, format!("expected a non-negative integer, got {other}"))),
    }
}

impl SystemConfig {
    /// Parses a TOML document, filling unspecified keys with defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse()?;
        let mut cfg = SystemConfig::default();
        for (key, value) in &table {
            let dim = KEYS
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, d)| *d)
                .ok_or_else(|| Error::config(key, "unknown key"))?;
            cfg.apply(key, dim, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, dim: Dim, value: &toml::Value) -> Result<()> {
        let scalar = |v: &toml::Value| parse_scalar(key, dim, v);
        match key {
            "num_tds" => self.num_tds = parse_count(key, value)? as usize,
            "horizon_T" => self.horizon = parse_count(key, value)? as usize,
            "seed" => self.seed = parse_count(key, value)?,
            "bandwidth_B" => self.bandwidth = scalar(value)?,
            "noise_psd" => self.noise_psd = scalar(value)?,
            "intensity_I" => self.intensity = parse_per_td(key, dim, value)?,
            "kappa_local" => self.kappa_local = parse_per_td(key, dim, value)?,
            "kappa_mec" => self.kappa_mec = scalar(value)?,
            "slot_tau" => self.slot_tau = scalar(value)?,
            "V" => self.v = scalar(value)?,
            "a" => self.a = scalar(value)?,
            "k" => self.k = scalar(value)?,
            "p_exp" => self.p_exp = scalar(value)?,
            "U" => self.u = scalar(value)?,
            "Q_avg" => self.q_avg = scalar(value)?,
            "R_avg" => self.r_avg = scalar(value)?,
            "f_local_max" => self.f_local_max = parse_per_td(key, dim, value)?,
            "F_mec" => self.f_mec = scalar(value)?,
            "p_uplink_max" => self.p_uplink_max = parse_per_td(key, dim, value)?,
            "P_mec" => self.p_mec = scalar(value)?,
            "beta_min" => self.beta_min = scalar(value)?,
            "antenna_gain_A" => self.antenna_gain = scalar(value)?,
            "carrier_fc" => self.carrier_fc = scalar(value)?,
            "pathloss_exp_ell" => self.pathloss_exp = scalar(value)?,
            "rician_gamma" => self.rician_gamma = scalar(value)?,
            "distances" => {
                self.distances = match parse_per_td(key, dim, value)? {
                    PerTd::PerDevice(v) => v,
                    PerTd::Uniform(_) => return Err(Error::config(key, "expected a list of distances")),
                }
            }
            "arrival_mean_lambda" => self.arrival_mean_lambda = parse_per_td(key, dim, value)?,
            "arrival_mode" | "channel_mode" => {
                let s = value
                    .as_str()
                    .ok_or_else(|| Error::config(key, "expected \"stochastic\" or \"fixed\""))?;
                let stochastic = match s {
                    "stochastic" => true,
                    "fixed" => false,
                    _ => return Err(Error::config(key, format!("`{s}` is not \"stochastic\" or \"fixed\""))),
                };
                if key == "arrival_mode" {
                    self.arrival_mode = if stochastic { ArrivalMode::Stochastic } else { ArrivalMode::Fixed };
                } else {
                    self.channel_mode = if stochastic { ChannelMode::Stochastic } else { ChannelMode::Fixed };
                }
            }
            _ => unreachable!("key table and match arms out of sync: {key}"),
        }
        Ok(())
    }

    /// Checks every invariant and refreshes the cached noise power.
    pub fn validate(&mut self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be finite and > 0, got {v}")))
            }
        }
        fn non_negative(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be finite and >= 0, got {v}")))
            }
        }
        let n = self.num_tds;
        if n == 0 {
            return Err(Error::config("num_tds", "must be at least 1"));
        }
        let per_td = |key: &str, p: &PerTd, check: fn(&str, f64) -> Result<()>| -> Result<()> {
            if let PerTd::PerDevice(v) = p {
                if v.len() != n {
                    return Err(Error::config(key, format!("expected {n} entries, got {}", v.len())));
                }
            }
            p.values().into_iter().try_for_each(|x| check(key, x))
        };
        positive("bandwidth_B", self.bandwidth)?;
        if !self.noise_psd.is_finite() {
            return Err(Error::config("noise_psd", "must be finite"));
        }
        per_td("intensity_I", &self.intensity, positive)?;
        per_td("kappa_local", &self.kappa_local, positive)?;
        positive("kappa_mec", self.kappa_mec)?;
        positive("slot_tau", self.slot_tau)?;
        non_negative("V", self.v)?;
        positive("a", self.a)?;
        if !(self.k.is_finite() && self.k > 1.0) {
            return Err(Error::config("k", format!("must be > 1, got {}", self.k)));
        }
        positive("p_exp", self.p_exp)?;
        positive("U", self.u)?;
        non_negative("Q_avg", self.q_avg)?;
        non_negative("R_avg", self.r_avg)?;
        per_td("f_local_max", &self.f_local_max, positive)?;
        positive("F_mec", self.f_mec)?;
        per_td("p_uplink_max", &self.p_uplink_max, positive)?;
        positive("P_mec", self.p_mec)?;
        if !(self.beta_min > 0.0 && self.beta_min <= 1.0) {
            return Err(Error::config("beta_min", format!("must lie in (0, 1], got {}", self.beta_min)));
        }
        positive("antenna_gain_A", self.antenna_gain)?;
        positive("carrier_fc", self.carrier_fc)?;
        non_negative("pathloss_exp_ell", self.pathloss_exp)?;
        if !(0.0..=1.0).contains(&self.rician_gamma) {
            return Err(Error::config("rician_gamma", format!("must lie in [0, 1], got {}", self.rician_gamma)));
        }
        if !self.distances.is_empty() {
            if self.distances.len() != n {
                return Err(Error::config(
                    "distances",
                    format!("expected {n} entries, got {}", self.distances.len()),
                ));
            }
            self.distances.iter().try_for_each(|d| positive("distances", *d))?;
        }
        per_td("arrival_mean_lambda", &self.arrival_mean_lambda, non_negative)?;
        self.refresh_derived();
        positive("noise_psd", self.noise_power)
            .map_err(|_| Error::config("noise_psd", "derived noise power must be > 0"))?;
        Ok(())
    }

    fn refresh_derived(&mut self) {
        self.noise_power = 10f64.powf((self.noise_psd - 30.0) / 10.0) * self.bandwidth;
    }

    /// Noise power over one sub-channel (W): PSD in W/Hz times bandwidth.
    #[inline]
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Distance of device `n` from the base station (m).
    pub fn distance(&self, n: usize) -> f64 {
        if let Some(d) = self.distances.get(n) {
            return *d;
        }
        if self.num_tds == 1 {
            return 120.0;
        }
        120.0 + (255.0 - 120.0) * n as f64 / (self.num_tds - 1) as f64
    }

    /// Overrides one numeric parameter by its config-file name and re-validates.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        match name {
            "V" => cfg.v = value,
            "arrival_mean_lambda" => cfg.arrival_mean_lambda = PerTd::Uniform(value),
            "Q_avg" => cfg.q_avg = value,
            "R_avg" => cfg.r_avg = value,
            "beta_min" => cfg.beta_min = value,
            "p_exp" => cfg.p_exp = value,
            "num_tds" => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::config("num_tds", format!("must be a positive integer, got {value}")));
                }
                cfg.num_tds = value as usize;
                cfg.distances.clear();
            }
            other => return Err(Error::config(other, "not a sweepable parameter")),
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The config rendered as TOML with plain SI numbers; reloads to an equal config.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// SHA-256 over the canonical JSON rendering of the config.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_vec(self).expect("config is always serializable");
        hex::encode(Sha256::digest(&json))
    }
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SystemConfig::from_toml_str(&text)
}
