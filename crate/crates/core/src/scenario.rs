//! Physical scenario: configuration, steering vectors, and seeded channel
//! realizations.
//!
//! Configuration values are stored in dB/dBm; everything in [`ChannelSet`] is
//! linear scale with powers in milliwatts. Gains given in "dBm" (target and
//! interferer channel power gains) are read as plain dB numbers, so
//! `-100 dBm` becomes the dimensionless gain `1e-10`.
//!
//! Channel randomness comes from ChaCha20 seeded with the scenario seed, with a
//! separate ChaCha stream for each channel object (see [`stream`]). Adding
//! users therefore never perturbs the self-interference draw and vice versa.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{db_to_linear, outer};
use crate::{CMat, CVec, Error, Result, C64};

/// ChaCha stream identifiers, one per channel object.
pub mod stream {
    pub const UPLINK: u64 = 1;
    pub const DOWNLINK: u64 = 2;
    pub const REFLECTOR_PHASES: u64 = 3;
    pub const SELF_INTERFERENCE: u64 = 4;
    pub const SYMBOLS: u64 = 16;
}

/// Missing keys take the reference-scenario value; unknown keys are errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_ul_users: usize,
    pub n_dl_users: usize,
    pub target_angle_deg: f64,
    pub interferer_angles_deg: Vec<f64>,
    pub target_gain_dbm: f64,
    pub interferer_gains_dbm: Vec<f64>,
    pub pathloss_db: f64,
    pub si_attenuation_db: f64,
    pub noise_bs_dbm: f64,
    pub noise_dl_dbm: Vec<f64>,
    pub radar_sinr_db: f64,
    pub ul_sinr_db: Vec<f64>,
    pub dl_sinr_db: Vec<f64>,
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    /// Eight-antenna full-duplex base station with three uplink and three
    /// downlink users, a broadside target and interferers at -60° and 45°.
    fn default() -> Self {
        Self {
            n_tx: 8,
            n_rx: 8,
            n_ul_users: 3,
            n_dl_users: 3,
            target_angle_deg: 0.0,
            interferer_angles_deg: vec![-60.0, 45.0],
            target_gain_dbm: -100.0,
            interferer_gains_dbm: vec![-90.0, -90.0],
            pathloss_db: -99.0,
            si_attenuation_db: -110.0,
            noise_bs_dbm: -100.0,
            noise_dl_dbm: vec![-100.0; 3],
            radar_sinr_db: 6.0,
            ul_sinr_db: vec![5.0; 3],
            dl_sinr_db: vec![8.0; 3],
            rng_seed: 0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_tx == 0 {
            return bad("n_tx must be at least 1".into());
        }
        if self.n_rx == 0 {
            return bad("n_rx must be at least 1".into());
        }
        let lists: [(&str, usize, usize); 4] = [
            ("interferer_gains_dbm", self.interferer_gains_dbm.len(), self.interferer_angles_deg.len()),
            ("noise_dl_dbm", self.noise_dl_dbm.len(), self.n_dl_users),
            ("ul_sinr_db", self.ul_sinr_db.len(), self.n_ul_users),
            ("dl_sinr_db", self.dl_sinr_db.len(), self.n_dl_users),
        ];
        for (key, got, want) in lists {
            if got != want {
                return bad(format!("{key} has {got} entries, expected {want}"));
            }
        }
        let scalars = [
            ("target_angle_deg", self.target_angle_deg),
            ("target_gain_dbm", self.target_gain_dbm),
            ("pathloss_db", self.pathloss_db),
            ("si_attenuation_db", self.si_attenuation_db),
            ("noise_bs_dbm", self.noise_bs_dbm),
            ("radar_sinr_db", self.radar_sinr_db),
        ];
        for (key, v) in scalars {
            if !v.is_finite() {
                return bad(format!("{key} must be finite"));
            }
        }
        let vectors: [(&str, &[f64]); 5] = [
            ("interferer_angles_deg", &self.interferer_angles_deg),
            ("interferer_gains_dbm", &self.interferer_gains_dbm),
            ("noise_dl_dbm", &self.noise_dl_dbm),
            ("ul_sinr_db", &self.ul_sinr_db),
            ("dl_sinr_db", &self.dl_sinr_db),
        ];
        for (key, vs) in vectors {
            if let Some(i) = vs.iter().position(|v| !v.is_finite()) {
                return bad(format!("{key}[{i}] must be finite"));
            }
        }
        let in_range = |a: f64| (-90.0..=90.0).contains(&a);
        if !in_range(self.target_angle_deg) {
            return bad("target_angle_deg must lie in [-90, 90]".into());
        }
        for (i, &a) in self.interferer_angles_deg.iter().enumerate() {
            if !in_range(a) {
                return bad(format!("interferer_angles_deg[{i}] must lie in [-90, 90]"));
            }
            if a == self.target_angle_deg {
                return bad(format!("interferer_angles_deg[{i}] coincides with the target angle"));
            }
            if self.interferer_angles_deg[..i].contains(&a) {
                return bad(format!("interferer_angles_deg[{i}] is duplicated"));
            }
        }
        Ok(())
    }

    pub fn with_antennas(mut self, n: usize) -> Self {
        self.n_tx = n;
        self.n_rx = n;
        self
    }

    pub fn with_radar_sinr_db(mut self, db: f64) -> Self {
        self.radar_sinr_db = db;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// Same scenario with all uplink users removed.
    pub fn without_uplink(mut self) -> Self {
        self.n_ul_users = 0;
        self.ul_sinr_db.clear();
        self
    }

    /// Same scenario with all downlink users removed.
    pub fn without_downlink(mut self) -> Self {
        self.n_dl_users = 0;
        self.dl_sinr_db.clear();
        self.noise_dl_dbm.clear();
        self
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            radar: db_to_linear(self.radar_sinr_db),
            uplink: self.ul_sinr_db.iter().map(|&x| db_to_linear(x)).collect(),
            downlink: self.dl_sinr_db.iter().map(|&x| db_to_linear(x)).collect(),
        }
    }
}

/// Linear-scale SINR thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub radar: f64,
    pub uplink: Vec<f64>,
    pub downlink: Vec<f64>,
}

/// A point reflector (target or clutter) with two-way channel `amp * a_r a_t^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflector {
    pub angle_deg: f64,
    pub amp: C64,
    pub a_t: CVec,
    pub a_r: CVec,
}

impl Reflector {
    /// Two-way channel `a_r a_t^H` without the amplitude.
    pub fn steering_matrix(&self) -> CMat {
        outer(&self.a_r, &self.a_t)
    }

    pub fn gain(&self) -> f64 {
        self.amp.norm_sqr()
    }
}

/// One realization of every channel in the scenario, linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub n_tx: usize,
    pub n_rx: usize,
    /// Uplink channels `h_k`, length `n_rx`.
    pub h_ul: Vec<CVec>,
    /// Downlink channels `g_l`, length `n_tx`.
    pub g_dl: Vec<CVec>,
    pub target: Reflector,
    pub interferers: Vec<Reflector>,
    /// Residual self-interference channel, `n_rx x n_tx`.
    pub h_si: CMat,
    pub noise_bs: f64,
    pub noise_dl: Vec<f64>,
}

impl ChannelSet {
    pub fn n_ul(&self) -> usize {
        self.h_ul.len()
    }

    pub fn n_dl(&self) -> usize {
        self.g_dl.len()
    }

    pub fn a_t0(&self) -> &CVec {
        &self.target.a_t
    }

    pub fn a_r0(&self) -> &CVec {
        &self.target.a_r
    }

    pub fn target_gain(&self) -> f64 {
        self.target.gain()
    }

    pub fn without_uplink(mut self) -> Self {
        self.h_ul.clear();
        self
    }

    pub fn without_downlink(mut self) -> Self {
        self.g_dl.clear();
        self.noise_dl.clear();
        self
    }
}

/// ULA steering vector with half-wavelength spacing: entry `m` is
/// `exp(j pi m sin(angle))`.
pub fn make_steering(angle_deg: f64, n: usize) -> CVec {
    let phase = PI * angle_deg.to_radians().sin();
    CVec::from_iterator(n, (0..n).map(|m| C64::from_polar(1.0, phase * m as f64)))
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
}

fn gaussian_vector(rng: &mut ChaCha20Rng, n: usize, variance: f64) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| complex_gaussian(rng, variance)))
}

/// Draws every channel of `cfg` from `seed`. Pure in `(cfg, seed)`.
pub fn realize_channels(cfg: &SystemConfig, seed: u64) -> ChannelSet {
    let user_var = db_to_linear(cfg.pathloss_db);

    let mut rng = stream_rng(seed, stream::UPLINK);
    let h_ul = (0..cfg.n_ul_users)
        .map(|_| gaussian_vector(&mut rng, cfg.n_rx, user_var))
        .collect();

    let mut rng = stream_rng(seed, stream::DOWNLINK);
    let g_dl = (0..cfg.n_dl_users)
        .map(|_| gaussian_vector(&mut rng, cfg.n_tx, user_var))
        .collect();

    let mut rng = stream_rng(seed, stream::REFLECTOR_PHASES);
    let mut reflector = |angle_deg: f64, gain_db: f64| Reflector {
        angle_deg,
        amp: random_phase(&mut rng) * db_to_linear(gain_db).sqrt(),
        a_t: make_steering(angle_deg, cfg.n_tx),
        a_r: make_steering(angle_deg, cfg.n_rx),
    };
    let target = reflector(cfg.target_angle_deg, cfg.target_gain_dbm);
    let interferers = cfg
        .interferer_angles_deg
        .iter()
        .zip(&cfg.interferer_gains_dbm)
        .map(|(&a, &g)| reflector(a, g))
        .collect();

    let mut rng = stream_rng(seed, stream::SELF_INTERFERENCE);
    let si_amp = db_to_linear(cfg.si_attenuation_db).sqrt();
    let h_si = CMat::from_fn(cfg.n_rx, cfg.n_tx, |_, _| random_phase(&mut rng) * si_amp);

    ChannelSet {
        n_tx: cfg.n_tx,
        n_rx: cfg.n_rx,
        h_ul,
        g_dl,
        target,
        interferers,
        h_si,
        noise_bs: db_to_linear(cfg.noise_bs_dbm),
        noise_dl: cfg.noise_dl_dbm.iter().map(|&x| db_to_linear(x)).collect(),
    }
}

/// Configuration plus its channel realization at `cfg.rng_seed`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: SystemConfig,
    pub channels: ChannelSet,
}

impl Scenario {
    pub fn new(config: SystemConfig) -> Result<Self> {
        config.validate()?;
        let channels = realize_channels(&config, config.rng_seed);
        Ok(Self { config, channels })
    }
}
