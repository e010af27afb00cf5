//! Transmit covariances, the radar/uplink/downlink SINRs, and the receive
//! beampattern gain.
//!
//! All SINRs are evaluated in the covariance domain. [`simulate`] provides a
//! symbol-level Monte-Carlo estimator of the same quantities.

use serde::{Deserialize, Serialize};

use crate::linalg::{hquad, outer, trace_re};
use crate::scenario::{make_steering, ChannelSet};
use crate::{CMat, CVec, Error, Result};

pub mod simulate;

/// Anything that fixes the downlink covariance `Q` and the uplink powers.
pub trait Design {
    /// Transmit covariance `Q = sum_l V_l + V_0`.
    fn covariance(&self) -> CMat;
    fn uplink_powers(&self) -> &[f64];
    fn total_power(&self) -> f64 {
        trace_re(&self.covariance()) + self.uplink_powers().iter().sum::<f64>()
    }
}

/// Rank-one downlink beams, radar covariance and uplink powers.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitDesign {
    pub v_dl: Vec<CVec>,
    pub v0: CMat,
    pub p_ul: Vec<f64>,
}

/// Semidefinite-relaxed design: each downlink beam replaced by a PSD matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedDesign {
    pub v_dl: Vec<CMat>,
    pub v0: CMat,
    pub p_ul: Vec<f64>,
}

impl TransmitDesign {
    pub fn zeros(n_tx: usize, n_dl: usize, n_ul: usize) -> Self {
        Self {
            v_dl: vec![CVec::zeros(n_tx); n_dl],
            v0: CMat::zeros(n_tx, n_tx),
            p_ul: vec![0.0; n_ul],
        }
    }

    pub fn relaxed(&self) -> RelaxedDesign {
        RelaxedDesign {
            v_dl: self.v_dl.iter().map(|v| outer(v, v)).collect(),
            v0: self.v0.clone(),
            p_ul: self.p_ul.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::linalg::psd_factor(&self.v0, "V0")?;
        check_powers(&self.p_ul)
    }
}

impl RelaxedDesign {
    pub fn zeros(n_tx: usize, n_dl: usize, n_ul: usize) -> Self {
        Self {
            v_dl: vec![CMat::zeros(n_tx, n_tx); n_dl],
            v0: CMat::zeros(n_tx, n_tx),
            p_ul: vec![0.0; n_ul],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.v_dl {
            crate::linalg::psd_factor(v, "V_l")?;
        }
        crate::linalg::psd_factor(&self.v0, "V0")?;
        check_powers(&self.p_ul)
    }
}

fn check_powers(p: &[f64]) -> Result<()> {
    match p.iter().position(|&x| !(x >= 0.0)) {
        Some(k) => Err(Error::Domain(format!("uplink power p[{k}] = {} is negative", p[k]))),
        None => Ok(()),
    }
}

impl Design for TransmitDesign {
    fn covariance(&self) -> CMat {
        self.v_dl.iter().fold(self.v0.clone(), |q, v| q + outer(v, v))
    }

    fn uplink_powers(&self) -> &[f64] {
        &self.p_ul
    }
}

impl Design for RelaxedDesign {
    fn covariance(&self) -> CMat {
        self.v_dl.iter().fold(self.v0.clone(), |q, v| q + v)
    }

    fn uplink_powers(&self) -> &[f64] {
        &self.p_ul
    }
}

/// Linear-scale SINRs of every link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrReport {
    pub radar: f64,
    pub uplink: Vec<f64>,
    pub downlink: Vec<f64>,
}

impl SinrReport {
    /// Flat `(name, value)` list in CSV column order.
    pub fn entries(&self) -> Vec<(String, f64)> {
        let mut out = vec![("radar".to_string(), self.radar)];
        out.extend(self.uplink.iter().enumerate().map(|(k, &x)| (format!("ul{}", k + 1), x)));
        out.extend(self.downlink.iter().enumerate().map(|(l, &x)| (format!("dl{}", l + 1), x)));
        out
    }
}

pub fn covariance_q<D: Design>(d: &D) -> CMat {
    d.covariance()
}

/// Clutter-plus-SI matrix `B = sum_i beta_i A_i + H_SI` and the same with the
/// target included, `C = B + beta_0 A_0`.
pub fn interference_matrices(ch: &ChannelSet) -> (CMat, CMat) {
    let b = ch
        .interferers
        .iter()
        .fold(ch.h_si.clone(), |acc, r| acc + r.steering_matrix() * r.amp);
    let c = &b + ch.target.steering_matrix() * ch.target.amp;
    (b, c)
}

/// `sum_k p_k h_k h_k^H`, skipping user `skip`.
pub(crate) fn uplink_covariance(ch: &ChannelSet, p: &[f64], skip: Option<usize>) -> CMat {
    let mut acc = CMat::zeros(ch.n_rx, ch.n_rx);
    for (k, (h, &pk)) in ch.h_ul.iter().zip(p).enumerate() {
        if Some(k) != skip && pk != 0.0 {
            acc += outer(h, h).scale(pk);
        }
    }
    acc
}

fn nonzero(v: &CVec, what: &str) -> Result<()> {
    if v.iter().all(|x| x.norm_sqr() == 0.0) {
        Err(Error::Domain(format!("{what} is the zero vector")))
    } else {
        Ok(())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Radar SINR at the output of combiner `u`.
pub fn radar_sinr<D: Design>(d: &D, u: &CVec, ch: &ChannelSet) -> Result<f64> {
    nonzero(u, "radar combiner")?;
    let q = d.covariance();
    let (b, _) = interference_matrices(ch);
    // u^H A0 = (u^H a_r0) a_t0^H
    let num = ch.target_gain() * u.dotc(ch.a_r0()).norm_sqr() * hquad(ch.a_t0(), &q);
    let bu = b.adjoint() * u;
    let mut den = hquad(&bu, &q) + ch.noise_bs * u.norm_squared();
    for (h, &p) in ch.h_ul.iter().zip(d.uplink_powers()) {
        den += p * h.dotc(u).norm_sqr();
    }
    Ok(ratio(num, den))
}

/// Uplink SINR of every user at the output of its combiner.
pub fn uplink_sinr<D: Design>(d: &D, w: &[CVec], ch: &ChannelSet) -> Result<Vec<f64>> {
    if w.len() != ch.n_ul() {
        return Err(Error::Domain(format!("{} combiners for {} uplink users", w.len(), ch.n_ul())));
    }
    let q = d.covariance();
    let (_, c) = interference_matrices(ch);
    let p = d.uplink_powers();
    w.iter()
        .enumerate()
        .map(|(k, wk)| {
            nonzero(wk, "uplink combiner")?;
            let num = p[k] * ch.h_ul[k].dotc(wk).norm_sqr();
            let cw = c.adjoint() * wk;
            let mut den = hquad(&cw, &q) + ch.noise_bs * wk.norm_squared();
            for (j, h) in ch.h_ul.iter().enumerate() {
                if j != k {
                    den += p[j] * h.dotc(wk).norm_sqr();
                }
            }
            Ok(ratio(num, den))
        })
        .collect()
}

/// Downlink SINR of every user for rank-one beams.
pub fn downlink_sinr(d: &TransmitDesign, ch: &ChannelSet) -> Vec<f64> {
    ch.g_dl
        .iter()
        .enumerate()
        .map(|(l, g)| {
            let gains: Vec<f64> = d.v_dl.iter().map(|v| g.dotc(v).norm_sqr()).collect();
            let leak: f64 = gains.iter().enumerate().filter(|&(j, _)| j != l).map(|(_, x)| x).sum();
            ratio(gains[l], leak + hquad(g, &d.v0) + ch.noise_dl[l])
        })
        .collect()
}

/// Downlink SINR of a relaxed design, `g^H V_l g` as useful power.
pub fn downlink_sinr_relaxed(d: &RelaxedDesign, ch: &ChannelSet) -> Vec<f64> {
    let q = d.covariance();
    ch.g_dl
        .iter()
        .zip(&d.v_dl)
        .zip(&ch.noise_dl)
        .map(|((g, v), &noise)| {
            let own = hquad(g, v);
            ratio(own, (hquad(g, &q) - own).max(0.0) + noise)
        })
        .collect()
}

/// Expected receive beampattern gain `u^H a_r(θ) a_t(θ)^H Q a_t(θ) a_r(θ)^H u /
/// (σ_r² u^H u)` on each grid angle.
pub fn beampattern_gain<D: Design>(u: &CVec, d: &D, ch: &ChannelSet, angle_grid: &[f64]) -> Result<Vec<f64>> {
    nonzero(u, "radar combiner")?;
    let q = d.covariance();
    let norm = ch.noise_bs * u.norm_squared();
    Ok(angle_grid
        .iter()
        .map(|&theta| {
            let a_t = make_steering(theta, ch.n_tx);
            let a_r = make_steering(theta, ch.n_rx);
            u.dotc(&a_r).norm_sqr() * hquad(&a_t, &q) / norm
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{realize_channels, SystemConfig};
    use crate::C64;

    fn quiet_channels(cfg: &SystemConfig) -> ChannelSet {
        let mut ch = realize_channels(cfg, 1);
        ch.h_si.fill(C64::new(0.0, 0.0));
        ch.interferers.clear();
        ch
    }

    fn e(n: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn covariance_of_single_beam() {
        let d = TransmitDesign { v_dl: vec![e(3, 0)], v0: CMat::zeros(3, 3), p_ul: vec![] };
        assert_eq!(covariance_q(&d), outer(&e(3, 0), &e(3, 0)));
    }

    #[test]
    fn covariance_identity_pass_through() {
        let d = TransmitDesign { v_dl: vec![CVec::zeros(3); 2], v0: CMat::identity(3, 3), p_ul: vec![] };
        assert_eq!(covariance_q(&d), CMat::identity(3, 3));
    }

    #[test]
    fn interference_difference_is_target_channel() {
        let ch = realize_channels(&SystemConfig::default(), 4);
        let (b, c) = interference_matrices(&ch);
        let diff = &c - &b - ch.target.steering_matrix() * ch.target.amp;
        assert!(diff.norm() < 1e-18);

        let quiet = quiet_channels(&SystemConfig::default());
        let (b, c) = interference_matrices(&quiet);
        assert_eq!(b.norm(), 0.0);
        assert!((c - quiet.target.steering_matrix() * quiet.target.amp).norm() == 0.0);
    }

    #[test]
    fn radar_sinr_isotropic_matched() {
        let cfg = SystemConfig { n_tx: 4, n_rx: 6, ..SystemConfig::default() }.without_uplink();
        let ch = quiet_channels(&cfg);
        let d = RelaxedDesign { v_dl: vec![CMat::zeros(4, 4); 3], v0: CMat::identity(4, 4), p_ul: vec![] };
        let got = radar_sinr(&d, ch.a_r0(), &ch).unwrap();
        let want = ch.target_gain() * 4.0 * 6.0 / ch.noise_bs;
        assert!((got / want - 1.0).abs() < 1e-12);
        let scaled = ch.a_r0() * C64::new(0.0, 3.0);
        assert!((radar_sinr(&d, &scaled, &ch).unwrap() / got - 1.0).abs() < 1e-12);
        assert!(radar_sinr(&d, &CVec::zeros(6), &ch).is_err());
    }

    #[test]
    fn uplink_matched_filter_without_interference() {
        let cfg = SystemConfig { n_ul_users: 1, ul_sinr_db: vec![5.0], ..SystemConfig::default() };
        let ch = realize_channels(&cfg, 2);
        let d = TransmitDesign { v_dl: vec![CVec::zeros(8); 3], v0: CMat::zeros(8, 8), p_ul: vec![0.7] };
        let got = uplink_sinr(&d, &ch.h_ul, &ch).unwrap()[0];
        let want = 0.7 * ch.h_ul[0].norm_squared() / ch.noise_bs;
        assert!((got / want - 1.0).abs() < 1e-12);
        let d0 = TransmitDesign { p_ul: vec![0.0], ..d };
        assert_eq!(uplink_sinr(&d0, &ch.h_ul, &ch).unwrap()[0], 0.0);
        assert!(uplink_sinr(&d0, &[CVec::zeros(8)], &ch).is_err());
    }

    #[test]
    fn downlink_mrt_and_orthogonal() {
        let cfg = SystemConfig { n_dl_users: 1, dl_sinr_db: vec![8.0], noise_dl_dbm: vec![-100.0], ..SystemConfig::default() };
        let ch = realize_channels(&cfg, 2);
        let g = ch.g_dl[0].clone();
        let d = TransmitDesign { v_dl: vec![g.clone()], v0: CMat::zeros(8, 8), p_ul: vec![0.0; 3] };
        let got = downlink_sinr(&d, &ch)[0];
        let want = g.norm_squared().powi(2) / ch.noise_dl[0];
        assert!((got / want - 1.0).abs() < 1e-12);

        // a vector orthogonal to g
        let mut v = CVec::zeros(8);
        v[0] = g[1].conj();
        v[1] = -g[0].conj();
        let d = TransmitDesign { v_dl: vec![v], ..d };
        assert!(downlink_sinr(&d, &ch)[0] < 1e-28);
    }

    #[test]
    fn beampattern_matched_and_null() {
        let cfg = SystemConfig::default();
        let ch = realize_channels(&cfg, 0);
        let d = RelaxedDesign { v_dl: vec![], v0: CMat::identity(8, 8), p_ul: vec![] };
        let theta = 20.0;
        let a_r = make_steering(theta, 8);
        let got = beampattern_gain(&a_r, &d, &ch, &[theta]).unwrap()[0];
        let want = 8.0 * 8.0 / ch.noise_bs;
        assert!((got / want - 1.0).abs() < 1e-12);

        let u = e(8, 0);
        let u = &u - &a_r * (a_r.dotc(&u) / a_r.norm_squared());
        let got = beampattern_gain(&u, &d, &ch, &[theta]).unwrap()[0];
        assert!(got < 1e-12 * want);
    }

    #[test]
    fn trace_identity() {
        let ch = realize_channels(&SystemConfig::default(), 9);
        let d = TransmitDesign { v_dl: ch.g_dl.clone(), v0: CMat::identity(8, 8).scale(0.3), p_ul: vec![0.1; 3] };
        let want: f64 = ch.g_dl.iter().map(|g| g.norm_squared()).sum::<f64>() + 2.4;
        let got = trace_re(&covariance_q(&d));
        assert!((got / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radar_sinr_monotone_in_target_gain() {
        let ch = realize_channels(&SystemConfig::default(), 3);
        let d = TransmitDesign { v_dl: ch.g_dl.clone(), v0: CMat::identity(8, 8), p_ul: vec![1e-3; 3] };
        let mut last = 0.0;
        for scale in [0.5, 1.0, 2.0, 4.0] {
            let mut c2 = ch.clone();
            c2.target.amp *= scale;
            let s = radar_sinr(&d, c2.a_r0(), &c2).unwrap();
            assert!(s >= last);
            last = s;
        }
    }
}
