//! Closed-form optimal receive combiners and the SINRs they achieve.
//!
//! Both SINRs are generalized Rayleigh quotients in the combiner, so the
//! maximizers are whitened matched filters: `u* = Ψ⁻¹ a_r0` for the radar and
//! `w_k* = Φ_k⁻¹ h_k` for uplink user `k`, where
//!
//! * `Ψ = Σ_k p_k h_k h_kᴴ + B Q Bᴴ + σ_r² I`
//! * `Φ_k = Σ_{j≠k} p_j h_j h_jᴴ + C Q Cᴴ + σ_r² I`
//!
//! Both matrices are at least `σ_r² I`, so Cholesky solves always succeed.
//! Combiners are returned unnormalized.

use crate::linalg::{cholesky, hquad, hermitian_part};
use crate::metrics::{interference_matrices, uplink_covariance, Design};
use crate::scenario::ChannelSet;
use crate::{CMat, CVec, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveDesign {
    /// Radar combiner.
    pub u: CVec,
    /// Uplink combiners, one per uplink user.
    pub w_ul: Vec<CVec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningMatrices {
    pub psi: CMat,
    pub phi: Vec<CMat>,
}

/// `Ψ` from an uplink covariance and `Q`.
pub(crate) fn psi_matrix(ch: &ChannelSet, b: &CMat, q: &CMat, p: &[f64]) -> CMat {
    let mut psi = uplink_covariance(ch, p, None) + b * q * b.adjoint();
    for i in 0..ch.n_rx {
        psi[(i, i)] += ch.noise_bs;
    }
    hermitian_part(&psi)
}

/// `Φ_k` for every uplink user.
pub(crate) fn phi_matrices(ch: &ChannelSet, c: &CMat, q: &CMat, p: &[f64]) -> Vec<CMat> {
    let mut base = c * q * c.adjoint();
    for i in 0..ch.n_rx {
        base[(i, i)] += ch.noise_bs;
    }
    let total = uplink_covariance(ch, p, None);
    (0..ch.n_ul())
        .map(|k| {
            let own = crate::linalg::outer(&ch.h_ul[k], &ch.h_ul[k]).scale(p[k]);
            hermitian_part(&(&base + &total - own))
        })
        .collect()
}

pub fn build_whitening<D: Design>(d: &D, ch: &ChannelSet) -> WhiteningMatrices {
    let q = d.covariance();
    let p = d.uplink_powers();
    let (b, c) = interference_matrices(ch);
    WhiteningMatrices { psi: psi_matrix(ch, &b, &q, p), phi: phi_matrices(ch, &c, &q, p) }
}

pub fn optimal_receivers<D: Design>(d: &D, ch: &ChannelSet) -> Result<ReceiveDesign> {
    let wm = build_whitening(d, ch);
    let u = cholesky(&wm.psi, "Psi")?.solve(ch.a_r0());
    let w_ul = wm
        .phi
        .iter()
        .zip(&ch.h_ul)
        .map(|(phi, h)| Ok(cholesky(phi, "Phi_k")?.solve(h)))
        .collect::<Result<_>>()?;
    Ok(ReceiveDesign { u, w_ul })
}

/// Radar SINR at `u*`: `|β₀|² a_t0ᴴ Q a_t0 · a_r0ᴴ Ψ⁻¹ a_r0`.
pub fn reduced_radar_sinr<D: Design>(d: &D, ch: &ChannelSet) -> Result<f64> {
    let q = d.covariance();
    let (b, _) = interference_matrices(ch);
    let psi = psi_matrix(ch, &b, &q, d.uplink_powers());
    let tx = hquad(ch.a_t0(), &q);
    if tx == 0.0 {
        return Ok(0.0);
    }
    let z = cholesky(&psi, "Psi")?.solve(ch.a_r0());
    Ok(ch.target_gain() * tx * ch.a_r0().dotc(&z).re)
}

/// Uplink SINRs at `w_k*`: `p_k h_kᴴ Φ_k⁻¹ h_k`.
pub fn reduced_uplink_sinr<D: Design>(d: &D, ch: &ChannelSet) -> Result<Vec<f64>> {
    let q = d.covariance();
    let p = d.uplink_powers();
    let (_, c) = interference_matrices(ch);
    phi_matrices(ch, &c, &q, p)
        .iter()
        .enumerate()
        .map(|(k, phi)| {
            if p[k] == 0.0 {
                return Ok(0.0);
            }
            let z = cholesky(phi, "Phi_k")?.solve(&ch.h_ul[k]);
            Ok(p[k] * ch.h_ul[k].dotc(&z).re)
        })
        .collect()
}

/// SINRs of every link when the closed-form combiners are used.
pub fn reduced_sinrs(d: &crate::RelaxedDesign, ch: &ChannelSet) -> Result<crate::SinrReport> {
    Ok(crate::SinrReport {
        radar: reduced_radar_sinr(d, ch)?,
        uplink: reduced_uplink_sinr(d, ch)?,
        downlink: crate::metrics::downlink_sinr_relaxed(d, ch),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::outer;
    use crate::metrics::{radar_sinr, uplink_sinr, RelaxedDesign, TransmitDesign};
    use crate::scenario::{realize_channels, SystemConfig};
    use crate::C64;

    fn parallel(a: &CVec, b: &CVec) -> bool {
        let cos = a.dotc(b).norm() / (a.norm() * b.norm());
        (cos - 1.0).abs() < 1e-12
    }

    fn design(ch: &ChannelSet) -> TransmitDesign {
        TransmitDesign {
            v_dl: ch.g_dl.iter().map(|g| g.unscale(g.norm())).collect(),
            v0: CMat::identity(ch.n_tx, ch.n_tx).scale(0.1),
            p_ul: vec![0.3, 0.6, 0.9],
        }
    }

    #[test]
    fn noise_only_gives_matched_filters() {
        let ch = realize_channels(&SystemConfig::default(), 2);
        let d = RelaxedDesign::zeros(8, 3, 3);
        let wm = build_whitening(&d, &ch);
        let want = CMat::identity(8, 8).scale(ch.noise_bs);
        assert!((&wm.psi - &want).norm() < 1e-24);
        for phi in &wm.phi {
            assert!((phi - &want).norm() < 1e-24);
        }
        let rx = optimal_receivers(&d, &ch).unwrap();
        assert!(parallel(&rx.u, ch.a_r0()));
        for (w, h) in rx.w_ul.iter().zip(&ch.h_ul) {
            assert!(parallel(w, h));
        }
    }

    #[test]
    fn own_power_excluded_from_phi() {
        let cfg = SystemConfig { n_ul_users: 1, ul_sinr_db: vec![5.0], ..SystemConfig::default() };
        let ch = realize_channels(&cfg, 2);
        let d = RelaxedDesign { p_ul: vec![5.0], ..RelaxedDesign::zeros(8, 3, 1) };
        let wm = build_whitening(&d, &ch);
        assert!((&wm.phi[0] - CMat::identity(8, 8).scale(ch.noise_bs)).norm() < 1e-24);
        let got = reduced_uplink_sinr(&d, &ch).unwrap()[0];
        let want = 5.0 * ch.h_ul[0].norm_squared() / ch.noise_bs;
        assert!((got / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psi_matches_resummation() {
        let ch = realize_channels(&SystemConfig::default(), 6);
        let d = design(&ch);
        let q = crate::metrics::covariance_q(&d);
        let mut want = CMat::identity(8, 8).scale(ch.noise_bs);
        for (h, &p) in ch.h_ul.iter().zip(&d.p_ul) {
            want += outer(h, h).scale(p);
        }
        let mut b = ch.h_si.clone();
        for r in &ch.interferers {
            b += outer(&r.a_r, &r.a_t) * r.amp;
        }
        want += &b * &q * b.adjoint();
        let wm = build_whitening(&d, &ch);
        assert!((&wm.psi - &want).norm() <= 1e-12 * want.norm());
    }

    #[test]
    fn reduced_equals_full_at_optimum() {
        let ch = realize_channels(&SystemConfig::default(), 8);
        let d = design(&ch);
        let rx = optimal_receivers(&d, &ch).unwrap();
        let full = radar_sinr(&d, &rx.u, &ch).unwrap();
        let reduced = reduced_radar_sinr(&d, &ch).unwrap();
        assert!((full / reduced - 1.0).abs() < 1e-9);
        let full = uplink_sinr(&d, &rx.w_ul, &ch).unwrap();
        let reduced = reduced_uplink_sinr(&d, &ch).unwrap();
        for (f, r) in full.iter().zip(&reduced) {
            assert!((f / r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_transmit_gives_zero_radar_sinr() {
        let ch = realize_channels(&SystemConfig::default(), 1);
        let d = RelaxedDesign { p_ul: vec![1.0; 3], ..RelaxedDesign::zeros(8, 3, 3) };
        assert_eq!(reduced_radar_sinr(&d, &ch).unwrap(), 0.0);
    }

    #[test]
    fn isotropic_radar_no_clutter() {
        let cfg = SystemConfig::default().without_uplink();
        let mut ch = realize_channels(&cfg, 1);
        ch.h_si.fill(C64::new(0.0, 0.0));
        ch.interferers.clear();
        let d = RelaxedDesign { v0: CMat::identity(8, 8), ..RelaxedDesign::zeros(8, 3, 0) };
        let got = reduced_radar_sinr(&d, &ch).unwrap();
        let want = ch.target_gain() * 64.0 / ch.noise_bs;
        assert!((got / want - 1.0).abs() < 1e-12);
    }
}
