//! Symbol-level Monte-Carlo estimate of the link SINRs.
//!
//! Each frame draws unit-power complex Gaussian data symbols for every
//! downlink and uplink user, a radar waveform `s_0 ~ CN(0, V_0)`, receiver
//! noise at the base station and at every downlink user, and forms the
//! received signals sample by sample. Useful and corrupting parts are kept
//! apart so their empirical powers can be compared against the closed forms.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{interference_matrices, SinrReport, TransmitDesign};
use crate::linalg::psd_factor;
use crate::receivers::ReceiveDesign;
use crate::scenario::{complex_gaussian, stream, ChannelSet};
use crate::{CVec, Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub sinr: SinrReport,
    /// Delta-method standard error of each ratio estimate.
    pub std_error: SinrReport,
}

/// Running sums for a ratio of two sample means.
#[derive(Debug, Clone, Copy, Default)]
struct RatioAcc {
    n: f64,
    sa: f64,
    sb: f64,
    saa: f64,
    sbb: f64,
    sab: f64,
}

impl RatioAcc {
    fn push(&mut self, a: f64, b: f64) {
        self.n += 1.0;
        self.sa += a;
        self.sb += b;
        self.saa += a * a;
        self.sbb += b * b;
        self.sab += a * b;
    }

    fn finish(&self) -> (f64, f64) {
        let n = self.n;
        let ma = self.sa / n;
        let mb = self.sb / n;
        if ma == 0.0 {
            return (0.0, 0.0);
        }
        let va = self.saa / n - ma * ma;
        let vb = self.sbb / n - mb * mb;
        let cab = self.sab / n - ma * mb;
        let r = ma / mb;
        let var = (va / (mb * mb) - 2.0 * r * cab / (mb * mb) + r * r * vb / (mb * mb)) / n;
        (r, var.max(0.0).sqrt())
    }
}

fn gaussian_vec(rng: &mut ChaCha20Rng, n: usize, var: f64) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| complex_gaussian(rng, var)))
}

/// Empirical SINRs of `d` received with combiners `rx` over `n_frames` frames.
pub fn simulate_symbols(
    d: &TransmitDesign,
    rx: &ReceiveDesign,
    ch: &ChannelSet,
    n_frames: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_frames == 0 {
        return Err(Error::Domain("n_frames must be at least 1".into()));
    }
    if rx.w_ul.len() != ch.n_ul() || d.v_dl.len() != ch.n_dl() || d.p_ul.len() != ch.n_ul() {
        return Err(Error::Domain("design, combiners and channels disagree on user counts".into()));
    }
    let (_, v0_factor) = psd_factor(&d.v0, "V0")?;
    let (b, c) = interference_matrices(ch);
    let n_tx = ch.n_tx;
    let n_rx = ch.n_rx;
    let (n_ul, n_dl) = (ch.n_ul(), ch.n_dl());
    let amp_ul: Vec<f64> = d.p_ul.iter().map(|p| p.sqrt()).collect();

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream::SYMBOLS);

    let mut radar = RatioAcc::default();
    let mut uplink = vec![RatioAcc::default(); n_ul];
    let mut downlink = vec![RatioAcc::default(); n_dl];

    for _ in 0..n_frames {
        let s_dl = gaussian_vec(&mut rng, n_dl, 1.0);
        let d_ul = gaussian_vec(&mut rng, n_ul, 1.0);
        let xi = gaussian_vec(&mut rng, n_tx, 1.0);
        let noise = gaussian_vec(&mut rng, n_rx, ch.noise_bs);
        let noise_users: Vec<C64> = ch.noise_dl.iter().map(|&s| complex_gaussian(&mut rng, s)).collect();

        let s0 = &v0_factor * xi;
        let mut x = s0.clone();
        for (v, &s) in d.v_dl.iter().zip(s_dl.iter()) {
            x.axpy(s, v, C64::new(1.0, 0.0));
        }

        // uplink contributions h_k d_k
        let ul_terms: Vec<CVec> = (0..n_ul).map(|k| &ch.h_ul[k] * (d_ul[k] * amp_ul[k])).collect();
        let ul_sum = ul_terms.iter().fold(CVec::zeros(n_rx), |acc, t| acc + t);

        let echo_target = ch.a_r0() * (ch.target.amp * ch.a_t0().dotc(&x));
        let clutter = &b * &x;
        let radar_bad = &ul_sum + &clutter + &noise;
        radar.push(rx.u.dotc(&echo_target).norm_sqr(), rx.u.dotc(&radar_bad).norm_sqr());

        if n_ul > 0 {
            let all_echo = &c * &x + &noise;
            for k in 0..n_ul {
                let w = &rx.w_ul[k];
                let good = w.dotc(&ul_terms[k]);
                let bad = w.dotc(&(&ul_sum - &ul_terms[k] + &all_echo));
                uplink[k].push(good.norm_sqr(), bad.norm_sqr());
            }
        }

        for l in 0..n_dl {
            let g = &ch.g_dl[l];
            let good = g.dotc(&d.v_dl[l]) * s_dl[l];
            let bad = g.dotc(&x) - good + noise_users[l];
            downlink[l].push(good.norm_sqr(), bad.norm_sqr());
        }
    }

    let (r, r_se) = radar.finish();
    let (ul, ul_se): (Vec<f64>, Vec<f64>) = uplink.iter().map(RatioAcc::finish).unzip();
    let (dl, dl_se): (Vec<f64>, Vec<f64>) = downlink.iter().map(RatioAcc::finish).unzip();
    Ok(MonteCarloEstimate {
        sinr: SinrReport { radar: r, uplink: ul, downlink: dl },
        std_error: SinrReport { radar: r_se, uplink: ul_se, downlink: dl_se },
    })
}
