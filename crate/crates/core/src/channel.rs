//! Small-scale fading, uplink pilot observations and per-link MMSE channel
//! estimation under pilot reuse.
//!
//! Each RRH correlates its received pilot signal against every orthogonal
//! pilot. Users sharing a pilot superimpose in that observation, so the
//! estimate of one user's channel is contaminated by every co-pilot user in
//! the network. Estimates are formed only on intra-cluster links; every other
//! link is known to the BBU pool through its large-scale gain alone.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::coloring::PilotAssignment;
use crate::seed::{stream_rng, Stream};
use crate::topology::LargeScale;

pub type C64 = Complex<f64>;

/// One `M`-dimensional complex vector per `(rrh, user)` link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkVectors {
    num_rrhs: usize,
    num_users: usize,
    antennas: usize,
    data: Vec<C64>,
}

impl LinkVectors {
    pub fn zeros(num_rrhs: usize, num_users: usize, antennas: usize) -> Self {
        Self {
            num_rrhs,
            num_users,
            antennas,
            data: vec![C64::new(0.0, 0.0); num_rrhs * num_users * antennas],
        }
    }

    #[inline]
    fn offset(&self, rrh: usize, user: usize) -> usize {
        (rrh * self.num_users + user) * self.antennas
    }

    #[inline]
    pub fn link(&self, rrh: usize, user: usize) -> &[C64] {
        let o = self.offset(rrh, user);
        &self.data[o..o + self.antennas]
    }

    #[inline]
    pub fn link_mut(&mut self, rrh: usize, user: usize) -> &mut [C64] {
        let o = self.offset(rrh, user);
        &mut self.data[o..o + self.antennas]
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn num_rrhs(&self) -> usize {
        self.num_rrhs
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: self.data.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }
}

/// Circularly-symmetric complex Gaussian sample of variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// Rayleigh fading: `h_{i,k} ~ CN(0, alpha_{i,k} I_M)`.
pub fn draw_channels(alpha: &LargeScale, antennas: usize, seed: u64) -> LinkVectors {
    let mut rng = stream_rng(seed, Stream::Fading);
    draw_channels_with(alpha, antennas, &mut rng)
}

pub fn draw_channels_with<R: Rng + ?Sized>(alpha: &LargeScale, antennas: usize, rng: &mut R) -> LinkVectors {
    let mut h = LinkVectors::zeros(alpha.num_rrhs(), alpha.num_users(), antennas);
    for i in 0..alpha.num_rrhs() {
        for k in 0..alpha.num_users() {
            let a = alpha.get(i, k);
            for z in h.link_mut(i, k) {
                *z = complex_gaussian(rng, a);
            }
        }
    }
    h
}

/// Post-correlation pilot observations `y_{i,t}`, one vector per `(rrh, pilot)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservations {
    pilots: usize,
    antennas: usize,
    data: Vec<C64>,
}

impl PilotObservations {
    pub fn get(&self, rrh: usize, pilot: usize) -> &[C64] {
        let o = (rrh * self.pilots + pilot) * self.antennas;
        &self.data[o..o + self.antennas]
    }

    pub fn pilots(&self) -> usize {
        self.pilots
    }
}

/// `y_{i,t} = sum_{k on t} sqrt(p) h_{i,k} + n`, `n ~ CN(0, noise I_M)`, for
/// every RRH and each of the `pilots` orthogonal pilots.
pub fn simulate_pilot_rx(
    channels: &LinkVectors,
    assignment: &PilotAssignment,
    pilots: usize,
    pilot_power: f64,
    noise_power: f64,
    seed: u64,
) -> PilotObservations {
    let mut rng = stream_rng(seed, Stream::PilotNoise);
    simulate_pilot_rx_with(channels, assignment, pilots, pilot_power, noise_power, &mut rng)
}

pub fn simulate_pilot_rx_with<R: Rng + ?Sized>(
    channels: &LinkVectors,
    assignment: &PilotAssignment,
    pilots: usize,
    pilot_power: f64,
    noise_power: f64,
    rng: &mut R,
) -> PilotObservations {
    assert!(
        assignment.colors_used() <= pilots,
        "assignment uses more pilots than exist"
    );
    let m = channels.antennas();
    let amp = pilot_power.sqrt();
    let mut data = Vec::with_capacity(channels.num_rrhs() * pilots * m);
    for i in 0..channels.num_rrhs() {
        for t in 0..pilots {
            let group: &[usize] = assignment.groups().get(t).map(Vec::as_slice).unwrap_or(&[]);
            for a in 0..m {
                let mut y = complex_gaussian(rng, noise_power);
                for &k in group {
                    y += channels.link(i, k)[a] * amp;
                }
                data.push(y);
            }
        }
    }
    PilotObservations {
        pilots,
        antennas: m,
        data,
    }
}

/// Per-antenna MMSE error variance of a link whose pilot carries total
/// large-scale gain `group_gain` at that RRH (the link's own gain included).
pub fn mmse_error_variance(gain: f64, group_gain: f64, pilot_power: f64, noise_power: f64) -> f64 {
    let e = gain - pilot_power * gain * gain / (pilot_power * group_gain + noise_power);
    e.clamp(0.0, gain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiMode {
    Imperfect,
    Perfect,
}

/// True channels, intra-cluster estimates and per-link error variances.
///
/// Links without an estimate carry only their large-scale gain, so their
/// error variance equals `alpha_{i,k}`.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub mode: CsiMode,
    pub true_channels: LinkVectors,
    estimates: LinkVectors,
    has_estimate: Vec<bool>,
    error_var: Vec<f64>,
}

impl ChannelState {
    fn untracked(mode: CsiMode, true_channels: LinkVectors, alpha: &LargeScale) -> Self {
        let (ni, nk, m) = (
            true_channels.num_rrhs(),
            true_channels.num_users(),
            true_channels.antennas(),
        );
        let error_var = (0..ni)
            .flat_map(|i| (0..nk).map(move |k| (i, k)))
            .map(|(i, k)| alpha.get(i, k))
            .collect();
        Self {
            mode,
            true_channels,
            estimates: LinkVectors::zeros(ni, nk, m),
            has_estimate: vec![false; ni * nk],
            error_var,
        }
    }

    #[inline]
    fn idx(&self, rrh: usize, user: usize) -> usize {
        rrh * self.true_channels.num_users() + user
    }

    pub fn estimate(&self, rrh: usize, user: usize) -> Option<&[C64]> {
        self.has_estimate[self.idx(rrh, user)].then(|| self.estimates.link(rrh, user))
    }

    pub fn error_var(&self, rrh: usize, user: usize) -> f64 {
        self.error_var[self.idx(rrh, user)]
    }

    pub fn antennas(&self) -> usize {
        self.true_channels.antennas()
    }

    pub fn num_rrhs(&self) -> usize {
        self.true_channels.num_rrhs()
    }

    pub fn num_users(&self) -> usize {
        self.true_channels.num_users()
    }

    /// The same state with every gain scaled by `factor` (amplitudes by its
    /// square root).
    pub fn scaled(&self, factor: f64) -> Self {
        let amp = factor.sqrt();
        Self {
            mode: self.mode,
            true_channels: self.true_channels.scaled(amp),
            estimates: self.estimates.scaled(amp),
            has_estimate: self.has_estimate.clone(),
            error_var: self.error_var.iter().map(|e| e * factor).collect(),
        }
    }
}

/// Linear MMSE estimates for every assigned user on its intra-cluster links:
/// `h_hat = sqrt(p) alpha_{i,k} / (p sum_{k' on pilot} alpha_{i,k'} + noise) * y_{i,pilot}`.
/// Co-pilot users anywhere in the network contribute to the sum.
pub fn mmse_estimate(
    true_channels: LinkVectors,
    observations: &PilotObservations,
    alpha: &LargeScale,
    clusters: &[Vec<usize>],
    assignment: &PilotAssignment,
    pilot_power: f64,
    noise_power: f64,
) -> ChannelState {
    let mut state = ChannelState::untracked(CsiMode::Imperfect, true_channels, alpha);
    for k in assignment.assigned_users() {
        let pilot = assignment.pilot_of(k).expect("assigned");
        let group = &assignment.groups()[pilot];
        for &i in &clusters[k] {
            let gain = alpha.get(i, k);
            let group_gain: f64 = group.iter().map(|&o| alpha.get(i, o)).sum();
            let coef = pilot_power.sqrt() * gain / (pilot_power * group_gain + noise_power);
            let y = observations.get(i, pilot);
            for (dst, src) in state.estimates.link_mut(i, k).iter_mut().zip(y) {
                *dst = src * coef;
            }
            let idx = state.idx(i, k);
            state.has_estimate[idx] = true;
            state.error_var[idx] = mmse_error_variance(gain, group_gain, pilot_power, noise_power);
        }
    }
    state
}

/// Genie-aided state: intra-cluster channels of `users` known exactly.
pub fn perfect_csi(
    true_channels: LinkVectors,
    alpha: &LargeScale,
    clusters: &[Vec<usize>],
    users: &[usize],
) -> ChannelState {
    let mut state = ChannelState::untracked(CsiMode::Perfect, true_channels, alpha);
    for &k in users {
        for &i in &clusters[k] {
            let h = state.true_channels.link(i, k).to_vec();
            state.estimates.link_mut(i, k).copy_from_slice(&h);
            let idx = state.idx(i, k);
            state.has_estimate[idx] = true;
            state.error_var[idx] = 0.0;
        }
    }
    state
}

/// Confirms that no two users sharing a candidate RRH share a pilot.
pub fn check_pilot_separation(clusters: &[Vec<usize>], assignment: &PilotAssignment) -> Result<(), (usize, usize)> {
    for group in assignment.groups() {
        for (ai, &a) in group.iter().enumerate() {
            for &b in &group[ai + 1..] {
                if clusters[a].iter().any(|i| clusters[b].contains(i)) {
                    return Err((a, b));
                }
            }
        }
    }
    Ok(())
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `<a, b> = a^H b`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
