//! Rayleigh fading for the BS → STAR-RIS → user links under the mode
//! switching protocol.
//!
//! The surface is split into a transmission part and a reflection part, and
//! each part into one subsurface per user of that zone. Subsurface `i` is
//! phase-aligned to its own user `i`; for every other user of the same zone
//! it is an unaligned interferer. Users never hear the other zone's part.
//!
//! Users and subsurfaces are numbered from 1, as `U_1 … U_K`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Zone {
    Transmission,
    Reflection,
}

impl std::fmt::Display for Zone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Zone::Transmission => "transmission",
            Zone::Reflection => "reflection",
        })
    }
}

/// Power-law path gain `d^(−α)`.
pub fn path_gain(distance: f64, exponent: f64) -> Result<f64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::invalid(
            "distance",
            format!("must be positive, got {distance}"),
        ));
    }
    if !(exponent.is_finite() && exponent >= 0.0) {
        return Err(Error::invalid(
            "exponent",
            format!("must be non-negative, got {exponent}"),
        ));
    }
    Ok(distance.powf(-exponent))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    bs_ris_distance: f64,
    ris_user_distances: Vec<f64>,
    bs_exponent: f64,
    ris_user_exponent: f64,
}

impl PathLossParams {
    pub fn new(
        bs_ris_distance: f64,
        ris_user_distances: Vec<f64>,
        bs_exponent: f64,
        ris_user_exponent: f64,
    ) -> Result<Self> {
        path_gain(bs_ris_distance, bs_exponent)?;
        for (k, &d) in ris_user_distances.iter().enumerate() {
            path_gain(d, ris_user_exponent)
                .map_err(|e| Error::invalid(format!("ris_user_distances[{}]", k + 1), e.to_string()))?;
        }
        if ris_user_distances.is_empty() {
            return Err(Error::invalid("ris_user_distances", "need at least one user"));
        }
        Ok(PathLossParams {
            bs_ris_distance,
            ris_user_distances,
            bs_exponent,
            ris_user_exponent,
        })
    }

    pub fn num_users(&self) -> usize {
        self.ris_user_distances.len()
    }

    /// `L_BS`, the per-entry variance of the BS → surface coefficients.
    pub fn bs_gain(&self) -> f64 {
        self.bs_ris_distance.powf(-self.bs_exponent)
    }

    /// `L_SU,k`, the per-entry variance of the surface → user `k` coefficients.
    pub fn user_gain(&self, user: usize) -> f64 {
        self.ris_user_distances[user - 1].powf(-self.ris_user_exponent)
    }

    /// `L_k = L_BS · L_SU,k`.
    pub fn overall_gain(&self, user: usize) -> f64 {
        self.bs_gain() * self.user_gain(user)
    }
}

/// Element counts and zones, one subsurface per user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsurfaceAllocation {
    elements: Vec<usize>,
    zones: Vec<Zone>,
}

impl SubsurfaceAllocation {
    /// Zero-element subsurfaces are accepted; they contribute nothing.
    pub fn new(elements: Vec<usize>, zones: Vec<Zone>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("elements", "need at least one user"));
        }
        if elements.len() != zones.len() {
            return Err(Error::invalid(
                "zones",
                format!("{} zones for {} subsurfaces", zones.len(), elements.len()),
            ));
        }
        Ok(SubsurfaceAllocation { elements, zones })
    }

    pub fn num_users(&self) -> usize {
        self.elements.len()
    }

    /// `N_k`.
    pub fn elements(&self, user: usize) -> usize {
        self.elements[user - 1]
    }

    pub fn zone(&self, user: usize) -> Zone {
        self.zones[user - 1]
    }

    /// `N_t` or `N_r`.
    pub fn zone_total(&self, zone: Zone) -> usize {
        self.elements
            .iter()
            .zip(&self.zones)
            .filter(|(_, &z)| z == zone)
            .map(|(&n, _)| n)
            .sum()
    }

    /// `N_χ` for the zone user `k` sits in.
    pub fn zone_total_for(&self, user: usize) -> usize {
        self.zone_total(self.zone(user))
    }

    /// `N = N_t + N_r`.
    pub fn total(&self) -> usize {
        self.elements.iter().sum()
    }

    /// The other users sharing user `k`'s zone.
    pub fn co_zone_users(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        let zone = self.zone(user);
        (1..=self.num_users()).filter(move |&i| i != user && self.zone(i) == zone)
    }
}

/// `φ_k = |g_k^T Θ_k h_k|`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CascadedGain(f64);

impl CascadedGain {
    pub fn new(magnitude: f64) -> Result<Self> {
        if !(magnitude.is_finite() && magnitude >= 0.0) {
            return Err(Error::invalid(
                "cascaded_gain",
                format!("must be a finite non-negative magnitude, got {magnitude}"),
            ));
        }
        Ok(CascadedGain(magnitude))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Circularly-symmetric complex Gaussian with total variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

/// One draw of every coefficient of the surface plus its phase configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    alloc: SubsurfaceAllocation,
    offsets: Vec<usize>,
    bs: Vec<Complex64>,
    // users[k - 1] spans every element of the surface.
    users: Vec<Vec<Complex64>>,
    phases: Vec<f64>,
}

impl ChannelRealization {
    pub fn allocation(&self) -> &SubsurfaceAllocation {
        &self.alloc
    }

    fn span(&self, subsurface: usize) -> std::ops::Range<usize> {
        self.offsets[subsurface - 1]..self.offsets[subsurface]
    }

    /// `h_i`.
    pub fn bs_link(&self, subsurface: usize) -> &[Complex64] {
        &self.bs[self.span(subsurface)]
    }

    /// `g_{k,i}`.
    pub fn user_link(&self, user: usize, subsurface: usize) -> &[Complex64] {
        &self.users[user - 1][self.span(subsurface)]
    }

    /// `θ_i`, angles in `[0, 2π)`.
    pub fn phases(&self, subsurface: usize) -> &[f64] {
        &self.phases[self.span(subsurface)]
    }

    pub fn set_phases(&mut self, subsurface: usize, phases: &[f64]) -> Result<()> {
        let span = self.span(subsurface);
        if phases.len() != span.len() {
            return Err(Error::invalid(
                "phases",
                format!("subsurface {subsurface} has {} elements, got {}", span.len(), phases.len()),
            ));
        }
        for (dst, &p) in self.phases[span].iter_mut().zip(phases) {
            *dst = p.rem_euclid(TAU);
        }
        Ok(())
    }

    /// `g_{k,i}^T Θ_i h_i`.
    pub fn subsurface_response(&self, user: usize, subsurface: usize) -> Complex64 {
        let span = self.span(subsurface);
        let g = &self.users[user - 1][span.clone()];
        let h = &self.bs[span.clone()];
        let theta = &self.phases[span];
        g.iter()
            .zip(h)
            .zip(theta)
            .map(|((g, h), &t)| g * Complex64::from_polar(1.0, t) * h)
            .sum()
    }
}

/// Draws every BS → element and element → user coefficient. Phases start at 0.
pub fn sample_realization<R: Rng + ?Sized>(
    alloc: &SubsurfaceAllocation,
    path_loss: &PathLossParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if path_loss.num_users() != alloc.num_users() {
        return Err(Error::invalid(
            "path_loss",
            format!(
                "{} user distances for {} subsurfaces",
                path_loss.num_users(),
                alloc.num_users()
            ),
        ));
    }
    let mut offsets = Vec::with_capacity(alloc.num_users() + 1);
    offsets.push(0);
    for k in 1..=alloc.num_users() {
        offsets.push(offsets[k - 1] + alloc.elements(k));
    }
    let total = alloc.total();
    let l_bs = path_loss.bs_gain();
    let bs = (0..total).map(|_| complex_gaussian(rng, l_bs)).collect();
    let users = (1..=alloc.num_users())
        .map(|k| {
            let l_su = path_loss.user_gain(k);
            (0..total).map(|_| complex_gaussian(rng, l_su)).collect()
        })
        .collect();
    Ok(ChannelRealization {
        alloc: alloc.clone(),
        offsets,
        bs,
        users,
        phases: vec![0.0; total],
    })
}

/// Sets `θ_k^(n) = φ_k^(n) + Φ_k^(n)` so that every element of subsurface `k`
/// adds coherently at user `k`. Returns the new phase vector.
pub fn align_phases(realization: &mut ChannelRealization, user: usize) -> &[f64] {
    let span = realization.span(user);
    for n in span.clone() {
        let h = realization.bs[n];
        let g = realization.users[user - 1][n];
        // h = |h| e^{-jφ}, g = |g| e^{-jΦ}
        realization.phases[n] = (-(h.arg() + g.arg())).rem_euclid(TAU);
    }
    &realization.phases[span]
}

/// Aligns every subsurface to the user it serves.
pub fn align_all(realization: &mut ChannelRealization) {
    for k in 1..=realization.alloc.num_users() {
        align_phases(realization, k);
    }
}

pub fn cascaded_gain(realization: &ChannelRealization, user: usize) -> CascadedGain {
    CascadedGain(realization.subsurface_response(user, user).norm())
}

/// `Σ_{i ≠ k, same zone} g_{k,i}^T Θ_i h_i`; exactly zero for a sole occupant.
pub fn interference_coefficient(realization: &ChannelRealization, user: usize) -> Complex64 {
    realization
        .alloc
        .co_zone_users(user)
        .map(|i| realization.subsurface_response(user, i))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of the aligned cascaded magnitude,
/// `μ = (π/4) √L N` and `v = (1 − π²/16) L N`.
pub fn clt_moments(path_gain: f64, elements: usize) -> Result<CltMoments> {
    if !(path_gain.is_finite() && path_gain > 0.0) {
        return Err(Error::invalid(
            "path_gain",
            format!("must be positive, got {path_gain}"),
        ));
    }
    let n = elements as f64;
    Ok(CltMoments {
        mean: PI / 4.0 * path_gain.sqrt() * n,
        variance: (1.0 - PI * PI / 16.0) * path_gain * n,
    })
}

/// Everything user `k`'s received signal depends on, drawn without the
/// coefficients it does not see.
///
/// Statistically identical to sampling a full [`ChannelRealization`],
/// aligning every subsurface and reading [`cascaded_gain`] and
/// [`interference_coefficient`], at a fraction of the draws.
#[derive(Debug, Clone)]
pub struct ReceiverLink {
    own_elements: usize,
    bs_variance: f64,
    user_variance: f64,
    // (N_i, L_SU,i) for every co-zone subsurface i
    interferers: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDraw {
    pub gain: f64,
    pub interference: Complex64,
}

impl ReceiverLink {
    pub fn new(alloc: &SubsurfaceAllocation, path_loss: &PathLossParams, user: usize) -> Result<Self> {
        if user == 0 || user > alloc.num_users() {
            return Err(Error::invalid(
                "user",
                format!("must be in 1..={}, got {user}", alloc.num_users()),
            ));
        }
        if path_loss.num_users() != alloc.num_users() {
            return Err(Error::invalid("path_loss", "user count differs from allocation"));
        }
        Ok(ReceiverLink {
            own_elements: alloc.elements(user),
            bs_variance: path_loss.bs_gain(),
            user_variance: path_loss.user_gain(user),
            interferers: alloc
                .co_zone_users(user)
                .map(|i| (alloc.elements(i), path_loss.user_gain(i)))
                .collect(),
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> LinkDraw {
        let mut gain = 0.0;
        for _ in 0..self.own_elements {
            let h = complex_gaussian(rng, self.bs_variance);
            let g = complex_gaussian(rng, self.user_variance);
            gain += h.norm() * g.norm();
        }
        let mut interference = Complex64::new(0.0, 0.0);
        for &(elements, served_variance) in &self.interferers {
            for _ in 0..elements {
                let h = complex_gaussian(rng, self.bs_variance);
                let g_served = complex_gaussian(rng, served_variance);
                let g = complex_gaussian(rng, self.user_variance);
                // e^{jθ} = conj(h g_served) / |h g_served|, so g e^{jθ} h = g |h| conj(g_served) / |g_served|
                let norm = g_served.norm();
                if norm > 0.0 {
                    interference += g * h.norm() * g_served.conj() / norm;
                }
            }
        }
        LinkDraw { gain, interference }
    }
}
