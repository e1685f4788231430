//! Second-order two-photon decay amplitudes, photon-photon angular
//! correlation functions and total decay rates.
//!
//! Geometry: the quantization axis is taken along the first photon
//! (theta_1 = 0, phi_1 = 0, phi_2 = 0), so the correlation function depends
//! on the single opening angle theta = theta_2 and the energy sharing
//! y = omega_1 / (omega_1 + omega_2).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::{clebsch_gordan, wigner6j, wigner_small_d};
use crate::multipole::{
    reduced_me, selection_rule, Gauge, MultipoleChannel, MultipoleError, Pole,
};
use crate::specfun::{gauss_legendre, RadialGrid, SpecFunError};
use crate::spectrum::{
    analytic_bound_state, build_spectrum, kappa_to_l, kappa_to_tj, kappas_for_tj,
    BasisParams, KappaSpectrum, RadialOrbital, SpectrumError,
};
use crate::units::{ALPHA, RATE_NATURAL_TO_PER_SEC};

#[derive(Debug, Error)]
pub enum TwoPhotonError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Multipole(#[from] MultipoleError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(
        "energy denominator too close to an intermediate level: \
         kappa = {kappa}, state index {index}, E_nu = {e_nu:.9e}, \
         omega = {omega:.9e}, |denominator| = {denom:.3e} < {threshold:.3e} \
         (in units of mc^2); move the energy-sharing grid off the resonance"
    )]
    Pole {
        kappa: i32,
        index: usize,
        e_nu: f64,
        omega: f64,
        denom: f64,
        threshold: f64,
    },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

/// Decaying level; the final state is always the (1s-dominated) ground
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    /// 1s2s 1S_0 -> 1s^2 1S_0 (helium-like)
    SingletS,
    /// 1s2s 3S_1 -> 1s^2 1S_0 (helium-like)
    TripletS,
    /// 1s2p 3P_0 -> 1s^2 1S_0 (helium-like, jj: (1s_1/2 2p_1/2)_0)
    TripletP0,
    /// n kappa -> 1s_1/2 in a hydrogen-like ion
    Hydrogenic { n: u32, kappa: i32 },
}

impl TransitionKind {
    pub fn is_helium(&self) -> bool {
        !matches!(self, TransitionKind::Hydrogenic { .. })
    }

    /// Doubled total angular momentum of the initial state.
    pub fn tji(&self) -> i32 {
        match self {
            TransitionKind::SingletS | TransitionKind::TripletP0 => 0,
            TransitionKind::TripletS => 2,
            TransitionKind::Hydrogenic { kappa, .. } => kappa_to_tj(*kappa),
        }
    }

    /// Doubled total angular momentum of the final state.
    pub fn tjf(&self) -> i32 {
        if self.is_helium() {
            0
        } else {
            1
        }
    }

    /// Principal quantum number and kappa of the active electron.
    pub fn active(&self) -> (u32, i32) {
        match self {
            TransitionKind::SingletS | TransitionKind::TripletS => (2, -1),
            TransitionKind::TripletP0 => (2, 1),
            TransitionKind::Hydrogenic { n, kappa } => (*n, *kappa),
        }
    }

    /// Product of initial and final state parities: +1 or -1.
    pub fn parity_product(&self) -> i32 {
        let (_, kappa) = self.active();
        // final active orbital is 1s (even); spectator even
        if kappa_to_l(kappa) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn label(&self) -> String {
        match self {
            TransitionKind::SingletS => "1s2s-1S0".into(),
            TransitionKind::TripletS => "1s2s-3S1".into(),
            TransitionKind::TripletP0 => "1s2p-3P0".into(),
            TransitionKind::Hydrogenic { n, kappa } => {
                let l = kappa_to_l(*kappa);
                let lch = ['s', 'p', 'd', 'f', 'g', 'h'][l as usize % 6];
                format!("{}{}{}/2", n, lch, kappa_to_tj(*kappa))
            }
        }
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl FromStr for TransitionKind {
    type Err = TwoPhotonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('_', "-");
        match norm.as_str() {
            "1s2s-1S0" | "1S0" => return Ok(TransitionKind::SingletS),
            "1s2s-3S1" | "3S1" => return Ok(TransitionKind::TripletS),
            "1s2p-3P0" | "3P0" => return Ok(TransitionKind::TripletP0),
            _ => {}
        }
        // hydrogen-like: "2s", "2s1/2", "2p1/2", "2p3/2", ...
        let bytes = norm.as_bytes();
        let digits: String = norm.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() || digits.len() >= norm.len() {
            return Err(TwoPhotonError::BadConfig(format!(
                "unrecognized transition '{s}'"
            )));
        }
        let n: u32 = digits
            .parse()
            .map_err(|_| TwoPhotonError::BadConfig(format!("bad level '{s}'")))?;
        let lch = bytes[digits.len()] as char;
        let l = match lch {
            's' => 0i32,
            'p' => 1,
            'd' => 2,
            'f' => 3,
            _ => {
                return Err(TwoPhotonError::BadConfig(format!(
                    "unrecognized orbital letter in '{s}'"
                )))
            }
        };
        let rest = &norm[digits.len() + 1..];
        let tj = if rest.is_empty() {
            // default to j = l - 1/2 for l > 0 (2p -> 2p1/2), j = 1/2 for s
            if l == 0 {
                1
            } else {
                2 * l - 1
            }
        } else {
            let rest = rest.strip_suffix("/2").ok_or_else(|| {
                TwoPhotonError::BadConfig(format!("bad angular momentum in '{s}'"))
            })?;
            rest.parse::<i32>()
                .map_err(|_| TwoPhotonError::BadConfig(format!("bad j in '{s}'")))?
        };
        let kappa = if tj == 2 * l + 1 {
            -(l + 1)
        } else if tj == 2 * l - 1 && l > 0 {
            l
        } else {
            return Err(TwoPhotonError::BadConfig(format!(
                "j = {tj}/2 incompatible with l = {l} in '{s}'"
            )));
        };
        if n < 2 || kappa_to_l(kappa) >= n {
            return Err(TwoPhotonError::BadConfig(format!(
                "level '{s}' cannot undergo two-photon decay to 1s"
            )));
        }
        Ok(TransitionKind::Hydrogenic { n, kappa })
    }
}

/// Ion + decaying level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub z: f64,
    pub kind: TransitionKind,
}

impl TransitionSpec {
    pub fn new(z: f64, kind: TransitionKind) -> Result<Self, TwoPhotonError> {
        if !(z >= 1.0) || z * ALPHA >= 1.0 {
            return Err(TwoPhotonError::BadConfig(format!(
                "nuclear charge Z = {z} outside the point-Coulomb domain"
            )));
        }
        if kind.is_helium() && z < 2.0 {
            return Err(TwoPhotonError::BadConfig(
                "helium-like transitions need Z >= 2".into(),
            ));
        }
        Ok(Self { z, kind })
    }
}

/// Multipole truncation and summation options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Highest photon multipole order L retained.
    pub l_max: u32,
    /// Keep only the leading dipole channels (2E1, or E1M1 + M1E1 for
    /// odd-parity transitions).
    pub dipole_only: bool,
    /// Sum over the negative-energy (positron) part of the spectrum.
    pub include_negative_continuum: bool,
    pub gauge: Gauge,
    /// Optional tighter cap on magnetic multipoles, used when cross-checking
    /// against closed-form shapes whose channel set is not an even L cutoff.
    #[serde(default)]
    pub l_max_magnetic: Option<u32>,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            l_max: 5,
            dipole_only: false,
            l_max_magnetic: None,
            include_negative_continuum: true,
            gauge: Gauge::Velocity,
        }
    }
}

/// Angular correlation scan at fixed energy sharing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub z: f64,
    pub transition: String,
    pub y: f64,
    /// Opening angles in radians.
    pub theta: Vec<f64>,
    /// W(theta, y) in 1/s.
    pub w: Vec<f64>,
    pub l_max: u32,
    pub dipole_only: bool,
    pub gauge: String,
    /// Transition energy in units of mc^2.
    pub transition_energy: f64,
    pub basis_fingerprint: String,
}

/// Total decay rate with its energy-sharing distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateResult {
    pub z: f64,
    pub transition: String,
    /// Total two-photon rate in 1/s.
    pub total: f64,
    /// (y, d w / d y) samples at the quadrature nodes, rate per unit y in
    /// 1/s; already includes the factor 1/2 removing double counting.
    pub spectrum: Vec<(f64, f64)>,
    pub n_y: usize,
    pub n_theta: usize,
    pub l_max: u32,
    pub dipole_only: bool,
    pub gauge: String,
    pub transition_energy: f64,
    pub basis_fingerprint: String,
}

// Two powers of the electromagnetic coupling, one per emitted photon; the
// plane-wave vertex operator alpha . u e^{ikr} carries no charge factor.
const COUPLING: f64 = ALPHA * ALPHA;

/// Relative pole-guard threshold: |E_nu - E_i + omega| must exceed this
/// times the transition energy.
pub const EPSILON_POLE: f64 = 1e-6;

type RmeKey = (u8, i32, usize, u32, u8, u64);
type SKey = (u32, u8, u32, u8, i32, u64);

/// Per-evaluation scratch caches; radial matrix elements are keyed by
/// (vertex side, kappa_nu, state index, L, p, omega-bits).
#[derive(Default)]
pub(crate) struct Workspace {
    rme: HashMap<RmeKey, f64>,
    s: HashMap<SKey, f64>,
}

pub struct Engine {
    pub spec: TransitionSpec,
    pub trunc: Truncation,
    pub params: BasisParams,
    grid: RadialGrid,
    spectra: HashMap<i32, KappaSpectrum>,
    fin: RadialOrbital,
    act: RadialOrbital,
    /// E_i - E_f in units of mc^2.
    pub delta_e: f64,
}

impl Engine {
    pub fn new(
        spec: TransitionSpec,
        trunc: Truncation,
        params: Option<BasisParams>,
    ) -> Result<Self, TwoPhotonError> {
        let params = params.unwrap_or_else(|| BasisParams::defaults_for(spec.z));
        let grid = params.radial_grid();
        let fin = analytic_bound_state(spec.z, 1, -1, &grid)?;
        let (n_act, k_act) = spec.kind.active();
        let act = analytic_bound_state(spec.z, n_act, k_act, &grid)?;
        let delta_e = act.energy - fin.energy;
        if delta_e <= 0.0 {
            return Err(TwoPhotonError::BadConfig(
                "initial level does not lie above the final level".into(),
            ));
        }

        let kmax = trunc.l_max as i32 + 1;
        let kappas: Vec<i32> = (-kmax..=kmax).filter(|&k| k != 0).collect();
        let spectra = kappas
            .par_iter()
            .map(|&k| build_spectrum(spec.z, k, &params).map(|s| (k, s)))
            .collect::<Result<HashMap<_, _>, _>>()?;

        Ok(Self {
            spec,
            trunc,
            params,
            grid,
            spectra,
            fin,
            act,
            delta_e,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn spectrum(&self, kappa: i32) -> Option<&KappaSpectrum> {
        self.spectra.get(&kappa)
    }

    pub fn final_orbital(&self) -> &RadialOrbital {
        &self.fin
    }

    pub fn active_orbital(&self) -> &RadialOrbital {
        &self.act
    }

    /// Reduced one-electron matrix element at one vertex. side 0 couples the
    /// intermediate state to the final 1s orbital, side 1 to the active
    /// initial orbital. Values are the imaginary parts; the matrix elements
    /// are purely imaginary in this phase convention.
    fn vertex_rme(
        &self,
        ws: &mut Workspace,
        side: u8,
        kappa: i32,
        idx: usize,
        l: u32,
        pole: Pole,
        omega: f64,
    ) -> Result<f64, TwoPhotonError> {
        let key = (side, kappa, idx, l, pole.p() as u8, omega.to_bits());
        if let Some(&v) = ws.rme.get(&key) {
            return Ok(v);
        }
        let nu = &self.spectra[&kappa].orbitals[idx];
        let ch = MultipoleChannel::new(l, pole, omega)?;
        let me = match side {
            0 => reduced_me(&self.fin, nu, &ch, self.trunc.gauge, &self.grid)?,
            _ => reduced_me(nu, &self.act, &ch, self.trunc.gauge, &self.grid)?,
        };
        debug_assert!(me.value.re == 0.0);
        let v = me.value.im;
        ws.rme.insert(key, v);
        Ok(v)
    }

    /// One-electron reduced second-order amplitude: sum over intermediate
    /// states of symmetry j_nu of
    ///   <1s|| a^{p1,+}_{L1}(omega1') ||nu> <nu|| a^{p2,+}_{L2}(omega2') ||i>
    ///   / (E_nu - E_i + omega).
    /// The photon energies omega1', omega2' attached to the two vertices are
    /// fixed by energy conservation: the outer vertex carries the photon
    /// whose energy is NOT in the denominator.
    fn s_one_electron(
        &self,
        ws: &mut Workspace,
        tj_nu: i32,
        outer: (u32, Pole),
        inner: (u32, Pole),
        omega_outer: f64,
        omega_inner: f64,
    ) -> Result<f64, TwoPhotonError> {
        let threshold = EPSILON_POLE * self.delta_e;
        let mut total = 0.0;
        for kappa in kappas_for_tj(tj_nu) {
            if kappa == 0 {
                continue;
            }
            if !selection_rule(self.fin.kappa, kappa, outer.0, outer.1)
                || !selection_rule(kappa, self.act.kappa, inner.0, inner.1)
            {
                continue;
            }
            let Some(spec) = self.spectra.get(&kappa) else {
                continue;
            };
            for idx in 0..spec.orbitals.len() {
                let e_nu = spec.orbitals[idx].energy;
                if !self.trunc.include_negative_continuum && e_nu < -1.0 {
                    continue;
                }
                let denom = e_nu - self.act.energy + omega_inner;
                if denom.abs() < threshold {
                    return Err(TwoPhotonError::Pole {
                        kappa,
                        index: idx,
                        e_nu,
                        omega: omega_inner,
                        denom: denom.abs(),
                        threshold,
                    });
                }
                let m1 = self.vertex_rme(ws, 0, kappa, idx, outer.0, outer.1, omega_outer)?;
                let m2 = self.vertex_rme(ws, 1, kappa, idx, inner.0, inner.1, omega_inner)?;
                // both matrix elements are i * (real): (i m1)(i m2) = -m1 m2
                total -= m1 * m2 / denom;
            }
        }
        Ok(total)
    }

    /// Reduced second-order amplitude S^{J_nu}_{outer, inner}(omega_inner)
    /// between the many-electron (or hydrogenic) levels, with tj_nu the
    /// doubled total angular momentum of the intermediate level.
    pub(crate) fn s_reduced(
        &self,
        ws: &mut Workspace,
        tj_nu: i32,
        outer: (u32, Pole),
        inner: (u32, Pole),
        omega_outer: f64,
        omega_inner: f64,
    ) -> Result<f64, TwoPhotonError> {
        let key = (
            outer.0,
            outer.1.p() as u8,
            inner.0,
            inner.1.p() as u8,
            tj_nu,
            omega_inner.to_bits(),
        );
        if let Some(&v) = ws.s.get(&key) {
            return Ok(v);
        }
        let v = if self.spec.kind.is_helium() {
            // intermediate two-electron level (1s_1/2, nu_{j_nu}) J_nu;
            // J_f = 0 forces J_nu = L_outer
            if tj_nu != 2 * outer.0 as i32 {
                0.0
            } else {
                let tji = self.spec.kind.tji();
                let tj_act = self.act.tj();
                let l2 = inner.0 as i32;
                let jnu_big = outer.0 as i32;
                let mut sum = 0.0;
                for tj_small in [2 * jnu_big - 1, 2 * jnu_big + 1] {
                    if tj_small < 1 {
                        continue;
                    }
                    let sixj = wigner6j(tj_small, 1, 2 * jnu_big, tji, 2 * l2, tj_act);
                    if sixj == 0.0 {
                        continue;
                    }
                    let s1 = self.s_one_electron(
                        ws,
                        tj_small,
                        outer,
                        inner,
                        omega_outer,
                        omega_inner,
                    )?;
                    sum += sixj * s1;
                }
                let phase = if (tji / 2 + jnu_big + l2).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                };
                -(((tji + 1) * (2 * jnu_big + 1)) as f64).sqrt() * phase * sum
            }
        } else {
            self.s_one_electron(ws, tj_nu, outer, inner, omega_outer, omega_inner)?
        };
        ws.s.insert(key, v);
        Ok(v)
    }

    /// Photon multipole channels retained under the current truncation.
    fn channels(&self) -> Vec<(u32, Pole)> {
        let lmax = if self.trunc.dipole_only { 1 } else { self.trunc.l_max };
        let lmax_mag = self.trunc.l_max_magnetic.unwrap_or(lmax).min(lmax);
        let mut out = Vec::new();
        for l in 1..=lmax {
            out.push((l, Pole::Electric));
            if l <= lmax_mag {
                out.push((l, Pole::Magnetic));
            }
        }
        out
    }

    /// Ordered channel pairs allowed by parity for this transition.
    fn channel_pairs(&self) -> Vec<((u32, Pole), (u32, Pole))> {
        let parity = self.spec.kind.parity_product();
        let chans = self.channels();
        let mut out = Vec::new();
        for &c1 in &chans {
            for &c2 in &chans {
                let s = c1.0 + c1.1.p() + c2.0 + c2.1.p();
                let pair_parity = if s % 2 == 0 { 1 } else { -1 };
                if pair_parity != parity {
                    continue;
                }
                if self.trunc.dipole_only
                    && c1.1 == Pole::Magnetic
                    && c2.1 == Pole::Magnetic
                {
                    // leading dipole channels only: drop M1M1
                    continue;
                }
                out.push((c1, c2));
            }
        }
        out
    }

    fn tjnu_range(&self, tl_outer: i32, tl_inner: i32) -> Vec<i32> {
        let tjf = self.spec.kind.tjf();
        let tji = self.spec.kind.tji();
        let lo = (tjf - tl_outer).abs().max((tji - tl_inner).abs());
        let hi = (tjf + tl_outer).min(tji + tl_inner);
        (lo..=hi).step_by(2).collect()
    }

    /// Full second-order amplitude M(M_f, M_i, lambda_1, lambda_2) at
    /// opening angle theta (all m's doubled).
    pub fn amplitude(
        &self,
        tmf: i32,
        tmi: i32,
        lam1: i32,
        lam2: i32,
        theta: f64,
        y: f64,
    ) -> Result<Complex64, TwoPhotonError> {
        let mut ws = Workspace::default();
        self.amplitude_ws(&mut ws, tmf, tmi, lam1, lam2, theta, y)
    }

    fn amplitude_ws(
        &self,
        ws: &mut Workspace,
        tmf: i32,
        tmi: i32,
        lam1: i32,
        lam2: i32,
        theta: f64,
        y: f64,
    ) -> Result<Complex64, TwoPhotonError> {
        if lam1.abs() != 1 || lam2.abs() != 1 {
            return Err(TwoPhotonError::BadConfig(
                "photon helicities must be +1 or -1".into(),
            ));
        }
        if !(y > 0.0 && y < 1.0) {
            return Err(TwoPhotonError::BadConfig(format!(
                "energy sharing y = {y} outside (0, 1)"
            )));
        }
        let omega1 = y * self.delta_e;
        let omega2 = (1.0 - y) * self.delta_e;
        let tjf = self.spec.kind.tjf();
        let tji = self.spec.kind.tji();
        let minus_i = Complex64::new(0.0, -1.0);

        let mut m = Complex64::new(0.0, 0.0);
        for (c1, c2) in self.channel_pairs() {
            let (l1, p1) = (c1.0, c1.1);
            let (l2, p2) = (c2.0, c2.1);
            let mut pref = Complex64::new(
                2.0 * std::f64::consts::PI
                    * (((2 * l1 + 1) * (2 * l2 + 1)) as f64).sqrt(),
                0.0,
            );
            pref *= minus_i.powu(l1 + l2);
            if p1 == Pole::Electric {
                pref *= minus_i * lam1 as f64;
            }
            if p2 == Pole::Electric {
                pref *= minus_i * lam2 as f64;
            }

            // first photon along z: D^{L1*}_{M1 lam1} = delta_{M1 lam1};
            // second photon at (theta, 0): D^{L2*}_{M2 lam2} = d^{L2}_{M2 lam2}
            let mut geom = 0.0;

            // photon 1 at the outer vertex, photon 2 inner (denominator
            // carries omega_2)
            let tm_nu1 = tmf + 2 * lam1;
            let tm2_a = tmi - tm_nu1;
            if tm2_a.abs() <= 2 * l2 as i32 {
                for tjnu in self.tjnu_range(2 * l1 as i32, 2 * l2 as i32) {
                    if tm_nu1.abs() > tjnu {
                        continue;
                    }
                    let cg1 =
                        clebsch_gordan(tjf, tmf, 2 * l1 as i32, 2 * lam1, tjnu, tm_nu1);
                    if cg1 == 0.0 {
                        continue;
                    }
                    let cg2 =
                        clebsch_gordan(tjnu, tm_nu1, 2 * l2 as i32, tm2_a, tji, tmi);
                    if cg2 == 0.0 {
                        continue;
                    }
                    let s = self.s_reduced(ws, tjnu, c1, c2, omega1, omega2)?;
                    if s == 0.0 {
                        continue;
                    }
                    let norm = (((tjnu + 1) * (tji + 1)) as f64).sqrt();
                    let d = wigner_small_d(2 * l2 as i32, tm2_a, 2 * lam2, theta);
                    geom += cg1 * cg2 * d * s / norm;
                }
            }

            // photon 2 at the outer vertex, photon 1 inner (denominator
            // carries omega_1)
            let tm_nu2 = tmi - 2 * lam1;
            let tm2_b = tm_nu2 - tmf;
            if tm2_b.abs() <= 2 * l2 as i32 {
                for tjnu in self.tjnu_range(2 * l2 as i32, 2 * l1 as i32) {
                    if tm_nu2.abs() > tjnu {
                        continue;
                    }
                    let cg1 =
                        clebsch_gordan(tjf, tmf, 2 * l2 as i32, tm2_b, tjnu, tm_nu2);
                    if cg1 == 0.0 {
                        continue;
                    }
                    let cg2 =
                        clebsch_gordan(tjnu, tm_nu2, 2 * l1 as i32, 2 * lam1, tji, tmi);
                    if cg2 == 0.0 {
                        continue;
                    }
                    let s = self.s_reduced(ws, tjnu, c2, c1, omega2, omega1)?;
                    if s == 0.0 {
                        continue;
                    }
                    let norm = (((tjnu + 1) * (tji + 1)) as f64).sqrt();
                    let d = wigner_small_d(2 * l2 as i32, tm2_b, 2 * lam2, theta);
                    geom += cg1 * cg2 * d * s / norm;
                }
            }

            m += pref * geom;
        }
        Ok(m)
    }

    /// W(theta, y) in 1/s, summed over photon helicities and averaged over
    /// the initial magnetic sublevels.
    fn w_ws(&self, ws: &mut Workspace, theta: f64, y: f64) -> Result<f64, TwoPhotonError> {
        let omega1 = y * self.delta_e;
        let omega2 = (1.0 - y) * self.delta_e;
        let tjf = self.spec.kind.tjf();
        let tji = self.spec.kind.tji();
        let mut sum = 0.0;
        for tmi in (-tji..=tji).step_by(2) {
            for tmf in (-tjf..=tjf).step_by(2) {
                for lam1 in [-1, 1] {
                    for lam2 in [-1, 1] {
                        let m = self.amplitude_ws(ws, tmf, tmi, lam1, lam2, theta, y)?;
                        sum += m.norm_sqr();
                    }
                }
            }
        }
        let rate = COUPLING * omega1 * omega2
            / (2.0 * std::f64::consts::PI).powi(3)
            / (tji + 1) as f64
            * sum;
        let w = 8.0 * std::f64::consts::PI.powi(2) * self.delta_e * rate;
        Ok(w * RATE_NATURAL_TO_PER_SEC)
    }

    pub fn w(&self, theta: f64, y: f64) -> Result<f64, TwoPhotonError> {
        let mut ws = Workspace::default();
        self.w_ws(&mut ws, theta, y)
    }

    /// Angular correlation scan at fixed y over the given opening angles
    /// (radians).
    pub fn correlation_function(
        &self,
        y: f64,
        thetas: &[f64],
    ) -> Result<CorrelationResult, TwoPhotonError> {
        let mut ws = Workspace::default();
        let mut w = Vec::with_capacity(thetas.len());
        for &theta in thetas {
            w.push(self.w_ws(&mut ws, theta, y)?);
        }
        Ok(CorrelationResult {
            z: self.spec.z,
            transition: self.spec.kind.label(),
            y,
            theta: thetas.to_vec(),
            w,
            l_max: if self.trunc.dipole_only { 1 } else { self.trunc.l_max },
            dipole_only: self.trunc.dipole_only,
            gauge: format!("{:?}", self.trunc.gauge),
            transition_energy: self.delta_e,
            basis_fingerprint: self.params.fingerprint(),
        })
    }

    /// Total two-photon rate: 1/2 int_0^1 dy int W(theta, y) sin(theta)
    /// d(theta), by Gauss-Legendre quadrature in y and cos(theta).
    pub fn total_rate(&self, n_y: usize, n_theta: usize) -> Result<RateResult, TwoPhotonError> {
        let (ynodes, yw) = gauss_legendre(n_y, 0.0, 1.0)?;
        let (cnodes, cw) = gauss_legendre(n_theta, -1.0, 1.0)?;
        let per_y: Vec<(f64, f64)> = ynodes
            .par_iter()
            .map(|&y| -> Result<(f64, f64), TwoPhotonError> {
                let mut ws = Workspace::default();
                let mut acc = 0.0;
                for (i, &c) in cnodes.iter().enumerate() {
                    acc += cw[i] * self.w_ws(&mut ws, c.acos(), y)?;
                }
                Ok((y, 0.5 * acc))
            })
            .collect::<Result<_, _>>()?;
        let total: f64 = per_y
            .iter()
            .zip(yw.iter())
            .map(|(&(_, dwdy), &w)| w * dwdy)
            .sum();
        Ok(RateResult {
            z: self.spec.z,
            transition: self.spec.kind.label(),
            total,
            spectrum: per_y,
            n_y,
            n_theta,
            l_max: if self.trunc.dipole_only { 1 } else { self.trunc.l_max },
            dipole_only: self.trunc.dipole_only,
            gauge: format!("{:?}", self.trunc.gauge),
            transition_energy: self.delta_e,
            basis_fingerprint: self.params.fingerprint(),
        })
    }

    /// Symmetric dipole-form amplitude S^{J_nu = L}_{Lp,Lp}(omega_1)
    /// + S^{J_nu = L}_{Lp,Lp}(omega_2) entering the analytic shape of the
    /// even-parity correlation functions.
    pub fn script_s_diag(&self, l: u32, pole: Pole, y: f64) -> Result<f64, TwoPhotonError> {
        let mut ws = Workspace::default();
        let omega1 = y * self.delta_e;
        let omega2 = (1.0 - y) * self.delta_e;
        let c = (l, pole);
        let tjnu = 2 * l as i32;
        let a = self.s_reduced(&mut ws, tjnu, c, c, omega1, omega2)?;
        let b = self.s_reduced(&mut ws, tjnu, c, c, omega2, omega1)?;
        Ok(pair_norm(l, pole, pole) * (a + b))
    }

    /// Symmetric and antisymmetric mixed combinations for odd-parity decays:
    ///   S = S_{Lp1,Lp2}(w1) + S_{Lp1,Lp2}(w2) + S_{Lp2,Lp1}(w2) + S_{Lp2,Lp1}(w1)
    ///   D = S_{Lp1,Lp2}(w1) - S_{Lp1,Lp2}(w2) + S_{Lp2,Lp1}(w2) - S_{Lp2,Lp1}(w1)
    pub fn script_sd_mixed(
        &self,
        l: u32,
        p1: Pole,
        p2: Pole,
        y: f64,
    ) -> Result<(f64, f64), TwoPhotonError> {
        let mut ws = Workspace::default();
        let omega1 = y * self.delta_e;
        let omega2 = (1.0 - y) * self.delta_e;
        let (ca, cb) = ((l, p1), (l, p2));
        let tjnu = 2 * l as i32;
        // S_{ca,cb}(w) has w in the denominator; the outer vertex carries the
        // other photon energy
        let s12_w1 = self.s_reduced(&mut ws, tjnu, ca, cb, omega2, omega1)?;
        let s12_w2 = self.s_reduced(&mut ws, tjnu, ca, cb, omega1, omega2)?;
        let s21_w1 = self.s_reduced(&mut ws, tjnu, cb, ca, omega2, omega1)?;
        let s21_w2 = self.s_reduced(&mut ws, tjnu, cb, ca, omega1, omega2)?;
        let v = pair_norm(l, p1, p2);
        Ok((
            v * (s12_w1 + s12_w2 + s21_w2 + s21_w1),
            v * (s12_w1 - s12_w2 + s21_w2 - s21_w1),
        ))
    }
}

/// Conversion between the internal reduced-vertex normalization and the one
/// assumed by the closed-form shapes: relative to that convention, the
/// internal electric vertex carries an extra i^(L-1) sqrt((2L+1)/3) and the
/// magnetic one the inverse, i^(1-L) sqrt(3/(2L+1)). Both are unity at L = 1,
/// electric-magnetic mixed products are unaffected for any L, and same-pole
/// pairs pick up (-1)^(L-1) times the squared magnitude.
fn pair_norm(l: u32, p1: Pole, p2: Pole) -> f64 {
    let r = 3.0 / (2.0 * l as f64 + 1.0);
    let mag = |p: Pole| match p {
        Pole::Electric => r.sqrt(),
        Pole::Magnetic => (1.0 / r).sqrt(),
    };
    let phase = if p1 == p2 && l % 2 == 0 { -1.0 } else { 1.0 };
    phase * mag(p1) * mag(p2)
}

/// Analytic near-dipole shape of the even-parity (ns -> 1s type)
/// correlation function:
///   1 + cos^2 t + 4 (S_M1/S_E1) cos t - (20/3)(S_E2/S_E1) cos^3 t.
pub fn shape_even(theta: f64, r_m1: f64, r_e2: f64) -> f64 {
    let c = theta.cos();
    1.0 + c * c + 4.0 * r_m1 * c - 20.0 / 3.0 * r_e2 * c.powi(3)
}

/// Analytic near-dipole shape of the odd-parity (3P0) correlation function:
///   sin^4(t/2) |S_E1M1|^2 (1 + 2 (1 + 2 cos t) S_E2M2 / S_E1M1)
/// + cos^4(t/2) |D_E1M1|^2 (1 - 2 (1 - 2 cos t) D_E2M2 / D_E1M1).
pub fn shape_odd(theta: f64, s_e1m1: f64, s_e2m2: f64, d_e1m1: f64, d_e2m2: f64) -> f64 {
    let c = theta.cos();
    let s2 = (theta / 2.0).sin().powi(2);
    let c2 = (theta / 2.0).cos().powi(2);
    let mut w = s2 * s2 * s_e1m1 * s_e1m1;
    if s_e1m1 != 0.0 {
        w *= 1.0 + 2.0 * (1.0 + 2.0 * c) * s_e2m2 / s_e1m1;
    }
    let mut w2 = c2 * c2 * d_e1m1 * d_e1m1;
    if d_e1m1 != 0.0 {
        w2 *= 1.0 - 2.0 * (1.0 - 2.0 * c) * d_e2m2 / d_e1m1;
    }
    w + w2
}
