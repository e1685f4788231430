//! Reduced one-electron matrix elements of the electric and magnetic
//! multipole operators alpha . a^{p,dagger}_L(k) between Dirac orbitals.
//!
//! Multipole potentials in Rose's convention, written in vector spherical
//! harmonics Y^M_{L,ell}:
//!   magnetic (p=0):  a^0_LM = j_L(kr) Y^M_{L,L}
//!   electric (p=1):  a^1_LM = sqrt((L+1)/(2L+1)) j_{L-1}(kr) Y^M_{L,L-1}
//!                           - sqrt(L/(2L+1))     j_{L+1}(kr) Y^M_{L,L+1}
//! The length (Babushkin-type) electric form adds the gradient gauge term
//! sqrt((L+1)/L) grad(j_L Y_LM)/k, which leaves on-shell matrix elements
//! unchanged.
//!
//! The spin-angular factors are evaluated exactly from Clebsch-Gordan and
//! Gaunt coefficients (no hand-copied closed forms); phases therefore follow
//! from the spinor convention (g Omega_kappa, i f Omega_{-kappa})/r alone.
//! An independent direct-quadrature oracle in the tests checks the result.

use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use thiserror::Error;

use crate::angular::{clebsch_gordan, wigner3j};
use crate::specfun::{sbessel, RadialGrid};
use crate::spectrum::{kappa_to_l, kappa_to_tj, RadialOrbital};

#[derive(Debug, Error)]
pub enum MultipoleError {
    #[error("orbitals sampled on different grids ({0} vs {1} points)")]
    GridMismatch(usize, usize),
    #[error("invalid channel: L = {l}, k = {k}")]
    BadChannel { l: u32, k: f64 },
    #[error(
        "radial grid under-resolves j_L oscillations at k = {k}: {nodes:.1} quadrature points per period per panel, need >= 8"
    )]
    UnderResolved { k: f64, nodes: f64 },
}

/// Photon multipole type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pole {
    Magnetic, // p = 0
    Electric, // p = 1
}

impl Pole {
    pub fn p(&self) -> u32 {
        match self {
            Pole::Magnetic => 0,
            Pole::Electric => 1,
        }
    }
}

/// Photon multipole channel: order L, type p, wavenumber k = omega.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipoleChannel {
    pub l: u32,
    pub pole: Pole,
    pub k: f64,
}

impl MultipoleChannel {
    pub fn new(l: u32, pole: Pole, k: f64) -> Result<Self, MultipoleError> {
        if l < 1 || !(k > 0.0) {
            return Err(MultipoleError::BadChannel { l, k });
        }
        Ok(Self { l, pole, k })
    }

    pub fn label(&self) -> String {
        match self.pole {
            Pole::Magnetic => format!("M{}", self.l),
            Pole::Electric => format!("E{}", self.l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Gauge {
    Velocity,
    Length,
}

/// Reduced matrix element with its provenance.
#[derive(Debug, Clone)]
pub struct ReducedME {
    pub value: Complex64,
    pub channel: MultipoleChannel,
    pub gauge: Gauge,
}

/// Multipole selection rule between symmetries kappa_f (bra) and kappa_i
/// (ket): j-triangle plus parity. Electric 2^L-pole requires l_f + l_i + L
/// even, magnetic odd.
pub fn selection_rule(kappa_f: i32, kappa_i: i32, l: u32, pole: Pole) -> bool {
    let tjf = kappa_to_tj(kappa_f);
    let tji = kappa_to_tj(kappa_i);
    let tl = 2 * l as i32;
    if tjf < (tji - tl).abs() || tjf > tji + tl {
        return false;
    }
    let lsum = kappa_to_l(kappa_f) + kappa_to_l(kappa_i) + l;
    match pole {
        Pole::Electric => lsum % 2 == 0,
        Pole::Magnetic => lsum % 2 == 1,
    }
}

/// VSH decomposition of a multipole potential: (coefficient, ell) terms with
/// radial dependence j_ell(kr).
fn vsh_terms(l: u32, pole: Pole, gauge: Gauge) -> Vec<(f64, u32)> {
    let lf = l as f64;
    match (pole, gauge) {
        (Pole::Magnetic, _) => vec![(1.0, l)],
        (Pole::Electric, Gauge::Velocity) => vec![
            (((lf + 1.0) / (2.0 * lf + 1.0)).sqrt(), l - 1),
            (-(lf / (2.0 * lf + 1.0)).sqrt(), l + 1),
        ],
        (Pole::Electric, Gauge::Length) => {
            // velocity form + sqrt((L+1)/L)/k * grad(j_L Y_LM), with
            // grad(j_L Y_LM) = k [ sqrt(L/(2L+1)) j_{L-1} Y_{L,L-1}
            //                      + sqrt((L+1)/(2L+1)) j_{L+1} Y_{L,L+1} ]
            let g = ((lf + 1.0) / lf).sqrt();
            vec![
                (
                    ((lf + 1.0) / (2.0 * lf + 1.0)).sqrt()
                        + g * (lf / (2.0 * lf + 1.0)).sqrt(),
                    l - 1,
                ),
                (
                    -(lf / (2.0 * lf + 1.0)).sqrt()
                        + g * ((lf + 1.0) / (2.0 * lf + 1.0)).sqrt(),
                    l + 1,
                ),
            ]
        }
    }
}

/// Gaunt-type integral of Y*_{lb mb} Y*_{l m} Y_{la ma} over the sphere.
fn gaunt_conj(lb: u32, mb: i32, l: u32, m: i32, la: u32, ma: i32) -> f64 {
    if ma != mb + m {
        return 0.0;
    }
    let phase = if (mb + m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let nf = (((2 * la + 1) * (2 * lb + 1) * (2 * l + 1)) as f64
        / (4.0 * std::f64::consts::PI))
        .sqrt();
    phase
        * nf
        * wigner3j(2 * la as i32, 2 * lb as i32, 2 * l as i32, 0, 0, 0)
        * wigner3j(
            2 * la as i32,
            2 * lb as i32,
            2 * l as i32,
            2 * ma,
            -2 * mb,
            -2 * m,
        )
}

/// <chi_{ms'}| sigma . e_q* |chi_{ms}>, all real in the spherical basis.
fn sigma_dot_eq_conj(q: i32, tms_b: i32, tms_k: i32) -> f64 {
    // sigma . e_{+1}* = [[0,0],[-sqrt2,0]], sigma . e_0* = sigma_z,
    // sigma . e_{-1}* = [[0,sqrt2],[0,0]]; rows/cols ordered (+1/2, -1/2)
    match (q, tms_b, tms_k) {
        (1, -1, 1) => -std::f64::consts::SQRT_2,
        (0, 1, 1) => 1.0,
        (0, -1, -1) => -1.0,
        (-1, 1, -1) => std::f64::consts::SQRT_2,
        _ => 0.0,
    }
}

/// Spherical-spinor expansion coefficient: Omega_{kappa m} contains
/// Y_{l, m-ms} chi_{ms} with weight <l m-ms 1/2 ms | j m> (doubled m's).
fn spinor_coeff(kappa: i32, tm: i32, tms: i32) -> f64 {
    let l = kappa_to_l(kappa) as i32;
    let tj = kappa_to_tj(kappa);
    clebsch_gordan(2 * l, tm - tms, 1, tms, tj, tm)
}

/// Exact angular matrix element
/// <Omega_{kb mb} | sigma . (Y^M_{L ell})* | Omega_{ka ma}>.
fn angular_me(kb: i32, tmb: i32, ka: i32, tma: i32, l: u32, tm_photon: i32, ell: u32) -> f64 {
    let lb = kappa_to_l(kb) as i32;
    let la = kappa_to_l(ka) as i32;
    let mut sum = 0.0;
    for tms_b in [-1, 1] {
        let cb = spinor_coeff(kb, tmb, tms_b);
        if cb == 0.0 {
            continue;
        }
        for tms_k in [-1, 1] {
            let ca = spinor_coeff(ka, tma, tms_k);
            if ca == 0.0 {
                continue;
            }
            for q in -1..=1 {
                let smat = sigma_dot_eq_conj(q, tms_b, tms_k);
                if smat == 0.0 {
                    continue;
                }
                // (Y^M_{L ell})* = sum_mu <ell mu 1 q | L M> Y*_{ell mu} e_q*
                let tmu = tm_photon - 2 * q;
                if tmu.abs() > 2 * ell as i32 {
                    continue;
                }
                let cgv = clebsch_gordan(2 * ell as i32, tmu, 2, 2 * q, 2 * l as i32, tm_photon);
                if cgv == 0.0 {
                    continue;
                }
                let g = gaunt_conj(
                    lb as u32,
                    (tmb - tms_b) / 2,
                    ell,
                    tmu / 2,
                    la as u32,
                    (tma - tms_k) / 2,
                );
                sum += cb * ca * cgv * smat * g;
            }
        }
    }
    sum
}

/// Exact scalar angular matrix element
/// <Omega_{kb mb} | (Y_{L M})* | Omega_{ka ma}>.
fn angular_scalar_me(kb: i32, tmb: i32, ka: i32, tma: i32, l: u32, tm_photon: i32) -> f64 {
    let lb = kappa_to_l(kb);
    let la = kappa_to_l(ka);
    let mut sum = 0.0;
    for tms in [-1, 1] {
        let cb = spinor_coeff(kb, tmb, tms);
        let ca = spinor_coeff(ka, tma, tms);
        if cb == 0.0 || ca == 0.0 {
            continue;
        }
        sum += cb
            * ca
            * gaunt_conj(lb, (tmb - tms) / 2, l, tm_photon / 2, la, (tma - tms) / 2);
    }
    sum
}

/// m-independent "reduced" scalar coefficient, same convention as
/// angular_reduced but for the spherical harmonic itself.
fn angular_scalar_reduced(kb: i32, ka: i32, l: u32) -> f64 {
    static CACHE: Lazy<Mutex<HashMap<(i32, i32, u32), f64>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    let key = (kb, ka, l);
    if let Some(&v) = CACHE.lock().unwrap().get(&key) {
        return v;
    }
    let tjb = kappa_to_tj(kb);
    let tja = kappa_to_tj(ka);
    let tl = 2 * l as i32;
    let mut out = 0.0;
    'search: for tma in (-tja..=tja).rev().step_by(2) {
        for tmb in (-tjb..=tjb).rev().step_by(2) {
            let tm = tma - tmb;
            if tm.abs() > tl || tm % 2 != 0 {
                continue;
            }
            let cg = clebsch_gordan(tjb, tmb, tl, tm, tja, tma);
            if cg.abs() < 1e-8 {
                continue;
            }
            let me = angular_scalar_me(kb, tmb, ka, tma, l, tm);
            out = me * ((tja + 1) as f64).sqrt() / cg;
            break 'search;
        }
    }
    CACHE.lock().unwrap().insert(key, out);
    out
}

/// m-independent "reduced" angular coefficient for one VSH term, defined by
/// angular_me = <jb mb L M | ja ma> / sqrt(2 ja + 1) * coeff.
fn angular_reduced(kb: i32, ka: i32, l: u32, ell: u32) -> f64 {
    static CACHE: Lazy<Mutex<HashMap<(i32, i32, u32, u32), f64>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    let key = (kb, ka, l, ell);
    if let Some(&v) = CACHE.lock().unwrap().get(&key) {
        return v;
    }
    let tjb = kappa_to_tj(kb);
    let tja = kappa_to_tj(ka);
    let tl = 2 * l as i32;
    let mut out = 0.0;
    'search: for tma in (-tja..=tja).rev().step_by(2) {
        for tmb in (-tjb..=tjb).rev().step_by(2) {
            let tm = tma - tmb;
            if tm.abs() > tl {
                continue;
            }
            let cg = clebsch_gordan(tjb, tmb, tl, tm, tja, tma);
            if cg.abs() < 1e-8 {
                continue;
            }
            let me = angular_me(kb, tmb, ka, tma, l, tm, ell);
            out = me * ((tja + 1) as f64).sqrt() / cg;
            break 'search;
        }
    }
    CACHE.lock().unwrap().insert(key, out);
    out
}

/// Asserts the grid resolves j_L(kr) oscillations: at least 8 quadrature
/// nodes per period 2 pi / k across the orbital support.
pub fn check_k_resolution(grid: &RadialGrid, k: f64) -> Result<(), MultipoleError> {
    // Composite Gauss-Legendre accuracy is governed by quadrature points per
    // oscillation period within a single panel, not by the local point gap.
    let (width, panel_nodes) = if grid.nodes_per_interval > 0 {
        (grid.max_interval, grid.nodes_per_interval as f64)
    } else {
        // ad-hoc grids: treat the largest point gap as a one-node panel
        let mut max_step = 0.0f64;
        for w in grid.points.windows(2) {
            max_step = max_step.max(w[1] - w[0]);
        }
        (max_step, 1.0)
    };
    let periods_per_panel = width * k / (2.0 * std::f64::consts::PI);
    let nodes = panel_nodes / periods_per_panel.max(1e-300);
    if nodes < 8.0 {
        return Err(MultipoleError::UnderResolved { k, nodes });
    }
    Ok(())
}

/// Reduced matrix element of alpha . (a^p_LM)^dagger between Dirac orbitals,
/// in the convention
///   <jb mb| alpha . (a^p_LM)* |ja ma>
///     = <jb mb L M | ja ma> / sqrt(2 ja + 1) * reduced .
/// Exact zero when the selection rule fails.
pub fn reduced_me(
    bra: &RadialOrbital,
    ket: &RadialOrbital,
    ch: &MultipoleChannel,
    gauge: Gauge,
    grid: &RadialGrid,
) -> Result<ReducedME, MultipoleError> {
    if bra.g.len() != ket.g.len() || bra.g.len() != grid.len() {
        return Err(MultipoleError::GridMismatch(bra.g.len(), ket.g.len()));
    }
    if ch.l < 1 || !(ch.k > 0.0) {
        return Err(MultipoleError::BadChannel { l: ch.l, k: ch.k });
    }
    check_k_resolution(grid, ch.k)?;

    if !selection_rule(bra.kappa, ket.kappa, ch.l, ch.pole) {
        return Ok(ReducedME {
            value: Complex64::new(0.0, 0.0),
            channel: *ch,
            gauge,
        });
    }

    // full ME = i sum_t c_t [ R_t(g_b f_a) A_t(k_b, -k_a)
    //                        - R_t(f_b g_a) A_t(-k_b, k_a) ]
    let mut acc = 0.0;
    for (coeff, ell) in vsh_terms(ch.l, ch.pole, gauge) {
        let a_up = angular_reduced(bra.kappa, -ket.kappa, ch.l, ell);
        let a_dn = angular_reduced(-bra.kappa, ket.kappa, ch.l, ell);
        if a_up == 0.0 && a_dn == 0.0 {
            continue;
        }
        let mut r_up = 0.0;
        let mut r_dn = 0.0;
        for i in 0..grid.len() {
            let j = sbessel(ell, ch.k * grid.points[i]);
            let w = grid.weights[i] * j;
            r_up += w * bra.g[i] * ket.f[i];
            r_dn += w * bra.f[i] * ket.g[i];
        }
        acc += coeff * (r_up * a_up - r_dn * a_dn);
    }

    // The length-form electric field carries a scalar potential
    // phi = i G j_L Y_LM (G = sqrt((L+1)/L)); the vertex alpha.A* - phi*
    // then picks up +i G <b| j_L Y*_LM |a>, which restores on-shell gauge
    // invariance of the full matrix element.
    if ch.pole == Pole::Electric && gauge == Gauge::Length {
        let g_fac = ((ch.l as f64 + 1.0) / ch.l as f64).sqrt();
        let s_gg = angular_scalar_reduced(bra.kappa, ket.kappa, ch.l);
        let s_ff = angular_scalar_reduced(-bra.kappa, -ket.kappa, ch.l);
        if s_gg != 0.0 || s_ff != 0.0 {
            let mut r_gg = 0.0;
            let mut r_ff = 0.0;
            for i in 0..grid.len() {
                let j = sbessel(ch.l, ch.k * grid.points[i]);
                let w = grid.weights[i] * j;
                r_gg += w * bra.g[i] * ket.g[i];
                r_ff += w * bra.f[i] * ket.f[i];
            }
            acc += g_fac * (r_gg * s_gg + r_ff * s_ff);
        }
    }

    Ok(ReducedME {
        value: Complex64::new(0.0, acc),
        channel: *ch,
        gauge,
    })
}
