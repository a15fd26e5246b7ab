//! Geometric mmWave channel model for the BS-IRS, IRS-user and BS-user links.
//!
//! Both the base station and the reflecting surface are uniform planar
//! arrays. Each link is a sum of `L` plane-wave paths with complex gain
//! `alpha ~ CN(0, 1)`, azimuth uniform on `[0, 2pi)` and elevation uniform on
//! `[-pi/2, pi/2]`, normalised so that `E||h||^2` equals the element count.
//! Distance-dependent path loss is applied afterwards as an amplitude scale.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Uniform planar array: `n1` elements along the horizon, `n2` vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpaGeometry {
    pub n1: usize,
    pub n2: usize,
    /// Element spacing as a fraction of the carrier wavelength.
    #[serde(default = "half_wavelength")]
    pub spacing_over_wavelength: f64,
}

fn half_wavelength() -> f64 {
    0.5
}

impl UpaGeometry {
    /// Half-wavelength spaced array.
    pub fn new(n1: usize, n2: usize) -> Self {
        Self {
            n1,
            n2,
            spacing_over_wavelength: 0.5,
        }
    }

    pub fn with_spacing(mut self, spacing_over_wavelength: f64) -> Self {
        self.spacing_over_wavelength = spacing_over_wavelength;
        self
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `field` names the config entry the geometry came from.
    pub fn validate(&self, field: &str) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::config(
                field,
                format!("array dimensions must be positive, got {}x{}", self.n1, self.n2),
            ));
        }
        if !(self.spacing_over_wavelength > 0.0 && self.spacing_over_wavelength.is_finite()) {
            return Err(Error::config(
                format!("{field}.spacing_over_wavelength"),
                format!("must be positive, got {}", self.spacing_over_wavelength),
            ));
        }
        Ok(())
    }
}

/// One propagation path of a user link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub gain: C64,
    pub azimuth: f64,
    pub elevation: f64,
}

/// One path of the BS-IRS link, with departure angles at the BS and
/// arrival angles at the IRS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsIrsPath {
    pub gain: C64,
    pub departure: (f64, f64),
    pub arrival: (f64, f64),
}

/// Array response of a UPA toward `(azimuth, elevation)`.
///
/// Entry `i1 * n2 + i2` is
/// `exp(-j 2pi (d/lambda) (sin(az) cos(el) i1 + sin(el) i2)) / sqrt(n1 n2)`,
/// i.e. the Kronecker product of the horizontal and vertical phase ramps.
/// The result has unit Euclidean norm.
pub fn steering_vector(geometry: &UpaGeometry, azimuth: f64, elevation: f64) -> DVector<C64> {
    let k = 2.0 * PI * geometry.spacing_over_wavelength;
    let horizontal = phase_ramp(geometry.n1, -k * azimuth.sin() * elevation.cos());
    let vertical = phase_ramp(geometry.n2, -k * elevation.sin());
    let scale = 1.0 / (geometry.len() as f64).sqrt();
    let mut out = DVector::zeros(geometry.len());
    for (i1, h) in horizontal.iter().enumerate() {
        for (i2, v) in vertical.iter().enumerate() {
            out[i1 * geometry.n2 + i2] = h * v * scale;
        }
    }
    out
}

/// `[exp(j step i)]` for `i = 0..n`.
fn phase_ramp(n: usize, step: f64) -> Vec<C64> {
    (0..n).map(|i| C64::from_polar(1.0, step * i as f64)).collect()
}

/// BS-IRS channel `G` (N x M, rows index IRS elements) from explicit paths:
/// `sqrt(MN/L) sum_l alpha_l a_irs(arrival_l) b_bs(departure_l)^T`.
pub fn channel_g_from_paths(irs: &UpaGeometry, bs: &UpaGeometry, paths: &[BsIrsPath]) -> DMatrix<C64> {
    let (n, m) = (irs.len(), bs.len());
    let mut g = DMatrix::zeros(n, m);
    if paths.is_empty() {
        return g;
    }
    for path in paths {
        let a = steering_vector(irs, path.arrival.0, path.arrival.1);
        let b = steering_vector(bs, path.departure.0, path.departure.1);
        g += (a * b.transpose()) * path.gain;
    }
    g * C64::from(((m * n) as f64 / paths.len() as f64).sqrt())
}

/// User link `sqrt(len/L) sum_l alpha_l s(az_l, el_l)` for an array.
pub fn channel_vector_from_paths(geometry: &UpaGeometry, paths: &[PathParams]) -> DVector<C64> {
    let mut h = DVector::zeros(geometry.len());
    if paths.is_empty() {
        return h;
    }
    for path in paths {
        h += steering_vector(geometry, path.azimuth, path.elevation) * path.gain;
    }
    h * C64::from((geometry.len() as f64 / paths.len() as f64).sqrt())
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_angles<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let azimuth = rng.random_range(0.0..2.0 * PI);
    let elevation = rng.random_range(-PI / 2.0..=PI / 2.0);
    (azimuth, elevation)
}

fn check_paths(paths: usize, field: &str) -> Result<()> {
    if paths == 0 {
        return Err(Error::config(field, "path count must be at least 1"));
    }
    Ok(())
}

/// Random BS-IRS channel with `paths` i.i.d. paths.
pub fn generate_channel_g<R: Rng + ?Sized>(
    rng: &mut R,
    irs: &UpaGeometry,
    bs: &UpaGeometry,
    paths: usize,
) -> Result<DMatrix<C64>> {
    check_paths(paths, "paths.bs_irs")?;
    let draws: Vec<BsIrsPath> = (0..paths)
        .map(|_| {
            let gain = complex_gaussian(rng);
            let departure = random_angles(rng);
            let arrival = random_angles(rng);
            BsIrsPath {
                gain,
                departure,
                arrival,
            }
        })
        .collect();
    Ok(channel_g_from_paths(irs, bs, &draws))
}

fn random_user_paths<R: Rng + ?Sized>(rng: &mut R, paths: usize) -> Vec<PathParams> {
    (0..paths)
        .map(|_| {
            let gain = complex_gaussian(rng);
            let (azimuth, elevation) = random_angles(rng);
            PathParams {
                gain,
                azimuth,
                elevation,
            }
        })
        .collect()
}

/// Random IRS-user channel (length N).
pub fn generate_channel_hr<R: Rng + ?Sized>(rng: &mut R, irs: &UpaGeometry, paths: usize) -> Result<DVector<C64>> {
    check_paths(paths, "paths.irs_user")?;
    Ok(channel_vector_from_paths(irs, &random_user_paths(rng, paths)))
}

/// Random BS-user channel (length M).
pub fn generate_channel_hd<R: Rng + ?Sized>(rng: &mut R, bs: &UpaGeometry, paths: usize) -> Result<DVector<C64>> {
    check_paths(paths, "paths.bs_user")?;
    Ok(channel_vector_from_paths(bs, &random_user_paths(rng, paths)))
}

/// One realization of every link in the system.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS to IRS, N x M.
    pub g: DMatrix<C64>,
    /// IRS to user k, length N each.
    pub h_r: Vec<DVector<C64>>,
    /// BS to user k, length M each.
    pub h_d: Vec<DVector<C64>>,
}

impl ChannelSet {
    pub fn irs_elements(&self) -> usize {
        self.g.nrows()
    }

    pub fn bs_antennas(&self) -> usize {
        self.g.ncols()
    }

    pub fn users(&self) -> usize {
        self.h_r.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = self.g.shape();
        if self.h_r.len() != self.h_d.len() {
            return Err(Error::config(
                "channels",
                format!("{} IRS-user links but {} BS-user links", self.h_r.len(), self.h_d.len()),
            ));
        }
        if let Some(bad) = self.h_r.iter().position(|h| h.len() != n) {
            return Err(Error::config("channels.h_r", format!("user {bad} vector length differs from N={n}")));
        }
        if let Some(bad) = self.h_d.iter().position(|h| h.len() != m) {
            return Err(Error::config("channels.h_d", format!("user {bad} vector length differs from M={m}")));
        }
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !(self.g.iter().all(finite)
            && self.h_r.iter().all(|h| h.iter().all(finite))
            && self.h_d.iter().all(|h| h.iter().all(finite)))
        {
            return Err(Error::config("channels", "non-finite channel coefficient"));
        }
        Ok(())
    }

    /// Scale the links so that received power is multiplied by `br`, `ru`
    /// and `bu` on the BS-IRS, IRS-user and BS-user links respectively.
    pub fn scale_power(&self, br: f64, ru: f64, bu: f64) -> ChannelSet {
        let (sbr, sru, sbu) = (C64::from(br.sqrt()), C64::from(ru.sqrt()), C64::from(bu.sqrt()));
        ChannelSet {
            g: &self.g * sbr,
            h_r: self.h_r.iter().map(|h| h * sru).collect(),
            h_d: self.h_d.iter().map(|h| h * sbu).collect(),
        }
    }
}

/// Distance-dependent path loss `reference_gain * d^(-exponent)` per link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossModel {
    #[serde(default = "default_reference_gain")]
    pub reference_gain: f64,
    #[serde(default = "default_exponent_br")]
    pub exponent_br: f64,
    #[serde(default = "default_exponent_ru")]
    pub exponent_ru: f64,
    #[serde(default = "default_exponent_bu")]
    pub exponent_bu: f64,
    pub d_br_m: f64,
    pub d_ru_m: f64,
    pub d_bu_m: f64,
}

fn default_reference_gain() -> f64 {
    1e-3
}
fn default_exponent_br() -> f64 {
    2.2
}
fn default_exponent_ru() -> f64 {
    2.8
}
fn default_exponent_bu() -> f64 {
    3.5
}

impl Default for PathLossModel {
    /// 50 m BS-IRS, 2 m IRS-user, 60 m BS-user.
    fn default() -> Self {
        Self {
            reference_gain: default_reference_gain(),
            exponent_br: default_exponent_br(),
            exponent_ru: default_exponent_ru(),
            exponent_bu: default_exponent_bu(),
            d_br_m: 50.0,
            d_ru_m: 2.0,
            d_bu_m: 60.0,
        }
    }
}

impl PathLossModel {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("path_loss.reference_gain", self.reference_gain),
            ("path_loss.exponent_br", self.exponent_br),
            ("path_loss.exponent_ru", self.exponent_ru),
            ("path_loss.exponent_bu", self.exponent_bu),
            ("path_loss.d_br_m", self.d_br_m),
            ("path_loss.d_ru_m", self.d_ru_m),
            ("path_loss.d_bu_m", self.d_bu_m),
        ];
        for (field, value) in checks {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(field, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    fn loss(&self, distance: f64, exponent: f64) -> f64 {
        self.reference_gain * distance.powf(-exponent)
    }

    /// Power gains `(BS-IRS, IRS-user, BS-user)`.
    pub fn power_gains(&self) -> (f64, f64, f64) {
        (
            self.loss(self.d_br_m, self.exponent_br),
            self.loss(self.d_ru_m, self.exponent_ru),
            self.loss(self.d_bu_m, self.exponent_bu),
        )
    }
}

pub fn apply_path_loss(channels: &ChannelSet, model: &PathLossModel) -> ChannelSet {
    let (br, ru, bu) = model.power_gains();
    channels.scale_power(br, ru, bu)
}

/// Link sizes for a full channel draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub bs: UpaGeometry,
    pub irs: UpaGeometry,
    pub users: usize,
    pub paths_bs_irs: usize,
    pub paths_irs_user: usize,
    pub paths_bs_user: usize,
    pub path_loss: PathLossModel,
}

/// Draw `G`, then `h_r,k` and `h_d,k` for each user, and apply path loss.
pub fn generate_channels<R: Rng + ?Sized>(rng: &mut R, spec: &ChannelSpec) -> Result<ChannelSet> {
    spec.path_loss.validate()?;
    let g = generate_channel_g(rng, &spec.irs, &spec.bs, spec.paths_bs_irs)?;
    let mut h_r = Vec::with_capacity(spec.users);
    let mut h_d = Vec::with_capacity(spec.users);
    for _ in 0..spec.users {
        h_r.push(generate_channel_hr(rng, &spec.irs, spec.paths_irs_user)?);
        h_d.push(generate_channel_hd(rng, &spec.bs, spec.paths_bs_user)?);
    }
    Ok(apply_path_loss(&ChannelSet { g, h_r, h_d }, &spec.path_loss))
}
