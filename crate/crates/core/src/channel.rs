//! Channel models for the multiple-access wiretap setting.
//!
//! Two model families live here. `DmChannel` is a discrete-memoryless
//! multiple-access channel with two outputs, one for the legitimate receiver
//! (Bob) and one for the eavesdropper (Eve), given as an explicit transition
//! tensor p(y,z|x_1..x_K). `GvChannel` is the Gaussian-vector counterpart:
//! per-user complex gain matrices into Bob and Eve plus the two noise powers.
//!
//! `draw_gv_channel` samples GV instances from an uplink-cell geometry: Bob
//! sits at the center of a disc, users and one eavesdropper are dropped
//! uniformly at random, and each link gets distance pathloss, log-normal
//! shadowing, and i.i.d. Rayleigh small-scale fading. All powers are linear
//! mW internally; dBm appears only at the configuration boundary.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cxjson, CMat};

/// Antenna bookkeeping: K users with T_k transmit antennas each, Bob with B
/// receive antennas, Eve with E.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDims {
    /// User count K.
    pub k: usize,
    /// Per-user transmit antenna counts, length K.
    pub t: Vec<usize>,
    /// Bob's receive antenna count.
    pub b: usize,
    /// Eve's receive antenna count.
    pub e: usize,
}

impl SystemDims {
    /// All users share the same antenna count.
    pub fn uniform(k: usize, t: usize, b: usize, e: usize) -> Self {
        Self { k, t: vec![t; k], b, e }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("user count must be at least 1"));
        }
        if self.t.len() != self.k {
            return Err(Error::invalid(format!(
                "antenna list has {} entries for {} users",
                self.t.len(),
                self.k
            )));
        }
        if self.t.iter().any(|&t| t == 0) || self.b == 0 || self.e == 0 {
            return Err(Error::invalid("all antenna counts must be at least 1"));
        }
        Ok(())
    }
}

/// Gaussian-vector channel instance: y = Σ_k H_k x_k + n_B, z = Σ_k G_k x_k + n_E.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GvChannel {
    /// Bob gain matrices, H_k of shape B×T_k.
    #[serde(with = "cxjson::cmat_list")]
    pub h: Vec<CMat>,
    /// Eve gain matrices, G_k of shape E×T_k.
    #[serde(with = "cxjson::cmat_list")]
    pub g: Vec<CMat>,
    /// Bob noise power per receive antenna, linear mW.
    pub sigma_b2: f64,
    /// Eve noise power per receive antenna, linear mW.
    pub sigma_e2: f64,
}

impl GvChannel {
    pub fn users(&self) -> usize {
        self.h.len()
    }

    /// Dimensions implied by the stored matrices.
    pub fn dims(&self) -> SystemDims {
        SystemDims {
            k: self.h.len(),
            t: self.h.iter().map(CMat::ncols).collect(),
            b: self.h.first().map_or(0, CMat::nrows),
            e: self.g.first().map_or(0, CMat::nrows),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.is_empty() || self.h.len() != self.g.len() {
            return Err(Error::invalid("need matching nonempty H and G lists"));
        }
        let b = self.h[0].nrows();
        let e = self.g[0].nrows();
        for (k, (h, g)) in self.h.iter().zip(&self.g).enumerate() {
            if h.nrows() != b || g.nrows() != e || h.ncols() != g.ncols() || h.ncols() == 0 {
                return Err(Error::invalid(format!("inconsistent shapes for user {k}")));
            }
            if h.iter().chain(g.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::invalid(format!("non-finite gain entry for user {k}")));
            }
        }
        if !(self.sigma_b2 > 0.0) || !(self.sigma_e2 > 0.0) {
            return Err(Error::invalid("noise powers must be positive"));
        }
        Ok(())
    }

    pub fn to_json_file(&self, path: &str) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn from_json_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ch: Self = serde_json::from_str(&text)?;
        ch.validate()?;
        Ok(ch)
    }
}

/// Discrete-memoryless channel p(y,z|x_1..x_K) over finite alphabets.
///
/// The transition tensor is flattened with the joint input index varying
/// slowest: `transition[(x_joint * bob_size + y) * eve_size + z]`, where
/// `x_joint` packs per-user symbols with user 0 varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct DmChannel {
    pub input_sizes: Vec<usize>,
    pub bob_size: usize,
    pub eve_size: usize,
    transition: Vec<f64>,
}

impl DmChannel {
    pub fn new(
        input_sizes: Vec<usize>,
        bob_size: usize,
        eve_size: usize,
        transition: Vec<f64>,
    ) -> Result<Self> {
        if input_sizes.is_empty() || input_sizes.iter().any(|&s| s == 0) {
            return Err(Error::invalid("input alphabets must be nonempty"));
        }
        if bob_size == 0 || eve_size == 0 {
            return Err(Error::invalid("output alphabets must be nonempty"));
        }
        let joint: usize = input_sizes.iter().product();
        if transition.len() != joint * bob_size * eve_size {
            return Err(Error::invalid(format!(
                "transition tensor has {} entries, expected {}",
                transition.len(),
                joint * bob_size * eve_size
            )));
        }
        if transition.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) {
            return Err(Error::InvalidDistribution(
                "transition probabilities must lie in [0, 1]".into(),
            ));
        }
        for x in 0..joint {
            let base = x * bob_size * eve_size;
            let s: f64 = transition[base..base + bob_size * eve_size].iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidDistribution(format!(
                    "conditional slice {x} sums to {s}, expected 1"
                )));
            }
        }
        Ok(Self { input_sizes, bob_size, eve_size, transition })
    }

    /// Build from a closure giving p(y,z | per-user symbols).
    pub fn from_fn(
        input_sizes: Vec<usize>,
        bob_size: usize,
        eve_size: usize,
        mut p: impl FnMut(&[usize], usize, usize) -> f64,
    ) -> Result<Self> {
        let joint: usize = input_sizes.iter().product();
        let mut transition = Vec::with_capacity(joint * bob_size * eve_size);
        let mut symbols = vec![0usize; input_sizes.len()];
        for x in 0..joint {
            unpack_joint(x, &input_sizes, &mut symbols);
            for y in 0..bob_size {
                for z in 0..eve_size {
                    transition.push(p(&symbols, y, z));
                }
            }
        }
        Self::new(input_sizes, bob_size, eve_size, transition)
    }

    pub fn users(&self) -> usize {
        self.input_sizes.len()
    }

    pub fn joint_input_size(&self) -> usize {
        self.input_sizes.iter().product()
    }

    /// p(y, z | x_joint).
    #[inline]
    pub fn prob(&self, x_joint: usize, y: usize, z: usize) -> f64 {
        self.transition[(x_joint * self.bob_size + y) * self.eve_size + z]
    }
}

/// Pack per-user symbols into a joint index, user 0 fastest.
pub fn joint_index(symbols: &[usize], sizes: &[usize]) -> usize {
    debug_assert_eq!(symbols.len(), sizes.len());
    let mut idx = 0;
    for (s, n) in symbols.iter().zip(sizes).rev() {
        debug_assert!(s < n);
        idx = idx * n + s;
    }
    idx
}

/// Inverse of `joint_index`, writing into `out`.
pub fn unpack_joint(mut idx: usize, sizes: &[usize], out: &mut [usize]) {
    for (o, n) in out.iter_mut().zip(sizes) {
        *o = idx % n;
        idx /= n;
    }
}

/// Independent per-user input distributions p(x_1)...p(x_K).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPmf {
    pmfs: Vec<Vec<f64>>,
}

impl ProductPmf {
    pub fn new(pmfs: Vec<Vec<f64>>) -> Result<Self> {
        if pmfs.is_empty() {
            return Err(Error::InvalidDistribution("need at least one pmf".into()));
        }
        for (k, p) in pmfs.iter().enumerate() {
            if p.is_empty() || p.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "pmf {k} must be nonempty and nonnegative"
                )));
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidDistribution(format!(
                    "pmf {k} sums to {s}, expected 1"
                )));
            }
        }
        Ok(Self { pmfs })
    }

    pub fn uniform(sizes: &[usize]) -> Self {
        Self {
            pmfs: sizes.iter().map(|&n| vec![1.0 / n as f64; n]).collect(),
        }
    }

    pub fn users(&self) -> usize {
        self.pmfs.len()
    }

    pub fn pmf(&self, user: usize) -> &[f64] {
        &self.pmfs[user]
    }

    /// Π_k p_k(x_k) for the symbols packed in `x_joint`.
    pub fn joint_prob_packed(&self, mut x_joint: usize) -> f64 {
        let mut p = 1.0;
        for pmf in &self.pmfs {
            p *= pmf[x_joint % pmf.len()];
            x_joint /= pmf.len();
        }
        p
    }
}

/// Geometry and large-scale propagation knobs for random channel draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawConfig {
    /// Cell radius in meters; Bob sits at the center.
    pub radius_m: f64,
    /// Minimum user-to-Bob distance in meters.
    pub min_dist_m: f64,
    /// Pathloss exponent.
    pub pathloss_exp: f64,
    /// Log-normal shadowing standard deviation in dB; 0 disables shadowing.
    pub shadow_db: f64,
    /// Receiver noise power in dBm, applied to both Bob and Eve.
    pub noise_dbm: f64,
    /// Base RNG seed for harness-level draws.
    pub seed: u64,
}

impl Default for DrawConfig {
    fn default() -> Self {
        Self {
            radius_m: 500.0,
            min_dist_m: 20.0,
            pathloss_exp: 3.7,
            shadow_db: 8.0,
            noise_dbm: -100.0,
            seed: 0,
        }
    }
}

impl DrawConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > self.min_dist_m) || !(self.min_dist_m > 0.0) {
            return Err(Error::invalid(format!(
                "need radius > min distance > 0, got radius {} m, min {} m",
                self.radius_m, self.min_dist_m
            )));
        }
        if !(self.pathloss_exp > 0.0) {
            return Err(Error::invalid("pathloss exponent must be positive"));
        }
        if !(self.shadow_db >= 0.0) {
            return Err(Error::invalid("shadowing standard deviation must be nonnegative"));
        }
        if !self.noise_dbm.is_finite() {
            return Err(Error::invalid("noise power must be finite"));
        }
        Ok(())
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_linear(self.noise_dbm)
    }
}

/// Sampled node positions for one channel realization. Bob is at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub user_xy: Vec<[f64; 2]>,
    pub eve_xy: [f64; 2],
    /// User-to-Bob distances in meters.
    pub user_bob_m: Vec<f64>,
    /// User-to-Eve distances in meters, floored at 1 mm so gains stay finite.
    pub user_eve_m: Vec<f64>,
}

/// One channel realization together with the geometry and large-scale gains
/// that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelDraw {
    pub channel: GvChannel,
    pub placement: Placement,
    /// Large-scale power gain applied to H_k (pathloss times shadowing).
    pub scale_bob: Vec<f64>,
    /// Large-scale power gain applied to G_k.
    pub scale_eve: Vec<f64>,
}

/// 10^(x/10): dBm to linear mW.
pub fn dbm_to_linear(x_dbm: f64) -> f64 {
    10f64.powf(x_dbm / 10.0)
}

/// 10 log10(x): linear mW to dBm.
pub fn linear_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// d^(-exponent) power gain.
pub fn pathloss_gain(dist_m: f64, exponent: f64) -> f64 {
    dist_m.powf(-exponent)
}

const PLACEMENT_ATTEMPTS: usize = 10_000;
const MIN_EVE_DIST_M: f64 = 1e-3;

fn uniform_disc_point(rng: &mut impl Rng, radius: f64) -> [f64; 2] {
    // r = R sqrt(u) makes the point uniform over the disc area.
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    [r * theta.cos(), r * theta.sin()]
}

/// CN(0, scale) i.i.d. entries: (n1 + i n2)/sqrt(2) times sqrt(scale).
pub fn fading_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> CMat {
    let amp = (0.5 * scale).sqrt();
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = Complex64::new(re * amp, im * amp);
        }
    }
    m
}

/// Draw one channel realization; see `draw_gv_channel_detailed` for the full
/// record including geometry.
pub fn draw_gv_channel(seed: u64, dims: &SystemDims, cfg: &DrawConfig) -> Result<GvChannel> {
    Ok(draw_gv_channel_detailed(seed, dims, cfg)?.channel)
}

/// Draw one channel realization, keeping the sampled geometry and per-link
/// large-scale gains alongside the gain matrices.
///
/// The RNG stream consumption order is fixed by contract so draws are
/// reproducible across releases: per-user positions (rejection-sampled
/// against the minimum Bob distance), then Eve's position, then one shadowing
/// normal per user-to-Bob link, one per user-to-Eve link, then the entries of
/// H_1..H_K, then G_1..G_K, each matrix filled row-major. Shadowing normals
/// are consumed even when `shadow_db` is zero.
pub fn draw_gv_channel_detailed(
    seed: u64,
    dims: &SystemDims,
    cfg: &DrawConfig,
) -> Result<ChannelDraw> {
    dims.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut user_xy = Vec::with_capacity(dims.k);
    for _ in 0..dims.k {
        let mut placed = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let p = uniform_disc_point(&mut rng, cfg.radius_m);
            if p[0].hypot(p[1]) >= cfg.min_dist_m {
                placed = Some(p);
                break;
            }
        }
        user_xy.push(placed.ok_or(Error::DegenerateGeometry {
            attempts: PLACEMENT_ATTEMPTS,
        })?);
    }
    let eve_xy = uniform_disc_point(&mut rng, cfg.radius_m);

    let user_bob_m: Vec<f64> = user_xy.iter().map(|p| p[0].hypot(p[1])).collect();
    let user_eve_m: Vec<f64> = user_xy
        .iter()
        .map(|p| (p[0] - eve_xy[0]).hypot(p[1] - eve_xy[1]).max(MIN_EVE_DIST_M))
        .collect();

    let shadow_gain = |rng: &mut ChaCha8Rng, sigma_db: f64| -> f64 {
        let n: f64 = rng.sample(StandardNormal);
        10f64.powf(n * sigma_db / 10.0)
    };
    let mut scale_bob = Vec::with_capacity(dims.k);
    let mut scale_eve = Vec::with_capacity(dims.k);
    for k in 0..dims.k {
        scale_bob.push(pathloss_gain(user_bob_m[k], cfg.pathloss_exp)
            * shadow_gain(&mut rng, cfg.shadow_db));
        scale_eve.push(pathloss_gain(user_eve_m[k], cfg.pathloss_exp)
            * shadow_gain(&mut rng, cfg.shadow_db));
    }

    let h: Vec<CMat> = (0..dims.k)
        .map(|k| fading_matrix(&mut rng, dims.b, dims.t[k], scale_bob[k]))
        .collect();
    let g: Vec<CMat> = (0..dims.k)
        .map(|k| fading_matrix(&mut rng, dims.e, dims.t[k], scale_eve[k]))
        .collect();

    let noise = cfg.noise_mw();
    let channel = GvChannel { h, g, sigma_b2: noise, sigma_e2: noise };
    channel.validate()?;
    Ok(ChannelDraw {
        channel,
        placement: Placement { user_xy, eve_xy, user_bob_m, user_eve_m },
        scale_bob,
        scale_eve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base_cfg() -> DrawConfig {
        DrawConfig::default()
    }

    #[test]
    fn dbm_conversions() {
        assert_eq!(dbm_to_linear(0.0), 1.0);
        assert_eq!(dbm_to_linear(10.0), 10.0);
        assert_relative_eq!(dbm_to_linear(-100.0), 1e-10, max_relative = 1e-12);
        assert_relative_eq!(linear_to_dbm(dbm_to_linear(7.3)), 7.3, max_relative = 1e-12);
    }

    #[test]
    fn default_cfg_draws_valid_channel() {
        let dims = SystemDims::uniform(2, 4, 4, 4);
        let ch = draw_gv_channel(42, &dims, &base_cfg()).unwrap();
        ch.validate().unwrap();
        assert_eq!(ch.dims(), dims);
        assert_relative_eq!(ch.sigma_b2, 1e-10, max_relative = 1e-12);
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let dims = SystemDims::uniform(3, 2, 4, 3);
        let a = draw_gv_channel_detailed(7, &dims, &base_cfg()).unwrap();
        let b = draw_gv_channel_detailed(7, &dims, &base_cfg()).unwrap();
        assert_eq!(a, b);
        let c = draw_gv_channel(8, &dims, &base_cfg()).unwrap();
        assert_ne!(a.channel, c);
    }

    #[test]
    fn geometry_respects_bounds() {
        let dims = SystemDims::uniform(4, 1, 2, 2);
        let cfg = base_cfg();
        for seed in 0..50 {
            let d = draw_gv_channel_detailed(seed, &dims, &cfg).unwrap();
            for &dist in &d.placement.user_bob_m {
                assert!(dist >= cfg.min_dist_m && dist <= cfg.radius_m);
            }
            let eve_r = d.placement.eve_xy[0].hypot(d.placement.eve_xy[1]);
            assert!(eve_r <= cfg.radius_m);
        }
    }

    #[test]
    fn degenerate_cfg_rejected() {
        let dims = SystemDims::uniform(1, 1, 1, 1);
        let mut cfg = base_cfg();
        cfg.radius_m = cfg.min_dist_m;
        assert!(draw_gv_channel(0, &dims, &cfg).is_err());

        cfg.radius_m = cfg.min_dist_m * (1.0 + 1e-12);
        match draw_gv_channel(0, &dims, &cfg) {
            Err(Error::DegenerateGeometry { .. }) => {}
            other => panic!("expected geometry failure, got {other:?}"),
        }
    }

    #[test]
    fn zero_shadowing_scale_is_pure_pathloss() {
        let dims = SystemDims::uniform(2, 2, 3, 3);
        let mut cfg = base_cfg();
        cfg.radius_m = 100.0;
        cfg.min_dist_m = 20.0;
        cfg.shadow_db = 0.0;
        let d = draw_gv_channel_detailed(11, &dims, &cfg).unwrap();
        for k in 0..dims.k {
            let hand_bob = d.placement.user_bob_m[k].powf(-3.7);
            let hand_eve = d.placement.user_eve_m[k].powf(-3.7);
            assert_relative_eq!(d.scale_bob[k], hand_bob, max_relative = 1e-12);
            assert_relative_eq!(d.scale_eve[k], hand_eve, max_relative = 1e-12);
        }
    }

    #[test]
    fn fading_variance_matches_link_scale() {
        use rand::SeedableRng;
        let scale = pathloss_gain(50.0, 3.7);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let (rows, cols) = (2, 2);
        let draws = 20_000;
        let mut acc = vec![0.0f64; rows * cols];
        for _ in 0..draws {
            let m = fading_matrix(&mut rng, rows, cols, scale);
            for (a, z) in acc.iter_mut().zip(m.iter()) {
                *a += z.norm_sqr();
            }
        }
        for a in acc {
            let var = a / draws as f64;
            assert!(
                (var - scale).abs() <= 0.05 * scale,
                "empirical variance {var} vs scale {scale}"
            );
        }
    }

    #[test]
    fn channel_json_round_trip() {
        let dims = SystemDims::uniform(2, 2, 3, 2);
        let ch = draw_gv_channel(5, &dims, &base_cfg()).unwrap();
        let text = serde_json::to_string(&ch).unwrap();
        let back: GvChannel = serde_json::from_str(&text).unwrap();
        assert_eq!(ch, back);
    }

    #[test]
    fn joint_index_round_trip() {
        let sizes = [2usize, 3, 4];
        let mut out = vec![0usize; 3];
        for idx in 0..24 {
            unpack_joint(idx, &sizes, &mut out);
            assert_eq!(joint_index(&out, &sizes), idx);
        }
        // User 0 varies fastest.
        assert_eq!(joint_index(&[1, 0, 0], &sizes), 1);
        assert_eq!(joint_index(&[0, 1, 0], &sizes), 2);
        assert_eq!(joint_index(&[0, 0, 1], &sizes), 6);
    }

    #[test]
    fn dm_channel_validates_slices() {
        // Y = X1 XOR X2, Z = X1, deterministic.
        let dm = DmChannel::from_fn(vec![2, 2], 2, 2, |x, y, z| {
            let ok = y == (x[0] ^ x[1]) && z == x[0];
            if ok { 1.0 } else { 0.0 }
        })
        .unwrap();
        assert_eq!(dm.joint_input_size(), 4);
        assert_eq!(dm.prob(joint_index(&[1, 1], &[2, 2]), 0, 1), 1.0);

        let bad = DmChannel::new(vec![2], 2, 1, vec![0.6, 0.3, 0.5, 0.5]);
        assert!(matches!(bad, Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn product_pmf_checks_sums() {
        assert!(ProductPmf::new(vec![vec![0.5, 0.5], vec![0.2, 0.8]]).is_ok());
        assert!(ProductPmf::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(ProductPmf::new(vec![vec![-0.1, 1.1]]).is_err());
        let u = ProductPmf::uniform(&[2, 4]);
        assert_relative_eq!(u.joint_prob_packed(5), 0.125, max_relative = 1e-15);
    }
}
