//! Achievable-rate-region constraint systems and the two-user region algebra.
//!
//! Regions are explicit inequality lists over the 2K nonnegative rates
//! (secret rates first, then open rates). Membership is closed with a fixed
//! 1e-9 slack; the zero tuple belongs to every region built from a valid
//! table. The two-user machinery relates three descriptions of the same
//! achievable set: the full constraint family, a loose family without the
//! cross-user leakage rows, and the loose family plus explicit open-rate
//! caps. Moving part of a user's open rate into its secret rate maps any
//! member of the full family into the capped one without changing per-user
//! totals.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::channel::{DmChannel, ProductPmf};
use crate::error::{Error, Result};
use crate::rates::{dm_mutual_info_table, MutualInfoTable};

/// Additive slack applied to every membership inequality.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;

/// Largest user count for which constraint systems are enumerated.
pub const REGION_MAX_USERS: usize = 10;

const COUNTEREXAMPLE_BUDGET: usize = 5000;
const COUNTEREXAMPLE_MAX_ALPHABET: usize = 4;

/// Per-user secret and open rates in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTuple {
    pub rs: Vec<f64>,
    pub ro: Vec<f64>,
}

impl RateTuple {
    pub fn new(rs: Vec<f64>, ro: Vec<f64>) -> Result<Self> {
        if rs.is_empty() || rs.len() != ro.len() {
            return Err(Error::invalid("secret and open rate counts must match"));
        }
        if rs.iter().chain(ro.iter()).any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::invalid("rates must be nonnegative and finite"));
        }
        Ok(Self { rs, ro })
    }

    pub fn zero(users: usize) -> Self {
        Self { rs: vec![0.0; users], ro: vec![0.0; users] }
    }

    pub fn users(&self) -> usize {
        self.rs.len()
    }

    pub fn secret_sum(&self) -> f64 {
        self.rs.iter().sum()
    }

    pub fn open_sum(&self) -> f64 {
        self.ro.iter().sum()
    }
}

/// One inequality Σ coeffs·(Rs_0..Rs_{K-1}, Ro_0..Ro_{K-1}) ≤ rhs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub label: String,
}

impl Constraint {
    pub fn lhs(&self, r: &RateTuple) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            let v = if k < r.users() { r.rs[k] } else { r.ro[k - r.users()] };
            acc += c * v;
        }
        acc
    }
}

/// A rate region as an explicit list of inequalities over 2K rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub users: usize,
    pub rows: Vec<Constraint>,
}

impl Region {
    fn push_row(&mut self, secret_mask: usize, open_mask: usize, rhs: f64, label: String) {
        let mut coeffs = vec![0.0; 2 * self.users];
        for k in 0..self.users {
            if secret_mask >> k & 1 == 1 {
                coeffs[k] = 1.0;
            }
            if open_mask >> k & 1 == 1 {
                coeffs[self.users + k] = 1.0;
            }
        }
        self.rows.push(Constraint { coeffs, rhs: rhs.max(0.0), label });
    }

    /// Closed membership with the fixed 1e-9 slack.
    pub fn contains(&self, r: &RateTuple) -> bool {
        r.users() == self.users
            && self.rows.iter().all(|c| c.lhs(r) <= c.rhs + MEMBERSHIP_SLACK)
    }

    /// Smallest slack `rhs − lhs` over all rows; negative when outside.
    pub fn min_slack(&self, r: &RateTuple) -> f64 {
        self.rows
            .iter()
            .map(|c| c.rhs - c.lhs(r))
            .fold(f64::INFINITY, f64::min)
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.rows {
            let mut terms: Vec<String> = Vec::new();
            for (i, &w) in c.coeffs.iter().enumerate() {
                if w != 0.0 {
                    let name = if i < self.users {
                        format!("Rs[{i}]")
                    } else {
                        format!("Ro[{}]", i - self.users)
                    };
                    terms.push(if w == 1.0 { name } else { format!("{w}*{name}") });
                }
            }
            let lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
            writeln!(f, "{lhs} <= {:.9}  [{}]", c.rhs, c.label)?;
        }
        Ok(())
    }
}

fn mask_set(mask: usize, users: usize) -> String {
    let members: Vec<String> =
        (0..users).filter(|k| mask >> k & 1 == 1).map(|k| k.to_string()).collect();
    format!("{{{}}}", members.join(","))
}

fn check_region_users(users: usize) -> Result<()> {
    if users == 0 || users > REGION_MAX_USERS {
        return Err(Error::UnsupportedUserCount { supported: REGION_MAX_USERS, got: users });
    }
    Ok(())
}

/// Region for simultaneous decoding of all users: one row per pair
/// (S, S1 ⊆ S) with S nonempty,
/// Σ_{k∈S} Rs_k + Σ_{k∈S∖S1} Ro_k ≤ [bob_cond(S) − eve(S1)]⁺.
pub fn joint_region(table: &MutualInfoTable) -> Result<Region> {
    let users = table.users();
    check_region_users(users)?;
    let mut region = Region { users, rows: Vec::new() };
    let full = table.full_mask();
    for s in 1..=full {
        // enumerate S1 over all submasks of s, including the empty one
        let mut s1 = s;
        loop {
            region.push_row(
                s,
                s & !s1,
                table.bob_cond(s) - table.eve(s1),
                format!("S={}, S1={}", mask_set(s, users), mask_set(s1, users)),
            );
            if s1 == 0 {
                break;
            }
            s1 = (s1 - 1) & s;
        }
    }
    Ok(region)
}

/// Region for per-user decoding with the other users treated as noise:
/// Rs_k + Ro_k ≤ I(X_k;Y) for every k, and
/// Σ_{k∈S} Rs_k ≤ [Σ_{k∈S} I(X_k;Y) − eve(S)]⁺ for every nonempty S.
pub fn inde_region(table: &MutualInfoTable) -> Result<Region> {
    let users = table.users();
    check_region_users(users)?;
    let mut region = Region { users, rows: Vec::new() };
    for k in 0..users {
        region.push_row(1 << k, 1 << k, table.bob_marginal(k), format!("user {k} rate cap"));
    }
    let full = table.full_mask();
    for s in 1..=full {
        let iy_sum: f64 = (0..users)
            .filter(|k| s >> k & 1 == 1)
            .map(|k| table.bob_marginal(k))
            .sum();
        region.push_row(
            s,
            0,
            iy_sum - table.eve(s),
            format!("S={} secrecy cap", mask_set(s, users)),
        );
    }
    Ok(region)
}

/// Closed membership test with the fixed `MEMBERSHIP_SLACK`.
pub fn contains(region: &Region, r: &RateTuple) -> bool {
    region.contains(r)
}

/// The six two-user mutual informations, unpacked from a table by name.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoUserInfo {
    pub bob1: f64,
    pub bob2: f64,
    pub bob12: f64,
    pub eve1: f64,
    pub eve2: f64,
    pub eve12: f64,
}

impl TwoUserInfo {
    pub fn from_table(table: &MutualInfoTable) -> Result<Self> {
        if table.users() != 2 {
            return Err(Error::UnsupportedUserCount { supported: 2, got: table.users() });
        }
        Ok(Self {
            bob1: table.bob_cond(0b01),
            bob2: table.bob_cond(0b10),
            bob12: table.bob_cond(0b11),
            eve1: table.eve(0b01),
            eve2: table.eve(0b10),
            eve12: table.eve(0b11),
        })
    }

    /// Conditional leakage of user 0 given user 1's signal.
    pub fn eve1_cond(&self) -> f64 {
        (self.eve12 - self.eve2).max(0.0)
    }

    /// Conditional leakage of user 1 given user 0's signal.
    pub fn eve2_cond(&self) -> f64 {
        (self.eve12 - self.eve1).max(0.0)
    }
}

/// The three equivalent two-user constraint systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoUserRegions {
    /// Full family: all 8 (S, S1) rows.
    pub full: Region,
    /// Without the two rows tying both users' rates to one user's leakage.
    pub loose: Region,
    /// Loose family plus per-user and total open-rate caps.
    pub capped: Region,
}

/// Builds the full/loose/capped triple for a two-user table.
pub fn two_user_regions(table: &MutualInfoTable) -> Result<TwoUserRegions> {
    let info = TwoUserInfo::from_table(table)?;
    let full = joint_region(table)?;
    let mut loose = Region { users: 2, rows: Vec::new() };
    for c in &full.rows {
        // drop the rows with both secret rates but only one open rate
        let n_rs = c.coeffs[0] + c.coeffs[1];
        let n_ro = c.coeffs[2] + c.coeffs[3];
        if n_rs == 2.0 && n_ro == 1.0 {
            continue;
        }
        loose.rows.push(c.clone());
    }
    let mut capped = loose.clone();
    capped.push_row(0, 0b01, info.eve1_cond(), "Ro[0] cap".to_string());
    capped.push_row(0, 0b10, info.eve2_cond(), "Ro[1] cap".to_string());
    capped.push_row(0, 0b11, info.eve12, "Ro sum cap".to_string());
    Ok(TwoUserRegions { full, loose, capped })
}

fn classify_open_pair(info: &TwoUserInfo, ro0: f64, ro1: f64) -> u8 {
    let a = info.eve1;
    let a_cond = info.eve1_cond();
    let b = info.eve2;
    let b_cond = info.eve2_cond();
    let diag = info.eve12;
    if ro0 <= a_cond && ro1 <= b_cond && ro0 + ro1 <= diag {
        1
    } else if ro0 > a_cond && ro1 <= b {
        2
    } else if b < ro1 && ro1 <= b_cond && ro0 + ro1 > diag {
        3
    } else if ro0 <= a && ro1 > b_cond {
        4
    } else if a < ro0 && ro0 <= a_cond && ro1 > b_cond {
        5
    } else {
        debug_assert!(ro0 > a_cond && ro1 > b_cond);
        6
    }
}

fn check_two_user_member(r: &RateTuple, table: &MutualInfoTable) -> Result<(TwoUserInfo, Region)> {
    let info = TwoUserInfo::from_table(table)?;
    if r.users() != 2 {
        return Err(Error::invalid("rate tuple must cover exactly two users"));
    }
    let full = joint_region(table)?;
    if !full.contains(r) {
        return Err(Error::invalid("rate tuple lies outside the region"));
    }
    Ok((info, full))
}

/// Which of the six open-rate cells the tuple falls in, for a member of the
/// two-user full region. Cell boundaries sit at each user's leakage, its
/// leakage conditioned on the other user, and the total-leakage diagonal;
/// boundary ties resolve to the lowest index.
pub fn classify_category(r: &RateTuple, table: &MutualInfoTable) -> Result<u8> {
    let (info, _) = check_two_user_member(r, table)?;
    Ok(classify_open_pair(&info, r.ro[0], r.ro[1]))
}

/// Splits `total` into `(total − open, open)` so the parts sum back to
/// `total` bit-exactly; the open part may move off the requested value by an
/// ulp when it is the smaller half.
fn exact_split(total: f64, open: f64) -> (f64, f64) {
    let secret = total - open;
    if secret < 0.0 {
        // formula guarantees a nonnegative secret part up to rounding
        debug_assert!(secret > -1e-9);
        return (0.0, total);
    }
    if 2.0 * secret >= total {
        // secret is the larger half, so total − secret is exact (Sterbenz)
        (secret, total - secret)
    } else {
        // open is the larger half, which makes the subtraction above exact
        (secret, open)
    }
}

/// Reclassifies part of the open rates as secret so the result lands in the
/// capped region; per-user totals Rs_k + Ro_k are preserved exactly.
pub fn rate_split_transform(r: &RateTuple, table: &MutualInfoTable) -> Result<RateTuple> {
    let (info, _) = check_two_user_member(r, table)?;
    let cat = classify_open_pair(&info, r.ro[0], r.ro[1]);
    let mut out = r.clone();
    let total0 = r.rs[0] + r.ro[0];
    let total1 = r.rs[1] + r.ro[1];
    match cat {
        1 => {}
        2 => {
            (out.rs[0], out.ro[0]) = exact_split(total0, info.eve1_cond());
        }
        3 => {
            (out.rs[0], out.ro[0]) = exact_split(total0, info.eve12 - r.ro[1]);
        }
        4 => {
            (out.rs[1], out.ro[1]) = exact_split(total1, info.eve2_cond());
        }
        5 => {
            (out.rs[1], out.ro[1]) = exact_split(total1, info.eve12 - r.ro[0]);
        }
        6 => {
            (out.rs[0], out.ro[0]) = exact_split(total0, info.eve1_cond());
            (out.rs[1], out.ro[1]) = exact_split(total1, info.eve2);
        }
        _ => unreachable!(),
    }
    Ok(out)
}

/// Nonnegative auxiliary randomization rates proving a two-user tuple
/// achievable with the required leakage balance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarbageWitness {
    pub rg: Vec<f64>,
}

/// Searches for auxiliary rates (Rg_0, Rg_1) ≥ 0 with
/// Σ_S (Rs+Ro+Rg) ≤ bob_cond(S) and Σ_S (Ro+Rg) ≥ eve(S) for every nonempty
/// S, by intersecting the half-planes of the 2-D system directly. Returns a
/// vertex of the feasible polygon, or `None` when it is empty.
pub fn garbage_witness(table: &MutualInfoTable, r: &RateTuple) -> Result<Option<GarbageWitness>> {
    if table.users() != 2 {
        return Err(Error::UnsupportedUserCount { supported: 2, got: table.users() });
    }
    if r.users() != 2 {
        return Err(Error::invalid("rate tuple must cover exactly two users"));
    }
    let info = TwoUserInfo::from_table(table)?;
    let slack = MEMBERSHIP_SLACK;

    let l0 = (info.eve1 - r.ro[0]).max(0.0);
    let l1 = (info.eve2 - r.ro[1]).max(0.0);
    let l_sum = (info.eve12 - r.ro[0] - r.ro[1]).max(l0 + l1);
    let u0 = info.bob1 - r.rs[0] - r.ro[0];
    let u1 = info.bob2 - r.rs[1] - r.ro[1];
    let u_sum = info.bob12 - r.rs[0] - r.rs[1] - r.ro[0] - r.ro[1];
    if l0 > u0 + slack || l1 > u1 + slack || l_sum > u_sum.min(u0 + u1) + slack {
        return Ok(None);
    }

    let mut rg0 = l0;
    let mut rg1 = l1;
    let deficit = (info.eve12 - r.ro[0] - r.ro[1]) - (rg0 + rg1);
    if deficit > 0.0 {
        let bump = deficit.min((u0 - rg0).max(0.0));
        rg0 += bump;
        rg1 += deficit - bump;
    }
    let witness = GarbageWitness { rg: vec![rg0.max(0.0), rg1.max(0.0)] };
    // verify the constructed vertex against the original system
    let ok = witness.rg[0] + r.rs[0] + r.ro[0] <= info.bob1 + slack
        && witness.rg[1] + r.rs[1] + r.ro[1] <= info.bob2 + slack
        && witness.rg.iter().sum::<f64>() + r.secret_sum() + r.open_sum()
            <= info.bob12 + slack
        && witness.rg[0] + r.ro[0] >= info.eve1 - slack
        && witness.rg[1] + r.ro[1] >= info.eve2 - slack
        && witness.rg[0] + witness.rg[1] + r.open_sum() >= info.eve12 - slack;
    Ok(if ok { Some(witness) } else { None })
}

/// A two-user discrete channel whose single-user-decodable corner tuple lies
/// in the loose region but outside the capped one.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub channel: DmChannel,
    pub pmf: ProductPmf,
    pub tuple: RateTuple,
    /// Amount by which the violated open-rate cap is exceeded.
    pub violation: f64,
    /// 1-based attempt index that produced the hit.
    pub attempts: usize,
}

fn dirichlet_flat<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    v
}

/// Randomized search for a channel where maximal single-user secrecy forces
/// one user's open rate above its cap: draws flat-Dirichlet transition
/// tensors and input pmfs until the required information ordering holds,
/// then builds and verifies the offending tuple. Alphabet sizes are
/// (|X_0|, |X_1|, |Y|, |Z|), each at most 4. Returns `None` when the attempt
/// budget runs out.
pub fn counterexample_search(seed: u64, alphabet_sizes: [usize; 4]) -> Result<Option<Counterexample>> {
    use rand::SeedableRng;
    let [n0, n1, ny, nz] = alphabet_sizes;
    if alphabet_sizes.iter().any(|&n| n == 0 || n > COUNTEREXAMPLE_MAX_ALPHABET) {
        return Err(Error::invalid(format!(
            "alphabet sizes must be 1..={COUNTEREXAMPLE_MAX_ALPHABET}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..COUNTEREXAMPLE_BUDGET {
        let mut tensor = vec![0.0; n0 * n1 * ny * nz];
        for pair in 0..n0 * n1 {
            let cell = dirichlet_flat(&mut rng, ny * nz);
            tensor[pair * ny * nz..(pair + 1) * ny * nz].copy_from_slice(&cell);
        }
        let p0 = dirichlet_flat(&mut rng, n0);
        let p1 = dirichlet_flat(&mut rng, n1);

        let channel = DmChannel::from_fn(vec![n0, n1], ny, nz, |x, y, z| {
            tensor[((x[0] * n1 + x[1]) * ny + y) * nz + z]
        })?;
        let pmf = ProductPmf::new(vec![p0, p1])?;
        let table = dm_mutual_info_table(&channel, &pmf)?;

        let b1 = table.bob_cond(0b01);
        let b2 = table.bob_cond(0b10);
        let b12 = table.bob_cond(0b11);
        let e1 = table.eve(0b01);
        let e12 = table.eve(0b11);
        let iy2 = table.bob_marginal(1);
        let bracket1 = b1 - e1;
        let bracket2 = iy2 - (e12 - e1);
        let usable = e1 > 1e-6
            && iy2 + e1 <= b2 - 1e-9
            && bracket1 >= 1e-9
            && bracket2 >= 1e-9;
        if !usable {
            continue;
        }

        // user 0 sends only secret data at its conditional capacity; user 1
        // fills the remaining secrecy budget and carries all leakage as open
        // rate, which lands exactly on the total-secrecy boundary.
        let target = (b12 - e12).max(0.0);
        let (rs1, rs0) = exact_split(target, bracket1);
        let tuple = RateTuple::new(vec![rs0, rs1], vec![0.0, e12])?;

        let systems = two_user_regions(&table)?;
        if !systems.loose.contains(&tuple) || systems.capped.contains(&tuple) {
            continue;
        }
        // no single-user reclassification may rescue the tuple
        let mut rescued = false;
        for user in 0..2 {
            for frac in [0.25, 0.5, 1.0] {
                for dir in [-1.0, 1.0] {
                    let movable = if dir > 0.0 { tuple.ro[user] } else { tuple.rs[user] };
                    if movable <= 0.0 {
                        continue;
                    }
                    let delta = frac * movable;
                    let mut moved = tuple.clone();
                    moved.rs[user] += dir * delta;
                    moved.ro[user] -= dir * delta;
                    if systems.capped.contains(&moved) {
                        rescued = true;
                    }
                }
            }
        }
        if rescued {
            continue;
        }
        return Ok(Some(Counterexample {
            channel,
            pmf,
            tuple,
            violation: e1,
            attempts: attempt + 1,
        }));
    }
    Ok(None)
}
