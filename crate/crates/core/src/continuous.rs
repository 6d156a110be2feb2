//! The continuous game.
//!
//! A stack is a real `x` in `[0, 1)` read in binary, and hat `k` is
//! `ε(2^k x)` where `ε(x) = ⌊x⌋ mod 2`. In the continuous game a player may
//! name any real index `a >= 0`, winning when `ε(a·x) = 1`, so strategies are
//! nonnegative functions of the other players' stacks.
//!
//! All integrals over `ε` reduce to `γ(a) = a/2 - ∫₀^a ε`, a 2-periodic
//! sawtooth: `γ(a) = a'/2` on `a' ∈ [0, 1]` and `1 - a'/2` on `[1, 2]`, with
//! `a' = a mod 2`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{HStrategy, Player};
use crate::recursive::RecursivePair;
use crate::rng;

/// Number of dyadic levels summed in first-black-hat series (error `<= 2^-40`).
pub const FBH_TRUNCATION: u32 = 40;

/// Number of independent Monte Carlo shards; results depend on the seed and
/// this constant only.
pub const MC_SHARDS: u64 = 64;

/// Parity of `⌊x⌋`. `x` must be finite and nonnegative.
#[inline]
pub fn eps(x: f64) -> u8 {
    debug_assert!(x >= 0.0 && x.is_finite(), "eps of {x}");
    (x.floor() % 2.0) as u8
}

pub fn try_eps(x: f64) -> Result<u8> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps requires x >= 0, got {x}")));
    }
    Ok(eps(x))
}

/// `a/2 - ∫₀^a ε`.
#[inline]
pub fn gamma(a: f64) -> f64 {
    debug_assert!(a >= 0.0 && a.is_finite(), "gamma of {a}");
    let r = a % 2.0;
    if r <= 1.0 {
        r / 2.0
    } else {
        1.0 - r / 2.0
    }
}

pub fn try_gamma(a: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma requires a >= 0, got {a}")));
    }
    Ok(gamma(a))
}

/// `∫₀¹ ε(a x) dx = 1/2 - γ(a)/a`, the probability that index `a` names a
/// black hat on a uniform stack.
pub fn black_prob_1d(a: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        0.5 - gamma(a) / a
    }
}

/// Lebesgue measure of `{y ∈ [lo, hi) : ε(u·y) = 1}`.
pub fn eps_interval_measure(u: f64, lo: f64, hi: f64) -> Result<f64> {
    if u.is_nan() || u <= 0.0 {
        return Err(Error::InvalidArgument(format!("u must be positive, got {u}")));
    }
    if !(0.0 <= lo && lo <= hi) {
        return Err(Error::InvalidArgument(format!("need 0 <= lo <= hi, got [{lo}, {hi})")));
    }
    Ok((hi - lo) / 2.0 - (gamma(u * hi) - gamma(u * lo)) / u)
}

/// `∫∫_{[0,1]²} ε(m x y) dx dy`, the value of the common strategy
/// `y ↦ m·y` for two players.
///
/// Substituting `s = m y` gives `1/2 - (1/m) ∫₀^m γ(s)/s ds`. On `[0, 1]` the
/// integrand is `1/2`; on each later unit segment `γ(s) = α + β s` is
/// linear, so the segment contributes `α ln(hi/lo) + β (hi - lo)`.
pub fn p_m(m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let top = m as f64;
    let mut integral = 0.5;
    for k in 1..m {
        let lo = k as f64;
        let hi = lo + 1.0;
        let (alpha, beta) = if k % 2 == 0 {
            (-lo / 2.0, 0.5)
        } else {
            ((lo + 1.0) / 2.0, -0.5)
        };
        integral += alpha * ((hi - lo) / lo).ln_1p() + beta * (hi - lo);
    }
    Ok(0.5 - integral / top)
}

/// A nonnegative strategy of the continuous game.
#[derive(Clone, Debug, PartialEq)]
pub enum ImaginaryStrategy {
    /// `y ↦ 2^{-⌊log₂ y⌋}`: the index of the first black hat of `y`.
    FirstBlackHat,
    /// Constant `values[q]` on `[q/2^level, (q+1)/2^level)`.
    DyadicStep { level: u32, values: Vec<f64> },
    /// `(x_1, …, x_{n-1}) ↦ m·x_1···x_{n-1}`.
    ProductScaled { m: f64 },
    /// An h-strategy lifted to `y ↦ 2^{k(y)}`.
    PowerOfTwo(HStrategy),
    /// One side of a recursive pair, lifted to `y ↦ 2^{K(y)}`, reading the
    /// first 52 binary digits of `y`. Stacks whose batches are all skipped
    /// within those digits map to 0.
    Recursive { pair: RecursivePair, player: Player },
}

const RECURSIVE_BITS: u32 = 52;

fn first_bits(y: f64, count: u32) -> u64 {
    let scaled = (y * (1u64 << count) as f64).floor();
    (scaled as u64).min((1u64 << count) - 1)
}

impl ImaginaryStrategy {
    pub fn dyadic_step(level: u32, values: Vec<f64>) -> Result<Self> {
        if level > 24 || values.len() != 1 << level {
            return Err(Error::InvalidArgument(format!(
                "dyadic step of level {level} needs {} values",
                1u64 << level.min(24)
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("step values must be finite and >= 0".into()));
        }
        Ok(ImaginaryStrategy::DyadicStep { level, values })
    }

    /// Only [`ImaginaryStrategy::ProductScaled`] is defined for more than one
    /// observed stack.
    pub fn supports_players(&self, n: usize) -> bool {
        matches!(self, ImaginaryStrategy::ProductScaled { .. }) || n == 2
    }

    /// The index named on observing `others`.
    pub fn eval(&self, others: &[f64]) -> f64 {
        match self {
            ImaginaryStrategy::ProductScaled { m } => m * others.iter().product::<f64>(),
            ImaginaryStrategy::FirstBlackHat => fbh_index(others[0]),
            ImaginaryStrategy::DyadicStep { level, values } => {
                values[first_bits(others[0], *level) as usize]
            }
            ImaginaryStrategy::PowerOfTwo(k) => {
                let pos = first_bits(others[0], k.h()) as usize;
                (1u64 << k.choice(pos)) as f64
            }
            ImaginaryStrategy::Recursive { pair, player } => {
                let word = first_bits(others[0], RECURSIVE_BITS);
                let bits: Vec<bool> = (0..RECURSIVE_BITS)
                    .map(|i| (word >> (RECURSIVE_BITS - 1 - i)) & 1 == 1)
                    .collect();
                match pair.choice(*player, &bits) {
                    Some(k) => 2f64.powi(k as i32),
                    None => 0.0,
                }
            }
        }
    }
}

/// `2^{-⌊log₂ y⌋}` for `y ∈ (0, 1)`; 0 at `y = 0`.
pub fn fbh_index(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let exponent = ((y.to_bits() >> 52) & 0x7ff) as i32 - 1023;
    2f64.powi(-exponent)
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Monte Carlo estimate of `∫_{[0,1]^n} Π_i ε(f_i(x_{-i}) x_i)`. Samples are
/// split over [`MC_SHARDS`] shards, shard `s` drawing from stream `s` of the
/// seed.
pub fn mc_win_estimate(
    strategies: &[ImaginaryStrategy],
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two players".into()));
    }
    if strategies.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} strategies for {n} players",
            strategies.len()
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if let Some(s) = strategies.iter().find(|s| !s.supports_players(n)) {
        return Err(Error::InvalidArgument(format!(
            "{s:?} is only defined for two players"
        )));
    }
    let wins: u64 = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = samples / MC_SHARDS + u64::from(shard < samples % MC_SHARDS);
            let mut rng = rng::stream(seed, shard);
            let mut x = vec![0.0; n];
            let mut others = vec![0.0; n - 1];
            let mut wins = 0u64;
            for _ in 0..count {
                x.iter_mut().for_each(|v| *v = rng.random::<f64>());
                let won = strategies.iter().enumerate().all(|(i, f)| {
                    others.clear();
                    others.extend(x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| *v));
                    eps(f.eval(&others) * x[i]) == 1
                });
                wins += won as u64;
            }
            wins
        })
        .sum();
    let estimate = wins as f64 / samples as f64;
    let stderr = (estimate * (1.0 - estimate) / samples as f64).sqrt();
    Ok(McEstimate {
        estimate,
        stderr,
        samples,
        seed,
    })
}

/// `∫₀¹ ε(f(y) x) ε(u y) dy` for `f` the first black hat, truncated after
/// `m_max` dyadic levels `[2^-m, 2^-m+1)` (error at most `2^-m_max`).
pub fn fbh_response_value(x: f64, u: f64, m_max: u32) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!("x must lie in (0, 1), got {x}")));
    }
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for m in 1..=m_max as i32 {
        if eps(2f64.powi(m) * x) == 1 {
            total += eps_interval_measure(u, 2f64.powi(-m), 2f64.powi(1 - m))?;
        }
    }
    Ok(total)
}

/// Powers of two `2^0 … 2^20` plus 64 geometrically spaced points per octave.
pub fn default_u_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..20)
        .flat_map(|k| (0..64).map(move |i| 2f64.powf(k as f64 + i as f64 / 64.0)))
        .collect();
    grid.push(2f64.powi(20));
    grid
}

/// `{2^0, …, 2^max_exp}`.
pub fn power_of_two_grid(max_exp: u32) -> Vec<f64> {
    (0..=max_exp as i32).map(|k| 2f64.powi(k)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResponse {
    pub q: u64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub best_u: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResponseProfile {
    pub level: u32,
    pub cells: Vec<CellResponse>,
    /// `Σ 2^-level · value` over the cells.
    pub aggregate: f64,
}

/// Best grid response to the first black hat on each dyadic cell
/// `[q/2^level, (q+1)/2^level)`, evaluated at the cell midpoint. A later
/// grid point replaces the incumbent only if it is better by more than
/// `1e-12`, so ties go to the earliest grid point.
pub fn fbh_best_response_profile(level: u32, u_grid: &[f64]) -> Result<ResponseProfile> {
    if level == 0 || level > 20 {
        return Err(Error::InvalidArgument(format!("level {level} outside 1..=20")));
    }
    if u_grid.is_empty() || u_grid.iter().any(|u| !(*u > 0.0 && u.is_finite())) {
        return Err(Error::InvalidArgument("u grid must be non-empty and positive".into()));
    }
    let width = 2f64.powi(-(level as i32));
    let cells: Vec<CellResponse> = (0..1u64 << level)
        .into_par_iter()
        .map(|q| {
            let x_lo = q as f64 * width;
            let x_mid = x_lo + width / 2.0;
            let mut best_u = u_grid[0];
            let mut value = fbh_response_value(x_mid, best_u, FBH_TRUNCATION)?;
            for &u in &u_grid[1..] {
                let v = fbh_response_value(x_mid, u, FBH_TRUNCATION)?;
                if v > value + 1e-12 {
                    best_u = u;
                    value = v;
                }
            }
            Ok(CellResponse {
                q,
                x_lo,
                x_hi: x_lo + width,
                best_u,
                value,
            })
        })
        .collect::<Result<_>>()?;
    let aggregate = cells.iter().map(|c| c.value * width).sum();
    Ok(ResponseProfile {
        level,
        cells,
        aggregate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self, Preset};
    use crate::rat;
    use rand::Rng;

    #[test]
    fn eps_and_gamma_examples() {
        assert_eq!(eps(2.5), 0);
        assert_eq!(eps(1.5), 1);
        assert_eq!(eps(0.0), 0);
        assert_eq!(gamma(1.5), 0.25);
        assert_eq!(gamma(0.5), 0.25);
        assert_eq!(gamma(1.0), 0.5);
        assert!(try_eps(-1.0).is_err());
        assert!(try_gamma(-0.1).is_err());
    }

    #[test]
    fn gamma_is_two_periodic_on_dyadics() {
        for k in 0..2000u32 {
            let a = k as f64 / 64.0;
            assert_eq!(gamma(a + 2.0), gamma(a));
            assert!(gamma(a) >= 0.0);
        }
    }

    #[test]
    fn eps_and_gamma_against_direct_arithmetic() {
        let mut rng = rng::stream(99, 0);
        for _ in 0..100_000 {
            let x: f64 = rng.random::<f64>() * 50.0;
            let direct = x.floor() - 2.0 * (x / 2.0).floor();
            assert_eq!(eps(x) as f64, direct);
        }
        // γ against midpoint quadrature of ε
        for &a in &[0.3, 1.0, 1.7, 2.2, 5.9, 12.25] {
            let steps = 2_000_000;
            let h = a / steps as f64;
            let integral: f64 = (0..steps).map(|i| eps((i as f64 + 0.5) * h) as f64 * h).sum();
            assert!((gamma(a) - (a / 2.0 - integral)).abs() < 1e-4, "a = {a}");
        }
    }

    #[test]
    fn black_probability_examples() {
        assert_eq!(black_prob_1d(1.0), 0.0);
        assert_eq!(black_prob_1d(2.0), 0.5);
        assert!((black_prob_1d(3.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(black_prob_1d(0.0), 0.0);
        assert!((black_prob_1d(1e6) - 0.5).abs() < 1e-5);
        let mut rng = rng::stream(4, 4);
        for _ in 0..10_000 {
            let a = rng.random::<f64>() * 1000.0;
            assert!(black_prob_1d(a) <= 0.5);
        }
    }

    #[test]
    fn interval_measure_examples() {
        assert_eq!(eps_interval_measure(2.0, 0.0, 1.0).unwrap(), 0.5);
        for p in 1..10 {
            let u = 2f64.powi(p);
            let lo = 2f64.powi(-p);
            let v = eps_interval_measure(u, lo, 2.0 * lo).unwrap();
            assert_eq!(v, lo);
        }
        assert_eq!(eps_interval_measure(3.7, 0.4, 0.4).unwrap(), 0.0);
        assert!(eps_interval_measure(0.0, 0.0, 1.0).is_err());
        assert!(eps_interval_measure(1.0, 0.5, 0.2).is_err());
    }

    /// Midpoint-rule count of `ε(m x y)` on an `n × n` grid.
    fn grid_oracle(m: f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut black = 0u64;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            for j in 0..n {
                let y = (j as f64 + 0.5) * h;
                black += eps(m * x * y) as u64;
            }
        }
        black as f64 * h * h
    }

    #[test]
    fn p_m_against_grid_oracle() {
        for (m, tol) in [(4u64, 2e-4), (20, 5e-4)] {
            let exact = p_m(m).unwrap();
            let oracle = grid_oracle(m as f64, 3000);
            assert!((exact - oracle).abs() < tol, "m = {m}: {exact} vs {oracle}");
        }
    }

    #[test]
    fn p_m_against_one_dimensional_quadrature() {
        // ∫₀¹ black_prob_1d(m y) dy by a fine midpoint rule
        for m in [4u64, 20, 100, 1000] {
            let steps = 2_000_000;
            let h = 1.0 / steps as f64;
            let q: f64 = (0..steps).map(|i| black_prob_1d(m as f64 * (i as f64 + 0.5) * h) * h).sum();
            assert!((p_m(m).unwrap() - q).abs() < 1e-6, "m = {m}");
        }
    }

    #[test]
    fn p_m_values_and_trend() {
        assert_eq!(p_m(1).unwrap(), 0.0);
        assert!((p_m(4).unwrap() - 0.28).abs() <= 0.005);
        assert!((p_m(20).unwrap() - 0.44).abs() <= 0.005);
        assert!((p_m(1000).unwrap() - 0.497).abs() <= 0.002);
        let ms = [1u64, 2, 4, 20, 100, 1000];
        let vals: Vec<f64> = ms.iter().map(|&m| p_m(m).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
        assert!(vals.iter().all(|&v| v <= 0.5));
        assert!(p_m(0).is_err());
    }

    #[test]
    fn fbh_index_levels() {
        assert_eq!(fbh_index(0.75), 2.0);
        assert_eq!(fbh_index(0.5), 2.0);
        assert_eq!(fbh_index(0.3), 4.0);
        assert_eq!(fbh_index(0.25), 4.0);
        assert_eq!(fbh_index(0.0), 0.0);
    }

    #[test]
    fn fbh_agrees_with_lifted_finite_fbh() {
        let (k, _) = presets::fbh_pair(6);
        let lifted = ImaginaryStrategy::PowerOfTwo(k);
        let mut rng = rng::stream(1, 2);
        for _ in 0..10_000 {
            let y: f64 = rng.random::<f64>();
            if y >= 2f64.powi(-6) {
                assert_eq!(ImaginaryStrategy::FirstBlackHat.eval(&[y]), lifted.eval(&[y]));
            }
        }
    }

    #[test]
    fn recursive_lift_of_fbh_matches_closed_form() {
        let rec = ImaginaryStrategy::Recursive {
            pair: crate::recursive::RecursivePair::first_black_hat(),
            player: Player::A,
        };
        for y in [0.9, 0.4, 0.2, 0.01] {
            assert_eq!(rec.eval(&[y]), fbh_index(y));
        }
    }

    #[test]
    fn mc_fbh_is_one_third() {
        let s = [ImaginaryStrategy::FirstBlackHat, ImaginaryStrategy::FirstBlackHat];
        let r = mc_win_estimate(&s, 2, 200_000, 5).unwrap();
        assert!((r.estimate - 1.0 / 3.0).abs() < 3.0 * r.stderr + 1e-12);
        assert_eq!(r, mc_win_estimate(&s, 2, 200_000, 5).unwrap());
    }

    #[test]
    fn mc_recursive_k3_is_seven_twentieths() {
        let rp = Preset::K33.recursive();
        let s = [
            ImaginaryStrategy::Recursive { pair: rp.clone(), player: Player::A },
            ImaginaryStrategy::Recursive { pair: rp, player: Player::B },
        ];
        let r = mc_win_estimate(&s, 2, 200_000, 8).unwrap();
        assert!((r.estimate - 0.35).abs() < 4.0 * r.stderr, "{r:?}");
    }

    #[test]
    fn mc_lifts_match_exact_value() {
        let (k1, k2) = presets::k33();
        let exact = rat::to_f64(&crate::game::win_prob(&k1, &k2).unwrap());
        let s = [ImaginaryStrategy::PowerOfTwo(k1), ImaginaryStrategy::PowerOfTwo(k2)];
        let r = mc_win_estimate(&s, 2, 200_000, 3).unwrap();
        assert!((r.estimate - exact).abs() < 4.0 * r.stderr);
    }

    #[test]
    fn mc_argument_validation() {
        let fbh = ImaginaryStrategy::FirstBlackHat;
        assert!(mc_win_estimate(&[fbh.clone(), fbh.clone(), fbh.clone()], 3, 10, 0).is_err());
        assert!(mc_win_estimate(std::slice::from_ref(&fbh), 2, 10, 0).is_err());
        assert!(mc_win_estimate(&[fbh.clone(), fbh], 2, 0, 0).is_err());
    }

    #[test]
    fn dyadic_step_lookup() {
        let s = ImaginaryStrategy::dyadic_step(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.eval(&[0.1]), 1.0);
        assert_eq!(s.eval(&[0.6]), 3.0);
        assert_eq!(s.eval(&[0.99]), 4.0);
        assert!(ImaginaryStrategy::dyadic_step(2, vec![1.0]).is_err());
        assert!(ImaginaryStrategy::dyadic_step(1, vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn response_value_examples() {
        assert_eq!(fbh_response_value(0.3, 4.0, FBH_TRUNCATION).unwrap(), 0.25);
        assert_eq!(fbh_response_value(0.3, 1.0, FBH_TRUNCATION).unwrap(), 0.0);
        assert!(fbh_response_value(1.0, 1.0, FBH_TRUNCATION).is_err());
        // x in [1/4, 1/2): no grid point beats 2^-2
        let best = default_u_grid()
            .iter()
            .map(|&u| fbh_response_value(0.3, u, FBH_TRUNCATION).unwrap())
            .fold(0.0, f64::max);
        assert!(best <= 0.25 + 1e-12);
    }

    #[test]
    fn own_index_is_the_grid_supremum() {
        let grid = default_u_grid();
        let mut rng = rng::stream(12, 0);
        for _ in 0..50 {
            let x: f64 = rng.random::<f64>() * 0.999 + 0.0005;
            let own = fbh_response_value(x, fbh_index(x), FBH_TRUNCATION).unwrap();
            let sup = grid
                .iter()
                .map(|&u| fbh_response_value(x, u, FBH_TRUNCATION).unwrap())
                .fold(0.0, f64::max);
            assert!((own - sup).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn profile_aggregates_to_one_third() {
        let profile = fbh_best_response_profile(12, &power_of_two_grid(12)).unwrap();
        assert!((profile.aggregate - 1.0 / 3.0).abs() < 1e-6);
        for cell in &profile.cells {
            if cell.q == 0 {
                continue;
            }
            let level = -(cell.x_lo.log2().floor()) as i32;
            if level <= 12 {
                assert_eq!(cell.best_u, 2f64.powi(level), "q = {}", cell.q);
            }
        }
    }

    #[test]
    fn white_region_of_first_black_hat() {
        // x in [1/4, 1/2) against y in [1/2, 1): f(y) = 2 so f(y)x < 1
        for u in power_of_two_grid(10) {
            let v = eps_interval_measure(u, 0.5, 1.0).unwrap();
            let x = 0.3;
            assert_eq!(eps(2.0 * x), 0);
            assert!(v >= 0.0);
        }
    }
}
