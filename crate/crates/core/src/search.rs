//! Strategy search: best responses, exhaustive optimization for small
//! heights and seeded hill climbing.

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{self, hat, hat_masks, Bitset, HStrategy};
pub use crate::game::Player;
use crate::rat::{self, Rat};
use crate::rng;

/// Heights up to this bound are accepted by [`hill_climb`].
pub const MAX_SEARCH_H: u32 = 12;

/// Heights up to this bound are accepted by [`brute_force_optimal`].
pub const MAX_BRUTE_FORCE_H: u32 = 3;

/// Restarts are evaluated in chunks of this size before checking the target.
const CHUNK: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub h: u32,
    pub restarts: u32,
    /// Sideways (zero-gain) moves a single climb may take. Zero keeps every
    /// climb strictly increasing.
    pub max_plateau_moves: u32,
    pub seed: u64,
    /// Stop once a restart reaches at least this value.
    pub target: Option<Rat>,
}

impl SearchConfig {
    pub fn new(h: u32, restarts: u32, seed: u64) -> Self {
        SearchConfig {
            h,
            restarts,
            max_plateau_moves: 0,
            seed,
            target: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.h == 0 || self.h > MAX_SEARCH_H {
            return Err(Error::InvalidArgument(format!(
                "h = {} outside 1..={MAX_SEARCH_H}",
                self.h
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub best_pair: (HStrategy, HStrategy),
    pub best_value: Rat,
    pub restarts_used: u32,
    pub evaluations: u64,
}

impl SearchResult {
    pub fn h(&self) -> u32 {
        self.best_pair.0.h()
    }
}

/// B's best reply to `k1`: for each observed stack of A, the hat that wins on
/// the most of A's winning cells. Ties go to the smallest hat index.
pub fn best_response(k1: &HStrategy) -> (HStrategy, Rat) {
    let h = k1.h();
    let n = 1usize << h;
    let masks = hat_masks(h);
    let mut by_choice = vec![Bitset::new(n); h as usize + 1];
    for j in 0..n {
        by_choice[k1.choice(j) as usize].set(j, true);
    }
    let mut table = Vec::with_capacity(n);
    let mut total = 0u64;
    for i in 0..n {
        // B stacks j on which A succeeds when wearing stack i
        let mut a_wins = Bitset::new(n);
        for k in 1..=h {
            if hat(h, i, k) {
                a_wins.or_assign(&by_choice[k as usize]);
            }
        }
        let (best_k, best) = (1..=h)
            .map(|l| (l, a_wins.and_count(&masks[l as usize])))
            .fold((1, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
        table.push(best_k as u8);
        total += best;
    }
    let k2 = HStrategy::new(h, table).expect("choices lie in 1..=h");
    (k2, rat::over_four_pow(total, h))
}

/// Exact optimum for `h <= 3`: every first-player table closed with its best
/// response. The maximum over pairs equals the maximum over `k1` of the best
/// response value.
pub fn brute_force_optimal(h: u32) -> Result<SearchResult> {
    if h == 0 || h > MAX_BRUTE_FORCE_H {
        return Err(Error::InvalidArgument(format!(
            "brute force supports 1 <= h <= {MAX_BRUTE_FORCE_H}, got {h}"
        )));
    }
    let n = 1usize << h;
    let mut table = vec![1u8; n];
    let mut best: Option<(HStrategy, HStrategy, Rat)> = None;
    let mut evaluations = 0u64;
    loop {
        let k1 = HStrategy::from_slice(h, &table)?;
        let (k2, value) = best_response(&k1);
        evaluations += 1;
        if best.as_ref().is_none_or(|(_, _, v)| &value > v) {
            best = Some((k1, k2, value));
        }
        // odometer over 1..=h in every position
        let mut pos = 0;
        loop {
            if pos == n {
                let (k1, k2, best_value) = best.expect("at least one table");
                return Ok(SearchResult {
                    best_pair: (k1, k2),
                    best_value,
                    restarts_used: 1,
                    evaluations,
                });
            }
            if (table[pos] as u32) < h {
                table[pos] += 1;
                break;
            }
            table[pos] = 1;
            pos += 1;
        }
    }
}

/// Change one entry of one player's table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mutation {
    pub player: Player,
    pub pos: usize,
    pub value: u8,
}

/// Cached outcome grids of a strategy pair supporting `O(2^h)` evaluation of
/// single-entry mutations.
#[derive(Clone, Debug)]
pub struct GridState {
    h: u32,
    k1: HStrategy,
    k2: HStrategy,
    masks: Vec<Bitset>,
    /// For each A stack `i`, the B stacks `j` on which A succeeds.
    a_wins: Vec<Bitset>,
    /// For each B stack `j`, the A stacks `i` on which B succeeds.
    b_wins: Vec<Bitset>,
    count: u64,
}

impl GridState {
    pub fn new(k1: HStrategy, k2: HStrategy) -> Result<Self> {
        let count = game::win_count(&k1, &k2)?;
        let h = k1.h();
        let n = 1usize << h;
        // a_wins[i] is indexed by j, b_wins[j] by i
        let row = |choose: &dyn Fn(usize, usize) -> bool| -> Vec<Bitset> {
            (0..n)
                .map(|own| {
                    let mut bits = Bitset::new(n);
                    (0..n).for_each(|seen| bits.set(seen, choose(own, seen)));
                    bits
                })
                .collect()
        };
        let a_wins = row(&|i, j| hat(h, i, k1.choice(j)));
        let b_wins = row(&|j, i| hat(h, j, k2.choice(i)));
        Ok(GridState {
            h,
            k1,
            k2,
            masks: hat_masks(h),
            a_wins,
            b_wins,
            count,
        })
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn pair(&self) -> (&HStrategy, &HStrategy) {
        (&self.k1, &self.k2)
    }

    pub fn into_pair(self) -> (HStrategy, HStrategy) {
        (self.k1, self.k2)
    }

    /// Number of winning cells.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn value(&self) -> Rat {
        rat::over_four_pow(self.count, self.h)
    }

    fn current(&self, m: &Mutation) -> u8 {
        match m.player {
            Player::A => self.k1.table()[m.pos],
            Player::B => self.k2.table()[m.pos],
        }
    }

    /// Change in the number of winning cells.
    pub fn delta_count(&self, m: &Mutation) -> i64 {
        let old = self.current(m) as usize;
        let new = m.value as usize;
        let line = match m.player {
            // A's choice on observed B stack `pos` affects row `pos`.
            Player::A => &self.b_wins[m.pos],
            // B's choice on observed A stack `pos` affects column `pos`.
            Player::B => &self.a_wins[m.pos],
        };
        line.and_count(&self.masks[new]) as i64 - line.and_count(&self.masks[old]) as i64
    }

    /// Exact change in win probability caused by `m`.
    pub fn incremental_eval(&self, m: &Mutation) -> Rat {
        Rat::from_integer(self.delta_count(m).into()) / Rat::from_integer(num_bigint::BigInt::from(4u8).pow(self.h))
    }

    /// Applies `m` and returns the mutation that undoes it.
    pub fn apply(&mut self, m: &Mutation) -> Result<Mutation> {
        let undo = Mutation {
            value: self.current(m),
            ..*m
        };
        let delta = self.delta_count(m);
        let n = 1usize << self.h;
        let k = m.value as u32;
        match m.player {
            Player::A => {
                self.k1.set(m.pos, m.value)?;
                for i in 0..n {
                    self.a_wins[i].set(m.pos, hat(self.h, i, k));
                }
            }
            Player::B => {
                self.k2.set(m.pos, m.value)?;
                for j in 0..n {
                    self.b_wins[j].set(m.pos, hat(self.h, j, k));
                }
            }
        }
        self.count = (self.count as i64 + delta) as u64;
        debug_assert!(
            self.h > 8 || self.count == game::win_count(&self.k1, &self.k2).unwrap(),
            "incremental cache diverged from full recomputation"
        );
        Ok(undo)
    }
}

/// One local climb.
#[derive(Clone, Debug)]
pub struct ClimbOutcome {
    pub k1: HStrategy,
    pub k2: HStrategy,
    pub count: u64,
    pub evaluations: u64,
    /// Winning-cell count after each accepted move, starting with the
    /// initial pair.
    pub trajectory: Vec<u64>,
}

pub fn random_strategy<R: Rng>(h: u32, rng: &mut R) -> HStrategy {
    let table = (0..1usize << h).map(|_| rng.random_range(1..=h as u8)).collect();
    HStrategy::new(h, table).expect("entries drawn from 1..=h")
}

/// First-improvement climb from `(k1, k2)`. Each pass scans every
/// single-entry mutation in a fresh random order and takes every improving
/// move it meets; the climb ends after a pass without a strict improvement.
pub fn climb<R: Rng>(
    k1: HStrategy,
    k2: HStrategy,
    max_plateau_moves: u32,
    rng: &mut R,
) -> Result<ClimbOutcome> {
    let h = k1.h();
    let n = 1usize << h;
    let mut state = GridState::new(k1, k2)?;
    let mut moves: Vec<Mutation> = [Player::A, Player::B]
        .into_iter()
        .flat_map(|player| {
            (0..n).flat_map(move |pos| {
                (1..=h as u8).map(move |value| Mutation { player, pos, value })
            })
        })
        .collect();
    let mut plateau_left = max_plateau_moves;
    let mut evaluations = 0;
    let mut trajectory = vec![state.count()];
    loop {
        moves.shuffle(rng);
        let mut improved = false;
        for m in &moves {
            if state.current(m) == m.value {
                continue;
            }
            evaluations += 1;
            let delta = state.delta_count(m);
            if delta > 0 {
                state.apply(m)?;
                trajectory.push(state.count());
                improved = true;
            } else if delta == 0 && plateau_left > 0 {
                state.apply(m)?;
                plateau_left -= 1;
            }
        }
        if !improved {
            break;
        }
    }
    let count = state.count();
    let (k1, k2) = state.into_pair();
    Ok(ClimbOutcome {
        k1,
        k2,
        count,
        evaluations,
        trajectory,
    })
}

fn run_restart(config: &SearchConfig, index: u32) -> Result<ClimbOutcome> {
    let mut rng = rng::stream(config.seed, index as u64);
    let k1 = random_strategy(config.h, &mut rng);
    let k2 = random_strategy(config.h, &mut rng);
    climb(k1, k2, config.max_plateau_moves, &mut rng)
}

/// Larger count wins; ties go to the lexicographically smaller pair.
fn better(a: &ClimbOutcome, b: &ClimbOutcome) -> bool {
    a.count > b.count || (a.count == b.count && (&a.k1, &a.k2) < (&b.k1, &b.k2))
}

/// Random-restart hill climbing. Restart `r` draws its initial pair and move
/// orders from stream `r` of the master seed, so the result is independent of
/// scheduling. With a target, the search stops at the first restart (in index
/// order) that reaches it.
pub fn hill_climb(config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let target_count = config.target.as_ref().map(|t| {
        let scaled = t * Rat::from_integer(num_bigint::BigInt::from(4u8).pow(config.h));
        scaled.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
    });
    let mut done: Vec<ClimbOutcome> = Vec::with_capacity(config.restarts as usize);
    let mut start = 0;
    while start < config.restarts {
        let end = (start + CHUNK).min(config.restarts);
        let chunk: Vec<ClimbOutcome> = (start..end)
            .into_par_iter()
            .map(|r| run_restart(config, r))
            .collect::<Result<_>>()?;
        done.extend(chunk);
        if let Some(tc) = target_count {
            if let Some(hit) = done.iter().position(|c| c.count >= tc) {
                done.truncate(hit + 1);
                break;
            }
        }
        start = end;
    }
    let evaluations = done.iter().map(|c| c.evaluations).sum();
    let restarts_used = done.len() as u32;
    let best = done
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("restarts >= 1");
    Ok(SearchResult {
        best_value: rat::over_four_pow(best.count, config.h),
        best_pair: (best.k1, best.k2),
        restarts_used,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::win_prob;
    use crate::presets;
    use crate::rat::rat;
    use num_traits::Zero;

    #[test]
    fn best_response_to_fbh_is_fbh() {
        let (k, _) = presets::fbh_pair(3);
        let (k2, v) = best_response(&k);
        assert_eq!(v, rat(21, 64));
        assert_eq!(&k2.table()[1..], &k.table()[1..]);
    }

    #[test]
    fn best_response_to_constant_matches_exhaustive_oracle() {
        let k1 = HStrategy::constant(2, 1).unwrap();
        let (_, v) = best_response(&k1);
        let mut oracle = Rat::zero();
        for code in 0..16u32 {
            let table: Vec<u8> = (0..4).map(|p| ((code >> p) & 1) as u8 + 1).collect();
            let k2 = HStrategy::new(2, table).unwrap();
            oracle = oracle.max(win_prob(&k1, &k2).unwrap());
        }
        assert_eq!(v, oracle);
    }

    #[test]
    fn best_response_to_k33_first_component() {
        let (k1, k2) = presets::k33();
        let (_, v) = best_response(&k1);
        assert!(v >= win_prob(&k1, &k2).unwrap());
        assert!(v >= rat(22, 64));
    }

    #[test]
    fn best_response_dominates_random_replies() {
        let mut rng = rng::stream(11, 0);
        for h in 2..=5 {
            let k1 = random_strategy(h, &mut rng);
            let (_, best) = best_response(&k1);
            for _ in 0..100 {
                let k2 = random_strategy(h, &mut rng);
                assert!(best >= win_prob(&k1, &k2).unwrap());
            }
        }
    }

    #[test]
    fn brute_force_small_heights() {
        let r1 = brute_force_optimal(1).unwrap();
        assert_eq!(r1.best_value, rat(1, 4));
        let r3 = brute_force_optimal(3).unwrap();
        assert_eq!(r3.best_value, rat(22, 64));
        let (a, b) = &r3.best_pair;
        assert_eq!(win_prob(a, b).unwrap(), r3.best_value);
        assert_eq!(r3.evaluations, 3u64.pow(8));
        assert!(brute_force_optimal(4).is_err());
        assert!(brute_force_optimal(0).is_err());
    }

    #[test]
    fn brute_force_h2_matches_full_pair_enumeration() {
        let mut oracle = Rat::zero();
        let table = |code: u32| -> HStrategy {
            HStrategy::new(2, (0..4).map(|p| ((code >> p) & 1) as u8 + 1).collect()).unwrap()
        };
        for c1 in 0..16 {
            for c2 in 0..16 {
                oracle = oracle.max(win_prob(&table(c1), &table(c2)).unwrap());
            }
        }
        let r = brute_force_optimal(2).unwrap();
        assert_eq!(r.best_value, oracle);
        assert!(rat::is_multiple_of_four_pow(&r.best_value, 2));
    }

    #[test]
    fn incremental_eval_matches_full_recompute() {
        let mut rng = rng::stream(3, 9);
        for _ in 0..20 {
            let k1 = random_strategy(3, &mut rng);
            let k2 = random_strategy(3, &mut rng);
            let state = GridState::new(k1.clone(), k2.clone()).unwrap();
            let before = win_prob(&k1, &k2).unwrap();
            for player in [Player::A, Player::B] {
                for pos in 0..8 {
                    for value in 1..=3 {
                        let m = Mutation { player, pos, value };
                        let (mut a, mut b) = (k1.clone(), k2.clone());
                        match player {
                            Player::A => a.set(pos, value).unwrap(),
                            Player::B => b.set(pos, value).unwrap(),
                        }
                        let after = win_prob(&a, &b).unwrap();
                        assert_eq!(state.incremental_eval(&m), after - &before);
                    }
                }
            }
        }
    }

    #[test]
    fn mutate_then_revert_is_identity() {
        let mut rng = rng::stream(5, 0);
        let k1 = random_strategy(4, &mut rng);
        let k2 = random_strategy(4, &mut rng);
        let mut state = GridState::new(k1.clone(), k2.clone()).unwrap();
        let start = state.count();
        for pos in 0..16 {
            let m = Mutation { player: Player::B, pos, value: (pos % 4 + 1) as u8 };
            let undo = state.apply(&m).unwrap();
            state.apply(&undo).unwrap();
            assert_eq!(state.count(), start);
        }
        assert_eq!(state.pair(), (&k1, &k2));
    }

    #[test]
    fn all_white_entry_mutation_has_no_effect() {
        let mut rng = rng::stream(8, 0);
        let k1 = random_strategy(4, &mut rng);
        let k2 = random_strategy(4, &mut rng);
        let state = GridState::new(k1, k2).unwrap();
        for value in 1..=4 {
            for player in [Player::A, Player::B] {
                assert_eq!(state.delta_count(&Mutation { player, pos: 0, value }), 0);
            }
        }
    }

    #[test]
    fn climbs_are_strictly_increasing() {
        let mut rng = rng::stream(1, 1);
        for _ in 0..10 {
            let k1 = random_strategy(4, &mut rng);
            let k2 = random_strategy(4, &mut rng);
            let out = climb(k1, k2, 0, &mut rng).unwrap();
            assert!(out.trajectory.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(out.count, *out.trajectory.last().unwrap());
        }
    }

    #[test]
    fn hill_climb_is_reproducible() {
        let config = SearchConfig::new(4, 8, 42);
        let a = hill_climb(&config).unwrap();
        let b = hill_climb(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(win_prob(&a.best_pair.0, &a.best_pair.1).unwrap(), a.best_value);
    }

    #[test]
    fn hill_climb_h1_is_quarter() {
        let r = hill_climb(&SearchConfig::new(1, 3, 0)).unwrap();
        assert_eq!(r.best_value, rat(1, 4));
    }

    #[test]
    fn hill_climb_reaches_brute_force_optimum_at_h3() {
        let optimum = brute_force_optimal(3).unwrap().best_value;
        let r = hill_climb(&SearchConfig::new(3, 50, 2024)).unwrap();
        assert!(r.best_value <= optimum);
        assert_eq!(r.best_value, optimum);
    }

    #[test]
    fn target_stops_early() {
        let mut config = SearchConfig::new(3, 200, 7);
        config.target = Some(rat(22, 64));
        let r = hill_climb(&config).unwrap();
        assert_eq!(r.best_value, rat(22, 64));
        assert!(r.restarts_used < 200);
        assert_eq!(hill_climb(&config).unwrap(), r);
    }

    #[test]
    fn config_validation() {
        assert!(hill_climb(&SearchConfig::new(4, 0, 0)).is_err());
        assert!(hill_climb(&SearchConfig::new(13, 1, 0)).is_err());
    }
}
