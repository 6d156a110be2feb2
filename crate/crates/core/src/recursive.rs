//! Recursive strategies and the lower-bound recurrences they induce.
//!
//! A recursive strategy of order `t` reads the observed stack in batches of
//! `t` hats. Batches listed by its [`SkipRule`] are skipped; at the first
//! accepted batch `u`, after `m` skipped batches, it names hat
//! `m·t + k0(u)` where `k0` is a fixed t-strategy.
//!
//! When both players skip their first batch the game restarts on fresh,
//! independent hats, so the value `V` of a pair satisfies `V = a·V + b` with
//! `a` the probability that both skip. The same construction turns any
//! h-strategy into an (h+t)-strategy, giving `V_{2,h+t} >= a·V_{2,h} + b`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::game::{self, hat, HStrategy, Player};
use crate::poly::{Poly, RationalFn};
use crate::rat::{self, rat, Rat};

/// Which t-hat batches a recursive strategy skips.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SkipRule {
    /// All-black and all-white batches.
    Monochromatic,
    /// Only the all-white batch. With `t = 1` this is the first black hat.
    AllWhite,
    /// An explicit set of skipped batch words.
    Explicit(Vec<u32>),
}

impl SkipRule {
    pub fn skips(&self, t: u32, word: u32) -> bool {
        let all_black = (1u32 << t) - 1;
        match self {
            SkipRule::Monochromatic => word == 0 || word == all_black,
            SkipRule::AllWhite => word == 0,
            SkipRule::Explicit(words) => words.contains(&word),
        }
    }
}

/// A pair of recursive strategies sharing an order and a skip rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursivePair {
    k1: HStrategy,
    k2: HStrategy,
    rule: SkipRule,
}

impl RecursivePair {
    pub fn new(k1: HStrategy, k2: HStrategy, rule: SkipRule) -> Result<Self> {
        if k1.h() != k2.h() {
            return Err(Error::HeightMismatch(k1.h(), k2.h()));
        }
        let t = k1.h();
        let skipped = (0..1u32 << t).filter(|&w| rule.skips(t, w)).count();
        if skipped == 0 {
            return Err(Error::InvalidArgument(
                "skip rule skips no batch; use the finite strategy directly".into(),
            ));
        }
        if skipped == 1 << t {
            return Err(Error::InvalidArgument(format!(
                "skip rule skips every batch of {t} hats"
            )));
        }
        Ok(RecursivePair { k1, k2, rule })
    }

    /// First black hat: order 1, skip white hats, then name the current hat.
    pub fn first_black_hat() -> Self {
        let k = HStrategy::constant(1, 1).expect("valid");
        RecursivePair::new(k.clone(), k, SkipRule::AllWhite).expect("valid")
    }

    pub fn t(&self) -> u32 {
        self.k1.h()
    }

    pub fn base(&self) -> (&HStrategy, &HStrategy) {
        (&self.k1, &self.k2)
    }

    pub fn rule(&self) -> &SkipRule {
        &self.rule
    }

    pub fn strategy(&self, player: Player) -> &HStrategy {
        match player {
            Player::A => &self.k1,
            Player::B => &self.k2,
        }
    }

    /// Hat named by `player` on observing `bits` (hat 1 first). `None` when
    /// every complete batch in `bits` is skipped.
    pub fn choice(&self, player: Player, bits: &[bool]) -> Option<u32> {
        let t = self.t() as usize;
        let base = self.strategy(player);
        for (m, batch) in bits.chunks_exact(t).enumerate() {
            let word = batch.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
            if !self.rule.skips(t as u32, word) {
                return Some((m * t) as u32 + base.choice(word as usize));
            }
        }
        None
    }

    fn skipped_words(&self) -> impl Iterator<Item = usize> + '_ {
        let t = self.t();
        (0..1usize << t).filter(move |&w| self.rule.skips(t, w as u32))
    }

    fn accepted_words(&self) -> impl Iterator<Item = usize> + '_ {
        let t = self.t();
        (0..1usize << t).filter(move |&w| !self.rule.skips(t, w as u32))
    }

    /// The pieces of the fixed-point equation as polynomials in the
    /// black-hat probability `p`.
    pub fn polys(&self) -> RecursivePolys {
        let t = self.t();
        let weight = |w: usize| {
            let black = w.count_ones();
            &Poly::x().pow(black) * &Poly::one_minus_x().pow(t - black)
        };
        let skip = self
            .skipped_words()
            .fold(Poly::zero(), |acc, w| &acc + &weight(w));
        let accepted_win = game::win_prob_joint_poly_where(&self.k1, &self.k2, |i, j| {
            !self.rule.skips(t, i as u32) && !self.rule.skips(t, j as u32)
        })
        .expect("same heights");
        // One player's batch is skipped and the other's accepted. The skipping
        // side's partner moves on to later, independent hats and succeeds
        // with probability p; the other succeeds iff its named hat in the
        // skipped batch is black.
        let mut cross = Poly::zero();
        for s in self.skipped_words() {
            for c in self.accepted_words() {
                let ws = &weight(s) * &weight(c);
                if hat(t, s, self.k2.choice(c)) {
                    cross = &cross + &ws;
                }
                if hat(t, s, self.k1.choice(c)) {
                    cross = &cross + &ws;
                }
            }
        }
        let cross = &cross * &Poly::x();
        RecursivePolys {
            skip,
            accepted_win,
            cross,
        }
    }

    /// Exact value as a rational function of `p`.
    pub fn value_fn(&self) -> RationalFn {
        let polys = self.polys();
        RationalFn::new(
            &polys.accepted_win + &polys.cross,
            &Poly::constant(Rat::one()) - &polys.skip.pow(2),
        )
    }
}

/// `V(p) = (accepted_win + cross) / (1 - skip²)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursivePolys {
    /// Probability that one batch is skipped.
    pub skip: Poly,
    /// Probability that both first batches are accepted and both players win.
    pub accepted_win: Poly,
    /// Probability that exactly one first batch is skipped and both win.
    pub cross: Poly,
}

/// Uniform-measure coefficients of `V = a·V + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursiveCoefficients {
    /// Probability that both players skip their first batch.
    pub a: Rat,
    pub b: Rat,
    /// Win probability conditional on both first batches being accepted.
    pub w_accepted: Rat,
}

pub fn recursive_coefficients(rp: &RecursivePair) -> RecursiveCoefficients {
    let half = rat(1, 2);
    let polys = rp.polys();
    let skip = polys.skip.eval(&half);
    let accept = Rat::one() - &skip;
    let accepted_win = polys.accepted_win.eval(&half);
    RecursiveCoefficients {
        a: &skip * &skip,
        b: &accepted_win + polys.cross.eval(&half),
        w_accepted: accepted_win / (&accept * &accept),
    }
}

/// Exact win probability of the recursive pair, `b / (1 - a)`.
pub fn recursive_value(rp: &RecursivePair) -> Rat {
    let c = recursive_coefficients(rp);
    c.b / (Rat::one() - c.a)
}

/// Right-hand side of the finite decomposition for the monochromatic rule:
/// `(1-q)²·W + (1-q)·2^{-t} + 4^{-t}` with `q = 2^{1-t}`. The middle term
/// covers one all-black stack facing an accepted one (the all-black side
/// always wins, the other half of the time), the last both all-black.
pub fn decomposition_rhs(t: u32, w_accepted: &Rat) -> Rat {
    let q = rat::two_pow(1 - t as i32);
    let accept = Rat::one() - &q;
    &accept * &accept * w_accepted + &accept * rat::two_pow(-(t as i32)) + rat::two_pow(-2 * t as i32)
}

/// Checks that the finite t-hat value of the base pair splits into the
/// accepted-batch part and the monochromatic cases.
pub fn finite_decomposition_check(rp: &RecursivePair) -> Result<bool> {
    if rp.rule != SkipRule::Monochromatic {
        return Err(Error::InvalidArgument(
            "the finite decomposition applies to the monochromatic rule".into(),
        ));
    }
    let (k1, k2) = rp.base();
    let finite = game::win_prob(k1, k2)?;
    Ok(finite == decomposition_rhs(rp.t(), &recursive_coefficients(rp).w_accepted))
}

/// The finite value a t-hat base pair needs so that its monochromatic
/// recursive strategy reaches 7/20: `4^{-t}·(1 + 7/5·(4^{t-1} - 1))`.
pub fn required_base_prob(t: u32) -> Result<Rat> {
    if t < 3 {
        return Err(Error::InvalidArgument(format!("order t = {t} must be at least 3")));
    }
    let four_pow = |k: u32| Rat::from_integer(BigInt::from(4u8).pow(k));
    Ok((Rat::one() + rat(7, 5) * (four_pow(t - 1) - Rat::one())) / four_pow(t))
}

/// Whether a t-hat pair could have the required value, i.e. whether that value
/// is a multiple of `4^{-t}`. Holds exactly for odd `t`.
pub fn kt_parity_feasible(t: u32) -> Result<bool> {
    Ok(rat::is_multiple_of_four_pow(&required_base_prob(t)?, t))
}

/// `V_{2,h+t} >= a·V_{2,h} + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceCoeffs {
    pub a: Rat,
    pub b: Rat,
    pub t: u32,
}

impl RecurrenceCoeffs {
    pub fn new(a: Rat, b: Rat, t: u32) -> Result<Self> {
        if !rat::in_open_unit_interval(&a) || b.is_negative() || t == 0 {
            return Err(Error::InvalidArgument(format!(
                "invalid recurrence a = {a}, b = {b}, t = {t}"
            )));
        }
        Ok(RecurrenceCoeffs { a, b, t })
    }

    pub fn from_pair(rp: &RecursivePair) -> Self {
        let c = recursive_coefficients(rp);
        RecurrenceCoeffs {
            a: c.a,
            b: c.b,
            t: rp.t(),
        }
    }

    pub fn apply(&self, v: &Rat) -> Rat {
        &self.a * v + &self.b
    }
}

/// Where a propagated bound comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Base,
    /// Carried over from `h - 1`.
    Monotone,
    /// A recurrence of the given order.
    Recurrence(u32),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Base => write!(f, "base"),
            Provenance::Monotone => write!(f, "mono"),
            Provenance::Recurrence(t) => write!(f, "K{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundEntry {
    pub value: Rat,
    pub provenance: Provenance,
}

/// Closes the base lower bounds under monotonicity and every recurrence.
/// Each candidate only looks at smaller heights, so one ascending sweep
/// reaches the fixed point; a second sweep confirms it. Ties keep the
/// earliest source in the order base, monotone, recurrences as listed.
pub fn propagate_lower_bounds(
    base: &BTreeMap<u32, Rat>,
    recurrences: &[RecurrenceCoeffs],
    h_max: u32,
) -> Result<BTreeMap<u32, BoundEntry>> {
    if !base.contains_key(&1) {
        return Err(Error::InvalidArgument(
            "base bounds must include h = 1".into(),
        ));
    }
    let mut table: BTreeMap<u32, BoundEntry> = BTreeMap::new();
    loop {
        let mut changed = false;
        for h in 1..=h_max {
            let mut best: Option<BoundEntry> = base.get(&h).map(|v| BoundEntry {
                value: v.clone(),
                provenance: Provenance::Base,
            });
            let mut consider = |value: Rat, provenance: Provenance| {
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(BoundEntry { value, provenance });
                }
            };
            if let Some(prev) = table.get(&(h - 1)) {
                consider(prev.value.clone(), Provenance::Monotone);
            }
            for r in recurrences {
                if h > r.t {
                    if let Some(from) = table.get(&(h - r.t)) {
                        consider(r.apply(&from.value), Provenance::Recurrence(r.t));
                    }
                }
            }
            let best = best.expect("h = 1 is in the base and later heights inherit");
            if table.get(&h).is_none_or(|old| old.value != best.value) {
                changed = true;
            }
            table.insert(h, best);
        }
        if !changed {
            return Ok(table);
        }
    }
}

/// `|7/20 - v| >= 1/(5·4^h)` for a value `v` reached by an h-strategy pair.
pub fn gap_lemma_check(v: &Rat, h: u32) -> Result<bool> {
    if !rat::is_multiple_of_four_pow(v, h) {
        return Err(Error::InvalidArgument(format!(
            "{v} is not a multiple of 1/4^{h}"
        )));
    }
    let gap = (rat(7, 20) - v).abs();
    let bound = Rat::new(BigInt::one(), BigInt::from(5) * BigInt::from(4u8).pow(h));
    Ok(gap >= bound)
}

/// Partial sum `Σ_{m=1}^{t_max} 4^{-m}` of the first-black-hat series.
pub fn fbh_value(t_max: u32) -> Rat {
    (1..=t_max as i32).fold(Rat::zero(), |acc, m| acc + rat::two_pow(-2 * m))
}

/// Lower bounds on `V_{2,h}` for `h <= 3` (exhaustive search) together with
/// the hill-climbing values `0.34765625` (h = 4) and `0.349609375` (h = 5).
pub fn known_base() -> BTreeMap<u32, Rat> {
    let mut base = BTreeMap::new();
    for h in 1..=3 {
        let r = crate::search::brute_force_optimal(h).expect("h <= 3");
        base.insert(h, r.best_value);
    }
    base.insert(4, rat::parse("0.34765625").expect("literal"));
    base.insert(5, rat::parse("0.349609375").expect("literal"));
    base
}

/// [`known_base`] extended with the hill-climbing values for `6..=10`.
pub fn known_base_extended() -> BTreeMap<u32, Rat> {
    let mut base = known_base();
    for (h, v) in [
        (6, "0.349853515625"),
        (7, "0.34991455078125"),
        (8, "0.3499603271484375"),
        (9, "0.3499794006347656"),
        (10, "0.34998035430908203"),
    ] {
        base.insert(h, rat::parse(v).expect("literal"));
    }
    base
}

/// Known bounds obtained from the K3/K5 recurrences, `6..=13`.
/// Entries are printed doubles and are read back as their exact values.
pub fn known_improved_table() -> BTreeMap<u32, Rat> {
    [
        (6, "0.349609375"),
        (7, "0.349853515625"),
        (8, "0.3499755859375"),
        (9, "0.3499908447265625"),
        (10, "0.34999847412109375"),
        (11, "0.34999847412109375"),
        (12, "0.34999942779541016"),
        (13, "0.34999990463256836"),
    ]
    .into_iter()
    .map(|(h, v)| (h, rat::from_f64_decimal(v).expect("literal")))
    .collect()
}

/// The K3 and K5 recurrences.
pub fn standard_recurrences() -> Vec<RecurrenceCoeffs> {
    use crate::presets::Preset;
    vec![
        RecurrenceCoeffs::from_pair(&Preset::K33.recursive()),
        RecurrenceCoeffs::from_pair(&Preset::K55.recursive()),
    ]
}
