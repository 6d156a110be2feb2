//! Finite two-player game: stacks, h-strategies, outcome grids and the exact
//! win-probability engine.
//!
//! Conventions used throughout the crate:
//!
//! * A stack of `h` hats is an `h`-bit word. Hat 1 (the lowest hat) is the
//!   most significant bit, so the word is also the zero-based position of the
//!   stack in lexicographic order: position 0 is all white, `2^h - 1` all
//!   black. The one-based index used in tables is `position + 1`.
//! * Player A wears stack `i` and player B wears stack `j`. A sees `j` and
//!   names `k1(j)`; B sees `i` and names `k2(i)`.
//! * In a [`DeltaGrid`], column `i` is A's stack (left to right) and row `j`
//!   is B's stack (bottom to top).

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rat::{self, Rat};

/// Largest height accepted by [`HStrategy`]. Win probabilities cost `O(4^h)`.
pub const MAX_H: u32 = 16;

/// A wears stack `i` and plays the first strategy of a pair; B wears `j`
/// and plays the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    A,
    B,
}

/// Whether hat `k` (one-based) of the stack `word` of height `h` is black.
#[inline]
pub fn hat(h: u32, word: usize, k: u32) -> bool {
    (word >> (h - k)) & 1 == 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stack {
    h: u32,
    bits: u32,
}

impl Stack {
    pub fn new(h: u32, bits: u32) -> Result<Self> {
        if h == 0 || h > 31 || (bits as u64) >= (1u64 << h) {
            return Err(Error::InvalidArgument(format!(
                "stack word {bits} does not fit h = {h}"
            )));
        }
        Ok(Stack { h, bits })
    }

    /// Builds a stack from hats listed from hat 1 upwards.
    pub fn from_hats(hats: &[bool]) -> Result<Self> {
        let bits = hats.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Stack::new(hats.len() as u32, bits)
    }

    /// The stack with one-based lexicographic index `j`.
    pub fn from_index(h: u32, j: usize) -> Result<Self> {
        if h == 0 || h > 31 || j == 0 || (j as u64) > (1u64 << h) {
            return Err(Error::IndexOutOfRange { h, index: j });
        }
        Ok(Stack {
            h,
            bits: (j - 1) as u32,
        })
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// One-based lexicographic index.
    pub fn index(&self) -> usize {
        self.bits as usize + 1
    }

    /// Zero-based lexicographic position, equal to the stack word.
    pub fn position(&self) -> usize {
        self.bits as usize
    }

    pub fn hat(&self, k: u32) -> bool {
        assert!(k >= 1 && k <= self.h, "hat index {k} out of 1..={}", self.h);
        hat(self.h, self.bits as usize, k)
    }

    pub fn hats(&self) -> Vec<bool> {
        (1..=self.h).map(|k| self.hat(k)).collect()
    }

    pub fn black_count(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_monochromatic(&self) -> bool {
        self.bits == 0 || self.bits as u64 == (1u64 << self.h) - 1
    }

    /// The dyadic interval `[pos/2^h, (pos+1)/2^h)` this stack occupies in
    /// `[0, 1)` when read as a binary expansion.
    pub fn interval(&self) -> (Rat, Rat) {
        let den = num_bigint::BigInt::from(1u64 << self.h);
        (
            Rat::new(self.bits.into(), den.clone()),
            Rat::new((self.bits + 1).into(), den),
        )
    }
}

/// An h-strategy as its table of choices, one entry per observed stack in
/// lexicographic order. Entries are one-based hat indices in `1..=h`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HStrategy {
    h: u32,
    table: Vec<u8>,
}

impl HStrategy {
    pub fn new(h: u32, table: Vec<u8>) -> Result<Self> {
        if h == 0 || h > MAX_H {
            return Err(Error::InvalidStrategy(format!(
                "height {h} outside 1..={MAX_H}"
            )));
        }
        if table.len() != 1 << h {
            return Err(Error::InvalidStrategy(format!(
                "table has {} entries, expected 2^{h} = {}",
                table.len(),
                1usize << h
            )));
        }
        if let Some(pos) = table.iter().position(|&k| k == 0 || k as u32 > h) {
            return Err(Error::InvalidStrategy(format!(
                "entry {} at position {pos} outside 1..={h}",
                table[pos]
            )));
        }
        Ok(HStrategy { h, table })
    }

    pub fn from_slice(h: u32, table: &[u8]) -> Result<Self> {
        HStrategy::new(h, table.to_vec())
    }

    /// Always names hat `k`.
    pub fn constant(h: u32, k: u8) -> Result<Self> {
        HStrategy::new(h, vec![k; 1 << h])
    }

    /// First black hat. The all-white stack has no black hat; it maps to `h`.
    pub fn first_black_hat(h: u32) -> Result<Self> {
        let table = (0..1usize << h)
            .map(|w| {
                (1..=h)
                    .find(|&k| hat(h, w, k))
                    .unwrap_or(h) as u8
            })
            .collect();
        HStrategy::new(h, table)
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Hat named when observing the stack at zero-based position `pos`.
    #[inline]
    pub fn choice(&self, pos: usize) -> u32 {
        self.table[pos] as u32
    }

    pub fn choose(&self, observed: &Stack) -> u32 {
        assert_eq!(observed.h(), self.h);
        self.choice(observed.position())
    }

    pub fn set(&mut self, pos: usize, k: u8) -> Result<()> {
        if k == 0 || k as u32 > self.h {
            return Err(Error::InvalidStrategy(format!(
                "entry {k} outside 1..={}",
                self.h
            )));
        }
        if pos >= self.table.len() {
            return Err(Error::IndexOutOfRange {
                h: self.h,
                index: pos + 1,
            });
        }
        self.table[pos] = k;
        Ok(())
    }
}

/// Binary `2^h × 2^h` matrix indexed by `(column i, row j)`, zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaGrid {
    h: u32,
    cells: Vec<bool>,
}

impl DeltaGrid {
    fn from_fn(h: u32, f: impl Fn(usize, usize) -> bool) -> Self {
        let n = 1usize << h;
        let mut cells = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                cells.push(f(i, j));
            }
        }
        DeltaGrid { h, cells }
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn side(&self) -> usize {
        1 << self.h
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.side() + col]
    }

    pub fn black_count(&self) -> u64 {
        self.cells.iter().filter(|&&c| c).count() as u64
    }
}

/// The three outcome grids of a strategy pair.
#[derive(Clone, Debug)]
pub struct DeltaGrids {
    /// A's individual success.
    pub a: DeltaGrid,
    /// B's individual success.
    pub b: DeltaGrid,
    /// Joint success, the cellwise product of the other two.
    pub joint: DeltaGrid,
}

fn check_heights(k1: &HStrategy, k2: &HStrategy) -> Result<u32> {
    if k1.h != k2.h {
        return Err(Error::HeightMismatch(k1.h, k2.h));
    }
    Ok(k1.h)
}

pub fn delta_grids(k1: &HStrategy, k2: &HStrategy) -> Result<DeltaGrids> {
    let h = check_heights(k1, k2)?;
    let a = DeltaGrid::from_fn(h, |i, j| hat(h, i, k1.choice(j)));
    let b = DeltaGrid::from_fn(h, |i, j| hat(h, j, k2.choice(i)));
    let joint = DeltaGrid::from_fn(h, |i, j| a.get(i, j) && b.get(i, j));
    Ok(DeltaGrids { a, b, joint })
}

/// Fixed-width bitset over stack positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Bitset {
    words: Vec<u64>,
}

impl Bitset {
    pub(crate) fn new(len: usize) -> Self {
        Bitset {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    pub(crate) fn set(&mut self, idx: usize, value: bool) {
        let (w, b) = (idx / 64, idx % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }


    pub(crate) fn or_assign(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    #[inline]
    pub(crate) fn and_count(&self, other: &Bitset) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }
}

/// `masks[k]` holds the stacks whose hat `k` is black (index 0 unused).
pub(crate) fn hat_masks(h: u32) -> Vec<Bitset> {
    let n = 1usize << h;
    let mut masks = vec![Bitset::new(n); h as usize + 1];
    for (k, mask) in masks.iter_mut().enumerate().skip(1) {
        for w in 0..n {
            mask.set(w, hat(h, w, k as u32));
        }
    }
    masks
}

/// Number of black cells of the joint grid.
pub fn win_count(k1: &HStrategy, k2: &HStrategy) -> Result<u64> {
    let h = check_heights(k1, k2)?;
    let n = 1usize << h;
    let masks = hat_masks(h);
    // by_choice[k]: observed stacks j on which A names hat k.
    let mut by_choice = vec![Bitset::new(n); h as usize + 1];
    for j in 0..n {
        by_choice[k1.choice(j) as usize].set(j, true);
    }
    let mut count = 0;
    let mut a_wins = Bitset::new(n);
    for i in 0..n {
        a_wins.words.iter_mut().for_each(|w| *w = 0);
        for k in 1..=h {
            if hat(h, i, k) {
                a_wins.or_assign(&by_choice[k as usize]);
            }
        }
        count += a_wins.and_count(&masks[k2.choice(i) as usize]);
    }
    Ok(count)
}

/// Exact probability that both players name a black hat, uniform measure.
pub fn win_prob(k1: &HStrategy, k2: &HStrategy) -> Result<Rat> {
    let h = check_heights(k1, k2)?;
    Ok(rat::over_four_pow(win_count(k1, k2)?, h))
}

/// Each hat is black independently with probability `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasedMeasure {
    p: Rat,
}

impl BiasedMeasure {
    pub fn new(p: Rat) -> Result<Self> {
        if !rat::in_open_unit_interval(&p) {
            return Err(Error::ProbabilityOutOfRange(rat::to_fraction_string(&p)));
        }
        Ok(BiasedMeasure { p })
    }

    pub fn uniform() -> Self {
        BiasedMeasure { p: rat::rat(1, 2) }
    }

    pub fn p(&self) -> &Rat {
        &self.p
    }

    pub fn weight(&self, stack: &Stack) -> Rat {
        self.weight_by_count(stack.black_count(), stack.h())
    }

    /// `p^black · (1-p)^(len-black)`.
    pub fn weight_by_count(&self, black: u32, len: u32) -> Rat {
        let q = Rat::one() - &self.p;
        num_traits::pow(self.p.clone(), black as usize) * num_traits::pow(q, (len - black) as usize)
    }
}

/// Winning cells bucketed by the total number of black hats over both stacks,
/// restricted to cells `(i, j)` accepted by `filter`.
pub fn joint_counts_where(
    k1: &HStrategy,
    k2: &HStrategy,
    filter: impl Fn(usize, usize) -> bool,
) -> Result<Vec<u64>> {
    let h = check_heights(k1, k2)?;
    let n = 1usize << h;
    let mut counts = vec![0u64; 2 * h as usize + 1];
    for j in 0..n {
        let a_choice = k1.choice(j);
        for i in 0..n {
            if hat(h, i, a_choice) && hat(h, j, k2.choice(i)) && filter(i, j) {
                counts[(i.count_ones() + j.count_ones()) as usize] += 1;
            }
        }
    }
    Ok(counts)
}

pub fn win_prob_biased(k1: &HStrategy, k2: &HStrategy, measure: &BiasedMeasure) -> Result<Rat> {
    let h = check_heights(k1, k2)?;
    let counts = joint_counts_where(k1, k2, |_, _| true)?;
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(black, &c)| Rat::from_integer(c.into()) * measure.weight_by_count(black as u32, 2 * h))
        .fold(Rat::zero(), |acc, w| acc + w))
}

/// `Σ counts[c] · p^c · (1-p)^(total-c)`.
pub fn counts_to_poly(counts: &[u64], total: u32) -> Poly {
    let p = Poly::x();
    let q = Poly::one_minus_x();
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .fold(Poly::zero(), |acc, (black, &c)| {
            let term = &p.pow(black as u32) * &q.pow(total - black as u32);
            &acc + &term.scale(&Rat::from_integer(c.into()))
        })
}

/// Win probability as an exact polynomial in `p`.
pub fn win_prob_joint_poly(k1: &HStrategy, k2: &HStrategy) -> Result<Poly> {
    win_prob_joint_poly_where(k1, k2, |_, _| true)
}

/// Probability of winning on a cell accepted by `filter`, as a polynomial in
/// `p`. The weight is not renormalized by the probability of the filter.
pub fn win_prob_joint_poly_where(
    k1: &HStrategy,
    k2: &HStrategy,
    filter: impl Fn(usize, usize) -> bool,
) -> Result<Poly> {
    let h = check_heights(k1, k2)?;
    let counts = joint_counts_where(k1, k2, filter)?;
    Ok(counts_to_poly(&counts, 2 * h))
}

/// Checks that lifting the pair to strategies on `[0, 1)` (`y ↦ 2^{k(y)}`,
/// reading `k` off the first `h` binary digits of `y`) reproduces the joint
/// grid: sampling `ε(2^{k1(y)} x) · ε(2^{k2(x)} y)` at the midpoints of the
/// `2^depth` grid must give tiles of uniform color matching each cell.
pub fn embed_check(k1: &HStrategy, k2: &HStrategy, depth: u32) -> Result<bool> {
    let h = check_heights(k1, k2)?;
    if depth < h {
        return Err(Error::InvalidArgument(format!(
            "depth {depth} is smaller than h = {h}"
        )));
    }
    if depth > 12 {
        return Err(Error::InvalidArgument(format!(
            "depth {depth} exceeds the supported maximum of 12"
        )));
    }
    let grids = delta_grids(k1, k2)?;
    let shift = depth - h;
    let n = 1usize << depth;
    let scale = (1u64 << (depth + 1)) as f64;
    let lift = |k: &HStrategy, coord: usize| -> f64 { (1u64 << k.choice(coord >> shift)) as f64 };
    for cy in 0..n {
        let y = (2 * cy + 1) as f64 / scale;
        for cx in 0..n {
            let x = (2 * cx + 1) as f64 / scale;
            let won = crate::continuous::eps(lift(k1, cy) * x) == 1
                && crate::continuous::eps(lift(k2, cx) * y) == 1;
            if won != grids.joint.get(cx >> shift, cy >> shift) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::rat::rat;
    use num_traits::Signed;
    use proptest::prelude::*;

    #[test]
    fn lexicographic_indexing() {
        assert_eq!(Stack::from_index(3, 2).unwrap().hats(), vec![false, false, true]);
        assert_eq!(Stack::from_index(3, 1).unwrap().hats(), vec![false, false, false]);
        assert_eq!(Stack::from_index(3, 8).unwrap().hats(), vec![true, true, true]);
        assert!(Stack::from_index(3, 0).is_err());
        assert!(Stack::from_index(3, 9).is_err());
    }

    #[test]
    fn stack_interval_is_dyadic() {
        let s = Stack::from_index(3, 2).unwrap();
        assert_eq!(s.interval(), (rat(1, 8), rat(2, 8)));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(HStrategy::new(2, vec![1, 2, 3, 1]).is_err());
        assert!(HStrategy::new(2, vec![1, 2, 0, 1]).is_err());
        assert!(HStrategy::new(2, vec![1, 2, 1]).is_err());
        assert!(HStrategy::new(0, vec![1]).is_err());
    }

    #[test]
    fn fbh_table_fills_all_white_with_h() {
        let fbh = HStrategy::first_black_hat(3).unwrap();
        assert_eq!(fbh.table(), &[3, 3, 2, 2, 1, 1, 1, 1]);
    }

    #[test]
    fn grid_counts_for_presets() {
        let (k1, k2) = presets::fbh_pair(3);
        assert_eq!(delta_grids(&k1, &k2).unwrap().joint.black_count(), 21);
        let (k1, k2) = presets::k33();
        assert_eq!(delta_grids(&k1, &k2).unwrap().joint.black_count(), 22);
    }

    #[test]
    fn single_hat_grid_has_one_black_cell() {
        let k = HStrategy::constant(1, 1).unwrap();
        let g = delta_grids(&k, &k).unwrap();
        assert_eq!(g.joint.black_count(), 1);
        assert!(g.joint.get(1, 1));
    }

    #[test]
    fn golden_win_probabilities() {
        let (k1, k2) = presets::fbh_pair(3);
        assert_eq!(win_prob(&k1, &k2).unwrap(), rat(21, 64));
        let (k1, k2) = presets::k33();
        assert_eq!(win_prob(&k1, &k2).unwrap(), rat(22, 64));
        let (k1, k2) = presets::k55();
        assert_eq!(win_prob(&k1, &k2).unwrap(), rat(358, 1024));
        let (k1, k2) = presets::k5_nonsymmetric();
        assert_eq!(win_prob(&k1, &k2).unwrap(), rat(358, 1024));
    }

    #[test]
    fn mismatched_heights_are_rejected() {
        let a = HStrategy::constant(2, 1).unwrap();
        let b = HStrategy::constant(3, 1).unwrap();
        assert!(matches!(win_prob(&a, &b), Err(Error::HeightMismatch(2, 3))));
        assert!(delta_grids(&a, &b).is_err());
        assert!(win_prob_joint_poly(&a, &b).is_err());
    }

    #[test]
    fn biased_oracle_fbh_at_one_third() {
        let (k1, k2) = presets::fbh_pair(3);
        let p = rat(1, 3);
        let q = rat(2, 3);
        // direct summation over the 64 configurations
        let mut oracle = Rat::zero();
        for i in 0..8usize {
            for j in 0..8usize {
                if hat(3, i, k1.choice(j)) && hat(3, j, k2.choice(i)) {
                    let black = (i.count_ones() + j.count_ones()) as usize;
                    oracle += num_traits::pow(p.clone(), black) * num_traits::pow(q.clone(), 6 - black);
                }
            }
        }
        let m = BiasedMeasure::new(p).unwrap();
        assert_eq!(win_prob_biased(&k1, &k2, &m).unwrap(), oracle);
    }

    #[test]
    fn biased_fbh_grows_with_p() {
        let (k1, k2) = presets::fbh_pair(3);
        let hi = win_prob_biased(&k1, &k2, &BiasedMeasure::new(rat(9, 10)).unwrap()).unwrap();
        let lo = win_prob_biased(&k1, &k2, &BiasedMeasure::new(rat(1, 10)).unwrap()).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn biased_measure_rejects_endpoints() {
        assert!(BiasedMeasure::new(rat(0, 1)).is_err());
        assert!(BiasedMeasure::new(rat(1, 1)).is_err());
        assert!(BiasedMeasure::new(rat(3, 2)).is_err());
    }

    #[test]
    fn biased_weights_sum_to_one() {
        let m = BiasedMeasure::new(rat(2, 7)).unwrap();
        let total = (0..16u32)
            .map(|b| m.weight(&Stack::new(4, b).unwrap()))
            .fold(Rat::zero(), |a, w| a + w);
        assert_eq!(total, Rat::one());
    }

    #[test]
    fn joint_poly_examples() {
        let k = HStrategy::constant(1, 1).unwrap();
        assert_eq!(win_prob_joint_poly(&k, &k).unwrap(), Poly::from_ints(&[0, 0, 1]));
        let (k1, k2) = presets::k33();
        let q = win_prob_joint_poly(&k1, &k2).unwrap();
        assert_eq!(q.eval(&rat(1, 2)), rat(22, 64));
        assert!(q.degree().unwrap() <= 6);
    }

    #[test]
    fn embedding_matches_finite_grids() {
        let (k1, k2) = presets::fbh_pair(3);
        assert!(embed_check(&k1, &k2, 3).unwrap());
        let (k1, k2) = presets::k33();
        assert!(embed_check(&k1, &k2, 6).unwrap());
        let (k1, k2) = presets::k55();
        assert!(embed_check(&k1, &k2, 5).unwrap());
        assert!(embed_check(&k1, &k2, 4).is_err());
    }

    fn pair(h: u32) -> impl proptest::strategy::Strategy<Value = (HStrategy, HStrategy)> {
        let n = 1usize << h;
        (
            prop::collection::vec(1..=h as u8, n),
            prop::collection::vec(1..=h as u8, n),
        )
            .prop_map(move |(a, b)| (HStrategy::new(h, a).unwrap(), HStrategy::new(h, b).unwrap()))
    }

    fn naive_count(k1: &HStrategy, k2: &HStrategy) -> u64 {
        let h = k1.h();
        let n = 1usize << h;
        let mut c = 0;
        for i in 0..n {
            for j in 0..n {
                if hat(h, i, k1.choice(j)) && hat(h, j, k2.choice(i)) {
                    c += 1;
                }
            }
        }
        c
    }

    proptest! {
        #[test]
        fn bitset_engine_matches_double_loop((k1, k2) in (1u32..=7).prop_flat_map(pair)) {
            prop_assert_eq!(win_count(&k1, &k2).unwrap(), naive_count(&k1, &k2));
        }

        #[test]
        fn relabeling_symmetry((k1, k2) in (1u32..=5).prop_flat_map(pair)) {
            prop_assert_eq!(win_prob(&k1, &k2).unwrap(), win_prob(&k2, &k1).unwrap());
        }

        #[test]
        fn value_range_and_gap((k1, k2) in (1u32..=6).prop_flat_map(pair)) {
            let h = k1.h();
            let v = win_prob(&k1, &k2).unwrap();
            prop_assert!(v >= Rat::zero() && v <= rat(1, 2));
            prop_assert!(rat::is_multiple_of_four_pow(&v, h));
            let gap = (rat(7, 20) - &v).abs();
            prop_assert!(gap * rat(5, 1) * Rat::from_integer(num_bigint::BigInt::from(4u8).pow(h)) >= Rat::one());
        }

        #[test]
        fn all_white_entry_is_irrelevant((k1, k2) in (1u32..=5).prop_flat_map(pair), v in 1u8..=5, n in 1i64..20) {
            let h = k1.h();
            let v = (v - 1) % h as u8 + 1;
            let mut k1b = k1.clone();
            k1b.set(0, v).unwrap();
            let mut k2b = k2.clone();
            k2b.set(0, v).unwrap();
            prop_assert_eq!(win_prob(&k1, &k2).unwrap(), win_prob(&k1b, &k2b).unwrap());
            let m = BiasedMeasure::new(rat(n, 21)).unwrap();
            prop_assert_eq!(win_prob_biased(&k1, &k2, &m).unwrap(), win_prob_biased(&k1b, &k2b, &m).unwrap());
        }

        #[test]
        fn joint_poly_at_half_is_win_prob((k1, k2) in (1u32..=4).prop_flat_map(pair)) {
            let poly = win_prob_joint_poly(&k1, &k2).unwrap();
            prop_assert_eq!(poly.eval(&rat(1, 2)), win_prob(&k1, &k2).unwrap());
            prop_assert_eq!(win_prob_biased(&k1, &k2, &BiasedMeasure::uniform()).unwrap(), win_prob(&k1, &k2).unwrap());
        }

        #[test]
        fn first_column_and_row_are_white((k1, k2) in (1u32..=4).prop_flat_map(pair)) {
            let g = delta_grids(&k1, &k2).unwrap();
            for t in 0..g.joint.side() {
                prop_assert!(!g.joint.get(0, t));
                prop_assert!(!g.joint.get(t, 0));
            }
        }

        #[test]
        fn constant_strategies_are_independent(h in 1u32..=5, a in 1u8..=5, b in 1u8..=5) {
            let a = (a - 1) % h as u8 + 1;
            let b = (b - 1) % h as u8 + 1;
            let k1 = HStrategy::constant(h, a).unwrap();
            let k2 = HStrategy::constant(h, b).unwrap();
            prop_assert_eq!(win_prob(&k1, &k2).unwrap(), rat(1, 4));
        }

        #[test]
        fn one_constant_strategy_gives_quarter((k1, _k2) in (1u32..=5).prop_flat_map(pair), b in 1u8..=5) {
            // B's success depends only on B's stack, A's is a fair coin given it.
            let h = k1.h();
            let k2 = HStrategy::constant(h, (b - 1) % h as u8 + 1).unwrap();
            prop_assert_eq!(win_prob(&k1, &k2).unwrap(), rat(1, 4));
        }
    }
}
