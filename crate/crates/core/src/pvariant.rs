//! The biased game, where each hat is black with probability `p`.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::game::{self, BiasedMeasure};
use crate::poly::{Poly, RationalFn};
use crate::presets::Preset;
use crate::rat::{self, rat, Rat};

fn rational_fn(num: &[i64], den: &[i64]) -> RationalFn {
    RationalFn::new(Poly::from_ints(num), Poly::from_ints(den))
}

/// Known lower bound for `p <= 1/2`:
/// `(p + p² + p³ + 3p⁴ - 3p⁵ + p⁶) / (2 + p + p² + p³ - p⁴)`.
pub fn u1() -> RationalFn {
    rational_fn(&[0, 1, 1, 1, 3, -3, 1], &[2, 1, 1, 1, -1])
}

/// Known lower bound for `p >= 1/2`:
/// `(p + 5p² - 10p³ + 10p⁴ - 5p⁵ + p⁶) / (4 - 2p - 2p² + 3p³ - p⁴)`.
pub fn u2() -> RationalFn {
    rational_fn(&[0, 1, 5, -10, 10, -5, 1], &[4, -2, -2, 3, -1])
}

/// Value of the order-5 recursive strategy K5 as a function of `p`.
pub fn u3() -> RationalFn {
    rational_fn(
        &[0, 5, -20, 51, -82, 85, -52, 10, 10, -7],
        &[10, -45, 120, -210, 250, -200, 100, -25],
    )
}

/// Probability that both first 5-hat batches are non-monochromatic and K_{5,5}
/// wins on them, recomputed from the strategy table.
pub fn k5_nonmono_poly() -> Poly {
    Preset::K55.recursive().polys().accepted_win
}

/// Solves `V = NM + 2p⁶(1 - p⁵ - q⁵) + (p⁵ + q⁵)²·V` for K5.
pub fn k5_p_rationalfn() -> RationalFn {
    Preset::K55.recursive().value_fn()
}

pub fn k5_p_value(p: &Rat) -> Result<Rat> {
    check_open_unit(p)?;
    k5_p_rationalfn()
        .eval(p)
        .ok_or_else(|| Error::InvalidArgument("denominator vanished".into()))
}

fn check_open_unit(p: &Rat) -> Result<()> {
    if !rat::in_open_unit_interval(p) {
        return Err(Error::ProbabilityOutOfRange(rat::to_fraction_string(p)));
    }
    Ok(())
}

/// Symmetric first-black-hat strategy on infinite stacks:
/// `Σ_m (q^{m-1} p)² = p / (2 - p)`.
pub fn fbh_p_infinite(p: &Rat) -> Result<Rat> {
    check_open_unit(p)?;
    Ok(p / (rat(2, 1) - p))
}

/// Exact win probability of a finite pair under bias `p`.
pub fn finite_p_value(preset: Preset, p: &Rat) -> Result<Rat> {
    let (k1, k2) = preset.pair();
    game::win_prob_biased(&k1, &k2, &BiasedMeasure::new(p.clone())?)
}

fn u3_minus_u1_sign(p: &Rat) -> i8 {
    let d = u3().sub(&u1());
    let v = d.eval(p).expect("denominators positive on (0, 1)");
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Bracket `[lo, hi]` of width at most `tolerance` around the smallest root in
/// `(0, 1/2)` of `U3 - U1`. A coarse scan on multiples of 1/100 locates the
/// first sign change; bisection then runs on exact rational signs.
pub fn crossover(tolerance: &Rat) -> Result<(Rat, Rat)> {
    if !tolerance.is_positive() {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut bracket = None;
    let mut prev = (rat(1, 100), u3_minus_u1_sign(&rat(1, 100)));
    for k in 2..50 {
        let p = rat(k, 100);
        let s = u3_minus_u1_sign(&p);
        if s == 0 {
            return Ok((p.clone(), p));
        }
        if s != prev.1 {
            bracket = Some((prev.0.clone(), p));
            break;
        }
        prev = (p, s);
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::NoSignChange("U3 - U1 keeps its sign on (0, 1/2)".into())
    })?;
    let lo_sign = u3_minus_u1_sign(&lo);
    while &hi - &lo > *tolerance {
        let mid = (&lo + &hi) / rat(2, 1);
        let s = u3_minus_u1_sign(&mid);
        if s == 0 {
            return Ok((mid.clone(), mid));
        }
        if s == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// One row of the bound curves.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub p: Rat,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub k5: f64,
}

/// `U1`, `U2`, `U3` and the K5 value at `p = k/steps` for `0 < k < steps`.
pub fn bound_curves(steps: u32) -> Result<Vec<CurvePoint>> {
    if steps < 2 {
        return Err(Error::InvalidArgument("steps must be at least 2".into()));
    }
    let (f1, f2, f3, k5) = (u1(), u2(), u3(), k5_p_rationalfn());
    let eval = |f: &RationalFn, p: &Rat| rat::to_f64(&f.eval(p).expect("no pole on (0, 1)"));
    Ok((1..steps)
        .map(|k| {
            let p = rat(k as i64, steps as i64);
            CurvePoint {
                u1: eval(&f1, &p),
                u2: eval(&f2, &p),
                u3: eval(&f3, &p),
                k5: eval(&k5, &p),
                p,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn nonmono_polynomial_matches_table() {
        let expected = Poly::from_ints(&[0, 0, 5, -20, 51, -82, 85, -62, 30, -10, 3]);
        assert_eq!(k5_nonmono_poly(), expected);
    }

    #[test]
    fn k5_rational_function_is_u3() {
        assert!(k5_p_rationalfn().equivalent(&u3()));
    }

    #[test]
    fn fixed_point_terms_are_the_closed_forms() {
        let polys = Preset::K55.recursive().polys();
        let p = Poly::x();
        let q = Poly::one_minus_x();
        let mono = &p.pow(5) + &q.pow(5);
        assert_eq!(polys.skip, mono);
        let two_p6 = p.pow(6).scale(&rat(2, 1));
        assert_eq!(polys.cross, &two_p6 * &(&Poly::constant(Rat::one()) - &mono));
    }

    #[test]
    fn values_at_half() {
        assert_eq!(u3().eval(&rat(1, 2)).unwrap(), rat(7, 20));
        assert_eq!(k5_p_value(&rat(1, 2)).unwrap(), rat(7, 20));
        assert_eq!(u2().eval(&rat(1, 1)).unwrap(), rat(1, 1));
    }

    #[test]
    fn u1_vanishes_at_zero() {
        assert_eq!(u1().eval(&Rat::zero()).unwrap(), Rat::zero());
        assert!(u1().eval(&rat(1, 1_000_000)).unwrap() < rat(1, 1000));
    }

    #[test]
    fn sign_checks_around_crossover() {
        assert_eq!(u3_minus_u1_sign(&rat(1, 4)), 1);
        assert_eq!(u3_minus_u1_sign(&rat(2, 5)), -1);
    }

    #[test]
    fn crossover_bracket() {
        let (lo, hi) = crossover(&rat(1, 1_000_000)).unwrap();
        assert!(&hi - &lo <= rat(1, 1_000_000));
        assert!(lo >= rat(311, 1000) && hi <= rat(313, 1000));
        let (lo, _) = crossover(&rat(1, 1_000_000)).unwrap();
        assert!(rat::to_f64(&lo) > 0.312 && rat::to_f64(&lo) < 0.3123);
        assert!(crossover(&Rat::zero()).is_err());
    }

    #[test]
    fn u3_beats_known_bounds_below_crossover_only() {
        let (lo, hi) = crossover(&rat(1, 1_000_000)).unwrap();
        let max12 = |p: &Rat| u1().eval(p).unwrap().max(u2().eval(p).unwrap());
        for k in 1..100 {
            let p = rat(k, 100);
            let u3v = u3().eval(&p).unwrap();
            if p < lo {
                assert!(u3v > max12(&p), "p = {p}");
            } else if p > hi {
                assert!(u3v <= max12(&p), "p = {p}");
            }
        }
    }

    #[test]
    fn bounds_stay_in_range() {
        // All bounds lie in (0, 1); on (0, 1/2] they are at most 1/2.
        for k in 1..200 {
            let p = rat(k, 200);
            for f in [u1(), u2(), u3(), k5_p_rationalfn()] {
                let v = f.eval(&p).unwrap();
                assert!(v.is_positive() && v < Rat::one());
                if p <= rat(1, 2) {
                    assert!(v <= rat(1, 2), "p = {p}");
                }
            }
        }
    }

    #[test]
    fn fbh_infinite_values() {
        assert_eq!(fbh_p_infinite(&rat(1, 2)).unwrap(), rat(1, 3));
        assert_eq!(fbh_p_infinite(&rat(1, 3)).unwrap(), rat(1, 5));
        assert_eq!(fbh_p_infinite(&rat(3, 4)).unwrap(), rat(3, 5));
        assert!(fbh_p_infinite(&rat(99_999, 100_000)).unwrap() > rat(9999, 10000));
        assert!(fbh_p_infinite(&Rat::one()).is_err());
        let mut prev = Rat::zero();
        for k in 1..50 {
            let v = fbh_p_infinite(&rat(k, 50)).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert_eq!(
            crate::recursive::RecursivePair::first_black_hat().value_fn().eval(&rat(1, 3)).unwrap(),
            rat(1, 5)
        );
    }

    #[test]
    fn k5_value_rejects_endpoints() {
        assert!(k5_p_value(&Rat::zero()).is_err());
        assert!(k5_p_value(&rat(3, 2)).is_err());
    }

    #[test]
    fn curves_have_requested_grid() {
        let rows = bound_curves(10).unwrap();
        assert_eq!(rows.len(), 9);
        assert!((rows[4].u3 - 0.35).abs() < 1e-12);
        assert!((rows[4].k5 - 0.35).abs() < 1e-12);
    }
}
