//! The acceptance suite as library functions, shared by the `verify`
//! subcommand and the acceptance tests.

use std::fmt::Write as _;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_traits::Zero;

use crate::continuous::{self, ImaginaryStrategy, McEstimate};
use crate::game::{self, HStrategy};
use crate::poly::Poly;
use crate::presets::{self, Preset};
use crate::pvariant;
use crate::rat::{self, rat, Rat};
use crate::recursive::{self, RecursivePair};
use crate::render::{self, GridSelect, Pixel, RenderStrategy};
use crate::rng;
use crate::search::{self, SearchConfig, SearchResult};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {} {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

/// Collects failed checks with a short note per failure.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn within(&mut self, elapsed: Duration, limit: Duration, what: &str) {
        self.note(format!("{what} {:.2}s", elapsed.as_secs_f64()));
        self.check(elapsed < limit, format!("{what} took {elapsed:?}, limit {limit:?}"));
    }

    fn report(self, id: u32, name: &'static str) -> CriterionReport {
        let mut detail = self.notes.join("; ");
        if !self.failures.is_empty() {
            write!(detail, " | failed: {}", self.failures.join("; ")).expect("String write");
        }
        CriterionReport {
            id,
            name,
            passed: self.failures.is_empty(),
            detail,
        }
    }
}

fn exact(v: &Rat) -> String {
    rat::to_fraction_string(v)
}

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "exact golden values"),
    (2, "brute force"),
    (3, "recursive fixed points"),
    (4, "K_t theory"),
    (5, "bound propagation"),
    (6, "gap lemma"),
    (7, "hill climbing"),
    (8, "p-variant"),
    (9, "continuous game"),
    (10, "equivalence of formulations"),
    (11, "rendering"),
];

pub fn run(id: u32) -> Option<CriterionReport> {
    Some(match id {
        1 => golden_values(),
        2 => brute_force(),
        3 => recursive_fixed_points(),
        4 => kt_theory(),
        5 => bound_propagation(),
        6 => gap_lemma(),
        7 => hill_climbing(),
        8 => p_variant(),
        9 => continuous_game(),
        10 => equivalence(),
        11 => rendering(),
        _ => return None,
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|&(id, _)| run(id)).collect()
}

fn name(id: u32) -> &'static str {
    CRITERIA[id as usize - 1].1
}

pub fn golden_values() -> CriterionReport {
    let mut c = Checks::default();
    let start = Instant::now();
    let expected = [
        (Preset::Fbh3, rat(21, 64)),
        (Preset::K33, rat(22, 64)),
        (Preset::K55, rat(358, 1024)),
        (Preset::K5NonSymmetric, rat(358, 1024)),
    ];
    for (preset, want) in expected {
        let (k1, k2) = preset.pair();
        match game::win_prob(&k1, &k2) {
            Ok(v) => {
                c.note(format!("{} = {}", preset.name(), exact(&v)));
                c.check(v == want, format!("{} expected {}", preset.name(), exact(&want)));
            }
            Err(e) => c.check(false, format!("{}: {e}", preset.name())),
        }
    }
    c.within(start.elapsed(), Duration::from_secs(1), "time");
    c.report(1, name(1))
}

/// Value of every pair at height 2 by direct enumeration.
fn exhaustive_h2() -> Rat {
    let tables: Vec<HStrategy> = (0..16u32)
        .map(|code| {
            let t: Vec<u8> = (0..4).map(|p| ((code >> p) & 1) as u8 + 1).collect();
            HStrategy::new(2, t).expect("valid table")
        })
        .collect();
    let mut best = Rat::zero();
    for k1 in &tables {
        for k2 in &tables {
            best = best.max(game::win_prob(k1, k2).expect("same height"));
        }
    }
    best
}

pub fn brute_force() -> CriterionReport {
    let mut c = Checks::default();
    let start = Instant::now();
    match search::brute_force_optimal(3) {
        Ok(r) => {
            c.note(format!("h=3: {}", exact(&r.best_value)));
            c.check(r.best_value == rat(22, 64), "h=3 optimum is not 22/64");
            let (k1, k2) = &r.best_pair;
            c.check(
                game::win_prob(k1, k2).ok() == Some(r.best_value.clone()),
                "h=3 witness does not achieve the reported value",
            );
        }
        Err(e) => c.check(false, format!("h=3: {e}")),
    }
    c.within(start.elapsed(), Duration::from_secs(60), "h=3");
    match search::brute_force_optimal(1) {
        Ok(r) => c.check(r.best_value == rat(1, 4), "h=1 optimum is not 1/4"),
        Err(e) => c.check(false, format!("h=1: {e}")),
    }
    match search::brute_force_optimal(2) {
        Ok(r) => {
            let oracle = exhaustive_h2();
            c.note(format!("h=2: {} (oracle {})", exact(&r.best_value), exact(&oracle)));
            c.check(r.best_value == oracle, "h=2 disagrees with the 16x16 enumeration");
        }
        Err(e) => c.check(false, format!("h=2: {e}")),
    }
    c.report(2, name(2))
}

pub fn recursive_fixed_points() -> CriterionReport {
    let mut c = Checks::default();
    for preset in [Preset::K33, Preset::K55, Preset::K5NonSymmetric] {
        let rp = preset.recursive();
        let v = recursive::recursive_value(&rp);
        c.note(format!("{} -> {}", preset.name(), exact(&v)));
        c.check(v == rat(7, 20), format!("{} value is not 7/20", preset.name()));
        match recursive::finite_decomposition_check(&rp) {
            Ok(ok) => c.check(ok, format!("{} decomposition mismatch", preset.name())),
            Err(e) => c.check(false, format!("{}: {e}", preset.name())),
        }
    }
    let k3 = recursive::recursive_coefficients(&Preset::K33.recursive());
    c.check(
        (k3.a.clone(), k3.b.clone()) == (rat(1, 16), rat(21, 64)),
        format!("K3 coefficients ({}, {})", exact(&k3.a), exact(&k3.b)),
    );
    let k5 = recursive::recursive_coefficients(&Preset::K55.recursive());
    c.check(
        (k5.a.clone(), k5.b.clone()) == (rat(1, 256), rat(357, 1024)),
        format!("K5 coefficients ({}, {})", exact(&k5.a), exact(&k5.b)),
    );
    let closed = rat(358 - 1, 31 * 31 + 2 * 31 - 3);
    c.check(closed == rat(7, 20), "closed form is not 7/20");
    c.note("coefficients (1/16, 21/64) and (1/256, 357/1024)");
    c.report(3, name(3))
}

pub fn kt_theory() -> CriterionReport {
    let mut c = Checks::default();
    for (t, want) in [(3, rat(22, 64)), (5, rat(358, 1024))] {
        match recursive::required_base_prob(t) {
            Ok(v) => c.check(v == want, format!("required_base_prob({t}) = {}", exact(&v))),
            Err(e) => c.check(false, format!("t={t}: {e}")),
        }
    }
    let mut mismatches = Vec::new();
    for t in 3..=100 {
        if recursive::kt_parity_feasible(t).ok() != Some(t % 2 == 1) {
            mismatches.push(t);
        }
    }
    c.check(mismatches.is_empty(), format!("parity wrong at t = {mismatches:?}"));
    c.note("required 22/64, 358/1024; feasible iff t odd on 3..=100");
    c.report(4, name(4))
}

/// Base bounds of the acceptance suite: brute force for `h <= 3` and the
/// two hill-climbing values as exact dyadics.
pub fn acceptance_base() -> std::collections::BTreeMap<u32, Rat> {
    recursive::known_base()
}

pub fn bound_propagation() -> CriterionReport {
    let mut c = Checks::default();
    let table = match recursive::propagate_lower_bounds(
        &acceptance_base(),
        &recursive::standard_recurrences(),
        13,
    ) {
        Ok(t) => t,
        Err(e) => {
            c.check(false, e.to_string());
            return c.report(5, name(5));
        }
    };
    for (h, v) in recursive::known_improved_table() {
        let got = &table[&h].value;
        c.check(got >= &v, format!("h={h}: {} below table value", exact(got)));
    }
    let h10 = &table[&10].value;
    c.note(format!("h=10: {} ({})", exact(h10), rat::to_f64(h10)));
    c.check(
        *h10 == rat::parse("0.34999847412109375").expect("literal"),
        "h=10 is not 0.34999847412109375",
    );
    c.note(format!("h=13: {}", rat::to_f64(&table[&13].value)));
    c.report(5, name(5))
}

type ClimbRun = (u32, std::result::Result<(SearchResult, Duration), String>);

/// The acceptance hill climbs at `h = 4` and `h = 5`, run once per process.
pub fn hill_climb_runs() -> &'static [ClimbRun] {
    static RUNS: OnceLock<Vec<ClimbRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        [(4, rat(1424, 4096)), (5, rat(358, 1024))]
            .into_iter()
            .map(|(h, target)| {
                let mut config = SearchConfig::new(h, HILL_CLIMB_RESTARTS, rng::DEFAULT_SEED);
                config.target = Some(target);
                let start = Instant::now();
                let result = search::hill_climb(&config)
                    .map(|r| (r, start.elapsed()))
                    .map_err(|e| e.to_string());
                (h, result)
            })
            .collect()
    })
}

/// Restart budget of the acceptance hill climb.
pub const HILL_CLIMB_RESTARTS: u32 = 200;

/// Every strategy value computed by the suite, with the height it lives at.
pub fn suite_values() -> Vec<(u32, Rat)> {
    let mut values = Vec::new();
    for preset in Preset::ALL {
        let (k1, k2) = preset.pair();
        values.push((k1.h(), game::win_prob(&k1, &k2).expect("preset")));
    }
    for h in 1..=3 {
        values.push((h, search::brute_force_optimal(h).expect("small h").best_value));
    }
    for (h, run) in hill_climb_runs() {
        if let Ok((r, _)) = run {
            values.push((*h, r.best_value.clone()));
        }
    }
    let table = recursive::propagate_lower_bounds(
        &acceptance_base(),
        &recursive::standard_recurrences(),
        13,
    )
    .expect("base has h = 1");
    values.extend(table.into_iter().map(|(h, e)| (h, e.value)));
    for h in 1..=12 {
        let (k1, k2) = presets::fbh_pair(h);
        values.push((h, game::win_prob(&k1, &k2).expect("same height")));
    }
    values
}

pub fn gap_lemma() -> CriterionReport {
    let mut c = Checks::default();
    let values = suite_values();
    for (h, v) in &values {
        match recursive::gap_lemma_check(v, *h) {
            Ok(ok) => c.check(ok, format!("h={h}: {} too close to 7/20", exact(v))),
            Err(e) => c.check(false, format!("h={h}: {e}")),
        }
    }
    c.note(format!("{} values checked", values.len()));
    c.report(6, name(6))
}

pub fn hill_climbing() -> CriterionReport {
    let mut c = Checks::default();
    let targets = [(4, rat(1424, 4096)), (5, rat(358, 1024))];
    let mut total = Duration::ZERO;
    for ((h, run), (_, target)) in hill_climb_runs().iter().zip(targets) {
        match run {
            Ok((r, elapsed)) => {
                total += *elapsed;
                c.note(format!(
                    "h={h}: {} after {} restarts",
                    exact(&r.best_value),
                    r.restarts_used
                ));
                c.check(r.best_value >= target, format!("h={h} below {}", exact(&target)));
                let (k1, k2) = &r.best_pair;
                c.check(
                    game::win_prob(k1, k2).ok() == Some(r.best_value.clone()),
                    format!("h={h} witness disagrees with its value"),
                );
            }
            Err(e) => c.check(false, format!("h={h}: {e}")),
        }
    }
    c.note(format!("seed {}", rng::DEFAULT_SEED));
    c.within(total, Duration::from_secs(300), "time");
    c.report(7, name(7))
}

pub fn p_variant() -> CriterionReport {
    let mut c = Checks::default();
    let nm = Poly::from_ints(&[0, 0, 5, -20, 51, -82, 85, -62, 30, -10, 3]);
    c.check(pvariant::k5_nonmono_poly() == nm, "NM polynomial differs");
    c.check(pvariant::k5_p_rationalfn().equivalent(&pvariant::u3()), "K5 value is not U3");
    c.check(
        pvariant::u3().eval(&rat(1, 2)) == Some(rat(7, 20)),
        "U3(1/2) is not 7/20",
    );
    match pvariant::crossover(&rat(1, 1_000_000)) {
        Ok((lo, hi)) => {
            c.note(format!("crossover in [{:.7}, {:.7}]", rat::to_f64(&lo), rat::to_f64(&hi)));
            c.check(&hi - &lo <= rat(1, 1_000_000), "bracket wider than 1e-6");
            c.check(
                hi >= rat(311, 1000) && lo <= rat(313, 1000),
                "bracket misses [0.311, 0.313]",
            );
        }
        Err(e) => c.check(false, e.to_string()),
    }
    c.note("NM and U3 identities exact");
    c.report(8, name(8))
}

fn mc(strategies: &[ImaginaryStrategy], samples: u64, seed: u64) -> McEstimate {
    continuous::mc_win_estimate(strategies, strategies.len(), samples, seed)
        .expect("valid Monte Carlo arguments")
}

pub fn continuous_game() -> CriterionReport {
    let mut c = Checks::default();
    for (m, want, tol) in [(4, 0.28, 0.005), (20, 0.44, 0.005), (1000, 0.497, 0.002)] {
        match continuous::p_m(m) {
            Ok(v) => {
                c.note(format!("p_{m} = {v:.5}"));
                c.check((v - want).abs() <= tol, format!("p_{m} outside {want} ± {tol}"));
            }
            Err(e) => c.check(false, e.to_string()),
        }
    }
    let fbh = ImaginaryStrategy::FirstBlackHat;
    let r = mc(&[fbh.clone(), fbh], 1_000_000, rng::DEFAULT_SEED);
    c.note(format!("MC(FBH) = {:.5} ± {:.5}", r.estimate, r.stderr));
    c.check(
        (r.estimate - 1.0 / 3.0).abs() <= 3.0 * r.stderr,
        "FBH estimate beyond 3 stderr of 1/3",
    );
    match continuous::fbh_best_response_profile(12, &continuous::power_of_two_grid(12)) {
        Ok(p) => {
            c.note(format!("profile {:.9}", p.aggregate));
            c.check((p.aggregate - 1.0 / 3.0).abs() < 1e-6, "profile aggregate off 1/3");
        }
        Err(e) => c.check(false, e.to_string()),
    }
    let mut rng = rng::stream(rng::DEFAULT_SEED, 1 << 32);
    let above = (0..10_000)
        .map(|_| rand::Rng::random::<f64>(&mut rng) * 1000.0)
        .filter(|&a| continuous::black_prob_1d(a) > 0.5)
        .count();
    c.check(above == 0, format!("black_prob_1d above 1/2 at {above} samples"));
    for n in [2usize, 3] {
        let est: Vec<McEstimate> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&m| mc(&vec![ImaginaryStrategy::ProductScaled { m }; n], 1_000_000, rng::DEFAULT_SEED))
            .collect();
        c.note(format!(
            "W_{n}: {:.4} {:.4} {:.4}",
            est[0].estimate, est[1].estimate, est[2].estimate
        ));
        c.check(
            est.windows(2).all(|w| w[0].estimate < w[1].estimate),
            format!("n={n} estimates not increasing"),
        );
        c.check(
            est.iter().all(|e| e.estimate <= 0.5 + 3.0 * e.stderr),
            format!("n={n} estimate above 1/2"),
        );
    }
    c.report(9, name(9))
}

pub fn equivalence() -> CriterionReport {
    let mut c = Checks::default();
    for preset in Preset::ALL {
        let (k1, k2) = preset.pair();
        for depth in [k1.h(), k1.h() + 3] {
            match game::embed_check(&k1, &k2, depth) {
                Ok(ok) => c.check(ok, format!("{} embedding fails at depth {depth}", preset.name())),
                Err(e) => c.check(false, format!("{}: {e}", preset.name())),
            }
        }
    }
    let mut rng = rng::stream(rng::DEFAULT_SEED, 1 << 33);
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        let k1 = search::random_strategy(4, &mut rng);
        let k2 = search::random_strategy(4, &mut rng);
        let exact_v = rat::to_f64(&game::win_prob(&k1, &k2).expect("same height"));
        let s = [ImaginaryStrategy::PowerOfTwo(k1), ImaginaryStrategy::PowerOfTwo(k2)];
        let r = mc(&s, 1_000_000, rng::DEFAULT_SEED + i);
        let z = (r.estimate - exact_v).abs() / r.stderr.max(f64::MIN_POSITIVE);
        worst = worst.max(z);
        c.check(z <= 4.0, format!("pair {i}: {:.5} vs exact {exact_v:.5}", r.estimate));
    }
    c.note(format!("embeddings at depth h and h+3; worst MC deviation {worst:.2} stderr"));
    c.report(10, name(10))
}

/// Golden finite renders: `(preset, tile_px, file name)`.
pub fn golden_specs() -> Vec<(Preset, usize, String)> {
    Preset::ALL
        .iter()
        .map(|&p| {
            let side = (1usize << p.pair().0.h()) * GOLDEN_TILE_PX;
            (p, GOLDEN_TILE_PX, render::output_name(p.name(), "delta", side, "ppm"))
        })
        .collect()
}

pub const GOLDEN_TILE_PX: usize = 4;

fn golden_bytes(preset: Preset) -> &'static [u8] {
    match preset {
        Preset::Fbh3 => include_bytes!("../golden/fbh3_delta_32.ppm"),
        Preset::K33 => include_bytes!("../golden/k33_delta_32.ppm"),
        Preset::K55 => include_bytes!("../golden/k55_delta_128.ppm"),
        Preset::K5NonSymmetric => include_bytes!("../golden/k5ns_delta_128.ppm"),
    }
}

pub fn rendering() -> CriterionReport {
    let mut c = Checks::default();
    for (preset, tile, file) in golden_specs() {
        let (k1, k2) = preset.pair();
        let raster = match render::render_finite(&k1, &k2, GridSelect::Delta, tile) {
            Ok(r) => r,
            Err(e) => {
                c.check(false, format!("{}: {e}", preset.name()));
                continue;
            }
        };
        let tiles = raster.count(Pixel::Black) / (tile * tile);
        let v = game::win_prob(&k1, &k2).expect("preset");
        c.check(
            rat::over_four_pow(tiles as u64, k1.h()) == v,
            format!("{} black tiles {tiles}", preset.name()),
        );
        c.check(raster.to_ppm() == golden_bytes(preset), format!("{file} differs from golden"));
    }
    match render::render_recursive(&Preset::K55.recursive(), 4, 1024) {
        Ok(r) => {
            let f = r.black_fraction();
            c.note(format!("K5 area {f:.4}"));
            c.check((f - 0.35).abs() <= 0.01, "K5 render area off 0.35");
        }
        Err(e) => c.check(false, e.to_string()),
    }
    let fbh = RenderStrategy::Recursive(RecursivePair::first_black_hat());
    match render::render_biased(&fbh, &rat(3, 4), 512, 40) {
        Ok(r) => {
            let f = r.black_fraction();
            c.note(format!("biased FBH area {f:.4}"));
            c.check((f - 0.6).abs() <= 0.01, "biased FBH area off 3/5");
        }
        Err(e) => c.check(false, e.to_string()),
    }
    c.report(11, name(11))
}

/// Writes the golden finite renders into `dir`.
pub fn write_golden(dir: &std::path::Path) -> crate::error::Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (preset, tile, file) in golden_specs() {
        let (k1, k2) = preset.pair();
        render::render_finite(&k1, &k2, GridSelect::Delta, tile)?.write_ppm(&dir.join(&file))?;
        written.push(file);
    }
    Ok(written)
}
