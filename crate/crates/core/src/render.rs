//! Bitmap renderings of strategies.
//!
//! The unit square holds the pair of stacks: column `x` is A's stack and
//! row `y` is B's stack, with row 0 at the bottom. A pixel is black when both
//! players win on the stacks at its midpoint.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::continuous::{eps, ImaginaryStrategy};
use crate::error::{Error, Result};
use crate::game::{self, DeltaGrid, HStrategy, Player};
use crate::rat::{self, Rat};
use crate::recursive::RecursivePair;

/// Largest side length accepted by any render.
pub const MAX_SIDE: usize = 1 << 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pixel {
    White,
    Black,
    /// Not decided within the recursion depth.
    Gray,
}

impl Pixel {
    fn rgb(self) -> [u8; 3] {
        match self {
            Pixel::White => [255; 3],
            Pixel::Black => [0; 3],
            Pixel::Gray => [128; 3],
        }
    }

    fn from_win(win: bool) -> Self {
        if win {
            Pixel::Black
        } else {
            Pixel::White
        }
    }
}

/// Square image; `pixels[y * side + x]` with `y = 0` the bottom row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    side: usize,
    pixels: Vec<Pixel>,
}

impl Raster {
    fn from_fn<F>(side: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Pixel + Sync,
    {
        let mut pixels = vec![Pixel::White; side * side];
        pixels.par_chunks_mut(side).enumerate().for_each(|(y, row)| {
            for (x, px) in row.iter_mut().enumerate() {
                *px = f(x, y);
            }
        });
        Raster { side, pixels }
    }

    pub fn width(&self) -> usize {
        self.side
    }

    pub fn height(&self) -> usize {
        self.side
    }

    pub fn get(&self, x: usize, y: usize) -> Pixel {
        self.pixels[y * self.side + x]
    }

    pub fn count(&self, pixel: Pixel) -> usize {
        self.pixels.iter().filter(|&&p| p == pixel).count()
    }

    /// Black pixels over resolved (non-gray) pixels; 0 when nothing resolved.
    pub fn black_fraction(&self) -> f64 {
        let black = self.count(Pixel::Black);
        let resolved = black + self.count(Pixel::White);
        if resolved == 0 {
            0.0
        } else {
            black as f64 / resolved as f64
        }
    }

    /// Binary PPM (P6, maxval 255), top row first.
    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.side, self.side);
        let mut out = Vec::with_capacity(header.len() + 3 * self.pixels.len());
        out.extend_from_slice(header.as_bytes());
        for y in (0..self.side).rev() {
            for x in 0..self.side {
                out.extend_from_slice(&self.get(x, y).rgb());
            }
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ppm())?;
        Ok(())
    }
}

/// Which outcome grid to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridSelect {
    DeltaA,
    DeltaB,
    Delta,
}

impl GridSelect {
    pub fn name(self) -> &'static str {
        match self {
            GridSelect::DeltaA => "deltaA",
            GridSelect::DeltaB => "deltaB",
            GridSelect::Delta => "delta",
        }
    }
}

impl FromStr for GridSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "deltaa" | "a" => Ok(GridSelect::DeltaA),
            "deltab" | "b" => Ok(GridSelect::DeltaB),
            "delta" | "joint" => Ok(GridSelect::Delta),
            _ => Err(Error::InvalidArgument(format!("unknown grid {s:?}"))),
        }
    }
}

fn selected_grid(k1: &HStrategy, k2: &HStrategy, which: GridSelect) -> Result<DeltaGrid> {
    let grids = game::delta_grids(k1, k2)?;
    Ok(match which {
        GridSelect::DeltaA => grids.a,
        GridSelect::DeltaB => grids.b,
        GridSelect::Delta => grids.joint,
    })
}

fn check_side(side: usize) -> Result<()> {
    if side > MAX_SIDE {
        return Err(Error::InvalidArgument(format!(
            "image side {side} exceeds {MAX_SIDE}"
        )));
    }
    Ok(())
}

fn resolution_bits(resolution: usize) -> Result<u32> {
    if resolution < 2 || !resolution.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "resolution must be a power of two >= 2, got {resolution}"
        )));
    }
    check_side(resolution)?;
    Ok(resolution.trailing_zeros())
}

/// Tile `(i, j)` of the chosen grid drawn as a `tile_px` square.
pub fn render_finite(
    k1: &HStrategy,
    k2: &HStrategy,
    which: GridSelect,
    tile_px: usize,
) -> Result<Raster> {
    if tile_px < 1 {
        return Err(Error::InvalidArgument("tile_px must be at least 1".into()));
    }
    let grid = selected_grid(k1, k2, which)?;
    let side = grid.side() * tile_px;
    check_side(side)?;
    Ok(Raster::from_fn(side, |x, y| {
        Pixel::from_win(grid.get(x / tile_px, y / tile_px))
    }))
}

/// SVG of the chosen grid, one rectangle per black tile.
pub fn finite_svg(
    k1: &HStrategy,
    k2: &HStrategy,
    which: GridSelect,
    tile_px: usize,
) -> Result<String> {
    if tile_px < 1 {
        return Err(Error::InvalidArgument("tile_px must be at least 1".into()));
    }
    let grid = selected_grid(k1, k2, which)?;
    let n = grid.side();
    let side = n * tile_px;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{side}\" height=\"{side}\" viewBox=\"0 0 {side} {side}\">\n\
         <rect width=\"{side}\" height=\"{side}\" fill=\"white\"/>\n"
    );
    for row in 0..n {
        for col in 0..n {
            if grid.get(col, row) {
                let top = (n - 1 - row) * tile_px;
                let left = col * tile_px;
                writeln!(
                    svg,
                    "<rect x=\"{left}\" y=\"{top}\" width=\"{tile_px}\" height=\"{tile_px}\" fill=\"black\"/>"
                )
                .expect("writing to a String");
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// The first `len` binary digits of the midpoint `(q + 1/2) / 2^bits`.
fn midpoint_bits(q: usize, bits: u32, len: usize) -> Vec<bool> {
    (1..=len)
        .map(|k| match (k as u32).cmp(&(bits + 1)) {
            std::cmp::Ordering::Less => (q >> (bits - k as u32)) & 1 == 1,
            std::cmp::Ordering::Equal => true,
            std::cmp::Ordering::Greater => false,
        })
        .collect()
}

fn recursive_pixel(rp: &RecursivePair, xs: &[bool], ys: &[bool]) -> Pixel {
    match (rp.choice(Player::A, ys), rp.choice(Player::B, xs)) {
        (Some(ka), Some(kb)) => Pixel::from_win(xs[ka as usize - 1] && ys[kb as usize - 1]),
        _ => Pixel::Gray,
    }
}

/// A recursive pair drawn at pixel midpoints, reading `t·depth` digits of
/// each coordinate. Pixels where a player skips every batch read are gray.
pub fn render_recursive(rp: &RecursivePair, depth: u32, resolution: usize) -> Result<Raster> {
    let bits = resolution_bits(resolution)?;
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let len = (rp.t() * depth) as usize;
    let expansions: Vec<Vec<bool>> = (0..resolution).map(|q| midpoint_bits(q, bits, len)).collect();
    Ok(Raster::from_fn(resolution, |x, y| {
        recursive_pixel(rp, &expansions[x], &expansions[y])
    }))
}

/// Strategies drawable under a biased measure.
#[derive(Clone, Debug, PartialEq)]
pub enum RenderStrategy {
    Finite(HStrategy, HStrategy),
    Recursive(RecursivePair),
}

/// Digits of the stack whose biased measure puts it at `u`: a white hat
/// takes the lower `1 - p` share of the current interval.
fn biased_bits(mut u: f64, p: f64, len: usize) -> Vec<bool> {
    let q = 1.0 - p;
    (0..len)
        .map(|_| {
            if u < q {
                u /= q;
                false
            } else {
                u = (u - q) / p;
                true
            }
        })
        .collect()
}

/// Like [`render_recursive`] (or a finite grid) with each coordinate decoded
/// through the `p`-biased splitting, so black area approximates the biased
/// win probability. For a recursive pair `depth` batches are decoded.
pub fn render_biased(
    strategy: &RenderStrategy,
    p: &Rat,
    resolution: usize,
    depth: u32,
) -> Result<Raster> {
    if !rat::in_open_unit_interval(p) {
        return Err(Error::ProbabilityOutOfRange(rat::to_fraction_string(p)));
    }
    resolution_bits(resolution)?;
    let pf = rat::to_f64(p);
    let len = match strategy {
        RenderStrategy::Finite(k1, _) => k1.h() as usize,
        RenderStrategy::Recursive(rp) => {
            if depth < 1 {
                return Err(Error::InvalidArgument("depth must be at least 1".into()));
            }
            (rp.t() * depth) as usize
        }
    };
    if let RenderStrategy::Finite(k1, k2) = strategy {
        if k1.h() != k2.h() {
            return Err(Error::HeightMismatch(k1.h(), k2.h()));
        }
    }
    let expansions: Vec<Vec<bool>> = (0..resolution)
        .map(|q| biased_bits((q as f64 + 0.5) / resolution as f64, pf, len))
        .collect();
    Ok(Raster::from_fn(resolution, |x, y| {
        let (xs, ys) = (&expansions[x], &expansions[y]);
        match strategy {
            RenderStrategy::Recursive(rp) => recursive_pixel(rp, xs, ys),
            RenderStrategy::Finite(k1, k2) => {
                let word = |bits: &[bool]| bits.iter().fold(0usize, |w, &b| (w << 1) | b as usize);
                let ka = k1.choice(word(ys)) as usize;
                let kb = k2.choice(word(xs)) as usize;
                Pixel::from_win(xs[ka - 1] && ys[kb - 1])
            }
        }
    }))
}

/// Pixel `(x, y)` is black iff `ε(f1(y)·x) = ε(f2(x)·y) = 1` at its midpoint.
pub fn render_continuous(
    f1: &ImaginaryStrategy,
    f2: &ImaginaryStrategy,
    resolution: usize,
) -> Result<Raster> {
    if resolution < 1 {
        return Err(Error::InvalidArgument("resolution must be at least 1".into()));
    }
    check_side(resolution)?;
    let mid = |q: usize| (q as f64 + 0.5) / resolution as f64;
    Ok(Raster::from_fn(resolution, |x, y| {
        let (xv, yv) = (mid(x), mid(y));
        Pixel::from_win(eps(f1.eval(&[yv]) * xv) == 1 && eps(f2.eval(&[xv]) * yv) == 1)
    }))
}

/// `<strategy>_<variant>_<resolution>.<ext>`.
pub fn output_name(strategy: &str, variant: &str, resolution: usize, ext: &str) -> String {
    format!("{strategy}_{variant}_{resolution}.{ext}")
}
