//! Basin-of-attraction rasters of the map over a window of the complex plane.
//!
//! Each pixel is classified at its center. Red shades mark convergence to
//! `|+⟩ₓ` (`z = 1`), blue shades to `|−⟩ₓ` (`z = −1`), and the shade lightens
//! linearly with the number of iterations needed. Pixels that never converge,
//! the Julia set on the imaginary axis, are white.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{classify, Classification, Tag};
use crate::point::ProjectivePoint;

pub const DEFAULT_RESOLUTION: usize = 1000;
pub const DEFAULT_MAX_ITER: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Fraction of the way to white reached at `max_iter`, so that slow pixels
/// keep their hue.
const MAX_LIGHTNESS: f64 = 0.85;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub width: usize,
    pub height: usize,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, width: usize, height: usize) -> Result<Self> {
        let w = Self {
            re_min,
            re_max,
            im_min,
            im_max,
            width,
            height,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|x| x.is_finite());
        if !finite || self.re_min >= self.re_max || self.im_min >= self.im_max {
            return Err(Error::InvalidWindow(format!(
                "need re_min < re_max and im_min < im_max, got [{}, {}] x [{}, {}]",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidWindow(format!(
                "resolution must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    /// Center of pixel `(row, col)`. Row 0 is the top edge (`im_max`).
    pub fn pixel_center(&self, row: usize, col: usize) -> Complex64 {
        // Weighted form keeps mirrored pixels of a symmetric window exact
        // negatives of each other, and the middle pixel exactly on the axis.
        let (w, h) = (self.width as f64, self.height as f64);
        let (c, r) = (col as f64 + 0.5, row as f64 + 0.5);
        Complex64::new(
            (self.re_min * (w - c) + self.re_max * c) / w,
            (self.im_max * (h - r) + self.im_min * r) / h,
        )
    }
}

impl Default for Window {
    fn default() -> Self {
        Self {
            re_min: -2.0,
            re_max: 2.0,
            im_min: -2.0,
            im_max: 2.0,
            width: DEFAULT_RESOLUTION,
            height: DEFAULT_RESOLUTION,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinRaster {
    pub window: Window,
    pub max_iter: usize,
    /// Row-major, `width × height`.
    pub cells: Vec<Classification>,
}

impl BasinRaster {
    pub fn cell(&self, row: usize, col: usize) -> Classification {
        self.cells[row * self.window.width + col]
    }
}

/// Renders on the global rayon pool.
pub fn render_basin(window: &Window, tol: f64, max_iter: usize) -> Result<BasinRaster> {
    check_params(window, tol, max_iter)?;
    let mut cells = vec![
        Classification {
            tag: Tag::NonConvergent,
            iterations: 0
        };
        window.width * window.height
    ];
    cells
        .par_chunks_mut(window.width)
        .enumerate()
        .for_each(|(row, out)| render_row(window, tol, max_iter, row, out));
    Ok(BasinRaster {
        window: *window,
        max_iter,
        cells,
    })
}

/// Renders on a dedicated pool of `workers` threads.
pub fn render_basin_with_workers(window: &Window, tol: f64, max_iter: usize, workers: usize) -> Result<BasinRaster> {
    check_params(window, tol, max_iter)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| render_basin(window, tol, max_iter))
}

fn check_params(window: &Window, tol: f64, max_iter: usize) -> Result<()> {
    window.validate()?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    Ok(())
}

fn render_row(window: &Window, tol: f64, max_iter: usize, row: usize, out: &mut [Classification]) {
    for (col, cell) in out.iter_mut().enumerate() {
        let z = window.pixel_center(row, col);
        *cell = classify(&ProjectivePoint::from_z(z), tol, max_iter);
    }
}

pub fn pixel_color(c: &Classification, max_iter: usize) -> [u8; 3] {
    let light = (MAX_LIGHTNESS * 255.0 * c.iterations as f64 / max_iter as f64).round() as u8;
    match c.tag {
        Tag::PlusX => [255, light, light],
        Tag::MinusX => [light, light, 255],
        Tag::NonConvergent => [255, 255, 255],
    }
}

/// Inverse of [`pixel_color`] up to the iteration count.
pub fn tag_of_color([r, _, b]: [u8; 3]) -> Tag {
    if r == b {
        Tag::NonConvergent
    } else if r > b {
        Tag::PlusX
    } else {
        Tag::MinusX
    }
}

/// Writes a binary PPM (`P6`, maxval 255).
pub fn write_ppm(raster: &BasinRaster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut buf = Vec::with_capacity(raster.cells.len() * 3 + 32);
    write!(buf, "P6\n{} {}\n255\n", raster.window.width, raster.window.height).expect("write to Vec");
    for c in &raster.cells {
        buf.extend_from_slice(&pixel_color(c, raster.max_iter));
    }
    w.write_all(&buf).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

/// Reads a `P6` file with maxval 255, as produced by [`write_ppm`].
pub fn read_ppm(path: impl AsRef<Path>) -> Result<PpmImage> {
    let path = path.as_ref();
    let bad = |detail: String| Error::Format {
        kind: "PPM",
        path: path.to_path_buf(),
        detail,
    };
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;

    // Header: magic, width, height, maxval, separated by whitespace, then a
    // single whitespace byte before the raster.
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P6" {
        return Err(bad(format!("expected magic P6, found {}", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad header field `{s}`")));
    let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return Err(bad(format!("unsupported maxval {maxval}")));
    }
    let body = bytes.get(pos..).unwrap_or_default();
    if body.len() != width * height * 3 {
        return Err(bad(format!("expected {} raster bytes, found {}", width * height * 3, body.len())));
    }
    let pixels = body.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
    Ok(PpmImage { width, height, pixels })
}

fn tag_name(tag: Tag) -> &'static str {
    match tag {
        Tag::PlusX => "plus_x",
        Tag::MinusX => "minus_x",
        Tag::NonConvergent => "julia",
    }
}

fn parse_tag(s: &str) -> Option<Tag> {
    match s {
        "plus_x" => Some(Tag::PlusX),
        "minus_x" => Some(Tag::MinusX),
        "julia" => Some(Tag::NonConvergent),
        _ => None,
    }
}

/// Writes `re,im,class,iterations`, one row per pixel in row-major order.
pub fn write_csv(raster: &BasinRaster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "re,im,class,iterations").map_err(io)?;
    let width = raster.window.width;
    for (i, c) in raster.cells.iter().enumerate() {
        let z = raster.window.pixel_center(i / width, i % width);
        writeln!(w, "{:?},{:?},{},{}", z.re, z.im, tag_name(c.tag), c.iterations).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a CSV written by [`write_csv`] for the given window, checking that
/// every row sits on the expected pixel center.
pub fn read_csv(path: impl AsRef<Path>, window: &Window, max_iter: usize) -> Result<BasinRaster> {
    let path = path.as_ref();
    let bad = |detail: String| Error::Format {
        kind: "CSV",
        path: path.to_path_buf(),
        detail,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h == "re,im,class,iterations" => {}
        Some(Err(e)) => return Err(Error::io(path, e)),
        _ => return Err(bad("missing header".into())),
    }
    let mut cells = Vec::with_capacity(window.width * window.height);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parts: Vec<&str> = line.split(',').collect();
        let [re, im, class, iters] = parts[..] else {
            return Err(bad(format!("row {} has {} fields", i + 1, parts.len())));
        };
        let re: f64 = re.parse().map_err(|_| bad(format!("row {}: bad re `{re}`", i + 1)))?;
        let im: f64 = im.parse().map_err(|_| bad(format!("row {}: bad im `{im}`", i + 1)))?;
        let tag = parse_tag(class).ok_or_else(|| bad(format!("row {}: unknown class `{class}`", i + 1)))?;
        let iterations = iters
            .parse()
            .map_err(|_| bad(format!("row {}: bad iteration count `{iters}`", i + 1)))?;
        if i >= window.width * window.height {
            return Err(bad("more rows than pixels".into()));
        }
        let center = window.pixel_center(i / window.width, i % window.width);
        if center.re != re || center.im != im {
            return Err(bad(format!("row {} at ({re}, {im}) is off the pixel grid", i + 1)));
        }
        cells.push(Classification { tag, iterations });
    }
    if cells.len() != window.width * window.height {
        return Err(bad(format!("expected {} rows, found {}", window.width * window.height, cells.len())));
    }
    Ok(BasinRaster {
        window: *window,
        max_iter,
        cells,
    })
}
