use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imageproc::GrayImage;

/// Cell sizes (texels) and weights of the value-noise octaves.
const NOISE_OCTAVES: [(f64, f64); 4] = [(64.0, 0.35), (24.0, 0.3), (9.0, 0.2), (4.0, 0.15)];

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

struct ValueNoise {
    cell: f64,
    cols: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(width: usize, height: usize, cell: f64, rng: &mut ChaCha8Rng) -> Self {
        let cols = (width as f64 / cell).ceil() as usize + 2;
        let rows = (height as f64 / cell).ceil() as usize + 2;
        Self {
            cell,
            cols,
            lattice: (0..cols * rows).map(|_| rng.random::<f64>()).collect(),
        }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let (gx, gy) = (x / self.cell, y / self.cell);
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        let (tx, ty) = (smoothstep(gx.fract()), smoothstep(gy.fract()));
        let v = |i: usize, j: usize| self.lattice[j * self.cols + i];
        let top = v(ix, iy) * (1.0 - tx) + v(ix + 1, iy) * tx;
        let bottom = v(ix, iy + 1) * (1.0 - tx) + v(ix + 1, iy + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

enum Shape {
    Rect {
        cx: f64,
        cy: f64,
        hw: f64,
        hh: f64,
        cos: f64,
        sin: f64,
    },
    Disc {
        cx: f64,
        cy: f64,
        r: f64,
    },
    Triangle {
        p: [(f64, f64); 3],
    },
}

impl Shape {
    fn random(width: usize, height: usize, rng: &mut ChaCha8Rng) -> Self {
        let cx = rng.random_range(0.0..width as f64);
        let cy = rng.random_range(0.0..height as f64);
        let size = rng.random_range(3.0..22.0);
        match rng.random_range(0..3) {
            0 => {
                let a: f64 = rng.random_range(0.0..std::f64::consts::PI);
                Shape::Rect {
                    cx,
                    cy,
                    hw: size,
                    hh: size * rng.random_range(0.3..1.0),
                    cos: a.cos(),
                    sin: a.sin(),
                }
            }
            1 => Shape::Disc {
                cx,
                cy,
                r: size * 0.8,
            },
            _ => {
                let mut p = [(0.0, 0.0); 3];
                for v in &mut p {
                    *v = (
                        cx + rng.random_range(-size..size) * 1.5,
                        cy + rng.random_range(-size..size) * 1.5,
                    );
                }
                Shape::Triangle { p }
            }
        }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Rect { cx, cy, hw, hh, .. } => {
                let r = (hw * hw + hh * hh).sqrt();
                (cx - r, cy - r, cx + r, cy + r)
            }
            Shape::Disc { cx, cy, r } => (cx - r, cy - r, cx + r, cy + r),
            Shape::Triangle { p } => {
                let xs = [p[0].0, p[1].0, p[2].0];
                let ys = [p[0].1, p[1].1, p[2].1];
                (
                    xs.iter().cloned().fold(f64::INFINITY, f64::min),
                    ys.iter().cloned().fold(f64::INFINITY, f64::min),
                    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                )
            }
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect {
                cx,
                cy,
                hw,
                hh,
                cos,
                sin,
            } => {
                let (dx, dy) = (x - cx, y - cy);
                (cos * dx + sin * dy).abs() <= hw && (-sin * dx + cos * dy).abs() <= hh
            }
            Shape::Disc { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Triangle { p } => {
                let edge = |a: (f64, f64), b: (f64, f64)| {
                    (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0)
                };
                let (e0, e1, e2) = (edge(p[0], p[1]), edge(p[1], p[2]), edge(p[2], p[0]));
                (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) || (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0)
            }
        }
    }
}

/// Seeded high-texture test image: multi-octave value noise overlaid with
/// random rectangles, discs and triangles.
pub fn procedural_texture(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    if width < 16 || height < 16 {
        return Err(Error::invalid("procedural texture must be at least 16x16"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let octaves: Vec<(ValueNoise, f64)> = NOISE_OCTAVES
        .iter()
        .map(|&(cell, w)| (ValueNoise::new(width, height, cell, &mut rng), w))
        .collect();
    let mut field: Vec<f64> = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            octaves.iter().map(|(n, w)| w * n.at(x, y)).sum::<f64>() * 255.0
        })
        .collect();

    let n_shapes = width * height / 400;
    for _ in 0..n_shapes {
        let shape = Shape::random(width, height, &mut rng);
        let value = rng.random_range(0.0..255.0);
        let alpha = rng.random_range(0.6..1.0);
        let (x0, y0, x1, y1) = shape.bounds();
        let xs = (x0.floor().max(0.0) as usize)..=(x1.ceil().min((width - 1) as f64) as usize);
        let ys = (y0.floor().max(0.0) as usize)..=(y1.ceil().min((height - 1) as f64) as usize);
        for y in ys {
            for x in xs.clone() {
                if shape.contains(x as f64, y as f64) {
                    let v = &mut field[y * width + x];
                    *v = *v * (1.0 - alpha) + value * alpha;
                }
            }
        }
    }

    let (lo, hi) = field
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = (hi - lo).max(1e-9);
    GrayImage::new(
        width,
        height,
        field
            .iter()
            .map(|v| (10.0 + 235.0 * (v - lo) / span).round() as u8)
            .collect(),
    )
}
