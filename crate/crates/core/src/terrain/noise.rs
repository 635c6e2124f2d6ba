//! Fractal gradient noise with seed-derived permutation tables.

use super::GenConfig;
use crate::rng::{hash_words, unit_f64, KeyedStream};

const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 1.0),
    (-1.0, 1.0),
    (1.0, -1.0),
    (-1.0, -1.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
];

const PERSISTENCE: f64 = 0.5;
const LACUNARITY: f64 = 2.0;
/// Stretches the amplitude-normalized sum, whose spread is far narrower
/// than `[-1, 1]`, so land thresholds on that scale are all reachable.
const CONTRAST: f64 = 2.0;

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

#[derive(Clone)]
struct Octave {
    perm: [u8; 512],
    frequency: f64,
    amplitude: f64,
    // Per-octave lattice offset so integer cells never sit on lattice points.
    shift: (f64, f64),
}

impl Octave {
    fn new(key: u64, index: u32, frequency: f64, amplitude: f64) -> Self {
        let mut stream = KeyedStream::new(key, index as u64);
        let mut table: Vec<u8> = (0..=255u8).collect();
        stream.shuffle(&mut table);
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = table[i & 255];
        }
        let shift = (unit_f64(stream.next_u64()) * 256.0, unit_f64(stream.next_u64()) * 256.0);
        Self {
            perm,
            frequency,
            amplitude,
            shift,
        }
    }

    #[inline]
    fn grad(&self, ix: usize, iy: usize, dx: f64, dy: f64) -> f64 {
        let h = self.perm[self.perm[ix & 255] as usize + (iy & 255)] & 7;
        let (gx, gy) = GRADIENTS[h as usize];
        gx * dx + gy * dy
    }

    /// Classic 2-D gradient noise in `[-1, 1]`.
    fn sample(&self, x: f64, y: f64) -> f64 {
        let fx = x * self.frequency + self.shift.0;
        let fy = y * self.frequency + self.shift.1;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let dx = fx - x0;
        let dy = fy - y0;
        // Lattice wraps every 256 cells.
        let ix = x0.rem_euclid(256.0) as usize;
        let iy = y0.rem_euclid(256.0) as usize;
        let n00 = self.grad(ix, iy, dx, dy);
        let n10 = self.grad(ix + 1, iy, dx - 1.0, dy);
        let n01 = self.grad(ix, iy + 1, dx, dy - 1.0);
        let n11 = self.grad(ix + 1, iy + 1, dx - 1.0, dy - 1.0);
        let u = fade(dx);
        let v = fade(dy);
        lerp(lerp(n00, n10, u), lerp(n01, n11, u), v)
    }
}

/// One noise layer: a fixed stack of octaves derived from `seed ^ salt`.
#[derive(Clone)]
pub struct NoiseField {
    octaves: Vec<Octave>,
    norm: f64,
}

impl NoiseField {
    pub fn new(seed: u64, layer_salt: u64, octaves: u32, base_frequency: f64) -> Self {
        let key = hash_words(&[seed ^ layer_salt, 0x4E01_5E]);
        let mut freq = base_frequency;
        let mut amp = 1.0;
        let mut norm = 0.0;
        let mut list = Vec::with_capacity(octaves as usize);
        for o in 0..octaves {
            list.push(Octave::new(key, o, freq, amp));
            norm += amp;
            freq *= LACUNARITY;
            amp *= PERSISTENCE;
        }
        Self { octaves: list, norm }
    }

    pub fn from_config(cfg: &GenConfig, layer_salt: u64) -> Self {
        Self::new(cfg.seed, layer_salt, cfg.octaves, cfg.base_frequency)
    }

    /// Noise at a cell coordinate, in `[-1, 1]`.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let sum: f64 = self.octaves.iter().map(|o| o.amplitude * o.sample(x, y)).sum();
        (CONTRAST * sum / self.norm).clamp(-1.0, 1.0)
    }
}

/// Fractal noise value at `(x, y)` for one layer. Pure in every argument.
///
/// Builds the layer's permutation tables on each call; use [`NoiseField`]
/// directly when sampling many points.
pub fn noise2(seed: u64, layer_salt: u64, x: f64, y: f64, cfg: &GenConfig) -> f64 {
    NoiseField::new(seed, layer_salt, cfg.octaves, cfg.base_frequency).sample(x, y)
}
