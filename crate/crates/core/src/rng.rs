//! Counter-based noise source.
//!
//! Philox4x32-10 maps a 128-bit counter and a 64-bit key to four
//! pseudorandom words with no internal state, so every pixel's noise is a
//! pure function of `(seed, frame, camera, pixel)`. Captures are therefore
//! reproducible independently of evaluation order.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32 block with 10 rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Which physical camera a sample belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Camera {
    Left,
    Right,
}

impl Camera {
    fn index(self) -> u32 {
        match self {
            Camera::Left => 0,
            Camera::Right => 1,
        }
    }
}

/// Keyed generator of per-pixel standard normal pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelNoise {
    key: [u32; 2],
    frame: u32,
    camera: Camera,
}

impl PixelNoise {
    pub fn new(seed: u64, frame: u32, camera: Camera) -> Self {
        Self {
            key: [seed as u32, (seed >> 32) as u32],
            frame,
            camera,
        }
    }

    /// Two independent standard normal deviates for `pixel` (Box-Muller).
    pub fn normal_pair(&self, pixel: u64) -> (f64, f64) {
        let w = philox4x32_10(
            [
                pixel as u32,
                (pixel >> 32) as u32,
                self.frame,
                self.camera.index(),
            ],
            self.key,
        );
        // 1 - u keeps the log argument in (0, 1].
        let u1 = 1.0 - unit_f64(w[0], w[1]);
        let u2 = unit_f64(w[2], w[3]);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }
}

/// 53-bit uniform in [0, 1).
#[inline(always)]
fn unit_f64(hi: u32, lo: u32) -> f64 {
    let bits = ((hi as u64) << 21) ^ ((lo as u64) >> 11);
    (bits & ((1u64 << 53) - 1)) as f64 * (1.0 / (1u64 << 53) as f64)
}
