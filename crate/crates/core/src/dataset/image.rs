use image::imageops::FilterType;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An RGB raster stored channel-planar: all red values, then green, then
/// blue, each plane row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelArray {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl PixelArray {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != 3 * height * width {
            return Err(Error::Input(format!(
                "pixel buffer of {} bytes does not match {height}x{width}x3",
                data.len()
            )));
        }
        Ok(PixelArray { height, width, data })
    }

    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Self {
        let plane = height * width;
        let mut data = Vec::with_capacity(3 * plane);
        for c in rgb {
            data.extend(std::iter::repeat_n(c, plane));
        }
        PixelArray { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, channel: usize, y: usize, x: usize) -> u8 {
        self.data[(channel * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, channel: usize, y: usize, x: usize, v: u8) {
        self.data[(channel * self.height + y) * self.width + x] = v;
    }

    pub fn rgb(&self, y: usize, x: usize) -> [u8; 3] {
        [self.get(0, y, x), self.get(1, y, x), self.get(2, y, x)]
    }

    fn from_rgb_image(img: &image::RgbImage) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut data = vec![0; 3 * h * w];
        for (x, y, p) in img.enumerate_pixels() {
            for c in 0..3 {
                data[(c * h + y as usize) * w + x as usize] = p.0[c];
            }
        }
        PixelArray { height: h, width: w, data }
    }

    pub fn to_rgb_image(&self) -> image::RgbImage {
        image::RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Rgb(self.rgb(y as usize, x as usize))
        })
    }

    /// Bilinear resampling of a sub-rectangle onto a new grid, sampling pixel centers.
    fn resample(&self, top: usize, left: usize, h: usize, w: usize, out_h: usize, out_w: usize) -> PixelArray {
        let mut out = PixelArray::filled(out_h, out_w, [0; 3]);
        let sy = h as f64 / out_h as f64;
        let sx = w as f64 / out_w as f64;
        for y in 0..out_h {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(h - 1);
            let ty = fy - y0 as f64;
            for x in 0..out_w {
                let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(w - 1);
                let tx = fx - x0 as f64;
                for c in 0..3 {
                    let p = |yy: usize, xx: usize| self.get(c, top + yy, left + xx) as f64;
                    let v = (1.0 - ty) * ((1.0 - tx) * p(y0, x0) + tx * p(y0, x1))
                        + ty * ((1.0 - tx) * p(y1, x0) + tx * p(y1, x1));
                    out.set(c, y, x, v.round().clamp(0.0, 255.0) as u8);
                }
            }
        }
        out
    }
}

/// Decodes an encoded raster (JPEG or PNG), center-crops it to the target
/// aspect ratio and scales it to exactly `target` = (height, width).
pub fn decode_and_resize(image_bytes: &[u8], target: (usize, usize), card_id: &str) -> Result<PixelArray> {
    let (th, tw) = target;
    if th == 0 || tw == 0 {
        return Err(Error::Config("target dimensions must be positive".into()));
    }
    let decoded = image::load_from_memory(image_bytes).map_err(|e| Error::Decode {
        card_id: card_id.to_string(),
        message: e.to_string(),
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    if (h, w) == (th, tw) {
        return Ok(PixelArray::from_rgb_image(&rgb));
    }
    // Largest centered region with the target aspect ratio.
    let (crop_w, crop_h) = if w * th > h * tw {
        ((h * tw / th).max(1), h)
    } else {
        (w, (w * th / tw).max(1))
    };
    let left = (w - crop_w) / 2;
    let top = (h - crop_h) / 2;
    let cropped = image::imageops::crop_imm(&rgb, left as u32, top as u32, crop_w as u32, crop_h as u32).to_image();
    let resized = if (crop_h, crop_w) == (th, tw) {
        cropped
    } else {
        image::imageops::resize(&cropped, tw as u32, th as u32, FilterType::Triangle)
    };
    Ok(PixelArray::from_rgb_image(&resized))
}

/// Random crop-and-rescale followed by a random shift with edge replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Pixels that may be trimmed from each side before scaling back up.
    pub crop_margin: usize,
    /// Maximum shift, in pixels, along each axis.
    pub max_displacement: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            crop_margin: 4,
            max_displacement: 4,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self, dims: (usize, usize)) -> Result<()> {
        let min = dims.0.min(dims.1);
        if 2 * self.crop_margin >= min {
            return Err(Error::Config(format!(
                "crop margin {} must be below half of the smaller image side ({min})",
                self.crop_margin
            )));
        }
        Ok(())
    }
}

pub fn augment(pixels: &PixelArray, seed: u64, config: &AugmentConfig) -> Result<PixelArray> {
    let (h, w) = pixels.dims();
    config.validate((h, w))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = config.crop_margin;
    let d = config.max_displacement as i64;

    let cropped = if m > 0 {
        let top = rng.random_range(0..=2 * m);
        let left = rng.random_range(0..=2 * m);
        pixels.resample(top, left, h - 2 * m, w - 2 * m, h, w)
    } else {
        pixels.clone()
    };
    if d == 0 {
        return Ok(cropped);
    }
    let dy = rng.random_range(-d..=d);
    let dx = rng.random_range(-d..=d);
    let mut out = cropped.clone();
    for c in 0..3 {
        for y in 0..h {
            let sy = (y as i64 - dy).clamp(0, h as i64 - 1) as usize;
            for x in 0..w {
                let sx = (x as i64 - dx).clamp(0, w as i64 - 1) as usize;
                out.set(c, y, x, cropped.get(c, sy, sx));
            }
        }
    }
    Ok(out)
}
