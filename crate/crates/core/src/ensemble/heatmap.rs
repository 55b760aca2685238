use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};

use super::DistanceMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Palette {
    /// Dark purple through teal to light yellow.
    #[default]
    Viridis,
    Grayscale,
}

impl std::str::FromStr for Palette {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "viridis" => Ok(Palette::Viridis),
            "gray" | "grayscale" => Ok(Palette::Grayscale),
            _ => Err(Error::InvalidArgument(format!("unknown palette {s:?}"))),
        }
    }
}

const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

impl Palette {
    /// Color for `t` in `[0, 1]`.
    pub fn color(self, t: f64) -> [u8; 3] {
        let t = t.clamp(0.0, 1.0);
        match self {
            Palette::Grayscale => {
                let g = (t * 255.0).round() as u8;
                [g, g, g]
            }
            Palette::Viridis => {
                let x = t * (VIRIDIS.len() - 1) as f64;
                let i = (x.floor() as usize).min(VIRIDIS.len() - 2);
                let f = x - i as f64;
                let mix = |k: usize| (VIRIDIS[i][k] * (1.0 - f) + VIRIDIS[i + 1][k] * f).round() as u8;
                [mix(0), mix(1), mix(2)]
            }
        }
    }
}

/// One `cell x cell` block per matrix entry, row-major in matrix order,
/// linearly normalized from the smallest to the largest entry.
pub fn render_heatmap(m: &DistanceMatrix, palette: Palette, cell: u32) -> RgbImage {
    let n = m.len() as u32;
    let lo = m.entries().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m.entries().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    RgbImage::from_fn(n * cell, n * cell, |x, y| {
        let v = m.get((y / cell) as usize, (x / cell) as usize);
        let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
        Rgb(palette.color(t))
    })
}

/// Writes the heatmap as PNG or binary PPM, chosen by file extension.
pub fn export_heatmap(m: &DistanceMatrix, path: &Path, palette: Palette, cell: u32) -> Result<()> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("png") => ImageFormat::Png,
        Some("ppm") | Some("pnm") => ImageFormat::Pnm,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "heatmap path {} must end in .png or .ppm",
                path.display()
            )))
        }
    };
    render_heatmap(m, palette, cell.max(1)).save_with_format(path, format)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes_map_to_palette_ends() {
        let m = DistanceMatrix::new(vec!["a".into(), "b".into()], vec![0.0, 4.0, 4.0, 0.0]).unwrap();
        let img = render_heatmap(&m, Palette::Viridis, 1);
        assert_eq!(img.get_pixel(1, 0).0, Palette::Viridis.color(1.0));
        assert_eq!(img.get_pixel(0, 1).0, Palette::Viridis.color(1.0));
        assert_eq!(img.get_pixel(0, 0).0, Palette::Viridis.color(0.0));
        assert_eq!(Palette::Viridis.color(0.0), [68, 1, 84]);
        assert_eq!(Palette::Viridis.color(1.0), [253, 231, 37]);
    }

    #[test]
    fn ramp_gets_lighter() {
        let lum = |c: [u8; 3]| 0.2126 * c[0] as f64 + 0.7152 * c[1] as f64 + 0.0722 * c[2] as f64;
        let mut prev = -1.0;
        for i in 0..=20 {
            let l = lum(Palette::Viridis.color(i as f64 / 20.0));
            assert!(l > prev);
            prev = l;
        }
    }
}
