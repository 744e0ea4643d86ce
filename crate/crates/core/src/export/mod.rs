//! Result serialization: point-cloud CSV, slice SVG, boundary mesh and PLY.

mod csv;
mod mesh;
mod ply;
mod svg;

pub use self::csv::{write_point_cloud, CSV_HEADER};
pub use self::mesh::{
    build_boundary_mesh, extract_outer_contour, stitch_contours, Contour, MeshParams, MeshSurface,
};
pub use self::ply::write_ply;
pub use self::svg::write_slice_svg;

use std::io::{self, Write};

/// Formats a value with 12 significant digits in the style of C's `%.12g`:
/// fixed notation for decimal exponents in [-4, 12), scientific otherwise,
/// trailing zeros removed.
pub fn format_g12(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Byte-counting adapter around a destination.
pub(crate) struct Counting<W> {
    inner: W,
    pub(crate) bytes: usize,
}

impl<W: Write> Counting<W> {
    pub(crate) fn new(inner: W) -> Self {
        Self { inner, bytes: 0 }
    }
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.bytes += n;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (-2.25, "-2.25"),
            (1.0 / 3.0, "0.333333333333"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e-5, "1e-05"),
            (1.5e-4, "0.00015"),
            (0.1 + 0.2, "0.3"),
            (-1e-300, "-1e-300"),
            (2.0f64.sqrt(), "1.41421356237"),
        ];
        for (v, s) in cases {
            assert_eq!(format_g12(v), s, "{v}");
        }
    }

    #[test]
    fn g12_keeps_twelve_digits() {
        for &v in &[0.123456789012345, 98765.4321098765, -7.0e-9 / 3.0, 6.02214076e23] {
            let back: f64 = format_g12(v).parse().unwrap();
            assert!(((back - v) / v).abs() <= 5e-12, "{v} -> {back}");
        }
    }
}
