use std::fmt;
use std::str::FromStr;

use crate::error::{Edge, Error, Result};

/// Axis-aligned pixel rectangle over the nostrils, chosen by the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Roi {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Roi {
    pub const MIN_PIXELS: u64 = 4;

    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Result<Self> {
        let roi = Self { x, y, w, h };
        if (w as u64) * (h as u64) < Self::MIN_PIXELS {
            return Err(Error::RoiTooSmall { w, h });
        }
        Ok(roi)
    }

    pub fn area(&self) -> usize {
        self.w as usize * self.h as usize
    }

    /// Checks the rectangle against a `width` x `height` frame.
    pub fn check_bounds(&self, width: u16, height: u16) -> Result<()> {
        if (self.w as u64) * (self.h as u64) < Self::MIN_PIXELS {
            return Err(Error::RoiTooSmall { w: self.w, h: self.h });
        }
        let right = self.x as u64 + self.w as u64;
        if right > width as u64 {
            return Err(Error::RoiOutOfBounds {
                edge: Edge::Right,
                extent: right,
                limit: width as u64,
            });
        }
        let bottom = self.y as u64 + self.h as u64;
        if bottom > height as u64 {
            return Err(Error::RoiOutOfBounds {
                edge: Edge::Bottom,
                extent: bottom,
                limit: height as u64,
            });
        }
        Ok(())
    }

    /// Row-major pixel indices covered by the ROI in a frame of the given width.
    pub fn indices(&self, width: u16) -> impl Iterator<Item = usize> + '_ {
        let stride = width as usize;
        (self.y..self.y + self.h).flat_map(move |row| {
            let start = row as usize * stride + self.x as usize;
            start..start + self.w as usize
        })
    }
}

impl fmt::Display for Roi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x, self.y, self.w, self.h)
    }
}

/// Parses `x,y,w,h`.
impl FromStr for Roi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidParameter(format!(
                "ROI must be x,y,w,h, got {s:?}"
            )));
        }
        let mut v = [0u32; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad ROI component {p:?}")))?;
        }
        Roi::new(v[0], v[1], v[2], v[3])
    }
}
