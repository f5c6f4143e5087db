//! Dense 2-D buffer holding one feature sequence: `channels` rows of
//! `frames` values, stored channel-major (row `c` is contiguous in time).

use crate::error::{Result, TcnError};

#[derive(Debug, Clone, PartialEq)]
pub struct SeqTensor {
    channels: usize,
    frames: usize,
    data: Vec<f64>,
}

impl SeqTensor {
    pub fn zeros(channels: usize, frames: usize) -> Self {
        SeqTensor {
            channels,
            frames,
            data: vec![0.0; channels * frames],
        }
    }

    /// Builds from one `Vec` per channel; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let channels = rows.len();
        let frames = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != frames) {
            return Err(TcnError::data("channel rows have differing lengths"));
        }
        let mut data = Vec::with_capacity(channels * frames);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(SeqTensor {
            channels,
            frames,
            data,
        })
    }

    /// Builds from a flat channel-major buffer of length `channels * frames`.
    pub fn from_flat(channels: usize, frames: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * frames {
            return Err(TcnError::data(format!(
                "flat buffer holds {} values, expected {} ({} channels x {} frames)",
                data.len(),
                channels * frames,
                channels,
                frames
            )));
        }
        Ok(SeqTensor {
            channels,
            frames,
            data,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    #[inline]
    pub fn at(&self, c: usize, t: usize) -> f64 {
        debug_assert!(c < self.channels && t < self.frames);
        self.data[c * self.frames + t]
    }

    #[inline]
    pub fn set(&mut self, c: usize, t: usize, v: f64) {
        debug_assert!(c < self.channels && t < self.frames);
        self.data[c * self.frames + t] = v;
    }

    /// One channel across all frames.
    #[inline]
    pub fn row(&self, c: usize) -> &[f64] {
        &self.data[c * self.frames..(c + 1) * self.frames]
    }

    #[inline]
    pub fn row_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.frames..(c + 1) * self.frames]
    }

    /// All channel values of one frame, gathered into a fresh `Vec`.
    pub fn frame(&self, t: usize) -> Vec<f64> {
        (0..self.channels).map(|c| self.at(c, t)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Debug-build guard: primitives must not emit NaN/Inf from finite input.
    #[inline]
    pub fn debug_assert_finite(&self, op: &str) {
        debug_assert!(self.is_finite(), "{op} produced a non-finite value");
    }
}
