//! Containers for discrete Radon transform output.
//!
//! A quadrant holds the sums over every digital line of one angular sector:
//! `n` slopes `s ∈ 0..n` and `2n − 1` heights `h ∈ −(n−1)..=n−1`. Internally a
//! quadrant is stored slope-major, so the profile over `h` for a fixed slope
//! (a *slice*) is a contiguous slice of memory. File formats use row-major
//! `(h, s)` order and convert on the way in and out.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::grid::check_power_of_two;

/// Angular sector of a 2D transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrant {
    A,
    B,
    C,
    D,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::A, Quadrant::B, Quadrant::C, Quadrant::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        ['a', 'b', 'c', 'd'][self.index()]
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a' => Some(Quadrant::A),
            'b' => Some(Quadrant::B),
            'c' => Some(Quadrant::C),
            'd' => Some(Quadrant::D),
            _ => None,
        }
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrant2D {
    n: usize,
    label: Quadrant,
    data: Vec<f64>,
}

impl Quadrant2D {
    pub fn zeros(n: usize, label: Quadrant) -> Result<Self> {
        check_power_of_two(n)?;
        Ok(Self {
            n,
            label,
            data: vec![0.0; n * (2 * n - 1)],
        })
    }

    /// `data` in slope-major order: `data[s * (2n − 1) + (h + n − 1)]`.
    pub fn from_slope_major(n: usize, label: Quadrant, data: Vec<f64>) -> Result<Self> {
        check_power_of_two(n)?;
        if data.len() != n * (2 * n - 1) {
            return Err(Error::Validation(format!(
                "quadrant of size {n} needs {} values, got {}",
                n * (2 * n - 1),
                data.len()
            )));
        }
        Ok(Self { n, label, data })
    }

    /// `data` in row-major `(h, s)` order as used by the file formats.
    pub fn from_row_major(n: usize, label: Quadrant, data: &[f64]) -> Result<Self> {
        let rows = 2 * n - 1;
        if data.len() != n * rows {
            return Err(Error::Validation(format!(
                "quadrant of size {n} needs {} values, got {}",
                n * rows,
                data.len()
            )));
        }
        let mut out = vec![0.0; data.len()];
        for r in 0..rows {
            for s in 0..n {
                out[s * rows + r] = data[r * n + s];
            }
        }
        Self::from_slope_major(n, label, out)
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let rows = self.heights();
        let mut out = vec![0.0; self.data.len()];
        for s in 0..self.n {
            for r in 0..rows {
                out[r * self.n + s] = self.data[s * rows + r];
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> Quadrant {
        self.label
    }

    /// Number of stored heights, `2n − 1`.
    pub fn heights(&self) -> usize {
        2 * self.n - 1
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, h: i64, s: usize) -> f64 {
        self.data[s * self.heights() + self.row_of(h)]
    }

    pub fn set(&mut self, h: i64, s: usize, v: f64) {
        let idx = s * self.heights() + self.row_of(h);
        self.data[idx] = v;
    }

    fn row_of(&self, h: i64) -> usize {
        let r = h + self.n as i64 - 1;
        assert!(
            r >= 0 && (r as usize) < self.heights(),
            "height {h} out of range for n={}",
            self.n
        );
        r as usize
    }

    /// Profile over all stored heights for slope `s`, lowest height first.
    pub fn slice(&self, s: usize) -> &[f64] {
        let rows = self.heights();
        &self.data[s * rows..(s + 1) * rows]
    }

    pub fn slice_mut(&mut self, s: usize) -> &mut [f64] {
        let rows = self.heights();
        &mut self.data[s * rows..(s + 1) * rows]
    }

    /// Heights `−s..=n−1` are the ones whose digital line meets the grid. As
    /// a range of storage rows within [`Quadrant2D::slice`].
    pub fn valid_rows(&self, s: usize) -> std::ops::Range<usize> {
        (self.n - 1 - s)..self.heights()
    }
}

/// The four quadrants `(a, b, c, d)` of a 2D transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram2D {
    quadrants: [Quadrant2D; 4],
}

impl Sinogram2D {
    pub fn new(quadrants: [Quadrant2D; 4]) -> Result<Self> {
        let n = quadrants[0].n;
        for (q, label) in quadrants.iter().zip(Quadrant::ALL) {
            if q.n != n {
                return Err(invalid(format!(
                    "quadrant {} has size {}, expected {n}",
                    q.label, q.n
                )));
            }
            if q.label != label {
                return Err(invalid(format!(
                    "quadrant labelled {} in position {label}",
                    q.label
                )));
            }
        }
        Ok(Self { quadrants })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Ok(Self {
            quadrants: [
                Quadrant2D::zeros(n, Quadrant::A)?,
                Quadrant2D::zeros(n, Quadrant::B)?,
                Quadrant2D::zeros(n, Quadrant::C)?,
                Quadrant2D::zeros(n, Quadrant::D)?,
            ],
        })
    }

    pub fn n(&self) -> usize {
        self.quadrants[0].n
    }

    pub fn quadrants(&self) -> &[Quadrant2D; 4] {
        &self.quadrants
    }

    pub fn quadrants_mut(&mut self) -> &mut [Quadrant2D; 4] {
        &mut self.quadrants
    }

    pub fn quadrant(&self, q: Quadrant) -> &Quadrant2D {
        &self.quadrants[q.index()]
    }

    pub fn dot(&self, other: &Sinogram2D) -> f64 {
        self.quadrants
            .iter()
            .zip(&other.quadrants)
            .map(|(a, b)| crate::grid::dot(&a.data, &b.data))
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.quadrants
            .iter()
            .flat_map(|q| q.data.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One of the sixteen sectors of a 3D transform, labelled by a pair of
/// quadrant letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hexadecant(pub Quadrant, pub Quadrant);

impl Hexadecant {
    /// `aa, ab, …, dd` in row order.
    pub fn all() -> [Hexadecant; 16] {
        let mut out = [Hexadecant(Quadrant::A, Quadrant::A); 16];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = Hexadecant(Quadrant::ALL[k / 4], Quadrant::ALL[k % 4]);
        }
        out
    }
}

impl fmt::Display for Hexadecant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0, self.1)
    }
}

/// Plane sums of one hexadecant: heights `h ∈ −2(n−1)..=n−1` for every slope
/// pair `(s₁, s₂)`. Stored slope-major: `data[(s₁ n + s₂)(3n − 2) + h + 2(n−1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hexadecant3D {
    n: usize,
    label: Hexadecant,
    data: Vec<f64>,
}

impl Hexadecant3D {
    pub fn from_slope_major(n: usize, label: Hexadecant, data: Vec<f64>) -> Result<Self> {
        check_power_of_two(n)?;
        if data.len() != n * n * (3 * n - 2) {
            return Err(Error::Validation(format!(
                "hexadecant of size {n} needs {} values, got {}",
                n * n * (3 * n - 2),
                data.len()
            )));
        }
        Ok(Self { n, label, data })
    }

    /// Row-major `(h, s₁, s₂)` order as used by the file format.
    pub fn from_row_major(n: usize, label: Hexadecant, data: &[f64]) -> Result<Self> {
        let rows = 3 * n - 2;
        if data.len() != n * n * rows {
            return Err(Error::Validation(format!(
                "hexadecant of size {n} needs {} values, got {}",
                n * n * rows,
                data.len()
            )));
        }
        let mut out = vec![0.0; data.len()];
        for r in 0..rows {
            for c in 0..n * n {
                out[c * rows + r] = data[r * n * n + c];
            }
        }
        Self::from_slope_major(n, label, out)
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let rows = self.heights();
        let cols = self.n * self.n;
        let mut out = vec![0.0; self.data.len()];
        for c in 0..cols {
            for r in 0..rows {
                out[r * cols + c] = self.data[c * rows + r];
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> Hexadecant {
        self.label
    }

    pub fn heights(&self) -> usize {
        3 * self.n - 2
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, h: i64, s1: usize, s2: usize) -> f64 {
        let r = h + 2 * (self.n as i64 - 1);
        assert!(r >= 0 && (r as usize) < self.heights());
        self.data[(s1 * self.n + s2) * self.heights() + r as usize]
    }

    /// Profile over all heights for the slope pair `(s₁, s₂)`.
    pub fn slice(&self, s1: usize, s2: usize) -> &[f64] {
        let rows = self.heights();
        let c = s1 * self.n + s2;
        &self.data[c * rows..(c + 1) * rows]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram3D {
    hexadecants: Vec<Hexadecant3D>,
}

impl Sinogram3D {
    pub fn new(hexadecants: Vec<Hexadecant3D>) -> Result<Self> {
        if hexadecants.len() != 16 {
            return Err(invalid(format!(
                "expected 16 hexadecants, got {}",
                hexadecants.len()
            )));
        }
        let n = hexadecants[0].n;
        for (h, label) in hexadecants.iter().zip(Hexadecant::all()) {
            if h.n != n {
                return Err(invalid(format!(
                    "hexadecant {} has size {}, expected {n}",
                    h.label, h.n
                )));
            }
            if h.label != label {
                return Err(invalid(format!(
                    "hexadecant labelled {} in position {label}",
                    h.label
                )));
            }
        }
        Ok(Self { hexadecants })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        let rows = 3 * n - 2;
        let hexadecants = Hexadecant::all()
            .into_iter()
            .map(|l| Hexadecant3D::from_slope_major(n, l, vec![0.0; n * n * rows]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { hexadecants })
    }

    pub fn n(&self) -> usize {
        self.hexadecants[0].n
    }

    pub fn hexadecants(&self) -> &[Hexadecant3D] {
        &self.hexadecants
    }

    pub fn dot(&self, other: &Sinogram3D) -> f64 {
        self.hexadecants
            .iter()
            .zip(&other.hexadecants)
            .map(|(a, b)| crate::grid::dot(&a.data, &b.data))
            .sum()
    }
}
