//! Butcher tableaux and the symplecticity test `b_i a_ij + b_j a_ji = b_i b_j`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// An `s`-stage Runge–Kutta method `(A, b, c)`, with `A` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tableau {
    pub name: String,
    pub s: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl Tableau {
    pub fn new(name: impl Into<String>, a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 || c.len() != s || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::UnsupportedTableau("inconsistent tableau dimensions".into()));
        }
        Ok(Self {
            name: name.into(),
            s,
            a: a.into_iter().flatten().collect(),
            b,
            c,
        })
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.s + j]
    }

    pub fn a_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.s + j]
    }

    /// Gauss–Legendre collocation with `s` stages (order `2s`).
    pub fn gauss(s: usize) -> Result<Self> {
        match s {
            1 => Self::new("gauss1", vec![vec![0.5]], vec![1.0], vec![0.5]),
            2 => {
                let r = 3.0_f64.sqrt() / 6.0;
                Self::new(
                    "gauss2",
                    vec![vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]],
                    vec![0.5, 0.5],
                    vec![0.5 - r, 0.5 + r],
                )
            }
            3 => {
                let r = 15.0_f64.sqrt();
                Self::new(
                    "gauss3",
                    vec![
                        vec![5.0 / 36.0, 2.0 / 9.0 - r / 15.0, 5.0 / 36.0 - r / 30.0],
                        vec![5.0 / 36.0 + r / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r / 24.0],
                        vec![5.0 / 36.0 + r / 30.0, 2.0 / 9.0 + r / 15.0, 5.0 / 36.0],
                    ],
                    vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                    vec![0.5 - r / 10.0, 0.5, 0.5 + r / 10.0],
                )
            }
            _ => Err(Error::UnsupportedTableau(format!("gauss tableau with s = {s}"))),
        }
    }

    pub fn explicit_euler() -> Self {
        Self::new("euler-explicit", vec![vec![0.0]], vec![1.0], vec![0.0]).expect("1x1")
    }

    pub fn implicit_euler() -> Self {
        Self::new("euler-implicit", vec![vec![1.0]], vec![1.0], vec![1.0]).expect("1x1")
    }

    /// Classical four-stage explicit method.
    pub fn classical_rk4() -> Self {
        Self::new(
            "rk4",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
        )
        .expect("4x4")
    }

    /// Looks a tableau up by scheme name: `fprk1..3`, `gauss1..3`,
    /// `euler-implicit`, `euler-explicit`, `rk4`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "fprk1" | "gauss1" | "midpoint" => Self::gauss(1),
            "fprk2" | "gauss2" => Self::gauss(2),
            "fprk3" | "gauss3" => Self::gauss(3),
            "euler-implicit" | "implicit-euler" => Ok(Self::implicit_euler()),
            "euler-explicit" | "explicit-euler" => Ok(Self::explicit_euler()),
            "rk4" => Ok(Self::classical_rk4()),
            other => Err(Error::UnsupportedTableau(other.to_string())),
        }
    }

    /// `max_{i,j} |b_i a_ij + b_j a_ji − b_i b_j|`.
    pub fn symplectic_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.s {
            for j in 0..self.s {
                let d = self.b[i] * self.a(i, j) + self.b[j] * self.a(j, i) - self.b[i] * self.b[j];
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    pub fn is_explicit(&self) -> bool {
        (0..self.s).all(|i| (i..self.s).all(|j| self.a(i, j) == 0.0))
    }

    /// 1-norm condition number of `A`, infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let m = nalgebra::DMatrix::from_row_slice(self.s, self.s, &self.a);
        let norm1 = |m: &nalgebra::DMatrix<f64>| {
            (0..m.ncols())
                .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        match m.clone().try_inverse() {
            Some(inv) => norm1(&m) * norm1(&inv),
            None => f64::INFINITY,
        }
    }
}

/// Free-function form of [`Tableau::symplectic_defect`].
pub fn symplectic_defect(t: &Tableau) -> f64 {
    t.symplectic_defect()
}

/// Free-function form of [`Tableau::gauss`].
pub fn gauss_tableau(s: usize) -> Result<Tableau> {
    Tableau::gauss(s)
}

/// Scheme choices accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Fprk1,
    Fprk2,
    Fprk3,
    Cnfp,
    EulerImplicit,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fprk1 => "fprk1",
            Self::Fprk2 => "fprk2",
            Self::Fprk3 => "fprk3",
            Self::Cnfp => "cnfp",
            Self::EulerImplicit => "euler-implicit",
        }
    }

    /// Tableau driving the stage solver; CN-FP has its own step but shares the
    /// one-stage Gauss tableau for bookkeeping.
    pub fn tableau(self) -> Tableau {
        match self {
            Self::Fprk1 | Self::Cnfp => Tableau::gauss(1),
            Self::Fprk2 => Tableau::gauss(2),
            Self::Fprk3 => Tableau::gauss(3),
            Self::EulerImplicit => Ok(Tableau::implicit_euler()),
        }
        .expect("supported stage counts")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fprk1" => Ok(Self::Fprk1),
            "fprk2" => Ok(Self::Fprk2),
            "fprk3" => Ok(Self::Fprk3),
            "cnfp" => Ok(Self::Cnfp),
            "euler-implicit" => Ok(Self::EulerImplicit),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
