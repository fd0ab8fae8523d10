//! 1D soft-Coulomb systems: nuclei, electron count, and the potentials.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nucleus {
    pub position: f64,
    pub charge: f64,
}

/// An `N`-electron 1D system with soft-Coulomb interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct System1D {
    n_electrons: usize,
    nuclei: Vec<Nucleus>,
}

impl System1D {
    pub fn new(n_electrons: usize, nuclei: Vec<Nucleus>) -> Result<Self> {
        if n_electrons < 1 {
            return Err(Error::arg("at least one electron required"));
        }
        for nuc in &nuclei {
            if !nuc.charge.is_finite() || nuc.charge <= 0.0 || !nuc.position.is_finite() {
                return Err(Error::arg(format!(
                    "nucleus must have finite position and positive charge, got {nuc:?}"
                )));
            }
        }
        Ok(System1D {
            n_electrons,
            nuclei,
        })
    }

    /// 1D lithium: a single charge-3 nucleus at the origin, three electrons.
    pub fn lithium() -> System1D {
        System1D::new(
            3,
            vec![Nucleus {
                position: 0.0,
                charge: 3.0,
            }],
        )
        .expect("static parameters are valid")
    }

    /// 1D helium hydride cation: He (Z=2) at 0.0 and H (Z=1) at 1.463,
    /// two electrons.
    pub fn helium_hydride() -> System1D {
        System1D::new(
            2,
            vec![
                Nucleus {
                    position: 0.0,
                    charge: 2.0,
                },
                Nucleus {
                    position: 1.463,
                    charge: 1.0,
                },
            ],
        )
        .expect("static parameters are valid")
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    /// Electron-nucleus attraction at position `r`:
    /// `-sum_I Z_I / sqrt(1 + (r - R_I)^2)`. Finite for all real `r`.
    pub fn one_body_potential(&self, r: f64) -> f64 {
        -self
            .nuclei
            .iter()
            .map(|nuc| {
                let d = r - nuc.position;
                nuc.charge / (1.0 + d * d).sqrt()
            })
            .sum::<f64>()
    }

    /// System file format: `nucleus <position> <charge>` lines plus one
    /// `electrons <N>` line, in any order; `#` starts a comment.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut n_electrons = None;
        let mut nuclei = Vec::new();
        for (no, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("nucleus") => {
                    let position: f64 = tok
                        .next()
                        .ok_or_else(|| Error::parse(no + 1, "nucleus missing position"))?
                        .parse()
                        .map_err(|_| Error::parse(no + 1, "bad nucleus position"))?;
                    let charge: f64 = tok
                        .next()
                        .ok_or_else(|| Error::parse(no + 1, "nucleus missing charge"))?
                        .parse()
                        .map_err(|_| Error::parse(no + 1, "bad nucleus charge"))?;
                    nuclei.push(Nucleus { position, charge });
                }
                Some("electrons") => {
                    let n: usize = tok
                        .next()
                        .ok_or_else(|| Error::parse(no + 1, "electrons missing count"))?
                        .parse()
                        .map_err(|_| Error::parse(no + 1, "bad electron count"))?;
                    n_electrons = Some(n);
                }
                Some(other) => {
                    return Err(Error::parse(no + 1, format!("unknown directive `{other}`")));
                }
                None => unreachable!("blank lines are skipped"),
            }
        }
        let n = n_electrons.ok_or_else(|| Error::parse(0, "missing `electrons` line"))?;
        System1D::new(n, nuclei)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for nuc in &self.nuclei {
            writeln!(w, "nucleus {} {}", nuc.position, nuc.charge)?;
        }
        writeln!(w, "electrons {}", self.n_electrons)?;
        Ok(())
    }

    pub fn read_from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(file))
    }
}

/// Electron-electron repulsion: `1 / sqrt(1 + (r - r')^2)`, symmetric and
/// valued in `(0, 1]`.
pub fn two_body_potential(r: f64, rp: f64) -> f64 {
    let d = r - rp;
    1.0 / (1.0 + d * d).sqrt()
}
