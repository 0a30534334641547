use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of internal levels carried by every defect.
pub const DEFECT_LEVELS: usize = 4;

/// Defect level, in storage order.
///
/// `G3` is the inert third ground level: no drive in any model touches it,
/// which makes it the natural |0⟩ of the gate qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    G1,
    G2,
    G3,
    E,
}

impl Level {
    pub const ALL: [Level; DEFECT_LEVELS] = [Level::G1, Level::G2, Level::G3, Level::E];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Level::G1 => 0,
            Level::G2 => 1,
            Level::G3 => 2,
            Level::E => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Level> {
        Level::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::invalid(format!("defect level index {i} out of range 0..4")))
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Level::G1 => "g1",
            Level::G2 => "g2",
            Level::G3 => "g3",
            Level::E => "e",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A tensor factor of the full space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Phonon,
    Defect(usize),
}

/// Basis label `|n s_1 ... s_N⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisLabel {
    pub phonon: usize,
    pub levels: Vec<Level>,
}

impl BasisLabel {
    pub fn new(phonon: usize, levels: &[Level]) -> Self {
        Self { phonon, levels: levels.to_vec() }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}", self.phonon)?;
        for l in &self.levels {
            write!(f, " {l}")?;
        }
        write!(f, ">")
    }
}

/// Shape of the phonon ⊗ defect_1 ⊗ ... ⊗ defect_N space.
///
/// The phonon is the most significant factor, so the flat index of
/// `|n s_1 .. s_N⟩` is `n·4^N + Σ s_i·4^(N-1-i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertLayout {
    phonon_levels: usize,
    defect_count: usize,
}

impl HilbertLayout {
    pub const DEFAULT_PHONON_LEVELS: usize = 6;

    pub fn new(phonon_levels: usize, defect_count: usize) -> Result<Self> {
        if phonon_levels < 2 {
            return Err(Error::invalid(format!("phonon_levels must be at least 2, got {phonon_levels}")));
        }
        if defect_count == 0 {
            return Err(Error::invalid("defect_count must be at least 1"));
        }
        // 4^10 already exceeds anything a dense density matrix can hold.
        if defect_count > 10 {
            return Err(Error::invalid(format!("defect_count {defect_count} is beyond dense storage")));
        }
        Ok(Self { phonon_levels, defect_count })
    }

    #[inline]
    pub fn phonon_levels(&self) -> usize {
        self.phonon_levels
    }

    #[inline]
    pub fn defect_count(&self) -> usize {
        self.defect_count
    }

    #[inline]
    pub fn defect_levels(&self) -> usize {
        DEFECT_LEVELS
    }

    /// Dimension of the defect part, `4^N`.
    #[inline]
    pub fn spin_dim(&self) -> usize {
        DEFECT_LEVELS.pow(self.defect_count as u32)
    }

    #[inline]
    pub fn total_dim(&self) -> usize {
        self.phonon_levels * self.spin_dim()
    }

    /// Sites in storage order: phonon first, then defects.
    pub fn sites(&self) -> Vec<Site> {
        std::iter::once(Site::Phonon)
            .chain((0..self.defect_count).map(Site::Defect))
            .collect()
    }

    pub fn check_site(&self, site: Site) -> Result<()> {
        match site {
            Site::Defect(i) if i >= self.defect_count => Err(Error::invalid(format!(
                "defect site {i} out of range for {} defects",
                self.defect_count
            ))),
            _ => Ok(()),
        }
    }

    pub fn site_dim(&self, site: Site) -> usize {
        match site {
            Site::Phonon => self.phonon_levels,
            Site::Defect(_) => DEFECT_LEVELS,
        }
    }

    /// Position of a site in storage order.
    pub fn site_position(&self, site: Site) -> usize {
        match site {
            Site::Phonon => 0,
            Site::Defect(i) => i + 1,
        }
    }

    /// Per-site dimensions in storage order.
    pub fn site_dims(&self) -> Vec<usize> {
        self.sites().into_iter().map(|s| self.site_dim(s)).collect()
    }

    /// Flat-index stride of each site.
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.site_dims();
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        strides
    }

    pub fn encode(&self, label: &BasisLabel) -> Result<usize> {
        if label.levels.len() != self.defect_count {
            return Err(Error::dim(format!(
                "label has {} defect levels, layout has {} defects",
                label.levels.len(),
                self.defect_count
            )));
        }
        if label.phonon >= self.phonon_levels {
            return Err(Error::invalid(format!(
                "phonon number {} exceeds truncation {}",
                label.phonon,
                self.phonon_levels - 1
            )));
        }
        Ok(self.index_unchecked(label.phonon, &label.levels))
    }

    /// Flat index without range checks on the phonon number.
    #[inline]
    pub fn index_unchecked(&self, phonon: usize, levels: &[Level]) -> usize {
        levels
            .iter()
            .fold(phonon, |acc, l| acc * DEFECT_LEVELS + l.index())
    }

    pub fn decode(&self, index: usize) -> Result<BasisLabel> {
        if index >= self.total_dim() {
            return Err(Error::invalid(format!("basis index {index} out of range {}", self.total_dim())));
        }
        let mut rest = index;
        let mut levels = vec![Level::G1; self.defect_count];
        for slot in levels.iter_mut().rev() {
            *slot = Level::ALL[rest % DEFECT_LEVELS];
            rest /= DEFECT_LEVELS;
        }
        Ok(BasisLabel { phonon: rest, levels })
    }

    /// Phonon number of a flat index.
    #[inline]
    pub fn phonon_of(&self, index: usize) -> usize {
        index / self.spin_dim()
    }

    /// Level of defect `site` in a flat index.
    #[inline]
    pub fn level_of(&self, index: usize, site: usize) -> Level {
        let shift = DEFECT_LEVELS.pow((self.defect_count - 1 - site) as u32);
        Level::ALL[(index / shift) % DEFECT_LEVELS]
    }
}
