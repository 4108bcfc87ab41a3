//! Sampled tower members for the published figure panels.
//!
//! Panel `a` shows the even tower at `m = 1` (`q = 5/4`), panel `b` the odd
//! tower at `m = 1` (`q = 7/4`); panels `3c` and `3d` repeat `3a` and `3b`
//! on a wider range.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::expr::EvalError;
use crate::families::{FamilyMember, Side, TowerIndex};
use crate::profile::{PbProfile, ProfileError, ProfileKind};

/// Samples per panel unless overridden.
pub const DEFAULT_POINTS: usize = 1001;

/// Tower index shown in every panel.
pub const FIGURE_M: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1a,
        FigureId::Fig1b,
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig3c,
        FigureId::Fig3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1a => "fig1a",
            FigureId::Fig1b => "fig1b",
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig3c => "fig3c",
            FigureId::Fig3d => "fig3d",
        }
    }

    pub fn from_name(name: &str) -> Option<FigureId> {
        FigureId::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Whether the panel shows the odd tower.
    pub fn odd(self) -> bool {
        matches!(self, FigureId::Fig1b | FigureId::Fig2b | FigureId::Fig3b | FigureId::Fig3d)
    }

    /// Default sampling range.
    pub fn range(self) -> (f64, f64) {
        match self {
            FigureId::Fig2a | FigureId::Fig2b => (-3.0, 3.0),
            FigureId::Fig3c | FigureId::Fig3d => (-20.0, 20.0),
            _ => (-6.0, 6.0),
        }
    }

    /// The profile with the caption's parameters and normalizations.
    pub fn profile(self) -> Result<PbProfile, ProfileError> {
        let (kind, k, n) = match self {
            FigureId::Fig1a | FigureId::Fig1b => {
                (ProfileKind::Constant { alpha: 3.0 }, 2.0, 1.0 / (2f64.sqrt() * PI.powf(0.25)))
            }
            FigureId::Fig2a | FigureId::Fig2b => (ProfileKind::Quartic { gamma: 0.5 }, 0.5, PI.powf(-0.25)),
            _ => (ProfileKind::Cosine { gamma: 0.5 }, 0.5, PI.powf(-0.25)),
        };
        PbProfile::builtin(kind, k)?.with_normalization(Some(n), Some(n))
    }

    /// The tower index of the panel.
    pub fn tower_index(self) -> TowerIndex {
        if self.odd() {
            TowerIndex::odd(FIGURE_M)
        } else {
            TowerIndex::even(FIGURE_M)
        }
    }
}

/// Columns of one panel.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub product: Vec<f64>,
}

/// `points` uniform samples of `[xmin, xmax]`, endpoints included.
pub fn uniform_grid(xmin: f64, xmax: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![xmin],
        _ => {
            let h = (xmax - xmin) / (points - 1) as f64;
            (0..points).map(|i| if i + 1 == points { xmax } else { xmin + i as f64 * h }).collect()
        }
    }
}

/// Samples the tower pair of `profile` at `index` on `xs`.
pub fn sample_towers(profile: &Arc<PbProfile>, index: TowerIndex, xs: &[f64]) -> Result<PlotData, EvalError> {
    let phi = FamilyMember::tower(profile, Side::Phi, index);
    let psi = FamilyMember::tower(profile, Side::Psi, index);
    let rows: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|&x| Ok((phi.eval(x)?, psi.eval(x)?)))
        .collect::<Result<_, EvalError>>()?;
    Ok(PlotData {
        x: xs.to_vec(),
        phi: rows.iter().map(|r| r.0).collect(),
        psi: rows.iter().map(|r| r.1).collect(),
        product: rows.iter().map(|r| r.0 * r.1).collect(),
    })
}

/// The panel `id` sampled on `points` points of `[xmin, xmax]`.
pub fn plot_data(id: FigureId, xmin: f64, xmax: f64, points: usize) -> Result<PlotData, crate::Error> {
    let profile = Arc::new(id.profile()?);
    Ok(sample_towers(&profile, id.tower_index(), &uniform_grid(xmin, xmax, points))?)
}

/// 17 significant digits, lowercase scientific; parses back to the same bits.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

impl PlotData {
    /// CSV with header `x,phi,psi,product`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.x.len() * 96 + 32);
        out.push_str("x,phi,psi,product\n");
        for i in 0..self.x.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                format_number(self.x[i]),
                format_number(self.phi[i]),
                format_number(self.psi[i]),
                format_number(self.product[i])
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_both_endpoints() {
        let g = uniform_grid(-6.0, 6.0, 1001);
        assert_eq!((g[0], g[500], g[1000]), (-6.0, 0.0, 6.0));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(format_number(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn ids_round_trip() {
        for id in FigureId::ALL {
            assert_eq!(FigureId::from_name(id.name()), Some(id));
        }
        assert_eq!(FigureId::from_name("fig4a"), None);
    }
}
