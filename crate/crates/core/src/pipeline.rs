//! Glue from a loaded panel to per-date feature blocks.
//!
//! Every cloud for date index `t` reads panel rows `<= t` only, so features
//! never see the future.

use std::ops::Range;

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::data::{self, ReturnPanel};
use crate::error::{Error, Result};
use crate::features::{FeatureBlocks, FeatureConfig};
use crate::persistence::{diagram_of, PersistenceDiagram};
use crate::pointcloud::{
    classical_mds, corr_to_distance, correlation_matrix, kpca_embed, takens_embed, CloudKind, PointCloud,
};

/// Loads the files named in `cfg` into a date-aligned panel.
pub fn load_panel(cfg: &PipelineConfig) -> Result<ReturnPanel> {
    let prices = data::load_prices(&cfg.data.prices)?;
    let index = data::to_returns(&prices)?;
    let constituents = cfg.data.constituents.as_ref().map(data::load_constituents).transpose()?;
    let factors = cfg
        .data
        .factors
        .as_ref()
        .map(|p| data::load_factors(p, cfg.data.factor_count))
        .transpose()?;
    if constituents.is_none() && factors.is_none() {
        return Ok(ReturnPanel::index_only(index));
    }
    ReturnPanel::assemble(index, constituents, factors)
}

/// Smallest date index for which `kind` has enough history.
pub fn first_buildable(kind: CloudKind, cfg: &PipelineConfig) -> usize {
    match kind {
        CloudKind::Takens => cfg.cloud.takens_window - 1,
        CloudKind::Correlation => cfg.cloud.correlation_window - 1,
        CloudKind::Factor => 0,
    }
}

/// The `kind` cloud for date index `t`.
pub fn build_cloud(panel: &ReturnPanel, kind: CloudKind, t: usize, cfg: &PipelineConfig) -> Result<PointCloud<f64>> {
    if t >= panel.len() {
        return Err(Error::Data(format!("date index {t} beyond panel of {} dates", panel.len())));
    }
    let c = &cfg.cloud;
    let cloud = match kind {
        CloudKind::Takens => {
            let window = c.takens_window;
            if t + 1 < window {
                return Err(Error::InsufficientHistory(format!(
                    "Takens window of {window} returns ends at {} but only {} are available",
                    panel.dates[t],
                    t + 1
                )));
            }
            let lags = c.lag_set()?;
            takens_embed(&panel.index_returns[t + 1 - window..=t], &lags)?
                .with_provenance(kind, &panel.dates[t], format!("lags={:?};window={window}", lags.lags()))
        }
        CloudKind::Correlation => {
            let cons = panel
                .constituents
                .as_ref()
                .ok_or_else(|| Error::Config("the correlation cloud needs constituent returns".into()))?;
            let corr = correlation_matrix(cons, t, c.correlation_window)?;
            let dist = corr_to_distance(&corr.values)?;
            classical_mds(&dist, c.mds_dim)?.with_provenance(
                kind,
                &panel.dates[t],
                format!("window={};mds_dim={}", c.correlation_window, c.mds_dim),
            )
        }
        CloudKind::Factor => {
            let factors = panel
                .factors
                .as_ref()
                .ok_or_else(|| Error::Config("the factor cloud needs a factors file".into()))?;
            kpca_embed(&factors[t], c.kpca_dim, c.bandwidth()?)?.with_provenance(
                kind,
                &panel.dates[t],
                format!("kpca_dim={};bandwidth={}", c.kpca_dim, c.bandwidth),
            )
        }
    };
    Ok(cloud)
}

pub fn diagram_for(cloud: &PointCloud<f64>, cfg: &PipelineConfig) -> Result<PersistenceDiagram<f64>> {
    diagram_of(
        cloud,
        cfg.persistence.filtration()?,
        cfg.persistence.max_dim,
        cfg.persistence.max_radius()?,
    )
}

/// Feature blocks of one cloud type for a contiguous run of dates.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    pub kind: CloudKind,
    pub config: FeatureConfig,
    start: usize,
    blocks: Vec<Option<FeatureBlocks<f64>>>,
}

impl FeatureStore {
    /// Computes blocks for every date index in `range` (in parallel); dates
    /// without enough history are left empty.
    pub fn compute(panel: &ReturnPanel, kind: CloudKind, range: Range<usize>, cfg: &PipelineConfig) -> Result<Self> {
        let fc = cfg.feature_config()?;
        let blocks = range
            .clone()
            .into_par_iter()
            .map(|t| match build_cloud(panel, kind, t, cfg) {
                Ok(cloud) => Ok(Some(FeatureBlocks::compute(&diagram_for(&cloud, cfg)?, &fc))),
                Err(Error::InsufficientHistory(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            config: fc,
            start: range.start,
            blocks,
        })
    }

    pub fn get(&self, t: usize) -> Option<&FeatureBlocks<f64>> {
        t.checked_sub(self.start).and_then(|i| self.blocks.get(i)).and_then(Option::as_ref)
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.blocks.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ReturnSeries;

    fn panel(n: usize) -> ReturnPanel {
        let dates: Vec<String> = (0..n).map(|i| format!("2020-{:02}-{:02}", 1 + i / 28, 1 + i % 28)).collect();
        let values: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.7).sin() * 0.01).collect();
        ReturnPanel::index_only(ReturnSeries { dates, values })
    }

    fn cfg() -> PipelineConfig {
        let mut c = PipelineConfig::default();
        c.cloud.lags = vec![0, 1, 3];
        c.cloud.takens_window = 10;
        c
    }

    #[test]
    fn takens_cloud_uses_trailing_window() {
        let p = panel(30);
        let cloud = build_cloud(&p, CloudKind::Takens, 12, &cfg()).unwrap();
        assert_eq!(cloud.len(), 10 - 3);
        assert_eq!(cloud.points()[0][0].to_bits(), p.index_returns[3].to_bits());
        assert_eq!(cloud.points()[6][2].to_bits(), p.index_returns[12].to_bits());
        assert!(matches!(
            build_cloud(&p, CloudKind::Takens, 8, &cfg()),
            Err(Error::InsufficientHistory(_))
        ));
        assert!(matches!(build_cloud(&p, CloudKind::Factor, 12, &cfg()), Err(Error::Config(_))));
    }

    #[test]
    fn store_skips_short_history() {
        let p = panel(20);
        let store = FeatureStore::compute(&p, CloudKind::Takens, 5..15, &cfg()).unwrap();
        assert!(store.get(8).is_none());
        assert!(store.get(9).is_some());
        assert!(store.get(15).is_none());
        assert_eq!(first_buildable(CloudKind::Takens, &cfg()), 9);
    }
}
