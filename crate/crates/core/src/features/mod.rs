//! Feature families and their assembly into a [`FeatureVector`].

mod disparity_stats;
mod niq;

pub use disparity_stats::{
    boundary_disparity_feature, did_feature, did_patch_gradients, disparity_range_feature,
    disparity_range_from_extremes, image_energy, jndd_threshold, BoundaryDisparity, ComfortZone,
    DidParams, DrParams, ENERGY_EPSILON,
};
pub use niq::{niq_features, view_gradient_statistics, wrap_angle, NIQ_PER_VIEW};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imagecore::{DisparityMap, StereoPair};

/// Number of features produced without external full-reference scores.
pub const BASE_DIMS: usize = 18;

/// Named feature families, in vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureGroup {
    Dr,
    Bd,
    Did,
    Niq,
    Fiq,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::Dr,
        FeatureGroup::Bd,
        FeatureGroup::Did,
        FeatureGroup::Niq,
        FeatureGroup::Fiq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Dr => "dr",
            FeatureGroup::Bd => "bd",
            FeatureGroup::Did => "did",
            FeatureGroup::Niq => "niq",
            FeatureGroup::Fiq => "fiq",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dr" => Ok(FeatureGroup::Dr),
            "bd" => Ok(FeatureGroup::Bd),
            "did" => Ok(FeatureGroup::Did),
            "niq" => Ok(FeatureGroup::Niq),
            "fiq" => Ok(FeatureGroup::Fiq),
            other => Err(Error::Input(format!("unknown feature group '{other}'"))),
        }
    }
}

/// A sorted, de-duplicated selection of feature groups such as `dr+bd+did`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureSet(Vec<FeatureGroup>);

impl FeatureSet {
    pub fn new(groups: impl IntoIterator<Item = FeatureGroup>) -> Result<Self> {
        let mut g: Vec<_> = groups.into_iter().collect();
        g.sort();
        g.dedup();
        if g.is_empty() {
            return Err(Error::Input("empty feature selection".into()));
        }
        Ok(Self(g))
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.0
    }

    pub fn contains(&self, g: FeatureGroup) -> bool {
        self.0.contains(&g)
    }

    /// Label in the `A+B+C` style, upper-cased.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|g| g.name().to_ascii_uppercase())
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    /// Accepts `dr,bd,did` or `dr+bd+did`.
    fn from_str(s: &str) -> Result<Self> {
        let groups = s
            .split([',', '+'])
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(groups)
    }
}

/// Comfort features of one stereo pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub dr: f64,
    /// `[A_l, A_r, D]`
    pub bd: [f64; 3],
    /// `[mean, variance]`
    pub did: [f64; 2],
    pub niq: [f64; 2 * NIQ_PER_VIEW],
    /// External full-reference scores, passed through unchanged.
    pub fiq: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        BASE_DIMS + self.fiq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flattened `[dr | bd | did | niq | fiq]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.push(self.dr);
        v.extend_from_slice(&self.bd);
        v.extend_from_slice(&self.did);
        v.extend_from_slice(&self.niq);
        v.extend_from_slice(&self.fiq);
        v
    }

    /// Inverse of [`to_vec`](Self::to_vec).
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() < BASE_DIMS {
            return Err(Error::Dimension(format!(
                "feature row has {} values, need at least {BASE_DIMS}",
                values.len()
            )));
        }
        let mut niq = [0.0; 2 * NIQ_PER_VIEW];
        niq.copy_from_slice(&values[6..BASE_DIMS]);
        Ok(Self {
            dr: values[0],
            bd: [values[1], values[2], values[3]],
            did: [values[4], values[5]],
            niq,
            fiq: values[BASE_DIMS..].to_vec(),
        })
    }

    pub fn group(&self, g: FeatureGroup) -> Vec<f64> {
        match g {
            FeatureGroup::Dr => vec![self.dr],
            FeatureGroup::Bd => self.bd.to_vec(),
            FeatureGroup::Did => self.did.to_vec(),
            FeatureGroup::Niq => self.niq.to_vec(),
            FeatureGroup::Fiq => self.fiq.clone(),
        }
    }

    /// Concatenates the selected groups in canonical order.
    pub fn select(&self, set: &FeatureSet) -> Vec<f64> {
        set.groups().iter().flat_map(|g| self.group(*g)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }
}

/// CSV column names of a feature vector with `fiq_count` external scores.
pub fn column_names(fiq_count: usize) -> Vec<String> {
    let mut names: Vec<String> = ["dr", "bd_al", "bd_ar", "bd_d", "did_mean", "did_var"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend((1..=2 * NIQ_PER_VIEW).map(|i| format!("niq_{i:02}")));
    names.extend((1..=fiq_count).map(|i| format!("fiq_{i}")));
    names
}

/// Parameters shared by every extraction call.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureConfig {
    pub zone: ComfortZone,
    pub dr: DrParams,
    pub did: DidParams,
}

/// Computes the full feature vector of one pair.
pub fn extract_features(
    pair: &StereoPair,
    dmap: &DisparityMap,
    config: &FeatureConfig,
    fiq: &[f64],
) -> Result<FeatureVector> {
    config.dr.validate()?;
    if !dmap.same_shape(pair.left()) {
        return Err(Error::Dimension(format!(
            "disparity map {}x{} does not match views {}x{}",
            dmap.width(),
            dmap.height(),
            pair.width(),
            pair.height()
        )));
    }
    if let Some(v) = fiq.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite external score {v}")));
    }
    let fv = FeatureVector {
        dr: disparity_range_feature(dmap, &config.zone, &config.dr),
        bd: boundary_disparity_feature(pair, dmap)?.to_array(),
        did: did_feature(dmap, &config.did)?,
        niq: niq_features(pair)?,
        fiq: fiq.to_vec(),
    };
    debug_assert!(fv.is_finite());
    Ok(fv)
}

/// Like [`extract_features`], using the disparity map carried by the pair.
pub fn extract_from_pair(
    pair: &StereoPair,
    config: &FeatureConfig,
    fiq: &[f64],
) -> Result<FeatureVector> {
    let dmap = pair
        .disparity()
        .ok_or_else(|| Error::Input("stereo pair has no disparity map".into()))?;
    extract_features(pair, dmap, config, fiq)
}
