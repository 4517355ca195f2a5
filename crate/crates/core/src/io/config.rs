//! Experiment configuration: flat `key = value` text with dotted sections,
//! strict validation (unknown keys rejected), canonical serialization, and
//! the two documented presets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::Roi;
use crate::detector::DetectorConfig;
use crate::error::{Error, Result};
use crate::spatial::{DoubleSlitSpec, GridSpec, SchmidtSpectrum, Truncation};

/// How channel intensities become gray images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    /// Expected linear counts, no photon noise, zero backgrounds.
    Analytic,
    /// Thresholded-Poisson frame accumulation.
    MonteCarlo,
}

impl fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectionMode::Analytic => "analytic",
            DetectionMode::MonteCarlo => "monte-carlo",
        })
    }
}

/// Schmidt-spectrum model selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumModel {
    Flat,
    GaussianGeometric { sigma_ell: f64, p_ratio: f64 },
}

impl SpectrumModel {
    pub fn build(&self, truncation: Truncation) -> Result<SchmidtSpectrum> {
        match *self {
            SpectrumModel::Flat => Ok(SchmidtSpectrum::flat(truncation)),
            SpectrumModel::GaussianGeometric { sigma_ell, p_ratio } => {
                SchmidtSpectrum::gaussian_geometric(truncation, sigma_ell, p_ratio)
            }
        }
    }
}

/// Where the transmission object comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectSource {
    DoubleSlit(DoubleSlitSpec),
    Pgm(PathBuf),
    Csv(PathBuf),
}

/// Fully describes one run of the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Relative phase of the |VV> amplitude, radians (pi for the calibrated
    /// state).
    pub phi: f64,
    /// Explicit analyzer-angle overrides in degrees; both or neither.
    pub theta0_deg: Option<f64>,
    pub theta1_deg: Option<f64>,
    /// Additive miscalibration applied to the solved angles, degrees.
    pub angle_offset_deg: f64,
    pub grid: GridSpec,
    pub truncation: Truncation,
    pub spectrum: SpectrumModel,
    pub detection: DetectionMode,
    pub detector: DetectorConfig,
    pub object: ObjectSource,
    /// Explicit ROIs; empty means "derive from the double slit".
    pub rois: Vec<Roi>,
    pub histogram_bins: usize,
}

/// Named parameter sets reproducing the documented operating points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Exact channel scaling, no photon noise: channels 1-3 identically zero.
    NoiseFree,
    /// Monte Carlo at the published acquisition scale (2500 frames, 25 um
    /// pixels, 1122-pixel ROI pair) with a -1 degree analyzer miscalibration
    /// and weak dark counts, qualitatively reproducing the published
    /// imperfect-visibility statistics.
    PaperNoisy,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise-free" => Ok(Preset::NoiseFree),
            "paper-noisy" => Ok(Preset::PaperNoisy),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected noise-free or paper-noisy)"
            ))),
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::NoiseFree => Self {
                alpha: 0.43,
                beta: 0.9,
                phi: std::f64::consts::PI,
                theta0_deg: None,
                theta1_deg: None,
                angle_offset_deg: 0.0,
                grid: GridSpec {
                    n: 256,
                    half_extent_mm: 0.9,
                    waist_mm: 0.189,
                },
                truncation: Truncation::new(10, 6),
                spectrum: SpectrumModel::Flat,
                detection: DetectionMode::Analytic,
                detector: DetectorConfig {
                    dark_rate: 0.0,
                    ..DetectorConfig::default()
                },
                object: ObjectSource::DoubleSlit(DoubleSlitSpec::default()),
                rois: Vec::new(),
                histogram_bins: 40,
            },
            Preset::PaperNoisy => Self {
                alpha: 0.43,
                beta: 0.9,
                phi: std::f64::consts::PI,
                theta0_deg: None,
                theta1_deg: None,
                angle_offset_deg: -1.0,
                grid: GridSpec {
                    n: 256,
                    half_extent_mm: 3.2,
                    waist_mm: 0.18,
                },
                truncation: Truncation::new(20, 14),
                spectrum: SpectrumModel::Flat,
                detection: DetectionMode::MonteCarlo,
                detector: DetectorConfig {
                    frames: 2500,
                    exposure_s: 5.0,
                    flux_scale: 0.3,
                    dark_rate: 1e-5,
                    threshold: 1,
                    seed: 1,
                },
                object: ObjectSource::DoubleSlit(DoubleSlitSpec::default()),
                rois: Vec::new(),
                histogram_bins: 40,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.phi.is_finite()) {
            return Err(Error::Config("state parameters must be finite".into()));
        }
        if self.theta0_deg.is_some() != self.theta1_deg.is_some() {
            return Err(Error::Config(
                "angle overrides require both angles.theta0_deg and angles.theta1_deg".into(),
            ));
        }
        GridSpec::new(self.grid.n, self.grid.half_extent_mm, self.grid.waist_mm)?;
        self.detector.validate()?;
        if self.histogram_bins == 0 {
            return Err(Error::Config("histogram.bins must be >= 1".into()));
        }
        for roi in &self.rois {
            roi.validate(self.grid.n)?;
        }
        if let SpectrumModel::GaussianGeometric { sigma_ell, p_ratio } = self.spectrum {
            // surface parameter errors at validation time, not mid-pipeline
            SchmidtSpectrum::gaussian_geometric(Truncation::new(1, 0), sigma_ell, p_ratio)
                .map(|_| ())?;
        }
        Ok(())
    }

    /// Parses `key = value` lines (# comments allowed) on top of `base`.
    pub fn parse_over(base: Self, text: &str) -> Result<Self> {
        let mut cfg = base;
        let mut explicit_rois: BTreeMap<usize, Roi> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply_key(key, value, &mut explicit_rois)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        if !explicit_rois.is_empty() {
            let expected: Vec<usize> = (0..explicit_rois.len()).collect();
            let got: Vec<usize> = explicit_rois.keys().copied().collect();
            if got != expected {
                return Err(Error::Config(format!(
                    "roi indices must be contiguous from 0; got {got:?}"
                )));
            }
            cfg.rois = explicit_rois.into_values().collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_file(path: &Path, base: Self) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_over(base, &text)
    }

    fn apply_key(
        &mut self,
        key: &str,
        value: &str,
        rois: &mut BTreeMap<usize, Roi>,
    ) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad {what} value `{value}`"));
        match key {
            "state.alpha" => self.alpha = parse_f64(value).ok_or_else(|| bad(key))?,
            "state.beta" => self.beta = parse_f64(value).ok_or_else(|| bad(key))?,
            "state.phi_deg" => {
                self.phi = parse_f64(value).ok_or_else(|| bad(key))?.to_radians()
            }
            "angles.theta0_deg" => self.theta0_deg = Some(parse_f64(value).ok_or_else(|| bad(key))?),
            "angles.theta1_deg" => self.theta1_deg = Some(parse_f64(value).ok_or_else(|| bad(key))?),
            "angles.offset_deg" => {
                self.angle_offset_deg = parse_f64(value).ok_or_else(|| bad(key))?
            }
            "grid.n" => self.grid.n = parse_usize(value).ok_or_else(|| bad(key))?,
            "grid.half_extent_mm" => {
                self.grid.half_extent_mm = parse_f64(value).ok_or_else(|| bad(key))?
            }
            "grid.waist_mm" => self.grid.waist_mm = parse_f64(value).ok_or_else(|| bad(key))?,
            "truncation.ell_max" => {
                self.truncation.ell_max = parse_u32(value).ok_or_else(|| bad(key))?
            }
            "truncation.p_max" => {
                self.truncation.p_max = parse_u32(value).ok_or_else(|| bad(key))?
            }
            "spectrum.model" => match value {
                "flat" => self.spectrum = SpectrumModel::Flat,
                "gaussian-geometric" => {
                    if !matches!(self.spectrum, SpectrumModel::GaussianGeometric { .. }) {
                        self.spectrum = SpectrumModel::GaussianGeometric {
                            sigma_ell: 4.0,
                            p_ratio: 0.8,
                        };
                    }
                }
                _ => return Err(bad(key)),
            },
            "spectrum.sigma_ell" => {
                let v = parse_f64(value).ok_or_else(|| bad(key))?;
                self.spectrum = match self.spectrum {
                    SpectrumModel::GaussianGeometric { p_ratio, .. } => {
                        SpectrumModel::GaussianGeometric {
                            sigma_ell: v,
                            p_ratio,
                        }
                    }
                    _ => SpectrumModel::GaussianGeometric {
                        sigma_ell: v,
                        p_ratio: 0.8,
                    },
                };
            }
            "spectrum.p_ratio" => {
                let v = parse_f64(value).ok_or_else(|| bad(key))?;
                self.spectrum = match self.spectrum {
                    SpectrumModel::GaussianGeometric { sigma_ell, .. } => {
                        SpectrumModel::GaussianGeometric {
                            sigma_ell,
                            p_ratio: v,
                        }
                    }
                    _ => SpectrumModel::GaussianGeometric {
                        sigma_ell: 4.0,
                        p_ratio: v,
                    },
                };
            }
            "detector.mode" => match value {
                "analytic" => self.detection = DetectionMode::Analytic,
                "monte-carlo" => self.detection = DetectionMode::MonteCarlo,
                _ => return Err(bad(key)),
            },
            "detector.frames" => self.detector.frames = parse_u32(value).ok_or_else(|| bad(key))?,
            "detector.exposure_s" => {
                self.detector.exposure_s = parse_f64(value).ok_or_else(|| bad(key))?
            }
            "detector.flux_scale" => {
                self.detector.flux_scale = parse_f64(value).ok_or_else(|| bad(key))?
            }
            "detector.dark_rate" => {
                self.detector.dark_rate = parse_f64(value).ok_or_else(|| bad(key))?
            }
            "detector.threshold" => {
                self.detector.threshold = parse_u32(value).ok_or_else(|| bad(key))?
            }
            "detector.seed" => {
                self.detector.seed = value
                    .parse::<u64>()
                    .map_err(|_| bad(key))?
            }
            "object.kind" => match value {
                "double-slit" => {
                    if !matches!(self.object, ObjectSource::DoubleSlit(_)) {
                        self.object = ObjectSource::DoubleSlit(DoubleSlitSpec::default());
                    }
                }
                "pgm" => self.object = ObjectSource::Pgm(PathBuf::new()),
                "csv" => self.object = ObjectSource::Csv(PathBuf::new()),
                _ => return Err(bad(key)),
            },
            "object.path" => match &mut self.object {
                ObjectSource::Pgm(p) | ObjectSource::Csv(p) => *p = PathBuf::from(value),
                ObjectSource::DoubleSlit(_) => {
                    return Err(Error::Config(
                        "object.path requires object.kind = pgm or csv (set kind first)".into(),
                    ))
                }
            },
            "object.slit_width_um" => {
                self.slit_mut()?.slit_width_um = parse_f64(value).ok_or_else(|| bad(key))?
            }
            "object.slit_height_um" => {
                self.slit_mut()?.slit_height_um = parse_f64(value).ok_or_else(|| bad(key))?
            }
            "object.separation_um" => {
                self.slit_mut()?.separation_um = parse_f64(value).ok_or_else(|| bad(key))?
            }
            "histogram.bins" => {
                self.histogram_bins = parse_usize(value).ok_or_else(|| bad(key))?
            }
            _ => {
                if let Some(rest) = key.strip_prefix("roi.") {
                    let idx: usize = rest
                        .parse()
                        .map_err(|_| Error::Config(format!("unknown key `{key}`")))?;
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 4 {
                        return Err(Error::Config(format!(
                            "roi.{idx} must be `x0,y0,width,height`"
                        )));
                    }
                    let nums: Option<Vec<usize>> =
                        parts.iter().map(|p| p.parse().ok()).collect();
                    let nums = nums.ok_or_else(|| bad(key))?;
                    rois.insert(
                        idx,
                        Roi {
                            x0: nums[0],
                            y0: nums[1],
                            width: nums[2],
                            height: nums[3],
                        },
                    );
                } else {
                    return Err(Error::Config(format!("unknown key `{key}`")));
                }
            }
        }
        Ok(())
    }

    fn slit_mut(&mut self) -> Result<&mut DoubleSlitSpec> {
        match &mut self.object {
            ObjectSource::DoubleSlit(spec) => Ok(spec),
            _ => Err(Error::Config(
                "slit geometry keys require object.kind = double-slit".into(),
            )),
        }
    }

    /// Canonical serialization: sorted `key = value` lines. Parsing the
    /// output over the same base reproduces the config, and serialization is
    /// idempotent.
    pub fn serialize(&self) -> String {
        let mut entries: Vec<(String, String)> = vec![
            ("angles.offset_deg".into(), fmt_f64(self.angle_offset_deg)),
            (
                "detector.dark_rate".into(),
                fmt_f64(self.detector.dark_rate),
            ),
            (
                "detector.exposure_s".into(),
                fmt_f64(self.detector.exposure_s),
            ),
            (
                "detector.flux_scale".into(),
                fmt_f64(self.detector.flux_scale),
            ),
            ("detector.frames".into(), self.detector.frames.to_string()),
            ("detector.mode".into(), self.detection.to_string()),
            ("detector.seed".into(), self.detector.seed.to_string()),
            (
                "detector.threshold".into(),
                self.detector.threshold.to_string(),
            ),
            (
                "grid.half_extent_mm".into(),
                fmt_f64(self.grid.half_extent_mm),
            ),
            ("grid.n".into(), self.grid.n.to_string()),
            ("grid.waist_mm".into(), fmt_f64(self.grid.waist_mm)),
            ("histogram.bins".into(), self.histogram_bins.to_string()),
            (
                "truncation.ell_max".into(),
                self.truncation.ell_max.to_string(),
            ),
            ("truncation.p_max".into(), self.truncation.p_max.to_string()),
            ("state.alpha".into(), fmt_f64(self.alpha)),
            ("state.beta".into(), fmt_f64(self.beta)),
            ("state.phi_deg".into(), fmt_f64(self.phi.to_degrees())),
        ];
        if let Some(t0) = self.theta0_deg {
            entries.push(("angles.theta0_deg".into(), fmt_f64(t0)));
        }
        if let Some(t1) = self.theta1_deg {
            entries.push(("angles.theta1_deg".into(), fmt_f64(t1)));
        }
        match self.spectrum {
            SpectrumModel::Flat => entries.push(("spectrum.model".into(), "flat".into())),
            SpectrumModel::GaussianGeometric { sigma_ell, p_ratio } => {
                entries.push(("spectrum.model".into(), "gaussian-geometric".into()));
                entries.push(("spectrum.sigma_ell".into(), fmt_f64(sigma_ell)));
                entries.push(("spectrum.p_ratio".into(), fmt_f64(p_ratio)));
            }
        }
        match &self.object {
            ObjectSource::DoubleSlit(spec) => {
                entries.push(("object.kind".into(), "double-slit".into()));
                entries.push((
                    "object.slit_width_um".into(),
                    fmt_f64(spec.slit_width_um),
                ));
                entries.push((
                    "object.slit_height_um".into(),
                    fmt_f64(spec.slit_height_um),
                ));
                entries.push((
                    "object.separation_um".into(),
                    fmt_f64(spec.separation_um),
                ));
            }
            ObjectSource::Pgm(path) => {
                entries.push(("object.kind".into(), "pgm".into()));
                entries.push(("object.path".into(), path.display().to_string()));
            }
            ObjectSource::Csv(path) => {
                entries.push(("object.kind".into(), "csv".into()));
                entries.push(("object.path".into(), path.display().to_string()));
            }
        }
        for (i, roi) in self.rois.iter().enumerate() {
            entries.push((
                format!("roi.{i}"),
                format!("{},{},{},{}", roi.x0, roi.y0, roi.width, roi.height),
            ));
        }
        entries.sort();
        let mut out = String::new();
        for (k, v) in entries {
            out.push_str(&k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_u32(s: &str) -> Option<u32> {
    s.parse::<u32>().ok()
}

fn parse_usize(s: &str) -> Option<usize> {
    s.parse::<usize>().ok()
}

fn fmt_f64(v: f64) -> String {
    // shortest round-trip representation; stable across runs
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in [Preset::NoiseFree, Preset::PaperNoisy] {
            ExperimentConfig::preset(p).validate().unwrap();
        }
    }

    #[test]
    fn serialize_parse_round_trip() {
        let cfg = ExperimentConfig::preset(Preset::PaperNoisy);
        let text = cfg.serialize();
        let back =
            ExperimentConfig::parse_over(ExperimentConfig::preset(Preset::NoiseFree), &text)
                .unwrap();
        assert_eq!(back, cfg);
        // serialize(parse(text)) is idempotent
        assert_eq!(back.serialize(), text);
    }

    #[test]
    fn unknown_keys_rejected() {
        let base = ExperimentConfig::preset(Preset::NoiseFree);
        let err = ExperimentConfig::parse_over(base, "state.gamma = 1\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let base = ExperimentConfig::preset(Preset::NoiseFree);
        let cfg = ExperimentConfig::parse_over(
            base,
            "# a comment\n\nstate.alpha = 0.5 # trailing\nstate.beta = 0.866\n",
        )
        .unwrap();
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.beta, 0.866);
    }

    #[test]
    fn explicit_rois_parse_and_serialize() {
        let base = ExperimentConfig::preset(Preset::NoiseFree);
        let cfg = ExperimentConfig::parse_over(
            base,
            "roi.0 = 10, 20, 5, 6\nroi.1 = 40,20,5,6\n",
        )
        .unwrap();
        assert_eq!(cfg.rois.len(), 2);
        assert_eq!(cfg.rois[0].x0, 10);
        let text = cfg.serialize();
        assert!(text.contains("roi.0 = 10,20,5,6"));
    }

    #[test]
    fn gapped_roi_indices_rejected() {
        let base = ExperimentConfig::preset(Preset::NoiseFree);
        assert!(ExperimentConfig::parse_over(base, "roi.1 = 0,0,2,2\n").is_err());
    }

    #[test]
    fn single_angle_override_rejected() {
        let base = ExperimentConfig::preset(Preset::NoiseFree);
        assert!(ExperimentConfig::parse_over(base, "angles.theta0_deg = 30\n").is_err());
    }

    #[test]
    fn object_path_requires_file_kind() {
        let base = ExperimentConfig::preset(Preset::NoiseFree);
        assert!(ExperimentConfig::parse_over(base.clone(), "object.path = x.pgm\n").is_err());
        let cfg = ExperimentConfig::parse_over(
            base,
            "object.kind = pgm\nobject.path = x.pgm\nroi.0 = 0,0,4,4\n",
        )
        .unwrap();
        assert_eq!(cfg.object, ObjectSource::Pgm(PathBuf::from("x.pgm")));
    }

    #[test]
    fn spectrum_keys_build_gaussian_geometric() {
        let base = ExperimentConfig::preset(Preset::NoiseFree);
        let cfg = ExperimentConfig::parse_over(
            base,
            "spectrum.model = gaussian-geometric\nspectrum.sigma_ell = 3\nspectrum.p_ratio = 0.7\n",
        )
        .unwrap();
        assert_eq!(
            cfg.spectrum,
            SpectrumModel::GaussianGeometric {
                sigma_ell: 3.0,
                p_ratio: 0.7
            }
        );
    }
}
