//! End-to-end orchestration: calibrate -> image -> acquire -> analyze, plus
//! the on-disk artifact bundle.
//!
//! Every artifact is a pure function of (config, seed): no timestamps, fixed
//! file order, shortest-round-trip float formatting. Two runs with the same
//! inputs produce byte-identical bundles regardless of thread scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::analysis::{
    cnr, hardy_from_images, s_histogram, HardyReport, Histogram, ObjectMask, Roi,
};
use crate::detector::{
    background_image, simulate_acquisition_scaled, subtract_background, GrayImage, Provenance,
};
use crate::error::{Error, Result};
use crate::io::config::{DetectionMode, ExperimentConfig, ObjectSource};
use crate::io::csvio::{write_cnr_table, write_histogram, write_s_map};
use crate::io::load::load_object;
use crate::io::pgm::{read_gray_image, write_gray_image};
use crate::polarization::{
    channel_settings, joint_probability, solve_hardy_angles, HardyAngles, MeasurementSetting,
    PolarizationState,
};
use crate::spatial::{
    decompose_object, ghost_intensity, idler_state, lg_mode_field, make_double_slit, LGIndex,
    ObjectField,
};

/// Tolerance on |phi - pi| under which the closed-form angle solver applies.
const PHI_PI_TOL: f64 = 1e-9;

/// Bundle file names (without the sidecars).
pub const CHANNEL_FILES: [&str; 4] = [
    "channel_1.pgm",
    "channel_2.pgm",
    "channel_3.pgm",
    "channel_4.pgm",
];
pub const HH_FILE: &str = "hh.pgm";
pub const VV_FILE: &str = "vv.pgm";
pub const REPORT_FILE: &str = "report.txt";
pub const CNR_FILE: &str = "cnr.csv";
pub const S_MAP_FILE: &str = "s_map.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Everything derived from the config before any detection happens.
pub struct Setup {
    pub state: PolarizationState,
    pub angles: HardyAngles,
    pub object: ObjectField,
    pub mask: ObjectMask,
    pub rois: Vec<Roi>,
    /// Ghost intensity of the idler arm (common spatial factor).
    pub spatial_image: Array2<f64>,
    /// Joint probabilities of the four Hardy channels.
    pub channel_probabilities: [f64; 4],
    pub p_hh: f64,
    pub p_vv: f64,
    /// Fraction of the object energy captured by the truncation.
    pub captured_fraction: f64,
    pub warnings: Vec<String>,
}

/// The six per-channel gray images.
pub struct ChannelImages {
    pub channels: [GrayImage; 4],
    pub hh: GrayImage,
    pub vv: GrayImage,
}

impl ChannelImages {
    pub fn iter_named(&self) -> impl Iterator<Item = (&'static str, &GrayImage)> {
        self.channels
            .iter()
            .enumerate()
            .map(|(i, img)| (CHANNEL_FILES[i], img))
            .chain([(HH_FILE, &self.hh), (VV_FILE, &self.vv)])
    }
}

/// Raw, background, and subtracted image sets from an acquisition.
pub struct AcquiredImages {
    pub backgrounds: ChannelImages,
    pub subtracted: ChannelImages,
}

/// Analysis outputs.
pub struct AnalysisOutput {
    pub report: HardyReport,
    pub histogram: Histogram,
    /// (label, CNR) for channels 1-4 and the HH/VV references; None when the
    /// ratio is undefined (zero variance in both classes).
    pub cnr: Vec<(&'static str, Option<f64>)>,
}

/// Summary returned by [`run_pipeline`].
pub struct PipelineSummary {
    pub report: HardyReport,
    pub histogram: Histogram,
    pub cnr: Vec<(&'static str, Option<f64>)>,
    pub channel_probabilities: [f64; 4],
    pub p_hh: f64,
    pub p_vv: f64,
    pub angles: HardyAngles,
    pub warnings: Vec<String>,
    pub out_dir: PathBuf,
}

/// Resolves state, angles, object, ROIs, and the spatial ghost image.
pub fn prepare(config: &ExperimentConfig) -> Result<Setup> {
    config.validate()?;
    let mut warnings = Vec::new();

    let state = PolarizationState::from_hardy(config.alpha, config.beta, config.phi)?;
    let angles = resolve_angles(config)?;

    let (object, mut rois) = match &config.object {
        ObjectSource::DoubleSlit(spec) => {
            let ds = make_double_slit(&config.grid, *spec)?;
            if ds.merged {
                warnings.push("double slit separation is zero: slits merged".into());
            }
            (ds.object, ds.rois.to_vec())
        }
        ObjectSource::Pgm(path) => (load_object(path, &config.grid)?, Vec::new()),
        ObjectSource::Csv(path) => (load_object(path, &config.grid)?, Vec::new()),
    };
    if !config.rois.is_empty() {
        rois = config.rois.clone();
    }
    if rois.is_empty() {
        return Err(Error::InvalidRoi(
            "file objects need explicit roi.N entries".into(),
        ));
    }
    for roi in &rois {
        roi.validate(config.grid.n)?;
    }
    let mask = ObjectMask::from_object(&object);

    if object.is_empty() {
        warnings.push("object transmission is identically zero".into());
    }
    let corner = lg_mode_field(
        LGIndex::new(config.truncation.ell_max as i32, config.truncation.p_max),
        &config.grid,
    );
    if corner.spills {
        warnings.push(format!(
            "mode (l={}, p={}) spills the field of view (norm deficit {:.2}%)",
            config.truncation.ell_max,
            config.truncation.p_max,
            100.0 * corner.norm_deficit
        ));
    }

    let decomposition = decompose_object(&object, config.truncation);
    let captured_fraction = decomposition.captured_fraction();
    let spectrum = config.spectrum.build(config.truncation)?;
    let idler = idler_state(&decomposition, &spectrum)?;
    let spatial_image = ghost_intensity(&idler, &config.grid);

    let mut channel_probabilities = [0.0; 4];
    for (i, p) in channel_probabilities.iter_mut().enumerate() {
        let (sig, idl) = channel_settings(i as u8 + 1, &angles)?;
        *p = joint_probability(&state, sig, idl)?;
    }
    let h = MeasurementSetting::unbarred(0.0);
    let v = MeasurementSetting::unbarred(std::f64::consts::FRAC_PI_2);
    let p_hh = joint_probability(&state, h, h)?;
    let p_vv = joint_probability(&state, v, v)?;

    Ok(Setup {
        state,
        angles,
        object,
        mask,
        rois,
        spatial_image,
        channel_probabilities,
        p_hh,
        p_vv,
        captured_fraction,
        warnings,
    })
}

fn resolve_angles(config: &ExperimentConfig) -> Result<HardyAngles> {
    if let (Some(t0), Some(t1)) = (config.theta0_deg, config.theta1_deg) {
        return Ok(HardyAngles {
            theta0: t0.to_radians(),
            theta1: t1.to_radians(),
        });
    }
    let phi_dist = (config.phi - std::f64::consts::PI).abs();
    if phi_dist > PHI_PI_TOL {
        return Err(Error::UnsupportedPhase { phi: config.phi });
    }
    let solved = solve_hardy_angles(config.alpha, config.beta)?;
    let offset = config.angle_offset_deg.to_radians();
    Ok(HardyAngles {
        theta0: solved.theta0 + offset,
        theta1: solved.theta1 + offset,
    })
}

/// Per-channel rate maps and the shared normalization reference.
///
/// The channel scaling is applied before the flux normalization, and the
/// normalization maximum is taken from the HH+VV sum, so cross-channel count
/// ratios survive detection.
fn rate_maps(setup: &Setup) -> ([Array2<f64>; 6], f64) {
    let scale = |p: f64| setup.spatial_image.mapv(|v| v * p);
    let maps = [
        scale(setup.channel_probabilities[0]),
        scale(setup.channel_probabilities[1]),
        scale(setup.channel_probabilities[2]),
        scale(setup.channel_probabilities[3]),
        scale(setup.p_hh),
        scale(setup.p_vv),
    ];
    let reference_max = setup
        .spatial_image
        .iter()
        .map(|&v| v * (setup.p_hh + setup.p_vv))
        .fold(0.0f64, f64::max);
    (maps, reference_max)
}

/// Noise-free expected linear counts (frames * per-frame rate), with zero
/// backgrounds.
pub fn analytic_images(setup: &Setup, config: &ExperimentConfig) -> AcquiredImages {
    let (maps, reference_max) = rate_maps(setup);
    let flux = config.detector.flux_scale;
    let frames = config.detector.frames as f64;
    let scale = if reference_max > 0.0 {
        flux / reference_max
    } else {
        0.0
    };
    let n = config.grid.n;
    let zero = || GrayImage {
        data: Array2::zeros((n, n)),
        provenance: Provenance::Background,
    };
    let to_gray = |m: &Array2<f64>| GrayImage {
        data: m.mapv(|v| v * scale * frames),
        provenance: Provenance::Raw,
    };
    let raw: Vec<GrayImage> = maps.iter().map(to_gray).collect();
    let backgrounds = ChannelImages {
        channels: [zero(), zero(), zero(), zero()],
        hh: zero(),
        vv: zero(),
    };
    let subtracted = ChannelImages {
        channels: [
            subtract_background(&raw[0], &backgrounds.channels[0]).expect("same dims"),
            subtract_background(&raw[1], &backgrounds.channels[1]).expect("same dims"),
            subtract_background(&raw[2], &backgrounds.channels[2]).expect("same dims"),
            subtract_background(&raw[3], &backgrounds.channels[3]).expect("same dims"),
        ],
        hh: subtract_background(&raw[4], &backgrounds.hh).expect("same dims"),
        vv: subtract_background(&raw[5], &backgrounds.vv).expect("same dims"),
    };
    AcquiredImages {
        backgrounds,
        subtracted,
    }
}

/// Monte Carlo acquisition: each of the six images and its background run on
/// an independent derived stream of the configured seed.
pub fn monte_carlo_images(setup: &Setup, config: &ExperimentConfig) -> Result<AcquiredImages> {
    let (maps, reference_max) = rate_maps(setup);
    let n = config.grid.n;
    let mut raw = Vec::with_capacity(6);
    let mut bgs = Vec::with_capacity(6);
    for (tag, map) in maps.iter().enumerate() {
        let raw_cfg = config.detector.with_stream(tag as u64);
        raw.push(simulate_acquisition_scaled(map, reference_max, &raw_cfg)?);
        let bg_cfg = config.detector.with_stream(tag as u64 + 8);
        bgs.push(background_image(n, &bg_cfg)?);
    }
    let sub: Vec<GrayImage> = raw
        .iter()
        .zip(bgs.iter())
        .map(|(r, b)| subtract_background(r, b))
        .collect::<Result<_>>()?;
    let mut bgs = bgs.into_iter();
    let mut sub = sub.into_iter();
    let next4 = |it: &mut dyn Iterator<Item = GrayImage>| {
        [
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        ]
    };
    Ok(AcquiredImages {
        backgrounds: ChannelImages {
            channels: next4(&mut bgs),
            hh: bgs.next().unwrap(),
            vv: bgs.next().unwrap(),
        },
        subtracted: ChannelImages {
            channels: next4(&mut sub),
            hh: sub.next().unwrap(),
            vv: sub.next().unwrap(),
        },
    })
}

/// Detection stage for the configured mode.
pub fn acquire(setup: &Setup, config: &ExperimentConfig) -> Result<AcquiredImages> {
    match config.detection {
        DetectionMode::Analytic => Ok(analytic_images(setup, config)),
        DetectionMode::MonteCarlo => monte_carlo_images(setup, config),
    }
}

/// CNR table, Hardy report, and S histogram from subtracted images.
pub fn analyze(
    images: &ChannelImages,
    mask: &ObjectMask,
    rois: &[Roi],
    bins: usize,
) -> Result<AnalysisOutput> {
    let report = hardy_from_images(&images.channels, &images.hh, &images.vv, rois)?;
    let histogram = s_histogram(&report, bins)?;
    let labels = ["channel_1", "channel_2", "channel_3", "channel_4", "hh", "vv"];
    let mut table = Vec::new();
    for (label, img) in labels.iter().zip(
        images
            .channels
            .iter()
            .chain([&images.hh, &images.vv]),
    ) {
        let value = match cnr(&img.data, mask) {
            Ok(v) => Some(v),
            Err(Error::CnrUndefined) => None,
            Err(e) => return Err(e),
        };
        table.push((*label, value));
    }
    Ok(AnalysisOutput {
        report,
        histogram,
        cnr: table,
    })
}

/// Runs the whole chain and writes the artifact bundle under `out_dir`.
pub fn run_pipeline(config: &ExperimentConfig, out_dir: &Path) -> Result<PipelineSummary> {
    let setup = prepare(config)?;
    let acquired = acquire(&setup, config)?;
    let analysis = analyze(&acquired.subtracted, &setup.mask, &setup.rois, config.histogram_bins)?;

    fs::create_dir_all(out_dir)?;
    for (name, img) in acquired.subtracted.iter_named() {
        write_gray_image(&out_dir.join(name), img)?;
    }
    for (name, img) in acquired.backgrounds.iter_named() {
        write_gray_image(&out_dir.join(format!("background_{name}")), img)?;
    }
    write_report(&out_dir.join(REPORT_FILE), &analysis.report)?;
    write_cnr_table(&out_dir.join(CNR_FILE), &analysis.cnr)?;
    write_s_map(&out_dir.join(S_MAP_FILE), &analysis.report.s_map)?;
    write_histogram(&out_dir.join(HISTOGRAM_FILE), &analysis.histogram)?;
    fs::write(
        out_dir.join(MANIFEST_FILE),
        manifest_text(config, &setup),
    )?;

    Ok(PipelineSummary {
        report: analysis.report,
        histogram: analysis.histogram,
        cnr: analysis.cnr,
        channel_probabilities: setup.channel_probabilities,
        p_hh: setup.p_hh,
        p_vv: setup.p_vv,
        angles: setup.angles,
        warnings: setup.warnings,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Reads the six subtracted channel images back from a bundle directory.
pub fn read_channel_images(dir: &Path) -> Result<ChannelImages> {
    let read = |name: &str| read_gray_image(&dir.join(name));
    Ok(ChannelImages {
        channels: [
            read(CHANNEL_FILES[0])?,
            read(CHANNEL_FILES[1])?,
            read(CHANNEL_FILES[2])?,
            read(CHANNEL_FILES[3])?,
        ],
        hh: read(HH_FILE)?,
        vv: read(VV_FILE)?,
    })
}

fn write_report(path: &Path, report: &HardyReport) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("p_00 = {}\n", report.p_00));
    out.push_str(&format!("p_b01 = {}\n", report.p_b01));
    out.push_str(&format!("p_1b0 = {}\n", report.p_1b0));
    out.push_str(&format!("p_11 = {}\n", report.p_11));
    out.push_str(&format!("s_value = {}\n", report.s_value));
    out.push_str(&format!("positive_fraction = {}\n", report.positive_fraction));
    out.push_str(&format!("roi_pixel_count = {}\n", report.roi_pixel_count));
    out.push_str(&format!("included_pixels = {}\n", report.s_map.len()));
    out.push_str(&format!("zero_total_pixels = {}\n", report.zero_total.len()));
    fs::write(path, out)?;
    Ok(())
}

/// Manifest: the canonical config plus every value the pipeline resolved.
fn manifest_text(config: &ExperimentConfig, setup: &Setup) -> String {
    let mut out = config.serialize();
    let mut resolved: Vec<(String, String)> = vec![
        (
            "resolved.theta0_deg".into(),
            format!("{}", setup.angles.theta0.to_degrees()),
        ),
        (
            "resolved.theta1_deg".into(),
            format!("{}", setup.angles.theta1.to_degrees()),
        ),
        (
            "resolved.theta0_bar_deg".into(),
            format!("{}", setup.angles.theta0_barred().to_degrees()),
        ),
        (
            "resolved.theta1_bar_deg".into(),
            format!("{}", setup.angles.theta1_barred().to_degrees()),
        ),
        (
            "resolved.pitch_um".into(),
            format!("{}", setup.object.grid.pitch_mm() * 1000.0),
        ),
        (
            "resolved.captured_energy_fraction".into(),
            format!("{}", setup.captured_fraction),
        ),
        ("resolved.p_hh".into(), format!("{}", setup.p_hh)),
        ("resolved.p_vv".into(), format!("{}", setup.p_vv)),
    ];
    for (i, p) in setup.channel_probabilities.iter().enumerate() {
        resolved.push((format!("resolved.p_channel_{}", i + 1), format!("{p}")));
    }
    for (i, roi) in setup.rois.iter().enumerate() {
        resolved.push((
            format!("resolved.roi.{i}"),
            format!("{},{},{},{}", roi.x0, roi.y0, roi.width, roi.height),
        ));
    }
    for (i, w) in setup.warnings.iter().enumerate() {
        resolved.push((format!("resolved.warning.{i}"), w.clone()));
    }
    resolved.sort();
    for (k, v) in resolved {
        out.push_str(&k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    }
    out
}
