//! Stage sequencing over run manifests.
//!
//! Each manifest is processed into `<out>/<image_id>/`. Stages read their
//! inputs from the manifest, write fixed file names into that directory and
//! point the manifest at what they wrote, so later stages (or later runs)
//! pick the outputs up. The final manifest is saved as `manifest.json` with
//! output paths relative to its directory and inputs absolute.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::affinity::{build_affinity_map, build_multicut_graph, AffinityMap, PatchGrid};
use crate::error::{Error, Result};
use crate::mask::{PatchMask, PixelMask};
use crate::maskfilter::{filter_report, select_top_q, ScoredMask};
use crate::multicut::{describe_candidates, is_foreground, multicut_objective, partition_to_masks, solve_multicut};
use crate::ndio::{read_array, read_image_ppm, write_array, write_image_ppm, write_manifest, NdioError, RunManifest};
use crate::ndio::{ArrayFile, HyperParams};
use crate::selftrain::{adaptive_loss, score_batch, weight_map, CheckpointMaskSet, TaggedMask};
use crate::sgmloss::{build_affinity_tree, field_to_array, global_affinity, sgm_loss_with, ProbMap, SgmOptions};
use crate::superpixel::{ingest_label_array, snic_superpixels, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Affinity,
    Multicut,
    Filter,
    Superpixel,
    Sgm,
    Selftrain,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Affinity,
        Stage::Multicut,
        Stage::Filter,
        Stage::Superpixel,
        Stage::Sgm,
        Stage::Selftrain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Affinity => "affinity",
            Stage::Multicut => "multicut",
            Stage::Filter => "filter",
            Stage::Superpixel => "superpixel",
            Stage::Sgm => "sgm",
            Stage::Selftrain => "selftrain",
        }
    }

    /// Stages whose outputs this stage consumes. When both are requested in
    /// one run, the prerequisite must come first.
    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Affinity | Stage::Superpixel | Stage::Selftrain => &[],
            Stage::Multicut => &[Stage::Affinity],
            Stage::Filter => &[Stage::Affinity, Stage::Multicut],
            Stage::Sgm => &[Stage::Multicut, Stage::Filter, Stage::Superpixel],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown stage {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Overrides the hyperparameters of every manifest when set.
    pub hyperparams: Option<HyperParams>,
    pub k_target: usize,
    pub compactness: f64,
    pub stages: Vec<Stage>,
    /// Reserved. Every stage is deterministic.
    pub seed: u64,
    pub sgm: SgmOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            hyperparams: None,
            k_target: 300,
            compactness: 10.0,
            stages: Stage::ALL.to_vec(),
            seed: 0,
            sgm: SgmOptions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn with_stages(mut self, stages: Vec<Stage>) -> Self {
        self.stages = stages;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("pipeline config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, &stage) in self.stages.iter().enumerate() {
            if !seen.insert(stage) {
                return Err(Error::InvalidInput(format!("stage {stage} listed twice")));
            }
            for &pre in stage.prerequisites() {
                if self.stages[i + 1..].contains(&pre) {
                    return Err(Error::StageDependencyViolation {
                        stage: stage.name(),
                        requires: pre.name(),
                    });
                }
            }
        }
        if self.k_target == 0 {
            return Err(Error::InvalidInput("k_target must be positive".into()));
        }
        if !(self.compactness > 0.0 && self.compactness.is_finite()) {
            return Err(Error::InvalidInput("compactness must be positive".into()));
        }
        if let Some(hp) = &self.hyperparams {
            hp.validate()?;
        }
        Ok(())
    }
}

/// Result of one stage: the updated manifest plus a JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub manifest: RunManifest,
    pub summary: Value,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(NdioError::io(path, e))
}

fn require<'a>(stage: Stage, input: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
    match path {
        Some(p) if p.is_file() => Ok(p),
        Some(p) => Err(Error::MissingInput {
            stage: stage.name(),
            input: format!("{input} ({})", p.display()),
        }),
        None => Err(Error::MissingInput {
            stage: stage.name(),
            input: input.to_string(),
        }),
    }
}

fn require_all<'a>(stage: Stage, input: &str, paths: &'a [PathBuf]) -> Result<&'a [PathBuf]> {
    if paths.is_empty() {
        return Err(Error::MissingInput {
            stage: stage.name(),
            input: input.to_string(),
        });
    }
    for p in paths {
        require(stage, input, &Some(p.clone()))?;
    }
    Ok(paths)
}

fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn load_image(path: &Path) -> Result<RgbImage> {
    RgbImage::from_array(&read_image_ppm(path)?)
}

fn load_patch_masks(paths: &[PathBuf]) -> Result<Vec<PatchMask>> {
    let mut masks = Vec::new();
    for p in paths {
        masks.extend(PatchMask::stack_from_array(&read_array(p)?)?);
    }
    Ok(masks)
}

/// Reads mask files as `[M,H,W]` stacks or single `[H,W]` masks.
fn load_pixel_masks(paths: &[PathBuf], target: Option<(usize, usize)>) -> Result<Vec<PixelMask>> {
    let mut masks = Vec::new();
    for p in paths {
        let arr = read_array(p)?;
        let arr = match arr.shape() {
            [h, w] => ArrayFile::new(vec![1, *h, *w], arr.data().clone())?,
            _ => arr,
        };
        masks.extend(PixelMask::stack_from_array(&arr, target)?);
    }
    Ok(masks)
}

fn run_affinity(manifest: &mut RunManifest, dir: &Path) -> Result<Value> {
    let features = require(Stage::Affinity, "features", &manifest.features)?;
    let grid = PatchGrid::from_array(&read_array(features)?)?;
    let amap = build_affinity_map(&grid)?;
    let path = dir.join("affinity.npy");
    write_array(&amap.to_array(), &path)?;
    manifest.affinity = Some(path);
    let mean = amap.values().iter().map(|&v| v as f64).sum::<f64>() / amap.values().len().max(1) as f64;
    Ok(json!({
        "n": grid.n(),
        "degenerate_patches": grid.degenerate_patches().len(),
        "mean_affinity": mean,
    }))
}

fn run_multicut(manifest: &mut RunManifest, dir: &Path) -> Result<Value> {
    let features = require(Stage::Multicut, "features", &manifest.features)?;
    let grid = PatchGrid::from_array(&read_array(features)?)?;
    let graph = build_multicut_graph(&grid, manifest.hyperparams.tau_cut)?;
    let partition = solve_multicut(&graph);
    let objective = multicut_objective(&graph, &partition)?;
    let masks = partition_to_masks(&partition, grid.n())?;
    let info = describe_candidates(&masks);
    let path = dir.join("candidates.npy");
    write_array(&PatchMask::stack_to_array(grid.n(), &masks), &path)?;
    write_json(&info, &dir.join("candidates.json"))?;
    manifest.masks = vec![path];
    Ok(json!({
        "clusters": partition.k(),
        "foreground": info.iter().filter(|c| c.foreground).count(),
        "objective": objective,
    }))
}

fn run_filter(manifest: &mut RunManifest, dir: &Path) -> Result<Value> {
    let affinity = require(Stage::Filter, "affinity", &manifest.affinity)?;
    let amap = AffinityMap::from_array(&read_array(affinity)?)?;
    let masks = load_patch_masks(require_all(Stage::Filter, "masks", &manifest.masks)?)?;
    let total = masks.len();
    let (indices, foreground): (Vec<usize>, Vec<PatchMask>) =
        masks.into_iter().enumerate().filter(|(_, m)| is_foreground(m)).unzip();
    let scored = foreground
        .into_iter()
        .map(|m| ScoredMask::rate(m, &amap))
        .collect::<Result<Vec<_>>>()?;
    let scored = select_top_q(scored, manifest.hyperparams.q_percent)?;
    let report = filter_report(&indices, &scored);
    let kept: Vec<PatchMask> = scored.into_iter().filter(|s| s.kept).map(|s| s.mask).collect();
    write_json(&report, &dir.join("filter_report.json"))?;
    let path = dir.join("filtered.npy");
    write_array(&PatchMask::stack_to_array(amap.n(), &kept), &path)?;
    manifest.masks = vec![path];
    Ok(json!({
        "candidates": total,
        "background": total - report.len(),
        "rated": report.len(),
        "kept": kept.len(),
    }))
}

fn run_superpixel(cfg: &PipelineConfig, manifest: &mut RunManifest, dir: &Path) -> Result<Value> {
    let image = load_image(require(Stage::Superpixel, "image", &manifest.image)?)?;
    let (seg, source) = match &manifest.superpixels {
        Some(_) => {
            let labels = require(Stage::Superpixel, "superpixels", &manifest.superpixels)?;
            (ingest_label_array(&read_array(labels)?, &image)?, "ingested")
        }
        None => (snic_superpixels(&image, cfg.k_target, cfg.compactness)?, "snic"),
    };
    let path = dir.join("superpixels.npy");
    write_array(&seg.labels_array(), &path)?;
    write_json(&seg.stats_json(), &dir.join("superpixels.json"))?;
    manifest.superpixels = Some(path);
    Ok(json!({ "k": seg.k(), "source": source }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgmRecord {
    pub mask_index: usize,
    pub hard: f64,
    pub soft: f64,
    pub total: f64,
    pub n_s: usize,
    pub flags: Vec<String>,
}

fn run_sgm(cfg: &PipelineConfig, manifest: &mut RunManifest, dir: &Path) -> Result<Value> {
    let pm = ProbMap::from_array(&read_array(require(Stage::Sgm, "prob_map", &manifest.prob_map)?)?)?;
    let image = load_image(require(Stage::Sgm, "image", &manifest.image)?)?;
    let labels = read_array(require(Stage::Sgm, "superpixels", &manifest.superpixels)?)?;
    let seg = ingest_label_array(&labels, &image)?;
    let masks = load_pixel_masks(require_all(Stage::Sgm, "masks", &manifest.masks)?, Some(pm.dims()))?;
    let hp = &manifest.hyperparams;
    let psi = global_affinity(&build_affinity_tree(&seg)?, hp.alpha2)?;
    let reports = masks
        .par_iter()
        .map(|m| sgm_loss_with(&pm, m, &seg, &psi, hp.alpha1, cfg.sgm))
        .collect::<Result<Vec<_>>>()?;
    let (h, w) = pm.dims();
    let mut records = Vec::with_capacity(reports.len());
    for (i, r) in reports.iter().enumerate() {
        write_array(&field_to_array(h, w, &r.grad), dir.join(format!("sgm_grad_{i:03}.npy")))?;
        let s = r.summary();
        records.push(SgmRecord {
            mask_index: i,
            hard: s.hard,
            soft: s.soft,
            total: s.total,
            n_s: s.n_s,
            flags: s.flags,
        });
    }
    write_json(&records, &dir.join("sgm_report.json"))?;
    let mean_total = records.iter().map(|r| r.total).sum::<f64>() / records.len().max(1) as f64;
    Ok(json!({ "masks": records.len(), "mean_total": mean_total }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRecord {
    pub mask_index: usize,
    pub value: f64,
}

/// Stability scores and weight maps for the masks of the last checkpoint,
/// plus the adaptive loss when `with_loss` is set.
pub fn run_selftrain(manifest: &mut RunManifest, dir: &Path, with_loss: bool) -> Result<Value> {
    let stage = Stage::Selftrain;
    let hp = manifest.hyperparams;
    let checkpoints = require_all(stage, "checkpoints", &manifest.checkpoints)?;
    if checkpoints.len() != hp.e_checkpoints {
        return Err(Error::InvalidInput(format!(
            "expected {} checkpoint mask sets, manifest lists {}",
            hp.e_checkpoints,
            checkpoints.len()
        )));
    }
    let pm = if with_loss {
        Some(ProbMap::from_array(&read_array(require(stage, "prob_map", &manifest.prob_map)?)?)?)
    } else {
        None
    };
    let target = pm.as_ref().map(|p| p.dims());
    let id = manifest.image_id.as_str();
    let mut sets = checkpoints
        .iter()
        .enumerate()
        .map(|(j, p)| Ok(CheckpointMaskSet::for_image(j + 1, id, load_pixel_masks(std::slice::from_ref(p), target)?)))
        .collect::<Result<Vec<_>>>()?;
    let last: Vec<TaggedMask> = sets.pop().map(|s| s.masks).unwrap_or_default();
    let records = score_batch(&last, &sets, hp.epsilon)?;
    write_json(&records, &dir.join("stability.json"))?;

    let mut losses = Vec::new();
    for (rec, tagged) in records.iter().zip(&last) {
        let (h, w) = tagged.mask.dims();
        let wm = weight_map(&tagged.mask, rec.z_bar, hp.d_hat)?;
        write_array(&field_to_array(h, w, wm.values()), dir.join(format!("weight_{:03}.npy", rec.mask_index)))?;
        if let Some(pm) = &pm {
            let loss = adaptive_loss(pm, &tagged.mask, &wm)?;
            write_array(&field_to_array(h, w, &loss.grad), dir.join(format!("adaptive_grad_{:03}.npy", rec.mask_index)))?;
            losses.push(AdaptiveRecord {
                mask_index: rec.mask_index,
                value: loss.value,
            });
        }
    }
    let mut summary = json!({ "masks": records.len(), "z": records.iter().map(|r| r.z).collect::<Vec<_>>() });
    if with_loss {
        write_json(&losses, &dir.join("adaptive_report.json"))?;
        summary["adaptive_loss"] = json!(losses.iter().map(|l| l.value).collect::<Vec<_>>());
    }
    Ok(summary)
}

/// Runs one stage on `manifest`, writing its outputs into `dir`.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage, manifest: &RunManifest, dir: &Path) -> Result<StageOutcome> {
    let mut manifest = manifest.clone();
    let summary = match stage {
        Stage::Affinity => run_affinity(&mut manifest, dir)?,
        Stage::Multicut => run_multicut(&mut manifest, dir)?,
        Stage::Filter => run_filter(&mut manifest, dir)?,
        Stage::Superpixel => run_superpixel(cfg, &mut manifest, dir)?,
        Stage::Sgm => run_sgm(cfg, &mut manifest, dir)?,
        Stage::Selftrain => run_selftrain(&mut manifest, dir, true)?,
    };
    Ok(StageOutcome { manifest, summary })
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::path::absolute(path).map_err(|e| io_err(path, e))
}

fn map_paths(manifest: &mut RunManifest, mut f: impl FnMut(&mut PathBuf) -> Result<()>) -> Result<()> {
    for p in [
        &mut manifest.features,
        &mut manifest.image,
        &mut manifest.prob_map,
        &mut manifest.superpixels,
        &mut manifest.affinity,
    ]
    .into_iter()
    .flatten()
    {
        f(p)?;
    }
    for p in manifest.masks.iter_mut().chain(manifest.checkpoints.iter_mut()) {
        f(p)?;
    }
    Ok(())
}

/// Copy of `manifest` with paths inside `dir` made relative to it.
pub fn portable_manifest(manifest: &RunManifest, dir: &Path) -> RunManifest {
    let mut out = manifest.clone();
    map_paths(&mut out, |p| {
        if let Ok(rel) = p.strip_prefix(dir) {
            *p = rel.to_path_buf();
        }
        Ok(())
    })
    .expect("infallible");
    out
}

fn output_dir(out_root: &Path, image_id: &str) -> Result<PathBuf> {
    let bad = image_id.is_empty()
        || image_id == "."
        || image_id == ".."
        || image_id.contains(['/', '\\'])
        || image_id.contains('\0');
    if bad {
        return Err(Error::InvalidInput(format!("image_id {image_id:?} cannot name a directory")));
    }
    let dir = absolute(&out_root.join(image_id))?;
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(dir)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRun {
    pub manifest: RunManifest,
    pub dir: PathBuf,
    pub summary: Value,
}

/// Runs the configured stages in order for one manifest.
pub fn run_manifest(cfg: &PipelineConfig, manifest: &RunManifest, out_root: &Path) -> Result<ManifestRun> {
    run_manifest_with(cfg, manifest, out_root, run_stage)
}

/// As [`run_manifest`], with a custom stage runner.
pub fn run_manifest_with(
    cfg: &PipelineConfig,
    manifest: &RunManifest,
    out_root: &Path,
    runner: impl Fn(&PipelineConfig, Stage, &RunManifest, &Path) -> Result<StageOutcome>,
) -> Result<ManifestRun> {
    cfg.validate()?;
    let dir = output_dir(out_root, &manifest.image_id)?;
    let mut current = manifest.clone();
    if let Some(hp) = cfg.hyperparams {
        current.hyperparams = hp;
    }
    current.hyperparams.validate()?;
    map_paths(&mut current, |p| {
        *p = absolute(p)?;
        Ok(())
    })?;
    let mut summary = serde_json::Map::new();
    summary.insert("image_id".into(), json!(manifest.image_id));
    for &stage in &cfg.stages {
        let outcome = runner(cfg, stage, &current, &dir)?;
        current = outcome.manifest;
        summary.insert(stage.name().into(), outcome.summary);
    }
    write_manifest(&portable_manifest(&current, &dir), dir.join("manifest.json"))?;
    Ok(ManifestRun {
        manifest: current,
        dir,
        summary: Value::Object(summary),
    })
}

fn check_unique_ids(manifests: &[RunManifest]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for m in manifests {
        if !seen.insert(m.image_id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate image_id {:?}", m.image_id)));
        }
    }
    Ok(())
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

/// Processes manifests concurrently, at most `jobs` at a time. Results are
/// returned in input order.
pub fn run_pipeline(cfg: &PipelineConfig, manifests: &[RunManifest], out_root: &Path, jobs: usize) -> Result<Vec<ManifestRun>> {
    cfg.validate()?;
    check_unique_ids(manifests)?;
    thread_pool(jobs)?.install(|| manifests.par_iter().map(|m| run_manifest(cfg, m, out_root)).collect())
}

/// Applies `f` to every manifest on a pool of `jobs` threads, keeping input
/// order. Used by single-purpose commands outside the stage list.
pub fn for_each_manifest<T: Send>(
    manifests: &[RunManifest],
    jobs: usize,
    f: impl Fn(&RunManifest) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    check_unique_ids(manifests)?;
    thread_pool(jobs)?.install(|| manifests.par_iter().map(&f).collect())
}

/// Hue of mask `index`: successive golden-angle steps around the colour
/// wheel at full saturation and value.
pub fn overlay_color(index: usize) -> [u8; 3] {
    const GOLDEN_ANGLE: f64 = 137.507_764_050_037_85;
    let hue = (index as f64 * GOLDEN_ANGLE) % 360.0;
    let sector = hue / 60.0;
    let x = 1.0 - (sector % 2.0 - 1.0).abs();
    let (r, g, b) = match sector as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r, g, b].map(|c: f64| (c * 255.0).round() as u8)
}

/// Blends each mask's colour at half opacity over the image, in mask order.
pub fn render_overlay(image: &RgbImage, masks: &[PixelMask]) -> Result<RgbImage> {
    let (h, w) = (image.height(), image.width());
    let mut data = image.data().to_vec();
    for (i, m) in masks.iter().enumerate() {
        if m.dims() != (h, w) {
            return Err(Error::ShapeMismatch(format!("mask {i} is {:?}, image is {h}x{w}", m.dims())));
        }
        let color = overlay_color(i);
        for (p, _) in m.values().iter().enumerate().filter(|(_, &v)| v != 0) {
            for c in 0..3 {
                let blended = (data[3 * p + c] as u16 + color[c] as u16 + 1) / 2;
                data[3 * p + c] = blended as u8;
            }
        }
    }
    RgbImage::new(h, w, data)
}

/// Renders the manifest's masks over its image into `<out>/<image_id>/overlay.ppm`.
pub fn overlay_manifest(manifest: &RunManifest, out_root: &Path) -> Result<Value> {
    let stage = "overlay";
    let missing = |input: &str| Error::MissingInput {
        stage,
        input: input.to_string(),
    };
    let image_path = manifest.image.as_ref().filter(|p| p.is_file()).ok_or_else(|| missing("image"))?;
    if manifest.masks.is_empty() || manifest.masks.iter().any(|p| !p.is_file()) {
        return Err(missing("masks"));
    }
    let image = load_image(image_path)?;
    let masks = load_pixel_masks(&manifest.masks, Some((image.height(), image.width())))?;
    let dir = output_dir(out_root, &manifest.image_id)?;
    write_image_ppm(&render_overlay(&image, &masks)?.to_array(), dir.join("overlay.ppm"))?;
    Ok(json!({ "image_id": manifest.image_id, "masks": masks.len() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("segment".parse::<Stage>().is_err());
    }

    #[test]
    fn dependency_order() {
        let ok = PipelineConfig::default().with_stages(vec![Stage::Affinity, Stage::Multicut, Stage::Filter]);
        assert!(ok.validate().is_ok());
        let partial = PipelineConfig::default().with_stages(vec![Stage::Filter]);
        assert!(partial.validate().is_ok());
        let bad = PipelineConfig::default().with_stages(vec![Stage::Filter, Stage::Multicut]);
        assert!(matches!(
            bad.validate(),
            Err(Error::StageDependencyViolation {
                stage: "filter",
                requires: "multicut"
            })
        ));
        let dup = PipelineConfig::default().with_stages(vec![Stage::Affinity, Stage::Affinity]);
        assert!(matches!(dup.validate(), Err(Error::InvalidInput(_))));
        assert!(PipelineConfig::default().validate().is_ok());
    }

    #[test]
    fn config_json() {
        let cfg = PipelineConfig::from_json(r#"{"stages": ["superpixel"], "k_target": 12}"#).unwrap();
        assert_eq!(cfg.stages, vec![Stage::Superpixel]);
        assert_eq!(cfg.k_target, 12);
        assert_eq!(cfg.compactness, 10.0);
        assert!(PipelineConfig::from_json(r#"{"stage": []}"#).is_err());
    }

    #[test]
    fn overlay_examples() {
        let img = RgbImage::from_fn(4, 4, |y, x| [(y * 40) as u8, (x * 40) as u8, 7]);
        assert_eq!(render_overlay(&img, &[]).unwrap(), img);

        let full = PixelMask::from_fn(4, 4, |_, _| true);
        let out = render_overlay(&img, &[full]).unwrap();
        let c = overlay_color(0);
        for p in 0..16 {
            let (a, b) = (img.pixel(p), out.pixel(p));
            for k in 0..3 {
                assert_eq!(b[k] as u16, (a[k] as u16 + c[k] as u16 + 1) / 2);
            }
        }

        let flat = RgbImage::from_fn(4, 4, |_, _| [50, 50, 50]);
        let left = PixelMask::from_fn(4, 4, |_, x| x == 0);
        let right = PixelMask::from_fn(4, 4, |_, x| x == 3);
        let out = render_overlay(&flat, &[left, right]).unwrap();
        let colors: BTreeSet<[u8; 3]> = (0..16).map(|p| out.pixel(p)).filter(|&c| c != [50, 50, 50]).collect();
        assert_eq!(colors.len(), 2);

        let wrong = PixelMask::from_fn(3, 4, |_, _| true);
        assert!(matches!(render_overlay(&flat, &[wrong]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn golden_angle_hues_differ() {
        let colors: BTreeSet<[u8; 3]> = (0..16).map(overlay_color).collect();
        assert_eq!(colors.len(), 16);
        assert_eq!(overlay_color(0), [255, 0, 0]);
    }

    #[test]
    fn rejects_unsafe_image_ids() {
        let dir = tempfile::tempdir().unwrap();
        for id in ["", "..", "a/b"] {
            assert!(output_dir(dir.path(), id).is_err());
        }
    }

    #[test]
    fn portable_paths() {
        let m = RunManifest {
            image_id: "x".into(),
            features: Some(PathBuf::from("/data/f.npy")),
            masks: vec![PathBuf::from("/out/x/filtered.npy")],
            ..RunManifest::default()
        };
        let p = portable_manifest(&m, Path::new("/out/x"));
        assert_eq!(p.features, Some(PathBuf::from("/data/f.npy")));
        assert_eq!(p.masks, vec![PathBuf::from("filtered.npy")]);
    }
}
