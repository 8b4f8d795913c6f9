use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use iaes::datagen::{gen_two_moons, grid_graph_8, read_pnm, seed_unary, write_pnm, GridImage, PnmFormat};
use iaes::functions::families::Family;
use iaes::io::{save_instance, write_cut_instance, write_two_moons, InstanceKind, InstanceSpec};
use iaes::ElementSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::{CliError, CliResult};

/// What was written, for echoing.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub instance: PathBuf,
    pub p: usize,
    pub edges: Option<usize>,
    pub labels: Option<usize>,
}

impl Generated {
    pub fn describe(&self) -> String {
        let mut s = format!("wrote {} (p = {}", self.instance.display(), self.p);
        if let Some(e) = self.edges {
            s += &format!(", {e} edges");
        }
        if let Some(l) = self.labels {
            s += &format!(", {l} labels");
        }
        s + ")"
    }
}

pub fn two_moons(out: &Path, p: usize, p0: usize, alpha: f64, seed: u64) -> CliResult<Generated> {
    if !(alpha > 0.0) {
        return Err(CliError::Usage(format!("alpha must be positive, got {alpha}")));
    }
    let data = gen_two_moons(p, p0, seed)?;
    write_two_moons(out, &data, alpha)?;
    Ok(Generated {
        instance: out.join("instance.json"),
        p,
        edges: None,
        labels: Some(p0),
    })
}

#[derive(Clone, Debug)]
pub struct GridOptions {
    /// PGM/PPM to segment; a synthetic disk image otherwise.
    pub image: Option<PathBuf>,
    pub height: usize,
    pub width: usize,
    /// Foreground and background seed pixels; default to the centre and the
    /// top-left corner.
    pub fg: Vec<usize>,
    pub bg: Vec<usize>,
    pub strength: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            image: None,
            height: 16,
            width: 16,
            fg: Vec::new(),
            bg: Vec::new(),
            strength: 1.0,
            noise: 0.1,
            seed: 0,
        }
    }
}

/// A bright disk on a dark background with Gaussian pixel noise.
pub fn synthetic_disk(height: usize, width: usize, noise: f64, seed: u64) -> CliResult<GridImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, noise).map_err(|e| CliError::Usage(format!("noise: {e}")))?;
    let (cy, cx) = ((height as f64 - 1.0) / 2.0, (width as f64 - 1.0) / 2.0);
    let radius = height.min(width) as f64 / 3.0;
    let mut values = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            let inside = (r as f64 - cy).hypot(c as f64 - cx) <= radius;
            let base = if inside { 0.8 } else { 0.2 };
            values.push((base + jitter.sample(&mut rng)).clamp(0.0, 1.0));
        }
    }
    Ok(GridImage::new(height, width, 1, values)?)
}

pub fn grid(out: &Path, opts: &GridOptions) -> CliResult<Generated> {
    let image = match &opts.image {
        Some(path) => read_pnm(BufReader::new(File::open(path)?))?,
        None => synthetic_disk(opts.height, opts.width, opts.noise, opts.seed)?,
    };
    let p = image.pixels();
    if p == 0 {
        return Err(CliError::Usage("image has no pixels".into()));
    }
    let centre = (image.height / 2) * image.width + image.width / 2;
    let fg = if opts.fg.is_empty() {
        vec![centre]
    } else {
        opts.fg.clone()
    };
    let bg = if opts.bg.is_empty() { vec![0] } else { opts.bg.clone() };
    if let Some(&j) = fg.iter().chain(&bg).find(|&&j| j >= p) {
        return Err(CliError::Usage(format!(
            "seed pixel {j} outside an image of {p} pixels"
        )));
    }
    let unary = seed_unary(
        &image,
        &ElementSet::from_indices(p, fg.iter().copied()),
        &ElementSet::from_indices(p, bg.iter().copied()),
        opts.strength,
    )?;
    let graph = grid_graph_8(&image);
    std::fs::create_dir_all(out)?;
    let format = if image.channels == 1 {
        PnmFormat::P5
    } else {
        PnmFormat::P6
    };
    write_pnm(File::create(out.join("image.pnm"))?, &image, format)?;
    let mut params = BTreeMap::new();
    params.insert("height".into(), json!(image.height));
    params.insert("width".into(), json!(image.width));
    params.insert("channels".into(), json!(image.channels));
    params.insert("strength".into(), json!(opts.strength));
    params.insert("fg".into(), json!(fg));
    params.insert("bg".into(), json!(bg));
    let seed = opts.image.is_none().then_some(opts.seed);
    write_cut_instance(out, &graph, &unary, params, seed)?;
    Ok(Generated {
        instance: out.join("instance.json"),
        p,
        edges: Some(graph.edges().len()),
        labels: None,
    })
}

/// A seeded member of one of the random test families; no data files.
pub fn family(out: &Path, family: Family, p: usize, seed: u64) -> CliResult<Generated> {
    let mut spec = InstanceSpec::new(InstanceKind::Family, p);
    spec.params.insert("family".into(), json!(family.to_string()));
    spec.seed = Some(seed);
    spec.build(out)?;
    std::fs::create_dir_all(out)?;
    let path = out.join("instance.json");
    save_instance(&spec, &path)?;
    Ok(Generated {
        instance: path,
        p,
        edges: None,
        labels: None,
    })
}
