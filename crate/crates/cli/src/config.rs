//! Run configuration: a JSON document, overridden field by field by flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use htm_core::testfn::ConstantsMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Format::Csv
    }

    pub fn csv(self) -> bool {
        self != Format::Json
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Constants {
    Exact,
    Asymptotic,
}

impl From<Constants> for ConstantsMode {
    fn from(c: Constants) -> Self {
        match c {
            Constants::Exact => ConstantsMode::Exact,
            Constants::Asymptotic => ConstantsMode::Asymptotic,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: usize,
    pub r_min: f64,
    pub delta_b: f64,
    /// `"default"`, `"uniform"` or a geometric ratio such as `"0.999"`.
    pub grading: String,
    pub alpha: f64,
    /// When set, `alpha = alpha_fraction · λ1` and `alpha` is ignored.
    pub alpha_fraction: Option<f64>,
    #[serde(deserialize_with = "gamma_list")]
    pub gammas: Vec<f64>,
    /// Single exponent for `maximize` and `bubble`.
    #[serde(deserialize_with = "gamma_value")]
    pub gamma: f64,
    pub eps: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub certify_trials: usize,
    pub rng_seed: u64,
    pub beta: f64,
    pub window: f64,
    pub samples: usize,
    pub constants: Constants,
    pub out: PathBuf,
    pub format: Format,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 4000,
            r_min: 1e-10,
            delta_b: 1e-8,
            grading: "default".into(),
            alpha: 0.0,
            alpha_fraction: None,
            gammas: vec![2.0 * PI, 3.0 * PI, 3.5 * PI],
            gamma: 3.9 * PI,
            eps: vec![1e-3, 1e-4, 1e-5],
            tol: 1e-8,
            max_iter: 10_000,
            damping: 1.0,
            certify_trials: 50,
            rng_seed: 0x5eed,
            beta: 0.5,
            window: htm_core::bubble::DEFAULT_WINDOW,
            samples: htm_core::bubble::DEFAULT_SAMPLES,
            constants: Constants::Exact,
            out: PathBuf::from("out"),
            format: Format::Both,
            jobs: None,
        }
    }
}

/// Accepts plain numbers and multiples of π written as `3.5pi`, `pi` or `2*pi`.
pub fn parse_gamma(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace('π', "pi");
    let v = match t.strip_suffix("pi") {
        Some(head) => {
            let head = head.trim().trim_end_matches('*').trim();
            let k =
                if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|e| format!("bad gamma {s:?}: {e}"))? };
            k * PI
        }
        None => t.parse::<f64>().map_err(|e| format!("bad gamma {s:?}: {e}"))?,
    };
    Ok(v)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

impl NumOrText {
    fn value<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            NumOrText::Num(x) => Ok(x),
            NumOrText::Text(s) => parse_gamma(&s).map_err(E::custom),
        }
    }
}

fn gamma_value<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    NumOrText::deserialize(d)?.value()
}

fn gamma_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    Vec::<NumOrText>::deserialize(d)?.into_iter().map(NumOrText::value).collect()
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        format!("{}: field `{field}`: {}", path.display(), e.inner())
    })
}

impl RunConfig {
    /// `None` for the default ratio, `Some(1.0)` for a uniform grid.
    pub fn grading_ratio(&self) -> Result<Option<f64>, String> {
        match self.grading.trim() {
            "default" => Ok(None),
            "uniform" => Ok(Some(1.0)),
            s => match s.parse::<f64>() {
                Ok(q) if q > 0.0 && q <= 1.0 => Ok(Some(q)),
                _ => Err(format!("field `grading`: expected \"default\", \"uniform\" or a ratio in (0, 1], got {s:?}")),
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let bad = |field: &str, why: String| Err(format!("field `{field}`: {why}"));
        if self.n < 5 {
            return bad("n", format!("need at least 5 nodes, got {}", self.n));
        }
        if !(self.r_min > 0.0 && self.r_min < 0.5) {
            return bad("r_min", format!("must lie in (0, 0.5), got {}", self.r_min));
        }
        if !(self.delta_b > 0.0 && self.delta_b < 0.5) {
            return bad("delta_b", format!("must lie in (0, 0.5), got {}", self.delta_b));
        }
        self.grading_ratio()?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha", format!("must be a finite value >= 0, got {}", self.alpha));
        }
        if let Some(f) = self.alpha_fraction {
            if !(0.0..1.0).contains(&f) {
                return bad("alpha_fraction", format!("must lie in [0, 1), got {f}"));
            }
        }
        let sub = |g: f64| g > 0.0 && g < 4.0 * PI;
        if let Some(g) = self.gammas.iter().find(|&&g| !sub(g)) {
            return bad("gammas", format!("{g} is outside (0, 4π)"));
        }
        if !sub(self.gamma) {
            return bad("gamma", format!("{} is outside (0, 4π)", self.gamma));
        }
        let e_max = (-1.0f64).exp();
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < e_max)) {
            return bad("eps", format!("{e} is outside (0, 1/e)"));
        }
        if !(self.tol > 0.0) {
            return bad("tol", format!("must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be positive".into());
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping", format!("must lie in (0, 1], got {}", self.damping));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta", format!("must lie in (0, 1), got {}", self.beta));
        }
        if !(self.window > 0.0) || self.samples < 2 {
            return bad("window", "need window > 0 and samples >= 2".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs", "must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 of the listed fields only, so that runs reading the same
    /// inputs share a hash.
    pub fn hash_of(&self, fields: &[&str]) -> String {
        let full = serde_json::to_value(self).expect("config serializes");
        let picked: serde_json::Map<String, serde_json::Value> =
            fields.iter().map(|&f| (f.to_string(), full[f].clone())).collect();
        let bytes = serde_json::to_vec(&picked).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

pub const GRID_FIELDS: [&str; 4] = ["n", "r_min", "delta_b", "grading"];
