//! `key = value` configuration files.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Keys may repeat only where a setting is a list (`regime`). Relative
//! paths are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::encoder::{Init, Optimizer, PenaltyCurve, Regularizer, TrainConfig};
use crate::error::{Error, Result};
use crate::reg::ActivationParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse_entries(text: &str, path: &Path) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(path, i + 1, "expected `key = value`"));
        };
        out.push(Entry {
            key: key.trim().to_owned(),
            value: value.trim().to_owned(),
            line: i + 1,
        });
    }
    Ok(out)
}

/// Parses `entry.value`, reporting failures at the entry's line.
pub(crate) fn value<T: FromStr>(entry: &Entry, path: &Path) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    entry
        .value
        .parse()
        .map_err(|e| Error::parse(path, entry.line, format!("{}: {e}", entry.key)))
}

pub(crate) fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Training hyperparameters that map one-to-one onto [`TrainConfig`].
///
/// Returns `Ok(false)` if `entry.key` is not one of them. `alpha`, `beta`
/// and `penalty_curve` are collected into `curve` and applied by
/// [`finish_train`].
pub(crate) fn apply_train_key(
    config: &mut TrainConfig,
    curve: &mut CurveKeys,
    warmup: &mut Option<usize>,
    entry: &Entry,
    path: &Path,
) -> Result<bool> {
    match entry.key.as_str() {
        "learning_rate" => config.learning_rate = value(entry, path)?,
        "batch_size" => config.batch_size = value(entry, path)?,
        "total_steps" => config.total_steps = value(entry, path)?,
        "peak_lambda" => config.peak_lambda = value(entry, path)?,
        "warmup_steps" => *warmup = Some(value(entry, path)?),
        "df_refresh_interval" => config.df_refresh_interval = value(entry, path)?,
        "df_sample_size" => config.df_sample_size = value(entry, path)?,
        "hard_negatives" => config.hard_negatives = value(entry, path)?,
        "regularizer" => config.regularizer = value::<Regularizer>(entry, path)?,
        "optimizer" => config.optimizer = value::<Optimizer>(entry, path)?,
        "init" => config.init = value::<Init>(entry, path)?,
        "epsilon" => config.epsilon = value(entry, path)?,
        "rank" => config.rank = value(entry, path)?,
        "seed" => config.seed = value(entry, path)?,
        "alpha" => curve.alpha = value(entry, path)?,
        "beta" => curve.beta = value(entry, path)?,
        "penalty_curve" => {
            curve.constant = match entry.value.as_str() {
                "logistic" => false,
                "constant" => true,
                other => {
                    return Err(Error::parse(
                        path,
                        entry.line,
                        format!("penalty_curve: expected logistic|constant, got `{other}`"),
                    ))
                }
            }
        }
        _ => return Ok(false),
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CurveKeys {
    alpha: f64,
    beta: f64,
    constant: bool,
}

impl Default for CurveKeys {
    fn default() -> Self {
        let d = ActivationParams::default();
        Self {
            alpha: d.alpha(),
            beta: d.beta(),
            constant: false,
        }
    }
}

/// Applies the collected curve keys and the warmup default (60% of steps).
pub(crate) fn finish_train(config: &mut TrainConfig, curve: CurveKeys, warmup: Option<usize>) -> Result<()> {
    config.penalty_curve = if curve.constant {
        PenaltyCurve::Constant
    } else {
        PenaltyCurve::Logistic(ActivationParams::new(curve.alpha, curve.beta)?)
    };
    config.warmup_steps = warmup.unwrap_or(config.total_steps * 3 / 5);
    config.validate()
}

/// Flat `key → value` view of a [`TrainConfig`], as written to manifests.
pub fn train_config_pairs(config: &TrainConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_owned(), v);
    };
    put("learning_rate", config.learning_rate.to_string());
    put("batch_size", config.batch_size.to_string());
    put("total_steps", config.total_steps.to_string());
    put("peak_lambda", config.peak_lambda.to_string());
    put("warmup_steps", config.warmup_steps.to_string());
    put("df_refresh_interval", config.df_refresh_interval.to_string());
    put("df_sample_size", config.df_sample_size.to_string());
    put("hard_negatives", config.hard_negatives.to_string());
    put("regularizer", config.regularizer.to_string());
    put("optimizer", config.optimizer.to_string());
    put("init", config.init.to_string());
    put("epsilon", config.epsilon.to_string());
    put("rank", config.rank.to_string());
    put("seed", config.seed.to_string());
    match config.penalty_curve {
        PenaltyCurve::Logistic(p) => {
            put("penalty_curve", "logistic".into());
            put("alpha", p.alpha().to_string());
            put("beta", p.beta().to_string());
        }
        PenaltyCurve::Constant => put("penalty_curve", "constant".into()),
    }
    m
}

/// Contents of a `train` config file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainFile {
    /// JSON-lines documents.
    pub corpus: PathBuf,
    /// TSV training queries.
    pub queries: PathBuf,
    /// Frozen vocabulary; built from `corpus` with `min_df` when absent.
    pub vocab: Option<PathBuf>,
    pub min_df: usize,
    pub train: TrainConfig,
}

impl TrainFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        let mut corpus = None;
        let mut queries = None;
        let mut vocab = None;
        let mut min_df = 2;
        let mut train = TrainConfig::default();
        let mut curve = CurveKeys::default();
        let mut warmup = None;
        for e in parse_entries(text, path)? {
            match e.key.as_str() {
                "corpus" => corpus = Some(resolve(base, &e.value)),
                "queries" => queries = Some(resolve(base, &e.value)),
                "vocab" => vocab = Some(resolve(base, &e.value)),
                "min_df" => min_df = value(&e, path)?,
                _ => {
                    if !apply_train_key(&mut train, &mut curve, &mut warmup, &e, path)? {
                        return Err(Error::UnknownConfigKey(e.key));
                    }
                }
            }
        }
        finish_train(&mut train, curve, warmup)?;
        let missing = |k: &str| Error::InvalidArgument(format!("{}: missing required key `{k}`", path.display()));
        Ok(Self {
            corpus: corpus.ok_or_else(|| missing("corpus"))?,
            queries: queries.ok_or_else(|| missing("queries"))?,
            vocab,
            min_df,
            train,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blanks_and_paths() {
        let text = "# header\ncorpus = docs.jsonl\n\nqueries=/abs/q.tsv  # trailing\nrank = 8\nregularizer = flops\n";
        let f = TrainFile::parse(text, Path::new("cfg/train.conf")).unwrap();
        assert_eq!(f.corpus, Path::new("cfg/docs.jsonl"));
        assert_eq!(f.queries, Path::new("/abs/q.tsv"));
        assert_eq!(f.train.rank, 8);
        assert_eq!(f.train.regularizer, Regularizer::Flops);
        assert_eq!(f.min_df, 2);
    }

    #[test]
    fn defaults_follow_the_training_recipe() {
        let f = TrainFile::parse("corpus=a\nqueries=b\ntotal_steps=500\n", Path::new("x")).unwrap();
        assert_eq!(f.train.df_refresh_interval, 100);
        assert_eq!(f.train.hard_negatives, 7);
        assert_eq!(f.train.warmup_steps, 300);
        let PenaltyCurve::Logistic(p) = f.train.penalty_curve else { panic!() };
        assert_eq!((p.alpha(), p.beta()), (0.1, 10.0));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = TrainFile::parse("corpus=a\nqueries=b\nlearnin_rate=0.1\n", Path::new("x")).unwrap_err();
        assert!(matches!(&err, Error::UnknownConfigKey(k) if k == "learnin_rate"));
        assert!(err.to_string().contains("learnin_rate"));
    }

    #[test]
    fn bad_values_report_the_line() {
        let err = TrainFile::parse("corpus=a\nqueries=b\nrank=many\n", Path::new("x")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(TrainFile::parse("corpus=a\n", Path::new("x")).is_err());
        assert!(TrainFile::parse("corpus=a\nqueries=b\nbatch_size=1\n", Path::new("x")).is_err());
        assert!(TrainFile::parse("just words\n", Path::new("x")).is_err());
    }

    #[test]
    fn pairs_cover_every_train_key() {
        let pairs = train_config_pairs(&TrainConfig::default());
        let mut cfg = TrainConfig::default();
        let mut curve = CurveKeys::default();
        let mut warmup = None;
        for (k, v) in &pairs {
            let e = Entry { key: k.clone(), value: v.clone(), line: 1 };
            assert!(apply_train_key(&mut cfg, &mut curve, &mut warmup, &e, Path::new("x")).unwrap(), "{k}");
        }
        finish_train(&mut cfg, curve, warmup).unwrap();
        assert_eq!(cfg, TrainConfig::default());
    }
}
