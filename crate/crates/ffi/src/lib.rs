//! C ABI over the `dotmat` crate.
//!
//! Datasets and models are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`DotmatStatus`]; on failure, [`dotmat_last_error`] describes the cause
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use dotmat::ingest::{parse_csv_path, parse_movielens_path};
use dotmat::metrics::matthew_degree_from_counts;
use dotmat::persist::{load_model_from_path, save_model_to_path};
use dotmat::train::{train_dotmat, train_dotmat_hybrid, train_mf_classic};
use dotmat::{
    clamped_dot, ColumnSpec, Error, FactorModel, InteractionDataset, ItemId, SplitDataset, TrainConfig, UserId,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotmatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Lookup = 5,
    Config = 6,
    Dimension = 7,
    Integrity = 8,
    Degenerate = 9,
    Panic = 10,
}

/// Trainer selector for [`dotmat_train`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotmatAlgorithm {
    Dotmat = 0,
    DotmatHybrid = 1,
    Mf = 2,
}

/// Input format for [`dotmat_dataset_load`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotmatFormat {
    /// `.json` cache, `.dat` MovieLens, `.csv` CSV.
    Auto = 0,
    Movielens = 1,
    /// Header row with `user_id,item_id,rating`.
    Csv = 2,
    Cache = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DotmatTrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub dim: usize,
    pub clamp_eps: f64,
    pub seed: u64,
    pub pairs_per_user: usize,
}

impl From<DotmatTrainConfig> for TrainConfig {
    fn from(c: DotmatTrainConfig) -> Self {
        TrainConfig {
            learning_rate: c.learning_rate,
            epochs: c.epochs,
            dim: c.dim,
            clamp_eps: c.clamp_eps,
            seed: c.seed,
            pairs_per_user: c.pairs_per_user,
        }
    }
}

/// Opaque rating dataset.
pub struct DotmatDataset {
    inner: InteractionDataset,
}

/// Opaque factor model.
pub struct DotmatModel {
    inner: FactorModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> DotmatStatus {
    match e {
        Error::Dimension { .. } => DotmatStatus::Dimension,
        Error::Lookup { .. } => DotmatStatus::Lookup,
        Error::Config(_) | Error::Bounds(_) => DotmatStatus::Config,
        Error::Parse { .. } | Error::Schema(_) | Error::Json(_) => DotmatStatus::Parse,
        Error::Integrity(_) => DotmatStatus::Integrity,
        Error::Degenerate(_) => DotmatStatus::Degenerate,
        Error::Io(_) => DotmatStatus::Io,
        Error::Cell { source, .. } => status_of(source),
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DotmatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DotmatStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            DotmatStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_last_error(msg);
            DotmatStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            DotmatStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Invalid("path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dotmat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn dotmat_train_config_default() -> DotmatTrainConfig {
    let c = TrainConfig::default();
    DotmatTrainConfig {
        learning_rate: c.learning_rate,
        epochs: c.epochs,
        dim: c.dim,
        clamp_eps: c.clamp_eps,
        seed: c.seed,
        pairs_per_user: c.pairs_per_user,
    }
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dotmat_dataset_load(
    path: *const c_char,
    format: DotmatFormat,
    out: *mut *mut DotmatDataset,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let path = path_arg(path)?;
        let format = match format {
            DotmatFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
                Some("json") => DotmatFormat::Cache,
                Some("dat") => DotmatFormat::Movielens,
                Some("csv") => DotmatFormat::Csv,
                _ => {
                    return Err(Failure::Invalid(format!(
                        "cannot infer the format of {}",
                        path.display()
                    )))
                }
            },
            f => f,
        };
        let inner = match format {
            DotmatFormat::Movielens => parse_movielens_path(&path)?.dataset,
            DotmatFormat::Csv => parse_csv_path(&path, &ColumnSpec::default())?.dataset,
            _ => InteractionDataset::load_json(&path)?,
        };
        *out = Box::into_raw(Box::new(DotmatDataset { inner }));
        Ok(())
    })
}

/// Build a dataset from parallel arrays. `r_max <= 0` infers the ceiling.
///
/// # Safety
/// Each array must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_dataset_from_triples(
    users: *const u64,
    items: *const u64,
    ratings: *const f64,
    len: usize,
    r_max: f64,
    out: *mut *mut DotmatDataset,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let users = slice_arg(users, len, "users")?;
        let items = slice_arg(items, len, "items")?;
        let ratings = slice_arg(ratings, len, "ratings")?;
        let triples = (0..len)
            .map(|i| dotmat::RatingTriple::new(users[i], items[i], ratings[i]))
            .collect();
        let r_max = (r_max > 0.0).then_some(r_max);
        let inner = InteractionDataset::from_triples(triples, r_max)?;
        *out = Box::into_raw(Box::new(DotmatDataset { inner }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dotmat_dataset_free(dataset: *mut DotmatDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// Pointers must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn dotmat_dataset_counts(
    dataset: *const DotmatDataset,
    n_users: *mut usize,
    n_items: *mut usize,
    n_ratings: *mut usize,
    r_max: *mut f64,
) -> DotmatStatus {
    guard(|| {
        let ds = &deref(dataset, "dataset")?.inner;
        if let Some(p) = n_users.as_mut() {
            *p = ds.users().len();
        }
        if let Some(p) = n_items.as_mut() {
            *p = ds.items().len();
        }
        if let Some(p) = n_ratings.as_mut() {
            *p = ds.len();
        }
        if let Some(p) = r_max.as_mut() {
            *p = ds.r_max();
        }
        Ok(())
    })
}

/// Train on every rating of `dataset` (DotMat reads only its id universes).
///
/// # Safety
/// Pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_train(
    dataset: *const DotmatDataset,
    algorithm: DotmatAlgorithm,
    config: *const DotmatTrainConfig,
    out: *mut *mut DotmatModel,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let ds = &deref(dataset, "dataset")?.inner;
        let config: TrainConfig = (*deref(config, "config")?).into();
        let inner = match algorithm {
            DotmatAlgorithm::Dotmat => train_dotmat(ds.users(), ds.items(), &config)?.0,
            DotmatAlgorithm::DotmatHybrid => {
                let split = SplitDataset::train_only(ds.clone())?;
                train_dotmat_hybrid(&split, &config, &config)?.0
            }
            DotmatAlgorithm::Mf => {
                let split = SplitDataset::train_only(ds.clone())?;
                train_mf_classic(&split, &config)?.0
            }
        };
        *out = Box::into_raw(Box::new(DotmatModel { inner }));
        Ok(())
    })
}

/// Data-free DotMat over explicit id lists.
///
/// # Safety
/// Arrays must hold the stated number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_train_datafree(
    user_ids: *const u64,
    n_users: usize,
    item_ids: *const u64,
    n_items: usize,
    config: *const DotmatTrainConfig,
    out: *mut *mut DotmatModel,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let users: Vec<UserId> = slice_arg(user_ids, n_users, "user_ids")?
            .iter()
            .map(|&u| UserId(u))
            .collect();
        let items: Vec<ItemId> = slice_arg(item_ids, n_items, "item_ids")?
            .iter()
            .map(|&i| ItemId(i))
            .collect();
        let config: TrainConfig = (*deref(config, "config")?).into();
        let inner = train_dotmat(&users, &items, &config)?.0;
        *out = Box::into_raw(Box::new(DotmatModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_model_load(path: *const c_char, out: *mut *mut DotmatModel) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let inner = load_model_from_path(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(DotmatModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be valid and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dotmat_model_save(model: *const DotmatModel, path: *const c_char) -> DotmatStatus {
    guard(|| {
        let model = &deref(model, "model")?.inner;
        save_model_to_path(model, path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dotmat_model_free(model: *mut DotmatModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Latent dimension, or 0 for NULL.
///
/// # Safety
/// `model` must be valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn dotmat_model_dim(model: *const DotmatModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// `r_max` times the clamped user-item dot product.
///
/// # Safety
/// `model` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_model_predict(
    model: *const DotmatModel,
    user: u64,
    item: u64,
    r_max: f64,
    out: *mut f64,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let model = &deref(model, "model")?.inner;
        *out = model.predict_rating(UserId(user), ItemId(item), r_max)?;
        Ok(())
    })
}

/// Mean absolute error of `model` over every rating of `dataset`, using the
/// dataset's ceiling.
///
/// # Safety
/// Pointers must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_model_mae(
    model: *const DotmatModel,
    dataset: *const DotmatDataset,
    out: *mut f64,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let model = deref(model, "model")?.inner.clone();
        let ds = &deref(dataset, "dataset")?.inner;
        let predictor = dotmat::DotPredictor::new(model, ds.r_max());
        let preds = dotmat::metrics::predict_all(&predictor, ds)?;
        *out = dotmat::mae(&preds)?;
        Ok(())
    })
}

/// # Safety
/// `u` and `v` must hold `k` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_clamped_dot(
    u: *const f64,
    v: *const f64,
    k: usize,
    eps: f64,
    out: *mut f64,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = clamped_dot(slice_arg(u, k, "u")?, slice_arg(v, k, "v")?, eps)?;
        Ok(())
    })
}

/// Mean absolute error of two parallel arrays.
///
/// # Safety
/// Arrays must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_mae(
    predicted: *const f64,
    actual: *const f64,
    len: usize,
    out: *mut f64,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = slice_arg(predicted, len, "predicted")?;
        let a = slice_arg(actual, len, "actual")?;
        let preds: Vec<_> = p
            .iter()
            .zip(a)
            .map(|(&predicted, &actual)| dotmat::Prediction {
                user: UserId(0),
                item: ItemId(0),
                predicted,
                actual,
            })
            .collect();
        *out = dotmat::mae(&preds)?;
        Ok(())
    })
}

/// Popularity-concentration slope of per-item exposure counts.
/// `zero_excluded` may be NULL.
///
/// # Safety
/// `counts` must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dotmat_matthew_degree(
    counts: *const f64,
    len: usize,
    out: *mut f64,
    zero_excluded: *mut usize,
) -> DotmatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let effect = matthew_degree_from_counts(slice_arg(counts, len, "counts")?)?;
        *out = effect.degree;
        if let Some(z) = zero_excluded.as_mut() {
            *z = effect.zero_excluded;
        }
        Ok(())
    })
}
