//! C ABI over the fleetreg library.
//!
//! Datasets and models live behind opaque handles allocated by this crate
//! and released with their paired `_free` functions. Every fallible call
//! returns a [`FleetregStatus`]; on failure a message is stored per thread
//! and can be read back with [`fleetreg_last_error_message`].
//!
//! The committed `include/fleetreg.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::Path;

use fleetreg::fbr::{train_fbr, train_global, FbrModel, GlobalModel, Partition};
use fleetreg::regressors::RegressorSpec;
use fleetreg::synthgen::{generate, GeneratorConfig};
use fleetreg::tabular::Dataset;
use serde::{Deserialize, Serialize};

/// Result of every fallible call in this interface.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FleetregStatus {
    /// The call succeeded.
    Ok = 0,
    /// A runtime failure (I/O, numerical breakdown).
    RuntimeFailure = 1,
    /// Rejected input: malformed JSON, invalid configuration, bad data.
    InvalidInput = 2,
    /// A required pointer argument was null.
    NullArgument = 3,
}

/// Opaque handle to an in-memory dataset.
pub struct FleetregDataset {
    inner: Dataset,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelKind {
    Global(GlobalModel),
    Fleet(FbrModel),
}

/// Opaque handle to a trained model (global or fleet).
pub struct FleetregModel {
    inner: ModelKind,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let stored = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn fail(e: &fleetreg::Error) -> FleetregStatus {
    set_last_error(&e.to_string());
    if e.exit_code() == 2 {
        FleetregStatus::InvalidInput
    } else {
        FleetregStatus::RuntimeFailure
    }
}

fn null_arg(what: &str) -> FleetregStatus {
    set_last_error(&format!("{what} must not be null"));
    FleetregStatus::NullArgument
}

/// Reads a required UTF-8 C string argument.
unsafe fn required_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, FleetregStatus> {
    if p.is_null() {
        return Err(null_arg(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_last_error(&format!("{what} is not valid UTF-8"));
        FleetregStatus::InvalidInput
    })
}

/// Message from the most recent failure on the calling thread, or null if
/// no call has failed yet.
///
/// The pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn fleetreg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Generate a synthetic clustered dataset from a generator config given as
/// JSON (the same schema the `fleetreg generate` command reads).
///
/// On `FLEETREG_STATUS_OK`, `*out` owns the dataset; release it with
/// `fleetreg_dataset_free`.
///
/// # Safety
/// `config_json` must be null or point to a NUL-terminated string, and
/// `out` must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_dataset_generate(
    config_json: *const c_char,
    out: *mut *mut FleetregDataset,
) -> FleetregStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let raw = match required_str(config_json, "config_json") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let cfg: GeneratorConfig = match serde_json::from_str(raw) {
        Ok(cfg) => cfg,
        Err(e) => {
            set_last_error(&format!("config_json: {e}"));
            return FleetregStatus::InvalidInput;
        }
    };
    match generate(&cfg) {
        Ok(ds) => {
            *out = Box::into_raw(Box::new(FleetregDataset { inner: ds.data }));
            FleetregStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Load a dataset from a CSV file with named columns. `label_column` may be
/// null when the data carries no sub-population labels.
///
/// On `FLEETREG_STATUS_OK`, `*out` owns the dataset; release it with
/// `fleetreg_dataset_free`.
///
/// # Safety
/// `path` and `target` must be null or NUL-terminated strings,
/// `label_column` must be null or a NUL-terminated string, and `out` must
/// point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_dataset_load_csv(
    path: *const c_char,
    target: *const c_char,
    label_column: *const c_char,
    out: *mut *mut FleetregDataset,
) -> FleetregStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let path = match required_str(path, "path") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let target = match required_str(target, "target") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let label = if label_column.is_null() {
        None
    } else {
        match required_str(label_column, "label_column") {
            Ok(s) => Some(s),
            Err(status) => return status,
        }
    };
    match Dataset::load_csv(Path::new(path), target, label) {
        Ok(data) => {
            *out = Box::into_raw(Box::new(FleetregDataset { inner: data }));
            FleetregStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Number of rows in the dataset; 0 when `dataset` is null.
///
/// # Safety
/// `dataset` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_dataset_rows(dataset: *const FleetregDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.n())
}

/// Number of feature columns in the dataset; 0 when `dataset` is null.
///
/// # Safety
/// `dataset` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_dataset_features(dataset: *const FleetregDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.k())
}

/// Release a dataset handle. Passing null is a no-op.
///
/// # Safety
/// `dataset` must be null or a handle from this library that has not been
/// freed yet; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_dataset_free(dataset: *mut FleetregDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

unsafe fn parse_spec(spec_json: *const c_char) -> Result<RegressorSpec, FleetregStatus> {
    let raw = required_str(spec_json, "spec_json")?;
    serde_json::from_str(raw).map_err(|e| {
        set_last_error(&format!("spec_json: {e}"));
        FleetregStatus::InvalidInput
    })
}

unsafe fn train(
    dataset: *const FleetregDataset,
    spec_json: *const c_char,
    partition: Option<Partition>,
    seed: u64,
    out: *mut *mut FleetregModel,
) -> FleetregStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let Some(dataset) = dataset.as_ref() else {
        return null_arg("dataset");
    };
    let spec = match parse_spec(spec_json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let fitted = match partition {
        None => train_global(&dataset.inner, &spec, seed).map(ModelKind::Global),
        Some(p) => train_fbr(&dataset.inner, &spec, p, seed).map(ModelKind::Fleet),
    };
    match fitted {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(FleetregModel { inner }));
            FleetregStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Train one regressor on the whole dataset. The regressor is described by
/// JSON such as `{"kind":"ridge","alpha":1.0}`; omitted fields take their
/// defaults.
///
/// On `FLEETREG_STATUS_OK`, `*out` owns the model; release it with
/// `fleetreg_model_free`.
///
/// # Safety
/// `dataset` must be null or a live dataset handle, `spec_json` null or a
/// NUL-terminated string, and `out` must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_train_global(
    dataset: *const FleetregDataset,
    spec_json: *const c_char,
    seed: u64,
    out: *mut *mut FleetregModel,
) -> FleetregStatus {
    train(dataset, spec_json, None, seed, out)
}

/// Partition the dataset into `k` clusters by k-means and train one
/// regressor per cluster. Predictions route each query to its nearest
/// cluster's model.
///
/// On `FLEETREG_STATUS_OK`, `*out` owns the model; release it with
/// `fleetreg_model_free`.
///
/// # Safety
/// Same as `fleetreg_train_global`.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_train_fleet(
    dataset: *const FleetregDataset,
    spec_json: *const c_char,
    k: usize,
    seed: u64,
    out: *mut *mut FleetregModel,
) -> FleetregStatus {
    train(dataset, spec_json, Some(Partition::Kmeans { k }), seed, out)
}

/// Like `fleetreg_train_fleet`, but group rows by the label column the
/// dataset was loaded with instead of discovering clusters. Fails with
/// `FLEETREG_STATUS_INVALID_INPUT` when the dataset has no labels.
///
/// # Safety
/// Same as `fleetreg_train_global`.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_train_fleet_labeled(
    dataset: *const FleetregDataset,
    spec_json: *const c_char,
    seed: u64,
    out: *mut *mut FleetregModel,
) -> FleetregStatus {
    train(dataset, spec_json, Some(Partition::ProvidedLabels), seed, out)
}

/// Predict the target for one feature row. For fleet models, `out_cluster`
/// (when non-null) receives the id of the cluster that served the
/// prediction; global models write -1.
///
/// # Safety
/// `model` must be null or a live model handle, `features` must point to
/// `len` readable doubles, `out_prediction` must be writable, and
/// `out_cluster` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_model_predict(
    model: *const FleetregModel,
    features: *const f64,
    len: usize,
    out_prediction: *mut f64,
    out_cluster: *mut i64,
) -> FleetregStatus {
    let Some(model) = model.as_ref() else {
        return null_arg("model");
    };
    if features.is_null() {
        return null_arg("features");
    }
    if out_prediction.is_null() {
        return null_arg("out_prediction");
    }
    let row = std::slice::from_raw_parts(features, len);
    let outcome = match &model.inner {
        ModelKind::Global(m) => m.predict(row).map(|y| (y, -1i64)),
        ModelKind::Fleet(m) => m.predict(row).map(|(y, c)| (y, c as i64)),
    };
    match outcome {
        Ok((y, cluster)) => {
            *out_prediction = y;
            if !out_cluster.is_null() {
                *out_cluster = cluster;
            }
            FleetregStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Serialize a model to JSON. On `FLEETREG_STATUS_OK`, `*out` owns a
/// NUL-terminated string; release it with `fleetreg_string_free`.
///
/// # Safety
/// `model` must be null or a live model handle and `out` must point to
/// writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_model_to_json(
    model: *const FleetregModel,
    out: *mut *mut c_char,
) -> FleetregStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let Some(model) = model.as_ref() else {
        return null_arg("model");
    };
    let json = match serde_json::to_string(&model.inner) {
        Ok(j) => j,
        Err(e) => {
            set_last_error(&format!("serialization failed: {e}"));
            return FleetregStatus::RuntimeFailure;
        }
    };
    match CString::new(json) {
        Ok(s) => {
            *out = s.into_raw();
            FleetregStatus::Ok
        }
        Err(_) => {
            set_last_error("serialized model contained an interior NUL byte");
            FleetregStatus::RuntimeFailure
        }
    }
}

/// Rebuild a model from JSON produced by `fleetreg_model_to_json`.
///
/// On `FLEETREG_STATUS_OK`, `*out` owns the model; release it with
/// `fleetreg_model_free`.
///
/// # Safety
/// `json` must be null or a NUL-terminated string and `out` must point to
/// writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_model_from_json(
    json: *const c_char,
    out: *mut *mut FleetregModel,
) -> FleetregStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let raw = match required_str(json, "json") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match serde_json::from_str::<ModelKind>(raw) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(FleetregModel { inner }));
            FleetregStatus::Ok
        }
        Err(e) => {
            set_last_error(&format!("json: {e}"));
            FleetregStatus::InvalidInput
        }
    }
}

/// Release a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by this library that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a model handle. Passing null is a no-op.
///
/// # Safety
/// `model` must be null or a handle from this library that has not been
/// freed yet; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fleetreg_model_free(model: *mut FleetregModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
