//! C ABI over `schema_focus`.
//!
//! Schemas are passed around as opaque `SfSchema` handles. Every fallible
//! call returns an `SfStatus`; on failure a message is available from
//! `sf_last_error` on the same thread until the next failing call. Strings
//! returned through `char **out` parameters are owned by the caller and must
//! be released with `sf_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use schema_focus::baselines::QueryTerms;
use schema_focus::etr::{self, CvConfig, GeneratorParams, ModelKind};
use schema_focus::fca::FormalContext;
use schema_focus::metrics::{self, CueIndex};
use schema_focus::ranking::{self, Metric, RankParams};
use schema_focus::schema::{self as model, Schema};
use schema_focus::Error;

/// Status codes. The non-zero values 1-4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    Usage = 1,
    Parse = 2,
    Validation = 3,
    UndefinedMetric = 4,
    NullArgument = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

/// Input encodings accepted by `sf_schema_parse`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfInputFormat {
    /// JSON when the first non-blank byte is `{`, otherwise CSV.
    Canonical = 0,
    Json = 1,
    Csv = 2,
    Ntriples = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfOutputFormat {
    Csv = 0,
    Json = 1,
}

/// Opaque validated schema.
pub struct SfSchema {
    schema: Schema,
    warnings: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let msg = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> SfStatus {
    match e.exit_code() {
        1 => SfStatus::Usage,
        2 => SfStatus::Parse,
        3 => SfStatus::Validation,
        _ => SfStatus::UndefinedMetric,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> SfStatus
where
    F: FnOnce() -> Result<(), (SfStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SfStatus::Panic
        }
    }
}

fn lib<T>(r: schema_focus::Result<T>) -> Result<T, (SfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SfStatus, String) {
    (SfStatus::NullArgument, format!("`{what}` is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SfStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (SfStatus, String)> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn schema_arg<'a>(p: *const SfSchema) -> Result<&'a SfSchema, (SfStatus, String)> {
    p.as_ref().ok_or_else(|| null("schema"))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (SfStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| (SfStatus::Validation, "output contains a NUL byte".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_f64(out: *mut f64, v: f64) -> Result<(), (SfStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = v;
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a schema. `name` names CSV and N-Triples input and
/// may be NULL (then `"schema"`); JSON input carries its own name.
///
/// # Safety
/// `data` must point to `len` readable bytes; `name` must be NULL or a
/// NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_parse(
    data: *const u8,
    len: usize,
    format: SfInputFormat,
    name: *const c_char,
    out: *mut *mut SfSchema,
) -> SfStatus {
    guard(|| {
        if data.is_null() && len > 0 {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let bytes = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(data, len)
        };
        let name = opt_str_arg(name, "name")?.unwrap_or("schema");
        let v = lib(match format {
            SfInputFormat::Canonical => model::parse_canonical(bytes, name),
            SfInputFormat::Json => model::parse_json(bytes),
            SfInputFormat::Csv => model::parse_incidence_csv(bytes, name),
            SfInputFormat::Ntriples => model::parse_ntriples_vocab(bytes, name),
        })?;
        let handle = SfSchema {
            schema: v.schema,
            warnings: v
                .warnings
                .into_iter()
                .map(|w| CString::new(w.replace('\0', " ")).expect("NUL removed"))
                .collect(),
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// # Safety
/// `schema` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_free(schema: *mut SfSchema) {
    if !schema.is_null() {
        drop(Box::from_raw(schema));
    }
}

/// # Safety
/// `schema` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_entity_count(schema: *const SfSchema) -> usize {
    schema.as_ref().map_or(0, |s| s.schema.entity_types().len())
}

/// # Safety
/// `schema` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_property_count(schema: *const SfSchema) -> usize {
    schema.as_ref().map_or(0, |s| s.schema.properties().len())
}

/// # Safety
/// `schema` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_warning_count(schema: *const SfSchema) -> usize {
    schema.as_ref().map_or(0, |s| s.warnings.len())
}

/// Borrowed warning text, valid while the handle lives; NULL when out of
/// range.
///
/// # Safety
/// `schema` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_warning(schema: *const SfSchema, index: usize) -> *const c_char {
    schema
        .as_ref()
        .and_then(|s| s.warnings.get(index))
        .map_or(ptr::null(), |w| w.as_ptr())
}

/// Canonical JSON of the schema.
///
/// # Safety
/// `schema` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_to_json(schema: *const SfSchema, out: *mut *mut c_char) -> SfStatus {
    guard(|| put_string(out, model::to_canonical_json(&schema_arg(schema)?.schema)))
}

/// New handle with every entity type's properties unioned with its
/// ancestors'.
///
/// # Safety
/// `schema` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_inherit(schema: *const SfSchema, out: *mut *mut SfSchema) -> SfStatus {
    guard(|| {
        let s = schema_arg(schema)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(SfSchema {
            schema: s.schema.inherit_properties(),
            warnings: Vec::new(),
        }));
        Ok(())
    })
}

/// Focus(e), which equals Cue_er(e).
///
/// # Safety
/// `schema` must be a valid handle, `entity` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_focus_e(schema: *const SfSchema, entity: *const c_char, out: *mut f64) -> SfStatus {
    guard(|| {
        let s = schema_arg(schema)?;
        let id = str_arg(entity, "entity")?;
        put_f64(out, lib(CueIndex::new(&s.schema).focus_e(id))?)
    })
}

/// # Safety
/// As for `sf_focus_e`.
#[no_mangle]
pub unsafe extern "C" fn sf_normalized_cue(schema: *const SfSchema, entity: *const c_char, out: *mut f64) -> SfStatus {
    guard(|| {
        let s = schema_arg(schema)?;
        let id = str_arg(entity, "entity")?;
        put_f64(out, lib(CueIndex::new(&s.schema).normalized_cue(id))?)
    })
}

/// # Safety
/// `schema` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_focus_k(schema: *const SfSchema, out: *mut f64) -> SfStatus {
    guard(|| put_f64(out, metrics::focus_k(&schema_arg(schema)?.schema)))
}

/// # Safety
/// `schema` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_cue_cr(schema: *const SfSchema, out: *mut f64) -> SfStatus {
    guard(|| put_f64(out, lib(metrics::cue_cr(&schema_arg(schema)?.schema))?))
}

/// # Safety
/// `schema` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_balance(schema: *const SfSchema, out: *mut f64) -> SfStatus {
    guard(|| put_f64(out, lib(metrics::balance(&schema_arg(schema)?.schema))?))
}

/// Full metric report as CSV or JSON.
///
/// # Safety
/// `schema` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_metric_report(
    schema: *const SfSchema,
    format: SfOutputFormat,
    out: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        let r = metrics::metric_report(&schema_arg(schema)?.schema);
        put_string(
            out,
            match format {
                SfOutputFormat::Csv => r.to_csv(),
                SfOutputFormat::Json => r.to_json(),
            },
        )
    })
}

/// Ranks entity types with `metric` (`focus`, `tfidf`, `bm25`, `cmm`,
/// `dem`) using default parameters. `query` (comma or space separated) is
/// used by `cmm` and may be NULL.
///
/// # Safety
/// `schema` must be a valid handle, `metric` a NUL-terminated string,
/// `query` NULL or NUL-terminated, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_rank_entities(
    schema: *const SfSchema,
    metric: *const c_char,
    query: *const c_char,
    format: SfOutputFormat,
    out: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        let s = schema_arg(schema)?;
        let metric: Metric = lib(str_arg(metric, "metric")?.parse())?;
        let params = RankParams {
            query: opt_str_arg(query, "query")?.map(QueryTerms::parse).unwrap_or_default(),
            ..RankParams::default()
        };
        let list = ranking::rank_entity_types(&s.schema, metric, &params);
        put_string(
            out,
            match format {
                SfOutputFormat::Csv => list.to_csv(),
                SfOutputFormat::Json => list.to_json(),
            },
        )
    })
}

/// Tags as a JSON array of strings.
///
/// # Safety
/// `schema` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_schema_tags(schema: *const SfSchema, k: usize, out: *mut *mut c_char) -> SfStatus {
    guard(|| {
        let tags = ranking::derive_schema_tags(&schema_arg(schema)?.schema, k);
        put_string(out, serde_json::to_string(&tags).expect("strings serialize"))
    })
}

/// Formal context in Burmeister `.cxt` form.
///
/// # Safety
/// `schema` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_export_cxt(schema: *const SfSchema, out: *mut *mut c_char) -> SfStatus {
    guard(|| {
        let ctx = FormalContext::from_schema(&schema_arg(schema)?.schema);
        put_string(out, lib(ctx.to_cxt())?)
    })
}

/// Entity type recognition for one model (`tree` or `knn`) with the default
/// hyperparameter grids; writes the JSON report.
///
/// # Safety
/// `schema` must be a valid handle, `model` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sf_etr_run(
    schema: *const SfSchema,
    model: *const c_char,
    seed: u64,
    per_type: usize,
    retention: f64,
    noise: f64,
    outer_folds: usize,
    inner_folds: usize,
    out: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        let s = schema_arg(schema)?;
        let kind: ModelKind = lib(str_arg(model, "model")?.parse())?;
        let generator = lib(GeneratorParams::new(per_type, retention, noise, seed))?;
        let cv = CvConfig {
            outer_folds,
            inner_folds,
            ..CvConfig::with_seed(seed)
        };
        let report = lib(etr::run_etr(&s.schema, kind, generator, &cv))?;
        put_string(out, report.to_json())
    })
}

/// Spearman rank correlation of two arrays of length `n` (n ≥ 3).
///
/// # Safety
/// `x` and `y` must point to `n` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_spearman(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> SfStatus {
    guard(|| {
        if x.is_null() || y.is_null() {
            return Err(null("x/y"));
        }
        let xs = std::slice::from_raw_parts(x, n);
        let ys = std::slice::from_raw_parts(y, n);
        put_f64(out, lib(etr::spearman(xs, ys))?)
    })
}
