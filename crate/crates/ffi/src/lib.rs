//! C ABI over `forcegraph`: parse annotated documents, run attachment
//! strategies, load trained models and score counts.
//!
//! Every fallible call returns an [`FgStatus`]; on failure the message is
//! available from [`fg_last_error`] on the same thread. Strings handed out by
//! the library must be released with [`fg_string_free`], handles with their
//! own `*_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use libc::c_char;

use forcegraph::conllu::{align_trees, parse_conllu};
use forcegraph::corpus::{parse_brat, serialize_brat, Document};
use forcegraph::depgraph::DepTree;
use forcegraph::eval::PrfRow;
use forcegraph::ner::{predict_entities, NerMode, TaggerModel};
use forcegraph::pipeline::{load_relnet, load_tagger};
use forcegraph::relext::{extract_document, MissingParse, Strategy};
use forcegraph::relnet::RelNetModel;
use forcegraph::Error;

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed BRAT, CoNLL-U or model text.
    Parse = 3,
    Io = 4,
    /// A model or parse the operation needs is missing.
    Prerequisite = 5,
    InvalidArgument = 6,
    Internal = 7,
}

/// Precision, recall and F1 from raw counts.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FgPrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// A parsed document with its aligned dependency trees.
pub struct FgDocument {
    doc: Document,
    trees: Vec<DepTree>,
}

/// A trained relation classifier.
pub struct FgRelNet(RelNetModel);

/// A trained sequence tagger.
pub struct FgTagger(TaggerModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: FgStatus, msg: impl Into<String>) -> FgStatus {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> FgStatus {
    match err {
        Error::Brat { .. }
        | Error::SurfaceMismatch { .. }
        | Error::OffsetOutOfRange { .. }
        | Error::Conllu { .. }
        | Error::NotATree(_)
        | Error::ModelFormat(_)
        | Error::Iob(_) => FgStatus::Parse,
        Error::Io { .. } => FgStatus::Io,
        Error::Prerequisite(_) | Error::Empty(_) => FgStatus::Prerequisite,
        Error::Config(_)
        | Error::TokenNotInTree(_)
        | Error::NoTokenInSentence(_)
        | Error::Dimension(_) => FgStatus::InvalidArgument,
        _ => FgStatus::Internal,
    }
}

fn from_error(err: Error) -> FgStatus {
    fail(status_of(&err), err.to_string())
}

/// Borrow a required C string argument.
unsafe fn arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, FgStatus> {
    if p.is_null() {
        return Err(fail(FgStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FgStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> FgStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            FgStatus::Ok
        }
        Err(_) => fail(FgStatus::Internal, "output contains a NUL byte"),
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! out_ptr {
    ($p:expr, $name:literal) => {
        if $p.is_null() {
            return fail(FgStatus::NullArgument, concat!($name, " is null"));
        }
    };
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library; valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn fg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn fg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a document from its text, BRAT annotations and optional CoNLL-U
/// parse (NULL for none).
///
/// # Safety
/// String arguments must be NUL-terminated or NULL; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_document_parse(
    text: *const c_char,
    ann: *const c_char,
    conllu: *const c_char,
    out: *mut *mut FgDocument,
) -> FgStatus {
    out_ptr!(out, "out");
    let text = tri!(arg(text, "text"));
    let ann = tri!(arg(ann, "ann"));
    let doc = match parse_brat(ann, text) {
        Ok(d) => d,
        Err(e) => return from_error(e),
    };
    let trees = if conllu.is_null() {
        Vec::new()
    } else {
        let src = tri!(arg(conllu, "conllu"));
        let mut trees = match parse_conllu(src) {
            Ok(t) => t,
            Err(e) => return from_error(e),
        };
        align_trees(text, &mut trees);
        trees
    };
    *out = Box::into_raw(Box::new(FgDocument { doc, trees }));
    FgStatus::Ok
}

/// # Safety
/// `doc` must come from [`fg_document_parse`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fg_document_free(doc: *mut FgDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// # Safety
/// `doc` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn fg_document_entity_count(doc: *const FgDocument) -> usize {
    doc.as_ref().map_or(0, |d| d.doc.entities.len())
}

/// # Safety
/// `doc` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn fg_document_relation_count(doc: *const FgDocument) -> usize {
    doc.as_ref().map_or(0, |d| d.doc.relations.len())
}

/// Canonical BRAT text of the document.
///
/// # Safety
/// `doc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_document_serialize(
    doc: *const FgDocument,
    out: *mut *mut c_char,
) -> FgStatus {
    out_ptr!(out, "out");
    let Some(doc) = doc.as_ref() else {
        return fail(FgStatus::NullArgument, "doc is null");
    };
    write_string(out, serialize_brat(&doc.doc))
}

/// Run `strategy` (e.g. "sdp-constrained") over the document's entities and
/// write the attachments as a JSON array. Classifier strategies need `model`;
/// others accept NULL. With `tagger`, entities come from the tagger instead
/// of the gold annotations.
///
/// # Safety
/// Handles must be live or NULL where allowed; `strategy` must be a
/// NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_document_extract(
    doc: *const FgDocument,
    strategy: *const c_char,
    model: *const FgRelNet,
    tagger: *const FgTagger,
    out_json: *mut *mut c_char,
) -> FgStatus {
    out_ptr!(out_json, "out_json");
    let Some(doc) = doc.as_ref() else {
        return fail(FgStatus::NullArgument, "doc is null");
    };
    let strategy: Strategy = match tri!(arg(strategy, "strategy")).parse() {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    let entities = match tagger.as_ref() {
        Some(t) => predict_entities(NerMode::Model(&t.0), &doc.doc),
        None => doc.doc.entities.clone(),
    };
    let result = extract_document(
        &doc.doc.doc_id,
        &doc.doc.text,
        &entities,
        &doc.trees,
        strategy,
        model.as_ref().map(|m| &m.0),
        MissingParse::Fallback,
    );
    match result {
        Ok(atts) => match serde_json::to_string(&atts) {
            Ok(json) => write_string(out_json, json),
            Err(e) => fail(FgStatus::Internal, e.to_string()),
        },
        Err(e) => from_error(e),
    }
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_relnet_load(path: *const c_char, out: *mut *mut FgRelNet) -> FgStatus {
    out_ptr!(out, "out");
    let path = tri!(arg(path, "path"));
    match load_relnet(Path::new(path)) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(FgRelNet(m)));
            FgStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// # Safety
/// `model` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn fg_relnet_parameter_count(model: *const FgRelNet) -> usize {
    model.as_ref().map_or(0, |m| m.0.parameter_count())
}

/// # Safety
/// `model` must come from [`fg_relnet_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fg_relnet_free(model: *mut FgRelNet) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_tagger_load(path: *const c_char, out: *mut *mut FgTagger) -> FgStatus {
    out_ptr!(out, "out");
    let path = tri!(arg(path, "path"));
    match load_tagger(Path::new(path)) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(FgTagger(m)));
            FgStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Tag raw text; writes the predicted entities as a JSON array.
///
/// # Safety
/// `tagger` must be live; `text` NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn fg_tagger_tag(
    tagger: *const FgTagger,
    text: *const c_char,
    out_json: *mut *mut c_char,
) -> FgStatus {
    out_ptr!(out_json, "out_json");
    let Some(tagger) = tagger.as_ref() else {
        return fail(FgStatus::NullArgument, "tagger is null");
    };
    let text = tri!(arg(text, "text"));
    let doc = Document {
        text: text.to_string(),
        ..Document::default()
    };
    let ents = predict_entities(NerMode::Model(&tagger.0), &doc);
    match serde_json::to_string(&ents) {
        Ok(json) => write_string(out_json, json),
        Err(e) => fail(FgStatus::Internal, e.to_string()),
    }
}

/// # Safety
/// `tagger` must come from [`fg_tagger_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fg_tagger_free(tagger: *mut FgTagger) {
    if !tagger.is_null() {
        drop(Box::from_raw(tagger));
    }
}

/// Precision, recall and F1 for the given counts. Zero denominators give 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fg_prf(tp: usize, fp: usize, fn_: usize, out: *mut FgPrf) -> FgStatus {
    out_ptr!(out, "out");
    let row = PrfRow::from_counts("", tp, fp, fn_);
    *out = FgPrf {
        precision: row.precision,
        recall: row.recall,
        f1: row.f1,
    };
    FgStatus::Ok
}
