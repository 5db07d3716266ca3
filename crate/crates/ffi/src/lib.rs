//! C interface to the editor engine.
//!
//! Every fallible function returns an [`AbtStatus`]. On failure the message
//! is kept per thread and read with [`abt_last_error`]. Strings returned to
//! the caller are released with [`abt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use abt_edit::abt::{check_well_formed, parse_tree, WellFormedTree};
use abt_edit::engine::{parse_editor_expr, run, Config, RunOutcome};
use abt_edit::logic::{parse_condition, satisfies};
use abt_edit::LanguageSpec;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidSpec = 3,
    InvalidTree = 4,
    ParseError = 5,
    Stuck = 6,
    FuelExhausted = 7,
    Panic = 8,
}

/// An editor-extended language.
pub struct AbtLanguage {
    spec: Arc<LanguageSpec>,
}

/// A tree being edited in some language.
pub struct AbtEditor {
    spec: Arc<LanguageSpec>,
    tree: WellFormedTree,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: AbtStatus, msg: impl Into<String>) -> AbtStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into [`AbtStatus::Panic`].
fn guard(f: impl FnOnce() -> AbtStatus) -> AbtStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(AbtStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, AbtStatus> {
    if p.is_null() {
        return Err(fail(AbtStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(AbtStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// The message of the last failed call on this thread, or NULL. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn abt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn abt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a language document and adds the cursor and hole operators.
///
/// # Safety
/// `document` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn abt_language_load(document: *const c_char, out: *mut *mut AbtLanguage) -> AbtStatus {
    guard(|| {
        if out.is_null() {
            return fail(AbtStatus::NullArgument, "null output pointer");
        }
        let doc = match text(document) {
            Ok(d) => d,
            Err(s) => return s,
        };
        match LanguageSpec::load(doc).and_then(|s| s.editor_extend()) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(AbtLanguage { spec: Arc::new(spec) }));
                AbtStatus::Ok
            }
            Err(e) => fail(AbtStatus::InvalidSpec, e.to_string()),
        }
    })
}

/// # Safety
/// `lang` must come from [`abt_language_load`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn abt_language_free(lang: *mut AbtLanguage) {
    if !lang.is_null() {
        drop(Box::from_raw(lang));
    }
}

/// Starts an editor on `(cursor (hole sort))`.
///
/// # Safety
/// `lang` must be a live language; `sort` a NUL-terminated string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn abt_editor_new(
    lang: *const AbtLanguage,
    sort: *const c_char,
    out: *mut *mut AbtEditor,
) -> AbtStatus {
    guard(|| {
        if lang.is_null() || out.is_null() {
            return fail(AbtStatus::NullArgument, "null argument");
        }
        let sort = match text(sort) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let spec = (*lang).spec.clone();
        let tree = match spec.sort(sort).map_err(|e| e.to_string()).and_then(|s| {
            WellFormedTree::initial(&spec, s).map_err(|e| e.to_string())
        }) {
            Ok(t) => t,
            Err(m) => return fail(AbtStatus::InvalidTree, m),
        };
        *out = Box::into_raw(Box::new(AbtEditor { spec, tree }));
        AbtStatus::Ok
    })
}

/// Starts an editor on a tree given in s-expression form.
///
/// # Safety
/// As for [`abt_editor_new`].
#[no_mangle]
pub unsafe extern "C" fn abt_editor_from_tree(
    lang: *const AbtLanguage,
    tree: *const c_char,
    out: *mut *mut AbtEditor,
) -> AbtStatus {
    guard(|| {
        if lang.is_null() || out.is_null() {
            return fail(AbtStatus::NullArgument, "null argument");
        }
        let src = match text(tree) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let spec = (*lang).spec.clone();
        match parse_tree(src, &spec).and_then(|a| check_well_formed(&a, &spec)) {
            Ok(tree) => {
                *out = Box::into_raw(Box::new(AbtEditor { spec, tree }));
                AbtStatus::Ok
            }
            Err(e) => fail(AbtStatus::InvalidTree, e.to_string()),
        }
    })
}

/// # Safety
/// `ed` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn abt_editor_free(ed: *mut AbtEditor) {
    if !ed.is_null() {
        drop(Box::from_raw(ed));
    }
}

/// The current tree in s-expression form. Free with [`abt_string_free`].
///
/// # Safety
/// `ed` must be a live editor.
#[no_mangle]
pub unsafe extern "C" fn abt_editor_tree(ed: *const AbtEditor) -> *mut c_char {
    if ed.is_null() {
        set_error("null editor");
        return ptr::null_mut();
    }
    to_c((*ed).tree.to_string())
}

/// Runs a script with at most `fuel` steps. The tree changes only when the
/// script terminates; `steps` (may be NULL) receives the step count.
///
/// # Safety
/// `ed` must be a live editor; `script` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn abt_editor_run(
    ed: *mut AbtEditor,
    script: *const c_char,
    fuel: usize,
    steps: *mut usize,
) -> AbtStatus {
    guard(|| {
        if ed.is_null() {
            return fail(AbtStatus::NullArgument, "null editor");
        }
        let src = match text(script) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let ed = &mut *ed;
        let expr = match parse_editor_expr(src) {
            Ok(e) => e,
            Err(e) => return fail(AbtStatus::ParseError, e.to_string()),
        };
        let config = match Config::new(expr, ed.tree.clone()) {
            Ok(c) => c,
            Err(e) => return fail(AbtStatus::ParseError, e.to_string()),
        };
        let result = run(config, &ed.spec, fuel);
        if !steps.is_null() {
            *steps = result.steps();
        }
        match result.outcome {
            RunOutcome::Terminal => {
                ed.tree = result.last.tree().clone();
                AbtStatus::Ok
            }
            RunOutcome::Stuck(s) => fail(AbtStatus::Stuck, format!("{}: {}", s.reason.code(), s.detail)),
            RunOutcome::FuelExhausted => fail(AbtStatus::FuelExhausted, "fuel exhausted"),
        }
    })
}

/// Evaluates a condition on the subtree under the cursor.
///
/// # Safety
/// `ed` must be a live editor; `phi` a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn abt_editor_query(ed: *const AbtEditor, phi: *const c_char, out: *mut bool) -> AbtStatus {
    guard(|| {
        if ed.is_null() || out.is_null() {
            return fail(AbtStatus::NullArgument, "null argument");
        }
        let src = match text(phi) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let ed = &*ed;
        match parse_condition(src).and_then(|p| satisfies(ed.tree.focus(), &p, &ed.spec)) {
            Ok(v) => {
                *out = v;
                AbtStatus::Ok
            }
            Err(e) => fail(AbtStatus::ParseError, e.to_string()),
        }
    })
}
