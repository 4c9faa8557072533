//! C ABI over `modqd`.
//!
//! Genomes cross the boundary as opaque `ModqdGenome` handles. Every
//! fallible call returns a `ModqdStatus`; on failure the message is available
//! from `modqd_last_error()` on the same thread. Strings returned by the
//! library must be released with `modqd_string_free`, handles with
//! `modqd_genome_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use modqd::runner::{self, ExperimentConfig, RunnerError};
use modqd::sim::{joint_angle, SimConfig};
use modqd::variation::bounce_back;
use modqd::{random_genome, ControllerGenes, Genome, MorphLimits};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModqdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Invalid = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque genome handle.
pub struct ModqdGenome {
    genome: Genome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(ModqdStatus, String);

impl From<RunnerError> for Failure {
    fn from(e: RunnerError) -> Self {
        let status = match e {
            RunnerError::Config(_) => ModqdStatus::Invalid,
            RunnerError::Io { .. } => ModqdStatus::Io,
            RunnerError::Csv { .. } | RunnerError::Genome { .. } => ModqdStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ModqdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ModqdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            ModqdStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ModqdStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(ModqdStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn genome_ref<'a>(g: *const ModqdGenome) -> Result<&'a Genome, Failure> {
    g.as_ref().map(|h| &h.genome).ok_or_else(|| null("genome"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_handle(genome: Genome) -> *mut ModqdGenome {
    Box::into_raw(Box::new(ModqdGenome { genome }))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next library call on the same thread.
#[no_mangle]
pub extern "C" fn modqd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn modqd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Draws a random genome with the default size and depth limits.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn modqd_genome_random(seed: u64, out: *mut *mut ModqdGenome) -> ModqdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_genome(&mut rng, &MorphLimits::default());
        write_out(out, into_handle(g), "out")
    })
}

/// Parses the JSON genome format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn modqd_genome_from_json(json: *const c_char, out: *mut *mut ModqdGenome) -> ModqdStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = Genome::from_text(text).map_err(|e| Failure(ModqdStatus::Parse, e.to_string()))?;
        write_out(out, into_handle(g), "out")
    })
}

/// Serializes a genome. Free the result with `modqd_string_free`.
///
/// # Safety
/// `genome` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn modqd_genome_to_json(genome: *const ModqdGenome, out: *mut *mut c_char) -> ModqdStatus {
    guard(|| {
        let g = genome_ref(genome)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CString::new(g.to_text()).map_err(|e| Failure(ModqdStatus::Invalid, e.to_string()))?;
        write_out(out, text.into_raw(), "out")
    })
}

/// Number of genotype nodes, including ones the phenotype does not realize.
///
/// # Safety
/// `genome` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn modqd_genome_node_count(genome: *const ModqdGenome, out: *mut usize) -> ModqdStatus {
    guard(|| {
        let g = genome_ref(genome)?;
        write_out(out, g.node_count(), "out")
    })
}

/// Realized `(bricks, servos)` under the default limits.
///
/// # Safety
/// `genome` must be a live handle; `bricks` and `servos` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn modqd_genome_descriptor(
    genome: *const ModqdGenome,
    bricks: *mut usize,
    servos: *mut usize,
) -> ModqdStatus {
    guard(|| {
        let d = genome_ref(genome)?.descriptor(&MorphLimits::default());
        if bricks.is_null() || servos.is_null() {
            return Err(null("bricks/servos"));
        }
        write_out(bricks, d.m, "bricks")?;
        write_out(servos, d.j, "servos")
    })
}

/// Simulates a genome with the default limits and simulator settings.
/// `bricks` and `servos` may be null.
///
/// # Safety
/// `genome` must be a live handle; non-null pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn modqd_evaluate(
    genome: *const ModqdGenome,
    fitness: *mut f64,
    bricks: *mut usize,
    servos: *mut usize,
) -> ModqdStatus {
    guard(|| {
        let g = genome_ref(genome)?;
        if fitness.is_null() {
            return Err(null("fitness"));
        }
        let e = modqd::evaluate(g, &MorphLimits::default(), &SimConfig::default());
        fitness.write(e.fitness);
        if !bricks.is_null() {
            bricks.write(e.descriptor.m);
        }
        if !servos.is_null() {
            servos.write(e.descriptor.j);
        }
        Ok(())
    })
}

/// Releases a genome handle. Null is ignored.
///
/// # Safety
/// `genome` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn modqd_genome_free(genome: *mut ModqdGenome) {
    if !genome.is_null() {
        drop(Box::from_raw(genome));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn modqd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs an experiment described by a TOML config string (same keys as the
/// CLI's `--config` file) and writes its outputs.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn modqd_run(config_toml: *const c_char) -> ModqdStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_toml_str(read_str(config_toml, "config_toml")?)?;
        runner::run(&cfg)?;
        Ok(())
    })
}

/// Runs an experiment from a TOML config file.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn modqd_run_file(path: *const c_char) -> ModqdStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_file(Path::new(read_str(path, "path")?))?;
        runner::run(&cfg)?;
        Ok(())
    })
}

/// Folds `v` back into `[min, max]` by reflection. Returns NaN unless all
/// arguments are finite and `min < max`.
#[no_mangle]
pub extern "C" fn modqd_bounce_back(v: f64, min: f64, max: f64) -> f64 {
    if !(min.is_finite() && max.is_finite() && min < max && v.is_finite()) {
        return f64::NAN;
    }
    bounce_back(v, min, max)
}

/// Clamped servo set-point at time `t`.
#[no_mangle]
pub extern "C" fn modqd_joint_angle(alpha: f64, omega: f64, phi: f64, offset: f64, t: f64) -> f64 {
    joint_angle(&ControllerGenes { alpha, omega, phi, offset }, t)
}
