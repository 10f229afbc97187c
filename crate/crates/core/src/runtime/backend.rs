use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::time::Duration;

use super::sidecar::{load_sidecar, DetectionSidecar};
use crate::dataset::file_stem;
use crate::detection::PostProcess;
use crate::error::{Error, Result};

pub const REPLAY_LABEL: &str = "sidecar-replay";
pub const PROCESS_LABEL: &str = "external-process";
pub const FIXED_LATENCY_LABEL: &str = "fixed-latency";
pub const SLEEP_LABEL: &str = "sleep-stub";

/// Source of raw detections for a list of images.
pub trait Detector {
    fn label(&self) -> &str;

    /// One sidecar per image, in input order.
    fn detect(&mut self, images: &[PathBuf]) -> Result<Vec<DetectionSidecar>>;

    /// Latency the backend reports for its last image, used by benchmarks in
    /// place of wall-clock time.
    fn reported_latency_ms(&self) -> Option<f64> {
        None
    }
}

/// Runs a detector and validates and post-processes its output.
pub fn detect(
    detector: &mut dyn Detector,
    images: &[PathBuf],
    post: Option<&PostProcess>,
) -> Result<Vec<DetectionSidecar>> {
    let raw = detector.detect(images)?;
    if raw.len() != images.len() {
        return Err(Error::backend(
            None,
            format!("{} results for {} images", raw.len(), images.len()),
        ));
    }
    raw.into_iter()
        .map(|mut sc| {
            sc.validate()?;
            if let Some(post) = post {
                let kept = post.apply(&sc.detections()?);
                sc = DetectionSidecar::from_detections(sc.image, sc.width, sc.height, &kept);
            }
            Ok(sc)
        })
        .collect()
}

/// Reads `<dir>/<stem>.json` for each image.
#[derive(Debug, Clone)]
pub struct ReplayDetector {
    dir: PathBuf,
}

impl ReplayDetector {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(Error::invalid(format!(
                "sidecar directory {} does not exist",
                dir.display()
            )));
        }
        Ok(Self { dir })
    }

    pub fn sidecar_path(&self, image: &Path) -> PathBuf {
        self.dir.join(format!("{}.json", file_stem(image)))
    }
}

impl Detector for ReplayDetector {
    fn label(&self) -> &str {
        REPLAY_LABEL
    }

    fn detect(&mut self, images: &[PathBuf]) -> Result<Vec<DetectionSidecar>> {
        images.iter().map(|p| load_sidecar(self.sidecar_path(p))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProcessMode {
    /// One process per call: all paths are written, stdin is closed, then
    /// every output line is read.
    #[default]
    Batch,
    /// One long-lived process answering a line for each path it is sent.
    Interactive,
}

/// External detector speaking the line protocol: image paths in, one sidecar
/// JSON document per line out, in order.
pub struct ProcessDetector {
    program: String,
    args: Vec<String>,
    mode: ProcessMode,
    session: Option<Session>,
}

struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    lines_read: usize,
}

impl ProcessDetector {
    /// `command` is the program followed by its arguments.
    pub fn new(command: &[String], mode: ProcessMode) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::config("detector command is empty"))?;
        Ok(Self {
            program: program.clone(),
            args: args.to_vec(),
            mode,
            session: None,
        })
    }

    fn spawn(&self) -> Result<Child> {
        Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::backend(None, format!("cannot start `{}`: {e}", self.program)))
    }

    fn run_batch(&self, images: &[PathBuf]) -> Result<Vec<DetectionSidecar>> {
        let mut child = self.spawn()?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let input: String = images.iter().map(|p| format!("{}\n", p.display())).collect();
        let writer = std::thread::spawn(move || {
            // a detector may exit without reading everything; that surfaces below
            let _ = stdin.write_all(input.as_bytes());
        });
        let mut stderr = child.stderr.take().expect("stderr is piped");
        let err_reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });
        let mut out = String::new();
        child
            .stdout
            .take()
            .expect("stdout is piped")
            .read_to_string(&mut out)
            .map_err(|e| Error::backend(None, format!("reading detector output: {e}")))?;
        let status = child.wait()?;
        let _ = writer.join();
        let err_text = err_reader.join().unwrap_or_default();
        if !status.success() {
            return Err(Error::backend(
                None,
                format!("detector exited with {status}{}", stderr_tail(&err_text)),
            ));
        }

        let lines: Vec<&str> = out.lines().collect();
        let mut results = Vec::with_capacity(images.len());
        for (i, line) in lines.iter().enumerate() {
            if i >= images.len() {
                return Err(Error::backend(
                    Some(i + 1),
                    format!("expected {} documents, got {}", images.len(), lines.len()),
                ));
            }
            results.push(parse_line(line, i + 1)?);
        }
        if results.len() < images.len() {
            return Err(Error::backend(
                Some(results.len() + 1),
                format!("expected {} documents, got {}", images.len(), results.len()),
            ));
        }
        Ok(results)
    }

    fn session(&mut self) -> Result<&mut Session> {
        if self.session.is_none() {
            let mut child = self.spawn()?;
            let stdin = child.stdin.take();
            let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
            // stderr is discarded in this mode so a chatty detector cannot block
            if let Some(mut e) = child.stderr.take() {
                std::thread::spawn(move || {
                    let _ = std::io::copy(&mut e, &mut std::io::sink());
                });
            }
            self.session = Some(Session {
                child,
                stdin,
                stdout,
                lines_read: 0,
            });
        }
        Ok(self.session.as_mut().expect("session was just set"))
    }

    fn run_interactive(&mut self, images: &[PathBuf]) -> Result<Vec<DetectionSidecar>> {
        let mut results = Vec::with_capacity(images.len());
        for p in images {
            let s = self.session()?;
            let line_no = s.lines_read + 1;
            let stdin = s.stdin.as_mut().expect("stdin stays open while the session lives");
            let sent = writeln!(stdin, "{}", p.display()).and_then(|_| stdin.flush());
            let mut line = String::new();
            let n = match sent {
                Ok(()) => s.stdout.read_line(&mut line).unwrap_or(0),
                Err(_) => 0,
            };
            if n == 0 {
                let status = self.close();
                return Err(Error::backend(
                    Some(line_no),
                    format!("detector stopped answering ({status})"),
                ));
            }
            s.lines_read += 1;
            results.push(parse_line(line.trim_end_matches(['\n', '\r']), line_no)?);
        }
        Ok(results)
    }

    /// Ends an interactive session and describes how the process exited.
    fn close(&mut self) -> String {
        let Some(mut s) = self.session.take() else {
            return "not running".into();
        };
        drop(s.stdin.take());
        for _ in 0..50 {
            if let Ok(Some(st)) = s.child.try_wait() {
                return st.to_string();
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let _ = s.child.kill();
        s.child
            .wait()
            .map(|st| st.to_string())
            .unwrap_or_else(|e| e.to_string())
    }
}

impl Drop for ProcessDetector {
    fn drop(&mut self) {
        self.close();
    }
}

impl Detector for ProcessDetector {
    fn label(&self) -> &str {
        PROCESS_LABEL
    }

    fn detect(&mut self, images: &[PathBuf]) -> Result<Vec<DetectionSidecar>> {
        match self.mode {
            ProcessMode::Batch => self.run_batch(images),
            ProcessMode::Interactive => self.run_interactive(images),
        }
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<DetectionSidecar> {
    DetectionSidecar::from_json(line)
        .map_err(|e| Error::backend(Some(line_no), format!("malformed document: {e}")))
}

fn stderr_tail(s: &str) -> String {
    let s = s.trim();
    if s.is_empty() {
        return String::new();
    }
    let tail: Vec<&str> = s.lines().rev().take(5).collect();
    let tail: Vec<&str> = tail.into_iter().rev().collect();
    format!("; stderr: {}", tail.join(" | "))
}

/// Returns empty detections and reports a fixed latency instead of being
/// timed. Useful for exercising benchmark arithmetic.
#[derive(Debug, Clone)]
pub struct FixedLatencyDetector {
    latency_ms: f64,
}

impl FixedLatencyDetector {
    pub fn new(latency_ms: f64) -> Result<Self> {
        if !(latency_ms.is_finite() && latency_ms > 0.0) {
            return Err(Error::config("latency must be a positive number of milliseconds"));
        }
        Ok(Self { latency_ms })
    }
}

fn empty_for(p: &Path) -> Result<DetectionSidecar> {
    let (w, h) = image::image_dimensions(p).map_err(|e| Error::from(e).in_file(p))?;
    Ok(DetectionSidecar::empty(file_stem(p), w, h))
}

impl Detector for FixedLatencyDetector {
    fn label(&self) -> &str {
        FIXED_LATENCY_LABEL
    }

    fn detect(&mut self, images: &[PathBuf]) -> Result<Vec<DetectionSidecar>> {
        images.iter().map(|p| empty_for(p)).collect()
    }

    fn reported_latency_ms(&self) -> Option<f64> {
        Some(self.latency_ms)
    }
}

/// Sleeps a fixed time per image and returns empty detections.
#[derive(Debug, Clone)]
pub struct SleepDetector {
    per_image: Duration,
}

impl SleepDetector {
    pub fn new(latency_ms: f64) -> Result<Self> {
        if !(latency_ms.is_finite() && latency_ms >= 0.0) {
            return Err(Error::config("latency must be a nonnegative number of milliseconds"));
        }
        Ok(Self {
            per_image: Duration::from_secs_f64(latency_ms / 1000.0),
        })
    }
}

impl Detector for SleepDetector {
    fn label(&self) -> &str {
        SLEEP_LABEL
    }

    fn detect(&mut self, images: &[PathBuf]) -> Result<Vec<DetectionSidecar>> {
        images
            .iter()
            .map(|p| {
                std::thread::sleep(self.per_image);
                empty_for(p)
            })
            .collect()
    }
}
