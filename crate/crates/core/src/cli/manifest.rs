use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{ArgMatches, Command};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Record of one CLI invocation, written next to its main output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub flags: BTreeMap<String, Vec<String>>,
    pub seed: Option<u64>,
    pub input_digests: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
    pub error: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs read and outputs written during a run.
pub struct RunContext {
    started: Instant,
    started_unix: f64,
    pub command: String,
    pub argv: Vec<String>,
    pub flags: BTreeMap<String, Vec<String>>,
    pub seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

/// Flattens the leaf subcommand's arguments, defaults included.
pub fn command_flags(cli: &Command, matches: &ArgMatches) -> (String, BTreeMap<String, Vec<String>>) {
    let mut names = Vec::new();
    let mut m = matches;
    let mut cmd = cli;
    while let Some((name, sub)) = m.subcommand() {
        names.push(name.to_string());
        m = sub;
        cmd = cmd.find_subcommand(name).expect("matched subcommand exists");
    }
    let mut flags = BTreeMap::new();
    for arg in cmd.get_arguments() {
        let id = arg.get_id();
        if let Ok(Some(values)) = m.try_get_raw(id.as_str()) {
            flags.insert(
                id.as_str().to_string(),
                values.map(|v| v.to_string_lossy().into_owned()).collect(),
            );
        }
    }
    (names.join(" "), flags)
}

impl RunContext {
    pub fn new(argv: Vec<String>, cli: &Command, matches: &ArgMatches) -> Self {
        let (command, flags) = command_flags(cli, matches);
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Self {
            started: Instant::now(),
            started_unix,
            command,
            argv,
            flags,
            seed: None,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path)?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e).into())
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        std::fs::write(path, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn finish(&self, exit_code: i32, error: Option<String>) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            argv: self.argv.clone(),
            flags: self.flags.clone(),
            seed: self.seed,
            input_digests: self.inputs.clone(),
            outputs: self.outputs.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            exit_code,
            error,
        }
    }
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
