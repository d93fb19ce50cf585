mod args;
mod commands;
mod manifest;

use args::{Cli, Command};
use clap::Parser;
use commands::{execute, CliError};
use manifest::{manifest_name, RunManifest, SCHEMA_VERSION};
use serde::Serialize;
use std::ffi::OsString;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn strict_from_env() -> bool {
    std::env::var("CI").is_ok_and(|v| !v.is_empty() && v != "false" && v != "0")
}

/// Drops the flags that do not affect payloads.
fn replay_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        match a.as_str() {
            "--out" | "--threads" => {
                it.next();
            }
            "--strict" => {}
            s if s.starts_with("--out=") || s.starts_with("--threads=") => {}
            _ => out.push(a.clone()),
        }
    }
    out
}

fn write_outputs(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn run_command(mut command: Command, out: &Path, strict: bool, argv: &[String]) -> Result<Vec<u8>, CliError> {
    let started = now();
    let mut args = replay_args(argv);
    let mut master_seed = None;
    if let Some(seed) = command.seed_mut() {
        if seed.is_none() {
            if strict {
                return Err(CliError::Config("--seed is required in strict mode".into()));
            }
            let drawn = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0);
            *seed = Some(drawn);
            args.extend(["--seed".to_string(), drawn.to_string()]);
        }
        master_seed = *seed;
    }
    let outputs = execute(&command)?;
    write_outputs(out, &outputs.files)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: command.name().into(),
        config: serde_json::to_value(&command)?,
        args,
        master_seed,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started,
        finished: now(),
        output_paths: outputs.files.iter().map(|(n, _)| n.clone()).collect(),
    };
    let mut m = serde_json::to_vec_pretty(&manifest)?;
    m.push(b'\n');
    fs::write(out.join(manifest_name(command.name())), m)?;
    Ok(outputs.files.into_iter().next().map(|(_, b)| b).unwrap_or_default())
}

#[derive(Serialize)]
struct FileCheck {
    name: String,
    identical: bool,
}

#[derive(Serialize)]
struct ReplayReport {
    schema_version: u32,
    command: String,
    replay_dir: String,
    files: Vec<FileCheck>,
    identical: bool,
}

fn replay(manifest_path: &Path, out: &Path) -> Result<Vec<u8>, CliError> {
    let text = fs::read_to_string(manifest_path).map_err(|e| CliError::Config(format!("{}: {e}", manifest_path.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad manifest: {e}")))?;
    let source = manifest_path.parent().unwrap_or(Path::new("."));
    let mut argv = vec!["gbp-spectra".to_string()];
    argv.extend(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Config(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Config("replay cannot be nested".into()));
    }
    let dir = out.join(format!("replay-{}", manifest.command));
    let outputs = execute(&cli.command)?;
    write_outputs(&dir, &outputs.files)?;
    let mut files = Vec::new();
    for name in &manifest.output_paths {
        let original = fs::read(source.join(name))?;
        let fresh = outputs.files.iter().find(|(n, _)| n == name).map(|(_, b)| b);
        files.push(FileCheck {
            name: name.clone(),
            identical: fresh == Some(&original),
        });
    }
    let identical = files.iter().all(|f| f.identical);
    let report = ReplayReport {
        schema_version: SCHEMA_VERSION,
        command: manifest.command.clone(),
        replay_dir: dir.display().to_string(),
        files,
        identical,
    };
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    fs::create_dir_all(out)?;
    fs::write(out.join("replay.json"), &bytes)?;
    if !identical {
        print!("{}", String::from_utf8_lossy(&bytes));
        return Err(CliError::Other(format!("replay of {} differs", manifest.command)));
    }
    Ok(bytes)
}

fn run<I: IntoIterator<Item = OsString>>(argv: I) -> i32 {
    let argv: Vec<OsString> = argv.into_iter().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 || rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("configuration error: invalid --threads {t}");
            return 2;
        }
    }
    let strict = cli.strict || strict_from_env();
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Replay(r) => replay(&r.manifest, &cli.out),
        c => run_command(c.clone(), &cli.out, strict, &argv),
    };
    match result {
        Ok(payload) => {
            print!("{}", String::from_utf8_lossy(&payload));
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn main() {
    std::process::exit(run(std::env::args_os()));
}
