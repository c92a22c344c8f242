//! Drives the `modescreen` binary for the CLI and acceptance suites.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn modescreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modescreen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = modescreen(args);
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn collect(dir: &Path, into: &mut Vec<(String, Vec<u8>)>) {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect(&path, into);
        } else {
            into.push((path.display().to_string(), fs::read(&path).unwrap()));
        }
    }
}

/// Every subcommand at small scale, writing under `dir`. Returns each command
/// name with the bytes it produced: stdout plus every file written, relative
/// to `dir`.
pub fn run_every_command(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let p = |name: &str| dir.join(name).display().to_string();
    let (synth, bimodal) = (p("synth.csv"), p("bimodal.csv"));
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("synth", vec!["synth", "--spec", "threecomp20", "--n", "400", "--seed", "5", "--out", &synth].into_iter().map(String::from).collect()),
        ("synth-1d", vec!["synth", "--spec", "bimodal1d", "--n", "300", "--seed", "6", "--out", &bimodal].into_iter().map(String::from).collect()),
        ("dip", vec!["dip".into(), "--input".into(), bimodal.clone(), "--alpha".into(), "0.05".into()]),
        ("screen", vec!["screen".into(), "--input".into(), synth.clone(), "--out".into(), p("selection.csv")]),
        ("cluster", vec!["cluster".into(), "--input".into(), synth.clone(), "--features".into(), "0,1".into(), "--out".into(), p("labels.csv"), "--modes-out".into(), p("modes.csv")]),
        ("pipeline", vec!["pipeline".into(), "--input".into(), synth.clone(), "--out-prefix".into(), p("run")]),
        ("dip-power", vec!["experiment", "dip-power", "--n", "50,100", "--alpha", "0.05,0.1", "--reps", "50", "--out"].into_iter().map(String::from).chain([p("power.csv")]).collect()),
        ("support-recovery", vec!["experiment", "support-recovery", "--n", "200", "--d", "20", "--s", "2", "--reps", "5", "--out"].into_iter().map(String::from).chain([p("support.csv")]).collect()),
        ("full", vec!["experiment", "full", "--n", "1000", "--out"].into_iter().map(String::from).chain([p("full")]).collect()),
        ("consistency", vec!["experiment", "consistency", "--n", "100,200", "--reps", "3", "--out"].into_iter().map(String::from).chain([p("consistency.csv")]).collect()),
        ("calibrate", vec!["calibrate", "--n", "30", "--alpha", "0.05,0.1", "--reps", "1000", "--out"].into_iter().map(String::from).chain([p("table.csv")]).collect()),
    ];
    let mut outputs = Vec::new();
    for (name, args) in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        outputs.push((format!("{name} stdout"), ok(&args)?));
    }
    let mut files = Vec::new();
    collect(dir, &mut files);
    let prefix = dir.display().to_string();
    outputs.extend(files.into_iter().map(|(path, bytes)| (path.replacen(&prefix, "", 1), bytes)));
    Ok(outputs)
}

/// Runs every command twice in fresh directories and compares all bytes.
/// Returns the number of outputs compared.
pub fn check_cli_determinism(root: &Path) -> Result<usize, String> {
    let first = run_every_command(&root.join("a"))?;
    let second = run_every_command(&root.join("b"))?;
    if first.len() != second.len() {
        return Err(format!("{} outputs vs {}", first.len(), second.len()));
    }
    for ((name, a), (other, b)) in first.iter().zip(&second) {
        if name != other || a != b {
            return Err(format!("{name} differs between runs"));
        }
    }
    Ok(first.len())
}
