// SPDX-License-Identifier: Apache-2.0
//! Simulator, synthesizer and static-timing adapters. Each writes its
//! script into `<workdir>/.aieda/`, runs one child process at a time and
//! reduces the output to a [`ToolReport`].

use std::io;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::process::{run_process, Captured};
use crate::{parse_simulation, parse_sta, parse_synthesis, ToolError, ToolReport, ToolStatus};

/// Scratch directory for generated scripts and intermediate files.
pub const SCRATCH_DIR: &str = ".aieda";

/// Binary names or paths of the external tools.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolPaths {
    pub iverilog: String,
    pub vvp: String,
    pub yosys: String,
    pub sta: String,
}

impl Default for ToolPaths {
    fn default() -> Self {
        ToolPaths {
            iverilog: "iverilog".into(),
            vvp: "vvp".into(),
            yosys: "yosys".into(),
            sta: "sta".into(),
        }
    }
}

fn scratch(workdir: &Path) -> Result<PathBuf, ToolError> {
    let dir = workdir.join(SCRATCH_DIR);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn require(workdir: &Path, files: &[&Path]) -> Result<(), ToolError> {
    for f in files {
        if !workdir.join(f).is_file() {
            return Err(ToolError::MissingInput(f.to_path_buf()));
        }
    }
    Ok(())
}

/// Runs one tool step. `Err(report)` carries the terminal outcome when the
/// tool is absent or was killed.
fn step(
    program: &str,
    args: &[String],
    workdir: &Path,
    timeout: Duration,
) -> Result<Result<Captured, ToolReport>, ToolError> {
    match run_process(program, args, workdir, timeout) {
        Ok(c) if c.timed_out => Ok(Err(ToolReport::with_status(
            ToolStatus::Timeout,
            format!("{program} killed after {} ms", timeout.as_millis()),
            c.combined(),
        ))),
        Ok(c) => Ok(Ok(c)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Err(ToolReport::with_status(
            ToolStatus::ToolMissing,
            format!("{program} not found"),
            "",
        ))),
        Err(e) => Err(e.into()),
    }
}

fn exit_text(c: &Captured) -> String {
    c.exit_code
        .map_or_else(|| "a signal".to_string(), |code| code.to_string())
}

fn path_arg(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Quotes a path for a Yosys or Tcl script line.
fn quoted(p: &Path) -> String {
    format!(
        "\"{}\"",
        p.to_string_lossy()
            .replace('\\', "\\\\")
            .replace('"', "\\\"")
    )
}

/// Icarus Verilog: compile with `iverilog`, run with `vvp`.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub paths: ToolPaths,
    pub timeout: Duration,
}

impl Simulator {
    /// `sources` and `testbench` are relative to `workdir`.
    pub fn run(
        &self,
        sources: &[PathBuf],
        testbench: &Path,
        workdir: &Path,
    ) -> Result<ToolReport, ToolError> {
        let mut all: Vec<&Path> = sources.iter().map(PathBuf::as_path).collect();
        all.push(testbench);
        require(workdir, &all)?;
        scratch(workdir)?;
        let image = Path::new(SCRATCH_DIR).join("sim.vvp");
        let mut args = vec!["-g2012".to_string(), "-o".into(), path_arg(&image)];
        args.extend(all.iter().map(|p| path_arg(p)));
        let compiled = match step(&self.paths.iverilog, &args, workdir, self.timeout)? {
            Ok(c) => c,
            Err(report) => return Ok(report),
        };
        if !compiled.success() {
            return Ok(ToolReport::with_status(
                ToolStatus::CompileError,
                format!("compilation exited with {}", exit_text(&compiled)),
                compiled.combined(),
            ));
        }
        let ran = match step(
            &self.paths.vvp,
            &["-n".into(), path_arg(&image)],
            workdir,
            self.timeout,
        )? {
            Ok(c) => c,
            Err(report) => return Ok(report),
        };
        let mut report =
            parse_simulation(format!("{}{}", compiled.combined(), ran.combined()).as_bytes());
        if report.is_pass() && !ran.success() {
            report = ToolReport::fail(
                vec![format!("simulator exited with {}", exit_text(&ran))],
                report.raw_capture,
            );
        }
        Ok(report)
    }
}

/// Yosys: generic synthesis, optional liberty mapping, statistics and a
/// netlist at [`Synthesizer::netlist_path`].
#[derive(Debug, Clone)]
pub struct Synthesizer {
    pub paths: ToolPaths,
    pub timeout: Duration,
}

impl Synthesizer {
    /// Netlist location relative to the workdir.
    pub fn netlist_path() -> PathBuf {
        Path::new(SCRATCH_DIR).join("netlist.v")
    }

    pub fn script(sources: &[PathBuf], top: Option<&str>, liberty: Option<&Path>) -> String {
        let files: Vec<String> = sources.iter().map(|p| quoted(p)).collect();
        let mut s = format!("read_verilog -sv {}\n", files.join(" "));
        match top {
            Some(t) => s.push_str(&format!("synth -top {t}\n")),
            None => s.push_str("synth -auto-top\n"),
        }
        match liberty {
            Some(lib) => {
                let lib = quoted(lib);
                s.push_str(&format!("dfflibmap -liberty {lib}\nabc -liberty {lib}\nopt_clean\nstat -liberty {lib}\n"));
            }
            None => s.push_str("stat\n"),
        }
        s.push_str(&format!(
            "write_verilog -noattr {}\n",
            quoted(&Self::netlist_path())
        ));
        s
    }

    pub fn run(
        &self,
        sources: &[PathBuf],
        top: Option<&str>,
        liberty: Option<&Path>,
        workdir: &Path,
    ) -> Result<ToolReport, ToolError> {
        let refs: Vec<&Path> = sources
            .iter()
            .map(PathBuf::as_path)
            .chain(liberty)
            .collect();
        require(workdir, &refs)?;
        let script = scratch(workdir)?.join("synth.ys");
        std::fs::write(&script, Self::script(sources, top, liberty))?;
        let args = vec![
            "-s".to_string(),
            path_arg(&Path::new(SCRATCH_DIR).join("synth.ys")),
        ];
        let c = match step(&self.paths.yosys, &args, workdir, self.timeout)? {
            Ok(c) => c,
            Err(report) => return Ok(report),
        };
        if !c.success() {
            return Ok(ToolReport::with_status(
                ToolStatus::CompileError,
                format!("synthesis exited with {}", exit_text(&c)),
                c.combined(),
            ));
        }
        Ok(parse_synthesis(c.combined().as_bytes()))
    }
}

/// OpenSTA: worst setup slack of a mapped netlist.
#[derive(Debug, Clone)]
pub struct TimingAnalyzer {
    pub paths: ToolPaths,
    pub timeout: Duration,
}

impl TimingAnalyzer {
    pub fn script(netlist: &Path, sdc: &Path, liberty: &Path, top: &str) -> String {
        format!(
            "read_liberty {}\nread_verilog {}\nlink_design {top}\nread_sdc {}\nreport_worst_slack -max -digits 3\nexit\n",
            quoted(liberty),
            quoted(netlist),
            quoted(sdc)
        )
    }

    pub fn run(
        &self,
        netlist: &Path,
        sdc: &Path,
        liberty: &Path,
        top: &str,
        workdir: &Path,
    ) -> Result<ToolReport, ToolError> {
        require(workdir, &[netlist, sdc, liberty])?;
        let script = scratch(workdir)?.join("sta.tcl");
        std::fs::write(&script, Self::script(netlist, sdc, liberty, top))?;
        let args = vec![
            "-no_init".to_string(),
            "-no_splash".into(),
            "-exit".into(),
            path_arg(&Path::new(SCRATCH_DIR).join("sta.tcl")),
        ];
        let c = match step(&self.paths.sta, &args, workdir, self.timeout)? {
            Ok(c) => c,
            Err(report) => return Ok(report),
        };
        if !c.success() {
            return Ok(ToolReport::with_status(
                ToolStatus::CompileError,
                format!("timing analysis exited with {}", exit_text(&c)),
                c.combined(),
            ));
        }
        Ok(parse_sta(c.combined().as_bytes()))
    }
}

/// Runs an arbitrary command; exit status zero passes.
pub fn run_command(
    argv: &[String],
    workdir: &Path,
    timeout: Duration,
) -> Result<ToolReport, ToolError> {
    let Some((program, args)) = argv.split_first() else {
        return Err(ToolError::EmptyCommand);
    };
    let c = match step(program, args, workdir, timeout)? {
        Ok(c) => c,
        Err(report) => return Ok(report),
    };
    Ok(if c.success() {
        ToolReport::pass(c.combined())
    } else {
        ToolReport::fail(
            vec![format!("{program} exited with {}", exit_text(&c))],
            c.combined(),
        )
    })
}

static MODULE_DECL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^\s*module\s+([A-Za-z_][A-Za-z0-9_$]*)").unwrap());

/// Module names declared in Verilog source, in order.
pub fn declared_modules(source: &str) -> Vec<String> {
    MODULE_DECL
        .captures_iter(source)
        .map(|c| c[1].to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{FIFO_TB_V, FIFO_V};

    #[test]
    fn module_names() {
        assert_eq!(declared_modules(FIFO_V), ["fifo"]);
        assert_eq!(declared_modules(FIFO_TB_V), ["fifo_tb"]);
        assert!(declared_modules("// module commented\n").is_empty());
    }

    #[test]
    fn scripts() {
        let s = Synthesizer::script(&[PathBuf::from("fifo.v")], Some("fifo"), None);
        assert!(s.starts_with("read_verilog -sv \"fifo.v\"\nsynth -top fifo\nstat\n"));
        assert!(s.contains("write_verilog"));
        let s = Synthesizer::script(&[PathBuf::from("a.v")], None, Some(Path::new("cells.lib")));
        assert!(s.contains("synth -auto-top") && s.contains("abc -liberty \"cells.lib\""));
        let t = TimingAnalyzer::script(
            Path::new("n.v"),
            Path::new("c.sdc"),
            Path::new("l.lib"),
            "fifo",
        );
        assert!(t.contains("link_design fifo") && t.trim_end().ends_with("exit"));
        assert!(t.contains("report_worst_slack -max"));
    }

    #[test]
    fn missing_inputs_and_tools() {
        let dir = tempfile::tempdir().unwrap();
        let sim = Simulator {
            paths: ToolPaths {
                iverilog: "no-such-iverilog-xyz".into(),
                ..ToolPaths::default()
            },
            timeout: Duration::from_secs(5),
        };
        let e = sim
            .run(
                &[PathBuf::from("fifo.v")],
                Path::new("fifo_tb.v"),
                dir.path(),
            )
            .unwrap_err();
        assert!(matches!(e, ToolError::MissingInput(_)));
        std::fs::write(dir.path().join("fifo.v"), FIFO_V).unwrap();
        std::fs::write(dir.path().join("fifo_tb.v"), FIFO_TB_V).unwrap();
        let r = sim
            .run(
                &[PathBuf::from("fifo.v")],
                Path::new("fifo_tb.v"),
                dir.path(),
            )
            .unwrap();
        assert_eq!(r.status, ToolStatus::ToolMissing);

        let synth = Synthesizer {
            paths: ToolPaths {
                yosys: "no-such-yosys-xyz".into(),
                ..ToolPaths::default()
            },
            timeout: Duration::from_secs(5),
        };
        let r = synth
            .run(&[PathBuf::from("fifo.v")], None, None, dir.path())
            .unwrap();
        assert_eq!(r.status, ToolStatus::ToolMissing);
        assert!(dir.path().join(SCRATCH_DIR).join("synth.ys").is_file());
    }

    #[cfg(unix)]
    #[test]
    fn command_outcomes() {
        let dir = tempfile::tempdir().unwrap();
        let ok = run_command(&["true".into()], dir.path(), Duration::from_secs(5)).unwrap();
        assert!(ok.is_pass());
        let bad = run_command(&["false".into()], dir.path(), Duration::from_secs(5)).unwrap();
        assert_eq!(bad.status, ToolStatus::Fail);
        assert!(run_command(&[], dir.path(), Duration::from_secs(5)).is_err());
    }
}
