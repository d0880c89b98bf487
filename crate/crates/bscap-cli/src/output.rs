//! File-or-stdout output sink.

use crate::manifest::manifest_lines;
use crate::CliError;
use std::io::Write;
use std::path::Path;

pub enum OutputTarget {
    File(std::io::BufWriter<std::fs::File>),
    Stdout(std::io::Stdout),
}

impl OutputTarget {
    pub fn create(path: Option<&Path>) -> Result<Self, CliError> {
        Ok(match path {
            Some(p) => OutputTarget::File(std::io::BufWriter::new(std::fs::File::create(p)?)),
            None => OutputTarget::Stdout(std::io::stdout()),
        })
    }

    fn writer(&mut self) -> &mut dyn Write {
        match self {
            OutputTarget::File(f) => f,
            OutputTarget::Stdout(s) => s,
        }
    }

    /// Write the comment-line manifest (CSV outputs).
    pub fn manifest(&mut self, command_line: &str, seed: Option<u64>) -> Result<(), CliError> {
        for line in manifest_lines(command_line, seed) {
            writeln!(self.writer(), "{line}")?;
        }
        Ok(())
    }

    pub fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.writer(), "{s}")?;
        Ok(())
    }

    pub fn raw(&mut self, s: &str) -> Result<(), CliError> {
        write!(self.writer(), "{s}")?;
        Ok(())
    }

    pub fn finish(&mut self) -> Result<(), CliError> {
        self.writer().flush()?;
        Ok(())
    }

    /// JSON outputs carry no comment header; flush only.
    pub fn finish_quiet(&mut self, _command_line: &str) -> Result<(), CliError> {
        self.finish()
    }
}
