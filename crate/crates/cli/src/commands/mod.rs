pub mod convert;
pub mod cpd;
pub mod gen;
pub mod inspect;
pub mod mttkrp;
pub mod simulate;

use std::io::Write;

use serde::Serialize;

use crate::CmdResult;

pub(crate) fn print_json<T: Serialize>(value: &T) -> CmdResult {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
