//! JSON-lines transcripts with the client view and the server view kept in
//! separate files, so blindness audits can diff exactly what the server saw.

use crate::error::Result;
use crate::fkproto::FkRun;
use crate::gadget::GadgetRun;
use serde::Serialize;
use std::io::Write;

/// Client-side record of one gadget round.
#[derive(Debug, Serialize)]
pub struct GadgetAliceView<'a> {
    pub trial: u64,
    pub c: &'a [u8; 5],
    pub a: &'a [u8; 5],
    pub r: &'a [u8; 5],
    pub s: &'a [u8; 4],
    pub accepted: bool,
    pub label: String,
}

/// Server-visible record of one gadget round.
#[derive(Debug, Serialize)]
pub struct GadgetBobView {
    pub trial: u64,
    pub s: [u8; 4],
    /// (x, z) correction bits received, per position.
    pub corrections_received: [[u8; 2]; 5],
}

pub fn gadget_views(trial: u64, run: &GadgetRun) -> (GadgetAliceView<'_>, GadgetBobView) {
    let alice = GadgetAliceView {
        trial,
        c: &run.secrets.c,
        a: &run.secrets.a,
        r: &run.secrets.r,
        s: &run.outcome.s,
        accepted: run.outcome.accepted,
        label: run.outcome.label.class_name(),
    };
    let corrections =
        std::array::from_fn(|i| [u8::from(run.corrections[i].x_flip), u8::from(run.corrections[i].z_flip)]);
    let bob = GadgetBobView {
        trial,
        s: run.outcome.s,
        corrections_received: corrections,
    };
    (alice, bob)
}

/// Client-side record of one protocol run.
#[derive(Debug, Serialize)]
pub struct FkAliceView {
    pub trial: u64,
    pub accepted: bool,
    pub r: Vec<u8>,
    pub k_prime: Vec<u8>,
    pub corrected_output: Vec<u8>,
    pub trap_checks: Vec<(usize, u8, u8)>,
}

/// Server-visible record of one protocol run.
#[derive(Debug, Serialize)]
pub struct FkBobView {
    pub trial: u64,
    /// Angle messages in units of π/4, by vertex.
    pub deltas: Vec<u8>,
    /// Reported measurement bits, by vertex.
    pub outcomes: Vec<u8>,
}

pub fn fk_views(trial: u64, run: &FkRun) -> (FkAliceView, FkBobView) {
    (
        FkAliceView {
            trial,
            accepted: run.result.accepted,
            r: run.secrets.r.clone(),
            k_prime: run.secrets.k_prime.clone(),
            corrected_output: run.corrected_output.clone(),
            trap_checks: run.result.traps.iter().map(|t| (t.vertex, t.b, t.r)).collect(),
        },
        FkBobView {
            trial,
            deltas: run.deltas.clone(),
            outcomes: run.outcomes.clone(),
        },
    )
}

/// Append one JSON line.
pub fn write_line<T: Serialize>(sink: &mut impl Write, record: &T) -> Result<()> {
    serde_json::to_writer(&mut *sink, record)?;
    sink.write_all(b"\n")?;
    Ok(())
}
