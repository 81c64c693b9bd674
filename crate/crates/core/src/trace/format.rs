//! JSON-lines trace encoding.
//!
//! One object per line with keys `pc`, `kind`, `srcs`, `dst`, `token`,
//! `addr`, `size`, `mispred`. `pc` and `addr` are hex strings; absent keys
//! mean "none". Blank lines are ignored.

use std::fmt::Write as _;

use serde::Deserialize;

use super::{validate_trace, MicroOp, OpKind, Reg, Trace, TraceError, ARCH_REGS};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOp {
    pc: String,
    kind: String,
    #[serde(default)]
    srcs: Vec<u32>,
    dst: Option<u32>,
    token: Option<u32>,
    addr: Option<String>,
    size: Option<u32>,
    mispred: Option<bool>,
}

fn malformed(line: usize, field: &str, msg: impl Into<String>) -> TraceError {
    TraceError::Malformed {
        line,
        field: field.to_string(),
        msg: msg.into(),
    }
}

fn parse_hex(line: usize, field: &str, s: &str) -> Result<u64, TraceError> {
    let digits = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(|| malformed(line, field, format!("expected hex string, got {s:?}")))?;
    u64::from_str_radix(digits, 16)
        .map_err(|e| malformed(line, field, format!("bad hex value {s:?}: {e}")))
}

fn parse_reg(line: usize, field: &str, r: u32) -> Result<Reg, TraceError> {
    u8::try_from(r)
        .map(Reg)
        .map_err(|_| malformed(line, field, format!("register id {r} does not fit a register file")))
}

// serde_json reports unknown/missing fields by name inside its message; pull
// the name out so the error points at the field.
fn serde_field(msg: &str) -> String {
    msg.split('`').nth(1).unwrap_or("-").to_string()
}

fn parse_line(lineno: usize, text: &str) -> Result<MicroOp, TraceError> {
    let raw: RawOp = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        malformed(lineno, &serde_field(&msg), msg)
    })?;
    let kind = OpKind::from_name(&raw.kind)
        .ok_or_else(|| malformed(lineno, "kind", format!("unknown kind {:?}", raw.kind)))?;
    let srcs = raw
        .srcs
        .iter()
        .map(|&r| parse_reg(lineno, "srcs", r))
        .collect::<Result<Vec<_>, _>>()?;
    let size = raw
        .size
        .map(|s| u8::try_from(s).map_err(|_| malformed(lineno, "size", format!("size {s} too large"))))
        .transpose()?;
    Ok(MicroOp {
        seq: 0,
        pc: parse_hex(lineno, "pc", &raw.pc)?,
        kind,
        srcs,
        dst: raw.dst.map(|r| parse_reg(lineno, "dst", r)).transpose()?,
        token: raw.token.map(|r| parse_reg(lineno, "token", r)).transpose()?,
        addr: raw.addr.as_deref().map(|a| parse_hex(lineno, "addr", a)).transpose()?,
        size,
        mispred: raw.mispred,
    })
}

/// Parses a JSON-lines trace. Sequence numbers follow line order; the result
/// is validated against the default architectural register count.
pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let mut trace = Trace::default();
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        trace.push(parse_line(i + 1, line)?);
        lines.push(i + 1);
    }
    if let Some(v) = validate_trace(&trace, ARCH_REGS).into_iter().next() {
        return Err(TraceError::Invalid {
            line: lines[v.seq],
            violation: v,
        });
    }
    Ok(trace)
}

/// Encodes a trace as JSON lines, one op per line, keys in a fixed order.
pub fn write_trace(trace: &Trace) -> String {
    let mut out = String::new();
    for op in &trace.ops {
        let _ = write!(out, "{{\"pc\":\"{:#x}\",\"kind\":\"{}\"", op.pc, op.kind);
        if !op.srcs.is_empty() {
            let srcs: Vec<String> = op.srcs.iter().map(|r| r.0.to_string()).collect();
            let _ = write!(out, ",\"srcs\":[{}]", srcs.join(","));
        }
        if let Some(d) = op.dst {
            let _ = write!(out, ",\"dst\":{}", d.0);
        }
        if let Some(t) = op.token {
            let _ = write!(out, ",\"token\":{}", t.0);
        }
        if let Some(a) = op.addr {
            let _ = write!(out, ",\"addr\":\"{a:#x}\"");
        }
        if let Some(s) = op.size {
            let _ = write!(out, ",\"size\":{s}");
        }
        if let Some(m) = op.mispred {
            let _ = write!(out, ",\"mispred\":{m}");
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_load_line() {
        let t = parse_trace(
            r#"{"pc":"0x400","kind":"load","srcs":[10,0],"dst":2,"addr":"0x1000","size":4}"#,
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        let op = &t.ops[0];
        assert_eq!(op.kind, OpKind::Load);
        assert_eq!(op.dst, Some(Reg(2)));
        assert_eq!(op.pc, 0x400);
        assert_eq!(op.addr, Some(0x1000));
        assert_eq!(op.srcs, vec![Reg(10), Reg(0)]);
    }

    #[test]
    fn empty_input_is_empty_trace() {
        assert!(parse_trace("").unwrap().is_empty());
        assert!(write_trace(&Trace::default()).is_empty());
    }

    #[test]
    fn store_with_destination_is_rejected() {
        let err = parse_trace(
            "{\"pc\":\"0x0\",\"kind\":\"nop\"}\n{\"pc\":\"0x4\",\"kind\":\"store\",\"srcs\":[1],\"dst\":3,\"addr\":\"0x10\"}\n",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("store has destination"), "{msg}");
        assert!(msg.starts_with("line 2"), "{msg}");
    }

    #[test]
    fn malformed_errors_name_line_and_field() {
        let err = parse_trace("{\"pc\":\"0x0\",\"kind\":\"nop\"}\n{\"pc\":\"400\",\"kind\":\"nop\"}").unwrap_err();
        match err {
            TraceError::Malformed { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "pc");
            }
            e => panic!("unexpected {e}"),
        }
        let err = parse_trace("{\"kind\":\"nop\"}").unwrap_err();
        assert!(matches!(err, TraceError::Malformed { ref field, .. } if field == "pc"), "{err}");
        let err = parse_trace("{\"pc\":\"0x0\",\"kind\":\"jump\"}").unwrap_err();
        assert!(matches!(err, TraceError::Malformed { ref field, .. } if field == "kind"));
        let err = parse_trace("{\"pc\":\"0x0\",\"kind\":\"nop\",\"color\":1}").unwrap_err();
        assert!(matches!(err, TraceError::Malformed { ref field, .. } if field == "color"));
    }

    #[test]
    fn table1_two_iterations_is_24_lines() {
        let t = super::super::gen_kernel("table1", 2, 0).unwrap();
        assert_eq!(write_trace(&t).lines().count(), 24);
    }

    fn arb_op() -> impl Strategy<Value = MicroOp> {
        let regs = || proptest::collection::vec(0u8..64, 0..=3);
        (0usize..7, any::<u64>(), regs(), 0u8..64, any::<u64>(), 0u32..7, any::<bool>(), any::<bool>())
            .prop_map(|(k, pc, srcs, r, addr, sz, flag, tok)| {
                let kind = OpKind::ALL[k];
                let mut op = MicroOp::new(pc, kind).srcs(&srcs);
                match kind {
                    OpKind::Load => op = op.dst(r).mem(addr, 1 << sz),
                    OpKind::Store => {
                        op = op.mem(addr, 1 << sz);
                        if tok {
                            op = op.token(r);
                        }
                    }
                    OpKind::Branch => op = op.mispredicted(flag),
                    OpKind::Nop => {}
                    _ => op = op.dst(r),
                }
                op
            })
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(ops in proptest::collection::vec(arb_op(), 0..1000)) {
            let mut t = Trace::default();
            for op in ops {
                t.push(op);
            }
            let back = parse_trace(&write_trace(&t)).unwrap();
            prop_assert_eq!(back.ops, t.ops);
        }
    }
}
