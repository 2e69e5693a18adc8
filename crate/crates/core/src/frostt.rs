//! Reading and writing FROSTT `.tns` text files.
//!
//! One nonzero per line: `N` 1-based integer indices followed by a real value.
//! Lines starting with `#` and blank lines are ignored.

use std::io::{BufRead, Write};

use crate::coo::CooTensor;
use crate::error::{Result, TensorError};

/// Parse a `.tns` stream. Dimensions are the per-mode maximum index.
pub fn parse_frostt<R: BufRead>(reader: R) -> Result<CooTensor> {
    parse_frostt_with_dims(reader, None)
}

pub fn parse_frostt_str(text: &str) -> Result<CooTensor> {
    parse_frostt(text.as_bytes())
}

/// Parse a `.tns` stream, optionally overriding the inferred dimensions
/// (to keep empty trailing slices).
pub fn parse_frostt_with_dims<R: BufRead>(reader: R, dims: Option<&[usize]>) -> Result<CooTensor> {
    let mut order: Option<usize> = None;
    let mut indices: Vec<u32> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut max_idx: Vec<usize> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let n = match order {
            Some(n) => {
                if fields.len() != n + 1 {
                    return Err(TensorError::Arity {
                        line: lineno,
                        expected: n,
                        found: fields.len().saturating_sub(1),
                    });
                }
                n
            }
            None => {
                if fields.len() < 4 {
                    return Err(TensorError::Parse {
                        line: lineno,
                        msg: format!(
                            "expected at least 3 indices and a value, found {} fields",
                            fields.len()
                        ),
                    });
                }
                let n = fields.len() - 1;
                order = Some(n);
                max_idx = vec![0; n];
                n
            }
        };
        for (d, field) in fields[..n].iter().enumerate() {
            let raw: i64 = field.parse().map_err(|_| TensorError::Parse {
                line: lineno,
                msg: format!("index `{field}` is not an integer"),
            })?;
            if raw < 1 || raw > u32::MAX as i64 {
                return Err(TensorError::Range {
                    line: lineno,
                    mode: d,
                    value: raw,
                });
            }
            let zero_based = (raw - 1) as usize;
            max_idx[d] = max_idx[d].max(zero_based + 1);
            indices.push(zero_based as u32);
        }
        let value: f64 = fields[n].parse().map_err(|_| TensorError::Parse {
            line: lineno,
            msg: format!("value `{}` is not a number", fields[n]),
        })?;
        values.push(value);
    }

    let n = order.ok_or(TensorError::Empty)?;
    let dims = match dims {
        None => max_idx,
        Some(given) => {
            if given.len() != n {
                return Err(TensorError::dims(format!(
                    "{} dims given for an order-{n} tensor",
                    given.len()
                )));
            }
            for (d, (&g, &m)) in given.iter().zip(&max_idx).enumerate() {
                if g < m {
                    return Err(TensorError::arg(format!(
                        "dimension {g} for mode {d} is smaller than the largest index {m}"
                    )));
                }
            }
            given.to_vec()
        }
    };
    CooTensor::from_parts(dims, indices, values)
}

/// Write entries in their current order, 1-based, values with 17
/// significant digits.
pub fn write_frostt<W: Write>(mut w: W, t: &CooTensor) -> Result<()> {
    let mut line = String::new();
    for (idx, v) in t.entries() {
        line.clear();
        for i in idx {
            line.push_str(&(*i as u64 + 1).to_string());
            line.push(' ');
        }
        line.push_str(&format!("{v:.16e}"));
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_frostt_string(t: &CooTensor) -> String {
    let mut buf = Vec::new();
    write_frostt(&mut buf, t).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn transcribes_simple_file() {
        let t = parse_frostt_str("1 1 1 2.0\n2 3 1 1.5").unwrap();
        assert_eq!(t.order(), 3);
        assert_eq!(t.dims(), &[2, 3, 1]);
        assert_eq!(t.nnz(), 2);
        assert_eq!(t.index(0), &[0, 0, 0]);
        assert_eq!(t.value(0), 2.0);
        assert_eq!(t.index(1), &[1, 2, 0]);
        assert_eq!(t.value(1), 1.5);
    }

    #[test]
    fn skips_comments_and_infers_order() {
        let t = parse_frostt_str("# comment\n\n1 1 1 1 4.0\n").unwrap();
        assert_eq!(t.order(), 4);
        assert_eq!(t.nnz(), 1);
        assert_eq!(t.value(0), 4.0);
    }

    #[test]
    fn keeps_duplicates() {
        let t = parse_frostt_str("1 1 1 1\n1 1 1 2\n").unwrap();
        assert_eq!(t.nnz(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        match parse_frostt_str("1 1 1 1.0\n1 x 1 2.0\n") {
            Err(TensorError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_frostt_str("1 1 1 1.0\n# c\n1 1 1 1 2.0\n") {
            Err(TensorError::Arity {
                line: 3,
                expected: 3,
                found: 4,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_frostt_str("1 0 1 1.0\n") {
            Err(TensorError::Range { line: 1, mode: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_frostt_str("1 1 1 abc\n") {
            Err(TensorError::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_frostt_str("# only\n"), Err(TensorError::Empty)));
    }

    #[test]
    fn explicit_dims_override() {
        let t = parse_frostt_with_dims("1 2 1 1.0\n".as_bytes(), Some(&[3, 4, 5])).unwrap();
        assert_eq!(t.dims(), &[3, 4, 5]);
        assert!(parse_frostt_with_dims("1 2 1 1.0\n".as_bytes(), Some(&[3, 1, 5])).is_err());
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(
            es in prop::collection::btree_map((0u32..7, 0u32..5, 0u32..9, 0u32..3), -1e6f64..1e6, 1..40)
        ) {
            let t = CooTensor::from_entries(
                vec![7, 5, 9, 3],
                es.into_iter().map(|((a, b, c, d), v)| (vec![a, b, c, d], v)),
            ).unwrap();
            let text = to_frostt_string(&t);
            let back = parse_frostt_with_dims(text.as_bytes(), Some(t.dims())).unwrap();
            prop_assert_eq!(back.raw_indices(), t.raw_indices());
            for (a, b) in back.values().iter().zip(t.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
