use crate::error::{Error, Result};

/// Largest valid version id.
pub const MAX_VERSION: u8 = 10;

/// Parses version sets such as `0-10`, `0,1,8` or `0-3,8`. Duplicates are
/// dropped; the first occurrence fixes the order.
pub fn parse_versions(input: &str) -> Result<Vec<u8>> {
    let fail = |msg: String| Error::VersionSet {
        input: input.to_string(),
        msg,
    };
    let parse_one = |s: &str| -> Result<u8> {
        let v: u8 = s
            .trim()
            .parse()
            .map_err(|_| fail(format!("{:?} is not a version number", s.trim())))?;
        if v > MAX_VERSION {
            return Err(fail(format!("version {v} is not in 0..={MAX_VERSION}")));
        }
        Ok(v)
    };
    let mut out: Vec<u8> = Vec::new();
    for part in input.split(',') {
        if part.trim().is_empty() {
            return Err(fail("empty element".into()));
        }
        let range = match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (parse_one(lo)?, parse_one(hi)?);
                if lo > hi {
                    return Err(fail(format!("descending range {lo}-{hi}")));
                }
                lo..=hi
            }
            None => {
                let v = parse_one(part)?;
                v..=v
            }
        };
        for v in range {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    Ok(out)
}
