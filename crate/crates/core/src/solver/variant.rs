use std::fmt;

use crate::error::{Error, Result};

/// The five technique switches of a solver variant.
///
/// * `sparse`: row-compressed vertex-value matrix.
/// * `nag`: accelerated descent over the simplex weights instead of a single
///   simplex gradient step.
/// * `bpcg`: pairwise away-to-FW weight transfer instead of the simplex step.
/// * `index`: AltMin reduced costs grouped by mode value.
/// * `pattern`: the grouping is computed once per solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariantConfig {
    pub version: Option<u8>,
    pub sparse: bool,
    pub nag: bool,
    pub bpcg: bool,
    pub index: bool,
    pub pattern: bool,
}

/// Rows of the version table: (sparse, nag, bpcg, index, pattern).
const TABLE: [(bool, bool, bool, bool, bool); 11] = [
    (false, false, false, false, false),
    (false, false, false, true, true),
    (true, false, false, false, false),
    (false, true, false, false, false),
    (true, false, false, true, true),
    (false, true, false, true, true),
    (true, true, false, true, true),
    (false, false, true, false, false),
    (false, false, true, true, true),
    (true, false, true, false, false),
    (true, false, true, true, true),
];

impl VariantConfig {
    /// A custom combination; rejects `nag && bpcg` and `pattern && !index`.
    pub fn new(sparse: bool, nag: bool, bpcg: bool, index: bool, pattern: bool) -> Result<Self> {
        let cfg = Self {
            version: None,
            sparse,
            nag,
            bpcg,
            index,
            pattern,
        };
        cfg.validate()?;
        let version = TABLE
            .iter()
            .position(|&row| row == (sparse, nag, bpcg, index, pattern))
            .map(|v| v as u8);
        Ok(Self { version, ..cfg })
    }

    pub fn validate(&self) -> Result<()> {
        if self.nag && self.bpcg {
            return Err(Error::InvalidVariant(
                "accelerated simplex descent and pairwise steps are mutually exclusive".into(),
            ));
        }
        if self.pattern && !self.index {
            return Err(Error::InvalidVariant(
                "the cached pattern requires the indexed reduced costs".into(),
            ));
        }
        Ok(())
    }
}

pub fn make_variant(version: u8) -> Result<VariantConfig> {
    let &(sparse, nag, bpcg, index, pattern) = TABLE
        .get(version as usize)
        .ok_or_else(|| Error::InvalidVariant(format!("version {version} is not in 0..=10")))?;
    Ok(VariantConfig {
        version: Some(version),
        sparse,
        nag,
        bpcg,
        index,
        pattern,
    })
}

/// Versions 0 through 10.
pub fn all_variants() -> Vec<VariantConfig> {
    (0..TABLE.len() as u8).map(|v| make_variant(v).unwrap()).collect()
}

impl fmt::Display for VariantConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (on, name) in [
            (self.sparse, "Sparse"),
            (self.nag, "NAG"),
            (self.bpcg, "BPCG"),
            (self.index, "Index"),
            (self.pattern, "Pattern"),
        ] {
            if on {
                parts.push(name);
            }
        }
        let techniques = if parts.is_empty() {
            "base".to_string()
        } else {
            parts.join("+")
        };
        match self.version {
            Some(v) => write!(f, "v{v} ({techniques})"),
            None => write!(f, "custom ({techniques})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let v0 = make_variant(0).unwrap();
        assert!(!(v0.sparse || v0.nag || v0.bpcg || v0.index || v0.pattern));
        let v5 = make_variant(5).unwrap();
        assert!(v5.nag && v5.index && v5.pattern && !v5.sparse && !v5.bpcg);
        let v8 = make_variant(8).unwrap();
        assert!(v8.bpcg && v8.index && v8.pattern && !v8.sparse && !v8.nag);
        let v10 = make_variant(10).unwrap();
        assert!(v10.sparse && v10.bpcg && v10.index && v10.pattern && !v10.nag);
        assert!(make_variant(11).is_err());
    }

    #[test]
    fn every_row_is_valid_and_distinct() {
        let all = all_variants();
        assert_eq!(all.len(), 11);
        for (i, a) in all.iter().enumerate() {
            a.validate().unwrap();
            assert_eq!(a.pattern, a.index);
            for b in &all[i + 1..] {
                assert_ne!(
                    (a.sparse, a.nag, a.bpcg, a.index, a.pattern),
                    (b.sparse, b.nag, b.bpcg, b.index, b.pattern)
                );
            }
        }
    }

    #[test]
    fn custom_combinations() {
        assert!(VariantConfig::new(false, true, true, false, false).is_err());
        assert!(VariantConfig::new(false, false, false, false, true).is_err());
        let index_only = VariantConfig::new(false, false, false, true, false).unwrap();
        assert_eq!(index_only.version, None);
        assert_eq!(
            VariantConfig::new(true, false, true, true, true).unwrap().version,
            Some(10)
        );
        assert_eq!(make_variant(8).unwrap().to_string(), "v8 (BPCG+Index+Pattern)");
    }
}
