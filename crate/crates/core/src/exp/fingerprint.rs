use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the value's JSON form. Object keys are emitted sorted, so
/// field order in the source never changes the hash.
pub fn fingerprint<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::parse("fingerprint", e))?;
    let text = serde_json::to_string(&v).map_err(|e| Error::parse("fingerprint", e))?;
    Ok(hex(&Sha256::digest(text.as_bytes())))
}

pub fn file_fingerprint(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn key_order_does_not_matter() {
        let a: HashMap<&str, i32> = [("a", 1), ("b", 2)].into_iter().collect();
        let b: HashMap<&str, i32> = [("b", 2), ("a", 1)].into_iter().collect();
        assert_eq!(fingerprint(&a).unwrap(), fingerprint(&b).unwrap());
        assert_eq!(fingerprint(&a).unwrap().len(), 64);
    }

    #[test]
    fn values_matter() {
        assert_ne!(fingerprint(&[1.0, 2.0]).unwrap(), fingerprint(&[1.0, 2.0000001]).unwrap());
    }
}
