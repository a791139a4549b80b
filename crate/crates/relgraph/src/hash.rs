//! SHA-256 content hashing for asset versioning and fixture keys.

use sha2::{Digest, Sha256};

/// Hex SHA-256 of `parts` joined by newlines. Used to version prompt
/// templates and rule tables, and to key recorded LLM exchanges.
pub fn sha256_hex(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update(b"\n");
        }
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::sha256_hex;

    #[test]
    fn known_digest_and_part_separation() {
        // SHA-256 of the empty string.
        assert_eq!(
            sha256_hex(&[""]),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        // Joining with newlines means parts are order- and split-sensitive.
        assert_eq!(sha256_hex(&["a", "b"]), sha256_hex(&["a\nb"]));
        assert_ne!(sha256_hex(&["a", "b"]), sha256_hex(&["ab"]));
    }
}
