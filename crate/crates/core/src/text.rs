use alloc::string::String;
use unicode_normalization::{is_nfc, UnicodeNormalization};

/// Canonical text identity: Unicode NFC.
pub fn nfc(text: &str) -> String {
    if is_nfc(text) {
        String::from(text)
    } else {
        text.nfc().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composes_turkish_letters() {
        // s + combining cedilla, g + combining breve
        assert_eq!(nfc("s\u{0327}g\u{0306}"), "şğ");
        assert_eq!(nfc("I\u{0307}stanbul"), "İstanbul");
        assert_eq!(nfc("ev"), "ev");
    }
}
