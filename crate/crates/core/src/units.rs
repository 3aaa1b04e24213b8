//! Byte and bandwidth helpers. Sizes are plain `u64` bytes, rates are `f64`
//! bytes per second.

pub const KB: u64 = 1_000;
pub const MB: u64 = 1_000_000;
pub const GB: u64 = 1_000_000_000;
pub const GIB: u64 = 1 << 30;

/// One gigabit per second in bytes per second.
pub const GBIT: f64 = 125_000_000.0;

/// Parses a bandwidth such as `1Gbit`, `500Mbit`, `125MB/s` or a bare number
/// of bytes per second.
pub fn parse_bandwidth(s: &str) -> Option<f64> {
    let s = s.trim();
    let split = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E'))
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num.parse().ok()?;
    let factor = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b/s" => 1.0,
        "kbit" | "kbps" => 125.0,
        "mbit" | "mbps" => 125_000.0,
        "gbit" | "gbps" => GBIT,
        "kb/s" => 1e3,
        "mb/s" => 1e6,
        "gb/s" => 1e9,
        _ => return None,
    };
    let v = value * factor;
    (v.is_finite() && v > 0.0).then_some(v)
}

/// Parses a size such as `8MB`, `0.9GB`, `1GiB` or a bare byte count.
pub fn parse_size(s: &str) -> Option<u64> {
    let s = s.trim();
    let split = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.'))
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num.parse().ok()?;
    let factor = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 1.0,
        "kb" => KB as f64,
        "mb" => MB as f64,
        "gb" => GB as f64,
        "kib" => 1024.0,
        "mib" => (1u64 << 20) as f64,
        "gib" => GIB as f64,
        _ => return None,
    };
    let v = (value * factor).round();
    (v.is_finite() && v >= 0.0).then_some(v as u64)
}
