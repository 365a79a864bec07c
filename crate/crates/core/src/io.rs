//! File formats: point sets (CSV or binary), offset coresets, sketches,
//! and hexadecimal floats for bit-exact scalars.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_rational::Ratio;

use crate::dim_reduce::CostPreservingSketch;
use crate::error::{Error, Result};
use crate::geometry::{ClusteringParams, ExtendedPointSet, Points, WeightedPointSet};
use crate::ring_coreset::{CoresetSource, OffsetCoreset};

pub const MAGIC: &[u8; 6] = b"DCLUS1";

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// C99 `%a` style, e.g. `0x1.8p+1`, `-0x0p+0`, `0x0.0000000000001p-1022`.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let frac = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    let esign = if e < 0 { '-' } else { '+' };
    format!("{sign}0x{lead}{frac}p{esign}{}", e.abs())
}

/// Inverse of [`format_hex`]; also accepts any exactly representable
/// hexadecimal significand.
pub fn parse_hex(s: &str) -> Option<f64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let v = match body {
        "inf" => f64::INFINITY,
        "nan" => f64::NAN,
        _ => {
            let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X"))?;
            let (sig, exp) = body.split_once(['p', 'P'])?;
            let exp: i32 = exp.parse().ok()?;
            let (int, frac) = sig.split_once('.').unwrap_or((sig, ""));
            if int.is_empty() && frac.is_empty() {
                return None;
            }
            let mut m: u128 = 0;
            let mut shift = 0i32;
            for (pos, ch) in int.chars().chain(frac.chars()).enumerate() {
                let d = ch.to_digit(16)? as u128;
                if m >> 120 != 0 {
                    return None;
                }
                m = (m << 4) | d;
                if pos >= int.len() {
                    shift += 4;
                }
            }
            exact_scale(m, exp - shift)?
        }
    };
    Some(if neg { -v } else { v })
}

/// `m * 2^e` when exactly representable.
fn exact_scale(m: u128, e: i32) -> Option<f64> {
    if m == 0 {
        return Some(0.0);
    }
    let tz = m.trailing_zeros() as i32;
    let (m, e) = (m >> tz, e + tz);
    if 128 - m.leading_zeros() > 53 {
        return None;
    }
    let mut v = m as f64;
    let mut e = e;
    while e > 0 {
        let step = e.min(1000);
        v *= 2f64.powi(step);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        let next = v / 2f64.powi(step);
        if next * 2f64.powi(step) != v {
            return None;
        }
        v = next;
        e += step;
    }
    v.is_finite().then_some(v)
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let t = tok.trim();
    let v = if t.starts_with("0x") || t.starts_with("-0x") || t.starts_with("+0x") {
        parse_hex(t)
    } else {
        t.parse::<f64>().ok()
    };
    match v {
        Some(v) if v.is_finite() => Ok(v),
        Some(_) => parse_err(line, format!("non-finite value {t:?}")),
        None => parse_err(line, format!("not a number: {t:?}")),
    }
}

/// `key=value` pairs of a `# ...` header line.
fn header_fields(line: &str, lineno: usize) -> Result<Vec<(String, String)>> {
    let Some(rest) = line.strip_prefix('#') else {
        return parse_err(lineno, "missing '#' header");
    };
    rest.split_whitespace()
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) => Ok((k.to_string(), v.to_string())),
            None => parse_err(lineno, format!("malformed header field {kv:?}")),
        })
        .collect()
}

fn field<'a>(fields: &'a [(String, String)], key: &str, line: usize) -> Result<&'a str> {
    match fields.iter().find(|(k, _)| k == key) {
        Some((_, v)) => Ok(v),
        None => parse_err(line, format!("header lacks {key}=")),
    }
}

fn flag(fields: &[(String, String)], key: &str, line: usize) -> Result<bool> {
    match field(fields, key, line)? {
        "0" => Ok(false),
        "1" => Ok(true),
        v => parse_err(line, format!("{key} must be 0 or 1, got {v:?}")),
    }
}

fn usize_field(fields: &[(String, String)], key: &str, line: usize) -> Result<usize> {
    field(fields, key, line)?.parse().or_else(|_| parse_err(line, format!("{key} must be a nonnegative integer")))
}

/// Points with their weights and extensions; flags say which of the two are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFile {
    pub points: ExtendedPointSet,
    pub weighted: bool,
    pub extended: bool,
}

impl PointFile {
    pub fn plain(points: WeightedPointSet) -> Self {
        let weighted = points.weights().iter().any(|&w| w != 1.0);
        Self {
            points: ExtendedPointSet::zero_extension(points),
            weighted,
            extended: false,
        }
    }

    pub fn from_extended(points: ExtendedPointSet) -> Self {
        let weighted = (0..points.len()).any(|i| points.weight(i) != 1.0);
        let extended = !points.is_zero_extension();
        Self { points, weighted, extended }
    }
}

fn build_points(dim: usize, data: Vec<f64>, weights: Vec<f64>, ext: Vec<f64>, weighted: bool, extended: bool) -> Result<PointFile> {
    let base = WeightedPointSet::new(dim, data, weights)?;
    Ok(PointFile {
        points: ExtendedPointSet::new(base, ext)?,
        weighted,
        extended,
    })
}

pub fn parse_points_csv(text: &str) -> Result<PointFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let Some((hl, header)) = lines.next() else {
        return parse_err(1, "empty file");
    };
    let fields = header_fields(header.trim(), hl)?;
    let dim = usize_field(&fields, "dim", hl)?;
    if dim == 0 {
        return parse_err(hl, "dim must be positive");
    }
    let weighted = flag(&fields, "weighted", hl)?;
    let extended = flag(&fields, "ext", hl)?;
    let width = dim + weighted as usize + extended as usize;
    let (mut data, mut weights, mut ext) = (Vec::new(), Vec::new(), Vec::new());
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let vals = line.split(',').map(|t| parse_f64(t, ln)).collect::<Result<Vec<_>>>()?;
        if vals.len() != width {
            return parse_err(ln, format!("expected {width} values, found {}", vals.len()));
        }
        data.extend_from_slice(&vals[..dim]);
        weights.push(if weighted { vals[dim] } else { 1.0 });
        ext.push(if extended { vals[width - 1] } else { 0.0 });
    }
    build_points(dim, data, weights, ext, weighted, extended).map_err(|e| match e {
        Error::Input(msg) => Error::Parse { line: 0, msg },
        e => e,
    })
}

/// Shortest round-trip decimal per value.
pub fn points_csv(f: &PointFile) -> String {
    let p = &f.points;
    let mut out = format!("# dim={} weighted={} ext={}\n", p.dim(), f.weighted as u8, f.extended as u8);
    for i in 0..p.len() {
        let mut row: Vec<String> = p.coords(i).iter().map(|x| format!("{x:?}")).collect();
        if f.weighted {
            row.push(format!("{:?}", p.weight(i)));
        }
        if f.extended {
            row.push(format!("{:?}", p.ext(i)));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Magic, dim and count as little-endian u64, two flag bytes, then rows of
/// little-endian f64 (coordinates, weight if flagged, extension if flagged).
pub fn points_binary(f: &PointFile) -> Vec<u8> {
    let p = &f.points;
    let mut out = Vec::with_capacity(24 + p.len() * (p.dim() + 2) * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(p.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(p.len() as u64).to_le_bytes());
    out.push(f.weighted as u8);
    out.push(f.extended as u8);
    for i in 0..p.len() {
        for x in p.coords(i) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        if f.weighted {
            out.extend_from_slice(&p.weight(i).to_le_bytes());
        }
        if f.extended {
            out.extend_from_slice(&p.ext(i).to_le_bytes());
        }
    }
    out
}

pub fn parse_points_binary(bytes: &[u8]) -> Result<PointFile> {
    if bytes.len() < 24 || &bytes[..6] != MAGIC {
        return parse_err(0, "missing DCLUS1 header");
    }
    let u = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let dim = u(6) as usize;
    let count = u(14) as usize;
    let (weighted, extended) = match (bytes[22], bytes[23]) {
        (w @ 0..=1, e @ 0..=1) => (w == 1, e == 1),
        _ => return parse_err(0, "flag bytes must be 0 or 1"),
    };
    if dim == 0 {
        return parse_err(0, "dim must be positive");
    }
    let width = dim + weighted as usize + extended as usize;
    let body = &bytes[24..];
    if Some(body.len()) != count.checked_mul(width).and_then(|c| c.checked_mul(8)) {
        return parse_err(0, "payload length disagrees with the header");
    }
    let (mut data, mut weights, mut ext) = (Vec::new(), Vec::new(), Vec::new());
    for (r, row) in body.chunks_exact(width * 8).enumerate() {
        let vals: Vec<f64> = row.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return parse_err(r + 1, "non-finite value");
        }
        data.extend_from_slice(&vals[..dim]);
        weights.push(if weighted { vals[dim] } else { 1.0 });
        ext.push(if extended { vals[width - 1] } else { 0.0 });
    }
    build_points(dim, data, weights, ext, weighted, extended)
}

/// Reads either format, chosen by the magic bytes.
pub fn read_points(path: &Path) -> Result<PointFile> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        parse_points_binary(&bytes)
    } else {
        match std::str::from_utf8(&bytes) {
            Ok(s) => parse_points_csv(s),
            Err(_) => parse_err(0, "neither DCLUS1 binary nor UTF-8 text"),
        }
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

/// Coreset together with the clustering parameters it was built for.
#[derive(Clone, Debug, PartialEq)]
pub struct CoresetFile {
    pub core: OffsetCoreset,
    pub k: usize,
    pub z: u32,
    pub epsilon: f64,
}

fn source_token(s: &CoresetSource) -> String {
    match *s {
        CoresetSource::SeedingCenter { center } => format!("g{center}"),
        CoresetSource::Ring { cluster, j, point } => format!("r{cluster}:{j}:{point}"),
    }
}

fn parse_source(t: &str, line: usize) -> Result<CoresetSource> {
    let bad = || Error::Parse {
        line,
        msg: format!("bad provenance {t:?}"),
    };
    if let Some(c) = t.strip_prefix('g') {
        return Ok(CoresetSource::SeedingCenter {
            center: c.parse().map_err(|_| bad())?,
        });
    }
    let r = t.strip_prefix('r').ok_or_else(bad)?;
    let parts: Vec<&str> = r.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(CoresetSource::Ring {
        cluster: parts[0].parse().map_err(|_| bad())?,
        j: parts[1].parse().map_err(|_| bad())?,
        point: parts[2].parse().map_err(|_| bad())?,
    })
}

/// Header `# dim=<d+e> F=<hex> k=<k> z=<z> eps=<eps> ext=<e>`, then one row
/// per point: hex coordinates, the extension when `ext=1`, the weight as
/// `a/b` and the provenance tag.
pub fn coreset_csv(f: &CoresetFile) -> String {
    let c = &f.core;
    let extended = !c.points.is_zero_extension();
    let mut out = format!(
        "# dim={} F={} k={} z={} eps={:?} ext={}\n",
        c.dim() + extended as usize,
        format_hex(c.offset),
        f.k,
        f.z,
        f.epsilon,
        extended as u8
    );
    for i in 0..c.len() {
        let mut row: Vec<String> = c.points.coords(i).iter().map(|&x| format_hex(x)).collect();
        if extended {
            row.push(format_hex(c.points.ext(i)));
        }
        let w = c.weights[i];
        row.push(format!("{}/{}", w.numer(), w.denom()));
        row.push(source_token(&c.provenance[i]));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_coreset_csv(text: &str) -> Result<CoresetFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let Some((hl, header)) = lines.next() else {
        return parse_err(1, "empty file");
    };
    let fields = header_fields(header.trim(), hl)?;
    let total = usize_field(&fields, "dim", hl)?;
    let extended = flag(&fields, "ext", hl)?;
    let dim = total.checked_sub(extended as usize).filter(|&d| d > 0).ok_or(Error::Parse {
        line: hl,
        msg: "dim too small".into(),
    })?;
    let offset = parse_f64(field(&fields, "F", hl)?, hl)?;
    let k = usize_field(&fields, "k", hl)?;
    let z: u32 = field(&fields, "z", hl)?.parse().or_else(|_| parse_err(hl, "z must be a positive integer"))?;
    let epsilon = parse_f64(field(&fields, "eps", hl)?, hl)?;
    let (mut data, mut ext, mut weights, mut prov) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != total + 2 {
            return parse_err(ln, format!("expected {} fields, found {}", total + 2, toks.len()));
        }
        for t in &toks[..dim] {
            data.push(parse_f64(t, ln)?);
        }
        ext.push(if extended { parse_f64(toks[dim], ln)? } else { 0.0 });
        let (a, b) = toks[total].split_once('/').ok_or(Error::Parse {
            line: ln,
            msg: "weight must be a/b".into(),
        })?;
        let (a, b): (u64, u64) = match (a.trim().parse(), b.trim().parse()) {
            (Ok(a), Ok(b)) if b > 0 => (a, b),
            _ => return parse_err(ln, "weight must be a/b with positive integers"),
        };
        weights.push(Ratio::new(a, b));
        prov.push(parse_source(toks[total + 1].trim(), ln)?);
    }
    let base = WeightedPointSet::new(dim, data, weights.iter().map(|w| *w.numer() as f64 / *w.denom() as f64).collect())?;
    let core = OffsetCoreset::new(ExtendedPointSet::new(base, ext)?, weights, offset, prov)?;
    Ok(CoresetFile { core, k, z, epsilon })
}

#[derive(serde::Serialize, serde::Deserialize)]
struct SketchFile<T> {
    params: ClusteringParams,
    sketch: T,
}

/// JSON with shortest round-trip floats, together with the parameters.
pub fn sketch_json(s: &CostPreservingSketch, params: &ClusteringParams) -> Result<String> {
    Ok(serde_json::to_string(&SketchFile { params: *params, sketch: s })? + "\n")
}

pub fn parse_sketch_json(text: &str) -> Result<(ClusteringParams, CostPreservingSketch)> {
    let f: SketchFile<CostPreservingSketch> = serde_json::from_str(text)?;
    f.params.validate()?;
    Ok((f.params, f.sketch))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_examples() {
        assert_eq!(format_hex(0.0), "0x0p+0");
        assert_eq!(format_hex(1.0), "0x1p+0");
        assert_eq!(format_hex(3.0), "0x1.8p+1");
        assert_eq!(format_hex(-0.375), "-0x1.8p-2");
        assert_eq!(format_hex(f64::MIN_POSITIVE / 4.0), "0x0.4p-1022");
        assert_eq!(format_hex(0.1), "0x1.999999999999ap-4");
        assert_eq!(parse_hex("0x1.999999999999ap-4"), Some(0.1));
        assert_eq!(parse_hex("0x10p-4"), Some(1.0));
        assert_eq!(parse_hex("0x1.8"), None);
    }

    #[test]
    fn csv_example() {
        let f = parse_points_csv("# dim=2 weighted=0 ext=0\n1.0,2.0\n").unwrap();
        assert_eq!(f.points.len(), 1);
        assert_eq!(f.points.coords(0), &[1.0, 2.0]);
        assert_eq!(f.points.weight(0), 1.0);
    }

    #[test]
    fn csv_errors_name_the_line() {
        match parse_points_csv("# dim=2 weighted=0 ext=0\n1,2\nNaN,3\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_points_csv("# dim=2 weighted=0 ext=0\n1,2,3\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_points_csv("dim=2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn zero_offset_header() {
        let base = WeightedPointSet::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let core = OffsetCoreset::new(
            ExtendedPointSet::zero_extension(base.with_unit_weights()),
            vec![Ratio::from_integer(1)],
            0.0,
            vec![CoresetSource::SeedingCenter { center: 0 }],
        )
        .unwrap();
        let text = coreset_csv(&CoresetFile { core, k: 2, z: 2, epsilon: 0.3 });
        assert!(text.starts_with("# dim=2 F=0x0p+0 k=2 z=2 eps=0.3 ext=0\n"));
        assert_eq!(text.lines().nth(1), Some("0x1p+0,0x1p+1,1/1,g0"));
    }
}
