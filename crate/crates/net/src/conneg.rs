//! Accept header handling for both ends of a request.

/// One media range from an Accept header.
#[derive(Debug, Clone, PartialEq)]
pub struct MediaRange {
    pub kind: String,
    pub subtype: String,
    pub q: f32,
}

impl MediaRange {
    fn matches(&self, mime: &str) -> Option<u8> {
        let (kind, subtype) = mime.split_once('/')?;
        match (self.kind.as_str(), self.subtype.as_str()) {
            ("*", "*") => Some(0),
            (k, "*") if k.eq_ignore_ascii_case(kind) => Some(1),
            (k, s) if k.eq_ignore_ascii_case(kind) && s.eq_ignore_ascii_case(subtype) => Some(2),
            _ => None,
        }
    }
}

/// Parse an Accept header, skipping malformed entries.
pub fn parse_accept(header: &str) -> Vec<MediaRange> {
    let mut out = Vec::new();
    for item in header.split(',') {
        let mut parts = item.split(';');
        let Some((kind, subtype)) = parts.next().map(str::trim).and_then(|m| m.split_once('/')) else {
            continue;
        };
        let (kind, subtype) = (kind.trim(), subtype.trim());
        if kind.is_empty() || subtype.is_empty() || (kind == "*" && subtype != "*") {
            continue;
        }
        let mut q = 1.0;
        for param in parts {
            if let Some((k, v)) = param.split_once('=') {
                if k.trim().eq_ignore_ascii_case("q") {
                    q = v.trim().parse::<f32>().ok().filter(|q| (0.0..=1.0).contains(q)).unwrap_or(0.0);
                }
            }
        }
        out.push(MediaRange {
            kind: kind.to_ascii_lowercase(),
            subtype: subtype.to_ascii_lowercase(),
            q,
        });
    }
    out
}

/// Pick one of `offered` for the given Accept header. A missing or empty
/// header selects `default`. The most specific range matching a type sets
/// its quality; among equal qualities the earlier entry of `offered` wins.
pub fn negotiate<'a>(accept: Option<&str>, offered: &[&'a str], default: &'a str) -> Option<&'a str> {
    let ranges = match accept.map(str::trim) {
        None | Some("") => return Some(default),
        Some(h) => parse_accept(h),
    };
    if ranges.is_empty() {
        return Some(default);
    }
    let quality = |mime: &str| {
        ranges
            .iter()
            .filter_map(|r| r.matches(mime).map(|spec| (spec, r.q)))
            .max_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
            .map(|(_, q)| q)
            .unwrap_or(0.0)
    };
    let mut order: Vec<&'a str> = Vec::with_capacity(offered.len());
    if offered.contains(&default) {
        order.push(default);
    }
    order.extend(offered.iter().copied().filter(|m| *m != default));
    let mut best: Option<(&'a str, f32)> = None;
    for m in order {
        let q = quality(m);
        if q > 0.0 && best.is_none_or(|(_, bq)| q > bq) {
            best = Some((m, q));
        }
    }
    best.map(|(m, _)| m)
}

/// `a, b;q=0.9, c;q=0.8, ...`, never going below 0.1.
pub fn accept_header(types: &[&str]) -> String {
    types
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if i == 0 {
                t.to_string()
            } else {
                let tenths = 10usize.saturating_sub(i).max(1);
                format!("{t};q=0.{tenths}")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// The media type of a Content-Type value, without parameters.
pub fn media_type(content_type: &str) -> String {
    content_type.split(';').next().unwrap_or("").trim().to_ascii_lowercase()
}
