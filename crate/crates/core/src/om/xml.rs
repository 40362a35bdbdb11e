use std::collections::BTreeSet;
use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::Num;

use super::{is_ncname, OmError, OmObject, OmSymbol, DEFAULT_CDBASE};
use crate::xml::{escape_text, parse_document, Element, Node};

/// How unqualified symbols are resolved while reading.
#[derive(Debug, Clone)]
pub struct ParseContext {
    /// cdbase used when no ancestor carries a `cdbase` attribute.
    pub default_cdbase: String,
    /// Inside a content dictionary, symbols of that dictionary default to its
    /// own base rather than the global one: `(cdname, cdbase)`.
    pub home_cd: Option<(String, String)>,
}

impl Default for ParseContext {
    fn default() -> Self {
        ParseContext {
            default_cdbase: DEFAULT_CDBASE.to_string(),
            home_cd: None,
        }
    }
}

/// Read an `<OMOBJ>` document.
pub fn parse_om_xml(text: &str) -> Result<OmObject, OmError> {
    let root = parse_document(text)?;
    ParseContext::default().read_omobj(&root)
}

impl ParseContext {
    pub fn read_omobj(&self, el: &Element) -> Result<OmObject, OmError> {
        if el.name != "OMOBJ" {
            return Err(OmError::encoding(&el.name, "expected <OMOBJ>"));
        }
        let inherited = el.attr("cdbase").map(str::to_string);
        let mut children = significant_children(el)?;
        match (children.next(), children.next()) {
            (Some(child), None) => self.read(child, inherited.as_deref()),
            _ => Err(OmError::encoding("OMOBJ", "expected exactly one child object")),
        }
    }

    /// Read a single object element (`OMS`, `OMA`, ...).
    pub fn read(&self, el: &Element, inherited: Option<&str>) -> Result<OmObject, OmError> {
        let cdbase = el.attr("cdbase").or(inherited);
        match el.name.as_str() {
            "OMS" => {
                let cd = required(el, "cd")?;
                let name = required(el, "name")?;
                if !is_ncname(cd) {
                    return Err(OmError::encoding("OMS", format!("cd `{cd}` is not an NCName")));
                }
                if !is_ncname(name) {
                    return Err(OmError::encoding("OMS", format!("name `{name}` is not an NCName")));
                }
                let base = match cdbase {
                    Some(b) if !b.is_empty() => b.to_string(),
                    _ => match &self.home_cd {
                        Some((home, base)) if home == cd => base.clone(),
                        _ => self.default_cdbase.clone(),
                    },
                };
                Ok(OmObject::Symbol(OmSymbol::new(base, cd, name)))
            }
            "OMI" => {
                no_child_elements(el)?;
                parse_integer(el.text().trim()).map(OmObject::Integer)
            }
            "OMF" => {
                if el.attr("hex").is_some() {
                    return Err(OmError::encoding("OMF", "hex encoding is not supported"));
                }
                let dec = required(el, "dec")?;
                parse_float(dec.trim())
                    .map(OmObject::Float)
                    .ok_or_else(|| OmError::encoding("OMF", format!("`{dec}` is not a decimal float")))
            }
            "OMV" => {
                let name = required(el, "name")?;
                if !is_ncname(name) {
                    return Err(OmError::encoding("OMV", format!("name `{name}` is not an NCName")));
                }
                Ok(OmObject::Variable(name.to_string()))
            }
            "OMSTR" => {
                no_child_elements(el)?;
                Ok(OmObject::String(el.text()))
            }
            "OMA" => {
                let mut children = significant_children(el)?;
                let head = children
                    .next()
                    .ok_or_else(|| OmError::encoding("OMA", "missing head"))?;
                let head = self.read(head, cdbase)?;
                let args = children
                    .map(|c| self.read(c, cdbase))
                    .collect::<Result<Vec<_>, _>>()?;
                if args.is_empty() {
                    return Err(OmError::encoding("OMA", "application needs at least one argument"));
                }
                Ok(OmObject::Application {
                    head: Box::new(head),
                    args,
                })
            }
            "OMBIND" => {
                let children: Vec<&Element> = significant_children(el)?.collect();
                let [binder, bvar, body] = children.as_slice() else {
                    return Err(OmError::encoding("OMBIND", "expected binder, <OMBVAR> and body"));
                };
                if bvar.name != "OMBVAR" {
                    return Err(OmError::encoding("OMBIND", "second child must be <OMBVAR>"));
                }
                let mut vars = Vec::new();
                let mut seen = BTreeSet::new();
                for v in significant_children(bvar)? {
                    match self.read(v, cdbase)? {
                        OmObject::Variable(name) => {
                            if !seen.insert(name.clone()) {
                                return Err(OmError::encoding("OMBVAR", format!("variable `{name}` bound twice")));
                            }
                            vars.push(name);
                        }
                        _ => return Err(OmError::encoding("OMBVAR", "only <OMV> children are supported")),
                    }
                }
                if vars.is_empty() {
                    return Err(OmError::encoding("OMBVAR", "no bound variables"));
                }
                Ok(OmObject::Binding {
                    binder: Box::new(self.read(binder, cdbase)?),
                    vars,
                    body: Box::new(self.read(body, cdbase)?),
                })
            }
            other => Err(OmError::encoding(other, "unsupported element")),
        }
    }
}

fn required<'a>(el: &'a Element, attr: &str) -> Result<&'a str, OmError> {
    el.attr(attr)
        .ok_or_else(|| OmError::encoding(&el.name, format!("missing `{attr}` attribute")))
}

/// Child elements, rejecting non-whitespace text between them.
fn significant_children(el: &Element) -> Result<impl Iterator<Item = &Element>, OmError> {
    for n in &el.children {
        if let Node::Text(t) = n {
            if !t.trim().is_empty() {
                return Err(OmError::encoding(&el.name, "unexpected text content"));
            }
        }
    }
    Ok(el.elements())
}

fn no_child_elements(el: &Element) -> Result<(), OmError> {
    if el.elements().next().is_some() {
        return Err(OmError::encoding(&el.name, "unexpected child element"));
    }
    Ok(())
}

fn parse_integer(s: &str) -> Result<BigInt, OmError> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let parsed = if let Some(hex) = body.strip_prefix('x') {
        if hex.is_empty() || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            None
        } else {
            BigInt::from_str_radix(hex, 16).ok()
        }
    } else if !body.is_empty() && body.chars().all(|c| c.is_ascii_digit()) {
        BigInt::from_str_radix(body, 10).ok()
    } else {
        None
    };
    match parsed {
        Some(v) if neg => Ok(-v),
        Some(v) => Ok(v),
        None => Err(OmError::encoding("OMI", format!("`{s}` is not an integer"))),
    }
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "INF" => return Some(f64::INFINITY),
        "-INF" => return Some(f64::NEG_INFINITY),
        "NaN" => return Some(f64::NAN),
        _ => {}
    }
    // Rust would also accept "inf", "infinity" and "nan"
    if !s.chars().all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E')) {
        return None;
    }
    s.parse().ok()
}

fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x == f64::INFINITY {
        "INF".to_string()
    } else if x == f64::NEG_INFINITY {
        "-INF".to_string()
    } else {
        format!("{x:?}")
    }
}

/// Write `obj` wrapped in `<OMOBJ>`. `cdbase` attributes appear only on
/// symbols whose base differs from the default.
pub fn serialize_om_xml(obj: &OmObject) -> String {
    let mut out = String::from("<OMOBJ>");
    write_object(obj, &mut out);
    out.push_str("</OMOBJ>");
    out
}

pub(crate) fn write_object(obj: &OmObject, out: &mut String) {
    match obj {
        OmObject::Symbol(s) => {
            out.push_str("<OMS");
            if s.cdbase != DEFAULT_CDBASE {
                let _ = write!(out, " cdbase=\"{}\"", escape_text(&s.cdbase));
            }
            let _ = write!(out, " cd=\"{}\" name=\"{}\"/>", escape_text(&s.cd), escape_text(&s.name));
        }
        OmObject::Integer(i) => {
            let _ = write!(out, "<OMI>{i}</OMI>");
        }
        OmObject::Float(x) => {
            let _ = write!(out, "<OMF dec=\"{}\"/>", format_float(*x));
        }
        OmObject::Variable(v) => {
            let _ = write!(out, "<OMV name=\"{}\"/>", escape_text(v));
        }
        OmObject::String(s) => {
            let _ = write!(out, "<OMSTR>{}</OMSTR>", escape_text(s));
        }
        OmObject::Application { head, args } => {
            out.push_str("<OMA>");
            write_object(head, out);
            for a in args {
                write_object(a, out);
            }
            out.push_str("</OMA>");
        }
        OmObject::Binding { binder, vars, body } => {
            out.push_str("<OMBIND>");
            write_object(binder, out);
            out.push_str("<OMBVAR>");
            for v in vars {
                let _ = write!(out, "<OMV name=\"{}\"/>", escape_text(v));
            }
            out.push_str("</OMBVAR>");
            write_object(body, out);
            out.push_str("</OMBIND>");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cdbase_applies() {
        let obj = parse_om_xml(r#"<OMOBJ><OMS cd="arith1" name="divide"/></OMOBJ>"#).unwrap();
        assert_eq!(obj, OmObject::symbol("http://www.openmath.org/cd", "arith1", "divide"));
    }

    #[test]
    fn integer_leaf() {
        assert_eq!(parse_om_xml("<OMOBJ><OMI>693</OMI></OMOBJ>").unwrap(), OmObject::int(693));
        assert_eq!(parse_om_xml("<OMOBJ><OMI> -x1F </OMI></OMOBJ>").unwrap(), OmObject::int(-31));
        let big = "123456789012345678901234567890";
        assert_eq!(
            parse_om_xml(&format!("<OMOBJ><OMI>{big}</OMI></OMOBJ>")).unwrap(),
            OmObject::Integer(big.parse().unwrap())
        );
    }

    #[test]
    fn divide_application_round_trips() {
        let text = r#"<OMOBJ xmlns="http://www.openmath.org/OpenMath">
            <OMA><OMS cd="arith1" name="divide"/><OMI>693</OMI><OMI>380</OMI></OMA>
        </OMOBJ>"#;
        let obj = parse_om_xml(text).unwrap();
        let expected = OmObject::call(
            OmSymbol::standard("arith1", "divide"),
            vec![OmObject::int(693), OmObject::int(380)],
        );
        assert_eq!(obj, expected);
        assert_eq!(parse_om_xml(&serialize_om_xml(&obj)).unwrap(), expected);
    }

    #[test]
    fn zero_serializes_compactly() {
        assert_eq!(serialize_om_xml(&OmObject::int(0)), "<OMOBJ><OMI>0</OMI></OMOBJ>");
    }

    #[test]
    fn explicit_cdbase_only_when_nondefault() {
        let std = serialize_om_xml(&OmObject::symbol(DEFAULT_CDBASE, "arith1", "plus"));
        assert!(!std.contains("cdbase"));
        let own = serialize_om_xml(&OmObject::symbol("http://example.org", "statistics", "hdi"));
        assert!(own.contains(r#"cdbase="http://example.org""#));
    }

    #[test]
    fn cdbase_is_inherited() {
        let obj = parse_om_xml(
            r#"<OMOBJ cdbase="http://a.org"><OMA><OMS cd="c" name="f"/><OMS cdbase="http://b.org" cd="c" name="g"/></OMA></OMOBJ>"#,
        )
        .unwrap();
        let (head, args) = obj.as_symbol_application().unwrap();
        assert_eq!(head.cdbase, "http://a.org");
        assert_eq!(args[0].as_symbol().unwrap().cdbase, "http://b.org");
    }

    #[test]
    fn home_cd_symbols_take_its_base() {
        let ctx = ParseContext {
            home_cd: Some(("statistics".into(), "http://example.org".into())),
            ..ParseContext::default()
        };
        let root = parse_document(r#"<OMOBJ><OMA><OMS cd="arith1" name="plus"/><OMS cd="statistics" name="hdi"/></OMA></OMOBJ>"#).unwrap();
        let obj = ctx.read_omobj(&root).unwrap();
        let syms: Vec<String> = obj.symbols().iter().map(OmSymbol::uri).collect();
        assert!(syms.contains(&"http://www.openmath.org/cd/arith1#plus".to_string()));
        assert!(syms.contains(&"http://example.org/statistics#hdi".to_string()));
    }

    #[test]
    fn floats() {
        assert_eq!(parse_om_xml(r#"<OMOBJ><OMF dec="1.5e3"/></OMOBJ>"#).unwrap(), OmObject::Float(1500.0));
        assert_eq!(parse_om_xml(r#"<OMOBJ><OMF dec="-INF"/></OMOBJ>"#).unwrap(), OmObject::Float(f64::NEG_INFINITY));
        assert!(matches!(
            parse_om_xml(r#"<OMOBJ><OMF hex="000000000000F03F"/></OMOBJ>"#),
            Err(OmError::Encoding { .. })
        ));
        assert!(parse_om_xml(r#"<OMOBJ><OMF dec="infinity"/></OMOBJ>"#).is_err());
        for x in [0.1, -0.0, 1e300, 5e-324, f64::MAX, f64::INFINITY] {
            let back = parse_om_xml(&serialize_om_xml(&OmObject::Float(x))).unwrap();
            assert_eq!(back, OmObject::Float(x));
        }
    }

    #[test]
    fn binding() {
        let text = r#"<OMOBJ><OMBIND><OMS cd="fns1" name="lambda"/><OMBVAR><OMV name="x"/></OMBVAR><OMV name="x"/></OMBIND></OMOBJ>"#;
        let obj = parse_om_xml(text).unwrap();
        assert!(matches!(&obj, OmObject::Binding { vars, .. } if vars == &["x"]));
        assert_eq!(serialize_om_xml(&obj), text);
    }

    #[test]
    fn strings_keep_whitespace_and_escape() {
        let obj = OmObject::String(" a < b & c ".into());
        let text = serialize_om_xml(&obj);
        assert_eq!(parse_om_xml(&text).unwrap(), obj);
    }

    #[test]
    fn encoding_errors() {
        let cases = [
            "<OMOBJ><OME><OMS cd=\"a\" name=\"b\"/></OME></OMOBJ>",
            "<OMOBJ><OMS name=\"b\"/></OMOBJ>",
            "<OMOBJ><OMA><OMS cd=\"a\" name=\"b\"/></OMA></OMOBJ>",
            "<OMOBJ><OMI>1.5</OMI></OMOBJ>",
            "<OMOBJ><OMI/></OMOBJ>",
            "<OMOBJ><OMV name=\"1x\"/></OMOBJ>",
            "<OMOBJ><OMBIND><OMS cd=\"a\" name=\"b\"/><OMBVAR/><OMI>1</OMI></OMBIND></OMOBJ>",
            "<OMOBJ><OMBIND><OMS cd=\"a\" name=\"b\"/><OMBVAR><OMV name=\"x\"/><OMV name=\"x\"/></OMBVAR><OMI>1</OMI></OMBIND></OMOBJ>",
            "<OMOBJ><OMI>1</OMI><OMI>2</OMI></OMOBJ>",
            "<OMOBJ>stray<OMI>1</OMI></OMOBJ>",
            "<OMI>1</OMI>",
        ];
        for c in cases {
            assert!(matches!(parse_om_xml(c), Err(OmError::Encoding { .. })), "{c}");
        }
        assert!(matches!(parse_om_xml("<OMOBJ>"), Err(OmError::Xml(_))));
    }
}
