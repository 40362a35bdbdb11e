//! Minimal element tree over quick-xml events, shared by the OpenMath object
//! and content dictionary readers.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

/// Nesting beyond this is rejected rather than risking stack exhaustion.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("XML error at byte {position}: {message}")]
pub struct XmlError {
    pub position: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    /// Local name with any namespace prefix removed.
    pub name: String,
    pub attributes: Vec<(String, String)>,
    pub children: Vec<Node>,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    pub fn child(&self, name: &str) -> Option<&Element> {
        self.elements().find(|e| e.name == name)
    }

    /// Concatenated text of direct text children.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for n in &self.children {
            if let Node::Text(t) = n {
                out.push_str(t);
            }
        }
        out
    }
}

fn local_name(raw: &[u8]) -> String {
    let s = String::from_utf8_lossy(raw);
    match s.rfind(':') {
        Some(i) => s[i + 1..].to_string(),
        None => s.into_owned(),
    }
}

fn start_element(reader: &Reader<&[u8]>, e: &BytesStart<'_>) -> Result<Element, XmlError> {
    let mut attributes = Vec::new();
    for a in e.attributes() {
        let a = a.map_err(|err| XmlError {
            position: reader.buffer_position(),
            message: err.to_string(),
        })?;
        let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        if key == "xmlns" || key.starts_with("xmlns:") {
            continue;
        }
        let value = a
            .unescape_value()
            .map_err(|err| XmlError {
                position: reader.buffer_position(),
                message: err.to_string(),
            })?
            .into_owned();
        attributes.push((local_name(key.as_bytes()), value));
    }
    Ok(Element {
        name: local_name(e.name().as_ref()),
        attributes,
        children: Vec::new(),
    })
}

/// Parse a document and return its root element. Comments, processing
/// instructions and the doctype are dropped; whitespace-only text is kept so
/// callers can decide whether it matters.
pub fn parse_document(text: &str) -> Result<Element, XmlError> {
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    let err = |reader: &Reader<&[u8]>, message: String| XmlError {
        position: reader.buffer_position(),
        message,
    };
    loop {
        let event = reader
            .read_event()
            .map_err(|e| err(&reader, e.to_string()))?;
        match event {
            Event::Start(e) => {
                if root.is_some() {
                    return Err(err(&reader, "content after root element".into()));
                }
                if stack.len() >= MAX_DEPTH {
                    return Err(err(&reader, format!("nesting deeper than {MAX_DEPTH}")));
                }
                stack.push(start_element(&reader, &e)?);
            }
            Event::Empty(e) => {
                let el = start_element(&reader, &e)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(el)),
                    None if root.is_none() => root = Some(el),
                    None => return Err(err(&reader, "content after root element".into())),
                }
            }
            Event::End(e) => {
                let Some(el) = stack.pop() else {
                    return Err(err(&reader, "unbalanced end tag".into()));
                };
                if el.name != local_name(e.name().as_ref()) {
                    return Err(err(&reader, format!("mismatched end tag for <{}>", el.name)));
                }
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(el)),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let s = t.unescape().map_err(|e| err(&reader, e.to_string()))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Text(s.into_owned())),
                    None if s.trim().is_empty() => {}
                    None => return Err(err(&reader, "text outside root element".into())),
                }
            }
            Event::CData(t) => {
                let s = String::from_utf8_lossy(&t).into_owned();
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Text(s)),
                    None => return Err(err(&reader, "CDATA outside root element".into())),
                }
            }
            Event::Eof => break,
            Event::Decl(_) | Event::PI(_) | Event::DocType(_) | Event::Comment(_) => {}
        }
    }
    if !stack.is_empty() {
        return Err(err(&reader, "unexpected end of document".into()));
    }
    root.ok_or_else(|| err(&reader, "no root element".into()))
}

pub fn escape_text(s: &str) -> String {
    quick_xml::escape::escape(s).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_tree_and_strips_namespace_prefixes() {
        let root = parse_document(
            r#"<?xml version="1.0"?><om:OMOBJ xmlns:om="http://www.openmath.org/OpenMath"><om:OMI> 5 </om:OMI><!-- c --></om:OMOBJ>"#,
        )
        .unwrap();
        assert_eq!(root.name, "OMOBJ");
        let omi = root.child("OMI").unwrap();
        assert_eq!(omi.text(), " 5 ");
    }

    #[test]
    fn entities_are_unescaped() {
        let root = parse_document(r#"<a b="x &amp; y">1 &lt; 2</a>"#).unwrap();
        assert_eq!(root.attr("b"), Some("x & y"));
        assert_eq!(root.text(), "1 < 2");
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_document("").is_err());
        assert!(parse_document("<a><b></a>").is_err());
        assert!(parse_document("<a></a><b/>").is_err());
        assert!(parse_document("<a>").is_err());
        assert!(parse_document("text").is_err());
    }

    #[test]
    fn depth_is_bounded() {
        let deep = "<a>".repeat(MAX_DEPTH + 1) + &"</a>".repeat(MAX_DEPTH + 1);
        assert!(parse_document(&deep).unwrap_err().message.contains("nesting"));
        let ok = "<a>".repeat(MAX_DEPTH) + &"</a>".repeat(MAX_DEPTH);
        assert!(parse_document(&ok).is_ok());
    }
}
