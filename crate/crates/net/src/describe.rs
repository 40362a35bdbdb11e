//! HTML and RDF renderings of a content dictionary.

use std::fmt::Write;

use omld_core::cd::{extract_links, ContentDictionary, TypedLink};
use omld_core::om::{serialize_om_xml, SymbolUri};
use omld_core::rdf::{Graph, Iri, Literal, Triple, RDF_TYPE};
use omld_core::xml::escape_text;

pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";

/// Terms of the small vocabulary a server uses to describe its CDs, all in
/// the namespace `{base}/vocab#`.
#[derive(Debug, Clone)]
pub struct LocalVocab {
    pub namespace: String,
    pub name: Iri,
    pub description: Iri,
    pub defined_in: Iri,
    pub content_dictionary: Iri,
    pub symbol: Iri,
}

impl LocalVocab {
    pub fn for_base(base: &Iri) -> LocalVocab {
        let namespace = format!("{}/vocab#", base.as_str().trim_end_matches('/'));
        let term = |local: &str| Iri::new(format!("{namespace}{local}")).expect("base is absolute");
        LocalVocab {
            name: term("name"),
            description: term("description"),
            defined_in: term("definedIn"),
            content_dictionary: term("ContentDictionary"),
            symbol: term("Symbol"),
            namespace,
        }
    }
}

fn trimmed(base: &Iri) -> &str {
    base.as_str().trim_end_matches('/')
}

/// `{base}/{cd}`, the URI a server publishes a dictionary under.
pub fn cd_uri(base: &Iri, cd: &str) -> String {
    format!("{}/{cd}", trimmed(base))
}

/// `{base}/{cd}#{name}`.
pub fn minted_symbol_uri(base: &Iri, cd: &str, name: &str) -> String {
    SymbolUri::hash(trimmed(base), cd, name).to_string()
}

/// RDF description: the dictionary, each symbol with name, description and
/// containment, `owl:sameAs` to the cdbase URI when the server's base
/// differs from it, and one triple per typed link.
pub fn cd_to_rdf(cd: &ContentDictionary, base: &Iri, link_predicates: &[Iri]) -> Graph {
    let v = LocalVocab::for_base(base);
    let rdf_type = Iri::new(RDF_TYPE).expect("rdf:type");
    let same_as = Iri::new(OWL_SAME_AS).expect("owl:sameAs");
    let mut g = Graph::new();
    g.set_prefix("", Iri::new(v.namespace.clone()).expect("vocab namespace"));
    g.set_prefix("rdf", Iri::new(omld_core::rdf::RDF_NS).expect("rdf"));
    g.set_prefix("owl", Iri::new("http://www.w3.org/2002/07/owl#").expect("owl"));

    let cd_iri = Iri::new(cd_uri(base, &cd.name)).expect("cd uri");
    g.insert(Triple::new(cd_iri.clone(), rdf_type.clone(), v.content_dictionary.clone()));
    g.insert(Triple::new(cd_iri.clone(), v.name.clone(), Literal::plain(cd.name.clone())));
    g.insert(Triple::new(cd_iri.clone(), v.description.clone(), Literal::plain(cd.description.trim())));

    let same_base = cd.cdbase.trim_end_matches('/') == trimmed(base);
    for def in &cd.definitions {
        let s = Iri::new(minted_symbol_uri(base, &cd.name, &def.name)).expect("symbol uri");
        g.insert(Triple::new(s.clone(), rdf_type.clone(), v.symbol.clone()));
        g.insert(Triple::new(s.clone(), v.name.clone(), Literal::plain(def.name.clone())));
        g.insert(Triple::new(s.clone(), v.description.clone(), Literal::plain(def.description.trim())));
        g.insert(Triple::new(s.clone(), v.defined_in.clone(), cd_iri.clone()));
        if !same_base {
            if let Ok(canonical) = Iri::new(cd.symbol(&def.name).uri()) {
                g.insert(Triple::new(s, same_as.clone(), canonical));
            }
        }
    }
    for link in extract_links(cd, link_predicates) {
        let subject = local_subject(cd, base, &link).unwrap_or(link.subject);
        g.insert(Triple::new(subject, link.predicate, link.object));
    }
    g
}

/// The minted URI for a link whose subject is one of this CD's symbols.
fn local_subject(cd: &ContentDictionary, base: &Iri, link: &TypedLink) -> Option<Iri> {
    let def = cd
        .definitions
        .iter()
        .find(|d| cd.symbol(&d.name).uri() == link.subject.as_str())?;
    Iri::new(minted_symbol_uri(base, &cd.name, &def.name)).ok()
}

/// A page with one section per symbol, anchored by the symbol name and
/// annotated with `about`/`property` attributes.
pub fn render_cd_html(cd: &ContentDictionary, base: &Iri, link_predicates: &[Iri]) -> String {
    let v = LocalVocab::for_base(base);
    let links = extract_links(cd, link_predicates);
    let mut out = String::new();
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html xmlns=\"http://www.w3.org/1999/xhtml\" lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n\
         <title>{name}</title>\n</head>\n<body vocab=\"{vocab}\" about=\"{about}\" typeof=\"ContentDictionary\">\n\
         <h1 property=\"name\">{name}</h1>\n<p property=\"description\">{desc}</p>\n",
        name = escape_text(&cd.name),
        vocab = escape_text(&v.namespace),
        about = escape_text(&cd_uri(base, &cd.name)),
        desc = escape_text(cd.description.trim()),
    );
    if !cd.definitions.is_empty() {
        out.push_str("<nav>\n<ul>\n");
        for def in &cd.definitions {
            let _ = writeln!(out, "<li><a href=\"#{0}\">{1}</a></li>", escape_text(&def.name), escape_text(&def.name));
        }
        out.push_str("</ul>\n</nav>\n");
    }
    for def in &cd.definitions {
        let uri = cd.symbol(&def.name).uri();
        let _ = write!(
            out,
            "<section id=\"{id}\" about=\"{about}\" typeof=\"Symbol\">\n<h2 property=\"name\">{name}</h2>\n\
             <p property=\"description\">{desc}</p>\n",
            id = escape_text(&def.name),
            about = escape_text(&uri),
            name = escape_text(&def.name),
            desc = escape_text(def.description.trim()),
        );
        for cmp in &def.cmps {
            let _ = writeln!(out, "<p class=\"cmp\">{}</p>", escape_text(cmp.trim()));
        }
        for fmp in &def.fmps {
            let _ = writeln!(out, "<pre class=\"fmp\"><code>{}</code></pre>", escape_text(&serialize_om_xml(fmp)));
        }
        let own: Vec<&TypedLink> = links.iter().filter(|l| l.subject.as_str() == uri).collect();
        if !own.is_empty() {
            out.push_str("<ul class=\"links\">\n");
            for l in own {
                let _ = writeln!(
                    out,
                    "<li><a rel=\"{rel}\" href=\"{href}\">{text}</a></li>",
                    rel = escape_text(l.predicate.as_str()),
                    href = escape_text(l.object.as_str()),
                    text = escape_text(l.object.as_str()),
                );
            }
            out.push_str("</ul>\n");
        }
        out.push_str("</section>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}
