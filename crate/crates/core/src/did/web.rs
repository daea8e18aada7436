//! `did:web` identifier to URL mapping.

use url::{Host, Url};

use super::{Did, DidError};

/// `did:web:<host>` maps to `https://<host>/.well-known/did.json`;
/// `did:web:<host>:<p1>:<p2>` maps to `https://<host>/<p1>/<p2>/did.json`.
/// A port travels percent-encoded in the host segment (`localhost%3A8080`).
pub fn did_web_url(did: &Did) -> Result<Url, DidError> {
    if did.method() != "web" {
        return Err(DidError::WrongMethod(did.text(), "web"));
    }
    let mut segments = did.method_specific_id().split(':');
    let host = percent_decode(segments.next().unwrap_or_default())
        .ok_or_else(|| DidError::MalformedDid(did.text(), "bad percent-encoding"))?;
    if host.is_empty() || host.contains('/') {
        return Err(DidError::MalformedDid(did.text(), "bad host"));
    }
    let mut path = String::new();
    let mut has_path = false;
    for seg in segments {
        let seg = percent_decode(seg)
            .filter(|s| !s.is_empty() && !s.contains('/') && s != "." && s != "..")
            .ok_or_else(|| DidError::MalformedDid(did.text(), "bad path segment"))?;
        path.push('/');
        path.push_str(&seg);
        has_path = true;
    }
    if !has_path {
        path.push_str("/.well-known");
    }
    Url::parse(&format!("https://{host}{path}/did.json"))
        .map_err(|_| DidError::MalformedDid(did.text(), "not a valid web origin"))
}

/// Inverse of [`did_web_url`] for an origin plus optional path: builds
/// `did:web:<host>[:<p1>...]`, percent-encoding a port.
pub fn did_web_for(domain: &str, path: &[&str]) -> Result<Did, DidError> {
    let mut text = format!("did:web:{}", domain.replace(':', "%3A"));
    for p in path {
        text.push(':');
        text.push_str(p);
    }
    let did = Did::parse(&text)?;
    did_web_url(&did)?;
    Ok(did)
}

pub(crate) fn is_loopback(url: &Url) -> bool {
    match url.host() {
        Some(Host::Ipv4(ip)) => ip.is_loopback(),
        Some(Host::Ipv6(ip)) => ip.is_loopback(),
        Some(Host::Domain(d)) => d.eq_ignore_ascii_case("localhost"),
        None => false,
    }
}

fn percent_decode(s: &str) -> Option<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn url(did: &str) -> String {
        did_web_url(&Did::parse(did).unwrap()).unwrap().to_string()
    }

    #[test]
    fn well_known_path() {
        assert_eq!(url("did:web:uniofscience.com"), "https://uniofscience.com/.well-known/did.json");
    }

    #[test]
    fn path_segments() {
        assert_eq!(url("did:web:example.com:datasets:ds1"), "https://example.com/datasets/ds1/did.json");
    }

    #[test]
    fn port_in_host() {
        assert_eq!(url("did:web:localhost%3A8443"), "https://localhost:8443/.well-known/did.json");
    }

    #[test]
    fn wrong_method() {
        let did = Did::parse("did:key:z6MkiTBz1ymuepAQ4HEHYSF1H8quG5GLVVQR3djdX3mDooWp").unwrap();
        assert!(matches!(did_web_url(&did), Err(DidError::WrongMethod(..))));
    }

    #[test]
    fn builds_from_domain() {
        assert_eq!(did_web_for("127.0.0.1:9000", &[]).unwrap().text(), "did:web:127.0.0.1%3A9000");
        assert_eq!(did_web_for("example.com", &["a", "b"]).unwrap().text(), "did:web:example.com:a:b");
    }

    #[test]
    fn loopback_detection() {
        assert!(is_loopback(&Url::parse("http://127.0.0.1:1/").unwrap()));
        assert!(is_loopback(&Url::parse("http://localhost/").unwrap()));
        assert!(is_loopback(&Url::parse("http://[::1]/").unwrap()));
        assert!(!is_loopback(&Url::parse("http://example.com/").unwrap()));
    }
}
