use std::collections::BTreeSet;

use url::{Host, Url};

/// Parses and canonicalizes an absolute http(s) URL.
pub fn canonicalize(raw: &str) -> Option<Url> {
    Url::parse(raw.trim()).ok().and_then(canonical)
}

/// Resolves `href` against `base` and canonicalizes the result.
pub fn resolve(base: &Url, href: &str) -> Option<Url> {
    base.join(href.trim()).ok().and_then(canonical)
}

/// Scheme and host are lowercased, default ports and dot segments are
/// dropped by the parser; on top of that fragments and empty queries go.
fn canonical(mut url: Url) -> Option<Url> {
    if !matches!(url.scheme(), "http" | "https") || url.host().is_none() {
        return None;
    }
    url.set_fragment(None);
    if url.query() == Some("") {
        url.set_query(None);
    }
    if let Some(Host::Domain(d)) = url.host() {
        let trimmed = d.trim_end_matches('.').to_string();
        if trimmed != d {
            url.set_host(Some(&trimmed)).ok()?;
        }
    }
    Some(url)
}

/// Registrable domain ("eTLD+1") of the URL host; IP addresses and
/// single-label hosts stand for themselves.
pub fn registrable_domain(url: &Url) -> Option<String> {
    match url.host()? {
        Host::Domain(d) => {
            let d = d.to_ascii_lowercase();
            Some(
                psl::domain_str(&d)
                    .filter(|_| d.contains('.'))
                    .map(str::to_string)
                    .unwrap_or(d),
            )
        }
        Host::Ipv4(ip) => Some(ip.to_string()),
        Host::Ipv6(ip) => Some(ip.to_string()),
    }
}

pub fn seed_domains<'a>(seeds: impl IntoIterator<Item = &'a Url>) -> BTreeSet<String> {
    seeds.into_iter().filter_map(registrable_domain).collect()
}

pub fn in_domains(url: &Url, domains: &BTreeSet<String>) -> bool {
    registrable_domain(url).is_some_and(|d| domains.contains(&d))
}

/// Keeps only the URLs whose registrable domain is one of the seed domains.
pub fn domain_filter(urls: Vec<Url>, domains: &BTreeSet<String>) -> Vec<Url> {
    urls.into_iter().filter(|u| in_domains(u, domains)).collect()
}
