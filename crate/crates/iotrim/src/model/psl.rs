//! Registrable-domain grouping over a bundled public-suffix snapshot.
//!
//! `second_level_label("log.us.xiaoyi.com")` is `"xiaoyi.com"`: the label
//! one past the longest matching public suffix. The snapshot ships with the
//! crate (see `data/public_suffix_snapshot.dat`), never fetched live, so
//! grouping is stable across runs.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::destination::{normalize_name, NameError};

const SNAPSHOT: &str = include_str!("../../data/public_suffix_snapshot.dat");

struct SuffixRules {
    exact: HashSet<String>,
    wildcard: HashSet<String>,  // "*.ck" stored as "ck"
    exception: HashSet<String>, // "!www.ck" stored as "www.ck"
}

fn rules() -> &'static SuffixRules {
    static RULES: OnceLock<SuffixRules> = OnceLock::new();
    RULES.get_or_init(|| parse_rules(SNAPSHOT))
}

fn parse_rules(text: &str) -> SuffixRules {
    let mut rules = SuffixRules {
        exact: HashSet::new(),
        wildcard: HashSet::new(),
        exception: HashSet::new(),
    };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        if let Some(rest) = line.strip_prefix('!') {
            rules.exception.insert(rest.to_string());
        } else if let Some(rest) = line.strip_prefix("*.") {
            rules.wildcard.insert(rest.to_string());
        } else {
            rules.exact.insert(line.to_string());
        }
    }
    rules
}

/// Number of labels the public suffix of `name` spans, per the list
/// algorithm: exception rules win, then the longest matching rule, then the
/// implicit `*` rule (one label).
fn suffix_label_count(labels: &[&str]) -> usize {
    let rules = rules();
    let mut best = 1; // implicit "*" rule
    for start in 0..labels.len() {
        let candidate = labels[start..].join(".");
        if rules.exception.contains(&candidate) {
            // The suffix is the exception rule minus its leftmost label.
            return labels.len() - start - 1;
        }
        let span = labels.len() - start;
        if rules.exact.contains(&candidate) && span > best {
            best = span;
        }
        // "*.x" makes any single label directly under x part of the suffix.
        if start > 0 && rules.wildcard.contains(&candidate) && span + 1 > best {
            best = span + 1;
        }
    }
    best
}

/// Registrable second-level grouping label of a DNS name.
///
/// Errors if the input is an address literal rather than a name, or if the
/// name is itself a public suffix.
pub fn second_level_label(name: &str) -> Result<String, NameError> {
    if name.parse::<std::net::Ipv4Addr>().is_ok() {
        return Err(NameError::NotADnsName(name.to_string()));
    }
    let normalized = normalize_name(name)?;
    let labels: Vec<&str> = normalized.split('.').collect();
    let suffix_len = suffix_label_count(&labels);
    if labels.len() <= suffix_len {
        return Err(NameError::NotRegistrable(normalized));
    }
    Ok(labels[labels.len() - suffix_len - 1..].join("."))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn groups_subdomains_under_their_registrable_domain() {
        assert_eq!(second_level_label("log.us.xiaoyi.com").unwrap(), "xiaoyi.com");
        assert_eq!(second_level_label("api.us.xiaoyi.com").unwrap(), "xiaoyi.com");
        assert_eq!(second_level_label("pool.ntp.org").unwrap(), "ntp.org");
        assert_eq!(second_level_label("ntp.org").unwrap(), "ntp.org");
        assert_eq!(second_level_label("amazonaws.com").unwrap(), "amazonaws.com");
    }

    #[test]
    fn multi_label_suffixes_match_longest_rule() {
        assert_eq!(second_level_label("shop.example.co.uk").unwrap(), "example.co.uk");
        assert_eq!(second_level_label("example.ac.cn").unwrap(), "example.ac.cn");
    }

    #[test]
    fn wildcard_and_exception_rules_apply() {
        // *.ck: one extra label belongs to the suffix.
        assert_eq!(second_level_label("a.b.ck").unwrap(), "a.b.ck");
        // !www.ck: exception pulls www.ck back out of the suffix.
        assert_eq!(second_level_label("www.ck").unwrap(), "www.ck");
        assert_eq!(second_level_label("sub.www.ck").unwrap(), "www.ck");
        assert_eq!(second_level_label("city.kawasaki.jp").unwrap(), "city.kawasaki.jp");
        assert_eq!(second_level_label("x.other.kawasaki.jp").unwrap(), "x.other.kawasaki.jp");
    }

    #[test]
    fn unlisted_tld_falls_back_to_last_label() {
        assert_eq!(second_level_label("foo.example.zz").unwrap(), "example.zz");
    }

    #[test]
    fn non_names_and_bare_suffixes_error() {
        assert!(matches!(second_level_label("210.72.145.44"), Err(NameError::NotADnsName(_))));
        assert!(matches!(second_level_label("com"), Err(NameError::NotRegistrable(_))));
        assert!(matches!(second_level_label("co.uk"), Err(NameError::NotRegistrable(_))));
        assert!(second_level_label("a..b").is_err());
    }

    proptest! {
        // Names sharing a registrable domain always share their label.
        #[test]
        fn label_is_invariant_under_subdomain_prefixes(
            sub in "[a-z0-9]{1,10}",
            sub2 in "[a-z0-9]{1,10}",
            host in "[a-z][a-z0-9]{0,10}",
            tld in prop::sample::select(vec!["com", "org", "co.uk", "zz", "io", "ck"]),
        ) {
            let base = format!("{host}.{tld}");
            let label = second_level_label(&format!("{sub}.{base}")).unwrap();
            let deeper = second_level_label(&format!("{sub2}.{sub}.{base}")).unwrap();
            prop_assert_eq!(label, deeper);
        }
    }
}
