//! Parsers for complex numbers, index lists and Ω domain specs.

use spinor_minimal::C64;

/// Complex number in the forms `1.5`, `-2i`, `0.3-1.2i`, `i`.
pub fn complex(s: &str) -> Result<C64, String> {
    s.trim().parse::<C64>().map_err(|_| format!("not a complex number: {s:?} (expected e.g. 0.3-1.2i)"))
}

/// Comma-separated complex numbers.
pub fn complex_list(s: &str) -> Result<Vec<C64>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(complex).collect()
}

/// Comma-separated 1-based indices, returned 0-based.
pub fn index_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| match t.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(format!("not a 1-based index: {t:?}")),
        })
        .collect()
}

/// Domain and ends for `omega`.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    /// Finite ends, plus ∞ when `infinity`.
    Sphere { finite: Vec<C64>, infinity: bool },
    /// Ends on the twisted torus; 0 is always an end.
    Twisted { ends: Vec<C64> },
    /// Ends on the untwisted torus with spin structure index r.
    Untwisted { r: usize, ends: Vec<C64> },
    /// Paired ends ±a on the untwisted torus.
    Paired { r: usize, a: Vec<C64> },
}

pub const DOMAIN_HELP: &str =
    "sphere:Z1,Z2,...[,inf] | twisted:A1,... | untwistedR:A1,... | pairedR:A1,... (R in 1..3)";

fn suffix_r(kind: &str, prefix: &str) -> Result<usize, String> {
    let r = kind[prefix.len()..]
        .parse::<usize>()
        .map_err(|_| format!("{prefix} needs an index 1, 2 or 3, e.g. {prefix}3"))?;
    if (1..=3).contains(&r) {
        Ok(r)
    } else {
        Err(format!("{prefix} index must be 1, 2 or 3, got {r}"))
    }
}

pub fn domain(s: &str) -> Result<DomainSpec, String> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| format!("domain spec needs a ':' ({DOMAIN_HELP})"))?;
    let kind = kind.trim();
    match kind {
        "sphere" => {
            let mut finite = Vec::new();
            let mut infinity = false;
            for t in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                if t.eq_ignore_ascii_case("inf") {
                    infinity = true;
                } else {
                    finite.push(complex(t)?);
                }
            }
            Ok(DomainSpec::Sphere { finite, infinity })
        }
        "twisted" => {
            let mut ends = complex_list(rest)?;
            let zero = C64::new(0.0, 0.0);
            ends.retain(|&z| z != zero);
            ends.insert(0, zero);
            Ok(DomainSpec::Twisted { ends })
        }
        k if k.starts_with("untwisted") => {
            Ok(DomainSpec::Untwisted { r: suffix_r(k, "untwisted")?, ends: complex_list(rest)? })
        }
        k if k.starts_with("paired") => Ok(DomainSpec::Paired { r: suffix_r(k, "paired")?, a: complex_list(rest)? }),
        _ => Err(format!("unknown domain {kind:?} ({DOMAIN_HELP})")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0.3-1.2i").unwrap(), C64::new(0.3, -1.2));
        assert_eq!(complex(" i ").unwrap(), C64::new(0.0, 1.0));
        assert!(complex("1+").is_err());
    }

    #[test]
    fn indices_are_one_based() {
        assert_eq!(index_list("1,3").unwrap(), vec![0, 2]);
        assert_eq!(index_list("").unwrap(), Vec::<usize>::new());
        assert!(index_list("0").is_err());
    }

    #[test]
    fn domains() {
        assert_eq!(
            domain("sphere:0.5,-i,inf").unwrap(),
            DomainSpec::Sphere { finite: vec![C64::new(0.5, 0.0), C64::new(0.0, -1.0)], infinity: true }
        );
        assert_eq!(
            domain("twisted:0.4+0.3i").unwrap(),
            DomainSpec::Twisted { ends: vec![C64::new(0.0, 0.0), C64::new(0.4, 0.3)] }
        );
        assert_eq!(domain("paired2:0.3+0.2i").unwrap(), DomainSpec::Paired { r: 2, a: vec![C64::new(0.3, 0.2)] });
        assert!(domain("untwisted4:0.1").is_err());
        assert!(domain("plane:1").is_err());
        assert!(domain("sphere").is_err());
    }
}
