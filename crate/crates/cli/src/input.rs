//! Loading polynomials, families and arcs from flags and files.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mixed_newton::family::FamilyPolynomial;
use mixed_newton::mixedpoly::infer_dimension;
use mixed_newton::probe::{Arc, ArcJson, ArcPairJson};
use mixed_newton::{Complex, MixedPolynomial};
use serde::Serialize;

use crate::{FamilyInput, PolyInput};

/// Where an input came from, echoed in reports.
#[derive(Clone, Debug, Serialize)]
pub struct Source {
    /// The path as given, or `None` for inline text.
    pub path: Option<String>,
    /// The expression text after comment stripping.
    pub text: String,
    pub n: usize,
}

/// Drops `#` comments and joins the remaining lines.
pub fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn read_text(path: &Path) -> Result<String> {
    let raw = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = strip_comments(&raw);
    if text.is_empty() {
        bail!("{} contains no expression", path.display());
    }
    Ok(text)
}

fn looks_like_path(s: &str) -> bool {
    s.ends_with(".mp") || s.ends_with(".fam") || Path::new(s).is_file()
}

fn dimension(text: &str, n: Option<usize>) -> Result<usize> {
    let inferred = infer_dimension(text)?;
    match n {
        Some(n) if n < inferred => bail!("--n {} is smaller than the largest variable index {}", n, inferred),
        Some(n) => Ok(n),
        None => Ok(inferred),
    }
}

pub fn load_poly(input: &PolyInput) -> Result<(Source, MixedPolynomial)> {
    let (path, text) = if looks_like_path(&input.poly) {
        (Some(input.poly.clone()), read_text(Path::new(&input.poly))?)
    } else {
        (None, strip_comments(&input.poly))
    };
    let n = dimension(&text, input.n)?;
    let f = MixedPolynomial::parse(&text, n).with_context(|| format!("cannot parse polynomial `{}`", text))?;
    if f.is_zero() {
        bail!("the polynomial is identically zero");
    }
    Ok((Source { path, text, n }, f))
}

pub fn load_family(input: &FamilyInput) -> Result<(Source, FamilyPolynomial)> {
    let (path, text) = match (&input.file, &input.poly) {
        (Some(p), _) => (Some(p.display().to_string()), read_text(p)?),
        (None, Some(t)) if looks_like_path(t) => (Some(t.clone()), read_text(Path::new(t))?),
        (None, Some(t)) => (None, strip_comments(t)),
        (None, None) => bail!("one of --file or --poly is required"),
    };
    let n = dimension(&text, input.n)?;
    let f = FamilyPolynomial::parse(&text, n).with_context(|| format!("cannot parse family `{}`", text))?;
    Ok((Source { path, text, n }, f))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("malformed arc file {}", path.display()))
}

pub fn load_arc(path: &Path, n: usize) -> Result<(ArcJson, Arc)> {
    let json: ArcJson = read_json(path)?;
    let arc = Arc::try_from(json.clone())?;
    arc.validate(n)?;
    Ok((json, arc))
}

pub fn load_pair(path: &Path, n: usize) -> Result<(ArcPairJson, Arc, Arc)> {
    let json: ArcPairJson = read_json(path)?;
    let p = Arc::try_from(json.p_arc.clone())?;
    let q = Arc::try_from(json.q_arc.clone())?;
    p.validate(n).context("p_arc")?;
    q.validate(n).context("q_arc")?;
    Ok((json, p, q))
}

/// Parses `0.5`, `0.9i`, `0.3-0.4i` and similar.
pub fn parse_complex(s: &str) -> Result<Complex> {
    let z: Complex = s
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("`{}` is not a complex number", s))?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        bail!("`{}` is not finite", s);
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_are_dropped() {
        assert_eq!(strip_comments("# header\nz1^2 # tail\n  + z2\n"), "z1^2 + z2");
    }

    #[test]
    fn complex_values() {
        assert_eq!(parse_complex("0.9i").unwrap(), Complex::new(0.0, 0.9));
        assert_eq!(parse_complex(" 0.5 ").unwrap(), Complex::new(0.5, 0.0));
        assert_eq!(parse_complex("0.3-0.4i").unwrap(), Complex::new(0.3, -0.4));
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("inf").is_err());
    }

    #[test]
    fn inline_and_dimension() {
        let input = PolyInput {
            poly: "z1*~z1".into(),
            n: None,
        };
        let (src, f) = load_poly(&input).unwrap();
        assert_eq!((src.n, f.len()), (1, 1));
        assert!(src.path.is_none());
        let wide = PolyInput {
            poly: "z1".into(),
            n: Some(3),
        };
        assert_eq!(load_poly(&wide).unwrap().1.n(), 3);
        let narrow = PolyInput {
            poly: "z3".into(),
            n: Some(2),
        };
        assert!(load_poly(&narrow).is_err());
    }
}
