//! Compact textual descriptions of spaces and representations.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use roelab::reps::UnitaryRep;
use roelab::space::{self, FiniteMetricSpace, SpaceJson};

/// Pairwise distance used by `far:k` when none is given.
pub const DEFAULT_FAR_DISTANCE: f64 = 10.0;

fn field<T: std::str::FromStr>(spec: &str, parts: &[&str], i: usize, what: &str) -> Result<T> {
    let raw = parts.get(i).with_context(|| format!("space `{spec}` is missing {what}"))?;
    raw.parse().map_err(|_| anyhow::anyhow!("space `{spec}`: cannot parse {what} from `{raw}`"))
}

/// `far:k[:D]`, `path:n`, `interval:n`, `cycle:n`, `complete:n`,
/// `regular:n:d:seed`, `graph:n:p:seed`, or a path to a space JSON file.
pub fn space(spec: &str) -> Result<Arc<FiniteMetricSpace>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let s = match parts[0] {
        "far" => {
            let d = if parts.len() > 2 { field(spec, &parts, 2, "the distance D")? } else { DEFAULT_FAR_DISTANCE };
            space::far(field(spec, &parts, 1, "the point count")?, d)?
        }
        "path" => space::path(field(spec, &parts, 1, "the point count")?),
        "interval" => space::interval(field(spec, &parts, 1, "the point count")?),
        "cycle" => space::cycle(field(spec, &parts, 1, "the point count")?),
        "complete" => space::complete(field(spec, &parts, 1, "the point count")?),
        "regular" => space::random_regular(
            field(spec, &parts, 1, "the point count")?,
            field(spec, &parts, 2, "the degree")?,
            field(spec, &parts, 3, "the seed")?,
        )?,
        "graph" => space::random_graph(
            field(spec, &parts, 1, "the point count")?,
            field(spec, &parts, 2, "the edge probability")?,
            field(spec, &parts, 3, "the seed")?,
        )?,
        _ if Path::new(spec).is_file() => {
            let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
            let json: SpaceJson = serde_json::from_str(&text).with_context(|| format!("parsing space JSON {spec}"))?;
            FiniteMetricSpace::from_json(&json)?
        }
        other => bail!(
            "unknown space `{other}`: expected far:k[:D], path:n, interval:n, cycle:n, complete:n, regular:n:d:seed, graph:n:p:seed or a JSON file"
        ),
    };
    Ok(Arc::new(s))
}

/// `heis:p`, `sym:m` (standard representation) or `perm:m` (the reducible
/// permutation representation, kept as a known-bad fixture).
pub fn group(spec: &str) -> Result<UnitaryRep> {
    let (kind, arg) = spec.split_once(':').with_context(|| format!("group `{spec}` should look like heis:p, sym:m or perm:m"))?;
    let k: u32 = arg.parse().map_err(|_| anyhow::anyhow!("group `{spec}`: `{arg}` is not a number"))?;
    Ok(match kind {
        "heis" => UnitaryRep::heisenberg(k)?,
        "sym" => UnitaryRep::symmetric_standard(k as usize)?,
        "perm" => UnitaryRep::permutation(k as usize)?,
        _ => bail!("unknown group kind `{kind}`: expected heis, sym or perm"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spaces() {
        assert_eq!(space("far:5").unwrap().dist(0, 3), 10.0);
        assert_eq!(space("far:5:3").unwrap().dist(0, 3), 3.0);
        assert_eq!(space("interval:7").unwrap().diameter(), 6.0);
        assert_eq!(space("regular:16:4:1").unwrap().len(), 16);
        assert!(space("torus:3").is_err());
        assert!(space("path:x").is_err());
    }

    #[test]
    fn parses_groups() {
        assert_eq!(group("heis:5").unwrap().dim(), 5);
        assert_eq!(group("sym:4").unwrap().dim(), 3);
        assert_eq!(group("perm:3").unwrap().dim(), 3);
        assert!(group("heis:4").is_err());
        assert!(group("alt:4").is_err());
    }
}
