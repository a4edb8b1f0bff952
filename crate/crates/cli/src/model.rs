//! Shorthand grammar for plane models:
//! `euclidean` | `lp:<p>` | `ellipse:<a>,<b>` |
//! `fourier:a0=<v>[,k<k>a=<v>][,k<k>b=<v>]`, or a raw JSON object.

use anyhow::{anyhow, bail, Result};
use mincyc_core::plane::{FourierTerm, PlaneModel};

pub fn parse_model(text: &str) -> Result<PlaneModel> {
    let text = text.trim();
    if text.starts_with('{') {
        return Ok(serde_json::from_str(text)?);
    }
    if text.eq_ignore_ascii_case("euclidean") {
        return Ok(PlaneModel::euclidean());
    }
    if let Some(rest) = text.strip_prefix("lp:") {
        let p: f64 = rest.parse().map_err(|_| anyhow!("bad exponent in `{text}`"))?;
        return Ok(PlaneModel::lp(p));
    }
    if let Some(rest) = text.strip_prefix("ellipse:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            bail!("ellipse takes two semi-axes, e.g. ellipse:2,1");
        }
        let a: f64 = parts[0].parse().map_err(|_| anyhow!("bad semi-axis `{}`", parts[0]))?;
        let b: f64 = parts[1].parse().map_err(|_| anyhow!("bad semi-axis `{}`", parts[1]))?;
        return Ok(PlaneModel::ellipse(a, b));
    }
    if let Some(rest) = text.strip_prefix("fourier:") {
        let mut a0 = None;
        let mut terms: Vec<FourierTerm> = Vec::new();
        for piece in rest.split(',') {
            let (key, value) = piece
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value in `{piece}`"))?;
            let value: f64 = value.parse().map_err(|_| anyhow!("bad value in `{piece}`"))?;
            if key == "a0" {
                a0 = Some(value);
                continue;
            }
            let body = key
                .strip_prefix('k')
                .ok_or_else(|| anyhow!("unknown key `{key}` (want a0, k<k>a or k<k>b)"))?;
            let (index, slot) = body.split_at(body.len() - 1);
            let k: u32 = index.parse().map_err(|_| anyhow!("bad harmonic index in `{key}`"))?;
            let term = match terms.iter_mut().find(|t| t.k == k) {
                Some(t) => t,
                None => {
                    terms.push(FourierTerm { k, a: 0.0, b: 0.0 });
                    terms.last_mut().unwrap()
                }
            };
            match slot {
                "a" => term.a = value,
                "b" => term.b = value,
                other => bail!("unknown coefficient slot `{other}` in `{key}`"),
            }
        }
        let a0 = a0.ok_or_else(|| anyhow!("fourier model needs a0=<value>"))?;
        terms.sort_by_key(|t| t.k);
        return Ok(PlaneModel::fourier(a0, terms));
    }
    bail!("unrecognized model `{text}` (euclidean | lp:<p> | ellipse:<a>,<b> | fourier:a0=..)")
}
