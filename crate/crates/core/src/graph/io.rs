//! Text and binary serialization.
//!
//! Text digraph: `digraph n=<n> m=<arcs>` then one `u v` per line.
//! Text bipartite: `bipartite left=<l> right=<r> m=<edges>` then one `a b` per line.
//! Binary digraph: magic `HPLX1`, `n` as little-endian u64, then `n` rows of
//! `ceil(n/64)` little-endian u64 words.
//! Blank lines and lines starting with `#` are skipped in text input.

use std::io::{BufRead, Read, Write};

use super::{BipartiteGraph, Digraph};
use crate::bitset::{words_for, BitSet};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 5] = b"HPLX1";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn header_field(tok: Option<&str>, key: &str, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing `{key}=`")))?;
    let val = tok
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected `{key}=`, found `{tok}`")))?;
    val.parse()
        .map_err(|_| parse_err(line, format!("bad value for {key}: `{val}`")))
}

fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    r.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('#')
        }
        Err(_) => true,
    })
}

fn parse_pair(s: &str, line: usize) -> Result<(usize, usize)> {
    let mut it = s.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| parse_err(line, "expected two integers"))?
            .parse()
            .map_err(|_| parse_err(line, "expected two integers"))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    Ok((a, b))
}

pub fn write_text<W: Write>(d: &Digraph, mut w: W) -> Result<()> {
    writeln!(w, "digraph n={} m={}", d.n(), d.edge_count())?;
    for (u, v) in d.arcs() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn read_text<R: BufRead>(r: R) -> Result<Digraph> {
    let mut lines = content_lines(r);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("digraph") {
        return Err(parse_err(ln, "expected `digraph` header"));
    }
    let n = header_field(toks.next(), "n", ln)?;
    let m = header_field(toks.next(), "m", ln)?;
    let mut d = Digraph::empty(n);
    for (ln, l) in lines {
        let (u, v) = parse_pair(&l?, ln)?;
        if u >= n || v >= n {
            return Err(parse_err(ln, format!("arc ({u},{v}) out of range")));
        }
        if u == v {
            return Err(parse_err(ln, format!("self-loop at {u}")));
        }
        if !d.add_arc(u, v) {
            return Err(parse_err(ln, format!("duplicate arc ({u},{v})")));
        }
    }
    if d.edge_count() != m {
        return Err(parse_err(ln, format!("header says m={m} but {} arcs follow", d.edge_count())));
    }
    Ok(d)
}

pub fn write_binary<W: Write>(d: &Digraph, mut w: W) -> Result<()> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(d.n() as u64).to_le_bytes())?;
    for u in 0..d.n() {
        for word in d.out_row(u).words() {
            w.write_all(&word.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Digraph> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::InvalidInput("bad magic bytes".into()));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let n = usize::try_from(u64::from_le_bytes(buf))
        .map_err(|_| Error::InvalidInput("vertex count does not fit".into()))?;
    let wpr = words_for(n);
    let mut d = Digraph::empty(n);
    for u in 0..n {
        let mut words = Vec::with_capacity(wpr);
        for _ in 0..wpr {
            r.read_exact(&mut buf)?;
            words.push(u64::from_le_bytes(buf));
        }
        let row = BitSet::from_words(n, words);
        for v in row.iter() {
            if v == u {
                return Err(Error::InvalidInput(format!("self-loop at {u}")));
            }
            d.add_arc(u, v);
        }
    }
    Ok(d)
}

/// Reads either format, sniffing the magic bytes.
pub fn read_any<R: Read>(mut r: R) -> Result<Digraph> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.starts_with(BINARY_MAGIC) {
        read_binary(&bytes[..])
    } else {
        read_text(&bytes[..])
    }
}

pub fn write_bipartite_text<W: Write>(g: &BipartiteGraph, mut w: W) -> Result<()> {
    writeln!(
        w,
        "bipartite left={} right={} m={}",
        g.left_size(),
        g.right_size(),
        g.edge_count()
    )?;
    for (a, b) in g.edges() {
        writeln!(w, "{a} {b}")?;
    }
    Ok(())
}

pub fn read_bipartite_text<R: BufRead>(r: R) -> Result<BipartiteGraph> {
    let mut lines = content_lines(r);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("bipartite") {
        return Err(parse_err(ln, "expected `bipartite` header"));
    }
    let left = header_field(toks.next(), "left", ln)?;
    let right = header_field(toks.next(), "right", ln)?;
    let m = header_field(toks.next(), "m", ln)?;
    let mut g = BipartiteGraph::new(left, right);
    for (ln, l) in lines {
        let (a, b) = parse_pair(&l?, ln)?;
        if a >= left || b >= right {
            return Err(parse_err(ln, format!("edge ({a},{b}) out of range")));
        }
        if !g.add_edge(a, b) {
            return Err(parse_err(ln, format!("duplicate edge ({a},{b})")));
        }
    }
    if g.edge_count() != m {
        return Err(parse_err(ln, format!("header says m={m} but {} edges follow", g.edge_count())));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_bipartite, sample_dnp};

    #[test]
    fn text_roundtrip() {
        let d = sample_dnp(37, 0.2, 11).unwrap();
        let mut buf = Vec::new();
        write_text(&d, &mut buf).unwrap();
        assert_eq!(read_text(&buf[..]).unwrap(), d);
        assert_eq!(read_any(&buf[..]).unwrap(), d);
    }

    #[test]
    fn binary_roundtrip() {
        let d = sample_dnp(130, 0.1, 12).unwrap();
        let mut buf = Vec::new();
        write_binary(&d, &mut buf).unwrap();
        assert_eq!(buf.len(), 5 + 8 + 130 * 3 * 8);
        assert_eq!(read_binary(&buf[..]).unwrap(), d);
        assert_eq!(read_any(&buf[..]).unwrap(), d);
    }

    #[test]
    fn bipartite_roundtrip() {
        let g = sample_bipartite(7, 9, 0.4, 3).unwrap();
        let mut buf = Vec::new();
        write_bipartite_text(&g, &mut buf).unwrap();
        assert_eq!(read_bipartite_text(&buf[..]).unwrap(), g);
    }

    #[test]
    fn malformed_text() {
        assert!(matches!(
            read_text("digraph n=3 m=1\n0 0\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_text("digraph n=3 m=2\n0 1\n".as_bytes()).is_err());
        assert!(read_text("graph n=3 m=0\n".as_bytes()).is_err());
        assert!(read_text("digraph n=3 m=1\n0 x\n".as_bytes()).is_err());
    }
}
