//! `kind[:n_t[,n_k[,n_j]]]` preconditioner specs.

use std::fmt;
use std::str::FromStr;

use gs2_core::{Error, PrecondKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecondSpec {
    pub kind: PrecondKind,
    pub n_t: usize,
    pub n_k: usize,
    pub n_j: usize,
}

impl FromStr for PrecondSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (kind, counts) = match s.split_once(':') {
            Some((k, c)) => (k, Some(c)),
            None => (s, None),
        };
        let kind: PrecondKind = kind.trim().parse()?;
        let mut n = [1usize, 1, 1];
        if let Some(counts) = counts {
            let parts: Vec<&str> = counts.split(',').collect();
            if parts.len() > 3 {
                return Err(Error::Config(format!("`{s}`: at most three counts n_t,n_k,n_j")));
            }
            for (slot, p) in n.iter_mut().zip(&parts) {
                *slot = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("`{s}`: bad count `{p}`")))?;
            }
        }
        Ok(Self {
            kind,
            n_t: n[0],
            n_k: n[1],
            n_j: n[2],
        })
    }
}

impl fmt::Display for PrecondSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{},{},{}", self.kind, self.n_t, self.n_k, self.n_j)
    }
}
