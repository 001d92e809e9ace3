use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::Operator;
use crate::error::{Error, Result};

/// Largest register the dense representation is allowed to allocate (2^10 = 1024).
pub const MAX_SITES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> DMatrix<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            Pauli::I => [one, z, z, one],
            Pauli::X => [z, one, one, z],
            Pauli::Y => [z, -i, i, z],
            Pauli::Z => [one, z, z, -one],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" => Ok(Pauli::I),
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            _ => Err(Error::invalid(format!("unknown Pauli `{s}`"))),
        }
    }
}

/// A chain of spin-1/2 sites. Inputs are injected at `input_site`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinRegister {
    n_sites: usize,
    input_site: usize,
}

impl SpinRegister {
    pub fn new(n_sites: usize) -> Result<Self> {
        Self::with_input_site(n_sites, 1)
    }

    pub fn with_input_site(n_sites: usize, input_site: usize) -> Result<Self> {
        check_sites(n_sites)?;
        if input_site == 0 || input_site > n_sites {
            return Err(Error::invalid(format!(
                "input site {input_site} outside 1..={n_sites}"
            )));
        }
        Ok(Self {
            n_sites,
            input_site,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn input_site(&self) -> usize {
        self.input_site
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(Error::invalid(format!(
            "n_sites must be in 1..={MAX_SITES}, got {n_sites}"
        )));
    }
    Ok(())
}

/// `I ⊗ … ⊗ σ ⊗ … ⊗ I` with `σ` at `site` (1-based, site 1 = leftmost factor).
pub fn pauli_on_site(kind: Pauli, site: usize, n_sites: usize) -> Result<Operator> {
    pauli_string(&[(kind, site)], n_sites)
}

/// Tensor product of single-site Paulis; sites not listed carry the identity.
pub fn pauli_string(factors: &[(Pauli, usize)], n_sites: usize) -> Result<Operator> {
    check_sites(n_sites)?;
    let mut per_site = vec![Pauli::I; n_sites];
    let mut label = String::new();
    for &(kind, site) in factors {
        if site == 0 || site > n_sites {
            return Err(Error::invalid(format!("site {site} outside 1..={n_sites}")));
        }
        if per_site[site - 1] != Pauli::I {
            return Err(Error::invalid(format!("site {site} listed twice")));
        }
        per_site[site - 1] = kind;
        label.push_str(&format!("{kind}_{site}"));
    }
    if label.is_empty() {
        label.push('I');
    }
    let matrix = per_site
        .iter()
        .fold(DMatrix::identity(1, 1), |acc: DMatrix<Complex64>, p| {
            acc.kronecker(&p.matrix())
        });
    Ok(Operator::from_parts(label, matrix, true))
}

/// Parses labels such as `Z_1`, `Z_1Z_2`, `X_1 Y_3` into a Pauli string.
pub fn parse_pauli_label(label: &str, n_sites: usize) -> Result<Operator> {
    let mut factors = Vec::new();
    let chars: Vec<char> = label.chars().filter(|c| !c.is_whitespace()).collect();
    let mut i = 0;
    while i < chars.len() {
        let kind: Pauli = chars[i].to_string().parse()?;
        i += 1;
        if i < chars.len() && chars[i] == '_' {
            i += 1;
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(Error::invalid(format!("missing site index in `{label}`")));
        }
        let site: usize = chars[start..i].iter().collect::<String>().parse().unwrap();
        factors.push((kind, site));
    }
    if factors.is_empty() {
        return Err(Error::invalid("empty Pauli label"));
    }
    pauli_string(&factors, n_sites)
}
