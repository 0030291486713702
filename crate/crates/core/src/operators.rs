//! Constructors for the operator families of the generalized cluster chain.
//!
//! All site arguments here are 1-based physical site labels, matching the
//! text form of [`PauliString`]. A string between period indices `j < k`
//! touches the sites `α·j … α·k` (plus an optional rigid `offset`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        }
    }
}

/// Operator families. `offset` translates the whole operator to the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `X_i Z_{i+1} … Z_{i+α-1} X_{i+α}`.
    Cluster { site: usize },
    /// `G_r = ∏ Z` over sites `≡ r (mod α)`, `r ∈ 1..=α`.
    Symmetry { residue: usize },
    /// `∏_{i=j+1}^{k} Z_{α i}`.
    StringTrivial { j: usize, k: usize, offset: usize },
    /// `X_{α j} (∏_{i=j+1}^{k} Z_{α i-α+1} … Z_{α i-1}) X_{α k}`.
    StringSpt { j: usize, k: usize, offset: usize },
    /// `X_i (Y X)^{(α-1)/2}` on `α` sites starting at `i`; odd `α` only.
    LocalM { site: usize },
}

impl OperatorKind {
    pub fn string_trivial(j: usize, k: usize) -> Self {
        OperatorKind::StringTrivial { j, k, offset: 0 }
    }

    pub fn string_spt(j: usize, k: usize) -> Self {
        OperatorKind::StringSpt { j, k, offset: 0 }
    }
}

/// Places letters at 1-based sites, wrapping or rejecting out-of-range sites.
struct Placer {
    n: usize,
    boundary: Boundary,
    out: PauliString,
}

impl Placer {
    fn new(n: usize, boundary: Boundary) -> Self {
        Self { n, boundary, out: PauliString::identity(n) }
    }

    fn put(&mut self, site: usize, letter: Letter) -> Result<()> {
        let q = match self.boundary {
            Boundary::Open => {
                if site == 0 || site > self.n {
                    return Err(Error::InvalidOperator(format!(
                        "site {site} outside 1..={} (open boundary)",
                        self.n
                    )));
                }
                site - 1
            }
            Boundary::Periodic => (site + self.n - 1) % self.n,
        };
        if self.out.letter(q) != Letter::I {
            return Err(Error::InvalidOperator(format!("site {} used twice (chain too short)", q + 1)));
        }
        self.out.set_letter(q, letter);
        Ok(())
    }
}

/// Builds the requested operator on an `n`-site chain.
pub fn build_operator(kind: OperatorKind, alpha: usize, n: usize, boundary: Boundary) -> Result<PauliString> {
    if alpha == 0 {
        return Err(Error::InvalidOperator("alpha must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidOperator("empty chain".into()));
    }
    let mut pl = Placer::new(n, boundary);
    match kind {
        OperatorKind::Cluster { site } => {
            if site == 0 {
                return Err(Error::InvalidOperator("sites are 1-based".into()));
            }
            pl.put(site, Letter::X)?;
            for s in site + 1..site + alpha {
                pl.put(s, Letter::Z)?;
            }
            pl.put(site + alpha, Letter::X)?;
        }
        OperatorKind::Symmetry { residue } => {
            if residue == 0 || residue > alpha {
                return Err(Error::InvalidOperator(format!("residue {residue} outside 1..={alpha}")));
            }
            for s in (residue..=n).step_by(alpha) {
                pl.put(s, Letter::Z)?;
            }
        }
        OperatorKind::StringTrivial { j, k, offset } => {
            check_window(j, k)?;
            for i in j + 1..=k {
                pl.put(alpha * i + offset, Letter::Z)?;
            }
        }
        OperatorKind::StringSpt { j, k, offset } => {
            check_window(j, k)?;
            if j == 0 {
                return Err(Error::InvalidOperator("string endpoint α·j must be a site (j ≥ 1)".into()));
            }
            pl.put(alpha * j + offset, Letter::X)?;
            for i in j + 1..=k {
                for s in alpha * i - alpha + 1..alpha * i {
                    pl.put(s + offset, Letter::Z)?;
                }
            }
            pl.put(alpha * k + offset, Letter::X)?;
        }
        OperatorKind::LocalM { site } => {
            if alpha.is_multiple_of(2) {
                return Err(Error::InvalidOperator(format!("local order parameter needs odd alpha, got {alpha}")));
            }
            if site == 0 {
                return Err(Error::InvalidOperator("sites are 1-based".into()));
            }
            for t in 0..alpha {
                let letter = if t % 2 == 0 { Letter::X } else { Letter::Y };
                pl.put(site + t, letter)?;
            }
        }
    }
    Ok(pl.out)
}

fn check_window(j: usize, k: usize) -> Result<()> {
    if k <= j {
        return Err(Error::InvalidOperator(format!("string needs k > j, got j={j}, k={k}")));
    }
    Ok(())
}

/// Convenience wrapper for open-chain cluster operators.
pub fn cluster(alpha: usize, site: usize, n: usize) -> Result<PauliString> {
    build_operator(OperatorKind::Cluster { site }, alpha, n, Boundary::Open)
}

/// All `α` protecting symmetries `G_1 … G_α`.
pub fn symmetries(alpha: usize, n: usize) -> Result<Vec<PauliString>> {
    (1..=alpha)
        .map(|residue| build_operator(OperatorKind::Symmetry { residue }, alpha, n, Boundary::Open))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str, n: usize) -> PauliString {
        PauliString::parse(s, n).unwrap()
    }

    #[test]
    fn xzx_cluster_operator() {
        assert_eq!(cluster(2, 1, 5).unwrap(), parse("X1 Z2 X3", 5));
        assert_eq!(cluster(1, 4, 5).unwrap(), parse("X4 X5", 5));
        assert_eq!(cluster(3, 2, 5).unwrap(), parse("X2 Z3 Z4 X5", 5));
    }

    #[test]
    fn local_order_parameter_xzzx() {
        let m = build_operator(OperatorKind::LocalM { site: 1 }, 3, 5, Boundary::Open).unwrap();
        assert_eq!(m, parse("X1 Y2 X3", 5));
        let m1 = build_operator(OperatorKind::LocalM { site: 2 }, 1, 5, Boundary::Open).unwrap();
        assert_eq!(m1, parse("X2", 5));
        assert!(build_operator(OperatorKind::LocalM { site: 1 }, 2, 5, Boundary::Open).is_err());
    }

    #[test]
    fn spt_string_alpha_two() {
        let s = build_operator(OperatorKind::string_spt(1, 3), 2, 6, Boundary::Open).unwrap();
        assert_eq!(s, parse("X2 Z3 Z5 X6", 6));
    }

    #[test]
    fn trivial_string_and_symmetry() {
        let s = build_operator(OperatorKind::string_trivial(1, 3), 2, 6, Boundary::Open).unwrap();
        assert_eq!(s, parse("Z4 Z6", 6));
        let g1 = build_operator(OperatorKind::Symmetry { residue: 1 }, 2, 8, Boundary::Open).unwrap();
        assert_eq!(g1.support(), vec![0, 2, 4, 6]);
    }

    #[test]
    fn out_of_range_and_bad_windows() {
        assert!(cluster(2, 4, 5).is_err());
        assert!(build_operator(OperatorKind::string_spt(3, 3), 2, 8, Boundary::Open).is_err());
        assert!(build_operator(OperatorKind::string_trivial(3, 1), 2, 8, Boundary::Open).is_err());
        assert!(build_operator(OperatorKind::Symmetry { residue: 3 }, 2, 8, Boundary::Open).is_err());
    }

    #[test]
    fn periodic_cluster_wraps() {
        let g = build_operator(OperatorKind::Cluster { site: 5 }, 2, 6, Boundary::Periodic).unwrap();
        assert_eq!(g, parse("X1 X5 Z6", 6));
    }

    #[test]
    fn symmetries_commute_with_cluster_operators() {
        for alpha in 1..=4 {
            let n = 4 * alpha + 3;
            let gs = symmetries(alpha, n).unwrap();
            for site in 1..=n - alpha {
                let c = cluster(alpha, site, n).unwrap();
                for g in &gs {
                    assert!(g.commutes(&c).unwrap());
                }
            }
        }
    }
}
