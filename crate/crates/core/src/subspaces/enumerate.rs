//! Enumeration of G(n,m) and A(n,m).
//!
//! Subspaces come out pivot pattern by pivot pattern (patterns in
//! lexicographic order), and within a pattern the free RREF entries run
//! through F_p lexicographically, row-major.

use std::sync::Arc;

use num_bigint::BigUint;

use super::{gaussian_binomial, AffinePlane, Subspace};
use crate::error::{invalid, Error, Result};
use crate::field::{AmbientSpace, Residue};

/// Default cap on the number of subspaces or planes one enumeration may yield.
pub const DEFAULT_SUBSPACE_BUDGET: u64 = 10_000_000;

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn pivot_patterns(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        // rightmost position that can still move
        let Some(i) = (0..m).rev().find(|&i| cur[i] < n - m + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..m {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn check_budget(what: &'static str, required: &BigUint, budget: u64) -> Result<()> {
    if *required > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            what,
            required: required.to_string(),
            budget,
        });
    }
    Ok(())
}

pub fn grassmannian(space: AmbientSpace, m: usize) -> Result<Grassmannian> {
    grassmannian_with_budget(space, m, DEFAULT_SUBSPACE_BUDGET)
}

pub fn grassmannian_with_budget(space: AmbientSpace, m: usize, budget: u64) -> Result<Grassmannian> {
    if m > space.n() {
        return Err(invalid(format!("subspace dimension {m} exceeds {}", space.n())));
    }
    let total = gaussian_binomial(space.n(), m, space.p())?;
    check_budget("Grassmannian", total.value(), budget)?;
    let mut patterns = pivot_patterns(space.n(), m);
    patterns.reverse();
    let mut g = Grassmannian {
        space,
        m,
        total: total.to_u64().expect("within budget"),
        patterns,
        current: None,
    };
    g.advance_pattern();
    Ok(g)
}

struct PatternState {
    pivots: Vec<usize>,
    /// (row, column) of every free entry.
    free: Vec<(usize, usize)>,
    digits: Vec<Residue>,
    exhausted: bool,
}

/// Stream of every `m`-dimensional subspace, each exactly once.
pub struct Grassmannian {
    space: AmbientSpace,
    m: usize,
    total: u64,
    /// Remaining patterns, last one next.
    patterns: Vec<Vec<usize>>,
    current: Option<PatternState>,
}

impl Grassmannian {
    /// `{n choose m}_p`, the number of items the stream yields in total.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    fn advance_pattern(&mut self) {
        self.current = self.patterns.pop().map(|pivots| {
            let n = self.space.n();
            let mut free = Vec::new();
            for (row, &piv) in pivots.iter().enumerate() {
                for col in piv + 1..n {
                    if !pivots.contains(&col) {
                        free.push((row, col));
                    }
                }
            }
            PatternState {
                digits: vec![0; free.len()],
                pivots,
                free,
                exhausted: false,
            }
        });
    }
}

impl Iterator for Grassmannian {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        loop {
            let state = self.current.as_mut()?;
            if state.exhausted {
                self.advance_pattern();
                continue;
            }
            let n = self.space.n();
            let mut basis = vec![0; self.m * n];
            for (row, &piv) in state.pivots.iter().enumerate() {
                basis[row * n + piv] = 1;
            }
            for (&(row, col), &d) in state.free.iter().zip(&state.digits) {
                basis[row * n + col] = d;
            }
            let out = Subspace::from_rref_unchecked(self.space, basis, state.pivots.clone());

            // lexicographic increment, last digit fastest
            let p = self.space.p() as Residue;
            let mut i = state.digits.len();
            loop {
                if i == 0 {
                    state.exhausted = true;
                    break;
                }
                i -= 1;
                state.digits[i] += 1;
                if state.digits[i] < p {
                    break;
                }
                state.digits[i] = 0;
            }
            return Some(out);
        }
    }
}

pub fn affine_planes(space: AmbientSpace, m: usize) -> Result<AffinePlanes> {
    affine_planes_with_budget(space, m, DEFAULT_SUBSPACE_BUDGET)
}

/// Every `m`-dimensional plane: `p^{n-m} {n choose m}_p` of them.
pub fn affine_planes_with_budget(space: AmbientSpace, m: usize, budget: u64) -> Result<AffinePlanes> {
    if m > space.n() {
        return Err(invalid(format!("plane dimension {m} exceeds {}", space.n())));
    }
    let g = gaussian_binomial(space.n(), m, space.p())?;
    let total = g.value() * BigUint::from(space.pow(space.n() - m));
    check_budget("affine planes", &total, budget)?;
    Ok(AffinePlanes {
        directions: grassmannian_with_budget(space, m, u64::MAX)?,
        current: None,
        total: u64::try_from(&total).expect("within budget"),
    })
}

struct DirectionState {
    direction: Arc<Subspace>,
    free_cols: Vec<usize>,
    next: u64,
    count: u64,
}

pub struct AffinePlanes {
    directions: Grassmannian,
    current: Option<DirectionState>,
    total: u64,
}

impl AffinePlanes {
    pub fn total(&self) -> u64 {
        self.total
    }
}

impl Iterator for AffinePlanes {
    type Item = AffinePlane;

    fn next(&mut self) -> Option<AffinePlane> {
        loop {
            if let Some(state) = self.current.as_mut() {
                if state.next < state.count {
                    let space = state.direction.space();
                    let p = space.p();
                    let mut rep = vec![0; space.n()];
                    let mut k = state.next;
                    for &col in &state.free_cols {
                        rep[col] = (k % p) as Residue;
                        k /= p;
                    }
                    state.next += 1;
                    return Some(AffinePlane::from_parts(Arc::clone(&state.direction), rep));
                }
            }
            let w = self.directions.next()?;
            let free_cols: Vec<usize> = (0..w.space().n()).filter(|c| !w.pivots().contains(c)).collect();
            let count = w.space().pow(free_cols.len());
            self.current = Some(DirectionState {
                direction: Arc::new(w),
                free_cols,
                next: 0,
                count,
            });
        }
    }
}
