//! Walsh-Hadamard codebook and its partition into per-user orthogonal subsets.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// An `L_c x L_c` Hadamard matrix with `±1` chips stored row-major.
///
/// Rows are the Walsh spreading codes. Chips are kept as integers so that
/// orthogonality can be checked exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshCodebook {
    length: usize,
    chips: Vec<i8>,
}

impl WalshCodebook {
    /// Chips per code, which is also the number of codes.
    pub fn length(&self) -> usize {
        self.length
    }

    /// The chips of code `index`.
    ///
    /// Panics if `index >= self.length()`.
    pub fn row(&self, index: usize) -> &[i8] {
        &self.chips[index * self.length..(index + 1) * self.length]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[i8]> + '_ {
        self.chips.chunks_exact(self.length)
    }

    /// Exact integer inner product of two rows.
    pub fn dot(&self, i: usize, k: usize) -> i64 {
        self.row(i)
            .iter()
            .zip(self.row(k))
            .map(|(&a, &b)| i64::from(a) * i64::from(b))
            .sum()
    }
}

/// Builds the Sylvester Hadamard matrix `H_2n = [[H_n, H_n], [H_n, -H_n]]`.
pub fn generate_hadamard(length: usize) -> Result<WalshCodebook> {
    if length < 2 || !length.is_power_of_two() {
        return Err(Error::CodeLength(length));
    }
    let mut chips = vec![0i8; length * length];
    chips[0] = 1;
    let mut order = 1;
    while order < length {
        for r in 0..order {
            for c in 0..order {
                let v = chips[r * length + c];
                chips[r * length + c + order] = v;
                chips[(r + order) * length + c] = v;
                chips[(r + order) * length + c + order] = -v;
            }
        }
        order *= 2;
    }
    Ok(WalshCodebook { length, chips })
}

/// Disjoint assignment of codebook rows to users.
///
/// User `k` (0-based) owns rows `k*N_c .. (k+1)*N_c`; position `n` in its list
/// is the code selected by the `m`-bit index label `n`. Rows beyond
/// `N_u*N_c` stay unused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeGrouping {
    num_users: usize,
    codes_per_user: usize,
    assignment: Vec<Vec<usize>>,
}

impl CodeGrouping {
    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn codes_per_user(&self) -> usize {
        self.codes_per_user
    }

    /// Codebook row indices owned by `user`, ordered by index label.
    pub fn rows(&self, user: usize) -> &[usize] {
        &self.assignment[user]
    }

    pub fn assignment(&self) -> &[Vec<usize>] {
        &self.assignment
    }

    /// Binds `user`'s rows to the codebook they index into.
    pub fn subset<'a>(&'a self, codebook: &'a WalshCodebook, user: usize) -> CodeSubset<'a> {
        CodeSubset {
            codebook,
            rows: &self.assignment[user],
        }
    }
}

/// Partitions `codebook` into contiguous blocks of `codes_per_user` rows.
pub fn group_codebook(codebook: &WalshCodebook, num_users: usize, codes_per_user: usize) -> Result<CodeGrouping> {
    if num_users == 0 {
        return Err(Error::InvalidParameter("number of users must be positive"));
    }
    if codes_per_user == 0 || !codes_per_user.is_power_of_two() {
        return Err(Error::InvalidParameter(
            "codes per user must be a positive power of two",
        ));
    }
    let capacity_exceeded = num_users
        .checked_mul(codes_per_user)
        .is_none_or(|needed| needed > codebook.length());
    if capacity_exceeded {
        return Err(Error::Capacity {
            num_users,
            codes_per_user,
            code_length: codebook.length(),
        });
    }
    let assignment = (0..num_users)
        .map(|k| (k * codes_per_user..(k + 1) * codes_per_user).collect())
        .collect();
    Ok(CodeGrouping {
        num_users,
        codes_per_user,
        assignment,
    })
}

/// One user's ordered code set `S_k`, borrowed from a codebook.
#[derive(Debug, Clone, Copy)]
pub struct CodeSubset<'a> {
    codebook: &'a WalshCodebook,
    rows: &'a [usize],
}

impl<'a> CodeSubset<'a> {
    /// Builds a subset from explicit rows, e.g. for a single-user link.
    pub fn new(codebook: &'a WalshCodebook, rows: &'a [usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= codebook.length()) {
            return Err(Error::IndexRange {
                index: bad,
                codes: codebook.length(),
            });
        }
        Ok(Self { codebook, rows })
    }

    /// Number of codes `N_c`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn code_length(&self) -> usize {
        self.codebook.length()
    }

    /// Chips of the code selected by index label `n`.
    pub fn code(&self, n: usize) -> &'a [i8] {
        self.codebook.row(self.rows[n])
    }

    pub fn codes(&self) -> impl ExactSizeIterator<Item = &'a [i8]> + '_ {
        self.rows.iter().map(|&r| self.codebook.row(r))
    }
}
