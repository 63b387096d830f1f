//! Linear algebra over F2 and quadratic phase functions.
//!
//! Vectors are bit-packed into machine words. Throughout the crate the
//! "lexicographic" order on bit vectors reads index 0 first, with 0 < 1; it
//! coincides with numeric order when bit 0 is taken as the most significant
//! digit, which is also how [`F2Vector::to_hex`] packs bits.
//!
//! A quadratic phase is a function x -> i^{l(x)} (-1)^{Q(x)} on F2^m with l
//! linear and Q quadratic; these are exactly the amplitude phase functions of
//! stabilizer states in affine-support form.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::fmt;

const WORD_BITS: usize = 64;

/// i^t for t mod 4.
pub(crate) const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Bit vector over F2, packed little-endian into u64 words (bit j lives at
/// word j/64, position j%64).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Vector {
    len: usize,
    words: Vec<u64>,
}

impl F2Vector {
    pub fn zeros(len: usize) -> Self {
        F2Vector {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn unit(len: usize, idx: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(idx, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Bits taken from the low `len` positions of `x`, index 0 = bit 0 of `x`.
    pub fn from_u64(len: usize, x: u64) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len == 64 { !0u64 } else { (1u64 << len) - 1 };
            if !v.words.is_empty() {
                v.words[0] = x & mask;
            }
        }
        v
    }

    /// Inverse of [`from_u64`]; requires len <= 64.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        debug_assert!(idx < self.len);
        (self.words[idx / WORD_BITS] >> (idx % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, idx: usize, bit: bool) {
        debug_assert!(idx < self.len);
        let w = &mut self.words[idx / WORD_BITS];
        if bit {
            *w |= 1u64 << (idx % WORD_BITS);
        } else {
            *w &= !(1u64 << (idx % WORD_BITS));
        }
    }

    pub fn flip(&mut self, idx: usize) {
        let b = self.get(idx);
        self.set(idx, !b);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &F2Vector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &F2Vector) -> F2Vector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product mod 2.
    #[inline]
    pub fn dot(&self, other: &F2Vector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the first set bit, scanning from index 0.
    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                let idx = wi * WORD_BITS + w.trailing_zeros() as usize;
                if idx < self.len {
                    return Some(idx);
                }
            }
        }
        None
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of positions set in both vectors.
    pub fn count_ones_masked(&self, mask: &F2Vector) -> usize {
        debug_assert_eq!(self.len, mask.len());
        self.words
            .iter()
            .zip(&mask.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    /// Copy padded with zeros up to `new_len`.
    pub fn extended(&self, new_len: usize) -> F2Vector {
        assert!(new_len >= self.len);
        let mut out = F2Vector::zeros(new_len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        out
    }

    /// Copy with position `idx` deleted; later bits shift down by one.
    pub fn remove_bit(&self, idx: usize) -> F2Vector {
        assert!(idx < self.len);
        let mut out = F2Vector::zeros(self.len - 1);
        for i in 0..self.len {
            match i.cmp(&idx) {
                std::cmp::Ordering::Less => out.set(i, self.get(i)),
                std::cmp::Ordering::Equal => {}
                std::cmp::Ordering::Greater => out.set(i - 1, self.get(i)),
            }
        }
        out
    }

    /// Hex encoding, bit 0 as the most significant bit of the first digit.
    pub fn to_hex(&self) -> String {
        if self.len == 0 {
            return "-".to_string();
        }
        let digits = self.len.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in 0..digits {
            let mut nibble = 0u8;
            for k in 0..4 {
                let idx = d * 4 + k;
                if idx < self.len && self.get(idx) {
                    nibble |= 8 >> k;
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(len: usize, s: &str) -> Result<F2Vector> {
        if len == 0 {
            if s == "-" || s.is_empty() {
                return Ok(F2Vector::zeros(0));
            }
            return Err(Error::Parse(format!("expected empty vector, got {s:?}")));
        }
        let digits = len.div_ceil(4);
        if s.len() != digits {
            return Err(Error::Parse(format!(
                "hex field {s:?} has {} digits, expected {digits}",
                s.len()
            )));
        }
        let mut v = F2Vector::zeros(len);
        for (d, ch) in s.chars().enumerate() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex digit {ch:?}")))?
                as u8;
            for k in 0..4 {
                let idx = d * 4 + k;
                let bit = nibble & (8 >> k) != 0;
                if idx < len {
                    v.set(idx, bit);
                } else if bit {
                    return Err(Error::Parse(format!("stray bit beyond length in {s:?}")));
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { 1 } else { 0 })?;
        }
        Ok(())
    }
}

impl PartialOrd for F2Vector {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for F2Vector {
    /// Lexicographic order reading index 0 first, 0 < 1.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words) {
            let d = a ^ b;
            if d != 0 {
                let bit = d.trailing_zeros();
                return if (a >> bit) & 1 == 0 {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                };
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// Dense bit matrix, stored by rows.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<F2Vector>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        F2Matrix {
            rows,
            cols,
            data: vec![F2Vector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i].set(i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<F2Vector>, cols: usize) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row of length {} in a {cols}-column matrix",
                    r.len()
                )));
            }
        }
        Ok(F2Matrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &F2Vector {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.data[i].set(j, b);
    }

    pub fn mul_vec(&self, x: &F2Vector) -> Result<F2Vector> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matrix has {} columns, vector has length {}",
                self.cols,
                x.len()
            )));
        }
        let mut out = F2Vector::zeros(self.rows);
        for i in 0..self.rows {
            out.set(i, self.data[i].dot(x));
        }
        Ok(out)
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut t = F2Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.data.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    pub fn is_strictly_upper(&self) -> bool {
        for i in 0..self.rows {
            for j in 0..=i.min(self.cols.saturating_sub(1)) {
                if j < self.cols && self.get(i, j) {
                    return false;
                }
            }
        }
        true
    }
}

/// Row reduce `rows` in place to reduced row echelon form, dropping zero rows.
/// Returns the pivot column of each surviving row, in increasing order.
pub(crate) fn rref_in_place(rows: &mut Vec<F2Vector>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    pivots
}

/// Solve A x = b over F2.
///
/// Returns one particular solution (free variables set to zero) if the system
/// is consistent, together with a basis of the kernel of A.
pub fn solve(a: &F2Matrix, b: &F2Vector) -> Result<(Option<F2Vector>, Vec<F2Vector>)> {
    if b.len() != a.rows {
        return Err(Error::Dimension(format!(
            "matrix has {} rows, right-hand side has length {}",
            a.rows,
            b.len()
        )));
    }
    let n = a.cols;
    // Augmented rows: [row | b_i] in n+1 columns.
    let mut rows: Vec<F2Vector> = (0..a.rows)
        .map(|i| {
            let mut r = F2Vector::zeros(n + 1);
            for j in 0..n {
                if a.get(i, j) {
                    r.set(j, true);
                }
            }
            r.set(n, b.get(i));
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let inconsistent = rows[rank.min(rows.len())..].iter().any(|r| r.get(n));
    let solution = if inconsistent {
        None
    } else {
        let mut x = F2Vector::zeros(n);
        for (r, &col) in pivots.iter().enumerate() {
            x.set(col, rows[r].get(n));
        }
        Some(x)
    };
    // Kernel basis: one vector per free column.
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut kernel = Vec::new();
    for free in 0..n {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut k = F2Vector::zeros(n);
        k.set(free, true);
        for (r, &col) in pivots.iter().enumerate() {
            if rows[r].get(free) {
                k.set(col, true);
            }
        }
        kernel.push(k);
    }
    Ok((solution, kernel))
}

/// Affine subspace {sum_i y_i b_i + offset} of F2^n; the basis is kept
/// linearly independent.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AffineSubspace {
    ambient: usize,
    basis: Vec<F2Vector>,
    offset: F2Vector,
}

impl AffineSubspace {
    pub fn new(ambient: usize, basis: Vec<F2Vector>, offset: F2Vector) -> Result<Self> {
        if offset.len() != ambient {
            return Err(Error::Dimension(format!(
                "offset length {} in ambient dimension {ambient}",
                offset.len()
            )));
        }
        for b in &basis {
            if b.len() != ambient {
                return Err(Error::Dimension(format!(
                    "basis vector length {} in ambient dimension {ambient}",
                    b.len()
                )));
            }
        }
        let m = F2Matrix::from_rows(basis.clone(), ambient)?;
        if m.rank() != basis.len() {
            return Err(Error::Argument(
                "basis vectors are linearly dependent".into(),
            ));
        }
        Ok(AffineSubspace {
            ambient,
            basis,
            offset,
        })
    }

    pub fn full(n: usize) -> Self {
        AffineSubspace {
            ambient: n,
            basis: (0..n).map(|i| F2Vector::unit(n, i)).collect(),
            offset: F2Vector::zeros(n),
        }
    }

    pub fn point(v: F2Vector) -> Self {
        AffineSubspace {
            ambient: v.len(),
            basis: Vec::new(),
            offset: v,
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn size(&self) -> u64 {
        1u64 << self.dim()
    }

    pub fn basis(&self) -> &[F2Vector] {
        &self.basis
    }

    pub fn offset(&self) -> &F2Vector {
        &self.offset
    }

    /// RREF basis ordered by pivot, offset cleared at the pivot columns.
    /// Canonical representatives are unique per subspace.
    pub fn canonicalize(&mut self) {
        let pivots = rref_in_place(&mut self.basis, self.ambient);
        for (row, &p) in pivots.iter().enumerate() {
            if self.offset.get(p) {
                let b = self.basis[row].clone();
                self.offset.xor_assign(&b);
            }
        }
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// Coordinates y with sum_i y_i b_i = x + offset, if x lies in the space.
    pub fn coords(&self, x: &F2Vector) -> Option<F2Vector> {
        if x.len() != self.ambient {
            return None;
        }
        let cols = F2Matrix::from_rows(self.basis.clone(), self.ambient)
            .unwrap()
            .transpose();
        let rhs = x.xor(&self.offset);
        let (sol, _) = solve(&cols, &rhs).unwrap();
        sol
    }

    pub fn contains(&self, x: &F2Vector) -> bool {
        self.coords(x).is_some()
    }

    /// The member reached from coordinates y.
    pub fn member(&self, y: &F2Vector) -> F2Vector {
        debug_assert_eq!(y.len(), self.basis.len());
        let mut x = self.offset.clone();
        for i in y.ones() {
            x.xor_assign(&self.basis[i]);
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = F2Vector> + '_ {
        let m = self.dim();
        (0..1u64 << m).map(move |bits| self.member(&F2Vector::from_u64(m, bits)))
    }

    /// Intersection as an affine subspace, or None when disjoint.
    pub fn intersect(&self, other: &AffineSubspace) -> Option<AffineSubspace> {
        assert_eq!(self.ambient, other.ambient);
        let m1 = self.basis.len();
        let m2 = other.basis.len();
        // Solve B1 y1 + B2 y2 = v1 + v2 where columns are basis vectors.
        let mut a = F2Matrix::zeros(self.ambient, m1 + m2);
        for (j, b) in self.basis.iter().enumerate() {
            for i in b.ones() {
                a.set(i, j, true);
            }
        }
        for (j, b) in other.basis.iter().enumerate() {
            for i in b.ones() {
                a.set(i, m1 + j, true);
            }
        }
        let rhs = self.offset.xor(&other.offset);
        let (sol, kernel) = solve(&a, &rhs).unwrap();
        let sol = sol?;
        let mut offset = self.offset.clone();
        for j in 0..m1 {
            if sol.get(j) {
                offset.xor_assign(&self.basis[j]);
            }
        }
        let mut dirs: Vec<F2Vector> = kernel
            .iter()
            .map(|k| {
                let mut d = F2Vector::zeros(self.ambient);
                for j in 0..m1 {
                    if k.get(j) {
                        d.xor_assign(&self.basis[j]);
                    }
                }
                d
            })
            .collect();
        rref_in_place(&mut dirs, self.ambient);
        Some(
            AffineSubspace::new(self.ambient, dirs, offset)
                .expect("reduced directions are independent")
                .canonical(),
        )
    }

    /// Is every point of `self` a point of `other`?
    pub fn is_subset_of(&self, other: &AffineSubspace) -> bool {
        if !other.contains(&self.offset) {
            return false;
        }
        let dir_cols = F2Matrix::from_rows(other.basis.clone(), self.ambient)
            .unwrap()
            .transpose();
        self.basis.iter().all(|b| {
            let (sol, _) = solve(&dir_cols, b).unwrap();
            sol.is_some()
        })
    }
}

/// Lexicographically smallest nonzero vector of the span of `gens`,
/// or None for the zero space. With RREF rows this is the row whose pivot
/// comes last.
fn lex_min_nonzero(mut gens: Vec<F2Vector>, ambient: usize) -> Option<F2Vector> {
    rref_in_place(&mut gens, ambient);
    gens.pop()
}

/// Affine subspace of F2^n on which every listed indicator 1_{A_i} is
/// constant, with dim at least n - (number of subspaces).
///
/// Recursion: keep U when the indicator is already constant on it (U inside
/// A_i, or U disjoint from A_i); otherwise replace U by the lexicographically
/// smallest codimension-1 affine subspace of U avoiding A_i.
pub fn common_constant_subspace(n: usize, subspaces: &[AffineSubspace]) -> Result<AffineSubspace> {
    let mut u = AffineSubspace::full(n);
    for a in subspaces {
        if a.ambient() != n {
            return Err(Error::Dimension(format!(
                "subspace in ambient dimension {}, expected {n}",
                a.ambient()
            )));
        }
        if u.is_subset_of(a) {
            continue;
        }
        let m = u.dim();
        let w = u.intersect(a);
        if w.is_none() {
            // Indicator is identically zero on U already.
            continue;
        }
        let w = w.unwrap();
        // Express W inside U's coordinates.
        let w0 = u.coords(w.offset()).expect("intersection offset lies in U");
        let dirs: Vec<F2Vector> = w
            .basis()
            .iter()
            .map(|d| {
                let mut p = w.offset().clone();
                p.xor_assign(d);
                let c = u.coords(&p).expect("direction endpoint lies in U");
                c.xor(&w0)
            })
            .collect();
        // Functionals vanishing on W's direction space.
        let dmat = F2Matrix::from_rows(dirs, m)?;
        let (_, functionals) = solve(&dmat, &F2Vector::zeros(dmat.rows()))?;
        let a_vec = lex_min_nonzero(functionals, m)
            .expect("W is a proper subspace of U, so a functional exists");
        let c = !a_vec.dot(&w0);
        // New U: points of U whose coordinates satisfy <a_vec, y> = c.
        let amat = F2Matrix::from_rows(vec![a_vec], m)?;
        let mut rhs = F2Vector::zeros(1);
        rhs.set(0, c);
        let (part, kernel) = solve(&amat, &rhs)?;
        let part = part.expect("single nonzero equation is consistent");
        let offset = u.member(&part);
        let basis: Vec<F2Vector> = kernel
            .iter()
            .map(|k| {
                let mut d = F2Vector::zeros(n);
                for i in k.ones() {
                    d.xor_assign(&u.basis()[i]);
                }
                d
            })
            .collect();
        u = AffineSubspace::new(n, basis, offset)?.canonical();
    }
    Ok(u.canonical())
}

/// Quadratic phase function on F2^m: x -> i^{ell.x} (-1)^{x'Qx + lin.x}
/// with Q strictly upper triangular.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadraticPhase {
    dim: usize,
    quad: F2Matrix,
    lin: F2Vector,
    ell: F2Vector,
}

impl QuadraticPhase {
    pub fn new(quad: F2Matrix, lin: F2Vector, ell: F2Vector) -> Result<Self> {
        let dim = lin.len();
        if quad.rows() != dim || quad.cols() != dim || ell.len() != dim {
            return Err(Error::Dimension(format!(
                "phase parts disagree: quad {}x{}, lin {}, ell {}",
                quad.rows(),
                quad.cols(),
                dim,
                ell.len()
            )));
        }
        if !quad.is_strictly_upper() {
            return Err(Error::Argument(
                "quadratic part must be strictly upper triangular".into(),
            ));
        }
        Ok(QuadraticPhase {
            dim,
            quad,
            lin,
            ell,
        })
    }

    pub fn trivial(dim: usize) -> Self {
        QuadraticPhase {
            dim,
            quad: F2Matrix::zeros(dim, dim),
            lin: F2Vector::zeros(dim),
            ell: F2Vector::zeros(dim),
        }
    }

    pub fn random<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let mut quad = F2Matrix::zeros(dim, dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                quad.set(i, j, rng.gen());
            }
        }
        let lin = F2Vector::from_bits(&(0..dim).map(|_| rng.gen()).collect::<Vec<_>>());
        let ell = F2Vector::from_bits(&(0..dim).map(|_| rng.gen()).collect::<Vec<_>>());
        QuadraticPhase {
            dim,
            quad,
            lin,
            ell,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn quad(&self) -> &F2Matrix {
        &self.quad
    }

    pub fn lin(&self) -> &F2Vector {
        &self.lin
    }

    pub fn ell(&self) -> &F2Vector {
        &self.ell
    }

    /// Value of x'Qx mod 2.
    pub fn quad_eval(&self, x: &F2Vector) -> bool {
        let mut acc = false;
        for i in x.ones() {
            acc ^= self.quad.row(i).dot(x);
        }
        acc
    }

    /// Exponent t with value i^t, t mod 4.
    pub fn exponent(&self, x: &F2Vector) -> Result<u8> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "point length {} for a phase on F2^{}",
                x.len(),
                self.dim
            )));
        }
        let l = self.ell.dot(x) as u8;
        let q = (self.quad_eval(x) ^ self.lin.dot(x)) as u8;
        Ok((l + 2 * q) % 4)
    }

    /// i^{ell.x} (-1)^{Q(x)+lin.x}, one of {1, i, -1, -i}.
    pub fn eval(&self, x: &F2Vector) -> Result<Complex64> {
        Ok(I_POW[self.exponent(x)? as usize])
    }

    /// Bilinear form B(x, y) = x'(Q + Q')y mod 2 of the quadratic part.
    pub fn bilinear(&self, x: &F2Vector, y: &F2Vector) -> bool {
        let mut acc = false;
        for i in x.ones() {
            acc ^= self.quad.row(i).dot(y);
        }
        for i in y.ones() {
            acc ^= self.quad.row(i).dot(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_solutions(a: &F2Matrix, b: &F2Vector) -> Vec<F2Vector> {
        let n = a.cols();
        (0..1u64 << n)
            .map(|bits| F2Vector::from_u64(n, bits))
            .filter(|x| a.mul_vec(x).unwrap() == *b)
            .collect()
    }

    #[test]
    fn vector_basics() {
        let mut v = F2Vector::zeros(70);
        v.set(0, true);
        v.set(69, true);
        assert!(v.get(0) && v.get(69) && !v.get(35));
        assert_eq!(v.count_ones(), 2);
        assert_eq!(v.first_one(), Some(0));
        let w = F2Vector::unit(70, 69);
        assert!(v.dot(&w));
        let x = v.xor(&w);
        assert_eq!(x.first_one(), Some(0));
        assert_eq!(x.count_ones(), 1);
    }

    #[test]
    fn lex_order_reads_index_zero_first() {
        let a = F2Vector::from_bits(&[false, true, true]);
        let b = F2Vector::from_bits(&[true, false, false]);
        assert!(a < b);
        let c = F2Vector::from_bits(&[false, true, false]);
        assert!(c < a);
    }

    #[test]
    fn hex_round_trip() {
        let v = F2Vector::from_bits(&[true, false, true, true, false, true]);
        let h = v.to_hex();
        assert_eq!(h, "b4");
        assert_eq!(F2Vector::from_hex(6, &h).unwrap(), v);
        assert_eq!(F2Vector::from_hex(0, "-").unwrap(), F2Vector::zeros(0));
    }

    #[test]
    fn solve_identity_system() {
        let a = F2Matrix::identity(3);
        let b = F2Vector::from_bits(&[true, false, true]);
        let (sol, kernel) = solve(&a, &b).unwrap();
        assert_eq!(sol.unwrap(), b);
        assert!(kernel.is_empty());
    }

    #[test]
    fn solve_inconsistent_system() {
        // Rows x1+x2 = 0 and x1+x2 = 1.
        let mut a = F2Matrix::zeros(2, 2);
        a.set(0, 0, true);
        a.set(0, 1, true);
        a.set(1, 0, true);
        a.set(1, 1, true);
        let b = F2Vector::from_bits(&[false, true]);
        let (sol, kernel) = solve(&a, &b).unwrap();
        assert!(sol.is_none());
        assert_eq!(kernel.len(), 1);
    }

    #[test]
    fn solve_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(1..=4);
            let mut a = F2Matrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    a.set(i, j, rng.gen());
                }
            }
            let b = F2Vector::from_bits(&(0..rows).map(|_| rng.gen()).collect::<Vec<_>>());
            let (sol, kernel) = solve(&a, &b).unwrap();
            let brute = brute_solutions(&a, &b);
            match sol {
                None => assert!(brute.is_empty()),
                Some(x) => {
                    assert_eq!(a.mul_vec(&x).unwrap(), b);
                    // Solution count is 2^dim(kernel).
                    assert_eq!(brute.len(), 1usize << kernel.len());
                    for k in &kernel {
                        assert!(a.mul_vec(k).unwrap().is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn affine_membership_and_points() {
        let basis = vec![F2Vector::from_bits(&[true, true, false])];
        let offset = F2Vector::from_bits(&[false, false, true]);
        let a = AffineSubspace::new(3, basis, offset).unwrap();
        assert_eq!(a.dim(), 1);
        let pts: Vec<_> = a.points().collect();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            assert!(a.contains(p));
        }
        assert!(!a.contains(&F2Vector::zeros(3)));
    }

    #[test]
    fn affine_intersection_cases() {
        let full = AffineSubspace::full(3);
        let pt = AffineSubspace::point(F2Vector::from_bits(&[true, false, true]));
        let i = full.intersect(&pt).unwrap();
        assert_eq!(i.dim(), 0);
        assert_eq!(i.offset(), pt.offset());

        // Two parallel hyperplanes are disjoint.
        let h0 = AffineSubspace::new(
            2,
            vec![F2Vector::from_bits(&[true, true])],
            F2Vector::zeros(2),
        )
        .unwrap();
        let h1 = AffineSubspace::new(
            2,
            vec![F2Vector::from_bits(&[true, true])],
            F2Vector::from_bits(&[true, false]),
        )
        .unwrap();
        assert!(h0.intersect(&h1).is_none());
        assert!(h0.intersect(&h0).unwrap() == h0.clone().canonical());
    }

    #[test]
    fn canonical_form_is_unique() {
        // Same plane presented with two different bases and offsets.
        let a = AffineSubspace::new(
            3,
            vec![
                F2Vector::from_bits(&[true, true, false]),
                F2Vector::from_bits(&[false, false, true]),
            ],
            F2Vector::from_bits(&[false, true, true]),
        )
        .unwrap()
        .canonical();
        let b = AffineSubspace::new(
            3,
            vec![
                F2Vector::from_bits(&[true, true, true]),
                F2Vector::from_bits(&[true, true, false]),
            ],
            F2Vector::from_bits(&[true, false, false]),
        )
        .unwrap()
        .canonical();
        assert_eq!(a, b);
    }

    fn random_affine<R: Rng>(n: usize, rng: &mut R) -> AffineSubspace {
        let target = rng.gen_range(0..=n);
        let mut basis: Vec<F2Vector> = Vec::new();
        while basis.len() < target {
            let c = F2Vector::from_bits(&(0..n).map(|_| rng.gen()).collect::<Vec<_>>());
            let mut trial = basis.clone();
            trial.push(c.clone());
            if F2Matrix::from_rows(trial, n).unwrap().rank() == basis.len() + 1 {
                basis.push(c);
            }
        }
        let offset = F2Vector::from_bits(&(0..n).map(|_| rng.gen()).collect::<Vec<_>>());
        AffineSubspace::new(n, basis, offset).unwrap()
    }

    #[test]
    fn common_constant_subspace_trivial_cases() {
        let u = common_constant_subspace(4, &[]).unwrap();
        assert_eq!(u.dim(), 4);
        let u = common_constant_subspace(3, &[AffineSubspace::full(3)]).unwrap();
        assert_eq!(u.dim(), 3);
    }

    #[test]
    fn common_constant_subspace_two_random_in_f2_3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let subs = vec![random_affine(3, &mut rng), random_affine(3, &mut rng)];
            let u = common_constant_subspace(3, &subs).unwrap();
            assert!(u.dim() >= 1, "dim {} with two subspaces", u.dim());
            for a in &subs {
                let vals: Vec<bool> = u.points().map(|p| a.contains(&p)).collect();
                assert!(vals.iter().all(|&v| v == vals[0]));
            }
        }
    }

    #[test]
    fn common_constant_subspace_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(0..=4usize);
            let subs: Vec<AffineSubspace> = (0..m).map(|_| random_affine(n, &mut rng)).collect();
            let u = common_constant_subspace(n, &subs).unwrap();
            assert!(
                u.dim() + m >= n,
                "dim {} after {} subspaces in n={}",
                u.dim(),
                m,
                n
            );
            for a in &subs {
                let vals: Vec<bool> = u.points().map(|p| a.contains(&p)).collect();
                assert!(vals.iter().all(|&v| v == vals[0]), "indicator not constant");
            }
        }
    }

    /// Sum over monomials, the independent oracle for phase evaluation.
    fn eval_phase_by_monomials(p: &QuadraticPhase, x: &F2Vector) -> Complex64 {
        let mut t: u32 = 0;
        for i in 0..p.dim() {
            if p.ell().get(i) && x.get(i) {
                t += 1;
            }
        }
        let mut q: u32 = 0;
        for i in 0..p.dim() {
            if p.lin().get(i) && x.get(i) {
                q += 1;
            }
            for j in (i + 1)..p.dim() {
                if p.quad().get(i, j) && x.get(i) && x.get(j) {
                    q += 1;
                }
            }
        }
        // ell exponents add mod 2 before lifting to i.
        I_POW[((t % 2) + 2 * (q % 2)) as usize]
    }

    #[test]
    fn phase_eval_example() {
        // Q = x1 x2, ell = x1 (0-indexed: Q_{01}, ell_0), at x = (1,1): -i.
        let mut quad = F2Matrix::zeros(2, 2);
        quad.set(0, 1, true);
        let p = QuadraticPhase::new(
            quad,
            F2Vector::zeros(2),
            F2Vector::from_bits(&[true, false]),
        )
        .unwrap();
        let v = p.eval(&F2Vector::from_bits(&[true, true])).unwrap();
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_eval_matches_monomial_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let dim = rng.gen_range(0..=4);
            let p = QuadraticPhase::random(dim, &mut rng);
            for bits in 0..1u64 << dim {
                let x = F2Vector::from_u64(dim, bits);
                let got = p.eval(&x).unwrap();
                let want = eval_phase_by_monomials(&p, &x);
                assert!((got - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn phase_polarization_identity() {
        // eval(x+y) = eval(x) eval(y) (-1)^{B(x,y) + ell(x) ell(y)}.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let dim = rng.gen_range(0..=4);
            let p = QuadraticPhase::random(dim, &mut rng);
            for xb in 0..1u64 << dim {
                for yb in 0..1u64 << dim {
                    let x = F2Vector::from_u64(dim, xb);
                    let y = F2Vector::from_u64(dim, yb);
                    let lhs = p.eval(&x.xor(&y)).unwrap();
                    let sign = if p.bilinear(&x, &y) ^ (p.ell().dot(&x) && p.ell().dot(&y)) {
                        -1.0
                    } else {
                        1.0
                    };
                    let rhs = p.eval(&x).unwrap() * p.eval(&y).unwrap() * sign;
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn prop_solve_consistency(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = rng.gen_range(1..=5);
            let cols = rng.gen_range(1..=5);
            let mut a = F2Matrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    a.set(i, j, rng.gen());
                }
            }
            // Build b from a known solution so the system is consistent.
            let x0 = F2Vector::from_bits(&(0..cols).map(|_| rng.gen()).collect::<Vec<_>>());
            let b = a.mul_vec(&x0).unwrap();
            let (sol, kernel) = solve(&a, &b).unwrap();
            let x = sol.expect("consistent by construction");
            prop_assert_eq!(a.mul_vec(&x).unwrap(), b);
            for k in &kernel {
                prop_assert!(a.mul_vec(k).unwrap().is_zero());
            }
            // x0 - x must lie in the kernel span.
            let diff = x.xor(&x0);
            let mut gens = kernel.clone();
            let r_before = F2Matrix::from_rows(gens.clone(), cols).unwrap().rank();
            gens.push(diff);
            let r_after = F2Matrix::from_rows(gens, cols).unwrap().rank();
            prop_assert_eq!(r_before, r_after);
        }
    }
}
