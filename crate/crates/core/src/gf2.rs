//! Bit-packed linear algebra over GF(2): dense matrices, reduced row echelon
//! form with recorded row operations, solution-space queries, and left
//! kernels for cheap repeated consistency checks against varying right-hand
//! sides.

/// Packed bit vector helpers. Vectors are little-endian within words.
pub fn words_for(bits: usize) -> usize {
    (bits + 63) / 64
}

pub fn bit_get(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

pub fn bit_set(v: &mut [u64], i: usize, value: bool) {
    if value {
        v[i / 64] |= 1 << (i % 64);
    } else {
        v[i / 64] &= !(1 << (i % 64));
    }
}

pub fn bit_toggle(v: &mut [u64], i: usize) {
    v[i / 64] ^= 1 << (i % 64);
}

pub fn xor_into(dst: &mut [u64], src: &[u64]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Parity of the AND of two packed vectors.
pub fn dot(a: &[u64], b: &[u64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0u32;
    for (x, y) in a.iter().zip(b) {
        acc ^= (x & y).count_ones() & 1;
    }
    acc & 1 == 1
}

pub fn popcount(v: &[u64]) -> u32 {
    v.iter().map(|w| w.count_ones()).sum()
}

pub fn is_zero(v: &[u64]) -> bool {
    v.iter().all(|&w| w == 0)
}

/// Pack the first `nbits` of `v` msb-first into lowercase hex.
pub fn to_hex(v: &[u64], nbits: usize) -> String {
    let mut bytes = vec![0u8; (nbits + 7) / 8];
    for i in 0..nbits {
        if bit_get(v, i) {
            bytes[i / 8] |= 1 << (7 - i % 8);
        }
    }
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Inverse of [`to_hex`]; rejects wrong lengths and nonzero padding.
pub fn from_hex(s: &str, nbits: usize) -> Result<Vec<u64>, String> {
    let expect = (nbits + 7) / 8;
    if s.len() != expect * 2 {
        return Err(format!("hex length {} does not cover {nbits} bits", s.len()));
    }
    let mut out = vec![0u64; words_for(nbits).max(1)];
    for i in 0..expect {
        let b = u8::from_str_radix(&s[i * 2..i * 2 + 2], 16).map_err(|e| e.to_string())?;
        for k in 0..8 {
            if b >> (7 - k) & 1 == 1 {
                let bit = i * 8 + k;
                if bit >= nbits {
                    return Err("nonzero padding bits".into());
                }
                bit_set(&mut out, bit, true);
            }
        }
    }
    Ok(out)
}

/// Dense GF(2) matrix, one packed row after another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    pub rows: usize,
    pub cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = words_for(cols).max(1);
        Gf2Matrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        bit_get(self.row(r), c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        bit_set(self.row_mut(r), c, value);
    }

    pub fn toggle(&mut self, r: usize, c: usize) {
        bit_toggle(self.row_mut(r), c);
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (a, b) = (a.min(b), a.max(b));
        let (lo, hi) = self.data.split_at_mut(b * self.words);
        lo[a * self.words..(a + 1) * self.words].swap_with_slice(&mut hi[..self.words]);
    }

    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let (s, d) = (src.min(dst), src.max(dst));
        let (lo, hi) = self.data.split_at_mut(d * self.words);
        let src_slice = &lo[s * self.words..(s + 1) * self.words];
        let dst_slice = &mut hi[..self.words];
        if src < dst {
            for (x, y) in dst_slice.iter_mut().zip(src_slice) {
                *x ^= y;
            }
        } else {
            for (x, y) in lo[dst * self.words..(dst + 1) * self.words]
                .iter_mut()
                .zip(&hi[..self.words])
            {
                *x ^= y;
            }
        }
    }

    /// Matrix-vector product over GF(2); `x` is packed over `cols`.
    pub fn mul_vec(&self, x: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; words_for(self.rows).max(1)];
        for r in 0..self.rows {
            if dot(self.row(r), x) {
                bit_toggle(&mut out, r);
            }
        }
        out
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }
}

/// RREF of a matrix together with the row operations that produced it.
#[derive(Debug, Clone)]
pub struct Reduced {
    /// Reduced row echelon form of the input.
    pub rref: Gf2Matrix,
    /// Recorded row operations: `ops * input == rref`.
    pub ops: Gf2Matrix,
    /// `(row, col)` of each pivot, ascending in both coordinates.
    pub pivots: Vec<(usize, usize)>,
}

impl Reduced {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Rows of `ops` below the rank: a basis of the left kernel of the input.
    /// Each vector is packed over the input's rows.
    pub fn left_kernel(&self) -> Vec<Vec<u64>> {
        (self.rank()..self.rref.rows)
            .map(|r| self.ops.row(r).to_vec())
            .collect()
    }

    /// `rhs` is packed over the input's rows. Consistent iff every left
    /// kernel vector is orthogonal to it.
    pub fn consistent(&self, rhs: &[u64]) -> bool {
        (self.rank()..self.rref.rows).all(|r| !dot(self.ops.row(r), rhs))
    }

    /// A particular solution with all free variables zero, or None.
    pub fn particular_solution(&self, rhs: &[u64]) -> Option<Vec<u64>> {
        if !self.consistent(rhs) {
            return None;
        }
        let mut x = vec![0u64; words_for(self.rref.cols).max(1)];
        for &(row, col) in &self.pivots {
            if dot(self.ops.row(row), rhs) {
                bit_set(&mut x, col, true);
            }
        }
        Some(x)
    }

    /// Basis of the solution space of `input * x = 0`, one vector per free
    /// column, packed over the input's columns.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let cols = self.rref.cols;
        let mut is_pivot = vec![false; cols];
        for &(_, c) in &self.pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; words_for(cols).max(1)];
            bit_set(&mut v, free, true);
            for &(row, col) in &self.pivots {
                if self.rref.get(row, free) {
                    bit_set(&mut v, col, true);
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Gauss-Jordan elimination with an augmented identity to record row ops.
pub fn reduce(input: &Gf2Matrix) -> Reduced {
    let mut rref = input.clone();
    let mut ops = Gf2Matrix::identity(input.rows.max(1));
    if input.rows == 0 {
        return Reduced {
            rref,
            ops: Gf2Matrix::zeros(0, 0),
            pivots: Vec::new(),
        };
    }
    let mut pivots = Vec::new();
    let mut next_row = 0;
    for col in 0..input.cols {
        let Some(pivot) = (next_row..input.rows).find(|&r| rref.get(r, col)) else {
            continue;
        };
        rref.swap_rows(pivot, next_row);
        ops.swap_rows(pivot, next_row);
        for r in 0..input.rows {
            if r != next_row && rref.get(r, col) {
                rref.xor_row_into(next_row, r);
                ops.xor_row_into(next_row, r);
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
        if next_row == input.rows {
            break;
        }
    }
    Reduced { rref, ops, pivots }
}

/// A linear system `A x = b` over GF(2).
#[derive(Debug, Clone)]
pub struct Gf2System {
    pub a: Gf2Matrix,
    /// Right-hand side packed over rows.
    pub b: Vec<u64>,
}

impl Gf2System {
    pub fn new(rows: usize, cols: usize) -> Self {
        Gf2System {
            a: Gf2Matrix::zeros(rows, cols),
            b: vec![0u64; words_for(rows).max(1)],
        }
    }

    pub fn rows(&self) -> usize {
        self.a.rows
    }

    pub fn cols(&self) -> usize {
        self.a.cols
    }

    pub fn reduce(&self) -> Reduced {
        reduce(&self.a)
    }

    pub fn solve(&self) -> Option<Vec<u64>> {
        self.reduce().particular_solution(&self.b)
    }

    /// Check `A x = b` directly against the unreduced matrix.
    pub fn check_solution(&self, x: &[u64]) -> bool {
        (0..self.rows()).all(|r| dot(self.a.row(r), x) == bit_get(&self.b, r))
    }
}

/// Column-space basis of `a` in column echelon form. Each entry is
/// `(pattern, combo)`: `pattern` is a column-space vector packed over rows,
/// `combo` the set of original columns summing to it (packed over cols).
/// Patterns have strictly increasing leading row positions.
pub fn column_space_basis(a: &Gf2Matrix) -> Vec<(Vec<u64>, Vec<u64>)> {
    let t = a.transpose();
    let red = reduce(&t);
    let mut out = Vec::new();
    for &(row, _) in &red.pivots {
        out.push((red.rref.row(row).to_vec(), red.ops.row(row).to_vec()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Gf2Matrix {
        let mut m = Gf2Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, rng.gen_bool(0.4));
            }
        }
        m
    }

    #[test]
    fn reduce_is_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_matrix(&mut rng, 12, 17);
            let red = reduce(&m);
            let again = reduce(&red.rref);
            assert_eq!(again.rref, red.rref);
        }
    }

    #[test]
    fn ops_track_row_operations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 10, 13);
            let red = reduce(&m);
            // ops * m == rref, row by row.
            for r in 0..m.rows {
                for c in 0..m.cols {
                    let mut bit = false;
                    for k in 0..m.rows {
                        bit ^= red.ops.get(r, k) & m.get(k, c);
                    }
                    assert_eq!(bit, red.rref.get(r, c));
                }
            }
        }
    }

    #[test]
    fn solutions_satisfy_system() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut solved = 0;
        for _ in 0..100 {
            let mut sys = Gf2System::new(9, 12);
            sys.a = random_matrix(&mut rng, 9, 12);
            for r in 0..9 {
                bit_set(&mut sys.b, r, rng.gen_bool(0.5));
            }
            if let Some(x) = sys.solve() {
                assert!(sys.check_solution(&x));
                solved += 1;
            } else {
                // Verify inconsistency via a certificate: some left kernel
                // vector hits b oddly.
                let red = sys.reduce();
                assert!(red.left_kernel().iter().any(|u| dot(u, &sys.b)));
            }
        }
        assert!(solved > 10);
    }

    #[test]
    fn kernel_vectors_are_solutions_of_homogeneous_system() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 8, 14);
            let red = reduce(&m);
            let basis = red.kernel_basis();
            assert_eq!(basis.len(), 14 - red.rank());
            for v in &basis {
                assert!(is_zero(&m.mul_vec(v)));
            }
        }
    }

    #[test]
    fn column_space_staircase() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 10, 7);
            let basis = column_space_basis(&m);
            let mut last_lead = None;
            for (pattern, combo) in &basis {
                // Pattern really is the sum of the claimed original columns.
                let mut sum = vec![0u64; words_for(m.rows)];
                for c in 0..m.cols {
                    if bit_get(combo, c) {
                        for r in 0..m.rows {
                            if m.get(r, c) {
                                bit_toggle(&mut sum, r);
                            }
                        }
                    }
                }
                assert_eq!(&sum, pattern);
                let lead = (0..m.rows).find(|&r| bit_get(pattern, r)).unwrap();
                if let Some(prev) = last_lead {
                    assert!(lead > prev);
                }
                last_lead = Some(lead);
            }
        }
    }
}
