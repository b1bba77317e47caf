//! Dense matrices over a [`ChainRing`].
//!
//! Entries live in one row-major buffer of `rows * cols * d` residues, `d`
//! the residue degree of the ring. Matrices are values: every operation
//! returns a new matrix.

use std::fmt;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::ring::{ChainRing, ChainRingElement, PolySpec};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingMatrix {
    ring: ChainRing,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl RingMatrix {
    pub fn zeros(ring: &ChainRing, rows: usize, cols: usize) -> Self {
        RingMatrix {
            ring: ring.clone(),
            rows,
            cols,
            data: vec![0; rows * cols * ring.degree()],
        }
    }

    pub fn identity(ring: &ChainRing, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.entry_mut(i, i)[0] = 1 % ring.m();
        }
        m
    }

    /// Matrix of integer constants, row-major.
    pub fn from_ints(ring: &ChainRing, rows: usize, cols: usize, values: &[i64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        let mut m = Self::zeros(ring, rows, cols);
        for (idx, &v) in values.iter().enumerate() {
            m.entry_mut(idx / cols, idx % cols)[0] = ring.reduce_int(v);
        }
        Ok(m)
    }

    pub fn from_elements(
        ring: &ChainRing,
        rows: usize,
        cols: usize,
        elements: &[ChainRingElement],
    ) -> Result<Self> {
        if elements.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                elements.len()
            )));
        }
        let mut m = Self::zeros(ring, rows, cols);
        for (idx, e) in elements.iter().enumerate() {
            if e.ring() != ring {
                return Err(Error::RingMismatch(format!("entry in {}, matrix over {ring}", e.ring())));
            }
            m.entry_mut(idx / cols, idx % cols).copy_from_slice(e.coords());
        }
        Ok(m)
    }

    /// Wraps a raw coordinate buffer; every residue must already be reduced.
    pub fn from_raw(ring: &ChainRing, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols * ring.degree() {
            return Err(Error::Shape("raw buffer length".into()));
        }
        if data.iter().any(|&c| c >= ring.m()) {
            return Err(Error::Shape("unreduced residue in raw buffer".into()));
        }
        Ok(RingMatrix {
            ring: ring.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Companion matrix of `P`: ones on the subdiagonal, last column `-a_i`.
    pub fn companion(ring: &ChainRing, poly: &PolySpec) -> Self {
        let d = poly.degree();
        let mut m = Self::zeros(ring, d, d);
        for i in 1..d {
            m.entry_mut(i, i - 1)[0] = 1 % ring.m();
        }
        for (i, &a) in poly.lower().iter().enumerate() {
            m.entry_mut(i, d - 1)[0] = ring.reduce_int(-a);
        }
        m
    }

    /// Block-diagonal matrix with the given square blocks.
    pub fn block_diagonal(ring: &ChainRing, blocks: &[RingMatrix]) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(ring, n, n);
        let mut offset = 0;
        for b in blocks {
            if !b.is_square() || &b.ring != ring {
                return Err(Error::Shape("blocks must be square over the same ring".into()));
            }
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.entry_mut(offset + i, offset + j).copy_from_slice(b.entry(i, j));
                }
            }
            offset += b.rows;
        }
        Ok(out)
    }

    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// The raw row-major coordinate buffer.
    pub fn raw(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> &[u64] {
        let d = self.ring.degree();
        let at = (i * self.cols + j) * d;
        &self.data[at..at + d]
    }

    #[inline]
    fn entry_mut(&mut self, i: usize, j: usize) -> &mut [u64] {
        let d = self.ring.degree();
        let at = (i * self.cols + j) * d;
        &mut self.data[at..at + d]
    }

    pub fn get(&self, i: usize, j: usize) -> ChainRingElement {
        self.ring.element_from_slice(self.entry(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, value: &ChainRingElement) -> Result<()> {
        if value.ring() != &self.ring {
            return Err(Error::RingMismatch("entry from another ring".into()));
        }
        self.entry_mut(i, j).copy_from_slice(value.coords());
        Ok(())
    }

    fn check_ring(&self, other: &RingMatrix) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!("{} vs {}", self.ring, other.ring)));
        }
        Ok(())
    }

    pub fn mul(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.check_ring(other)?;
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let d = self.ring.degree();
        let mut out = Self::zeros(&self.ring, self.rows, other.cols);
        let mut prod = vec![0; d];
        let mut acc = vec![0; d];
        for i in 0..self.rows {
            for j in 0..other.cols {
                acc.iter_mut().for_each(|c| *c = 0);
                for l in 0..self.cols {
                    self.ring.mul_into(self.entry(i, l), other.entry(l, j), &mut prod);
                    let prev = acc.clone();
                    self.ring.add_into(&prev, &prod, &mut acc);
                }
                out.entry_mut(i, j).copy_from_slice(&acc);
            }
        }
        Ok(out)
    }

    fn zip(&self, other: &RingMatrix, op: fn(&ChainRing, &[u64], &[u64], &mut [u64])) -> Result<RingMatrix> {
        self.check_ring(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape("operands differ in shape".into()));
        }
        let d = self.ring.degree();
        let mut out = Self::zeros(&self.ring, self.rows, self.cols);
        for ((a, b), o) in self
            .data
            .chunks(d)
            .zip(other.data.chunks(d))
            .zip(out.data.chunks_mut(d))
        {
            op(&self.ring, a, b, o);
        }
        Ok(out)
    }

    pub fn add(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.zip(other, ChainRing::add_into)
    }

    pub fn sub(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.zip(other, ChainRing::sub_into)
    }

    pub fn scale(&self, c: &ChainRingElement) -> Result<RingMatrix> {
        if c.ring() != &self.ring {
            return Err(Error::RingMismatch("scalar from another ring".into()));
        }
        let d = self.ring.degree();
        let mut out = self.clone();
        for (a, o) in self.data.chunks(d).zip(out.data.chunks_mut(d)) {
            self.ring.mul_into(c.coords(), a, o);
        }
        Ok(out)
    }

    pub fn transpose(&self) -> RingMatrix {
        let mut out = Self::zeros(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entry_mut(j, i).copy_from_slice(self.entry(i, j));
            }
        }
        out
    }

    /// `P(X)` by Horner's rule, coefficients embedded as constants.
    pub fn poly_eval(&self, poly: &PolySpec) -> Result<RingMatrix> {
        if !self.is_square() {
            return Err(Error::Shape("poly_eval needs a square matrix".into()));
        }
        let n = self.rows;
        let mut acc = RingMatrix::identity(&self.ring, n);
        for &a in poly.lower().iter().rev() {
            acc = acc.mul(self)?;
            for i in 0..n {
                let e = acc.entry_mut(i, i);
                let s = e[0] + self.ring.reduce_int(a);
                e[0] = s % self.ring.m();
            }
        }
        Ok(acc)
    }

    /// Entrywise image in the same ring with exponent `k' <= k`.
    pub fn reduce_mod(&self, k: u32) -> Result<RingMatrix> {
        if k > self.ring.k() {
            return Err(Error::Precision {
                from: self.ring.k(),
                to: k,
            });
        }
        let ring = self.ring.with_exponent(k)?;
        let m = ring.m();
        Ok(RingMatrix {
            ring,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&c| c % m).collect(),
        })
    }

    /// The lift to exponent `k >= k'` keeping every residue as is.
    pub fn lift_canonical(&self, k: u32) -> Result<RingMatrix> {
        if k < self.ring.k() {
            return Err(Error::Precision {
                from: self.ring.k(),
                to: k,
            });
        }
        Ok(RingMatrix {
            ring: self.ring.with_exponent(k)?,
            rows: self.rows,
            cols: self.cols,
            data: self.data.clone(),
        })
    }

    /// Rank of the reduction modulo `p` over the residue field, by Gaussian
    /// elimination.
    pub fn residue_rank(&self) -> usize {
        let field = self.ring.residue_field();
        let reduced = self.reduce_mod(1).expect("k >= 1");
        let d = field.degree();
        let (rows, cols) = (self.rows, self.cols);
        let mut a = reduced.data;
        let mut rank = 0;
        let mut inv = vec![0; d];
        let mut factor = vec![0; d];
        for col in 0..cols {
            let Some(pivot) = (rank..rows).find(|&r| a[(r * cols + col) * d..][..d].iter().any(|&c| c != 0)) else {
                continue;
            };
            for c in 0..cols * d {
                a.swap(pivot * cols * d + c, rank * cols * d + c);
            }
            field
                .inverse_into(&a[(rank * cols + col) * d..][..d], &mut inv)
                .expect("nonzero in a field");
            for r in 0..rows {
                if r == rank {
                    continue;
                }
                let lead = &a[(r * cols + col) * d..][..d];
                if lead.iter().all(|&c| c == 0) {
                    continue;
                }
                field.mul_into(lead, &inv, &mut factor);
                for c in col..cols {
                    let src = a[(rank * cols + c) * d..][..d].to_vec();
                    field.sub_mul_assign(&mut a[(r * cols + c) * d..][..d], &factor, &src);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Invertible over the chain ring iff invertible modulo `p`.
    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.residue_rank() == self.rows
    }

    /// Parses `"a,b;c,d"` (rows by `;`, entries by `,`) or a JSON array of
    /// arrays. Entries are integers or ring elements like `"1+2*t"`.
    pub fn parse(ring: &ChainRing, text: &str) -> Result<RingMatrix> {
        let text = text.trim();
        let rows: Vec<Vec<ChainRingElement>> = if text.starts_with('[') {
            let value: Value = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
            let rows = value.as_array().ok_or_else(|| Error::parse("expected array of rows"))?;
            rows.iter()
                .map(|row| {
                    row.as_array()
                        .ok_or_else(|| Error::parse("expected array row"))?
                        .iter()
                        .map(|v| match v {
                            Value::Number(n) => n
                                .as_i64()
                                .map(|x| ring.from_int(x))
                                .ok_or_else(|| Error::parse(format!("bad entry {n}"))),
                            Value::String(s) => ring.parse_element(s),
                            other => Err(Error::parse(format!("bad entry {other}"))),
                        })
                        .collect()
                })
                .collect::<Result<_>>()?
        } else {
            text.split(';')
                .map(|row| row.split(',').map(|e| ring.parse_element(e)).collect())
                .collect::<Result<_>>()?
        };
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 || rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::parse("ragged or empty matrix"));
        }
        let flat: Vec<ChainRingElement> = rows.into_iter().flatten().collect();
        RingMatrix::from_elements(ring, n_rows, n_cols, &flat)
    }

    /// Text form accepted by [`RingMatrix::parse`].
    pub fn to_text(&self) -> String {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn block_row_op(&self, part: &BlockPartition, op: &BlockOp) -> Result<RingMatrix> {
        part.check(self.rows)?;
        op.validate(self, part, Side::Row)?;
        let mut out = self.clone();
        match op {
            BlockOp::Swap(i, j) => {
                // Blocks are concatenated in the swapped order, so unequal
                // sizes work too (the result is then partitioned differently).
                let mut order: Vec<usize> = (0..part.sizes.len()).collect();
                order.swap(*i, *j);
                let mut row = 0;
                for b in order {
                    for src in part.range(b) {
                        for c in 0..self.cols {
                            out.entry_mut(row, c).copy_from_slice(self.entry(src, c));
                        }
                        row += 1;
                    }
                }
            }
            BlockOp::Scale(i, g) => {
                let block = self.row_block(part, *i);
                let new = g.mul(&block)?;
                out.write_rows(part.offset(*i), &new);
            }
            BlockOp::AddMultiple { target, source, factor } => {
                let add = factor.mul(&self.row_block(part, *source))?;
                let new = self.row_block(part, *target).add(&add)?;
                out.write_rows(part.offset(*target), &new);
            }
        }
        Ok(out)
    }

    /// Column operations: `Scale(i, g)` is `X^[i] g`, `AddMultiple` is
    /// `X^[target] += X^[source] A` with `A` of size `n_source x n_target`.
    pub fn block_col_op(&self, part: &BlockPartition, op: &BlockOp) -> Result<RingMatrix> {
        part.check(self.cols)?;
        op.validate(self, part, Side::Col)?;
        Ok(self.transpose().block_row_op(part, &op.transposed())?.transpose())
    }

    fn row_block(&self, part: &BlockPartition, i: usize) -> RingMatrix {
        let rows = part.sizes[i];
        let offset = part.offset(i);
        let d = self.ring.degree();
        let start = offset * self.cols * d;
        RingMatrix {
            ring: self.ring.clone(),
            rows,
            cols: self.cols,
            data: self.data[start..start + rows * self.cols * d].to_vec(),
        }
    }

    fn write_rows(&mut self, offset: usize, block: &RingMatrix) {
        let d = self.ring.degree();
        let start = offset * self.cols * d;
        self.data[start..start + block.data.len()].copy_from_slice(&block.data);
    }
}

impl fmt::Debug for RingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] over {}", self.to_text(), self.ring)
    }
}

/// Sizes `n_1, ..., n_s` of a block subdivision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    sizes: Vec<usize>,
}

impl BlockPartition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::Shape("block sizes must be positive".into()));
        }
        Ok(BlockPartition { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn offset(&self, i: usize) -> usize {
        self.sizes[..i].iter().sum()
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        let o = self.offset(i);
        o..o + self.sizes[i]
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.total() != n {
            return Err(Error::Shape(format!(
                "partition of {} applied to dimension {n}",
                self.total()
            )));
        }
        Ok(())
    }

    fn index(&self, i: usize) -> Result<()> {
        if i >= self.sizes.len() {
            return Err(Error::BlockIndex {
                index: i,
                len: self.sizes.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Row,
    Col,
}

/// An elementary block operation on a partitioned matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockOp {
    Swap(usize, usize),
    /// Multiply block `i` by `g`, an invertible `n_i x n_i` matrix.
    Scale(usize, RingMatrix),
    /// Rows: `X_[target] += A X_[source]`, `A` of size `n_target x n_source`.
    AddMultiple {
        target: usize,
        source: usize,
        factor: RingMatrix,
    },
}

impl BlockOp {
    fn validate(&self, x: &RingMatrix, part: &BlockPartition, side: Side) -> Result<()> {
        match self {
            BlockOp::Swap(i, j) => {
                part.index(*i)?;
                part.index(*j)?;
            }
            BlockOp::Scale(i, g) => {
                part.index(*i)?;
                if g.ring() != x.ring() {
                    return Err(Error::RingMismatch("block factor from another ring".into()));
                }
                if g.rows != part.sizes[*i] || g.cols != part.sizes[*i] {
                    return Err(Error::Shape("scaling block has the wrong size".into()));
                }
                if !g.is_invertible() {
                    return Err(Error::SingularBlock);
                }
            }
            BlockOp::AddMultiple { target, source, factor } => {
                part.index(*target)?;
                part.index(*source)?;
                if target == source {
                    return Err(Error::Shape("add_multiple needs distinct blocks".into()));
                }
                if factor.ring() != x.ring() {
                    return Err(Error::RingMismatch("block factor from another ring".into()));
                }
                let want = match side {
                    Side::Row => (part.sizes[*target], part.sizes[*source]),
                    Side::Col => (part.sizes[*source], part.sizes[*target]),
                };
                if (factor.rows, factor.cols) != want {
                    return Err(Error::Shape("add_multiple factor has the wrong size".into()));
                }
            }
        }
        Ok(())
    }

    /// The same operation with every matrix argument transposed.
    pub fn transposed(&self) -> BlockOp {
        match self {
            BlockOp::Swap(i, j) => BlockOp::Swap(*i, *j),
            BlockOp::Scale(i, g) => BlockOp::Scale(*i, g.transpose()),
            BlockOp::AddMultiple { target, source, factor } => BlockOp::AddMultiple {
                target: *target,
                source: *source,
                factor: factor.transpose(),
            },
        }
    }

    /// The invertible `E` with `E X = block_row_op(X)`.
    pub fn row_matrix(&self, ring: &ChainRing, part: &BlockPartition) -> Result<RingMatrix> {
        let n = part.total();
        let id = RingMatrix::identity(ring, n);
        id.block_row_op(part, self)
    }

    /// The invertible `F` with `X F = block_col_op(X)`.
    pub fn col_matrix(&self, ring: &ChainRing, part: &BlockPartition) -> Result<RingMatrix> {
        let n = part.total();
        let id = RingMatrix::identity(ring, n);
        id.block_col_op(part, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(p: u64, k: u32) -> ChainRing {
        ChainRing::integers(p, k).unwrap()
    }

    fn m(ring: &ChainRing, n: usize, v: &[i64]) -> RingMatrix {
        RingMatrix::from_ints(ring, n, n, v).unwrap()
    }

    #[test]
    fn nilpotent_two_mod_four() {
        let r = z(2, 2);
        let a = m(&r, 2, &[2, 0, 0, 2]);
        assert_eq!(a.mul(&a).unwrap(), RingMatrix::zeros(&r, 2, 2));
    }

    #[test]
    fn companion_satisfies_its_polynomial() {
        let f2 = z(2, 1);
        let poly = PolySpec::new(&[1, 1, 1], 2).unwrap();
        let c = RingMatrix::companion(&f2, &poly);
        let lhs = c.mul(&c).unwrap().add(&c).unwrap().add(&RingMatrix::identity(&f2, 2)).unwrap();
        assert_eq!(lhs, RingMatrix::zeros(&f2, 2, 2));
        assert_eq!(c.poly_eval(&poly).unwrap(), RingMatrix::zeros(&f2, 2, 2));
    }

    #[test]
    fn poly_eval_examples() {
        let r = z(2, 2);
        let x = m(&r, 2, &[0, 1, 1, 1]);
        let t = PolySpec::new(&[0, 1], 2).unwrap();
        assert_eq!(x.poly_eval(&t).unwrap(), x);
        let t_minus_1 = PolySpec::new(&[-1, 1], 2).unwrap();
        let id = RingMatrix::identity(&r, 2);
        assert_eq!(id.poly_eval(&t_minus_1).unwrap(), RingMatrix::zeros(&r, 2, 2));
        let p = PolySpec::new(&[1, 1, 1], 2).unwrap();
        assert_eq!(x.poly_eval(&p).unwrap(), m(&r, 2, &[2, 2, 2, 0]));
    }

    #[test]
    fn invertibility() {
        assert!(RingMatrix::identity(&z(2, 3), 3).is_invertible());
        assert!(!m(&z(2, 2), 2, &[2, 0, 0, 1]).is_invertible());
        assert!(m(&z(2, 2), 2, &[1, 2, 2, 1]).is_invertible());
    }

    #[test]
    fn reduce_and_lift() {
        let f2 = z(2, 1);
        for bits in 0..16i64 {
            let v: Vec<i64> = (0..4).map(|i| (bits >> i) & 1).collect();
            let x = m(&f2, 2, &v);
            assert_eq!(x.lift_canonical(3).unwrap().reduce_mod(1).unwrap(), x);
        }
        let one = m(&f2, 1, &[1]);
        assert_eq!(one.lift_canonical(3).unwrap(), m(&z(2, 3), 1, &[1]));
        assert!(one.reduce_mod(2).is_err());
    }

    #[test]
    fn text_formats() {
        let r = ChainRing::extension(&PolySpec::new(&[1, 1, 1], 2).unwrap(), 2).unwrap();
        let x = RingMatrix::parse(&r, "1+t,0;3*t,2").unwrap();
        assert_eq!(RingMatrix::parse(&r, &x.to_text()).unwrap(), x);
        let json = RingMatrix::parse(&r, r#"[["1+t", 0], ["3*t", 2]]"#).unwrap();
        assert_eq!(json, x);
        assert!(RingMatrix::parse(&r, "1,2;3").is_err());
    }

    #[test]
    fn block_swap_reduces_to_row_swap() {
        let r = z(2, 3);
        let x = m(&r, 2, &[1, 2, 3, 4]);
        let part = BlockPartition::new(vec![1, 1]).unwrap();
        assert_eq!(x.block_row_op(&part, &BlockOp::Swap(0, 1)).unwrap(), m(&r, 2, &[3, 4, 1, 2]));
        assert_eq!(x.block_col_op(&part, &BlockOp::Swap(0, 1)).unwrap(), m(&r, 2, &[2, 1, 4, 3]));
    }

    #[test]
    fn block_scale_is_left_multiplication_of_the_block() {
        let r = z(2, 2);
        let x = m(&r, 3, &[1, 2, 3, 0, 1, 2, 3, 3, 1]);
        let g = m(&r, 2, &[1, 1, 0, 1]);
        let part = BlockPartition::new(vec![2, 1]).unwrap();
        let out = x.block_row_op(&part, &BlockOp::Scale(0, g)).unwrap();
        assert_eq!(out, m(&r, 3, &[1, 3, 1, 0, 1, 2, 3, 3, 1]));
    }

    #[test]
    fn block_op_errors() {
        let r = z(2, 2);
        let x = RingMatrix::identity(&r, 3);
        let part = BlockPartition::new(vec![2, 1]).unwrap();
        let singular = m(&r, 2, &[2, 0, 0, 1]);
        assert_eq!(x.block_row_op(&part, &BlockOp::Scale(0, singular)), Err(Error::SingularBlock));
        assert!(matches!(
            x.block_row_op(&part, &BlockOp::Swap(0, 5)),
            Err(Error::BlockIndex { .. })
        ));
        let wrong = RingMatrix::zeros(&r, 2, 2);
        let op = BlockOp::AddMultiple { target: 0, source: 1, factor: wrong };
        assert!(matches!(x.block_row_op(&part, &op), Err(Error::Shape(_))));
        let bad_part = BlockPartition::new(vec![1, 1]).unwrap();
        assert!(x.block_row_op(&bad_part, &BlockOp::Swap(0, 1)).is_err());
    }
}
