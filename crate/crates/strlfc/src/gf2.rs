//! Exact linear algebra over GF(2): packed bit vectors and an online rank
//! tracker that accepts generator columns one at a time and solves for the
//! message once the column space reaches full rank.

use crate::error::{Error, Result};
use serde::{Serialize, Serializer};
use std::fmt;

const WORD_BITS: usize = 64;

/// Fixed-length vector over GF(2); bits packed little-endian into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    /// All-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// Natural base vector with a single 1 at `index` (0-based).
    pub fn unit(len: usize, index: usize) -> Self {
        assert!(index < len, "unit index {index} out of range for length {len}");
        let mut v = Self::zeros(len);
        v.set_bit(index, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set_bit(i, b);
        }
        v
    }

    /// Wraps raw words, clearing any bits beyond `len`.
    pub(crate) fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        assert_eq!(words.len(), len.div_ceil(WORD_BITS));
        let tail = len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, index: usize) -> bool {
        assert!(index < self.len);
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    pub fn set_bit(&mut self, index: usize, value: bool) {
        assert!(index < self.len);
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// GF(2) inner product: parity of the AND of the two vectors.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Index of the highest set bit, if any.
    pub fn leading_bit(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(i * WORD_BITS + (WORD_BITS - 1 - w.leading_zeros() as usize));
            }
        }
        None
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.bit(i))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            write!(f, "{}", u8::from(b))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// One unerased reception: the time instant, the generator column the decoder
/// reconstructed from shared randomness, and the received bit.
#[derive(Clone, Debug)]
pub struct Reception {
    pub time: u64,
    pub column: BitVector,
    pub value: bool,
}

/// Outcome of inserting one generator column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Insertion {
    pub rank_increased: bool,
    pub new_rank: usize,
}

/// Online row-echelon state over received generator columns.
///
/// Columns arrive one per time instant; erased symbols arrive as the zero
/// column (equivalently they may be skipped — only the internal time counter
/// differs). Each accepted column is stored reduced against the current basis,
/// keyed by its leading bit, with the received value carried through the
/// elimination so that solving at full rank is a single back-substitution.
#[derive(Debug)]
pub struct RankTracker {
    dim: usize,
    basis: Vec<Option<(BitVector, bool)>>,
    receptions: Vec<Reception>,
    clock: u64,
    rank: usize,
}

impl RankTracker {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            dim,
            basis: vec![None; dim],
            receptions: Vec::new(),
            clock: 0,
            rank: 0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.dim
    }

    /// Unerased receptions in arrival order.
    pub fn receptions(&self) -> &[Reception] {
        &self.receptions
    }

    /// Feeds one received symbol. The zero column encodes an erasure and never
    /// changes the rank; its `value` is ignored.
    pub fn insert_column(&mut self, column: &BitVector, value: bool) -> Result<Insertion> {
        if column.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: column.len(),
            });
        }
        self.clock += 1;
        if column.is_zero() {
            return Ok(Insertion {
                rank_increased: false,
                new_rank: self.rank,
            });
        }
        self.receptions.push(Reception {
            time: self.clock,
            column: column.clone(),
            value,
        });

        let mut vec = column.clone();
        let mut rhs = value;
        while let Some(pivot) = vec.leading_bit() {
            match &self.basis[pivot] {
                Some((basis_vec, basis_rhs)) => {
                    vec.xor_assign(basis_vec);
                    rhs ^= basis_rhs;
                }
                None => {
                    self.basis[pivot] = Some((vec, rhs));
                    self.rank += 1;
                    return Ok(Insertion {
                        rank_increased: true,
                        new_rank: self.rank,
                    });
                }
            }
        }
        Ok(Insertion {
            rank_increased: false,
            new_rank: self.rank,
        })
    }

    /// Recovers the unique message consistent with every unerased reception.
    /// Requires full rank.
    pub fn solve_message(&self) -> Result<BitVector> {
        if self.rank < self.dim {
            return Err(Error::RankDeficient {
                rank: self.rank,
                dim: self.dim,
            });
        }
        let mut solution = BitVector::zeros(self.dim);
        // Basis vector at slot j has leading bit j; all its other set bits are
        // below j, so ascending order is back-substitution.
        for j in 0..self.dim {
            let (vec, rhs) = self.basis[j].as_ref().expect("full rank fills every slot");
            let mut below = vec.clone();
            below.set_bit(j, false);
            let bit = rhs ^ below.dot(&solution);
            solution.set_bit(j, bit);
        }
        Ok(solution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: rank by dense Gaussian elimination over bool rows.
    fn offline_rank(columns: &[Vec<bool>]) -> usize {
        let mut rows: Vec<Vec<bool>> = columns.to_vec();
        let width = rows.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..width {
            if let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) {
                rows.swap(rank, pivot);
                let pivot_row = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row[col] {
                        for (cell, &bit) in row.iter_mut().zip(&pivot_row) {
                            *cell ^= bit;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn tracker_moves_between_threads() {
        fn assert_send<T: Send>(_: &T) {}
        let t = RankTracker::new(4).unwrap();
        assert_send(&t);
        std::thread::spawn(move || t.rank()).join().unwrap();
    }

    #[test]
    fn new_tracker_starts_at_rank_zero() {
        for k in [1, 3, 64] {
            let t = RankTracker::new(k).unwrap();
            assert_eq!(t.rank(), 0);
            assert_eq!(t.dimension(), k);
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert_eq!(RankTracker::new(0).unwrap_err(), Error::ZeroDimension);
    }

    #[test]
    fn single_unit_column_gives_rank_one() {
        let mut t = RankTracker::new(3).unwrap();
        let r = t.insert_column(&BitVector::unit(3, 0), true).unwrap();
        assert!(r.rank_increased);
        assert_eq!(r.new_rank, 1);
    }

    #[test]
    fn duplicate_column_leaves_rank_unchanged() {
        let mut t = RankTracker::new(3).unwrap();
        let e1 = BitVector::unit(3, 0);
        t.insert_column(&e1, true).unwrap();
        let r = t.insert_column(&e1, true).unwrap();
        assert!(!r.rank_increased);
        assert_eq!(r.new_rank, 1);
    }

    #[test]
    fn dependent_third_column_stays_at_rank_two() {
        // e1, e2, e1^e2: the third column lies in the span of the first two.
        let mut t = RankTracker::new(3).unwrap();
        let e1 = BitVector::unit(3, 0);
        let e2 = BitVector::unit(3, 1);
        let mut sum = e1.clone();
        sum.xor_assign(&e2);
        t.insert_column(&e1, false).unwrap();
        t.insert_column(&e2, true).unwrap();
        let r = t.insert_column(&sum, true).unwrap();
        assert!(!r.rank_increased);
        assert_eq!(r.new_rank, 2);
        assert_eq!(
            offline_rank(&[
                e1.bits().collect(),
                e2.bits().collect(),
                sum.bits().collect()
            ]),
            2
        );
    }

    #[test]
    fn zero_column_never_increases_rank() {
        let mut t = RankTracker::new(4).unwrap();
        for _ in 0..10 {
            let r = t.insert_column(&BitVector::zeros(4), false).unwrap();
            assert!(!r.rank_increased);
        }
        assert_eq!(t.rank(), 0);
        assert!(t.receptions().is_empty());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut t = RankTracker::new(3).unwrap();
        let err = t.insert_column(&BitVector::zeros(4), false).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, got: 4 });
    }

    #[test]
    fn solve_with_identity_generator() {
        let mut t = RankTracker::new(2).unwrap();
        t.insert_column(&BitVector::unit(2, 0), true).unwrap();
        t.insert_column(&BitVector::unit(2, 1), false).unwrap();
        let b = t.solve_message().unwrap();
        assert_eq!(b, BitVector::from_bits(&[true, false]));
    }

    #[test]
    fn solve_with_combined_column() {
        // Receptions (e1, 1) and (e1^e2, 1) force b = (1, 0).
        let mut t = RankTracker::new(2).unwrap();
        let mut sum = BitVector::unit(2, 0);
        sum.xor_assign(&BitVector::unit(2, 1));
        t.insert_column(&BitVector::unit(2, 0), true).unwrap();
        t.insert_column(&sum, true).unwrap();
        let b = t.solve_message().unwrap();
        assert_eq!(b, BitVector::from_bits(&[true, false]));
    }

    #[test]
    fn solve_systematic_phase() {
        let msg = BitVector::from_bits(&[true, true, false]);
        let mut t = RankTracker::new(3).unwrap();
        for i in 0..3 {
            t.insert_column(&BitVector::unit(3, i), msg.bit(i)).unwrap();
        }
        assert_eq!(t.solve_message().unwrap(), msg);
    }

    #[test]
    fn solve_before_full_rank_reports_deficiency() {
        let mut t = RankTracker::new(2).unwrap();
        t.insert_column(&BitVector::unit(2, 0), true).unwrap();
        assert_eq!(
            t.solve_message().unwrap_err(),
            Error::RankDeficient { rank: 1, dim: 2 }
        );
    }

    proptest! {
        // Online rank equals offline full elimination over the same columns.
        #[test]
        fn rank_matches_offline_oracle(
            k in 1usize..=6,
            raw in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 6), 0..20),
        ) {
            let columns: Vec<Vec<bool>> = raw.into_iter().map(|c| c[..k].to_vec()).collect();
            let mut t = RankTracker::new(k).unwrap();
            for c in &columns {
                t.insert_column(&BitVector::from_bits(c), false).unwrap();
            }
            let nonzero: Vec<Vec<bool>> =
                columns.iter().filter(|c| c.iter().any(|&b| b)).cloned().collect();
            prop_assert_eq!(t.rank(), offline_rank(&nonzero));
        }

        // Any full-rank reception multiset recovers the exact message, and the
        // solution satisfies every logged reception.
        #[test]
        fn full_rank_receptions_round_trip(
            k in 1usize..=10,
            msg_bits in proptest::collection::vec(any::<bool>(), 10),
            extra in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 10), 0..8),
            seed in any::<u64>(),
        ) {
            let msg = BitVector::from_bits(&msg_bits[..k]);
            let mut t = RankTracker::new(k).unwrap();
            // Shuffle unit columns deterministically, interleaved with extras.
            let mut order: Vec<usize> = (0..k).collect();
            let mut state = seed;
            for i in (1..k).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                order.swap(i, (state >> 33) as usize % (i + 1));
            }
            for (j, &i) in order.iter().enumerate() {
                if let Some(raw) = extra.get(j) {
                    let col = BitVector::from_bits(&raw[..k]);
                    let y = col.dot(&msg);
                    t.insert_column(&col, y).unwrap();
                }
                t.insert_column(&BitVector::unit(k, i), msg.bit(i)).unwrap();
            }
            prop_assert!(t.is_full_rank());
            let solved = t.solve_message().unwrap();
            prop_assert_eq!(&solved, &msg);
            for r in t.receptions() {
                prop_assert_eq!(r.column.dot(&solved), r.value);
            }
        }

        // Rank is invariant to insertion order of a fixed column multiset.
        #[test]
        fn rank_order_invariant(
            k in 1usize..=6,
            raw in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 6), 1..12),
        ) {
            let columns: Vec<Vec<bool>> = raw.into_iter().map(|c| c[..k].to_vec()).collect();
            let mut forward = RankTracker::new(k).unwrap();
            let mut backward = RankTracker::new(k).unwrap();
            for c in &columns {
                forward.insert_column(&BitVector::from_bits(c), false).unwrap();
            }
            for c in columns.iter().rev() {
                backward.insert_column(&BitVector::from_bits(c), false).unwrap();
            }
            prop_assert_eq!(forward.rank(), backward.rank());
        }
    }
}
