//! Index bijections used to lay bilateral (ℤ-indexed) structures onto
//! ℕ-indexed orthonormal bases.

use serde::{Deserialize, Serialize};

/// Canonical interleave ℤ → ℕ: position 0 sits at basis index 0, positive
/// positions at odd indices and negative positions at even indices, so the
/// basis reads `(…, e_2, e_0, e_1, e_3, …)` in position order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilateralArrangement;

impl BilateralArrangement {
    pub fn to_basis(self, position: i64) -> i64 {
        match position {
            0 => 0,
            p if p > 0 => 2 * p - 1,
            p => -2 * p,
        }
    }

    /// Inverse map; `None` for negative basis indices.
    pub fn to_position(self, index: i64) -> Option<i64> {
        match index {
            i if i < 0 => None,
            0 => Some(0),
            i if i % 2 == 1 => Some((i + 1) / 2),
            i => Some(-i / 2),
        }
    }
}

/// Where a basis vector lands in the split ℋ₁ ⊕ ℋ₂ layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    /// Bilateral position inside ℋ₁ (the weighted-shift part).
    Shift(i64),
    /// 1-based index inside ℋ₂ (the diagonal part).
    Diagonal(i64),
}

/// Split layout of a 0-based basis `f_0, f_1, …` (1-based labels `f_{k+1}`).
///
/// 1-based label `4p+1` carries shift position `p ≥ 0`, even labels `2q` carry
/// position `-q`, and labels `4m-1` form the diagonal block ℋ₂ with index `m ≥ 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitArrangement;

impl SplitArrangement {
    pub fn slot(self, index: i64) -> Option<Slot> {
        if index < 0 {
            return None;
        }
        Some(match index % 4 {
            0 => Slot::Shift(index / 4),
            2 => Slot::Diagonal((index + 2) / 4),
            _ => Slot::Shift(-(index + 1) / 2),
        })
    }

    pub fn index(self, slot: Slot) -> Option<i64> {
        match slot {
            Slot::Shift(p) if p >= 0 => Some(4 * p),
            Slot::Shift(p) => Some(-2 * p - 1),
            Slot::Diagonal(m) if m >= 1 => Some(4 * m - 2),
            Slot::Diagonal(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilateral_order_matches_display() {
        let a = BilateralArrangement;
        let order: Vec<i64> = (-2..=2).map(|p| a.to_basis(p)).collect();
        assert_eq!(order, vec![4, 2, 0, 1, 3]);
    }

    #[test]
    fn bilateral_round_trip() {
        let a = BilateralArrangement;
        for p in -500..=500 {
            assert_eq!(a.to_position(a.to_basis(p)), Some(p));
        }
        for i in 0..1000 {
            assert_eq!(a.to_basis(a.to_position(i).unwrap()), i);
        }
        assert_eq!(a.to_position(-1), None);
    }

    #[test]
    fn split_layout_matches_one_based_labels() {
        let s = SplitArrangement;
        // 1-based labels f_4, f_2, f_1, f_5 are 0-based 3, 1, 0, 4
        assert_eq!(s.slot(3), Some(Slot::Shift(-2)));
        assert_eq!(s.slot(1), Some(Slot::Shift(-1)));
        assert_eq!(s.slot(0), Some(Slot::Shift(0)));
        assert_eq!(s.slot(4), Some(Slot::Shift(1)));
        // f_3, f_7 carry gamma_1, gamma_2
        assert_eq!(s.slot(2), Some(Slot::Diagonal(1)));
        assert_eq!(s.slot(6), Some(Slot::Diagonal(2)));
        for k in 0..2000 {
            assert_eq!(s.index(s.slot(k).unwrap()), Some(k));
        }
    }
}
