//! Spin structures on hyperelliptic surfaces as ℤ₂ quadratic forms.
//!
//! H₁(M, ℤ₂) is modelled by the even subsets C of the 2g+1 branch points
//! A, with symmetric difference as the group law and #(C₁∩C₂) mod 2 as the
//! intersection form. The spin structure η_B (B ⊆ A, #B ≤ g) has
//! q_B(C) = #(B∩C) + #C/2 mod 2. Subsets are bitmasks over A.

use crate::{Error, Result};
use serde::Serialize;

/// Branch set A (labels only) and the subset B selecting η_B.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperellipticSpin {
    pub g: usize,
    pub branch: Vec<String>,
    /// Bitmask of B within `branch`.
    pub b: u32,
}

impl HyperellipticSpin {
    /// A labelled a₁ … a_{2g+1}; B given as indices into A.
    pub fn new(g: usize, b: &[usize]) -> Result<Self> {
        let branch = (1..=2 * g + 1).map(|i| format!("a{i}")).collect();
        Self::with_labels(g, branch, b)
    }

    pub fn with_labels(g: usize, branch: Vec<String>, b: &[usize]) -> Result<Self> {
        if g > 15 {
            return Err(Error::InvalidInput(format!("genus {g} too large for the bitmask model")));
        }
        if branch.len() != 2 * g + 1 {
            return Err(Error::InvalidInput(format!("need 2g+1 = {} branch points, got {}", 2 * g + 1, branch.len())));
        }
        for i in 0..branch.len() {
            if branch[i + 1..].contains(&branch[i]) {
                return Err(Error::InvalidInput(format!("branch label {} repeated", branch[i])));
            }
        }
        let mut mask = 0u32;
        for &i in b {
            if i >= branch.len() {
                return Err(Error::InvalidInput(format!("B index {i} outside A")));
            }
            mask |= 1 << i;
        }
        if mask.count_ones() as usize > g {
            return Err(Error::InvalidInput(format!("#B = {} exceeds g = {g}", mask.count_ones())));
        }
        Ok(HyperellipticSpin { g, branch, b: mask })
    }

    pub fn size_a(&self) -> usize {
        2 * self.g + 1
    }

    pub fn size_b(&self) -> usize {
        self.b.count_ones() as usize
    }

    /// All even subsets of A, i.e. the elements of H₁(M, ℤ₂).
    pub fn homology(&self) -> impl Iterator<Item = u32> {
        (0u32..1 << self.size_a()).filter(|c| c.count_ones() % 2 == 0)
    }
}

/// q_B(C) = #(B∩C) + #C/2 mod 2.
pub fn q_value(spin: &HyperellipticSpin, c: u32) -> Result<u8> {
    if c >> spin.size_a() != 0 {
        return Err(Error::InvalidInput("C is not a subset of A".into()));
    }
    if c.count_ones() % 2 != 0 {
        return Err(Error::InvalidInput(format!("C = {c:#b} has odd cardinality")));
    }
    Ok((((spin.b & c).count_ones() + c.count_ones() / 2) % 2) as u8)
}

/// Intersection number #(C₁∩C₂) mod 2.
pub fn intersection(c1: u32, c2: u32) -> u8 {
    ((c1 & c2).count_ones() % 2) as u8
}

/// Checks q(C₁ΔC₂) = q(C₁) + q(C₂) + C₁·C₂ for every pair of classes.
pub fn quadratic_law_holds(spin: &HyperellipticSpin) -> bool {
    let classes: Vec<u32> = spin.homology().collect();
    classes.iter().all(|&c1| {
        classes.iter().all(|&c2| {
            let lhs = q_value(spin, c1 ^ c2).unwrap();
            let rhs = (q_value(spin, c1).unwrap() + q_value(spin, c2).unwrap() + intersection(c1, c2)) % 2;
            lhs == rhs
        })
    })
}

/// 2^{−g} Σ_C (−1)^{q(C)} over all 2^{2g} classes.
pub fn arf_bruteforce(spin: &HyperellipticSpin) -> Result<i8> {
    if spin.g > 6 {
        return Err(Error::InvalidInput("brute-force Arf is limited to g ≤ 6".into()));
    }
    let sum: i64 = spin.homology().map(|c| if q_value(spin, c).unwrap() == 0 { 1 } else { -1 }).sum();
    let arf = sum / (1i64 << spin.g);
    if arf.abs() != 1 || arf * (1i64 << spin.g) != sum {
        return Err(Error::Verification(format!("Gauss sum {sum} is not ±2^g")));
    }
    Ok(arf as i8)
}

/// +1 if 2g − 2b + 1 ≡ ±1 (mod 8), else −1.
pub fn arf_closed_form(g: usize, b: usize) -> Result<i8> {
    if b > g {
        return Err(Error::InvalidInput(format!("b = {b} exceeds g = {g}")));
    }
    let r = (2 * g as i64 - 2 * b as i64 + 1).rem_euclid(8);
    Ok(if r == 1 || r == 7 { 1 } else { -1 })
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// ξ(c, k) = Σ_{i ≡ k mod 4} C(c, i).
pub fn xi(c: u64, k: i64) -> u128 {
    let k = k.rem_euclid(4) as u64;
    (0..=c).filter(|i| i % 4 == k).map(|i| binomial(c, i)).sum()
}

/// 2^{(c−2)/2}(2^{(c−2)/2} + cos(π(c−2k)/4)). Agrees with [`xi`] for c ≥ 1;
/// at c = 0 it drops the (1−1)^c term of the root-of-unity filter.
pub fn xi_closed_form(c: u64, k: i64) -> f64 {
    let h = 2f64.powf((c as f64 - 2.0) / 2.0);
    h * (h + (std::f64::consts::PI * (c as f64 - 2.0 * k as f64) / 4.0).cos())
}

/// (#Arf = +1, #Arf = −1) over the 2^{2g} spin structures, enumerated as
/// η_B with #B ≤ g (complementary subsets give the same structure) and
/// evaluated by brute force.
pub fn spin_structure_counts(g: usize) -> Result<(u64, u64)> {
    if g > 4 {
        return Err(Error::InvalidInput("enumeration is limited to g ≤ 4".into()));
    }
    let n = 2 * g + 1;
    let (mut plus, mut minus) = (0, 0);
    for b in 0u32..1 << n {
        let nb = b.count_ones() as usize;
        if nb > g {
            continue;
        }
        let mut spin = HyperellipticSpin::new(g, &[])?;
        spin.b = b;
        if arf_bruteforce(&spin)? == 1 {
            plus += 1;
        } else {
            minus += 1;
        }
    }
    Ok((plus, minus))
}

/// 2^{2g−1} ± 2^{g−1}; for g = 0 the single structure is even.
pub fn spin_structure_formula(g: usize) -> (u64, u64) {
    if g == 0 {
        return (1, 0);
    }
    let a = 1u64 << (2 * g - 1);
    let b = 1u64 << (g - 1);
    (a + b, a - b)
}

/// One row of the torus table: the differential, q on α₀..α₃, and Arf.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusSpinRow {
    pub structure: String,
    pub q: [u8; 4],
    pub arf: i8,
}

/// Homology classes α₀ … α₃ of the torus as even subsets of A = {e₁, e₂, e₃}:
/// α₀ = ∅ and αᵢ = A ∖ {eᵢ}.
pub const TORUS_ALPHA: [u32; 4] = [0b000, 0b110, 0b101, 0b011];

/// q and Arf for du and (℘ − eᵢ)du, i.e. B = ∅ and B = {eᵢ}.
pub fn torus_spin_table() -> Vec<TorusSpinRow> {
    let labels: Vec<String> = ["e1", "e2", "e3"].iter().map(|s| s.to_string()).collect();
    let rows: [(&str, &[usize]); 4] = [("du", &[]), ("(℘−e1)du", &[0]), ("(℘−e2)du", &[1]), ("(℘−e3)du", &[2])];
    rows.iter()
        .map(|(name, b)| {
            let spin = HyperellipticSpin::with_labels(1, labels.clone(), b).expect("valid torus spin data");
            let mut q = [0u8; 4];
            for (k, &c) in TORUS_ALPHA.iter().enumerate() {
                q[k] = q_value(&spin, c).expect("even class");
            }
            TorusSpinRow { structure: name.to_string(), q, arf: arf_bruteforce(&spin).expect("g = 1") }
        })
        .collect()
}

/// Aligned text rendering of the torus table.
pub fn render_torus_table(rows: &[TorusSpinRow]) -> String {
    let mut out = format!("{:<10} {:>3} {:>3} {:>3} {:>3} {:>4}\n", "", "α0", "α1", "α2", "α3", "Arf");
    for r in rows {
        let arf = if r.arf > 0 { "+1" } else { "-1" };
        out.push_str(&format!(
            "{:<10} {:>3} {:>3} {:>3} {:>3} {:>4}\n",
            r.structure, r.q[0], r.q[1], r.q[2], r.q[3], arf
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_examples() {
        let s = HyperellipticSpin::new(1, &[0]).unwrap();
        assert_eq!(q_value(&s, 0b011).unwrap(), 0);
        let s0 = HyperellipticSpin::new(1, &[]).unwrap();
        for c in [0b011, 0b101, 0b110] {
            assert_eq!(q_value(&s0, c).unwrap(), 1);
        }
        assert!(q_value(&s0, 0b001).is_err());
    }

    #[test]
    fn torus_arf_values() {
        assert_eq!(arf_bruteforce(&HyperellipticSpin::new(1, &[]).unwrap()).unwrap(), -1);
        assert_eq!(arf_bruteforce(&HyperellipticSpin::new(1, &[0]).unwrap()).unwrap(), 1);
        assert_eq!(arf_closed_form(1, 0).unwrap(), -1);
        assert_eq!(arf_closed_form(1, 1).unwrap(), 1);
        assert_eq!(arf_closed_form(2, 0).unwrap(), -1);
    }

    #[test]
    fn table_rows() {
        let t = torus_spin_table();
        assert_eq!((t[0].q, t[0].arf), ([0, 1, 1, 1], -1));
        assert_eq!((t[1].q, t[1].arf), ([0, 1, 0, 0], 1));
        assert_eq!((t[2].q, t[2].arf), ([0, 0, 1, 0], 1));
        assert_eq!((t[3].q, t[3].arf), ([0, 0, 0, 1], 1));
    }

    #[test]
    fn xi_values() {
        assert_eq!(xi(4, 0), 2);
        assert_eq!(xi(0, 0), 1);
        assert_eq!(xi(5, 1), 6);
        for c in 1..=20u64 {
            for k in 0..4 {
                assert!((xi_closed_form(c, k) - xi(c, k) as f64).abs() < 1e-6, "c={c} k={k}");
            }
        }
        // The closed form misses ξ(0, 0) = 1.
        assert!((xi_closed_form(0, 0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn counts() {
        assert_eq!(spin_structure_counts(0).unwrap(), (1, 0));
        assert_eq!(spin_structure_counts(1).unwrap(), (3, 1));
        assert_eq!(spin_structure_counts(2).unwrap(), (10, 6));
        assert_eq!(spin_structure_formula(3), spin_structure_counts(3).unwrap());
    }

    #[test]
    fn b_too_large_rejected() {
        assert!(HyperellipticSpin::new(1, &[0, 1]).is_err());
    }
}
