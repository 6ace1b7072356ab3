use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

/// Ordered list of named tensor factors. The first register is the most
/// significant digit of the flat basis index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new<I, S>(registers: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Register> = Vec::new();
        for (name, dim) in registers {
            let name = name.into();
            if dim == 0 {
                return Err(Error::Parameter(format!("register `{name}` has dimension 0")));
            }
            if out.iter().any(|r| r.name == name) {
                return Err(Error::DuplicateRegister(name));
            }
            out.push(Register { name, dim });
        }
        Ok(Self { registers: out })
    }

    /// Single register layout.
    pub fn single(name: &str, dim: usize) -> Self {
        Self::new([(name, dim)]).expect("single register layout with nonzero dimension")
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    /// Total dimension (1 for the empty layout).
    pub fn dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        Ok(self.registers[self.position(name)?].dim)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        Self::new(
            self.registers
                .iter()
                .chain(other.registers.iter())
                .map(|r| (r.name.clone(), r.dim)),
        )
    }

    /// Sub-layout made of the named registers, in this layout's order.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let mask = self.mask(names)?;
        Ok(Self {
            registers: self
                .registers
                .iter()
                .zip(&mask)
                .filter(|(_, keep)| **keep)
                .map(|(r, _)| r.clone())
                .collect(),
        })
    }

    /// Layout with the named registers removed.
    pub fn without(&self, names: &[&str]) -> Result<Self> {
        let mask = self.mask(names)?;
        Ok(Self {
            registers: self
                .registers
                .iter()
                .zip(&mask)
                .filter(|(_, keep)| !**keep)
                .map(|(r, _)| r.clone())
                .collect(),
        })
    }

    pub(crate) fn mask(&self, names: &[&str]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.registers.len()];
        for name in names {
            let p = self.position(name)?;
            if mask[p] {
                return Err(Error::DuplicateRegister(name.to_string()));
            }
            mask[p] = true;
        }
        Ok(mask)
    }

    /// Same dimensions, new names.
    pub fn renamed<S: Into<String>>(&self, names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != self.registers.len() {
            return Err(Error::DimensionMismatch {
                expected: self.registers.len(),
                found: names.len(),
            });
        }
        Self::new(names.into_iter().zip(self.registers.iter().map(|r| r.dim)))
    }

    /// Mixed-radix digits of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut d = vec![0; self.registers.len()];
        for (slot, reg) in d.iter_mut().zip(&self.registers).rev() {
            *slot = index % reg.dim;
            index /= reg.dim;
        }
        d
    }
}

/// Reindexing of a flat basis into (target, rest) coordinates, where the
/// target registers are taken in a caller-given order and the rest keep
/// layout order. `table[t * rest_dim + r]` is the flat index.
pub(crate) struct IndexSplit {
    pub target_dim: usize,
    pub rest_dim: usize,
    pub table: Vec<usize>,
}

impl IndexSplit {
    pub fn new(layout: &RegisterLayout, targets: &[usize]) -> Self {
        let regs = layout.registers();
        let rest: Vec<usize> = (0..regs.len()).filter(|p| !targets.contains(p)).collect();
        let target_dim: usize = targets.iter().map(|&p| regs[p].dim).product();
        let rest_dim: usize = rest.iter().map(|&p| regs[p].dim).product();
        let total = layout.dim();
        let mut table = vec![0; total];
        for flat in 0..total {
            let digits = layout.digits(flat);
            let t = targets.iter().fold(0, |acc, &p| acc * regs[p].dim + digits[p]);
            let r = rest.iter().fold(0, |acc, &p| acc * regs[p].dim + digits[p]);
            table[t * rest_dim + r] = flat;
        }
        Self {
            target_dim,
            rest_dim,
            table,
        }
    }

    #[inline]
    pub fn flat(&self, t: usize, r: usize) -> usize {
        self.table[t * self.rest_dim + r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_lookup() {
        let l = RegisterLayout::new([("A1", 2), ("A2", 3), ("B", 4)]).unwrap();
        assert_eq!(l.dim(), 24);
        assert_eq!(l.position("B").unwrap(), 2);
        assert!(matches!(l.position("C"), Err(Error::UnknownRegister(_))));
        assert_eq!(l.select(&["B", "A1"]).unwrap().names().collect::<Vec<_>>(), ["A1", "B"]);
        assert_eq!(l.digits(23), vec![1, 2, 3]);
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(matches!(
            RegisterLayout::new([("A", 2), ("A", 2)]),
            Err(Error::DuplicateRegister(_))
        ));
    }

    #[test]
    fn split_table_is_a_permutation() {
        let l = RegisterLayout::new([("X", 2), ("Y", 3), ("Z", 2)]).unwrap();
        let s = IndexSplit::new(&l, &[2, 0]);
        let mut seen = s.table.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..12).collect::<Vec<_>>());
        // target = (z, x), rest = y
        assert_eq!(s.flat(1 * 2 + 1, 2), 1 * 6 + 2 * 2 + 1);
    }
}
