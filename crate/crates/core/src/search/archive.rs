use crate::genome::Descriptor;

use super::Individual;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArchiveError {
    #[error("descriptor {descriptor} lies outside the feasible grid for eta = {eta}")]
    Infeasible { descriptor: Descriptor, eta: usize },
}

/// Elite grid over `(m, j)` with `m` in `1..=eta`, `j` in `0..eta` and
/// `m + j <= eta`. Each cell keeps the first individual of strictly
/// highest fitness seen for it.
#[derive(Clone, Debug, PartialEq)]
pub struct Archive {
    eta: usize,
    cells: Vec<Option<Individual>>,
}

impl Archive {
    pub fn new(eta: usize) -> Self {
        Archive { eta, cells: vec![None; eta * eta] }
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn is_feasible(&self, d: Descriptor) -> bool {
        d.m >= 1 && d.m + d.j <= self.eta
    }

    /// Number of reachable cells: `eta * (eta + 1) / 2`.
    pub fn feasible_cells(&self) -> usize {
        self.eta * (self.eta + 1) / 2
    }

    fn index(&self, d: Descriptor) -> Option<usize> {
        self.is_feasible(d).then(|| (d.m - 1) * self.eta + d.j)
    }

    /// Stores `ind` if its cell is empty or it strictly beats the incumbent.
    pub fn insert(&mut self, ind: Individual) -> Result<bool, ArchiveError> {
        let idx = self
            .index(ind.descriptor)
            .ok_or(ArchiveError::Infeasible { descriptor: ind.descriptor, eta: self.eta })?;
        let cell = &mut self.cells[idx];
        match cell {
            Some(incumbent) if ind.fitness <= incumbent.fitness => Ok(false),
            _ => {
                *cell = Some(ind);
                Ok(true)
            }
        }
    }

    pub fn get(&self, d: Descriptor) -> Option<&Individual> {
        self.index(d).and_then(|i| self.cells[i].as_ref())
    }

    /// Occupied cells in row-major `(m, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = &Individual> {
        self.cells.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(Option::is_none)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Genome;
    use crate::sim::Evaluation;

    fn ind(m: usize, j: usize, fitness: f64) -> Individual {
        Individual::new(Genome::root_only(), Evaluation { fitness, descriptor: Descriptor::new(m, j) })
    }

    #[test]
    fn insert_rules() {
        let mut a = Archive::new(20);
        assert!(a.is_empty());
        assert_eq!(a.insert(ind(1, 0, 0.5)), Ok(true));
        assert_eq!(a.insert(ind(1, 0, 0.5)), Ok(false));
        assert_eq!(a.insert(ind(1, 0, 0.4)), Ok(false));
        assert_eq!(a.insert(ind(1, 0, 0.6)), Ok(true));
        assert_eq!(a.get(Descriptor::new(1, 0)).unwrap().fitness, 0.6);
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn infeasible_cells_rejected() {
        let mut a = Archive::new(20);
        assert!(a.insert(ind(15, 6, 1.0)).is_err());
        assert!(a.insert(ind(0, 3, 1.0)).is_err());
        assert_eq!(a.insert(ind(20, 0, 1.0)), Ok(true));
        assert_eq!(a.insert(ind(1, 19, 1.0)), Ok(true));
        assert_eq!(a.feasible_cells(), 210);
    }
}
