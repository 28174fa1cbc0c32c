//! Bounded non-dominated archive with an adaptive grid over objective
//! space. The grid drives both diversity maintenance (evictions hit the
//! most crowded cell) and leader selection (roulette over cells weighted
//! inversely to occupancy, then uniform within the chosen cell).

use rand::Rng;

use super::{dominates, EvaluatedSolution};

#[derive(Debug, Clone)]
pub struct ParetoArchive {
    members: Vec<EvaluatedSolution>,
    cells: Vec<u64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    capacity: usize,
    divisions: usize,
}

impl ParetoArchive {
    pub fn new(capacity: usize, divisions: usize) -> Self {
        assert!(capacity >= 1 && divisions >= 2);
        ParetoArchive {
            members: Vec::with_capacity(capacity + 1),
            cells: Vec::with_capacity(capacity + 1),
            lo: vec![],
            hi: vec![],
            capacity,
            divisions,
        }
    }

    pub fn members(&self) -> &[EvaluatedSolution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<EvaluatedSolution> {
        self.members
    }

    /// Insert a candidate. Only feasible, non-dominated candidates enter
    /// (exact objective duplicates are dropped); members the candidate
    /// dominates are evicted; a full archive drops one member from its
    /// most crowded grid cell.
    pub fn insert<R: Rng>(&mut self, candidate: EvaluatedSolution, rng: &mut R) -> bool {
        if !candidate.feasible {
            return false;
        }
        if self
            .members
            .iter()
            .any(|m| dominates(m, &candidate) || m.objectives == candidate.objectives)
        {
            return false;
        }
        let mut k = 0;
        while k < self.members.len() {
            if dominates(&candidate, &self.members[k]) {
                self.members.swap_remove(k);
                self.cells.swap_remove(k);
            } else {
                k += 1;
            }
        }
        let outside = self.lo.is_empty()
            || candidate
                .objectives
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .any(|(v, (lo, hi))| v < lo || v > hi);
        self.members.push(candidate);
        self.cells.push(0);
        if outside {
            self.regrid();
        } else {
            let idx = self.members.len() - 1;
            self.cells[idx] = self.cell_of(&self.members[idx]);
        }

        if self.members.len() > self.capacity {
            self.evict_from_densest(rng);
        }
        true
    }

    fn regrid(&mut self) {
        let dim = self.members[0].objectives.len();
        self.lo = vec![f64::INFINITY; dim];
        self.hi = vec![f64::NEG_INFINITY; dim];
        for m in &self.members {
            for (d, v) in m.objectives.iter().enumerate() {
                self.lo[d] = self.lo[d].min(*v);
                self.hi[d] = self.hi[d].max(*v);
            }
        }
        for i in 0..self.members.len() {
            self.cells[i] = self.cell_of(&self.members[i]);
        }
    }

    fn cell_of(&self, m: &EvaluatedSolution) -> u64 {
        let mut code = 0u64;
        for (d, v) in m.objectives.iter().enumerate() {
            let span = self.hi[d] - self.lo[d];
            let idx = if span <= 0.0 {
                0
            } else {
                (((v - self.lo[d]) / span * self.divisions as f64) as usize)
                    .min(self.divisions - 1)
            };
            code = code * self.divisions as u64 + idx as u64;
        }
        code
    }

    fn occupancy(&self) -> Vec<(u64, usize)> {
        let mut counts: Vec<(u64, usize)> = Vec::new();
        for &c in &self.cells {
            match counts.binary_search_by_key(&c, |e| e.0) {
                Ok(i) => counts[i].1 += 1,
                Err(i) => counts.insert(i, (c, 1)),
            }
        }
        counts
    }

    fn evict_from_densest<R: Rng>(&mut self, rng: &mut R) {
        let occ = self.occupancy();
        let (cell, _) = occ
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .copied()
            .expect("non-empty archive");
        let in_cell: Vec<usize> = (0..self.members.len())
            .filter(|&i| self.cells[i] == cell)
            .collect();
        let victim = in_cell[rng.random_range(0..in_cell.len())];
        self.members.swap_remove(victim);
        self.cells.swap_remove(victim);
    }

    /// Roulette leader selection: occupied cells weighted by the inverse
    /// of their occupancy, then a uniform member of the winning cell.
    pub fn select_leader<R: Rng>(&self, rng: &mut R) -> Option<&EvaluatedSolution> {
        if self.members.is_empty() {
            return None;
        }
        let occ = self.occupancy();
        let total: f64 = occ.iter().map(|(_, n)| 1.0 / *n as f64).sum();
        let mut target = rng.random_range(0.0..total);
        let mut chosen = occ[occ.len() - 1].0;
        for (cell, n) in &occ {
            let w = 1.0 / *n as f64;
            if target < w {
                chosen = *cell;
                break;
            }
            target -= w;
        }
        let in_cell: Vec<usize> = (0..self.members.len())
            .filter(|&i| self.cells[i] == chosen)
            .collect();
        Some(&self.members[in_cell[rng.random_range(0..in_cell.len())]])
    }
}
