//! Kolmogorov–Smirnov suprema of the colour-blind and the full two-sample
//! processes.
//!
//! Both processes are constant on the cells of the pooled jump grid, so the
//! supremum over the cell grid is exact. The sweep walks the first
//! coordinate cell by cell, adding each pair to a cumulative counter over
//! the second coordinate, and scans the counter: `O(n·m + m²)` for `m`
//! grid cells.

use crate::empirical::{ColourBlindSample, JumpGrid, LabeledSample};

/// Grid cells per axis above which the grid is thinned to quantile-spaced
/// cells.
pub const DEFAULT_MAX_CELLS: usize = 2001;

/// Reusable buffers for repeated KS evaluations.
#[derive(Debug, Default)]
pub struct KsWorkspace {
    pooled: Vec<f64>,
    grid: Option<JumpGrid>,
    selected: Vec<usize>,
    q_sel: Vec<f64>,
    counts: Vec<f64>,
    cells: Vec<(usize, usize)>,
}

impl KsWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, max_cells: usize) {
        let grid = self.grid.get_or_insert_with(|| JumpGrid::from_sorted(&[]));
        grid.rebuild(&self.pooled);
        let m = grid.cells();
        self.selected.clear();
        if m <= max_cells.max(2) {
            self.selected.extend(0..m);
        } else {
            let g = max_cells.max(2);
            let mut last = usize::MAX;
            for k in 0..g {
                let c = ((k as f64) * (m - 1) as f64 / (g - 1) as f64).round() as usize;
                if c != last {
                    self.selected.push(c);
                    last = c;
                }
            }
        }
        self.q_sel.clear();
        self.q_sel.extend(self.selected.iter().map(|&c| grid.qn[c]));
        self.counts.clear();
        self.counts.resize(self.selected.len(), 0.0);
    }

    /// Adds one pair whose second-coordinate cell is `cell`.
    #[inline]
    fn add(&mut self, cell: usize) {
        let start = self.selected.partition_point(|&c| c < cell);
        for c in &mut self.counts[start..] {
            *c += 1.0;
        }
    }

    /// `Dₙˢ` on the (possibly thinned) jump grid.
    pub fn ks_colour_blind(&mut self, s: &ColourBlindSample, max_cells: usize) -> f64 {
        self.pooled.clear();
        self.pooled.extend_from_slice(s.pooled());
        self.prepare(max_cells);
        let grid = self.grid.as_ref().unwrap();
        self.cells.clear();
        self.cells
            .extend(s.pairs().iter().map(|&(u, v)| (grid.cell(u), grid.cell(v))));
        self.cells.sort_unstable();
        let n = s.n() as f64;
        let inv_n = 1.0 / n;
        let mut next = 0;
        let mut sup: f64 = 0.0;
        for a in 0..self.selected.len() {
            let cu = self.selected[a];
            while next < self.cells.len() && self.cells[next].0 <= cu {
                let cv = self.cells[next].1;
                self.add(cv);
                next += 1;
            }
            let qu2 = 2.0 * self.q_sel[a];
            let m = max_abs(&self.counts[..=a], &self.q_sel[..=a], |c, q| c * inv_n - (qu2 - q) * q);
            sup = sup.max(m);
        }
        n.sqrt() * sup
    }

    /// `Dₙ` on the (possibly thinned) jump grid of the pooled sample.
    pub fn ks_full(&mut self, s: &LabeledSample, max_cells: usize) -> f64 {
        self.pooled.clear();
        self.pooled.extend(s.pairs().iter().flat_map(|&(x, y)| [x, y]));
        self.pooled.sort_unstable_by(f64::total_cmp);
        self.prepare(max_cells);
        let grid = self.grid.as_ref().unwrap();
        self.cells.clear();
        self.cells
            .extend(s.pairs().iter().map(|&(x, y)| (grid.cell(x), grid.cell(y))));
        self.cells.sort_unstable();
        let n = s.n() as f64;
        let inv_n = 1.0 / n;
        let mut next = 0;
        let mut sup: f64 = 0.0;
        for a in 0..self.selected.len() {
            let cx = self.selected[a];
            while next < self.cells.len() && self.cells[next].0 <= cx {
                let cy = self.cells[next].1;
                self.add(cy);
                next += 1;
            }
            let qx = self.q_sel[a];
            let m = max_abs(&self.counts, &self.q_sel, |c, q| c * inv_n - qx * q);
            sup = sup.max(m);
        }
        n.sqrt() * sup
    }
}

#[inline(always)]
fn max_abs(counts: &[f64], q: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut cc = counts.chunks_exact(4);
    let mut qc = q.chunks_exact(4);
    for (c, q) in (&mut cc).zip(&mut qc) {
        for k in 0..4 {
            let v = f(c[k], q[k]).abs();
            acc[k] = if v > acc[k] { v } else { acc[k] };
        }
    }
    let mut best = acc[0].max(acc[1]).max(acc[2].max(acc[3]));
    for (&c, &q) in cc.remainder().iter().zip(qc.remainder()) {
        best = best.max(f(c, q).abs());
    }
    best
}

/// Colour-blind Kolmogorov–Smirnov statistic
/// `Dₙˢ = sup_{v ≤ u} |Rₙˢ(u, v)|`.
pub fn ks_colour_blind(s: &ColourBlindSample) -> f64 {
    KsWorkspace::new().ks_colour_blind(s, DEFAULT_MAX_CELLS)
}

/// Full two-sample statistic `Dₙ = sup |Rₙ(x, y)|` on labelled data.
pub fn ks_full(s: &LabeledSample) -> f64 {
    KsWorkspace::new().ks_full(s, DEFAULT_MAX_CELLS)
}
