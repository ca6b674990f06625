//! Exact enumeration of the Farey set `F_Q` in dimension `n`, a torus grid
//! index over it, and exact counting of points in regions and in scaled
//! translates of a test set.

use crate::error::{Error, Result};
use crate::exact::cmp_ratio_f64;
use crate::numtheory::{zeta_real, ArithmeticTable};
use crate::testset::{ScaledTranslate, TestSet};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::io::Write;

/// Normalizing density `sigma_Q = Q^{n+1} / ((n+1) zeta(n+1))`: a test set
/// scaled by `sigma_Q^{-1/n}` carries unit expected count.
pub fn sigma(n: usize, q_max: i64) -> f64 {
    assert!(n >= 1 && q_max >= 1);
    let np1 = (n + 1) as f64;
    (q_max as f64).powi(n as i32 + 1) / (np1 * zeta_real(np1).expect("n+1 >= 2"))
}

/// One Farey point `p/q` with canonical coordinates `0 <= p_i < q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FareyPoint {
    pub p: Vec<i64>,
    pub q: i64,
}

const MAX_CELLS: u64 = 1 << 22;
const MAX_CELLS_PER_AXIS: u64 = 1024;
const DEFAULT_BUDGET_BYTES: u64 = 2 << 30;

#[derive(Debug, Clone)]
struct GridIndex {
    /// cells per axis
    m: usize,
    /// query-diameter assumption the index was built for
    rho: f64,
    cell_start: Vec<u32>,
    ids: Vec<u32>,
}

/// The Farey set of one level, immutable after construction; all queries
/// take `&self` and are safe to run concurrently.
#[derive(Debug, Clone)]
pub struct FareySequence {
    n: usize,
    q_max: i64,
    sigma: f64,
    /// flattened coordinates, `n` per point, enumeration order (q, then p lex)
    coords: Vec<u32>,
    qs: Vec<u32>,
    index: GridIndex,
}

impl FareySequence {
    /// Enumerates all of `F_Q` with the default memory budget.
    pub fn enumerate(n: usize, q_max: i64) -> Result<Self> {
        Self::enumerate_with(n, q_max, DEFAULT_BUDGET_BYTES, None)
    }

    /// Enumerates `F_Q`, failing before allocation if the exact cardinality
    /// would exceed `budget_bytes`. `rho` overrides the query-diameter
    /// assumption used to size the grid index (default `sigma_Q^{-1/n}`).
    pub fn enumerate_with(
        n: usize,
        q_max: i64,
        budget_bytes: u64,
        rho: Option<f64>,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if q_max < 1 || q_max > u32::MAX as i64 {
            return Err(Error::InvalidArgument(format!(
                "level must be in [1, {}]",
                u32::MAX
            )));
        }
        let table = ArithmeticTable::build(q_max as usize, n as u32)?;
        let total = table.jordan_summatory(q_max as usize)?;
        let bytes = total
            .checked_mul((n as u64 + 1) * 4 + 4)
            .ok_or_else(|| Error::Overflow("size estimate".into()))?;
        if bytes > budget_bytes {
            return Err(Error::MemoryBudget {
                points: total,
                budget: budget_bytes,
            });
        }
        let total = total as usize;

        // exact per-q offsets, then fill disjoint slices in parallel
        let mut offsets = Vec::with_capacity(q_max as usize + 1);
        offsets.push(0usize);
        let mut acc = 0usize;
        for q in 1..=q_max as usize {
            acc += table.jordan[q] as usize;
            offsets.push(acc);
        }

        let mut coords = vec![0u32; total * n];
        let mut qs = vec![0u32; total];
        {
            let mut tail: &mut [u32] = &mut coords;
            let mut qtail: &mut [u32] = &mut qs;
            let mut jobs: Vec<(u32, &mut [u32], &mut [u32])> = Vec::with_capacity(q_max as usize);
            for q in 1..=q_max as usize {
                let len = offsets[q] - offsets[q - 1];
                let (chunk, rest) = tail.split_at_mut(len * n);
                let (qchunk, qrest) = qtail.split_at_mut(len);
                tail = rest;
                qtail = qrest;
                jobs.push((q as u32, chunk, qchunk));
            }
            jobs.into_par_iter().for_each(|(q, chunk, qchunk)| {
                let written = fill_level(n, q, chunk);
                debug_assert_eq!(written * n, chunk.len(), "J_n({q}) mismatch");
                qchunk.fill(q);
            });
        }

        let sigma = sigma(n, q_max);
        let rho = rho.unwrap_or_else(|| sigma.powf(-1.0 / n as f64).min(1.0));
        let index = build_index(n, &coords, &qs, rho);
        Ok(FareySequence {
            n,
            q_max,
            sigma,
            coords,
            qs,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> i64 {
        self.q_max
    }

    /// `sigma_Q` for this sequence's dimension and level.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The natural scale factor `sigma_Q^{-1/n}` applied to test sets.
    pub fn scale(&self) -> f64 {
        self.sigma.powf(-1.0 / self.n as f64)
    }

    pub fn len(&self) -> usize {
        self.qs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qs.is_empty()
    }

    #[inline]
    pub fn coords_of(&self, i: usize) -> (&[u32], u32) {
        (&self.coords[i * self.n..(i + 1) * self.n], self.qs[i])
    }

    pub fn point(&self, i: usize) -> FareyPoint {
        let (p, q) = self.coords_of(i);
        FareyPoint {
            p: p.iter().map(|&v| v as i64).collect(),
            q: q as i64,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = FareyPoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Number of points with denominator at most `q`; the enumeration is
    /// sorted by `q`, so this is a binary search.
    pub fn count_level_at_most(&self, q: i64) -> usize {
        self.qs.partition_point(|&v| (v as i64) <= q)
    }

    /// The diameter assumption the current index was built for.
    pub fn index_rho(&self) -> f64 {
        self.index.rho
    }

    /// Rebuilds the grid index for queries of diameter `rho` when the current
    /// index is too coarse (query less than half the build-time assumption).
    pub fn ensure_index_for(&mut self, rho: f64) {
        if rho > 0.0 && rho < self.index.rho / 2.0 {
            let rebuilt = build_index(self.n, &self.coords, &self.qs, rho);
            if rebuilt.m != self.index.m {
                self.index = rebuilt;
            } else {
                self.index.rho = rho;
            }
        }
    }

    /// Exact `|F_Q ∩ D|` for a region `D` on the torus.
    pub fn count_in_region(&self, region: &TestSet) -> Result<u64> {
        let t = ScaledTranslate::region(region)?;
        Ok(self.count_translate(&t))
    }

    /// Indices of all points lying in the region `D`.
    pub fn indices_in_region(&self, region: &TestSet) -> Result<Vec<u32>> {
        let t = ScaledTranslate::region(region)?;
        Ok((0..self.len() as u32)
            .into_par_iter()
            .filter(|&i| {
                let (p, q) = self.coords_of(i as usize);
                t.contains_wrapped(p.iter().map(|&v| v as i64), q as i64)
            })
            .collect())
    }

    /// Exact count of Farey points in the wrapped translate `x + delta*A`.
    pub fn count_in_translate(&self, x: &[f64], set: &TestSet, delta: f64) -> Result<u64> {
        let t = ScaledTranslate::new(x, delta, set)?;
        Ok(self.count_translate(&t))
    }

    /// Counting core over a prepared translate; used by the statistics loops
    /// so the translate is validated once per batch.
    pub fn count_translate(&self, t: &ScaledTranslate) -> u64 {
        assert_eq!(t.dim(), self.n);
        if self.n == 1 {
            self.count_translate_1d(t)
        } else {
            self.count_translate_nd(t)
        }
    }

    fn count_translate_1d(&self, t: &ScaledTranslate) -> u64 {
        let m = self.index.m as i64;
        let (cover_lo, cover_hi) = t.cover(0);
        let mut total = 0u64;
        for k in [0i64, -1, 1] {
            let lo = cover_lo + k as f64;
            let hi = cover_hi + k as f64;
            if hi < 0.0 || lo >= 1.0 {
                continue;
            }
            let c_lo = (((lo.max(0.0) * m as f64).floor() as i64) - 1).max(0);
            let c_hi = (((hi.min(1.0) * m as f64).floor() as i64) + 1).min(m - 1);
            for c in c_lo..=c_hi {
                let slice = self.cell_ids(c as usize);
                if slice.is_empty() {
                    continue;
                }
                if self.cell_fully_inside_1d(t, c, k, m) {
                    total += slice.len() as u64;
                } else {
                    total += self.count_in_cell_1d(slice, t, k);
                }
            }
        }
        total
    }

    /// Whole-cell shortcut: `[c/m, (c+1)/m)` contained in the k-shifted
    /// translate interval, decided exactly.
    fn cell_fully_inside_1d(&self, t: &ScaledTranslate, c: i64, k: i64, m: i64) -> bool {
        // cell lower end must be inside, cell upper end must not exceed:
        // testing the two rational endpoints c/m and (c+1)/m via the shared
        // exact comparator, shifting the numerator by k*m.
        t.box_axis_check(0, c - k * m, m, true) && t.box_axis_upper_ok(0, c + 1 - k * m, m)
    }

    fn count_in_cell_1d(&self, ids: &[u32], t: &ScaledTranslate, k: i64) -> u64 {
        let below = |threshold_is_hi: bool| {
            ids.partition_point(|&id| {
                let (p, q) = self.coords_of(id as usize);
                let num = p[0] as i64 - k * q as i64;
                t.below_threshold(0, num, q as i64, threshold_is_hi)
            })
        };
        (below(true) - below(false)) as u64
    }

    fn count_translate_nd(&self, t: &ScaledTranslate) -> u64 {
        let m = self.index.m as i64;
        // per-axis wrapped cell ranges from the covering intervals
        let mut axis_cells: Vec<Vec<usize>> = Vec::with_capacity(self.n);
        for axis in 0..self.n {
            let (lo, hi) = t.cover(axis);
            let c_lo = (lo * m as f64).floor() as i64 - 1;
            let c_hi = (hi * m as f64).floor() as i64 + 1;
            let cells: Vec<usize> = if c_hi - c_lo + 1 >= m {
                (0..m as usize).collect()
            } else {
                (c_lo..=c_hi).map(|c| c.rem_euclid(m) as usize).collect()
            };
            axis_cells.push(cells);
        }
        let mut total = 0u64;
        let mut odo = vec![0usize; self.n];
        'outer: loop {
            let mut lin = 0usize;
            for axis in 0..self.n {
                lin = lin * self.index.m + axis_cells[axis][odo[axis]];
            }
            for &id in self.cell_ids(lin) {
                let (p, q) = self.coords_of(id as usize);
                if t.contains_wrapped(p.iter().map(|&v| v as i64), q as i64) {
                    total += 1;
                }
            }
            // odometer
            let mut axis = self.n;
            loop {
                if axis == 0 {
                    break 'outer;
                }
                axis -= 1;
                odo[axis] += 1;
                if odo[axis] < axis_cells[axis].len() {
                    break;
                }
                odo[axis] = 0;
            }
        }
        total
    }

    fn cell_ids(&self, lin: usize) -> &[u32] {
        let a = self.index.cell_start[lin] as usize;
        let b = self.index.cell_start[lin + 1] as usize;
        &self.index.ids[a..b]
    }

    /// Candidate ids in the cells covering the translate, without the
    /// membership filter; used by boundary-margin audits.
    pub fn candidates_near(&self, t: &ScaledTranslate) -> Vec<u32> {
        let m = self.index.m as i64;
        let mut out = Vec::new();
        let mut cells: Vec<usize> = Vec::new();
        let mut axis_cells: Vec<Vec<usize>> = Vec::with_capacity(self.n);
        for axis in 0..self.n {
            let (lo, hi) = t.cover(axis);
            let c_lo = (lo * m as f64).floor() as i64 - 1;
            let c_hi = (hi * m as f64).floor() as i64 + 1;
            let list: Vec<usize> = if c_hi - c_lo + 1 >= m {
                (0..m as usize).collect()
            } else {
                (c_lo..=c_hi).map(|c| c.rem_euclid(m) as usize).collect()
            };
            axis_cells.push(list);
        }
        let mut odo = vec![0usize; self.n];
        'outer: loop {
            let mut lin = 0usize;
            for axis in 0..self.n {
                lin = lin * self.index.m + axis_cells[axis][odo[axis]];
            }
            cells.push(lin);
            let mut axis = self.n;
            loop {
                if axis == 0 {
                    break 'outer;
                }
                axis -= 1;
                odo[axis] += 1;
                if odo[axis] < axis_cells[axis].len() {
                    break;
                }
                odo[axis] = 0;
            }
        }
        cells.sort_unstable();
        cells.dedup();
        for lin in cells {
            out.extend_from_slice(self.cell_ids(lin));
        }
        out
    }

    /// Permutation of point indices sorted by exact fraction value
    /// (lexicographic across axes).
    pub fn sorted_by_value(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = (0..self.len() as u32).collect();
        ids.par_sort_unstable_by(|&a, &b| self.cmp_points(a, b));
        ids
    }

    #[inline]
    fn cmp_points(&self, a: u32, b: u32) -> Ordering {
        let (pa, qa) = self.coords_of(a as usize);
        let (pb, qb) = self.coords_of(b as usize);
        for axis in 0..self.n {
            let lhs = pa[axis] as u64 * qb as u64;
            let rhs = pb[axis] as u64 * qa as u64;
            match lhs.cmp(&rhs) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    /// CSV export: header `p1,...,pn,q`, integers only.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.n).map(|i| format!("p{i}")).collect();
        writeln!(w, "{},q", header.join(","))?;
        let mut line = String::new();
        for i in 0..self.len() {
            let (p, q) = self.coords_of(i);
            line.clear();
            for v in p {
                line.push_str(&v.to_string());
                line.push(',');
            }
            line.push_str(&q.to_string());
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Writes all primitive points of one level `q` into `chunk` in
/// lexicographic order; returns the number of points written.
fn fill_level(n: usize, q: u32, chunk: &mut [u32]) -> usize {
    let mut written = 0usize;
    let mut prefix = vec![0u32; n];
    fill_rec(n, q, 0, q as u64, &mut prefix, chunk, &mut written);
    written
}

fn fill_rec(
    n: usize,
    q: u32,
    axis: usize,
    g: u64,
    prefix: &mut [u32],
    chunk: &mut [u32],
    written: &mut usize,
) {
    if axis == n - 1 {
        if g == 1 {
            // prefix already coprime with q: every trailing coordinate works
            for p in 0..q {
                prefix[axis] = p;
                chunk[*written * n..(*written + 1) * n].copy_from_slice(prefix);
                *written += 1;
            }
        } else {
            for p in 0..q {
                if num_integer::gcd(p as u64, g) == 1 {
                    prefix[axis] = p;
                    chunk[*written * n..(*written + 1) * n].copy_from_slice(prefix);
                    *written += 1;
                }
            }
        }
        return;
    }
    for p in 0..q {
        prefix[axis] = p;
        fill_rec(
            n,
            q,
            axis + 1,
            num_integer::gcd(g, p as u64),
            prefix,
            chunk,
            written,
        );
    }
}

fn build_index(n: usize, coords: &[u32], qs: &[u32], rho: f64) -> GridIndex {
    let per_axis = if rho >= 1.0 {
        1
    } else {
        ((1.0 / rho) as u64).clamp(1, MAX_CELLS_PER_AXIS)
    };
    let cell_budget = (MAX_CELLS as f64).powf(1.0 / n as f64) as u64;
    let m = per_axis.min(cell_budget).max(1) as usize;
    let cells = m.pow(n as u32);
    let total = qs.len();

    let cell_of = |i: usize| -> usize {
        let mut lin = 0usize;
        let q = qs[i] as u64;
        for axis in 0..n {
            let c = (coords[i * n + axis] as u64 * m as u64 / q) as usize;
            lin = lin * m + c;
        }
        lin
    };

    let mut counts = vec![0u32; cells + 1];
    for i in 0..total {
        counts[cell_of(i) + 1] += 1;
    }
    for c in 0..cells {
        counts[c + 1] += counts[c];
    }
    let cell_start = counts.clone();
    let mut ids = vec![0u32; total];
    let mut cursor = cell_start.clone();
    for i in 0..total {
        let c = cell_of(i);
        ids[cursor[c] as usize] = i as u32;
        cursor[c] += 1;
    }

    // sort each cell by exact fraction value so 1-D queries can bisect
    let mut slices: Vec<&mut [u32]> = Vec::with_capacity(cells);
    let mut tail: &mut [u32] = &mut ids;
    let mut prev = 0u32;
    for c in 0..cells {
        let len = (cell_start[c + 1] - prev) as usize;
        let (head, rest) = tail.split_at_mut(len);
        slices.push(head);
        tail = rest;
        prev = cell_start[c + 1];
    }
    slices.into_par_iter().for_each(|slice| {
        slice.sort_unstable_by(|&a, &b| {
            for axis in 0..n {
                let lhs = coords[a as usize * n + axis] as u64 * qs[b as usize] as u64;
                let rhs = coords[b as usize * n + axis] as u64 * qs[a as usize] as u64;
                match lhs.cmp(&rhs) {
                    Ordering::Equal => continue,
                    other => return other,
                }
            }
            Ordering::Equal
        });
    });

    GridIndex {
        m,
        rho,
        cell_start,
        ids,
    }
}
