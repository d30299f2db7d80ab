//! Dense linear assignment.
//!
//! Shortest-augmenting-path Hungarian method with row/column potentials,
//! O(n²·m) for an `n × m` matrix with `n ≤ m`. Wider-than-tall matrices are
//! solved transposed. Infinite costs are allowed; they are replaced by a
//! finite value larger than any all-finite assignment.

/// Row-major dense cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost matrix");
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transposed(&self) -> CostMatrix {
        CostMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }
}

/// Optimal assignment: every row of the shorter side is assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column of each row; `None` only when there are more rows than columns.
    pub row_to_col: Vec<Option<usize>>,
    /// Sum of the original costs of the assigned cells.
    pub cost: f64,
}

impl Assignment {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col.iter().enumerate().filter_map(|(i, c)| c.map(|j| (i, j)))
    }
}

/// Solves the rectangular linear assignment problem exactly.
pub fn solve(costs: &CostMatrix) -> Assignment {
    if costs.rows > costs.cols {
        let t = solve(&costs.transposed());
        let mut row_to_col = vec![None; costs.rows];
        for (j, i) in t.pairs() {
            row_to_col[i] = Some(j);
        }
        return Assignment { row_to_col, cost: t.cost };
    }
    let (n, m) = (costs.rows, costs.cols);
    if n == 0 {
        return Assignment { row_to_col: Vec::new(), cost: 0.0 };
    }

    let max_finite = costs.data.iter().filter(|c| c.is_finite()).fold(0.0f64, |a, c| a.max(c.abs()));
    let big = (max_finite + 1.0) * (2 * n + 2) as f64;
    let a = |i: usize, j: usize| {
        let c = costs.get(i, j);
        if c.is_finite() {
            c
        } else {
            big
        }
    };

    // 1-based potentials; column 0 is the virtual source of each augmentation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![f64::INFINITY; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; n];
    for j in 1..=m {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = Some(j - 1);
        }
    }
    let cost = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|j| costs.get(i, j)))
        .sum();
    Assignment { row_to_col, cost }
}

/// Greedy matching: repeatedly takes the globally cheapest remaining cell
/// whose row and column are both free, skipping cells with cost `>= limit`.
/// Ties go to the lower row, then the lower column.
pub fn greedy(costs: &CostMatrix, limit: f64) -> Vec<(usize, usize)> {
    let mut cells: Vec<(f64, usize, usize)> = (0..costs.rows)
        .flat_map(|i| (0..costs.cols).map(move |j| (i, j)))
        .map(|(i, j)| (costs.get(i, j), i, j))
        .filter(|(c, _, _)| *c < limit)
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_used = vec![false; costs.rows];
    let mut col_used = vec![false; costs.cols];
    let mut pairs = Vec::new();
    for (_, i, j) in cells {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}
