//! Local four-point (cubic Lagrange) interpolation on uniform grids.

/// How the stencil treats nodes past the last grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightEdge {
    /// Ghost nodes carry the value zero.
    Zero,
    /// The stencil slides left to stay inside the grid.
    Shift,
}

/// Uniform nodes `start + i·h`, `i = 0..n`, for an even function of x.
/// Negative abscissae are folded by symmetry, so `start` must be `0` or `h/2`.
#[derive(Debug, Clone, Copy)]
pub struct EvenGrid {
    pub start: f64,
    pub h: f64,
    pub n: usize,
    pub right: RightEdge,
}

impl EvenGrid {
    pub fn new(start: f64, h: f64, n: usize, right: RightEdge) -> Self {
        assert!(n >= 4, "cubic interpolation needs at least four nodes");
        assert!(
            start == 0.0 || (start - 0.5 * h).abs() < 1e-14 * h,
            "grid must be node- or cell-centred at the origin"
        );
        Self { start, h, n, right }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.h
    }

    pub fn end(&self) -> f64 {
        self.node(self.n - 1)
    }

    /// Map a possibly negative stencil index onto a real node index via the
    /// even reflection about x = 0.
    fn fold(&self, k: i64) -> Option<usize> {
        let k = if k >= 0 {
            k
        } else if self.start == 0.0 {
            -k
        } else {
            -k - 1
        };
        let k = k as usize;
        (k < self.n).then_some(k)
    }

    /// Stencil indices and Lagrange weights at `x`; `None` entries are ghost
    /// nodes with value zero.
    pub fn stencil(&self, x: f64) -> [(Option<usize>, f64); 4] {
        let x = x.abs();
        let t = (x - self.start) / self.h;
        let mut i0 = t.floor() as i64 - 1;
        if self.right == RightEdge::Shift {
            i0 = i0.min(self.n as i64 - 4);
        }
        let s = t - i0 as f64;
        // Lagrange basis on nodes 0,1,2,3 evaluated at s.
        let w = [
            -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
            s * (s - 2.0) * (s - 3.0) / 2.0,
            -s * (s - 1.0) * (s - 3.0) / 2.0,
            s * (s - 1.0) * (s - 2.0) / 6.0,
        ];
        let mut out = [(None, 0.0); 4];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = (self.fold(i0 + j as i64), w[j]);
        }
        out
    }

    pub fn eval(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        if self.right == RightEdge::Zero && x.abs() >= self.end() + 2.0 * self.h {
            return 0.0;
        }
        self.stencil(x).iter().filter_map(|&(k, w)| k.map(|k| w * values[k])).sum()
    }
}
