//! Execution policy for the data-parallel loops.
//!
//! Every hot loop in the crate (kernel tables, operator assembly, 3-D
//! quadratic forms, probes) goes through [`Exec::map`]. With the `parallel`
//! feature the `Parallel` policy fans out over rayon's pool; without it both
//! policies run the same sequential loop, so results are identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Map `f` over `0..n`, preserving index order in the output.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Sum of `f(i)` over `0..n`, accumulated in index order so the result
    /// does not depend on the policy or the thread count.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        self.map(n, f).iter().sum()
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let f = |i: usize| (i as f64).sqrt();
        let a = Exec::Sequential.map(1000, f);
        let b = Exec::Parallel.map(1000, f);
        assert_eq!(a, b);
        assert_eq!(Exec::Sequential.sum(1000, f), Exec::Parallel.sum(1000, f));
    }
}
