//! Grid search followed by Nelder–Mead refinement.
//!
//! The objectives here contain absolute values, so they are not smooth
//! everywhere; a simplex method needs no gradients and copes with kinks.

/// Options for [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Grid points per coordinate for the coarse scan.
    pub grid_points: usize,
    pub max_iterations: usize,
    /// Stop when the spread of simplex values and the simplex diameter
    /// both fall below this.
    pub convergence: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_points: 64,
            max_iterations: 20_000,
            convergence: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub value: f64,
    /// Best value seen on the coarse grid, before refinement.
    pub grid_value: f64,
    pub evaluations: usize,
}

/// Maximizes `f` over the box `lower[i] <= x[i] < upper[i]`: an exhaustive
/// scan over `grid_points` evenly spaced points per coordinate, then
/// Nelder–Mead started at the best grid point with one grid cell as the
/// initial step. The refinement is unconstrained; callers pass periodic
/// objectives.
pub fn maximize<F>(f: F, lower: &[f64], upper: &[f64], config: &SearchConfig) -> SearchResult
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(lower.len(), upper.len());
    assert!(config.grid_points > 0);
    let dim = lower.len();
    let n = config.grid_points;
    let steps: Vec<f64> = lower
        .iter()
        .zip(upper)
        .map(|(lo, hi)| (hi - lo) / n as f64)
        .collect();

    let mut index = vec![0usize; dim];
    let mut x = lower.to_vec();
    let mut best = (f64::NEG_INFINITY, x.clone());
    let mut evaluations = 0;
    'grid: loop {
        for d in 0..dim {
            x[d] = lower[d] + index[d] as f64 * steps[d];
        }
        let v = f(&x);
        evaluations += 1;
        if v > best.0 {
            best = (v, x.clone());
        }
        // odometer increment
        for i in index.iter_mut() {
            *i += 1;
            if *i < n {
                continue 'grid;
            }
            *i = 0;
        }
        break;
    }
    let grid_value = best.0;

    let neg = |p: &[f64]| -f(p);
    let (point, value, used) = nelder_mead(&neg, &best.1, &steps, config);
    evaluations += used;
    let (point, value) = if -value >= grid_value {
        (point, -value)
    } else {
        (best.1, grid_value)
    };
    SearchResult {
        point,
        value,
        grid_value,
        evaluations,
    }
}

/// Minimizes `f` from `start` with per-coordinate initial steps. Returns
/// the best vertex, its value and the number of evaluations.
fn nelder_mead<F>(
    f: &F,
    start: &[f64],
    step: &[f64],
    config: &SearchConfig,
) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), f(start)));
    for d in 0..dim {
        let mut p = start.to_vec();
        p[d] += step[d];
        let v = f(&p);
        simplex.push((p, v));
    }
    let mut evaluations = dim + 1;

    let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };

    for _ in 0..config.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| {
                p.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= config.convergence && diameter <= config.convergence.sqrt() {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (p, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let reflected = along(&centroid, &worst.0, -REFLECT);
        let fr = f(&reflected);
        evaluations += 1;

        if fr < simplex[0].1 {
            let expanded = along(&centroid, &worst.0, -EXPAND);
            let fe = f(&expanded);
            evaluations += 1;
            simplex[dim] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let p = along(&centroid, &reflected, CONTRACT);
            let v = f(&p);
            (p, v)
        } else {
            let p = along(&centroid, &worst.0, CONTRACT);
            let v = f(&p);
            (p, v)
        };
        evaluations += 1;
        if fc < worst.1.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let p = along(&best, &vertex.0, SHRINK);
            let v = f(&p);
            *vertex = (p, v);
        }
        evaluations += dim;
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (p, v) = simplex.swap_remove(0);
    (p, v, evaluations)
}
