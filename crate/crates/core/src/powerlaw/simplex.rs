//! Nelder–Mead minimization in two dimensions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Minimum {
    pub point: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    /// Stop once the spread of objective values across the simplex is below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tolerance: 1e-8,
            max_iterations: 20_000,
            initial_step: 0.5,
        }
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Minimizes `f` from `start`; non-finite values are treated as `+inf`.
pub(crate) fn minimize<F>(f: F, start: [f64; 2], opts: Options) -> Minimum
where
    F: Fn([f64; 2]) -> f64,
{
    let eval = |x: [f64; 2]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex = [
        start,
        [start[0] + opts.initial_step, start[1]],
        [start[0], start[1] + opts.initial_step],
    ];
    let mut values = simplex.map(eval);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        if values[2].is_finite() && values[2] - values[0] <= opts.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = eval(reflected);
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = eval(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
            continue;
        }
        if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[2] {
            let c = lerp(centroid, reflected, 0.5);
            (c, eval(c))
        } else {
            let c = lerp(centroid, simplex[2], 0.5);
            (c, eval(c))
        };
        if fc < values[2].min(fr) {
            simplex[2] = contracted;
            values[2] = fc;
            continue;
        }
        for i in 1..3 {
            simplex[i] = lerp(simplex[0], simplex[i], 0.5);
            values[i] = eval(simplex[i]);
        }
    }

    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum {
        point: simplex[best],
        value: values[best],
        iterations,
        converged,
    }
}
