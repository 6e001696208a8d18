//! Derivative-free Nelder-Mead simplex minimizer with restarts.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead<T> {
    /// Stop when the spread of objective values across the simplex falls
    /// to this level.
    pub ftol: T,
    /// Iteration cap for a single simplex run.
    pub max_iterations: usize,
    /// Fresh simplices built around the incumbent after the first run.
    pub restarts: usize,
    /// Edge length of the initial simplex.
    pub initial_step: T,
}

impl<T: Real> Default for NelderMead<T> {
    fn default() -> Self {
        Self {
            ftol: T::lit(1e-9),
            max_iterations: 5000,
            restarts: 3,
            initial_step: T::lit(0.25),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    /// The final run ended on the tolerance, not the iteration cap.
    pub converged: bool,
}

struct Run<T> {
    x: Vec<T>,
    value: T,
    iterations: usize,
    converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl<T: Real> NelderMead<T> {
    pub fn minimize<F>(&self, mut objective: F, x0: &[T]) -> Minimum<T>
    where
        F: FnMut(&[T]) -> T,
    {
        let mut evaluations = 0usize;
        let mut eval = |x: &[T]| {
            evaluations += 1;
            let v = objective(x);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };

        let mut best = self.run(&mut eval, x0, self.initial_step);
        let mut iterations = best.iterations;
        for restart in 0..self.restarts {
            // alternate the simplex orientation between restarts
            let step = if restart % 2 == 0 {
                -self.initial_step
            } else {
                self.initial_step
            };
            let next = self.run(&mut eval, &best.x, step);
            iterations += next.iterations;
            let gain = best.value - next.value;
            let converged = next.converged;
            if next.value <= best.value {
                best = next;
            }
            best.converged = converged;
            if converged && gain <= self.ftol {
                break;
            }
        }
        Minimum {
            x: best.x,
            value: best.value,
            iterations,
            evaluations,
            converged: best.converged,
        }
    }

    fn run<F>(&self, eval: &mut F, x0: &[T], step: T) -> Run<T>
    where
        F: FnMut(&[T]) -> T,
    {
        let dim = x0.len();
        let mut simplex: Vec<Vec<T>> = Vec::with_capacity(dim + 1);
        simplex.push(x0.to_vec());
        for i in 0..dim {
            let mut v = x0.to_vec();
            v[i] = v[i] + step;
            simplex.push(v);
        }
        let mut values: Vec<T> = simplex.iter().map(|v| eval(v)).collect();

        let mut iterations = 0;
        let mut converged = false;
        let mut order: Vec<usize> = (0..=dim).collect();
        loop {
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
            let best = order[0];
            let worst = order[dim];
            let spread = values[worst] - values[best];
            if values[worst].is_finite() && spread <= self.ftol {
                converged = true;
                break;
            }
            if iterations >= self.max_iterations {
                break;
            }
            iterations += 1;

            let second_worst = order[dim.saturating_sub(1)];
            let mut centroid = vec![T::zero(); dim];
            for &i in &order[..dim] {
                for (c, &x) in centroid.iter_mut().zip(&simplex[i]) {
                    *c = *c + x;
                }
            }
            let inv = T::one() / T::count(dim);
            centroid.iter_mut().for_each(|c| *c = *c * inv);

            let along = |coef: f64, from: &[T]| -> Vec<T> {
                centroid
                    .iter()
                    .zip(from)
                    .map(|(&c, &x)| c + T::lit(coef) * (x - c))
                    .collect()
            };

            let reflected = along(-REFLECT, &simplex[worst]);
            let f_reflected = eval(&reflected);
            if f_reflected < values[best] {
                let expanded = along(EXPAND, &reflected);
                let f_expanded = eval(&expanded);
                if f_expanded < f_reflected {
                    simplex[worst] = expanded;
                    values[worst] = f_expanded;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = f_reflected;
                }
                continue;
            }
            if f_reflected < values[second_worst] {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
                continue;
            }
            let (contracted, f_contracted, accept) = if f_reflected < values[worst] {
                let c = along(CONTRACT, &reflected);
                let f = eval(&c);
                let ok = f <= f_reflected;
                (c, f, ok)
            } else {
                let c = along(CONTRACT, &simplex[worst]);
                let f = eval(&c);
                let ok = f < values[worst];
                (c, f, ok)
            };
            if accept {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
                continue;
            }
            let anchor = simplex[best].clone();
            for i in 0..=dim {
                if i == best {
                    continue;
                }
                for (x, &a) in simplex[i].iter_mut().zip(&anchor) {
                    *x = a + T::lit(SHRINK) * (*x - a);
                }
                values[i] = eval(&simplex[i]);
            }
        }
        let best = (0..=dim)
            .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
            .unwrap_or(0);
        Run {
            x: simplex.swap_remove(best),
            value: values[best],
            iterations,
            converged,
        }
    }
}
