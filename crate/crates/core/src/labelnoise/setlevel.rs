use super::{max_abs, EdgeWeights, MaxCutConfig, NoiseScoreResult};

/// Outcome of one [`SetLevelSolver::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Scores were recomputed from a new noisy set.
    Updated,
    /// The thresholded set did not change (or all scores are zero).
    Converged,
}

/// Alternates thresholding the scores into a noisy set and recomputing the
/// scores against that set:
///
/// ```text
/// N    = { i : s[i] / max|s| > lambda }
/// s[i] = s0[i] - 2 * sum_{j in N} w(i, j)
/// ```
///
/// After every update, `s[i] = sum_{j not in N} w(i, j) - sum_{j in N} w(i, j)`,
/// the objective gain of moving `i` across the cut.
pub struct SetLevelSolver<'w, W: EdgeWeights> {
    weights: &'w W,
    lambda: f64,
    lambda_abs: f64,
    initial: Vec<f64>,
    scores: Vec<f64>,
    noisy: Vec<usize>,
    last_set: Option<Vec<usize>>,
    trace: Vec<f64>,
    updates: usize,
    done: bool,
}

impl<'w, W: EdgeWeights> SetLevelSolver<'w, W> {
    pub fn new(weights: &'w W, lambda: f64) -> Self {
        let initial = weights.row_sums();
        Self::with_initial(weights, lambda, initial)
    }

    /// Starts from precomputed initial scores (`sum_j w(i, j)`).
    pub fn with_initial(weights: &'w W, lambda: f64, initial: Vec<f64>) -> Self {
        let lambda_abs = lambda * max_abs(&initial);
        Self {
            weights,
            lambda,
            lambda_abs,
            scores: initial.clone(),
            initial,
            noisy: Vec::new(),
            last_set: None,
            trace: Vec::new(),
            updates: 0,
            done: false,
        }
    }

    /// Nodes whose max-abs-scaled score exceeds lambda.
    pub fn threshold(&self) -> Vec<usize> {
        let m = max_abs(&self.scores);
        if m == 0.0 {
            return Vec::new();
        }
        self.scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s / m > self.lambda)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn step(&mut self) -> Step {
        if self.done {
            return Step::Converged;
        }
        let set = self.threshold();
        if max_abs(&self.scores) == 0.0 || self.last_set.as_ref() == Some(&set) {
            self.noisy = set;
            self.done = true;
            return Step::Converged;
        }
        let gathered = self.weights.gather(&set);
        for ((s, s0), g) in self.scores.iter_mut().zip(&self.initial).zip(&gathered) {
            *s = s0 - 2.0 * g;
        }
        // sum_{j not in N} w(i, j) = (s0[i] + s[i]) / 2
        let cut: f64 = set
            .iter()
            .map(|&i| 0.5 * (self.initial[i] + self.scores[i]))
            .sum();
        self.trace.push(cut - self.lambda_abs * set.len() as f64);
        self.updates += 1;
        self.noisy = set.clone();
        self.last_set = Some(set);
        Step::Updated
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn initial_scores(&self) -> &[f64] {
        &self.initial
    }

    /// The set the current scores were computed against.
    pub fn noisy_set(&self) -> &[usize] {
        &self.noisy
    }

    pub fn lambda_abs(&self) -> f64 {
        self.lambda_abs
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn objective_trace(&self) -> &[f64] {
        &self.trace
    }

    pub fn is_converged(&self) -> bool {
        self.done
    }

    pub fn into_result(self) -> NoiseScoreResult {
        let noisy_set = if self.done { self.noisy.clone() } else { self.threshold() };
        NoiseScoreResult {
            scores: self.scores,
            noisy_set,
            iterations: self.updates,
            converged: self.done,
            objective_trace: self.trace,
        }
    }
}

/// Runs the set-level solver for at most `max_iters` score updates.
pub fn run_set_level(weights: &impl EdgeWeights, config: &MaxCutConfig) -> NoiseScoreResult {
    let mut solver = SetLevelSolver::new(weights, config.lambda);
    while solver.updates() < config.max_iters {
        if solver.step() == Step::Converged {
            break;
        }
    }
    if !solver.is_converged() {
        // one more threshold pass detects convergence at the cap
        let set = solver.threshold();
        if solver.last_set.as_ref() == Some(&set) {
            solver.step();
        }
    }
    solver.into_result()
}

#[cfg(test)]
mod tests {
    use super::super::{objective, DenseWeights};
    use super::*;

    /// w(1,2) = -0.9, w(1,3) = 0.8, w(2,3) = 0.8 (0-based below).
    fn toy() -> DenseWeights {
        DenseWeights::from_fn(3, |i, j| match (i, j) {
            (0, 1) => -0.9,
            _ => 0.8,
        })
    }

    #[test]
    fn initial_scores_of_toy() {
        let w = toy();
        let s0 = w.row_sums();
        for (got, want) in s0.iter().zip([-0.1, -0.1, 1.6]) {
            assert!((got - want).abs() < 1e-6, "{s0:?}");
        }
    }

    #[test]
    fn toy_hand_trace() {
        let w = toy();
        let mut solver = SetLevelSolver::new(&w, 0.05);
        assert_eq!(solver.threshold(), vec![2]);
        assert_eq!(solver.step(), Step::Updated);
        for (got, want) in solver.scores().iter().zip([-1.7, -1.7, 1.6]) {
            assert!((got - want).abs() < 1e-6);
        }
        assert_eq!(solver.step(), Step::Converged);
        let exact_lambda = solver.lambda_abs();
        let res = solver.into_result();
        assert_eq!(res.noisy_set, vec![2]);
        assert_eq!(res.iterations, 1);
        assert!(res.converged);
        let lambda_abs = 0.05 * 1.6;
        assert!((res.objective_trace[0] - (1.6 - lambda_abs)).abs() < 1e-6);
        assert!((objective(&w, &[2], exact_lambda) - res.objective_trace[0]).abs() < 1e-12);
    }

    #[test]
    fn clean_graph_converges_in_one_update() {
        let w = DenseWeights::from_fn(4, |_, _| -1.0);
        let res = run_set_level(&w, &MaxCutConfig::default());
        assert!(res.noisy_set.is_empty());
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert!(res.scores.iter().all(|&s| s == -3.0));
    }

    #[test]
    fn zero_graph_stops_immediately() {
        let w = DenseWeights::from_fn(5, |_, _| 0.0);
        let res = run_set_level(&w, &MaxCutConfig::default());
        assert!(res.noisy_set.is_empty());
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn max_iters_backstop() {
        let w = toy();
        let cfg = MaxCutConfig {
            max_iters: 1,
            ..Default::default()
        };
        let res = run_set_level(&w, &cfg);
        assert_eq!(res.iterations, 1);
        assert!(res.converged);
        assert_eq!(res.noisy_set, vec![2]);
    }
}
