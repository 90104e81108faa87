use super::{max_abs, EdgeWeights, LabelNoiseError, MaxCutConfig, NoiseScoreResult};

/// Largest graph the dense single-node solver accepts.
pub const SINGLE_NODE_LIMIT: usize = 20_000;

/// Single-node local search.
///
/// With `v[i] = -1` inside `N` and `+1` outside, moving node `i` across the
/// cut changes the objective by `v[i] * (s[i] - lambda)`. Each step moves the
/// node with the largest positive gain (lowest index on ties) and updates
/// every score in O(n). The objective strictly increases, so the search
/// stops at a local optimum. At most `max_iters * n` moves are made.
pub fn run_single_node(
    weights: &impl EdgeWeights,
    config: &MaxCutConfig,
) -> Result<NoiseScoreResult, LabelNoiseError> {
    config.validate()?;
    let n = weights.len();
    if n > SINGLE_NODE_LIMIT {
        return Err(LabelNoiseError::TooLarge {
            n,
            limit: SINGLE_NODE_LIMIT,
        });
    }
    let mut scores = weights.row_sums();
    let scale = max_abs(&scores);
    let lambda_abs = config.lambda * scale;
    // gains at rounding level must not count as improvements
    let min_gain = 1e-12 * scale;
    let budget = config.max_iters.saturating_mul(n.max(1));

    let mut inside = vec![false; n];
    let mut objective = 0.0f64;
    let mut trace = Vec::new();
    let mut converged = false;
    while trace.len() < budget {
        let mut best: Option<(usize, f64)> = None;
        for (i, &s) in scores.iter().enumerate() {
            let gain = if inside[i] { lambda_abs - s } else { s - lambda_abs };
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let Some((k, gain)) = best.filter(|&(_, g)| g > min_gain) else {
            converged = true;
            break;
        };
        let sign = if inside[k] { 2.0 } else { -2.0 };
        inside[k] = !inside[k];
        for (i, s) in scores.iter_mut().enumerate() {
            if i != k {
                *s += sign * weights.weight(i, k);
            }
        }
        objective += gain;
        trace.push(objective);
    }
    if !converged {
        converged = scores
            .iter()
            .zip(&inside)
            .all(|(&s, &ins)| (if ins { lambda_abs - s } else { s - lambda_abs }) <= min_gain);
    }

    Ok(NoiseScoreResult {
        noisy_set: (0..n).filter(|&i| inside[i]).collect(),
        scores,
        iterations: trace.len(),
        converged,
        objective_trace: trace,
    })
}
