/// Default patience, in epochs.
pub const DEFAULT_PATIENCE: usize = 5;
/// Default improvement threshold, in accuracy units.
pub const DEFAULT_DELTA: f64 = 0.002;

/// First epoch (1-based) after which no epoch in the next `patience` exceeds
/// its accuracy by more than `delta`.
///
/// Windows running past the end of the history are checked over the epochs
/// that exist, so the final epoch always qualifies. Returns 0 for an empty
/// history.
pub fn epochs_to_converge(history: &[f64], patience: usize, delta: f64) -> usize {
    for (e, &acc) in history.iter().enumerate() {
        let end = (e + 1 + patience).min(history.len());
        if history[e + 1..end].iter().all(|&a| a <= acc + delta) {
            return e + 1;
        }
    }
    history.len()
}

/// Whether the rule has fired with a complete window, so later epochs cannot
/// change the answer.
pub fn converged_early(history: &[f64], patience: usize, delta: f64) -> bool {
    let e = epochs_to_converge(history, patience, delta);
    e > 0 && e + patience <= history.len()
}
