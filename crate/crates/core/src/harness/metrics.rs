use crate::error::{Error, Result};

/// Moving averages over every full window.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || values.len() < window {
        return Vec::new();
    }
    values.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}

/// 1-based start of the window whose moving average is smallest (first
/// occurrence on ties): the iteration at which a noisy cost sequence is
/// taken to have reached its local optimum.
pub fn iteration_cost(costs: &[f64], window: usize) -> Result<usize> {
    if window == 0 {
        return Err(Error::invalid("window must be at least 1"));
    }
    if costs.len() < window {
        return Err(Error::invalid(format!(
            "sequence of length {} is shorter than the window {window}",
            costs.len()
        )));
    }
    let avgs = moving_average(costs, window);
    let mut best = 0;
    for (i, &a) in avgs.iter().enumerate() {
        if a < avgs[best] {
            best = i;
        }
    }
    Ok(best + 1)
}
