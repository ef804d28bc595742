/// Outcome of an ε-approximation check at one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonCheck {
    pub pass: bool,
    /// p* + ε − p̄; negative when the power condition fails.
    pub power_slack: f64,
    /// ε − (λ − μ̄); negative when the rate condition fails.
    pub rate_slack: f64,
}

/// Checks p̄ ≤ p* + ε and λ − μ̄ ≤ ε.
pub fn epsilon_check(p_bar: f64, mu_bar: f64, p_star: f64, lambda: f64, epsilon: f64) -> EpsilonCheck {
    let power_slack = p_star + epsilon - p_bar;
    let rate_slack = epsilon - (lambda - mu_bar);
    EpsilonCheck {
        pass: power_slack >= 0.0 && rate_slack >= 0.0,
        power_slack,
        rate_slack,
    }
}
