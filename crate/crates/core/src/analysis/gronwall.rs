/// Outcome of [`gronwall_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    /// Largest `M₀` such that `δ⁺_t v⁽ᵐ⁾ ≤ c μ⁺_t v⁽ᵐ⁾ + d` for all
    /// `m ≤ M₀`; `None` if it already fails at `m = 0` or `v` has fewer
    /// than two entries.
    pub m0: Option<usize>,
    /// First `m` where the premise fails.
    pub first_failure: Option<usize>,
    /// `2dT exp(2cT)`.
    pub bound: f64,
    /// `v[m] ≤ bound` for every `m ≤ M₀ + 1` (only `m = 0` when `m0` is `None`).
    pub conclusion_holds: bool,
    /// Violated preconditions, reported rather than raised.
    pub precondition_violations: Vec<String>,
}

/// Checks the discrete Gronwall lemma on a concrete sequence.
pub fn gronwall_check(v: &[f64], c: f64, d: f64, dt: f64, t_final: f64) -> GronwallReport {
    let mut violations = Vec::new();
    if v.is_empty() {
        violations.push("sequence is empty".to_string());
    }
    if v.first().is_some_and(|&v0| v0 != 0.0) {
        violations.push(format!("v[0] = {} must be 0", v[0]));
    }
    if let Some(m) = v.iter().position(|&x| !(x >= 0.0)) {
        violations.push(format!("v[{m}] = {} is negative or not a number", v[m]));
    }
    if !(c > 0.0) {
        violations.push(format!("c = {c} must be positive"));
    }
    if !(d > 0.0) {
        violations.push(format!("d = {d} must be positive"));
    }
    if !(dt > 0.0) {
        violations.push(format!("dt = {dt} must be positive"));
    }
    if !(t_final > 0.0) {
        violations.push(format!("T = {t_final} must be positive"));
    }
    if c * dt >= 1.0 {
        violations.push(format!("c*dt = {} is not small", c * dt));
    }

    let premise = |m: usize| {
        let growth = (v[m + 1] - v[m]) / dt;
        let avg = 0.5 * (v[m + 1] + v[m]);
        growth <= c * avg + d
    };
    let pairs = v.len().saturating_sub(1);
    let first_failure = (0..pairs).find(|&m| !premise(m));
    let holds = first_failure.unwrap_or(pairs);
    let m0 = holds.checked_sub(1);
    if (holds as f64) * dt > t_final * (1.0 + 1e-12) {
        violations.push(format!(
            "(M0+1)*dt = {} exceeds T = {t_final}",
            holds as f64 * dt
        ));
    }
    let bound = 2.0 * d * t_final * (2.0 * c * t_final).exp();
    let last = holds.min(v.len().saturating_sub(1));
    let conclusion_holds = v.iter().take(last + 1).all(|&x| x <= bound);
    GronwallReport {
        m0,
        first_failure,
        bound,
        conclusion_holds,
        precondition_violations: violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sequence() {
        let r = gronwall_check(&[0.0; 101], 1.0, 1.0, 0.01, 1.0);
        assert_eq!(r.m0, Some(99));
        assert_eq!(r.first_failure, None);
        assert!(r.conclusion_holds);
        assert!(r.precondition_violations.is_empty());
    }

    #[test]
    fn linear_growth() {
        let (d, dt) = (0.5, 0.01);
        let v: Vec<f64> = (0..=100).map(|m| d * m as f64 * dt).collect();
        let r = gronwall_check(&v, 3.0, d, dt, 1.0);
        assert_eq!(r.first_failure, None);
        assert!(r.conclusion_holds);
    }

    #[test]
    fn preconditions_are_reported() {
        let r = gronwall_check(&[1.0, -1.0], 0.0, 0.0, 0.1, 1.0);
        assert_eq!(r.precondition_violations.len(), 4);
        let r = gronwall_check(&[], 1.0, 1.0, 0.1, 1.0);
        assert_eq!(r.m0, None);
        assert!(r.conclusion_holds);
    }

    #[test]
    fn running_past_t_breaks_the_bound() {
        let dt = 0.1;
        let v: Vec<f64> = (0..=100).map(|m| m as f64 * dt).collect();
        let r = gronwall_check(&v, 0.01, 1.0, dt, 1.0);
        assert_eq!(r.first_failure, None);
        assert!(!r.conclusion_holds);
        assert_eq!(r.precondition_violations.len(), 1);
    }
}
