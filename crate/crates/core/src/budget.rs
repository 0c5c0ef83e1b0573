/// Resource limits shared by the search procedures.
///
/// A search that hits one of these limits before its theoretical bound
/// reports an inconclusive result rather than a positive answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest power automaton (number of state vectors) that may be explored.
    pub power_cap: usize,
    /// Largest number of subset states explored by the delay construction.
    pub state_cap: usize,
    /// Largest number of delay configurations explored by the transducer check.
    pub config_cap: usize,
    /// Initial delay threshold for the decomposition (defaults to `4·M_W·|Q|`).
    pub threshold: Option<u64>,
    /// Word length used to estimate the valuedness (defaults to `|Q|²`).
    pub len_bound: Option<usize>,
    /// Valuedness override, skipping the estimate.
    pub ell: Option<usize>,
    /// Cap on delay norms in the transducer check, below its theoretical bound.
    pub norm_cap: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            power_cap: 1_000_000,
            state_cap: 200_000,
            config_cap: 2_000_000,
            threshold: None,
            len_bound: None,
            ell: None,
            norm_cap: None,
        }
    }
}

impl Budget {
    /// Default limits with every cap scaled by `factor`.
    pub fn scaled(factor: usize) -> Self {
        let d = Self::default();
        Self {
            power_cap: d.power_cap.saturating_mul(factor),
            state_cap: d.state_cap.saturating_mul(factor),
            config_cap: d.config_cap.saturating_mul(factor),
            ..d
        }
    }
}
