use crate::net::{ArrowOrder, OptionMutation};

use super::EngineError;

/// Dynamic search-control settings of the interpreter. Control nodes mutate
/// them during execution; backtracking past a control node restores the
/// previous values.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOptions {
    /// Arrow attempt order at a node.
    pub order: ArrowOrder,
    /// Only arrows whose evaluator value lies in this inclusive interval are
    /// attempted.
    pub range: Option<(f64, f64)>,
    /// At most this many arrows attempted per node.
    pub width: Option<u64>,
    /// When false, a failed node aborts the execution instead of retrying
    /// siblings.
    pub backtracking: bool,
    pub max_solutions: u64,
    /// Maximal solution-path length in arrows.
    pub max_depth: Option<u64>,
    /// Seed for the random order mode (ChaCha8).
    pub seed: u64,
}

impl Default for ControlOptions {
    fn default() -> Self {
        ControlOptions {
            order: ArrowOrder::Declared,
            range: None,
            width: None,
            backtracking: true,
            max_solutions: 1,
            max_depth: None,
            seed: 0,
        }
    }
}

impl ControlOptions {
    pub fn check(&self) -> Result<(), EngineError> {
        if self.width == Some(0) {
            return Err(EngineError::Config("width must be at least 1".into()));
        }
        if let Some((lo, hi)) = self.range {
            if lo > hi {
                return Err(EngineError::Config(format!(
                    "range lower bound {lo} exceeds upper bound {hi}"
                )));
            }
        }
        if self.max_depth == Some(0) {
            return Err(EngineError::Config("max_depth must be at least 1".into()));
        }
        if self.max_solutions == 0 {
            return Err(EngineError::Config("max_solutions must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies one mutation, returning the updated options.
    pub fn apply(&self, mutation: &OptionMutation) -> Result<ControlOptions, EngineError> {
        let mut next = self.clone();
        match mutation {
            OptionMutation::Order(mode) => next.order = *mode,
            OptionMutation::Range(lo, hi) => next.range = Some((*lo, *hi)),
            OptionMutation::ClearRange => next.range = None,
            OptionMutation::Width(w) => next.width = Some(*w),
            OptionMutation::ClearWidth => next.width = None,
            OptionMutation::Backtracking(b) => next.backtracking = *b,
            OptionMutation::MaxSolutions(n) => next.max_solutions = *n,
            OptionMutation::MaxDepth(d) => next.max_depth = Some(*d),
            OptionMutation::ClearMaxDepth => next.max_depth = None,
            OptionMutation::Seed(s) => next.seed = *s,
        }
        next.check()?;
        Ok(next)
    }

    /// Human-readable value of the option a mutation targets, for tracing.
    pub fn describe(&self, option: &str) -> String {
        match option {
            "order" => self.order.to_string(),
            "range" => match self.range {
                Some((lo, hi)) => format!("{lo}..{hi}"),
                None => "none".to_string(),
            },
            "width" => match self.width {
                Some(w) => w.to_string(),
                None => "none".to_string(),
            },
            "backtracking" => self.backtracking.to_string(),
            "max_solutions" => self.max_solutions.to_string(),
            "max_depth" => match self.max_depth {
                Some(d) => d.to_string(),
                None => "none".to_string(),
            },
            "seed" => self.seed.to_string(),
            _ => "?".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_order_best_keeps_rest() {
        let opts = ControlOptions::default();
        let next = opts.apply(&OptionMutation::Order(ArrowOrder::Best)).unwrap();
        assert_eq!(next.order, ArrowOrder::Best);
        assert_eq!(ControlOptions { order: ArrowOrder::Declared, ..next }, opts);
    }

    #[test]
    fn zero_width_rejected() {
        let err = ControlOptions::default()
            .apply(&OptionMutation::Width(0))
            .unwrap_err();
        assert!(matches!(err, EngineError::Config(_)));
    }

    #[test]
    fn inverted_range_rejected() {
        let err = ControlOptions::default()
            .apply(&OptionMutation::Range(6.0, 1.0))
            .unwrap_err();
        assert!(matches!(err, EngineError::Config(_)));
    }
}
