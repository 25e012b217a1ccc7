//! The extended-backtracking interpreter.
//!
//! Execution traverses the control network from the main subnet's initial
//! node, runs the primitive chain on each arrow it takes, and backtracks
//! chronologically on failure — including back through subnet calls. All
//! variable bindings, frames, and option changes are recorded on a trail and
//! undone when a branch is abandoned.
//!
//! Random arrow ordering uses ChaCha8 seeded from [`ControlOptions::seed`],
//! so traces are reproducible across platforms.

mod env;
mod exec;
mod options;
mod order;
mod registry;
mod value;

pub use env::{Environment, Frame, Trail};
pub use exec::{
    apply_control_node, execute, execute_with, ExecStats, ExecutionResult, Outcome, Solution, Step,
};
pub use options::ControlOptions;
pub use order::attempt_order;
pub use registry::{base_registry, EvalFn, PrimCtx, PrimError, PrimFn, PrimitiveRegistry, RegistryError};
pub use value::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("unregistered primitive `{0}`")]
    UnregisteredPrimitive(String),
    #[error("unregistered evaluator `{0}`")]
    UnregisteredEvaluator(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("primitive `{name}` aborted: {message}")]
    PrimitiveAbort { name: String, message: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, SourceProgram};
    use crate::net::ControlNetwork;

    fn net(src: &str) -> ControlNetwork {
        parse(&SourceProgram::inline(src)).expect("test program parses")
    }

    fn reg() -> PrimitiveRegistry {
        let mut reg = base_registry();
        reg.register("bind", |ctx, args| {
            let [Value::Str(name), value] = args else {
                return Err(PrimError::new("bind takes a name and a value"));
            };
            ctx.set(name, value.clone());
            Ok(true)
        })
        .unwrap();
        reg
    }

    #[test]
    fn smallest_run_succeeds_without_backtracking() {
        let net = net("SUBNET Main() INIT s0 NODE fin FINISH ARROW s0 -> fin : ;");
        let r = execute(&net, &reg(), &ControlOptions::default(), &[]).unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert_eq!(r.solutions.len(), 1);
        assert_eq!(r.solutions[0].steps.len(), 1);
        assert_eq!(r.stats.backtracks, 0);
    }

    const TWO_ARROWS: &str = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
                              ARROW s0 -> fin : fail ;\nARROW s0 -> fin : ;";

    #[test]
    fn declared_order_backtracks_once() {
        let r = execute(&net(TWO_ARROWS), &reg(), &ControlOptions::default(), &[]).unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert_eq!(r.stats.backtracks, 1);
        assert_eq!(r.solutions[0].steps[0].arrow_index, 1);
    }

    #[test]
    fn forbidden_backtracking_fails_instead() {
        let opts = ControlOptions { backtracking: false, ..Default::default() };
        let r = execute(&net(TWO_ARROWS), &reg(), &opts, &[]).unwrap();
        assert_eq!(r.outcome, Outcome::Failure);
        assert!(r.solutions.is_empty());
    }

    #[test]
    fn chain_bindings_visible_in_solution() {
        let src = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
                   ARROW s0 -> fin : bind(\"x\", 3), bind(\"y\", 4) ;";
        let r = execute(&net(src), &reg(), &ControlOptions::default(), &[]).unwrap();
        assert_eq!(r.solutions[0].globals["x"], Value::Int(3));
        assert_eq!(r.solutions[0].globals["y"], Value::Int(4));
    }

    #[test]
    fn failed_chain_bindings_are_undone() {
        let src = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
                   ARROW s0 -> fin : bind(\"x\", 3), fail ;\nARROW s0 -> fin : ;";
        let mut out = Vec::new();
        let r = execute_with(
            &net(src),
            &reg(),
            &ControlOptions::default(),
            &[],
            Some(&mut out),
            true,
        )
        .unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert!(!r.solutions[0].globals.contains_key("x"));
    }

    const SUBNET_CALL: &str = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
        ARROW s0 -> fin : call Sub(7), check ;\n\
        SUBNET Sub(n)\nINIT t0\nNODE tf FINISH\n\
        ARROW t0 -> tf : bind(\"route\", \"first\") ;\n\
        ARROW t0 -> tf : bind(\"route\", \"second\") ;";

    #[test]
    fn subnet_finish_makes_call_succeed() {
        let mut reg = reg();
        reg.register("check", |_, _| Ok(true)).unwrap();
        let r = execute(&net(SUBNET_CALL), &reg, &ControlOptions::default(), &[]).unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert_eq!(r.solutions[0].globals["route"], Value::Str("first".into()));
    }

    #[test]
    fn later_failure_backtracks_through_subnet() {
        // `check` fails on the subnet's first alternative, forcing the engine
        // to retry Sub's remaining choices after Sub already succeeded once.
        let mut reg = reg();
        reg.register("check", |ctx, _| {
            Ok(ctx.get("route").and_then(Value::as_str) == Some("second"))
        })
        .unwrap();
        let r = execute(&net(SUBNET_CALL), &reg, &ControlOptions::default(), &[]).unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert_eq!(r.solutions[0].globals["route"], Value::Str("second".into()));
    }

    #[test]
    fn exhausted_subnet_fails_the_call() {
        let src = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
                   ARROW s0 -> fin : call Sub() ;\n\
                   SUBNET Sub()\nINIT t0\nNODE tf FINISH\nARROW t0 -> tf : fail ;";
        let r = execute(&net(src), &reg(), &ControlOptions::default(), &[]).unwrap();
        assert_eq!(r.outcome, Outcome::Failure);
    }

    #[test]
    fn control_node_changes_and_restores_options() {
        // The control node forbids backtracking on the first branch; failing
        // past it restores the option, so the second branch still backtracks.
        let src = "SUBNET Main()\nINIT s0\nNODE c CONTROL {order=best}\nNODE fin FINISH\n\
                   ARROW s0 -> c : ;\nARROW c -> fin [eval=zero] : fail ;\n\
                   ARROW c -> fin [eval=zero] : ;";
        let mut reg = reg();
        reg.register_evaluator("zero", |_, _| Ok(0.0)).unwrap();
        let mut out = Vec::new();
        let r = execute_with(
            &net(src),
            &reg,
            &ControlOptions::default(),
            &[],
            Some(&mut out),
            true,
        )
        .unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        let trace = String::from_utf8(out).unwrap();
        assert!(trace.contains("OPTION order declared->best"), "{trace}");
    }

    #[test]
    fn control_node_width_zero_is_config_error() {
        let src = "SUBNET Main()\nINIT s0\nNODE c CONTROL {width=0}\nNODE fin FINISH\n\
                   ARROW s0 -> c : ;\nARROW c -> fin : ;";
        let err = execute(&net(src), &reg(), &ControlOptions::default(), &[]).unwrap_err();
        assert!(matches!(err, EngineError::Config(_)));
    }

    #[test]
    fn unregistered_primitive_is_setup_error() {
        let src = "SUBNET Main() INIT s0 NODE fin FINISH ARROW s0 -> fin : nosuch ;";
        let err = execute(&net(src), &reg(), &ControlOptions::default(), &[]).unwrap_err();
        assert_eq!(err, EngineError::UnregisteredPrimitive("nosuch".into()));
    }

    #[test]
    fn aborting_primitive_stops_with_diagnostic() {
        let src = "SUBNET Main() INIT s0 NODE fin FINISH ARROW s0 -> fin : boom ;";
        let mut reg = reg();
        reg.register("boom", |_, _| Err(PrimError::new("kaput"))).unwrap();
        let err = execute(&net(src), &reg, &ControlOptions::default(), &[]).unwrap_err();
        assert_eq!(
            err,
            EngineError::PrimitiveAbort { name: "boom".into(), message: "kaput".into() }
        );
    }

    #[test]
    fn max_depth_limits_solution_length() {
        // s0 -> s0 loop plus an exit; depth-first would loop forever without
        // the depth bound.
        let src = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
                   ARROW s0 -> s0 : ;\nARROW s0 -> fin : ;";
        let opts = ControlOptions { max_depth: Some(4), max_solutions: 10, ..Default::default() };
        let r = execute(&net(src), &reg(), &opts, &[]).unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        assert!(r.solutions.iter().all(|s| s.steps.len() <= 4));
        assert!(!r.solutions.is_empty());
    }

    #[test]
    fn max_solutions_bounds_solution_count() {
        let src = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
                   ARROW s0 -> fin : ;\nARROW s0 -> fin : ;\nARROW s0 -> fin : ;";
        let opts = ControlOptions { max_solutions: 2, ..Default::default() };
        let r = execute(&net(src), &reg(), &opts, &[]).unwrap();
        assert_eq!(r.solutions.len(), 2);
    }

    #[test]
    fn recursive_subnet_with_decreasing_argument_terminates() {
        let src = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
                   ARROW s0 -> fin : call Count(5) ;\n\
                   SUBNET Count(n)\nINIT c0\nNODE cf FINISH\n\
                   ARROW c0 -> cf : eq(n, 0) ;\n\
                   ARROW c0 -> cf : gt(n, 0), bind(\"m\", n), dec, call Count(m) ;";
        // dec rebinds m := n - 1 through the context
        let mut reg = reg();
        reg.register("dec", |ctx, _| {
            let m = ctx.number("m")?;
            ctx.set("m", Value::Int(m as i64 - 1));
            Ok(true)
        })
        .unwrap();
        let r = execute(&net(src), &reg, &ControlOptions::default(), &[]).unwrap();
        assert_eq!(r.outcome, Outcome::Success);
        // one Main arrow + 6 Count activations (5..=0)
        assert_eq!(r.solutions[0].steps.len(), 7);
    }

    #[test]
    fn determinism_identical_runs_identical_results() {
        let src = "SUBNET Main()\nINIT s0\nNODE fin FINISH\n\
                   ARROW s0 -> fin : fail ;\nARROW s0 -> s0 : ;\nARROW s0 -> fin : ;";
        let opts = ControlOptions {
            order: crate::net::ArrowOrder::Random,
            seed: 99,
            max_depth: Some(6),
            ..Default::default()
        };
        let a = execute(&net(src), &reg(), &opts, &[]).unwrap();
        let b = execute(&net(src), &reg(), &opts, &[]).unwrap();
        assert_eq!(a, b);
    }
}
