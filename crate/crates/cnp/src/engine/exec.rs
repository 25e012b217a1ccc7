use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::net::{
    validate, Arrow, CallKind, ControlNetwork, Expr, Node, NodeKind, PrimitiveCall, Subnet,
};

use super::env::{Environment, Frame, Trail};
use super::options::ControlOptions;
use super::order::attempt_order;
use super::registry::{PrimCtx, PrimitiveRegistry};
use super::value::Value;
use super::EngineError;

/// One traversed arrow on a solution path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub subnet: String,
    pub from: String,
    pub to: String,
    /// Declaration index among the arrows leaving `from`.
    pub arrow_index: usize,
}

/// A successful traversal: the arrows taken plus the global bindings at the
/// moment the FINISH node was reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub steps: Vec<Step>,
    pub globals: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecStats {
    pub nodes_visited: u64,
    pub backtracks: u64,
    pub primitives_executed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionResult {
    pub outcome: Outcome,
    pub solutions: Vec<Solution>,
    pub stats: ExecStats,
}

/// Applies a control node's option mutations, returning the updated options.
/// The caller is responsible for trailing the old options.
pub fn apply_control_node(
    node: &Node,
    opts: &ControlOptions,
) -> Result<ControlOptions, EngineError> {
    let NodeKind::Control(mutations) = &node.kind else {
        return Err(EngineError::Internal(format!(
            "node `{}` is not a control node",
            node.id
        )));
    };
    let mut current = opts.clone();
    for m in mutations {
        current = current.apply(m)?;
    }
    Ok(current)
}

/// Executes `net` from the main subnet's initial node under `opts`.
pub fn execute(
    net: &ControlNetwork,
    registry: &PrimitiveRegistry,
    opts: &ControlOptions,
    globals: &[(String, Value)],
) -> Result<ExecutionResult, EngineError> {
    execute_with(net, registry, opts, globals, None, false)
}

/// [`execute`] with an optional trace writer and optional trail verification.
///
/// With `check_trail` set, the environment and options are snapshotted at
/// every choice point and compared after each backtrack; a mismatch is an
/// internal error.
pub fn execute_with(
    net: &ControlNetwork,
    registry: &PrimitiveRegistry,
    opts: &ControlOptions,
    globals: &[(String, Value)],
    trace: Option<&mut dyn Write>,
    check_trail: bool,
) -> Result<ExecutionResult, EngineError> {
    let report = validate(net);
    if !report.is_valid() {
        return Err(EngineError::InvalidNetwork(report.to_string().trim().to_string()));
    }
    opts.check()?;
    check_names(net, registry)?;

    let mut env = Environment::default();
    for (name, value) in globals {
        env.globals.insert(name.clone(), value.clone());
    }

    let mut machine = Machine {
        net,
        registry,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        opts: opts.clone(),
        env,
        trail: Trail::default(),
        cont: Vec::new(),
        cps: Vec::new(),
        path: Vec::new(),
        solutions: Vec::new(),
        stats: ExecStats::default(),
        trace,
        check_trail,
    };
    machine.run()
}

/// Every primitive and evaluator named by the network must be registered
/// before the first step.
fn check_names(net: &ControlNetwork, registry: &PrimitiveRegistry) -> Result<(), EngineError> {
    for sub in net.subnets.values() {
        for arrow in &sub.arrows {
            for call in &arrow.chain {
                if call.kind == CallKind::Primitive && registry.primitive(&call.name).is_none() {
                    return Err(EngineError::UnregisteredPrimitive(call.name.clone()));
                }
            }
            if let Some(eval) = &arrow.eval {
                if registry.evaluator(eval).is_none() {
                    return Err(EngineError::UnregisteredEvaluator(eval.clone()));
                }
            }
        }
    }
    Ok(())
}

/// Pending work, popped LIFO. A choice point snapshots this stack so
/// backtracking can resume from the exact continuation, including through
/// subnet calls.
#[derive(Clone, Copy)]
enum Task<'n> {
    EnterNode { subnet: &'n Subnet, node: &'n str },
    Chain { subnet: &'n Subnet, arrow: &'n Arrow, idx: usize },
}

struct ChoicePoint<'n> {
    subnet: &'n Subnet,
    node: &'n str,
    cont: Vec<Task<'n>>,
    /// (declaration index, arrow) in attempt order.
    alternatives: Vec<(usize, &'n Arrow)>,
    next_alt: usize,
    trail_mark: usize,
    path_mark: usize,
    snapshot: Option<(Environment, ControlOptions)>,
}

struct Machine<'n, 'r, 'w> {
    net: &'n ControlNetwork,
    registry: &'r PrimitiveRegistry,
    rng: ChaCha8Rng,
    opts: ControlOptions,
    env: Environment,
    trail: Trail,
    cont: Vec<Task<'n>>,
    cps: Vec<ChoicePoint<'n>>,
    path: Vec<Step>,
    solutions: Vec<Solution>,
    stats: ExecStats,
    trace: Option<&'w mut dyn Write>,
    check_trail: bool,
}

impl<'n> Machine<'n, '_, '_> {
    fn trace(&mut self, line: std::fmt::Arguments<'_>) {
        if let Some(w) = self.trace.as_deref_mut() {
            let _ = writeln!(w, "{line}");
        }
    }

    fn result(&mut self) -> ExecutionResult {
        let outcome = if self.solutions.is_empty() { Outcome::Failure } else { Outcome::Success };
        ExecutionResult {
            outcome,
            solutions: std::mem::take(&mut self.solutions),
            stats: self.stats,
        }
    }

    fn run(&mut self) -> Result<ExecutionResult, EngineError> {
        let main = self.net.subnet(&self.net.main).expect("validated");
        self.cont.push(Task::EnterNode { subnet: main, node: &main.initial });

        loop {
            let Some(task) = self.cont.pop() else {
                return Err(EngineError::Internal(
                    "continuation exhausted without reaching FINISH".into(),
                ));
            };
            let proceed = match task {
                Task::EnterNode { subnet, node } => self.enter_node(subnet, node)?,
                Task::Chain { subnet, arrow, idx } => self.step_chain(subnet, arrow, idx)?,
            };
            if !proceed {
                return Ok(self.result());
            }
        }
    }

    fn enter_node(&mut self, subnet: &'n Subnet, node_id: &'n str) -> Result<bool, EngineError> {
        self.trace(format_args!("ENTER {node_id}"));
        self.stats.nodes_visited += 1;
        let node = &subnet.nodes[node_id];

        match &node.kind {
            NodeKind::Finish => {
                if self.env.frames.is_empty() {
                    // FINISH of the main subnet: record a solution.
                    self.trace(format_args!("SOLUTION length={}", self.path.len()));
                    self.solutions.push(Solution {
                        steps: self.path.clone(),
                        globals: self.env.globals_snapshot(),
                    });
                    if self.solutions.len() as u64 >= self.opts.max_solutions {
                        return Ok(false);
                    }
                    // keep searching for more solutions
                    self.fail()
                } else {
                    // FINISH of a called subnet: the subnet call succeeds.
                    self.trail.pop_frame(&mut self.env);
                    Ok(true)
                }
            }
            NodeKind::Control(_) => {
                let new_opts = apply_control_node(node, &self.opts)?;
                if new_opts != self.opts {
                    let NodeKind::Control(muts) = &node.kind else { unreachable!() };
                    for m in muts {
                        let name = m.option_name();
                        let old = self.opts.describe(name);
                        let stepped = self.opts.apply(m)?;
                        let new = stepped.describe(name);
                        self.trace(format_args!("OPTION {name} {old}->{new}"));
                        self.trail.change_options(&mut self.opts, stepped);
                    }
                }
                self.choose_arrow(subnet, node_id)
            }
            NodeKind::Ordinary => self.choose_arrow(subnet, node_id),
        }
    }

    fn choose_arrow(&mut self, subnet: &'n Subnet, node_id: &'n str) -> Result<bool, EngineError> {
        if let Some(max_depth) = self.opts.max_depth {
            if self.path.len() as u64 >= max_depth {
                return self.fail();
            }
        }
        let declared: Vec<&'n Arrow> =
            subnet.arrows.iter().filter(|a| a.from == node_id).collect();
        let ordered = attempt_order(&declared, &self.opts, &self.env, self.registry, &mut self.rng)?;
        if ordered.is_empty() {
            return self.fail();
        }
        // Map each ordered arrow back to its declaration index for tracing.
        let alternatives: Vec<(usize, &'n Arrow)> = ordered
            .into_iter()
            .map(|arrow| {
                let idx = declared
                    .iter()
                    .position(|a| std::ptr::eq(*a, arrow))
                    .expect("arrow from this node");
                (idx, arrow)
            })
            .collect();
        let first = alternatives[0];
        self.cps.push(ChoicePoint {
            subnet,
            node: node_id,
            cont: self.cont.clone(),
            alternatives,
            next_alt: 1,
            trail_mark: self.trail.mark(),
            path_mark: self.path.len(),
            snapshot: self
                .check_trail
                .then(|| (self.env.clone(), self.opts.clone())),
        });
        self.take_arrow(subnet, first.0, first.1);
        Ok(true)
    }

    fn take_arrow(&mut self, subnet: &'n Subnet, decl_idx: usize, arrow: &'n Arrow) {
        self.trace(format_args!("TRY arrow#{decl_idx}"));
        self.path.push(Step {
            subnet: subnet.name.clone(),
            from: arrow.from.clone(),
            to: arrow.to.clone(),
            arrow_index: decl_idx,
        });
        self.cont.push(Task::EnterNode { subnet, node: &arrow.to });
        if !arrow.chain.is_empty() {
            self.cont.push(Task::Chain { subnet, arrow, idx: 0 });
        }
    }

    fn step_chain(
        &mut self,
        subnet: &'n Subnet,
        arrow: &'n Arrow,
        idx: usize,
    ) -> Result<bool, EngineError> {
        let call = &arrow.chain[idx];
        if idx + 1 < arrow.chain.len() {
            self.cont.push(Task::Chain { subnet, arrow, idx: idx + 1 });
        }
        let args = self.eval_args(call)?;
        match call.kind {
            CallKind::Primitive => {
                let registry = self.registry;
                let prim = registry.primitive(&call.name).expect("checked at setup");
                self.stats.primitives_executed += 1;
                let mut ctx = PrimCtx {
                    env: &mut self.env,
                    trail: &mut self.trail,
                    rng: &mut self.rng,
                };
                let ok = prim(&mut ctx, &args).map_err(|e| EngineError::PrimitiveAbort {
                    name: call.name.clone(),
                    message: e.0,
                })?;
                let rendered: Vec<String> = args.iter().map(Value::to_string).collect();
                self.trace(format_args!(
                    "PRIM {}({}) -> {}",
                    call.name,
                    rendered.join(", "),
                    if ok { "ok" } else { "fail" }
                ));
                if ok {
                    Ok(true)
                } else {
                    self.fail()
                }
            }
            CallKind::SubnetCall => {
                let callee = self.net.subnet(&call.name).expect("validated");
                let mut frame = Frame {
                    subnet: callee.name.clone(),
                    declared: callee
                        .params
                        .iter()
                        .chain(&callee.locals)
                        .cloned()
                        .collect(),
                    bindings: Default::default(),
                };
                for (param, value) in callee.params.iter().zip(args) {
                    frame.bindings.insert(param.clone(), value);
                }
                self.trail.push_frame(&mut self.env, frame);
                self.cont.push(Task::EnterNode { subnet: callee, node: &callee.initial });
                Ok(true)
            }
        }
    }

    fn eval_args(&self, call: &PrimitiveCall) -> Result<Vec<Value>, EngineError> {
        call.args.iter().map(|e| self.eval_expr(e)).collect()
    }

    fn eval_expr(&self, expr: &Expr) -> Result<Value, EngineError> {
        match expr {
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Str(s) => Ok(Value::Str(s.clone())),
            Expr::Var(name) => self
                .env
                .get(name)
                .cloned()
                .ok_or_else(|| EngineError::UnboundVariable(name.clone())),
            Expr::Neg(inner) => match self.eval_expr(inner)? {
                Value::Int(n) => Ok(Value::Int(-n)),
                Value::Float(x) => Ok(Value::Float(-x)),
                other => Err(EngineError::Internal(format!(
                    "cannot negate non-numeric value `{other}`"
                ))),
            },
        }
    }

    /// Chronological backtracking: undo to the most recent choice point and
    /// try its next alternative. Returns `Ok(false)` when the search space is
    /// exhausted or backtracking is forbidden.
    fn fail(&mut self) -> Result<bool, EngineError> {
        loop {
            if !self.opts.backtracking {
                return Ok(false);
            }
            let Some(mut cp) = self.cps.pop() else {
                return Ok(false);
            };
            self.trail.undo_to(cp.trail_mark, &mut self.env, &mut self.opts);
            self.path.truncate(cp.path_mark);
            self.stats.backtracks += 1;
            self.trace(format_args!("BACKTRACK to {}", cp.node));
            if let Some((env, opts)) = &cp.snapshot {
                if env != &self.env || opts != &self.opts {
                    return Err(EngineError::Internal(format!(
                        "trail undo did not restore the state at node `{}`",
                        cp.node
                    )));
                }
            }
            if cp.next_alt < cp.alternatives.len() {
                let (idx, arrow) = cp.alternatives[cp.next_alt];
                cp.next_alt += 1;
                self.cont = cp.cont.clone();
                let subnet = cp.subnet;
                self.cps.push(cp);
                self.take_arrow(subnet, idx, arrow);
                return Ok(true);
            }
            // node exhausted; keep unwinding
        }
    }
}
