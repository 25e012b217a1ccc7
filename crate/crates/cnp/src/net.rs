//! Immutable data model for control-network programs.
//!
//! A program is a set of named subnets; each subnet is a directed graph whose
//! arrows carry chains of primitive calls. Execution (see [`crate::engine`])
//! traverses the main subnet from its initial node until a FINISH node is
//! reached.

use indexmap::IndexMap;
use std::fmt;

/// Arrow attempt order at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrowOrder {
    #[default]
    Declared,
    /// Ascending by evaluator value, ties by declaration order.
    Best,
    /// Seeded shuffle.
    Random,
}

impl fmt::Display for ArrowOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrowOrder::Declared => write!(f, "declared"),
            ArrowOrder::Best => write!(f, "best"),
            ArrowOrder::Random => write!(f, "random"),
        }
    }
}

/// A single option change carried by a control node.
#[derive(Debug, Clone, PartialEq)]
pub enum OptionMutation {
    Order(ArrowOrder),
    Range(f64, f64),
    ClearRange,
    Width(u64),
    ClearWidth,
    Backtracking(bool),
    MaxSolutions(u64),
    MaxDepth(u64),
    ClearMaxDepth,
    Seed(u64),
}

impl OptionMutation {
    pub fn option_name(&self) -> &'static str {
        match self {
            OptionMutation::Order(_) => "order",
            OptionMutation::Range(..) | OptionMutation::ClearRange => "range",
            OptionMutation::Width(_) | OptionMutation::ClearWidth => "width",
            OptionMutation::Backtracking(_) => "backtracking",
            OptionMutation::MaxSolutions(_) => "max_solutions",
            OptionMutation::MaxDepth(_) | OptionMutation::ClearMaxDepth => "max_depth",
            OptionMutation::Seed(_) => "seed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum NodeKind {
    #[default]
    Ordinary,
    /// Reaching a finish node of the main subnet records a solution; in a
    /// called subnet it makes the subnet call succeed.
    Finish,
    /// Applies the listed option mutations when entered; undone on backtrack.
    Control(Vec<OptionMutation>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
}

/// Argument expression in a primitive or subnet call.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Str(String),
    Var(String),
    Neg(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallKind {
    Primitive,
    SubnetCall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveCall {
    pub name: String,
    pub args: Vec<Expr>,
    pub kind: CallKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrow {
    pub from: String,
    pub to: String,
    /// Calls executed left to right; the first failure fails the arrow.
    pub chain: Vec<PrimitiveCall>,
    /// Name of an evaluator primitive used by ordering options.
    pub eval: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subnet {
    pub name: String,
    pub params: Vec<String>,
    pub locals: Vec<String>,
    /// Keyed by node id, in declaration order.
    pub nodes: IndexMap<String, Node>,
    pub initial: String,
    pub arrows: Vec<Arrow>,
}

impl Subnet {
    /// Arrows leaving `node`, in declaration order (the default attempt order).
    pub fn arrows_from(&self, node: &str) -> Result<Vec<&Arrow>, LookupError> {
        if !self.nodes.contains_key(node) {
            return Err(LookupError::UnknownNode {
                subnet: self.name.clone(),
                node: node.to_string(),
            });
        }
        Ok(self.arrows.iter().filter(|a| a.from == node).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlNetwork {
    /// Keyed by subnet name, in declaration order.
    pub subnets: IndexMap<String, Subnet>,
    pub main: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("unknown subnet `{0}`")]
    UnknownSubnet(String),
    #[error("unknown node `{node}` in subnet `{subnet}`")]
    UnknownNode { subnet: String, node: String },
}

/// One structural invariant violation, with its location in the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Result of [`validate`]; empty means the network is structurally valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn add(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

impl ControlNetwork {
    pub fn subnet(&self, name: &str) -> Result<&Subnet, LookupError> {
        self.subnets
            .get(name)
            .ok_or_else(|| LookupError::UnknownSubnet(name.to_string()))
    }

    /// Arrows leaving `node` of `subnet`, in declaration order.
    pub fn arrows_from(&self, subnet: &str, node: &str) -> Result<Vec<&Arrow>, LookupError> {
        self.subnet(subnet)?.arrows_from(node)
    }
}

/// Checks every structural invariant and reports all violations found.
pub fn validate(net: &ControlNetwork) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !net.subnets.contains_key(&net.main) {
        report.add("network", format!("unknown main subnet `{}`", net.main));
    }

    for (key, sub) in &net.subnets {
        let loc = |detail: &str| format!("subnet `{}` {detail}", sub.name);
        if key != &sub.name {
            report.add(loc(""), format!("keyed as `{key}` but named `{}`", sub.name));
        }

        let mut seen = std::collections::HashSet::new();
        for name in sub.params.iter().chain(&sub.locals) {
            if !seen.insert(name) {
                report.add(loc(""), format!("duplicate parameter/variable `{name}`"));
            }
        }

        if !sub.nodes.contains_key(&sub.initial) {
            report.add(loc(""), format!("initial node `{}` not declared", sub.initial));
        }
        for (id, node) in &sub.nodes {
            if id != &node.id {
                report.add(loc(&format!("node `{id}`")), "node id mismatch".to_string());
            }
        }

        for (i, arrow) in sub.arrows.iter().enumerate() {
            let aloc = loc(&format!("arrow #{i} `{} -> {}`", arrow.from, arrow.to));
            match sub.nodes.get(&arrow.from) {
                None => report.add(&aloc, format!("unknown source node `{}`", arrow.from)),
                Some(n) if matches!(n.kind, NodeKind::Finish) => {
                    report.add(&aloc, format!("finish node `{}` has an outgoing arrow", arrow.from))
                }
                Some(_) => {}
            }
            if !sub.nodes.contains_key(&arrow.to) {
                report.add(&aloc, format!("unknown target node `{}`", arrow.to));
            }
            for call in &arrow.chain {
                if call.kind == CallKind::SubnetCall {
                    match net.subnets.get(&call.name) {
                        None => report.add(&aloc, format!("call to unknown subnet `{}`", call.name)),
                        Some(callee) if callee.params.len() != call.args.len() => report.add(
                            &aloc,
                            format!(
                                "subnet `{}` takes {} parameter(s), {} given",
                                call.name,
                                callee.params.len(),
                                call.args.len()
                            ),
                        ),
                        Some(_) => {}
                    }
                }
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_net() -> ControlNetwork {
        let mut nodes = IndexMap::new();
        nodes.insert(
            "s0".to_string(),
            Node { id: "s0".to_string(), kind: NodeKind::Ordinary },
        );
        nodes.insert(
            "fin".to_string(),
            Node { id: "fin".to_string(), kind: NodeKind::Finish },
        );
        let sub = Subnet {
            name: "Main".to_string(),
            params: vec![],
            locals: vec![],
            nodes,
            initial: "s0".to_string(),
            arrows: vec![Arrow {
                from: "s0".to_string(),
                to: "fin".to_string(),
                chain: vec![],
                eval: None,
            }],
        };
        let mut subnets = IndexMap::new();
        subnets.insert("Main".to_string(), sub);
        ControlNetwork { subnets, main: "Main".to_string() }
    }

    #[test]
    fn valid_network_yields_empty_report() {
        assert!(validate(&minimal_net()).is_valid());
    }

    #[test]
    fn unknown_main_subnet_reported() {
        let mut net = minimal_net();
        net.main = "Nope".to_string();
        let report = validate(&net);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].message.contains("unknown main subnet"));
    }

    #[test]
    fn finish_node_with_outgoing_arrow_reported() {
        let mut net = minimal_net();
        net.subnets["Main"].arrows.push(Arrow {
            from: "fin".to_string(),
            to: "s0".to_string(),
            chain: vec![],
            eval: None,
        });
        let report = validate(&net);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].message.contains("`fin`"));
    }

    #[test]
    fn subnet_call_arity_checked() {
        let mut net = minimal_net();
        net.subnets["Main"].arrows[0].chain.push(PrimitiveCall {
            name: "Main".to_string(),
            args: vec![Expr::Int(1)],
            kind: CallKind::SubnetCall,
        });
        let report = validate(&net);
        assert!(!report.is_valid());
        assert!(report.violations[0].message.contains("0 parameter(s), 1 given"));
    }

    #[test]
    fn validate_is_pure() {
        let net = minimal_net();
        assert_eq!(validate(&net), validate(&net));
    }

    #[test]
    fn arrows_from_declaration_order() {
        let mut net = minimal_net();
        let sub = &mut net.subnets["Main"];
        sub.nodes.insert(
            "mid".to_string(),
            Node { id: "mid".to_string(), kind: NodeKind::Ordinary },
        );
        sub.arrows.push(Arrow {
            from: "s0".to_string(),
            to: "mid".to_string(),
            chain: vec![],
            eval: None,
        });
        sub.arrows.push(Arrow {
            from: "s0".to_string(),
            to: "fin".to_string(),
            chain: vec![],
            eval: None,
        });
        let arrows = net.arrows_from("Main", "s0").unwrap();
        assert_eq!(arrows.len(), 3);
        assert_eq!(arrows[0].to, "fin");
        assert_eq!(arrows[1].to, "mid");
        assert_eq!(arrows[2].to, "fin");
    }

    #[test]
    fn arrows_from_finish_node_empty() {
        let net = minimal_net();
        assert!(net.arrows_from("Main", "fin").unwrap().is_empty());
    }

    #[test]
    fn arrows_from_unknown_node_errors() {
        let net = minimal_net();
        assert_eq!(
            net.arrows_from("Main", "zz"),
            Err(LookupError::UnknownNode { subnet: "Main".into(), node: "zz".into() })
        );
        assert_eq!(
            net.arrows_from("Zz", "s0"),
            Err(LookupError::UnknownSubnet("Zz".into()))
        );
    }
}
