use std::fmt::Write;

use crate::net::{
    Arrow, CallKind, ControlNetwork, Expr, NodeKind, OptionMutation, PrimitiveCall, Subnet,
};

/// Renders a network as `.cn` source. The output re-parses to an equal network.
pub fn render(net: &ControlNetwork) -> String {
    let mut out = String::new();
    // The parser takes the first subnet as main, so emit main first.
    let mut names: Vec<&String> = net.subnets.keys().collect();
    names.sort_by_key(|n| (**n != net.main, net.subnets.get_index_of(n.as_str())));
    for (i, name) in names.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        render_subnet(&mut out, &net.subnets[name.as_str()]);
    }
    out
}

fn render_subnet(out: &mut String, sub: &Subnet) {
    write!(out, "SUBNET {}({})\n", sub.name, sub.params.join(", ")).unwrap();
    if !sub.locals.is_empty() {
        writeln!(out, "VARS {}", sub.locals.join(", ")).unwrap();
    }
    for (id, node) in &sub.nodes {
        let kw = if *id == sub.initial { "INIT" } else { "NODE" };
        match &node.kind {
            NodeKind::Ordinary => writeln!(out, "{kw} {id}").unwrap(),
            NodeKind::Finish => writeln!(out, "{kw} {id} FINISH").unwrap(),
            NodeKind::Control(muts) => {
                let body: Vec<String> = muts.iter().map(render_mutation).collect();
                writeln!(out, "{kw} {id} CONTROL {{{}}}", body.join(", ")).unwrap();
            }
        }
    }
    for arrow in &sub.arrows {
        render_arrow(out, arrow);
    }
}

fn render_arrow(out: &mut String, arrow: &Arrow) {
    write!(out, "ARROW {} -> {}", arrow.from, arrow.to).unwrap();
    if let Some(eval) = &arrow.eval {
        write!(out, " [eval={eval}]").unwrap();
    }
    out.push_str(" :");
    for (i, call) in arrow.chain.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        render_call(out, call);
    }
    out.push_str(" ;\n");
}

fn render_call(out: &mut String, call: &PrimitiveCall) {
    if call.kind == CallKind::SubnetCall {
        out.push_str("call ");
    }
    out.push_str(&call.name);
    if !call.args.is_empty() || call.kind == CallKind::SubnetCall {
        out.push('(');
        for (i, arg) in call.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            render_expr(out, arg);
        }
        out.push(')');
    }
}

fn render_expr(out: &mut String, expr: &Expr) {
    match expr {
        Expr::Int(n) => write!(out, "{n}").unwrap(),
        Expr::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        Expr::Var(name) => out.push_str(name),
        Expr::Neg(inner) => {
            out.push('-');
            render_expr(out, inner);
        }
    }
}

fn render_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn render_mutation(m: &OptionMutation) -> String {
    match m {
        OptionMutation::Order(mode) => format!("order={mode}"),
        OptionMutation::Range(lo, hi) => {
            format!("range={}..{}", render_number(*lo), render_number(*hi))
        }
        OptionMutation::ClearRange => "range=none".to_string(),
        OptionMutation::Width(w) => format!("width={w}"),
        OptionMutation::ClearWidth => "width=none".to_string(),
        OptionMutation::Backtracking(b) => format!("backtracking={b}"),
        OptionMutation::MaxSolutions(n) => format!("max_solutions={n}"),
        OptionMutation::MaxDepth(d) => format!("max_depth={d}"),
        OptionMutation::ClearMaxDepth => "max_depth=none".to_string(),
        OptionMutation::Seed(s) => format!("seed={s}"),
    }
}
