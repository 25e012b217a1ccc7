use indexmap::IndexMap;

use super::lexer::{lex, Tok, Token};
use super::ParseError;
use crate::net::{
    Arrow, ArrowOrder, CallKind, ControlNetwork, Expr, Node, NodeKind, OptionMutation,
    PrimitiveCall, Subnet,
};

pub fn parse(text: &str) -> Result<ControlNetwork, Vec<ParseError>> {
    let tokens = lex(text).map_err(|e| vec![e])?;
    let mut p = Parser { tokens, pos: 0, errors: Vec::new() };
    let net = p.program();
    match net {
        Some(net) if p.errors.is_empty() => Ok(net),
        _ => {
            if p.errors.is_empty() {
                p.errors.push(ParseError::new(1, 1, "empty program"));
            }
            Err(p.errors)
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_here(&mut self, msg: impl Into<String>) {
        let t = self.peek();
        self.errors.push(ParseError::new(t.line, t.col, msg));
    }

    fn expect(&mut self, tok: Tok) -> bool {
        if self.eat(&tok) {
            true
        } else {
            let found = self.peek().tok.clone();
            self.error_here(format!("expected `{tok}`, found `{found}`"));
            false
        }
    }

    fn expect_ident(&mut self, what: &str) -> Option<String> {
        if let Tok::Ident(name) = &self.peek().tok {
            let name = name.clone();
            self.bump();
            Some(name)
        } else {
            let found = self.peek().tok.clone();
            self.error_here(format!("expected {what}, found `{found}`"));
            None
        }
    }

    /// Skip ahead to the next statement keyword so one error does not drown
    /// the rest of the program in follow-on noise.
    fn synchronize(&mut self) {
        loop {
            match self.peek().tok {
                Tok::Subnet | Tok::Init | Tok::Node | Tok::Arrow | Tok::Vars | Tok::Eof => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn program(&mut self) -> Option<ControlNetwork> {
        let mut subnets = IndexMap::new();
        let mut main: Option<String> = None;
        while !self.at(&Tok::Eof) {
            if !self.at(&Tok::Subnet) {
                self.error_here(format!("expected `SUBNET`, found `{}`", self.peek().tok));
                self.synchronize();
                if !self.eat(&Tok::Subnet) {
                    continue;
                }
                self.pos -= 1; // re-enter subnet() on the keyword
            }
            if let Some(sub) = self.subnet() {
                if main.is_none() {
                    main = Some(sub.name.clone());
                }
                if subnets.insert(sub.name.clone(), sub).is_some() {
                    self.error_here("duplicate subnet name");
                }
            }
        }
        Some(ControlNetwork { subnets, main: main? })
    }

    fn subnet(&mut self) -> Option<Subnet> {
        self.expect(Tok::Subnet);
        let name = self.expect_ident("subnet name").or_else(|| {
            self.synchronize();
            None
        })?;
        self.expect(Tok::LParen);
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                match self.expect_ident("parameter name") {
                    Some(p) => params.push(p),
                    None => break,
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen);

        let mut locals = Vec::new();
        if self.eat(&Tok::Vars) {
            loop {
                match self.expect_ident("variable name") {
                    Some(v) => locals.push(v),
                    None => break,
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }

        let mut nodes: IndexMap<String, Node> = IndexMap::new();
        let mut initial: Option<String> = None;
        let mut arrows = Vec::new();

        loop {
            match self.peek().tok {
                Tok::Init => {
                    self.bump();
                    if let Some((node, _)) = self.node_decl(&mut nodes) {
                        if initial.is_some() {
                            self.error_here(format!("subnet `{name}` has more than one INIT node"));
                        } else {
                            initial = Some(node);
                        }
                    }
                }
                Tok::Node => {
                    self.bump();
                    self.node_decl(&mut nodes);
                }
                Tok::Arrow => {
                    self.bump();
                    if let Some(a) = self.arrow_decl() {
                        arrows.push(a);
                    }
                }
                _ => break,
            }
        }

        let initial = match initial {
            Some(i) => i,
            None => {
                self.error_here(format!("subnet `{name}` has no INIT node"));
                return None;
            }
        };
        Some(Subnet { name, params, locals, nodes, initial, arrows })
    }

    fn node_decl(&mut self, nodes: &mut IndexMap<String, Node>) -> Option<(String, ())> {
        let id = self.expect_ident("node name").or_else(|| {
            self.synchronize();
            None
        })?;
        let kind = if self.eat(&Tok::Finish) {
            NodeKind::Finish
        } else if self.eat(&Tok::Control) {
            NodeKind::Control(self.mutations())
        } else {
            NodeKind::Ordinary
        };
        if nodes
            .insert(id.clone(), Node { id: id.clone(), kind })
            .is_some()
        {
            self.error_here(format!("node `{id}` declared twice"));
        }
        Some((id, ()))
    }

    fn mutations(&mut self) -> Vec<OptionMutation> {
        let mut muts = Vec::new();
        self.expect(Tok::LBrace);
        if !self.at(&Tok::RBrace) {
            loop {
                if let Some(m) = self.mutation() {
                    muts.push(m);
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace);
        muts
    }

    fn number(&mut self) -> Option<f64> {
        let neg = self.eat(&Tok::Minus);
        let v = match self.peek().tok {
            Tok::Int(n) => n as f64,
            Tok::Float(x) => x,
            _ => {
                self.error_here(format!("expected a number, found `{}`", self.peek().tok));
                return None;
            }
        };
        self.bump();
        Some(if neg { -v } else { v })
    }

    fn uint(&mut self, what: &str) -> Option<u64> {
        if let Tok::Int(n) = self.peek().tok {
            if (0..=u64::MAX as i128).contains(&n) {
                self.bump();
                return Some(n as u64);
            }
        }
        self.error_here(format!("expected a non-negative integer for {what}"));
        None
    }

    fn mutation(&mut self) -> Option<OptionMutation> {
        let name = self.expect_ident("option name")?;
        self.expect(Tok::Eq);
        match name.as_str() {
            "order" => {
                let mode = self.expect_ident("order mode")?;
                match mode.as_str() {
                    "declared" => Some(OptionMutation::Order(ArrowOrder::Declared)),
                    "best" => Some(OptionMutation::Order(ArrowOrder::Best)),
                    "random" => Some(OptionMutation::Order(ArrowOrder::Random)),
                    other => {
                        self.error_here(format!(
                            "unknown order mode `{other}` (expected declared, best or random)"
                        ));
                        None
                    }
                }
            }
            "range" => {
                if self.eat(&Tok::None_) {
                    return Some(OptionMutation::ClearRange);
                }
                let lo = self.number()?;
                self.expect(Tok::DotDot);
                let hi = self.number()?;
                Some(OptionMutation::Range(lo, hi))
            }
            "width" => {
                if self.eat(&Tok::None_) {
                    return Some(OptionMutation::ClearWidth);
                }
                Some(OptionMutation::Width(self.uint("width")?))
            }
            "backtracking" => {
                if self.eat(&Tok::True) {
                    Some(OptionMutation::Backtracking(true))
                } else if self.eat(&Tok::False) {
                    Some(OptionMutation::Backtracking(false))
                } else {
                    self.error_here("expected `true` or `false` for backtracking");
                    None
                }
            }
            "max_solutions" => Some(OptionMutation::MaxSolutions(self.uint("max_solutions")?)),
            "max_depth" => {
                if self.eat(&Tok::None_) {
                    return Some(OptionMutation::ClearMaxDepth);
                }
                Some(OptionMutation::MaxDepth(self.uint("max_depth")?))
            }
            "seed" => Some(OptionMutation::Seed(self.uint("seed")?)),
            other => {
                self.error_here(format!("unknown control option `{other}`"));
                None
            }
        }
    }

    fn arrow_decl(&mut self) -> Option<Arrow> {
        let from = self.expect_ident("source node").or_else(|| {
            self.synchronize();
            None
        })?;
        if !self.expect(Tok::ArrowHead) {
            self.synchronize();
            return None;
        }
        let to = self.expect_ident("target node").or_else(|| {
            self.synchronize();
            None
        })?;
        let mut eval = None;
        if self.eat(&Tok::LBracket) {
            self.expect(Tok::Eval);
            self.expect(Tok::Eq);
            eval = self.expect_ident("evaluator name");
            self.expect(Tok::RBracket);
        }
        if !self.expect(Tok::Colon) {
            self.synchronize();
            return None;
        }
        let mut chain = Vec::new();
        if !self.at(&Tok::Semi) {
            loop {
                match self.call() {
                    Some(c) => chain.push(c),
                    None => {
                        self.synchronize();
                        return None;
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        if !self.expect(Tok::Semi) {
            self.synchronize();
            return None;
        }
        Some(Arrow { from, to, chain, eval })
    }

    fn call(&mut self) -> Option<PrimitiveCall> {
        let kind = if self.eat(&Tok::Call) {
            CallKind::SubnetCall
        } else {
            CallKind::Primitive
        };
        let name = self.expect_ident("call name")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            if !self.at(&Tok::RParen) {
                loop {
                    args.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            if !self.expect(Tok::RParen) {
                return None;
            }
        } else if kind == CallKind::SubnetCall {
            self.error_here("subnet calls require an argument list");
            return None;
        }
        Some(PrimitiveCall { name, args, kind })
    }

    fn expr(&mut self) -> Option<Expr> {
        match self.peek().tok.clone() {
            Tok::Minus => {
                self.bump();
                Some(Expr::Neg(Box::new(self.expr()?)))
            }
            Tok::Int(n) => {
                self.bump();
                if let Ok(v) = i64::try_from(n) {
                    Some(Expr::Int(v))
                } else {
                    self.pos -= 1;
                    self.error_here("integer argument out of range");
                    self.bump();
                    None
                }
            }
            Tok::Str(s) => {
                self.bump();
                Some(Expr::Str(s))
            }
            Tok::Ident(name) => {
                self.bump();
                Some(Expr::Var(name))
            }
            other => {
                self.error_here(format!("expected an argument expression, found `{other}`"));
                None
            }
        }
    }
}
