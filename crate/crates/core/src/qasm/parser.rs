use std::collections::HashMap;
use std::f64::consts::PI;

use super::lexer::{tokenize, Tok, Token};
use super::library;
use super::{GateApplication, QasmError, QasmErrorKind, Register, SourceCircuit};

#[derive(Debug, Clone, Copy)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

#[derive(Debug, Clone)]
enum Expr {
    Num(f64),
    Param(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn eval(&self, params: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Param(i) => params[*i],
            Expr::Neg(e) => -e.eval(params),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(params), b.eval(params));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let x = e.eval(params);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sqrt => x.sqrt(),
                }
            }
        }
    }
}

/// A gate call inside a `gate` body; arguments are formal-argument indices.
#[derive(Debug, Clone)]
struct BodyCall {
    name: String,
    params: Vec<Expr>,
    args: Vec<usize>,
}

/// A user-defined gate.
#[derive(Debug, Clone)]
struct GateDefinition {
    params: usize,
    qargs: usize,
    body: Vec<BodyCall>,
}

/// Register reference in an argument list: `q` or `q[i]`.
#[derive(Debug, Clone)]
enum Arg {
    Whole(String),
    Bit(String, usize),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    circuit: SourceCircuit,
    defs: HashMap<String, GateDefinition>,
}

/// Parses OpenQASM 2.0 source into a lowered native-gate circuit.
pub fn parse(source: &str) -> Result<SourceCircuit, QasmError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0, circuit: SourceCircuit::default(), defs: HashMap::new() };
    p.header()?;
    while !matches!(p.peek(), Tok::Eof) {
        p.statement()?;
    }
    Ok(p.circuit)
}

type PResult<T> = Result<T, QasmError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, kind: QasmErrorKind) -> PResult<T> {
        let (l, c) = self.here();
        Err(QasmError::new(l, c, kind))
    }

    fn err_at<T>(&self, at: (usize, usize), kind: QasmErrorKind) -> PResult<T> {
        Err(QasmError::new(at.0, at.1, kind))
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if !matches!(t, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            self.err(QasmErrorKind::Syntax(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.err(QasmErrorKind::Syntax(format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn uint(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Number { value, is_int: true, .. } => {
                self.next();
                Ok(value as usize)
            }
            other => self.err(QasmErrorKind::Syntax(format!("expected integer, found {}", describe(&other)))),
        }
    }

    fn header(&mut self) -> PResult<()> {
        if *self.peek() != Tok::Ident("OPENQASM".into()) {
            return self.err(QasmErrorKind::MissingHeader);
        }
        self.next();
        match self.peek().clone() {
            Tok::Number { value, text, .. } => {
                if value != 2.0 {
                    return self.err(QasmErrorKind::Version(text));
                }
                self.next();
            }
            _ => return self.err(QasmErrorKind::MissingHeader),
        }
        self.expect(Tok::Semi, "`;`")
    }

    fn statement(&mut self) -> PResult<()> {
        let at = self.here();
        let word = match self.peek().clone() {
            Tok::Ident(s) => s,
            other => return self.err(QasmErrorKind::Syntax(format!("unexpected {}", describe(&other)))),
        };
        match word.as_str() {
            "include" => {
                self.next();
                let file = match self.next() {
                    Tok::Str(s) => s,
                    _ => return self.err_at(at, QasmErrorKind::Syntax("expected file name string".into())),
                };
                self.expect(Tok::Semi, "`;`")?;
                if file != "qelib1.inc" {
                    return self.err_at(at, QasmErrorKind::Unsupported(format!("include \"{file}\"")));
                }
                Ok(())
            }
            "qreg" | "creg" => {
                self.next();
                let name = self.ident()?;
                self.expect(Tok::LBracket, "`[`")?;
                let size = self.uint()?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::Semi, "`;`")?;
                if size == 0 {
                    return self.err_at(at, QasmErrorKind::Syntax(format!("register `{name}` has size 0")));
                }
                let taken = self.circuit.qregs.iter().chain(&self.circuit.cregs).any(|r| r.name == name);
                if taken {
                    return self.err_at(at, QasmErrorKind::Redefinition(name));
                }
                let reg = Register { name, size };
                if word == "qreg" {
                    self.circuit.qregs.push(reg);
                } else {
                    self.circuit.cregs.push(reg);
                }
                Ok(())
            }
            "gate" => self.gate_definition(),
            "opaque" => self.err(QasmErrorKind::Unsupported("opaque gate".into())),
            "if" => self.err(QasmErrorKind::Conditional),
            "reset" => self.err(QasmErrorKind::Unsupported("reset".into())),
            "measure" => {
                self.next();
                let q = self.arg()?;
                self.expect(Tok::Arrow, "`->`")?;
                let c = self.arg()?;
                self.expect(Tok::Semi, "`;`")?;
                let nq = self.resolve(&q, true, at)?.len();
                let nc = self.resolve(&c, false, at)?.len();
                if nq != nc {
                    return self.err_at(at, QasmErrorKind::BroadcastMismatch("measure".into()));
                }
                Ok(())
            }
            "barrier" => {
                self.next();
                let args = self.arg_list()?;
                self.expect(Tok::Semi, "`;`")?;
                for a in &args {
                    self.resolve(a, true, at)?;
                }
                Ok(())
            }
            _ => self.gate_call(),
        }
    }

    fn arg(&mut self) -> PResult<Arg> {
        let name = self.ident()?;
        if *self.peek() == Tok::LBracket {
            self.next();
            let idx = self.uint()?;
            self.expect(Tok::RBracket, "`]`")?;
            Ok(Arg::Bit(name, idx))
        } else {
            Ok(Arg::Whole(name))
        }
    }

    fn arg_list(&mut self) -> PResult<Vec<Arg>> {
        let mut args = vec![self.arg()?];
        while *self.peek() == Tok::Comma {
            self.next();
            args.push(self.arg()?);
        }
        Ok(args)
    }

    /// Flat indices named by `arg` (several for a whole-register reference).
    fn resolve(&self, arg: &Arg, quantum: bool, at: (usize, usize)) -> PResult<Vec<usize>> {
        let regs = if quantum { &self.circuit.qregs } else { &self.circuit.cregs };
        let (name, idx) = match arg {
            Arg::Whole(n) => (n, None),
            Arg::Bit(n, i) => (n, Some(*i)),
        };
        let mut base = 0;
        for r in regs {
            if &r.name == name {
                return match idx {
                    None => Ok((base..base + r.size).collect()),
                    Some(i) if i < r.size => Ok(vec![base + i]),
                    Some(i) => self.err_at(
                        at,
                        QasmErrorKind::IndexOutOfRange { register: name.clone(), index: i, size: r.size },
                    ),
                };
            }
            base += r.size;
        }
        self.err_at(at, QasmErrorKind::UnknownRegister(name.clone()))
    }

    fn gate_call(&mut self) -> PResult<()> {
        let at = self.here();
        let name = self.ident()?;
        let params = if *self.peek() == Tok::LParen {
            self.next();
            let exprs = self.expr_list(&[])?;
            self.expect(Tok::RParen, "`)`")?;
            exprs.iter().map(|e| e.eval(&[])).collect()
        } else {
            Vec::new()
        };
        let args = self.arg_list()?;
        self.expect(Tok::Semi, "`;`")?;

        if !self.defs.contains_key(&name) && library::signature(&name).is_none() {
            return self.err_at(at, QasmErrorKind::UnknownGate(name));
        }

        let resolved: Vec<Vec<usize>> =
            args.iter().map(|a| self.resolve(a, true, at)).collect::<PResult<_>>()?;
        let width = resolved.iter().map(Vec::len).max().unwrap_or(1);
        if resolved.iter().any(|r| r.len() != 1 && r.len() != width) {
            return self.err_at(at, QasmErrorKind::BroadcastMismatch(name));
        }
        for k in 0..width {
            let qubits: Vec<usize> = resolved.iter().map(|r| if r.len() == 1 { r[0] } else { r[k] }).collect();
            let gates = self.expand(&name, &params, &qubits).map_err(|kind| QasmError::new(at.0, at.1, kind))?;
            self.circuit.gates.extend(gates);
        }
        Ok(())
    }

    fn expand(&self, name: &str, params: &[f64], qubits: &[usize]) -> Result<Vec<GateApplication>, QasmErrorKind> {
        let Some(def) = self.defs.get(name) else {
            return library::lower(name, params, qubits);
        };
        if params.len() != def.params || qubits.len() != def.qargs {
            return Err(QasmErrorKind::Arity {
                gate: name.to_string(),
                params: (def.params, params.len()),
                qubits: (def.qargs, qubits.len()),
            });
        }
        for (i, a) in qubits.iter().enumerate() {
            if qubits[..i].contains(a) {
                return Err(QasmErrorKind::RepeatedQubit { gate: name.to_string(), qubit: *a });
            }
        }
        let mut out = Vec::new();
        for call in &def.body {
            let p: Vec<f64> = call.params.iter().map(|e| e.eval(params)).collect();
            let q: Vec<usize> = call.args.iter().map(|&i| qubits[i]).collect();
            out.extend(self.expand(&call.name, &p, &q)?);
        }
        Ok(out)
    }

    fn gate_definition(&mut self) -> PResult<()> {
        let at = self.here();
        self.next(); // `gate`
        let name = self.ident()?;
        if library::is_builtin_primitive(&name) || self.defs.contains_key(&name) {
            return self.err_at(at, QasmErrorKind::Redefinition(name));
        }
        let mut formals = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            if *self.peek() != Tok::RParen {
                formals.push(self.ident()?);
                while *self.peek() == Tok::Comma {
                    self.next();
                    formals.push(self.ident()?);
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        let mut qargs = vec![self.ident()?];
        while *self.peek() == Tok::Comma {
            self.next();
            qargs.push(self.ident()?);
        }
        self.expect(Tok::LBrace, "`{`")?;

        let mut body = Vec::new();
        while *self.peek() != Tok::RBrace {
            let call_at = self.here();
            let callee = self.ident()?;
            if callee == "barrier" {
                self.body_args(&qargs)?;
                self.expect(Tok::Semi, "`;`")?;
                continue;
            }
            if matches!(callee.as_str(), "measure" | "reset" | "if" | "opaque" | "gate") {
                return self.err_at(
                    call_at,
                    QasmErrorKind::Syntax(format!("`{callee}` is not allowed inside a gate body")),
                );
            }
            if callee == name {
                return self.err_at(call_at, QasmErrorKind::RecursiveGate(name));
            }
            let params = if *self.peek() == Tok::LParen {
                self.next();
                let e = self.expr_list(&formals)?;
                self.expect(Tok::RParen, "`)`")?;
                e
            } else {
                Vec::new()
            };
            let args = self.body_args(&qargs)?;
            self.expect(Tok::Semi, "`;`")?;

            let sig = match self.defs.get(&callee) {
                Some(d) => Some((d.params, d.qargs)),
                None => library::signature(&callee),
            };
            let Some((np, nq)) = sig else {
                return self.err_at(call_at, QasmErrorKind::UnknownGate(callee));
            };
            if np != params.len() || nq != args.len() {
                return self.err_at(
                    call_at,
                    QasmErrorKind::Arity { gate: callee, params: (np, params.len()), qubits: (nq, args.len()) },
                );
            }
            body.push(BodyCall { name: callee, params, args });
        }
        self.expect(Tok::RBrace, "`}`")?;
        self.defs.insert(name, GateDefinition { params: formals.len(), qargs: qargs.len(), body });
        Ok(())
    }

    fn body_args(&mut self, qargs: &[String]) -> PResult<Vec<usize>> {
        let mut out = Vec::new();
        loop {
            let at = self.here();
            let a = self.ident()?;
            if *self.peek() == Tok::LBracket {
                return self.err(QasmErrorKind::Syntax("indexed argument inside gate body".into()));
            }
            match qargs.iter().position(|q| *q == a) {
                Some(i) => out.push(i),
                None => return self.err_at(at, QasmErrorKind::UnknownIdentifier(a)),
            }
            if *self.peek() != Tok::Comma {
                return Ok(out);
            }
            self.next();
        }
    }

    fn expr_list(&mut self, formals: &[String]) -> PResult<Vec<Expr>> {
        let mut v = vec![self.expr(formals)?];
        while *self.peek() == Tok::Comma {
            self.next();
            v.push(self.expr(formals)?);
        }
        Ok(v)
    }

    fn expr(&mut self, f: &[String]) -> PResult<Expr> {
        let mut lhs = self.term(f)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term(f)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self, f: &[String]) -> PResult<Expr> {
        let mut lhs = self.unary(f)?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary(f)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self, f: &[String]) -> PResult<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.next();
                Ok(Expr::Neg(Box::new(self.unary(f)?)))
            }
            Tok::Plus => {
                self.next();
                self.unary(f)
            }
            _ => {
                let base = self.primary(f)?;
                if *self.peek() == Tok::Caret {
                    self.next();
                    let exp = self.unary(f)?;
                    Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn primary(&mut self, f: &[String]) -> PResult<Expr> {
        let at = self.here();
        match self.next() {
            Tok::Number { value, .. } => Ok(Expr::Num(value)),
            Tok::LParen => {
                let e = self.expr(f)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) => {
                let func = match s.as_str() {
                    "pi" => return Ok(Expr::Num(PI)),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "tan" => Some(Func::Tan),
                    "exp" => Some(Func::Exp),
                    "ln" => Some(Func::Ln),
                    "sqrt" => Some(Func::Sqrt),
                    _ => None,
                };
                if let Some(func) = func {
                    self.expect(Tok::LParen, "`(`")?;
                    let e = self.expr(f)?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Call(func, Box::new(e)));
                }
                match f.iter().position(|p| *p == s) {
                    Some(i) => Ok(Expr::Param(i)),
                    None => self.err_at(at, QasmErrorKind::UnknownIdentifier(s)),
                }
            }
            other => self.err_at(at, QasmErrorKind::Syntax(format!("unexpected {} in expression", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number { text, .. } => format!("`{text}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Eof => "end of input".into(),
        Tok::Semi => "`;`".into(),
        Tok::Comma => "`,`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::EqEq => "`==`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
    }
}
