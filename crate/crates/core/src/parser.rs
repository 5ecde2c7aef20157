//! Recursive-descent parser producing the typed AST. Every rejection carries
//! a line/column inside the input and names what was expected.

use thiserror::Error;

use crate::ast::*;
use crate::lexer::{tokenize, Kw, LexError, TokKind, Token};
use crate::time::TimeLiteral;
use crate::value::CmpOp;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> ParseError {
        ParseError {
            line: e.line,
            col: e.col,
            msg: e.msg,
        }
    }
}

pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: end_span(text),
    };
    let q = p.query()?;
    if p.eat_kind(&TokKind::Semicolon) {
        // optional trailing semicolon
    }
    if let Some(tok) = p.peek() {
        return Err(p.err_at(tok.line, tok.col, format!("unexpected {}", tok.kind)));
    }
    Ok(q)
}

fn end_span(text: &str) -> Span {
    let line = text.lines().count().max(1) as u32;
    let col = text
        .lines()
        .last()
        .map(|l| l.chars().count() + 1)
        .unwrap_or(1) as u32;
    Span { line, col }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: Span,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokKind> {
        self.peek().map(|t| &t.kind)
    }

    fn peek2_kind(&self) -> Option<&TokKind> {
        self.tokens.get(self.pos + 1).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        match self.peek() {
            Some(t) => Span {
                line: t.line,
                col: t.col,
            },
            None => self.end,
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, line: u32, col: u32, msg: impl Into<String>) -> ParseError {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let span = self.span();
        self.err_at(span.line, span.col, msg)
    }

    fn expect_kind(&mut self, kind: TokKind) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                Err(self.err_at(t.line, t.col, format!("expected {kind}, found {}", t.kind)))
            }
            None => Err(self.err_here(format!("expected {kind}, found end of input"))),
        }
    }

    fn eat_kind(&mut self, kind: &TokKind) -> bool {
        if self.peek_kind() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Kw) -> bool {
        self.eat_kind(&TokKind::Kw(kw))
    }

    fn expect_kw(&mut self, kw: Kw, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokKind::Kw(kw) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                Err(self.err_at(t.line, t.col, format!("expected {what}, found {}", t.kind)))
            }
            None => Err(self.err_here(format!("expected {what}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokKind::Ident(_),
                ..
            }) => {
                let Some(Token {
                    kind: TokKind::Ident(s),
                    ..
                }) = self.next()
                else {
                    unreachable!()
                };
                Ok(s)
            }
            Some(t) => {
                Err(self.err_at(t.line, t.col, format!("expected {what}, found {}", t.kind)))
            }
            None => Err(self.err_here(format!("expected {what}, found end of input"))),
        }
    }

    /// An attribute name after a dot; a few keywords (`from`, `now`, `on`,
    /// `in`) double as attribute names there.
    fn attr_name(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Token {
                kind: TokKind::Ident(s),
                ..
            }) => {
                self.pos += 1;
                Ok(s)
            }
            Some(Token {
                kind: TokKind::Kw(kw),
                ..
            }) => {
                self.pos += 1;
                Ok(format!("{kw:?}").to_ascii_lowercase())
            }
            Some(t) => Err(self.err_at(
                t.line,
                t.col,
                format!("expected an attribute name, found {}", t.kind),
            )),
            None => Err(self.err_here("expected an attribute name, found end of input")),
        }
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        self.expect_kw(Kw::Select, "SELECT")?;
        if self.eat_kw(Kw::Gis) {
            Ok(Query::Gis(self.gis_tail()?))
        } else if self.eat_kw(Kw::Cube) {
            Ok(Query::Cube(self.cube_tail()?))
        } else {
            Err(self.err_here("expected GIS or CUBE after SELECT"))
        }
    }

    // -- GIS ----------------------------------------------------------------

    fn gis_tail(&mut self) -> Result<GisQuery, ParseError> {
        let modifier = if self.eat_kw(Kw::Snapshot) {
            Some(Modifier::Snapshot)
        } else if self.eat_kw(Kw::Current) {
            Some(Modifier::Current)
        } else {
            None
        };
        if modifier.is_some()
            && matches!(
                self.peek_kind(),
                Some(TokKind::Kw(Kw::Snapshot)) | Some(TokKind::Kw(Kw::Current))
            )
        {
            return Err(self.err_here("SNAPSHOT and CURRENT cannot be combined"));
        }
        let mut projection = vec![self.proj_item()?];
        while self.eat_kind(&TokKind::Comma) {
            projection.push(self.proj_item()?);
        }
        self.expect_kw(Kw::From, "FROM")?;
        let overlap = self.eat_kw(Kw::Overlap);
        let mut sources = vec![self.source()?];
        while self.eat_kind(&TokKind::Comma) {
            sources.push(self.source()?);
        }
        let mut seen = Vec::new();
        for s in &sources {
            if seen.contains(&&s.node.alias) {
                return Err(self.err_at(
                    s.span.line,
                    s.span.col,
                    format!("duplicate alias '{}'", s.node.alias),
                ));
            }
            seen.push(&s.node.alias);
        }
        self.expect_kw(Kw::Where, "WHERE")?;
        let condition = self.condition()?;
        Ok(GisQuery {
            modifier,
            projection,
            overlap,
            sources,
            condition,
        })
    }

    fn proj_item(&mut self) -> Result<Spanned<ProjItem>, ParseError> {
        let span = self.span();
        let alias = self.ident("a projection item")?;
        if self.eat_kind(&TokKind::Dot) {
            let attr = self.attr_name()?;
            Ok(Spanned::new(ProjItem::Attr { alias, attr }, span))
        } else {
            Ok(Spanned::new(ProjItem::Alias(alias), span))
        }
    }

    fn source(&mut self) -> Result<Spanned<Source>, ParseError> {
        let span = self.span();
        let layer = self.ident("a layer name")?;
        let alias_span = self.span();
        let alias = self.ident("an alias")?;
        let _ = alias_span;
        Ok(Spanned::new(
            Source {
                layer: Spanned::new(layer, span),
                alias,
            },
            span,
        ))
    }

    // -- conditions ----------------------------------------------------------

    fn condition(&mut self) -> Result<Condition, ParseError> {
        let mut left = self.and_expr()?;
        while self.eat_kw(Kw::Or) {
            let right = self.and_expr()?;
            left = Condition::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Condition, ParseError> {
        let mut left = self.not_expr()?;
        while self.eat_kw(Kw::And) {
            let right = self.not_expr()?;
            left = Condition::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Condition, ParseError> {
        if self.eat_kw(Kw::Not) {
            return Ok(Condition::Not(Box::new(self.not_expr()?)));
        }
        if self.peek_kind() == Some(&TokKind::LParen) {
            self.pos += 1;
            let inner = self.condition()?;
            self.expect_kind(TokKind::RParen)?;
            return Ok(inner);
        }
        let span = self.span();
        let atom = self.atom()?;
        Ok(Condition::Atom(Spanned::new(atom, span)))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        if let Some(TokKind::Ident(name)) = self.peek_kind() {
            let name = name.clone();
            if self.peek2_kind() == Some(&TokKind::LParen) {
                if let Some(pred) = SpatialPred::from_name(&name) {
                    self.pos += 2;
                    let mut args = vec![self.geom_ref()?];
                    while self.eat_kind(&TokKind::Comma) {
                        args.push(self.geom_ref()?);
                    }
                    self.expect_kind(TokKind::RParen)?;
                    return Ok(Atom::Spatial { pred, args });
                }
                if let Some(pred) = TemporalPred::from_name(&name) {
                    self.pos += 2;
                    let alias = self.ident("an alias")?;
                    self.expect_kind(TokKind::Comma)?;
                    let arg = self.temporal_arg(pred)?;
                    self.expect_kind(TokKind::RParen)?;
                    return Ok(Atom::Temporal { pred, alias, arg });
                }
            }
            // Bare alias IN (...) is sugar for the object identifier.
            if self.peek2_kind() == Some(&TokKind::Kw(Kw::In)) {
                self.pos += 2;
                return self.in_atom(name, None);
            }
            if self.peek2_kind() == Some(&TokKind::Dot) {
                // alias.attr — maybe IN, maybe a comparison.
                let save = self.pos;
                self.pos += 2;
                let attr = self.attr_name()?;
                if self.eat_kw(Kw::In) {
                    return self.in_atom(name, Some(attr));
                }
                self.pos = save;
            }
        }
        let left = self.expr()?;
        let op = self.cmp_op()?;
        let right = self.expr()?;
        Ok(Atom::Cmp { left, op, right })
    }

    fn in_atom(&mut self, alias: String, attr: Option<String>) -> Result<Atom, ParseError> {
        self.expect_kind(TokKind::LParen)?;
        self.expect_kw(Kw::Select, "SELECT")?;
        self.expect_kw(
            Kw::Cube,
            "CUBE (IN subqueries of a GIS query are cube queries)",
        )?;
        let mut sub = self.cube_tail()?;
        self.eat_kind(&TokKind::Semicolon);
        self.expect_kind(TokKind::RParen)?;
        // A SLICE printed after the closing parenthesis still belongs to the
        // cube subquery.
        if self.peek_kind() == Some(&TokKind::Kw(Kw::Slice)) {
            if sub.slice.is_some() {
                return Err(self.err_here("the cube subquery already has a SLICE"));
            }
            self.pos += 1;
            let span = self.span();
            let path = self.member_path()?;
            sub.slice = Some(Spanned::new(path, span));
        }
        Ok(Atom::In {
            alias,
            attr,
            subquery: Box::new(sub),
        })
    }

    fn geom_ref(&mut self) -> Result<GeomRef, ParseError> {
        let alias = self.ident("an alias")?;
        if self.eat_kind(&TokKind::Dot) {
            let attr = self.attr_name()?;
            Ok(GeomRef {
                alias,
                attr: Some(attr),
            })
        } else {
            Ok(GeomRef { alias, attr: None })
        }
    }

    fn temporal_arg(&mut self, pred: TemporalPred) -> Result<TemporalArg, ParseError> {
        match self.peek().cloned() {
            Some(Token {
                kind: TokKind::Interval(a, b),
                ..
            }) => {
                self.pos += 1;
                if pred.takes_instant() {
                    return Err(
                        self.err_here(format!("{} takes an instant, not an interval", pred.name()))
                    );
                }
                Ok(TemporalArg::Interval(a, b))
            }
            Some(tok) => {
                let lit = self.instant_lit(&tok)?;
                if !pred.takes_instant() {
                    return Err(self.err_at(
                        tok.line,
                        tok.col,
                        format!("{} takes an interval [t1,t2], not an instant", pred.name()),
                    ));
                }
                Ok(TemporalArg::Instant(lit))
            }
            None => Err(self.err_here("expected an instant or interval literal")),
        }
    }

    fn instant_lit(&mut self, tok: &Token) -> Result<TimeLiteral, ParseError> {
        let lit = match &tok.kind {
            TokKind::Int(n) => TimeLiteral::Number(*n),
            TokKind::Date { day, month, year } => TimeLiteral::Date {
                day: *day,
                month: *month,
                year: *year,
            },
            TokKind::Kw(Kw::Now) => TimeLiteral::Now,
            other => {
                return Err(self.err_at(
                    tok.line,
                    tok.col,
                    format!("expected an instant literal, found {other}"),
                ))
            }
        };
        self.pos += 1;
        Ok(lit)
    }

    fn cmp_op(&mut self) -> Result<CmpOp, ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokKind::Cmp(op),
                ..
            }) => {
                let op = *op;
                self.pos += 1;
                Ok(op)
            }
            Some(t) => Err(self.err_at(
                t.line,
                t.col,
                format!("expected a comparison operator, found {}", t.kind),
            )),
            None => Err(self.err_here("expected a comparison operator, found end of input")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Token {
                kind: TokKind::Ident(name),
                line,
                col,
            }) => {
                if self.peek2_kind() == Some(&TokKind::LParen) {
                    let lower = name.to_ascii_lowercase();
                    self.pos += 2;
                    match lower.as_str() {
                        "distance" => {
                            let a = self.geom_ref()?;
                            self.expect_kind(TokKind::Comma)?;
                            let b = self.geom_ref()?;
                            self.expect_kind(TokKind::RParen)?;
                            return Ok(Expr::Distance(a, b));
                        }
                        "area" => {
                            let g = self.geom_ref()?;
                            self.expect_kind(TokKind::RParen)?;
                            return Ok(Expr::Area(g));
                        }
                        _ => {
                            return Err(self.err_at(
                                line,
                                col,
                                format!("unknown function '{name}' (expected Distance or area)"),
                            ))
                        }
                    }
                }
                self.pos += 1;
                if self.eat_kind(&TokKind::Dot) {
                    let attr = self.attr_name()?;
                    Ok(Expr::Attr { alias: name, attr })
                } else {
                    Err(self.err_at(
                        line,
                        col,
                        format!("'{name}' alone is not an expression; use {name}.<attribute>"),
                    ))
                }
            }
            Some(Token {
                kind: TokKind::Int(n),
                ..
            }) => {
                self.pos += 1;
                Ok(Expr::Num(n as f64))
            }
            Some(Token {
                kind: TokKind::Num(n),
                ..
            }) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Token {
                kind: TokKind::Str(s),
                ..
            }) => {
                self.pos += 1;
                Ok(Expr::Str(s))
            }
            Some(t) => Err(self.err_at(
                t.line,
                t.col,
                format!("expected an expression, found {}", t.kind),
            )),
            None => Err(self.err_here("expected an expression, found end of input")),
        }
    }

    // -- CUBE ----------------------------------------------------------------

    fn cube_tail(&mut self) -> Result<CubeQuery, ParseError> {
        let select = self.cube_select()?;
        self.expect_kw(Kw::From, "FROM")?;
        let cube_span = self.span();
        let cube = match self.next() {
            Some(Token {
                kind: TokKind::Bracket(name),
                ..
            }) => name,
            Some(t) => {
                return Err(self.err_at(
                    t.line,
                    t.col,
                    format!("expected [cube name], found {}", t.kind),
                ))
            }
            None => return Err(self.err_here("expected [cube name], found end of input")),
        };
        let mut slicers = Vec::new();
        if self.eat_kw(Kw::Where) {
            loop {
                slicers.push(self.slicer_atom()?);
                if !self.eat_kw(Kw::And) {
                    break;
                }
            }
        }
        let slice = if self.eat_kw(Kw::Slice) {
            let span = self.span();
            Some(Spanned::new(self.member_path()?, span))
        } else {
            None
        };
        Ok(CubeQuery {
            select,
            cube: Spanned::new(cube, cube_span),
            slicers,
            slice,
        })
    }

    fn cube_select(&mut self) -> Result<CubeSelect, ParseError> {
        if let Some(TokKind::Ident(name)) = self.peek_kind() {
            if name.eq_ignore_ascii_case("filter") && self.peek2_kind() == Some(&TokKind::LParen) {
                self.pos += 2;
                let path_span = self.span();
                let mut path = self.member_path()?;
                match path.segments.last() {
                    Some(last) if last.eq_ignore_ascii_case("members") => {
                        path.segments.pop();
                    }
                    _ => {
                        return Err(self.err_here("the filter path must end in .Members"));
                    }
                }
                self.expect_kind(TokKind::Comma)?;
                let measure_span = self.span();
                let measure = self.member_path()?;
                let op = self.cmp_op()?;
                let threshold = match self.next() {
                    Some(Token {
                        kind: TokKind::Int(n),
                        ..
                    }) => n as f64,
                    Some(Token {
                        kind: TokKind::Num(n),
                        ..
                    }) => n,
                    Some(t) => {
                        return Err(self.err_at(
                            t.line,
                            t.col,
                            format!("expected a number, found {}", t.kind),
                        ))
                    }
                    None => return Err(self.err_here("expected a number, found end of input")),
                };
                self.expect_kind(TokKind::RParen)?;
                return Ok(CubeSelect::Filter {
                    path: Spanned::new(path, path_span),
                    measure: Spanned::new(measure, measure_span),
                    op,
                    threshold,
                });
            }
        }
        let mut items = Vec::new();
        loop {
            let span = self.span();
            let path = self.member_path()?;
            items.push(Spanned::new(path, span));
            if !self.eat_kind(&TokKind::Comma) {
                break;
            }
        }
        let axis = if self.eat_kw(Kw::On) {
            if self.eat_kw(Kw::Rows) {
                Some(Axis::Rows)
            } else if self.eat_kw(Kw::Columns) {
                Some(Axis::Columns)
            } else {
                return Err(self.err_here("expected ROWS or COLUMNS after ON"));
            }
        } else {
            None
        };
        Ok(CubeSelect::Items { items, axis })
    }

    fn member_path(&mut self) -> Result<MemberPath, ParseError> {
        let mut segments = vec![self.path_segment()?];
        while self.eat_kind(&TokKind::Dot) {
            segments.push(self.path_segment()?);
        }
        Ok(MemberPath::new(segments))
    }

    fn path_segment(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Token {
                kind: TokKind::Bracket(s),
                ..
            }) => Ok(s),
            Some(Token {
                kind: TokKind::Ident(s),
                ..
            }) => Ok(s),
            Some(t) => Err(self.err_at(
                t.line,
                t.col,
                format!(
                    "expected a path segment ([name] or identifier), found {}",
                    t.kind
                ),
            )),
            None => Err(self.err_here("expected a path segment, found end of input")),
        }
    }

    fn slicer_atom(&mut self) -> Result<CubeSlicer, ParseError> {
        let span = self.span();
        let path = self.member_path()?;
        if self.eat_kw(Kw::In) {
            self.expect_kind(TokKind::LParen)?;
            self.expect_kw(Kw::Select, "SELECT")?;
            self.expect_kw(Kw::Gis, "GIS (IN slicers of a cube query hold GIS queries)")?;
            let sub = self.gis_tail()?;
            self.eat_kind(&TokKind::Semicolon);
            self.expect_kind(TokKind::RParen)?;
            Ok(CubeSlicer::GisIn {
                path: Spanned::new(path, span),
                query: Box::new(sub),
            })
        } else {
            Ok(CubeSlicer::Member(Spanned::new(path, span)))
        }
    }
}
