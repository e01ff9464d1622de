//! The TCF container format: a line-oriented block text format holding one
//! representation (tiles, gf, or multisum) plus an optional basis block.
//!
//! ```text
//! # comment
//! basis {
//!   symbol alpha in [45/128, 46/128] refine sqrt 1/8 ;
//! }
//! tiles {
//!   epsilon 2 alpha ;
//!   tile { left [0, 1] : [0] ; right [0, 1/3, 2/3, 1] : [0 | 1/8 | 0] ; area 1 ; }
//! }
//! ```
//!
//! Rationals are written `p/q`, field elements as sums like `3/2 + 1 alpha`.
//! Emission is deterministic and re-parses to an equal document.

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{FieldElement, IrrationalBasis, Rat, Refinement, SymbolDecl};
use crate::gf::{parse_gf, GFExpr};
use crate::multisum::{AffineForm, BinomialMultiSum};
use crate::tiles::{Profile, Tile, TileSet};

#[derive(Clone, Debug)]
pub enum Representation {
    Tiles(TileSet),
    Gf(GFExpr),
    Multisum(BinomialMultiSum),
}

#[derive(Clone, Debug)]
pub struct TcfDocument {
    pub rep: Representation,
}

impl TcfDocument {
    pub fn kind(&self) -> &'static str {
        match &self.rep {
            Representation::Tiles(_) => "tiles",
            Representation::Gf(_) => "gf",
            Representation::Multisum(_) => "multisum",
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Int(BigInt),
    Str(String),
    Punct(char),
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
        } else if b == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if b == b'"' {
            let start = i;
            i += 1;
            let s = i;
            while i < bytes.len() && bytes[i] != b'"' {
                i += 1;
            }
            if i == bytes.len() {
                return Err(Error::Syntax { pos: start, msg: "unterminated string".into() });
            }
            toks.push((start, Tok::Str(String::from_utf8_lossy(&bytes[s..i]).into_owned())));
            i += 1;
        } else if b.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = std::str::from_utf8(&bytes[start..i]).unwrap().parse().unwrap();
            toks.push((start, Tok::Int(n)));
        } else if b.is_ascii_alphabetic() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((start, Tok::Word(String::from_utf8_lossy(&bytes[start..i]).into_owned())));
        } else if b"{}[]():;|,+-=/".contains(&b) {
            toks.push((i, Tok::Punct(b as char)));
            i += 1;
        } else {
            return Err(Error::Syntax { pos: i, msg: format!("unexpected character '{}'", b as char) });
        }
    }
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(usize::MAX)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.here().min(1 << 30), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected '{c}'"))
            }
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<()> {
        match self.next() {
            Some(Tok::Word(x)) if x == w => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected '{w}'"))
            }
        }
    }

    fn word(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Word(x)) => Ok(x),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected an identifier")
            }
        }
    }

    fn peek_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn peek_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Tok::Punct(p)) if *p == c)
    }

    fn int(&mut self) -> Result<BigInt> {
        let neg = if self.peek_punct('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Int(n)) => Ok(if neg { -n } else { n }),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected an integer")
            }
        }
    }

    /// `p` or `p/q`, optionally negative.
    fn rational(&mut self) -> Result<Rat> {
        let num = self.int()?;
        if self.peek_punct('/') {
            self.pos += 1;
            let den = self.int()?;
            if den.is_zero() {
                return self.err("zero denominator");
            }
            Ok(Rat::new(num, den))
        } else {
            Ok(Rat::from_integer(num))
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Field element: `term (('+'|'-') term)*` with
/// `term := RAT [NAME] | NAME`.
fn parse_field_element(lx: &mut Lexer, basis: &IrrationalBasis) -> Result<FieldElement> {
    let mut fe = FieldElement::zero(basis.dim());
    let mut sign = BigInt::one();
    if lx.peek_punct('-') {
        lx.pos += 1;
        sign = -sign;
    }
    loop {
        let coeff;
        let mut name: Option<String> = None;
        match lx.peek() {
            Some(Tok::Int(_)) => {
                coeff = lx.rational()? * Rat::from_integer(sign.clone());
                if let Some(Tok::Word(_)) = lx.peek() {
                    name = Some(lx.word()?);
                }
            }
            Some(Tok::Word(_)) => {
                coeff = Rat::from_integer(sign.clone());
                name = Some(lx.word()?);
            }
            _ => return lx.err("expected a field-element term"),
        }
        let idx = match name {
            None => 0,
            Some(n) => match basis.symbol_index(&n) {
                Some(i) => i + 1,
                None => return lx.err(format!("unknown basis symbol '{n}'")),
            },
        };
        let old = fe.coord(idx);
        fe.set_coord(idx, old + coeff);
        match lx.peek() {
            Some(Tok::Punct('+')) => {
                lx.pos += 1;
                sign = BigInt::one();
            }
            Some(Tok::Punct('-')) => {
                lx.pos += 1;
                sign = -BigInt::one();
            }
            _ => break,
        }
    }
    Ok(fe)
}

fn parse_basis_block(lx: &mut Lexer) -> Result<Arc<IrrationalBasis>> {
    lx.expect_word("basis")?;
    lx.expect_punct('{')?;
    let mut symbols = Vec::new();
    while lx.peek_word("symbol") {
        lx.pos += 1;
        let name = lx.word()?;
        lx.expect_word("in")?;
        lx.expect_punct('[')?;
        let lo = lx.rational()?;
        lx.expect_punct(',')?;
        let hi = lx.rational()?;
        lx.expect_punct(']')?;
        let allow_nonpositive = if lx.peek_word("nonneg") {
            lx.pos += 1;
            true
        } else {
            false
        };
        let refine = if lx.peek_word("refine") {
            lx.pos += 1;
            if lx.peek_word("sqrt") {
                lx.pos += 1;
                let radicand = lx.rational()?;
                let shift = if lx.peek_punct('+') {
                    lx.pos += 1;
                    lx.rational()?
                } else if lx.peek_punct('-') {
                    lx.pos += 1;
                    -lx.rational()?
                } else {
                    Rat::zero()
                };
                Refinement::Sqrt { radicand, shift }
            } else if lx.peek_word("table") {
                lx.pos += 1;
                let mut table = Vec::new();
                while lx.peek_punct('[') {
                    lx.pos += 1;
                    let a = lx.rational()?;
                    lx.expect_punct(',')?;
                    let b = lx.rational()?;
                    lx.expect_punct(']')?;
                    table.push((a, b));
                }
                Refinement::Table(table)
            } else {
                return lx.err("expected 'sqrt' or 'table' after 'refine'");
            }
        } else {
            Refinement::None
        };
        lx.expect_punct(';')?;
        symbols.push(SymbolDecl { name, lo, hi, allow_nonpositive, refine });
    }
    lx.expect_punct('}')?;
    Ok(Arc::new(IrrationalBasis::new(symbols)?))
}

fn parse_profile(lx: &mut Lexer, basis: &IrrationalBasis) -> Result<Profile> {
    lx.expect_punct('[')?;
    let mut heights = vec![lx.rational()?];
    while lx.peek_punct(',') {
        lx.pos += 1;
        heights.push(lx.rational()?);
    }
    lx.expect_punct(']')?;
    lx.expect_punct(':')?;
    lx.expect_punct('[')?;
    let mut offsets = vec![parse_field_element(lx, basis)?];
    while lx.peek_punct('|') {
        lx.pos += 1;
        offsets.push(parse_field_element(lx, basis)?);
    }
    lx.expect_punct(']')?;
    Profile::new(heights, offsets)
}

fn parse_tiles_block(lx: &mut Lexer, basis: Arc<IrrationalBasis>) -> Result<TileSet> {
    lx.expect_word("tiles")?;
    lx.expect_punct('{')?;
    lx.expect_word("epsilon")?;
    let epsilon = parse_field_element(lx, &basis)?;
    lx.expect_punct(';')?;
    let mut tiles = Vec::new();
    while lx.peek_word("tile") {
        lx.pos += 1;
        lx.expect_punct('{')?;
        lx.expect_word("left")?;
        let left = parse_profile(lx, &basis)?;
        lx.expect_punct(';')?;
        lx.expect_word("right")?;
        let right = parse_profile(lx, &basis)?;
        lx.expect_punct(';')?;
        lx.expect_word("area")?;
        let area = parse_field_element(lx, &basis)?;
        lx.expect_punct(';')?;
        lx.expect_punct('}')?;
        tiles.push(Tile::new(left, right, area));
    }
    lx.expect_punct('}')?;
    TileSet::new(basis, tiles, epsilon)
}

fn parse_gf_block(lx: &mut Lexer) -> Result<GFExpr> {
    lx.expect_word("gf")?;
    lx.expect_punct('{')?;
    lx.expect_word("vars")?;
    let vars = lx.int()?;
    lx.expect_punct(';')?;
    lx.expect_word("expr")?;
    let text = match lx.next() {
        Some(Tok::Str(s)) => s,
        _ => return lx.err("expected a quoted expression"),
    };
    lx.expect_punct(';')?;
    lx.expect_punct('}')?;
    let k = usize::try_from(&vars).map_err(|_| Error::Syntax { pos: 0, msg: "bad vars".into() })?;
    let e = parse_gf(&text)?;
    if e.k() > k.max(1) {
        return Err(Error::Syntax {
            pos: 0,
            msg: format!("expression uses {} variables, vars says {}", e.k(), k),
        });
    }
    GFExpr::new(k, e.root().clone())
}

fn parse_affine(lx: &mut Lexer, d: usize) -> Result<AffineForm> {
    lx.expect_punct('=')?;
    let mut coeffs = Vec::with_capacity(d);
    for _ in 0..d {
        let c = lx.int()?;
        coeffs.push(i64::try_from(&c).map_err(|_| Error::Syntax { pos: 0, msg: "coefficient too large".into() })?);
    }
    lx.expect_punct('|')?;
    lx.expect_word("n")?;
    lx.expect_punct(':')?;
    let n = lx.int()?;
    lx.expect_punct('|')?;
    lx.expect_word("c")?;
    lx.expect_punct(':')?;
    let c = lx.int()?;
    Ok(AffineForm::new(
        coeffs,
        i64::try_from(&n).map_err(|_| Error::Syntax { pos: 0, msg: "n coefficient too large".into() })?,
        i64::try_from(&c).map_err(|_| Error::Syntax { pos: 0, msg: "constant too large".into() })?,
    ))
}

fn parse_multisum_block(lx: &mut Lexer) -> Result<BinomialMultiSum> {
    lx.expect_word("multisum")?;
    lx.expect_punct('{')?;
    lx.expect_word("dims")?;
    let d = lx.int()?;
    let d = usize::try_from(&d).map_err(|_| Error::Syntax { pos: 0, msg: "bad dims".into() })?;
    lx.expect_punct(';')?;
    let mut factors = Vec::new();
    while lx.peek_word("factor") {
        lx.pos += 1;
        lx.expect_word("alpha")?;
        let alpha = parse_affine(lx, d)?;
        lx.expect_punct(';')?;
        lx.expect_word("beta")?;
        let beta = parse_affine(lx, d)?;
        lx.expect_punct(';')?;
        factors.push((alpha, beta));
    }
    lx.expect_punct('}')?;
    Ok(BinomialMultiSum::new(d, factors))
}

/// Parse one TCF document.
pub fn parse(text: &str) -> Result<TcfDocument> {
    let mut lx = lex(text)?;
    let basis = if lx.peek_word("basis") {
        Some(parse_basis_block(&mut lx)?)
    } else {
        None
    };
    let rep = if lx.peek_word("tiles") {
        let basis = basis.unwrap_or_else(|| Arc::new(IrrationalBasis::rational_only()));
        Representation::Tiles(parse_tiles_block(&mut lx, basis)?)
    } else if lx.peek_word("gf") {
        Representation::Gf(parse_gf_block(&mut lx)?)
    } else if lx.peek_word("multisum") {
        Representation::Multisum(parse_multisum_block(&mut lx)?)
    } else {
        return lx.err("expected a 'tiles', 'gf', or 'multisum' block");
    };
    if lx.peek().is_some() {
        return lx.err("trailing input after the representation block");
    }
    Ok(TcfDocument { rep })
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

fn emit_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn emit_field_element(fe: &FieldElement, basis: &IrrationalBasis) -> String {
    if fe.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    let mut first = true;
    for (idx, coeff) in fe.coords() {
        let (sign, mag) = if coeff.is_negative() {
            ("-", -coeff.clone())
        } else {
            ("+", coeff.clone())
        };
        if first {
            if sign == "-" {
                out.push_str("- ");
            }
            first = false;
        } else {
            out.push_str(if sign == "-" { " - " } else { " + " });
        }
        if idx == 0 {
            out.push_str(&emit_rat(&mag));
        } else {
            let name = &basis.symbols()[idx - 1].name;
            write!(out, "{} {}", emit_rat(&mag), name).unwrap();
        }
    }
    out
}

fn emit_profile(p: &Profile, basis: &IrrationalBasis) -> String {
    let hs: Vec<String> = p.heights().iter().map(emit_rat).collect();
    let os: Vec<String> = p.offsets().iter().map(|o| emit_field_element(o, basis)).collect();
    format!("[{}] : [{}]", hs.join(", "), os.join(" | "))
}

/// Emit a document as deterministic TCF text.
pub fn emit(doc: &TcfDocument) -> String {
    let mut out = String::new();
    match &doc.rep {
        Representation::Tiles(ts) => {
            if !ts.basis.is_empty() {
                out.push_str("basis {\n");
                for s in ts.basis.symbols() {
                    write!(out, "  symbol {} in [{}, {}]", s.name, emit_rat(&s.lo), emit_rat(&s.hi)).unwrap();
                    if s.allow_nonpositive {
                        out.push_str(" nonneg");
                    }
                    match &s.refine {
                        Refinement::None => {}
                        Refinement::Sqrt { radicand, shift } => {
                            write!(out, " refine sqrt {}", emit_rat(radicand)).unwrap();
                            if !shift.is_zero() {
                                if shift.is_negative() {
                                    write!(out, " - {}", emit_rat(&-shift.clone())).unwrap();
                                } else {
                                    write!(out, " + {}", emit_rat(shift)).unwrap();
                                }
                            }
                        }
                        Refinement::Table(t) => {
                            out.push_str(" refine table");
                            for (a, b) in t {
                                write!(out, " [{}, {}]", emit_rat(a), emit_rat(b)).unwrap();
                            }
                        }
                    }
                    out.push_str(" ;\n");
                }
                out.push_str("}\n");
            }
            out.push_str("tiles {\n");
            writeln!(out, "  epsilon {} ;", emit_field_element(&ts.epsilon, &ts.basis)).unwrap();
            for t in &ts.tiles {
                writeln!(
                    out,
                    "  tile {{ left {} ; right {} ; area {} ; }}",
                    emit_profile(&t.left, &ts.basis),
                    emit_profile(&t.right, &ts.basis),
                    emit_field_element(&t.area, &ts.basis)
                )
                .unwrap();
            }
            out.push_str("}\n");
        }
        Representation::Gf(e) => {
            out.push_str("gf {\n");
            writeln!(out, "  vars {} ;", e.k()).unwrap();
            writeln!(out, "  expr \"{}\" ;", e.to_text()).unwrap();
            out.push_str("}\n");
        }
        Representation::Multisum(ms) => {
            out.push_str("multisum {\n");
            writeln!(out, "  dims {} ;", ms.d).unwrap();
            for (a, b) in &ms.factors {
                let ac: Vec<String> = a.coeffs.iter().map(|c| c.to_string()).collect();
                let bc: Vec<String> = b.coeffs.iter().map(|c| c.to_string()).collect();
                writeln!(
                    out,
                    "  factor alpha = {} | n: {} | c: {} ; beta = {} | n: {} | c: {} ;",
                    ac.join(" "),
                    a.n_coeff,
                    a.constant,
                    bc.join(" "),
                    b.n_coeff,
                    b.constant
                )
                .unwrap();
            }
            out.push_str("}\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exactnum::DEFAULT_SIGN_BUDGET;
    use crate::multisum::eval_multisum;
    use crate::transfer::count_tilings;
    use num_bigint::BigUint;

    fn doc_value(doc: &TcfDocument, n: u64) -> BigUint {
        match &doc.rep {
            Representation::Tiles(ts) => count_tilings(ts, n, DEFAULT_SIGN_BUDGET).unwrap(),
            Representation::Gf(e) => crate::gf::diagonal(e, n as u32),
            Representation::Multisum(ms) => eval_multisum(ms, n as i64).unwrap(),
        }
    }

    #[test]
    fn catalog_round_trips() {
        for entry in catalog::entries() {
            let mut docs: Vec<TcfDocument> = Vec::new();
            if let Some(ts) = &entry.tiles {
                docs.push(TcfDocument { rep: Representation::Tiles(ts.clone()) });
            }
            if let Some(e) = &entry.gf {
                docs.push(TcfDocument { rep: Representation::Gf(e.clone()) });
            }
            if let Some(ms) = &entry.multisum {
                docs.push(TcfDocument { rep: Representation::Multisum(ms.clone()) });
            }
            for doc in docs {
                let text = emit(&doc);
                let back = parse(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", entry.name));
                let text2 = emit(&back);
                assert_eq!(text, text2, "emission must be stable for {}", entry.name);
                for n in 0..=10u64 {
                    assert_eq!(doc_value(&back, n), doc_value(&doc, n), "{} at n={n}", entry.name);
                }
            }
        }
    }

    #[test]
    fn parse_errors_have_positions() {
        assert!(matches!(parse("tiles {"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("gf { vars 1 ; expr \"Q(\" ; }"), Err(Error::Syntax { .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("multisum { dims 1 ; } extra"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn comments_and_whitespace_ignored() {
        let text = "# header\nmultisum { # inline\n dims 0 ;\n factor alpha = | n: 2 | c: 0 ; beta = | n: 1 | c: 0 ; }";
        let doc = parse(text).unwrap();
        assert_eq!(doc.kind(), "multisum");
        assert_eq!(doc_value(&doc, 3), BigUint::from(20u32));
    }
}
