//! Recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! formula  := implies
//! implies  := or ( "->" implies )?
//! or       := and ( "|" and )*
//! and      := unary ( "&" unary )*
//! unary    := "!" unary | "K[" agent "]" unary
//!           | ("E" | "C") "[" agent ("," agent)* "]" unary | primary
//! primary  := "true" | "false" | "p[" agent "," value "]" | "(" formula ")"
//! ```

use thiserror::Error;

use super::Formula;
use crate::complex::{AgentId, Agents, Atom};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("SyntaxError at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("UnknownAgent `{name}` at {pos}")]
    UnknownAgent { pos: usize, name: String },
}

pub fn parse(text: &str, agents: &Agents) -> Result<Formula, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        text,
        pos: 0,
        agents,
    };
    let f = p.implies()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    agents: &'a Agents,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{tok}`")))
        }
    }

    /// Keyword match that does not swallow the prefix of a longer word.
    fn eat_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        if rest.starts_with(word) {
            let next = rest[word.len()..].bytes().next();
            if !next.is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += word.len();
                return true;
            }
        }
        false
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let l = self.or()?;
        if self.eat("->") {
            let r = self.implies()?;
            return Ok(Formula::implies(l, r));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut l = self.and()?;
        while self.eat("|") {
            let r = self.and()?;
            l = Formula::or(l, r);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut l = self.unary()?;
        while self.eat("&") {
            let r = self.unary()?;
            l = Formula::and(l, r);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(op @ (b'K' | b'E' | b'C')) if self.src.get(self.pos + 1) == Some(&b'[') => {
                self.pos += 2;
                let group = self.agent_list()?;
                self.expect("]")?;
                let body = self.unary()?;
                match op {
                    b'K' => {
                        if group.len() != 1 {
                            return Err(self.error("K takes exactly one agent"));
                        }
                        Ok(Formula::knows(group[0], body))
                    }
                    b'E' => Ok(Formula::everyone(group, body)),
                    _ => Ok(Formula::common(group, body)),
                }
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        if self.eat("(") {
            let f = self.implies()?;
            self.expect(")")?;
            return Ok(f);
        }
        if self.eat_word("true") {
            return Ok(Formula::True);
        }
        if self.eat_word("false") {
            return Ok(Formula::False);
        }
        if self.eat("p[") {
            let agent = self.agent()?;
            self.expect(",")?;
            let value = self.value()?;
            self.expect("]")?;
            return Ok(Formula::Atom(Atom::new(agent, value)));
        }
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(_) => Err(self.error("expected a formula")),
        }
    }

    fn agent_list(&mut self) -> Result<Vec<AgentId>, ParseError> {
        let mut out = vec![self.agent()?];
        while self.eat(",") {
            out.push(self.agent()?);
        }
        Ok(out)
    }

    fn agent(&mut self) -> Result<AgentId, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an agent name"));
        }
        let name = &self.text[start..self.pos];
        self.agents.id(name).ok_or(ParseError::UnknownAgent {
            pos: start,
            name: name.to_string(),
        })
    }

    fn value(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c == b']' || c == b',' || c == b'[' || c.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a value"));
        }
        Ok(self.text[start..self.pos].to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bgw() -> Agents {
        Agents::new(["b", "g", "w"]).unwrap()
    }

    #[test]
    fn knowledge_of_atom() {
        let ag = bgw();
        let f = parse("K[g] p[g,0]", &ag).unwrap();
        assert_eq!(
            f,
            Formula::knows(AgentId(1), Formula::atom(AgentId(1), "0"))
        );
    }

    #[test]
    fn common_knowledge_over_disjunction() {
        let ag = bgw();
        let f = parse("C[b,g,w] (p[b,0] | p[g,0] | p[w,0])", &ag).unwrap();
        let phi0 = Formula::or_all((0..3).map(|i| Formula::atom(AgentId(i), "0")));
        assert_eq!(f, Formula::common(ag.all(), phi0));
    }

    #[test]
    fn conjunction_with_negated_atom() {
        let ag = bgw();
        let f = parse("p[g,0] & !p[w,1]", &ag).unwrap();
        assert_eq!(
            f,
            Formula::and(
                Formula::atom(AgentId(1), "0"),
                Formula::not(Formula::atom(AgentId(2), "1"))
            )
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let ag = bgw();
        let a = || Formula::atom(AgentId(0), "0");
        let b = || Formula::atom(AgentId(1), "0");
        let c = || Formula::atom(AgentId(2), "0");
        assert_eq!(
            parse("p[b,0] | p[g,0] & p[w,0]", &ag).unwrap(),
            Formula::or(a(), Formula::and(b(), c()))
        );
        assert_eq!(
            parse("p[b,0] -> p[g,0] -> p[w,0]", &ag).unwrap(),
            Formula::implies(a(), Formula::implies(b(), c()))
        );
        assert_eq!(
            parse("!K[b] p[b,0] & p[g,0]", &ag).unwrap(),
            Formula::and(Formula::not(Formula::knows(AgentId(0), a())), b())
        );
        assert_eq!(parse("truex", &ag).is_err(), true);
    }

    #[test]
    fn errors_carry_positions() {
        let ag = bgw();
        assert_eq!(
            parse("K[x] p[g,0]", &ag),
            Err(ParseError::UnknownAgent {
                pos: 2,
                name: "x".into()
            })
        );
        assert!(matches!(
            parse("p[g,0] &", &ag),
            Err(ParseError::Syntax { pos: 8, .. })
        ));
        assert!(matches!(
            parse("(p[g,0]", &ag),
            Err(ParseError::Syntax { pos: 7, .. })
        ));
        assert!(matches!(
            parse("K[b,g] p[g,0]", &ag),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn printing_round_trips() {
        let ag = bgw();
        for text in [
            "K[g] p[g,0]",
            "C[b,g,w] (p[b,0] | p[g,0] | p[w,0])",
            "p[g,0] & !p[w,1]",
            "(p[b,0] -> p[g,1]) -> !(p[w,0] & true)",
            "p[b,0] & (p[g,0] & p[w,0])",
            "E[b,w] K[g] !false",
        ] {
            let f = parse(text, &ag).unwrap();
            let printed = f.display(&ag).to_string();
            assert_eq!(parse(&printed, &ag).unwrap(), f, "{printed}");
        }
    }
}
