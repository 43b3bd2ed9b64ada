//! Text syntax for polynomials over the generator grid.
//!
//! ```text
//! expr      := ("+" | "-")? term (("+" | "-") term)*
//! term      := coeff ("*")? factorseq ("#" factorseq)*
//!            | coeff                      (bare numeral: coeff times 1)
//!            | factorseq ("#" factorseq)*
//! factorseq := factor ("*" factor)* | "1"
//! factor    := "a" "(" int "," int ")" ("'")?
//! coeff     := int ("/" int | "." int)?
//! ```
//!
//! Whitespace is insignificant between tokens. Coefficients are parsed
//! exactly: `0.25` becomes the rational `1/4`, never a float. A prime on a
//! generator denotes its adjoint, which is the generator itself (they are
//! self-adjoint), so `a(1,2)'` and `a(1,2)` parse identically. All terms must
//! use the same number of tensor legs; bare numerals adopt the common count.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Coeff, Generator, NCPolynomial, TensorWord};
use crate::error::Error;

pub fn parse_expression(input: &str, n: u32) -> Result<NCPolynomial, Error> {
    if n == 0 {
        return Err(Error::Structural("algebra size must be positive".into()));
    }
    let mut parser = Parser {
        src: input.as_bytes(),
        pos: 0,
        n,
    };
    parser.skip_ws();
    if parser.at_end() {
        return Err(parser.error("expected an expression"));
    }

    let mut raw_terms = Vec::new();
    let mut sign = match parser.peek() {
        Some(b'+') => {
            parser.pos += 1;
            1
        }
        Some(b'-') => {
            parser.pos += 1;
            -1
        }
        _ => 1,
    };
    loop {
        raw_terms.push(parser.parse_term(sign)?);
        parser.skip_ws();
        match parser.peek() {
            None => break,
            Some(b'+') => {
                parser.pos += 1;
                sign = 1;
            }
            Some(b'-') => {
                parser.pos += 1;
                sign = -1;
            }
            Some(_) => return Err(parser.error("expected '+', '-', or end of input")),
        }
    }

    // All explicit words must agree on the tensor leg count; bare numerals
    // adopt it (defaulting to one leg when every term is a numeral).
    let mut legs: Option<(usize, usize)> = None; // (count, position)
    for term in &raw_terms {
        if let Some(word) = &term.word {
            match legs {
                None => legs = Some((word.len(), term.start)),
                Some((count, _)) if count != word.len() => {
                    return Err(Error::Parse {
                        pos: term.start,
                        msg: format!(
                            "term has {} tensor legs, previous terms have {}",
                            word.len(),
                            count
                        ),
                    });
                }
                Some(_) => {}
            }
        }
    }
    let leg_count = legs.map_or(1, |(count, _)| count);

    let mut poly = NCPolynomial::zero(n, leg_count);
    for term in raw_terms {
        let word = match term.word {
            Some(legs) => TensorWord::new(legs),
            None => TensorWord::unit(leg_count),
        };
        let single = NCPolynomial::from_term(n, word, term.coeff)
            .expect("parser validated indices and legs");
        poly = poly.add(&single).expect("terms share n and leg count");
    }
    Ok(poly)
}

struct RawTerm {
    coeff: Coeff,
    /// `None` for a bare numeral.
    word: Option<Vec<Vec<Generator>>>,
    start: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: u32,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8, what: &str) -> Result<(), Error> {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn parse_term(&mut self, sign: i64) -> Result<RawTerm, Error> {
        self.skip_ws();
        let start = self.pos;
        let sign_coeff = Complex::new(BigRational::from(BigInt::from(sign)), BigRational::zero());

        match self.peek() {
            Some(b'0'..=b'9') => {
                let number = self.parse_number()?;
                let coeff = Complex::new(number.clone(), BigRational::zero()) * sign_coeff;
                self.skip_ws();
                match self.peek() {
                    // `1 # ...`: the numeral was a unit factorseq, not a
                    // coefficient.
                    Some(b'#') if number.is_one() => {
                        let mut legs = vec![Vec::new()];
                        while self.peek() == Some(b'#') {
                            self.pos += 1;
                            legs.push(self.parse_factorseq()?);
                            self.skip_ws();
                        }
                        Ok(RawTerm {
                            coeff,
                            word: Some(legs),
                            start,
                        })
                    }
                    Some(b'#') => Err(self.error("'#' may only follow a generator product or '1'")),
                    Some(b'*') => {
                        self.pos += 1;
                        let legs = self.parse_leg_chain()?;
                        Ok(RawTerm {
                            coeff,
                            word: Some(legs),
                            start,
                        })
                    }
                    Some(b'a') | Some(b'1') => {
                        let legs = self.parse_leg_chain()?;
                        Ok(RawTerm {
                            coeff,
                            word: Some(legs),
                            start,
                        })
                    }
                    Some(b'+') | Some(b'-') | None => Ok(RawTerm {
                        coeff,
                        word: None,
                        start,
                    }),
                    Some(_) => {
                        Err(self.error("expected a generator, '1', '+', '-', or end of input"))
                    }
                }
            }
            Some(b'a') => {
                let legs = self.parse_leg_chain()?;
                Ok(RawTerm {
                    coeff: sign_coeff,
                    word: Some(legs),
                    start,
                })
            }
            _ => Err(self.error("expected a term (coefficient, generator, or '1')")),
        }
    }

    /// `factorseq ("#" factorseq)*`
    fn parse_leg_chain(&mut self) -> Result<Vec<Vec<Generator>>, Error> {
        let mut legs = vec![self.parse_factorseq()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b'#') {
                self.pos += 1;
                legs.push(self.parse_factorseq()?);
            } else {
                return Ok(legs);
            }
        }
    }

    fn parse_factorseq(&mut self) -> Result<Vec<Generator>, Error> {
        self.skip_ws();
        match self.peek() {
            Some(b'1') => {
                // A lone '1' is the empty product; reject '1' that starts a
                // longer numeral, which cannot appear inside a word.
                match self.src.get(self.pos + 1) {
                    Some(b'0'..=b'9' | b'.' | b'/') => {
                        Err(self.error("expected a generator 'a(i,j)' or '1'"))
                    }
                    _ => {
                        self.pos += 1;
                        Ok(Vec::new())
                    }
                }
            }
            Some(b'a') => {
                let mut gens = vec![self.parse_factor()?];
                loop {
                    self.skip_ws();
                    if self.peek() == Some(b'*') {
                        self.pos += 1;
                        gens.push(self.parse_factor()?);
                    } else {
                        return Ok(gens);
                    }
                }
            }
            _ => Err(self.error("expected a generator 'a(i,j)' or '1'")),
        }
    }

    fn parse_factor(&mut self) -> Result<Generator, Error> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() != Some(b'a') {
            return Err(self.error("expected a generator 'a(i,j)'"));
        }
        self.pos += 1;
        self.expect(b'(', "'(' after 'a'")?;
        self.skip_ws();
        let i = self.parse_u32()?;
        self.expect(b',', "',' between generator indices")?;
        self.skip_ws();
        let j = self.parse_u32()?;
        self.expect(b')', "')' after generator indices")?;
        // Generators are self-adjoint, so an adjoint mark changes nothing.
        if self.peek() == Some(b'\'') {
            self.pos += 1;
        }
        if i == 0 || i > self.n || j == 0 || j > self.n {
            return Err(Error::Parse {
                pos: start,
                msg: format!("generator index ({i},{j}) out of range 1..={}", self.n),
            });
        }
        Ok(Generator { row: i, col: j })
    }

    fn parse_u32(&mut self) -> Result<u32, Error> {
        let digits = self.take_digits()?;
        digits
            .parse::<u32>()
            .map_err(|_| self.error(format!("index {digits} is too large")))
    }

    fn take_digits(&mut self) -> Result<String, Error> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .expect("digits are ASCII")
            .to_string())
    }

    /// Non-negative exact rational: `int`, `int/int`, or `int.int` (the
    /// decimal form converts exactly, `0.25` → `1/4`).
    fn parse_number(&mut self) -> Result<BigRational, Error> {
        let int_digits = self.take_digits()?;
        let int_part: BigInt = int_digits.parse().expect("digit string");
        match self.peek() {
            Some(b'/') => {
                self.pos += 1;
                self.skip_ws();
                let denom_start = self.pos;
                let denom: BigInt = self.take_digits()?.parse().expect("digit string");
                if denom.is_zero() {
                    return Err(Error::Parse {
                        pos: denom_start,
                        msg: "zero denominator".into(),
                    });
                }
                Ok(BigRational::new(int_part, denom))
            }
            Some(b'.') => {
                self.pos += 1;
                let frac_digits = self.take_digits()?;
                let scale = BigInt::from(10u32).pow(frac_digits.len() as u32);
                let frac: BigInt = frac_digits.parse().expect("digit string");
                Ok(BigRational::new(int_part * &scale + frac, scale))
            }
            _ => Ok(BigRational::from(int_part)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::rational;
    use super::*;

    fn gen(i: u32, j: u32) -> Generator {
        Generator { row: i, col: j }
    }

    fn word1(gens: Vec<Generator>) -> TensorWord {
        TensorWord::new(vec![gens])
    }

    #[test]
    fn single_generator() {
        let p = parse_expression("a(1,2)", 4).unwrap();
        assert_eq!(p.term_count(), 1);
        let (word, coeff) = p.terms().next().unwrap();
        assert_eq!(word, &word1(vec![gen(1, 2)]));
        assert!(coeff.re.is_one() && coeff.im.is_zero());
    }

    #[test]
    fn adjoint_mark_is_identity_on_generators() {
        assert_eq!(
            parse_expression("a(1,2)'", 4).unwrap(),
            parse_expression("a(1,2)", 4).unwrap()
        );
        assert_eq!(
            parse_expression("a(1,2)'*a(2,1)'", 4).unwrap(),
            parse_expression("a(1,2)*a(2,1)", 4).unwrap()
        );
    }

    #[test]
    fn coefficients_parse_exactly() {
        let p = parse_expression("3/7 a(1,1)", 4).unwrap();
        assert_eq!(p.terms().next().unwrap().1, &rational(3, 7));

        let dec = parse_expression("0.25 a(1,1)", 4).unwrap();
        assert_eq!(dec.terms().next().unwrap().1, &rational(1, 4));

        let dec2 = parse_expression("2.5 a(1,1)", 4).unwrap();
        assert_eq!(dec2.terms().next().unwrap().1, &rational(5, 2));

        // Star between coefficient and word is tolerated.
        let star = parse_expression("3*a(1,1)", 4).unwrap();
        assert_eq!(star.terms().next().unwrap().1, &rational(3, 1));
    }

    #[test]
    fn signs_and_cancellation() {
        let p = parse_expression("a(1,1) - a(1,1)", 4).unwrap();
        assert!(p.is_zero());

        let q = parse_expression("-a(1,1) + 2 a(1,1)", 4).unwrap();
        assert_eq!(q.terms().next().unwrap().1, &rational(1, 1));

        let r = parse_expression("- 3/2 a(2,2)", 4).unwrap();
        assert_eq!(r.terms().next().unwrap().1, &rational(-3, 2));
    }

    #[test]
    fn tensor_legs() {
        let p = parse_expression("a(1,1) # a(2,2)*a(3,3)", 4).unwrap();
        assert_eq!(p.leg_count(), 2);
        let (word, _) = p.terms().next().unwrap();
        assert_eq!(word.legs()[0], vec![gen(1, 1)]);
        assert_eq!(word.legs()[1], vec![gen(2, 2), gen(3, 3)]);

        let unit_legs = parse_expression("1 # 1", 4).unwrap();
        assert_eq!(unit_legs.leg_count(), 2);
        assert!(unit_legs.terms().next().unwrap().0.is_empty());

        let mixed = parse_expression("a(1,1) # 1 + 1 # a(2,2)", 4).unwrap();
        assert_eq!(mixed.term_count(), 2);
    }

    #[test]
    fn bare_numerals() {
        let one = parse_expression("1", 4).unwrap();
        assert_eq!(one, NCPolynomial::unit(4, 1));

        let zero = parse_expression("0", 4).unwrap();
        assert!(zero.is_zero());

        // Bare numerals adopt the leg count of the explicit terms.
        let mixed = parse_expression("a(1,1) # a(2,2) + 3/2", 4).unwrap();
        assert_eq!(mixed.leg_count(), 2);
        assert_eq!(mixed.term_count(), 2);

        let sum = parse_expression("1 + 1", 4).unwrap();
        assert_eq!(sum, NCPolynomial::unit(4, 1).scale(&rational(2, 1)));
    }

    #[test]
    fn whitespace_is_insignificant() {
        let spaced = parse_expression("  3/7   a ( 1 , 2 )  *  a(2,1) #  1 ", 4).unwrap();
        let tight = parse_expression("3/7 a(1,2)*a(2,1)#1", 4).unwrap();
        assert_eq!(spaced, tight);
    }

    #[test]
    fn error_positions() {
        // Unknown symbol at the very start.
        match parse_expression("b(1,1)", 4) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 0),
            other => panic!("expected parse error, got {other:?}"),
        }
        // Missing closing parenthesis: error points at the comma's spot.
        match parse_expression("a(1 1)", 4) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        // Index out of range: error points at the factor start.
        match parse_expression("a(1,1) + a(5,1)", 4) {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 9);
                assert!(msg.contains("out of range"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        // Zero index is out of range too.
        assert!(parse_expression("a(0,1)", 4).is_err());
        // Trailing operator.
        assert!(parse_expression("a(1,1) +", 4).is_err());
        // Dangling '#'.
        assert!(parse_expression("a(1,1) #", 4).is_err());
        // '#' after a non-unit numeral.
        assert!(parse_expression("2 # a(1,1)", 4).is_err());
        // Mismatched leg counts across terms.
        match parse_expression("a(1,1) + a(1,1) # a(2,2)", 4) {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 9);
                assert!(msg.contains("tensor legs"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        // Zero denominator.
        match parse_expression("1/0 a(1,1)", 4) {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 2);
                assert!(msg.contains("denominator"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        // Empty input.
        assert!(parse_expression("", 4).is_err());
        assert!(parse_expression("   ", 4).is_err());
        // '1' cannot join a product.
        assert!(parse_expression("a(1,1)*1", 4).is_err());
    }

    #[test]
    fn rejects_zero_algebra_size() {
        assert!(matches!(
            parse_expression("a(1,1)", 0),
            Err(Error::Structural(_))
        ));
    }
}
