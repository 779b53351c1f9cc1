//! Espresso-style `.pla` reader and writer.
//!
//! Only the ON-set (`type f`) dialect is accepted. Supported directives are
//! `.i`, `.o`, `.p`, `.ilb`, `.ob` and `.e`/`.end`; lines starting with `#`
//! are comments. Any other directive, including `.type`, is rejected.

use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `{0}` directive")]
    MissingDirective(&'static str),
    #[error("`.p` declares {declared} terms but {found} cube rows were read")]
    TermCount { declared: usize, found: usize },
}

fn syntax(line: usize, message: impl Into<String>) -> PlaError {
    PlaError::Syntax {
        line,
        message: message.into(),
    }
}

/// One position of a cube's input part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Literal {
    /// `0`: the complemented variable.
    Negative,
    /// `1`: the true variable.
    Positive,
    /// `-`: variable absent from the product term.
    DontCare,
}

impl Literal {
    fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Literal::Negative),
            '1' => Some(Literal::Positive),
            '-' => Some(Literal::DontCare),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Literal::Negative => '0',
            Literal::Positive => '1',
            Literal::DontCare => '-',
        }
    }

    /// Whether a single input bit satisfies this literal.
    pub fn admits(self, bit: bool) -> bool {
        match self {
            Literal::Negative => !bit,
            Literal::Positive => bit,
            Literal::DontCare => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cube {
    pub inputs: Vec<Literal>,
    pub outputs: Vec<bool>,
}

impl Cube {
    /// True when every literal of the product term is satisfied.
    pub fn covers(&self, input: &[bool]) -> bool {
        self.inputs
            .iter()
            .zip(input)
            .all(|(lit, &bit)| lit.admits(bit))
    }

    pub fn asserts_any(&self) -> bool {
        self.outputs.iter().any(|&o| o)
    }
}

/// A two-level sum-of-products table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaTable {
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub cubes: Vec<Cube>,
    /// Value of `.p`, or the cube count when the directive is absent.
    pub declared_terms: usize,
}

impl PlaTable {
    /// Direct cube-cover evaluation: output `j` is 1 iff some cube asserting
    /// `j` covers `input`.
    pub fn evaluate(&self, input: &[bool]) -> Vec<bool> {
        assert_eq!(input.len(), self.num_inputs, "input width mismatch");
        let mut out = vec![false; self.num_outputs];
        for cube in self.cubes.iter().filter(|c| c.covers(input)) {
            for (o, &asserted) in out.iter_mut().zip(&cube.outputs) {
                *o |= asserted;
            }
        }
        out
    }

    /// Writes the table back out in the accepted dialect. Labels and `.p` are
    /// always emitted, so `parse_pla(t.to_pla_string())` reproduces `t`.
    pub fn to_pla_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, ".i {}", self.num_inputs);
        let _ = writeln!(s, ".o {}", self.num_outputs);
        if !self.input_labels.is_empty() {
            let _ = writeln!(s, ".ilb {}", self.input_labels.join(" "));
        }
        if !self.output_labels.is_empty() {
            let _ = writeln!(s, ".ob {}", self.output_labels.join(" "));
        }
        let _ = writeln!(s, ".p {}", self.cubes.len());
        for cube in &self.cubes {
            let ins: String = cube.inputs.iter().map(|l| l.as_char()).collect();
            let outs: String = cube
                .outputs
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            let _ = writeln!(s, "{ins} {outs}");
        }
        s.push_str(".e\n");
        s
    }
}

impl fmt::Display for PlaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} inputs, {} outputs, {} terms",
            self.num_inputs,
            self.num_outputs,
            self.cubes.len()
        )
    }
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn parse_count(value: Option<&str>, line: usize, directive: &str) -> Result<usize, PlaError> {
    let value = value.ok_or_else(|| syntax(line, format!("`{directive}` needs a count")))?;
    value
        .parse::<usize>()
        .map_err(|_| syntax(line, format!("`{directive}` count `{value}` is not a number")))
}

/// Parses a `.pla` document.
pub fn parse_pla(text: &str) -> Result<PlaTable, PlaError> {
    let mut num_inputs: Option<usize> = None;
    let mut num_outputs: Option<usize> = None;
    let mut declared: Option<usize> = None;
    let mut input_labels: Option<Vec<String>> = None;
    let mut output_labels: Option<Vec<String>> = None;
    let mut cubes = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(directive) = line.strip_prefix('.') {
            let mut parts = directive.split_whitespace();
            let name = parts.next().unwrap_or("");
            match name {
                "i" => {
                    if num_inputs.is_some() {
                        return Err(syntax(line_no, "duplicate `.i`"));
                    }
                    num_inputs = Some(parse_count(parts.next(), line_no, ".i")?);
                }
                "o" => {
                    if num_outputs.is_some() {
                        return Err(syntax(line_no, "duplicate `.o`"));
                    }
                    num_outputs = Some(parse_count(parts.next(), line_no, ".o")?);
                }
                "p" => {
                    if declared.is_some() {
                        return Err(syntax(line_no, "duplicate `.p`"));
                    }
                    declared = Some(parse_count(parts.next(), line_no, ".p")?);
                }
                "ilb" => {
                    let n = num_inputs.ok_or_else(|| syntax(line_no, "`.ilb` before `.i`"))?;
                    let labels: Vec<String> = parts.map(str::to_owned).collect();
                    if labels.len() != n {
                        return Err(syntax(
                            line_no,
                            format!("`.ilb` lists {} names for {n} inputs", labels.len()),
                        ));
                    }
                    input_labels = Some(labels);
                }
                "ob" => {
                    let n = num_outputs.ok_or_else(|| syntax(line_no, "`.ob` before `.o`"))?;
                    let labels: Vec<String> = parts.map(str::to_owned).collect();
                    if labels.len() != n {
                        return Err(syntax(
                            line_no,
                            format!("`.ob` lists {} names for {n} outputs", labels.len()),
                        ));
                    }
                    output_labels = Some(labels);
                }
                "e" | "end" => break,
                other => {
                    return Err(syntax(line_no, format!("unsupported directive `.{other}`")));
                }
            }
            continue;
        }

        let ni = num_inputs.ok_or(PlaError::MissingDirective(".i"))?;
        let no = num_outputs.ok_or(PlaError::MissingDirective(".o"))?;
        let chars: Vec<char> = line.chars().filter(|c| !c.is_whitespace() && *c != '|').collect();
        if chars.len() != ni + no {
            return Err(syntax(
                line_no,
                format!(
                    "cube has {} symbols, expected {} inputs + {} outputs",
                    chars.len(),
                    ni,
                    no
                ),
            ));
        }
        let inputs = chars[..ni]
            .iter()
            .map(|&c| {
                Literal::from_char(c)
                    .ok_or_else(|| syntax(line_no, format!("invalid input symbol `{c}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let outputs = chars[ni..]
            .iter()
            .map(|&c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(syntax(line_no, format!("invalid output symbol `{c}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        cubes.push(Cube { inputs, outputs });
    }

    let num_inputs = num_inputs.ok_or(PlaError::MissingDirective(".i"))?;
    let num_outputs = num_outputs.ok_or(PlaError::MissingDirective(".o"))?;
    if let Some(declared) = declared {
        if declared != cubes.len() {
            return Err(PlaError::TermCount {
                declared,
                found: cubes.len(),
            });
        }
    }
    Ok(PlaTable {
        num_inputs,
        num_outputs,
        input_labels: input_labels.unwrap_or_else(|| default_labels("x", num_inputs)),
        output_labels: output_labels.unwrap_or_else(|| default_labels("f", num_outputs)),
        declared_terms: cubes.len(),
        cubes,
    })
}
