//! Line-oriented pulse-program format.
//!
//! One instruction per line; `#` starts a comment; blank lines are ignored;
//! keywords are case-insensitive; LF and CRLF both accepted.
//!
//! ```text
//! PARAM mu1 2            # all six parameters, before INIT
//! PARAM mu2 1
//! PARAM B 1
//! PARAM gamma 1
//! PARAM T1 8
//! PARAM T2 1
//! INIT THERMAL           # or INIT STATE <ket> <ket>
//! CNOT 1 2 IDEAL         # or PULSED
//! PULSE 2 PI/2 3PI/2     # spin, tip angle, drive phase
//! WAIT 0.5
//! MEASURE 1
//! DEPHASE 2
//! CONTACT 1 OFF
//! THERMALIZE 2           # needs CONTACT ON
//! RAMP 2 4 1000 ISOTHERMAL
//! ```
//!
//! Kets are DOWN, UP, PLUS (the transverse state) or TIPPED <theta> with the
//! tipped ket cos(theta)|dn> + sin(theta)|up>. Angles accept decimal radians
//! or the literals PI, PI/2 and 3PI/2.

use spindemon::{CnotKind, RampMode, Spin, SpinParams};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

/// A parsed protocol: physical parameters, initial state, instruction list.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProgram {
    pub params: SpinParams,
    pub init: InitState,
    pub instructions: Vec<Instruction>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitState {
    /// Both spins in equilibrium with their reservoirs.
    Thermal,
    /// A pure product state.
    Product(KetSpec, KetSpec),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KetSpec {
    Down,
    Up,
    Plus,
    Tipped(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instruction {
    Pulse {
        spin: Spin,
        angle: f64,
        phase: f64,
    },
    Wait {
        duration: f64,
    },
    Cnot {
        control: Spin,
        target: Spin,
        kind: CnotKind,
    },
    Measure {
        spin: Spin,
    },
    Dephase {
        spin: Spin,
    },
    Contact {
        spin: Spin,
        on: bool,
    },
    Thermalize {
        spin: Spin,
    },
    Ramp {
        spin: Spin,
        b_target: f64,
        n_steps: usize,
        mode: RampMode,
    },
}

/// Parse result: the program plus the source line of every instruction, for
/// runtime error reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedProgram {
    pub program: PulseProgram,
    pub instruction_lines: Vec<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("missing PARAM block")]
    MissingParams,
    #[error("missing INIT line")]
    MissingInit,
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("unknown parameter `{0}` (expected mu1, mu2, B, gamma, T1, T2)")]
    UnknownParam(String),
    #[error("malformed number `{0}`")]
    MalformedNumber(String),
    #[error("spin index `{0}` out of range (expected 1 or 2)")]
    BadSpinIndex(String),
    #[error("instruction before parameters and INIT")]
    InstructionBeforeInit,
    #[error("PARAM after INIT")]
    ParamAfterInit,
    #[error("duplicate PARAM `{0}`")]
    DuplicateParam(String),
    #[error("duplicate INIT")]
    DuplicateInit,
    #[error("INIT before all six parameters; missing: {0}")]
    IncompleteParams(String),
    #[error("expected {0}")]
    WrongArguments(&'static str),
    #[error("unexpected trailing token `{0}`")]
    TrailingToken(String),
    #[error("{0}")]
    OutOfRange(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
}

/// A parse failure, located at a line and column of the source text.
#[derive(Debug, Error, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.col, self.kind)
    }
}

/// One token with its starting column (1-based).
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut col = 1;
    for piece in code.split_whitespace() {
        // Column of this piece within the original line.
        let offset = code[col - 1..].find(piece).map(|o| col + o).unwrap_or(col);
        out.push(Token {
            text: piece,
            col: offset,
        });
        col = offset + piece.len();
    }
    out
}

fn err(line: usize, col: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, col, kind }
}

fn parse_float(tok: &Token, line: usize) -> Result<f64, ParseError> {
    tok.text
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            err(
                line,
                tok.col,
                ParseErrorKind::MalformedNumber(tok.text.into()),
            )
        })
}

/// Angles: decimal radians or the literals PI, PI/2, 3PI/2.
fn parse_angle(tok: &Token, line: usize) -> Result<f64, ParseError> {
    match tok.text.to_ascii_uppercase().as_str() {
        "PI" => Ok(PI),
        "PI/2" => Ok(PI / 2.0),
        "3PI/2" => Ok(1.5 * PI),
        _ => parse_float(tok, line),
    }
}

fn parse_spin(tok: &Token, line: usize) -> Result<Spin, ParseError> {
    match tok.text {
        "1" => Ok(Spin::One),
        "2" => Ok(Spin::Two),
        other => Err(err(
            line,
            tok.col,
            ParseErrorKind::BadSpinIndex(other.into()),
        )),
    }
}

fn parse_usize(tok: &Token, line: usize) -> Result<usize, ParseError> {
    tok.text.parse::<usize>().map_err(|_| {
        err(
            line,
            tok.col,
            ParseErrorKind::MalformedNumber(tok.text.into()),
        )
    })
}

const PARAM_NAMES: [&str; 6] = ["mu1", "mu2", "b", "gamma", "t1", "t2"];

/// Parse a pulse program from text.
pub fn parse_program(text: &str) -> Result<ParsedProgram, ParseError> {
    let mut params: [Option<f64>; 6] = [None; 6];
    let mut init: Option<InitState> = None;
    let mut init_line = 0usize;
    let mut instructions = Vec::new();
    let mut instruction_lines = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let toks = tokenize(raw.trim_end_matches('\r'));
        if toks.is_empty() {
            continue;
        }
        let keyword = toks[0].text.to_ascii_uppercase();
        let args = &toks[1..];
        match keyword.as_str() {
            "PARAM" => {
                if init.is_some() {
                    return Err(err(line, toks[0].col, ParseErrorKind::ParamAfterInit));
                }
                if args.len() != 2 {
                    return Err(err(
                        line,
                        toks[0].col,
                        ParseErrorKind::WrongArguments("PARAM <name> <float>"),
                    ));
                }
                let name = args[0].text.to_ascii_lowercase();
                let slot = PARAM_NAMES.iter().position(|&n| n == name).ok_or_else(|| {
                    err(
                        line,
                        args[0].col,
                        ParseErrorKind::UnknownParam(args[0].text.into()),
                    )
                })?;
                if params[slot].is_some() {
                    return Err(err(
                        line,
                        args[0].col,
                        ParseErrorKind::DuplicateParam(args[0].text.into()),
                    ));
                }
                params[slot] = Some(parse_float(&args[1], line)?);
            }
            "INIT" => {
                if init.is_some() {
                    return Err(err(line, toks[0].col, ParseErrorKind::DuplicateInit));
                }
                let missing: Vec<&str> = PARAM_NAMES
                    .iter()
                    .zip(params.iter())
                    .filter(|(_, v)| v.is_none())
                    .map(|(n, _)| *n)
                    .collect();
                if !missing.is_empty() {
                    return Err(err(
                        line,
                        toks[0].col,
                        ParseErrorKind::IncompleteParams(missing.join(", ")),
                    ));
                }
                init = Some(parse_init(args, line)?);
                init_line = line;
            }
            _ => {
                if init.is_none() {
                    // Distinguish a stray keyword from a real instruction
                    // appearing too early.
                    if is_instruction_keyword(&keyword) {
                        return Err(err(
                            line,
                            toks[0].col,
                            ParseErrorKind::InstructionBeforeInit,
                        ));
                    }
                    return Err(err(
                        line,
                        toks[0].col,
                        ParseErrorKind::UnknownKeyword(toks[0].text.into()),
                    ));
                }
                instructions.push(parse_instruction(&keyword, &toks[0], args, line)?);
                instruction_lines.push(line);
            }
        }
    }

    if params.iter().all(Option::is_none) {
        return Err(err(1, 1, ParseErrorKind::MissingParams));
    }
    let init = init.ok_or_else(|| err(1, 1, ParseErrorKind::MissingInit))?;
    let values: Vec<f64> = params.iter().map(|v| v.expect("checked at INIT")).collect();
    let params = SpinParams::new(
        values[0], values[1], values[2], values[3], values[4], values[5],
    )
    .map_err(|e| err(init_line, 1, ParseErrorKind::BadParams(e.to_string())))?;

    Ok(ParsedProgram {
        program: PulseProgram {
            params,
            init,
            instructions,
        },
        instruction_lines,
    })
}

fn is_instruction_keyword(keyword: &str) -> bool {
    matches!(
        keyword,
        "PULSE" | "WAIT" | "CNOT" | "MEASURE" | "DEPHASE" | "CONTACT" | "THERMALIZE" | "RAMP"
    )
}

fn parse_init(args: &[Token], line: usize) -> Result<InitState, ParseError> {
    if args.is_empty() {
        return Err(err(
            line,
            1,
            ParseErrorKind::WrongArguments("INIT THERMAL or INIT STATE <ket> <ket>"),
        ));
    }
    match args[0].text.to_ascii_uppercase().as_str() {
        "THERMAL" => {
            if args.len() != 1 {
                return Err(err(
                    line,
                    args[1].col,
                    ParseErrorKind::TrailingToken(args[1].text.into()),
                ));
            }
            Ok(InitState::Thermal)
        }
        "STATE" => {
            let mut rest = &args[1..];
            let k1 = parse_ket(&mut rest, line)?;
            let k2 = parse_ket(&mut rest, line)?;
            if let Some(extra) = rest.first() {
                return Err(err(
                    line,
                    extra.col,
                    ParseErrorKind::TrailingToken(extra.text.into()),
                ));
            }
            Ok(InitState::Product(k1, k2))
        }
        other => Err(err(
            line,
            args[0].col,
            ParseErrorKind::UnknownKeyword(other.into()),
        )),
    }
}

fn parse_ket<'a>(rest: &mut &[Token<'a>], line: usize) -> Result<KetSpec, ParseError> {
    let tok = rest.first().ok_or_else(|| {
        err(
            line,
            1,
            ParseErrorKind::WrongArguments("DOWN, UP, PLUS or TIPPED <theta>"),
        )
    })?;
    *rest = &rest[1..];
    match tok.text.to_ascii_uppercase().as_str() {
        "DOWN" => Ok(KetSpec::Down),
        "UP" => Ok(KetSpec::Up),
        "PLUS" => Ok(KetSpec::Plus),
        "TIPPED" => {
            let angle_tok = rest.first().ok_or_else(|| {
                err(
                    line,
                    tok.col,
                    ParseErrorKind::WrongArguments("TIPPED <theta>"),
                )
            })?;
            *rest = &rest[1..];
            let theta = parse_angle(angle_tok, line)?;
            if !(0.0..=PI).contains(&theta) {
                return Err(err(
                    line,
                    angle_tok.col,
                    ParseErrorKind::OutOfRange(format!("theta must lie in [0, pi], got {theta}")),
                ));
            }
            Ok(KetSpec::Tipped(theta))
        }
        other => Err(err(
            line,
            tok.col,
            ParseErrorKind::UnknownKeyword(other.into()),
        )),
    }
}

fn parse_instruction(
    keyword: &str,
    head: &Token,
    args: &[Token],
    line: usize,
) -> Result<Instruction, ParseError> {
    let wrong = |what: &'static str| err(line, head.col, ParseErrorKind::WrongArguments(what));
    match keyword {
        "PULSE" => {
            if args.len() != 3 {
                return Err(wrong("PULSE <spin> <angle> <phase>"));
            }
            let spin = parse_spin(&args[0], line)?;
            let angle = parse_angle(&args[1], line)?;
            let phase = parse_angle(&args[2], line)?;
            Ok(Instruction::Pulse { spin, angle, phase })
        }
        "WAIT" => {
            if args.len() != 1 {
                return Err(wrong("WAIT <duration>"));
            }
            let duration = parse_float(&args[0], line)?;
            if duration < 0.0 {
                return Err(err(
                    line,
                    args[0].col,
                    ParseErrorKind::OutOfRange(format!("duration must be >= 0, got {duration}")),
                ));
            }
            Ok(Instruction::Wait { duration })
        }
        "CNOT" => {
            if args.len() != 3 {
                return Err(wrong("CNOT <control> <target> IDEAL|PULSED"));
            }
            let control = parse_spin(&args[0], line)?;
            let target = parse_spin(&args[1], line)?;
            if control == target {
                return Err(err(
                    line,
                    args[1].col,
                    ParseErrorKind::OutOfRange("control and target must differ".into()),
                ));
            }
            let kind = match args[2].text.to_ascii_uppercase().as_str() {
                "IDEAL" => CnotKind::Ideal,
                "PULSED" => CnotKind::Pulsed,
                other => {
                    return Err(err(
                        line,
                        args[2].col,
                        ParseErrorKind::UnknownKeyword(other.into()),
                    ))
                }
            };
            Ok(Instruction::Cnot {
                control,
                target,
                kind,
            })
        }
        "MEASURE" => {
            if args.len() != 1 {
                return Err(wrong("MEASURE <spin>"));
            }
            Ok(Instruction::Measure {
                spin: parse_spin(&args[0], line)?,
            })
        }
        "DEPHASE" => {
            if args.len() != 1 {
                return Err(wrong("DEPHASE <spin>"));
            }
            Ok(Instruction::Dephase {
                spin: parse_spin(&args[0], line)?,
            })
        }
        "CONTACT" => {
            if args.len() != 2 {
                return Err(wrong("CONTACT <spin> ON|OFF"));
            }
            let spin = parse_spin(&args[0], line)?;
            let on = match args[1].text.to_ascii_uppercase().as_str() {
                "ON" => true,
                "OFF" => false,
                other => {
                    return Err(err(
                        line,
                        args[1].col,
                        ParseErrorKind::UnknownKeyword(other.into()),
                    ))
                }
            };
            Ok(Instruction::Contact { spin, on })
        }
        "THERMALIZE" => {
            if args.len() != 1 {
                return Err(wrong("THERMALIZE <spin>"));
            }
            Ok(Instruction::Thermalize {
                spin: parse_spin(&args[0], line)?,
            })
        }
        "RAMP" => {
            if args.len() != 4 {
                return Err(wrong(
                    "RAMP <spin> <B_target> <n_steps> ADIABATIC|ISOTHERMAL",
                ));
            }
            let spin = parse_spin(&args[0], line)?;
            let b_target = parse_float(&args[1], line)?;
            if b_target < 0.0 {
                return Err(err(
                    line,
                    args[1].col,
                    ParseErrorKind::OutOfRange(format!("field must be >= 0, got {b_target}")),
                ));
            }
            let n_steps = parse_usize(&args[2], line)?;
            if n_steps == 0 {
                return Err(err(
                    line,
                    args[2].col,
                    ParseErrorKind::OutOfRange("n_steps must be >= 1".into()),
                ));
            }
            let mode = match args[3].text.to_ascii_uppercase().as_str() {
                "ADIABATIC" => RampMode::Adiabatic,
                "ISOTHERMAL" => RampMode::Isothermal,
                other => {
                    return Err(err(
                        line,
                        args[3].col,
                        ParseErrorKind::UnknownKeyword(other.into()),
                    ))
                }
            };
            Ok(Instruction::Ramp {
                spin,
                b_target,
                n_steps,
                mode,
            })
        }
        _ => Err(err(
            line,
            head.col,
            ParseErrorKind::UnknownKeyword(head.text.into()),
        )),
    }
}

/// Canonical text form: fixed parameter order, uppercase keywords, shortest
/// round-trip decimals, LF line endings. `parse(serialize(parse(x)))` equals
/// `parse(x)`.
pub fn serialize_program(program: &PulseProgram) -> String {
    let p = &program.params;
    let mut out = String::new();
    out.push_str(&format!("PARAM mu1 {}\n", p.mu1));
    out.push_str(&format!("PARAM mu2 {}\n", p.mu2));
    out.push_str(&format!("PARAM B {}\n", p.b));
    out.push_str(&format!("PARAM gamma {}\n", p.gamma));
    out.push_str(&format!("PARAM T1 {}\n", p.t1));
    out.push_str(&format!("PARAM T2 {}\n", p.t2));
    match program.init {
        InitState::Thermal => out.push_str("INIT THERMAL\n"),
        InitState::Product(k1, k2) => {
            out.push_str(&format!("INIT STATE {} {}\n", ket_text(k1), ket_text(k2)))
        }
    }
    for instr in &program.instructions {
        out.push_str(&instruction_text(instr));
        out.push('\n');
    }
    out
}

fn ket_text(k: KetSpec) -> String {
    match k {
        KetSpec::Down => "DOWN".into(),
        KetSpec::Up => "UP".into(),
        KetSpec::Plus => "PLUS".into(),
        KetSpec::Tipped(theta) => format!("TIPPED {theta}"),
    }
}

fn instruction_text(instr: &Instruction) -> String {
    match instr {
        Instruction::Pulse { spin, angle, phase } => {
            format!("PULSE {spin} {angle} {phase}")
        }
        Instruction::Wait { duration } => format!("WAIT {duration}"),
        Instruction::Cnot {
            control,
            target,
            kind,
        } => {
            let kind = match kind {
                CnotKind::Ideal | CnotKind::SelectivePi => "IDEAL",
                CnotKind::Pulsed => "PULSED",
            };
            format!("CNOT {control} {target} {kind}")
        }
        Instruction::Measure { spin } => format!("MEASURE {spin}"),
        Instruction::Dephase { spin } => format!("DEPHASE {spin}"),
        Instruction::Contact { spin, on } => {
            format!("CONTACT {spin} {}", if *on { "ON" } else { "OFF" })
        }
        Instruction::Thermalize { spin } => format!("THERMALIZE {spin}"),
        Instruction::Ramp {
            spin,
            b_target,
            n_steps,
            mode,
        } => {
            let mode = match mode {
                RampMode::Adiabatic => "ADIABATIC",
                RampMode::Isothermal => "ISOTHERMAL",
            };
            format!("RAMP {spin} {b_target} {n_steps} {mode}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWAP: &str = "\
PARAM mu1 2
PARAM mu2 1
PARAM B 1
PARAM T1 8
PARAM T2 1
PARAM gamma 1
INIT THERMAL
CNOT 1 2 IDEAL
CNOT 2 1 IDEAL
CNOT 1 2 IDEAL
";

    #[test]
    fn parses_the_swap_program() {
        let parsed = parse_program(SWAP).unwrap();
        assert_eq!(parsed.program.params.mu1, 2.0);
        assert_eq!(parsed.program.params.t1, 8.0);
        assert_eq!(parsed.program.init, InitState::Thermal);
        assert_eq!(parsed.program.instructions.len(), 3);
        assert_eq!(parsed.instruction_lines, vec![8, 9, 10]);
    }

    #[test]
    fn empty_input_reports_missing_params() {
        let e = parse_program("").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingParams);
        let e = parse_program("# only a comment\n\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingParams);
    }

    #[test]
    fn comments_blank_lines_and_crlf_are_accepted() {
        let text = SWAP.replace('\n', "\r\n").replace(
            "INIT THERMAL",
            "# setup done\n\nINIT THERMAL   # both spins thermal",
        );
        let parsed = parse_program(&text).unwrap();
        assert_eq!(parsed.program.instructions.len(), 3);
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let text = SWAP.to_lowercase().replace("init thermal", "init Thermal");
        let parsed = parse_program(&text).unwrap();
        assert_eq!(parsed.program.instructions.len(), 3);
    }

    #[test]
    fn angle_literals() {
        let text = format!("{SWAP}PULSE 2 PI/2 3PI/2\nPULSE 1 PI 0.25\n");
        let parsed = parse_program(&text).unwrap();
        match parsed.program.instructions[3] {
            Instruction::Pulse { angle, phase, .. } => {
                assert_eq!(angle, PI / 2.0);
                assert_eq!(phase, 1.5 * PI);
            }
            _ => panic!("expected a pulse"),
        }
    }

    #[test]
    fn errors_carry_line_and_column() {
        let text = format!("{SWAP}FROB 1\n");
        let e = parse_program(&text).unwrap_err();
        assert_eq!(e.line, 11);
        assert_eq!(e.col, 1);
        assert!(matches!(e.kind, ParseErrorKind::UnknownKeyword(_)));

        let text = SWAP.replace("PARAM T1 8", "PARAM T1 eight");
        let e = parse_program(&text).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(matches!(e.kind, ParseErrorKind::MalformedNumber(_)));

        let text = format!("{SWAP}CNOT 3 2 IDEAL\n");
        let e = parse_program(&text).unwrap_err();
        assert_eq!(e.line, 11);
        assert!(matches!(e.kind, ParseErrorKind::BadSpinIndex(_)));

        let e = parse_program("CNOT 1 2 IDEAL\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(e.kind, ParseErrorKind::InstructionBeforeInit);
    }

    #[test]
    fn init_requires_all_params() {
        let text = SWAP.replace("PARAM gamma 1\n", "");
        let e = parse_program(&text).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::IncompleteParams(_)));
        assert!(e.kind.to_string().contains("gamma"));
    }

    #[test]
    fn duplicate_and_misplaced_lines_are_rejected() {
        let text = format!("{SWAP}PARAM B 2\n");
        assert!(matches!(
            parse_program(&text).unwrap_err().kind,
            ParseErrorKind::ParamAfterInit
        ));
        let text = SWAP.replace("PARAM mu2 1", "PARAM mu1 3");
        assert!(matches!(
            parse_program(&text).unwrap_err().kind,
            ParseErrorKind::DuplicateParam(_)
        ));
        let text = format!("{SWAP}INIT THERMAL\n");
        assert!(matches!(
            parse_program(&text).unwrap_err().kind,
            ParseErrorKind::DuplicateInit
        ));
    }

    #[test]
    fn state_init_with_tipped_ket() {
        let text = SWAP.replace(
            "INIT THERMAL",
            &format!("INIT STATE TIPPED {} DOWN", std::f64::consts::FRAC_PI_4),
        );
        let parsed = parse_program(&text).unwrap();
        match parsed.program.init {
            InitState::Product(KetSpec::Tipped(theta), KetSpec::Down) => {
                assert_eq!(theta, std::f64::consts::FRAC_PI_4);
            }
            other => panic!("unexpected init {other:?}"),
        }
        // Angle outside [0, pi] is rejected.
        let text = SWAP.replace("INIT THERMAL", "INIT STATE TIPPED 3.5 DOWN");
        assert!(matches!(
            parse_program(&text).unwrap_err().kind,
            ParseErrorKind::OutOfRange(_)
        ));
    }

    #[test]
    fn bad_physical_params_are_rejected_at_init() {
        let text = SWAP.replace("PARAM T2 1", "PARAM T2 0");
        let e = parse_program(&text).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::BadParams(_)));
    }

    #[test]
    fn canonical_form_is_a_fixpoint() {
        let samples = [
            SWAP.to_string(),
            format!("{SWAP}RAMP 2 3.5 100 ISOTHERMAL\nCONTACT 1 OFF\nWAIT 0.25\n"),
            SWAP.replace("INIT THERMAL", "INIT STATE PLUS TIPPED PI/2"),
        ];
        for text in samples {
            let first = parse_program(&text).unwrap();
            let canon = serialize_program(&first.program);
            let second = parse_program(&canon).unwrap();
            assert_eq!(first.program, second.program);
            // Serializing again reproduces the same bytes.
            assert_eq!(canon, serialize_program(&second.program));
        }
    }
}
