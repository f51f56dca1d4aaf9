//! Instruction format shared by both target languages.
//!
//! A program is a fixed-length sequence of instructions, each an opcode index
//! paired with a single operand index. How an operand index is interpreted
//! (register, memory cell, immediate, jump target) is decided at execution
//! time by the opcode class, so the genotype stays uniform and copy operators
//! can move operands between opcodes.

use rand::Rng;
use thiserror::Error;

use crate::rng::SearchRng;
use crate::{tis100, x86};

/// Which language a profile instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    X86,
    Tis100,
}

/// Parameters defining one language instantiation: program length `S`,
/// opcode count `O`, operand count `P`, register count `R`, and the
/// distinguished no-effect opcode `N` used by the simplicity bonus.
#[derive(Debug, PartialEq, Eq)]
pub struct MachineProfile {
    name: &'static str,
    pub kind: ProfileKind,
    pub program_len: usize,
    pub opcode_count: u8,
    pub operand_count: u16,
    pub reg_count: usize,
    pub noop_opcode: u8,
}

/// x86 subset with a memory block: P=16 operands.
pub static X86_MEM: MachineProfile = MachineProfile {
    name: "x86-mem",
    kind: ProfileKind::X86,
    program_len: 32,
    opcode_count: 14,
    operand_count: 16,
    reg_count: 6,
    noop_opcode: x86::OP_ARG,
};

/// x86 subset for scalar-input problems (no memory): P=10 operands.
pub static X86_SCALAR: MachineProfile = MachineProfile {
    name: "x86-scalar",
    kind: ProfileKind::X86,
    program_len: 32,
    opcode_count: 14,
    operand_count: 10,
    reg_count: 6,
    noop_opcode: x86::OP_ARG,
};

macro_rules! tis_profile {
    ($ident:ident, $name:literal, $p:literal) => {
        pub static $ident: MachineProfile = MachineProfile {
            name: $name,
            kind: ProfileKind::Tis100,
            program_len: 15,
            opcode_count: 16,
            operand_count: $p,
            reg_count: 0,
            noop_opcode: tis100::OP_NOP,
        };
    };
}

tis_profile!(TIS_P21, "tis100-p21", 21);
tis_profile!(TIS_P101, "tis100-p101", 101);
tis_profile!(TIS_P401, "tis100-p401", 401);
tis_profile!(TIS_P1999, "tis100-p1999", 1999);

static ALL_PROFILES: [&MachineProfile; 6] =
    [&X86_MEM, &X86_SCALAR, &TIS_P21, &TIS_P101, &TIS_P401, &TIS_P1999];

impl MachineProfile {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn all() -> &'static [&'static MachineProfile] {
        &ALL_PROFILES
    }

    pub fn from_name(name: &str) -> Option<&'static MachineProfile> {
        ALL_PROFILES.iter().copied().find(|p| p.name == name)
    }

    /// Mnemonics indexed by opcode.
    pub fn mnemonics(&self) -> &'static [&'static str] {
        match self.kind {
            ProfileKind::X86 => &x86::MNEMONICS,
            ProfileKind::Tis100 => &tis100::MNEMONICS,
        }
    }

    /// Checked instruction constructor; rejects out-of-range indices.
    pub fn instruction(&self, opcode: u8, operand: u16) -> Result<Instruction, IsaError> {
        if opcode >= self.opcode_count {
            return Err(IsaError::OpcodeOutOfRange { opcode, max: self.opcode_count });
        }
        if operand >= self.operand_count {
            return Err(IsaError::OperandOutOfRange { operand, max: self.operand_count });
        }
        Ok(Instruction { opcode, operand })
    }

    /// Uniform random instruction: opcode and operand drawn independently.
    pub fn random_instruction(&self, rng: &mut SearchRng) -> Instruction {
        Instruction {
            opcode: rng.gen_range(0..self.opcode_count),
            operand: rng.gen_range(0..self.operand_count),
        }
    }

    /// Fresh program of S independent random instructions.
    pub fn random_program(&self, rng: &mut SearchRng) -> Program {
        let instructions = (0..self.program_len).map(|_| self.random_instruction(rng)).collect();
        Program { instructions }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IsaError {
    #[error("opcode {opcode} out of range (O={max})")]
    OpcodeOutOfRange { opcode: u8, max: u8 },
    #[error("operand {operand} out of range (P={max})")]
    OperandOutOfRange { operand: u16, max: u16 },
    #[error("program has {found} instructions, profile requires {expected}")]
    WrongProgramLength { found: usize, expected: usize },
}

/// One opcode/operand pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Instruction {
    opcode: u8,
    operand: u16,
}

impl Instruction {
    pub fn opcode(&self) -> u8 {
        self.opcode
    }

    pub fn operand(&self) -> u16 {
        self.operand
    }

    pub(crate) fn with_opcode(self, opcode: u8) -> Instruction {
        Instruction { opcode, ..self }
    }

    pub(crate) fn with_operand(self, operand: u16) -> Instruction {
        Instruction { operand, ..self }
    }
}

/// A fixed-length instruction sequence; the genotype searched over.
///
/// Programs are value types: operators build modified copies, search never
/// mutates an accepted program in place.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    instructions: Vec<Instruction>,
}

impl Program {
    /// Checked constructor; validates length and every instruction.
    pub fn new(instructions: Vec<Instruction>, profile: &MachineProfile) -> Result<Program, IsaError> {
        if instructions.len() != profile.program_len {
            return Err(IsaError::WrongProgramLength {
                found: instructions.len(),
                expected: profile.program_len,
            });
        }
        for inst in &instructions {
            profile.instruction(inst.opcode, inst.operand)?;
        }
        Ok(Program { instructions })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub(crate) fn slots_mut(&mut self) -> &mut [Instruction] {
        &mut self.instructions
    }

    /// Number of instructions whose opcode is the profile's no-effect opcode.
    pub fn count_noops(&self, profile: &MachineProfile) -> usize {
        self.instructions.iter().filter(|i| i.opcode == profile.noop_opcode).count()
    }

    /// Size as reported for solutions: instructions that are not opcode N.
    pub fn effective_size(&self, profile: &MachineProfile) -> usize {
        self.len() - self.count_noops(profile)
    }
}

/// Free-function form of [`Program::count_noops`].
pub fn count_noops(program: &Program, profile: &MachineProfile) -> usize {
    program.count_noops(profile)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line 1: expected `profile: <name>` header")]
    MissingHeader,
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("program declares profile `{found}`, expected `{expected}`")]
    ProfileMismatch { found: String, expected: String },
    #[error("line {line}: malformed instruction line")]
    Malformed { line: usize },
    #[error("line {line}: expected slot index {expected}")]
    BadSlotIndex { line: usize, expected: usize },
    #[error("line {line}: unknown mnemonic `{token}`")]
    UnknownMnemonic { line: usize, token: String },
    #[error("line {line}: operand {value} out of range (P={max})")]
    OperandOutOfRange { line: usize, value: u64, max: u16 },
    #[error("expected {expected} instruction lines, found {found}")]
    WrongLineCount { expected: usize, found: usize },
}

/// Canonical text form: a `profile:` header, then one `<idx>: <MNEMONIC>
/// <operand>` line per slot with a comment showing the resolved
/// interpretation. Round-trips bit-exact through [`deserialize`].
pub fn serialize(program: &Program, profile: &MachineProfile) -> String {
    let mnemonics = profile.mnemonics();
    let mut out = String::with_capacity(program.len() * 24);
    out.push_str("profile: ");
    out.push_str(profile.name);
    out.push('\n');
    for (idx, inst) in program.instructions().iter().enumerate() {
        let comment = match profile.kind {
            ProfileKind::X86 => x86::operand_comment(inst.opcode, inst.operand, profile),
            ProfileKind::Tis100 => tis100::operand_comment(inst.opcode, inst.operand, profile),
        };
        out.push_str(&format!(
            "{idx:2}: {:<5} {:<4} ; {comment}\n",
            mnemonics[inst.opcode as usize], inst.operand
        ));
    }
    out
}

/// Parse the canonical text form, requiring it to declare `profile`.
pub fn deserialize(text: &str, profile: &MachineProfile) -> Result<Program, ParseError> {
    let (found, program) = parse_with_profile(text)?;
    if found.name != profile.name {
        return Err(ParseError::ProfileMismatch {
            found: found.name.to_string(),
            expected: profile.name.to_string(),
        });
    }
    Ok(program)
}

/// Parse the canonical text form, resolving the profile from the header.
pub fn parse_with_profile(text: &str) -> Result<(&'static MachineProfile, Program), ParseError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let name = header.strip_prefix("profile:").ok_or(ParseError::MissingHeader)?.trim();
    let profile = MachineProfile::from_name(name)
        .ok_or_else(|| ParseError::UnknownProfile(name.to_string()))?;
    let mnemonics = profile.mnemonics();

    let mut instructions = Vec::with_capacity(profile.program_len);
    for (zero_based, raw) in lines {
        let line = zero_based + 1;
        let body = raw.split(';').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (slot, rest) = body.split_once(':').ok_or(ParseError::Malformed { line })?;
        let slot: usize = slot.trim().parse().map_err(|_| ParseError::Malformed { line })?;
        if slot != instructions.len() {
            return Err(ParseError::BadSlotIndex { line, expected: instructions.len() });
        }
        let mut parts = rest.split_whitespace();
        let mnemonic = parts.next().ok_or(ParseError::Malformed { line })?;
        let operand_tok = parts.next().ok_or(ParseError::Malformed { line })?;
        if parts.next().is_some() {
            return Err(ParseError::Malformed { line });
        }
        let opcode = mnemonics
            .iter()
            .position(|m| *m == mnemonic)
            .ok_or_else(|| ParseError::UnknownMnemonic { line, token: mnemonic.to_string() })?
            as u8;
        let value: u64 = operand_tok.parse().map_err(|_| ParseError::Malformed { line })?;
        if value >= profile.operand_count as u64 {
            return Err(ParseError::OperandOutOfRange { line, value, max: profile.operand_count });
        }
        instructions.push(Instruction { opcode, operand: value as u16 });
    }
    if instructions.len() != profile.program_len {
        return Err(ParseError::WrongLineCount {
            expected: profile.program_len,
            found: instructions.len(),
        });
    }
    Ok((profile, Program { instructions }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn random_instruction_in_range() {
        let mut rng = rng_from_seed(1);
        for _ in 0..1000 {
            let inst = X86_MEM.random_instruction(&mut rng);
            assert!(inst.opcode() < 14);
            assert!(inst.operand() < 16);
        }
    }

    #[test]
    fn random_program_lengths() {
        let mut rng = rng_from_seed(2);
        assert_eq!(X86_MEM.random_program(&mut rng).len(), 32);
        assert_eq!(TIS_P1999.random_program(&mut rng).len(), 15);
    }

    #[test]
    fn fixed_seed_replays_identical_draws() {
        let a: Vec<Instruction> =
            (0..50).map(|_| X86_MEM.random_instruction(&mut rng_from_seed(9))).collect();
        let b: Vec<Instruction> =
            (0..50).map(|_| X86_MEM.random_instruction(&mut rng_from_seed(9))).collect();
        assert_eq!(a, b);
        assert_eq!(
            X86_MEM.random_program(&mut rng_from_seed(3)),
            X86_MEM.random_program(&mut rng_from_seed(3))
        );
    }

    #[test]
    fn opcode_frequencies_within_five_sigma() {
        let mut rng = rng_from_seed(4);
        let draws = 10_000usize;
        let mut counts = [0usize; 14];
        for _ in 0..draws {
            counts[X86_MEM.random_instruction(&mut rng).opcode() as usize] += 1;
        }
        let p = 1.0 / 14.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() < 5.0 * sigma, "count {c} vs mean {mean:.1}");
        }
    }

    // Pearson chi-squared against the uniform distribution; the critical
    // value at p=0.001 comes from the Wilson-Hilferty approximation.
    fn chi_squared_uniform(counts: &[u64], draws: u64) {
        let k = counts.len() as f64;
        let expected = draws as f64 / k;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let df = k - 1.0;
        let z = 3.090_232; // upper 0.001 quantile of the standard normal
        let crit = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
        assert!(stat < crit, "chi-squared {stat:.1} exceeds critical {crit:.1} (df={df})");
    }

    #[test]
    fn sampling_uniformity_chi_squared() {
        for profile in [&X86_MEM, &X86_SCALAR, &TIS_P21, &TIS_P1999] {
            let mut rng = rng_from_seed(5);
            let draws = 100_000u64;
            let mut op_counts = vec![0u64; profile.opcode_count as usize];
            let mut arg_counts = vec![0u64; profile.operand_count as usize];
            for _ in 0..draws {
                let inst = profile.random_instruction(&mut rng);
                op_counts[inst.opcode() as usize] += 1;
                arg_counts[inst.operand() as usize] += 1;
            }
            chi_squared_uniform(&op_counts, draws);
            chi_squared_uniform(&arg_counts, draws);
        }
    }

    #[test]
    fn constructors_reject_out_of_range() {
        assert!(X86_MEM.instruction(14, 0).is_err());
        assert!(X86_MEM.instruction(0, 16).is_err());
        assert!(X86_MEM.instruction(13, 15).is_ok());
        let mut rng = rng_from_seed(6);
        let short: Vec<Instruction> =
            (0..5).map(|_| X86_MEM.random_instruction(&mut rng)).collect();
        assert_eq!(
            Program::new(short, &X86_MEM).unwrap_err(),
            IsaError::WrongProgramLength { found: 5, expected: 32 }
        );
    }

    #[test]
    fn count_noops_extremes() {
        let all_noop =
            Program::new(vec![Instruction { opcode: x86::OP_ARG, operand: 0 }; 32], &X86_MEM)
                .unwrap();
        assert_eq!(all_noop.count_noops(&X86_MEM), 32);
        let all_mov =
            Program::new(vec![Instruction { opcode: 0, operand: 0 }; 32], &X86_MEM).unwrap();
        assert_eq!(all_mov.count_noops(&X86_MEM), 0);
    }

    #[test]
    fn roundtrip_random_programs_all_profiles() {
        for profile in MachineProfile::all() {
            let mut rng = rng_from_seed(7);
            for _ in 0..1000 {
                let p = profile.random_program(&mut rng);
                let text = serialize(&p, profile);
                let back = deserialize(&text, profile).unwrap();
                assert_eq!(p, back);
                // serializing the parse reproduces the exact bytes
                assert_eq!(text, serialize(&back, profile));
            }
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let mut rng = rng_from_seed(8);
        let p = X86_MEM.random_program(&mut rng);
        let text = serialize(&p, &X86_MEM);

        let bad = text.replacen("MOV", "MOVV", 1).replacen("ADD", "MOVV", 1);
        match parse_with_profile(&bad) {
            Err(ParseError::UnknownMnemonic { line, token }) => {
                assert!(line >= 2);
                assert_eq!(token, "MOVV");
            }
            other => panic!("expected mnemonic error, got {other:?}"),
        }

        let truncated: String =
            text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            parse_with_profile(&truncated),
            Err(ParseError::WrongLineCount { expected: 32, .. })
        ));

        let wrong_profile = deserialize(&text, &X86_SCALAR);
        assert!(matches!(wrong_profile, Err(ParseError::ProfileMismatch { .. })));
    }
}
