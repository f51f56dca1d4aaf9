//! Deterministic interpreter for the simplified x86-64 subset.
//!
//! Six signed 64-bit registers, a fixed memory block, three flags (ZF/SF/OF)
//! and a loopcount budget: every taken backward jump costs 1, and execution
//! halts once the instance's bound would be exceeded. The pseudo-opcode ARG
//! selects the destination for subsequent instructions in textual order down
//! to the next ARG, regardless of jumps, so every instruction's governing
//! destination is precomputed before execution.

use thiserror::Error;

use crate::isa::{MachineProfile, Program};

pub const REG_COUNT: usize = 6;

pub const OP_MOV: u8 = 0;
pub const OP_ADD: u8 = 1;
pub const OP_SUB: u8 = 2;
pub const OP_IMUL: u8 = 3;
pub const OP_INC: u8 = 4;
pub const OP_CMP: u8 = 5;
pub const OP_TEST: u8 = 6;
pub const OP_SHR: u8 = 7;
pub const OP_SHL: u8 = 8;
pub const OP_JMP: u8 = 9;
pub const OP_JZ: u8 = 10;
pub const OP_JNZ: u8 = 11;
pub const OP_JG: u8 = 12;
pub const OP_ARG: u8 = 13;

pub static MNEMONICS: [&str; 14] = [
    "MOV", "ADD", "SUB", "IMUL", "INC", "CMP", "TEST", "SHR", "SHL", "JMP", "JZ", "JNZ", "JG",
    "ARG",
];

pub fn is_jump(opcode: u8) -> bool {
    (OP_JMP..=OP_JG).contains(&opcode)
}

/// A resolved operand location. Memory operands keep the register index;
/// the address is read from that register at each access.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Reg(u8),
    Mem(u8),
    Imm(i64),
}

/// Classify an operand index under the profile's layout: registers first,
/// then (with memory, P=16) six register-addressed memory cells, then the
/// immediates 0-3. The scalar profile (P=10) has no memory operands.
pub fn resolve_operand(index: u16, profile: &MachineProfile) -> Operand {
    debug_assert!(index < profile.operand_count);
    let regs = profile.reg_count as u16;
    if index < regs {
        return Operand::Reg(index as u8);
    }
    if profile.operand_count == 16 && index < regs + 6 {
        return Operand::Mem((index - regs) as u8);
    }
    let imm_base = if profile.operand_count == 16 { regs + 6 } else { regs };
    Operand::Imm((index - imm_base) as i64)
}

/// Jump interpretation of an operand index: instruction `x * floor(S/P)`.
pub fn jump_target(index: u16, profile: &MachineProfile) -> usize {
    index as usize * (profile.program_len / profile.operand_count as usize)
}

pub(crate) fn operand_comment(opcode: u8, operand: u16, profile: &MachineProfile) -> String {
    if is_jump(opcode) {
        return format!("-> {}", jump_target(operand, profile));
    }
    let loc = match resolve_operand(operand, profile) {
        Operand::Reg(r) => format!("R{r}"),
        Operand::Mem(r) => format!("[R{r}]"),
        Operand::Imm(v) => format!("imm {v}"),
    };
    if opcode == OP_ARG {
        format!("dest {loc}")
    } else {
        loc
    }
}

/// Why execution stopped. Exactly one reason per execution; the machine
/// state at the halt is kept and scored as-is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaltReason {
    EndOfProgram,
    LoopcountExceeded,
    MemoryViolation,
}

/// Machine state: registers, the input memory block, flags, instruction
/// pointer (== S means halted off the end) and backjump budget used.
#[derive(Clone, Debug)]
pub struct X86State {
    pub regs: [i64; REG_COUNT],
    pub memory: Vec<i64>,
    pub zf: bool,
    pub sf: bool,
    pub of: bool,
    pub ip: usize,
    pub loopcount_used: u64,
}

impl X86State {
    pub fn new(regs: [i64; REG_COUNT], memory: Vec<i64>) -> X86State {
        X86State { regs, memory, zf: false, sf: false, of: false, ip: 0, loopcount_used: 0 }
    }
}

/// Inputs for one problem instance: scalar values and the arrays laid out
/// in memory (including any preallocated output arrays), plus the row size
/// when an array is two-dimensional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputLayout {
    pub scalars: Vec<i64>,
    pub arrays: Vec<Vec<i64>>,
    pub row_size: Option<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InitError {
    #[error("benchmark layout needs {needed} register values but only {REG_COUNT} registers exist")]
    TooManyRegisterValues { needed: usize },
}

/// Initial register file for an instance, assigned in order to R1..R5 and
/// then R0: scalar inputs; each input array's last-element index (-1 if
/// empty); the first-element index of each array after the first; the memory
/// size n; and for a 2d array of row size m, the values m-1 and m.
pub fn initial_registers(layout: &InputLayout) -> Result<[i64; REG_COUNT], InitError> {
    let mut values: Vec<i64> = layout.scalars.clone();
    let mut offset: i64 = 0;
    let mut starts = Vec::with_capacity(layout.arrays.len());
    for array in &layout.arrays {
        starts.push(offset);
        if array.is_empty() {
            values.push(-1);
        } else {
            values.push(offset + array.len() as i64 - 1);
        }
        offset += array.len() as i64;
    }
    for start in starts.iter().skip(1) {
        values.push(*start);
    }
    if !layout.arrays.is_empty() {
        values.push(offset);
    }
    if let Some(m) = layout.row_size {
        values.push(m as i64 - 1);
        values.push(m as i64);
    }
    if values.len() > REG_COUNT {
        return Err(InitError::TooManyRegisterValues { needed: values.len() });
    }
    let mut regs = [0i64; REG_COUNT];
    for (i, v) in values.into_iter().enumerate() {
        let slot = if i < REG_COUNT - 1 { i + 1 } else { 0 };
        regs[slot] = v;
    }
    Ok(regs)
}

/// Concatenated memory image for an instance.
pub fn initial_memory(layout: &InputLayout) -> Vec<i64> {
    let mut memory = Vec::with_capacity(layout.arrays.iter().map(Vec::len).sum());
    for array in &layout.arrays {
        memory.extend_from_slice(array);
    }
    memory
}

/// Full initial state per the instance layout: flags cleared, ip 0.
pub fn init_state(layout: &InputLayout) -> Result<X86State, InitError> {
    Ok(X86State::new(initial_registers(layout)?, initial_memory(layout)))
}

#[derive(Clone, Copy)]
struct DecodedInsn {
    op: u8,
    src: Operand,
    dest: Operand,
    target: u32,
}

/// Sentinel compacted target for jumps that land past the last effective
/// instruction (only ARG padding follows, so the run just ends).
const TARGET_END: u32 = u32::MAX;

/// Program decoded for execution: operands classified, each instruction's
/// governing ARG destination resolved up front, and the ARG slots themselves
/// dropped from the stream (they execute nothing). Jump targets are remapped
/// to the first effective instruction at or after the original target; the
/// mapping is monotone, so backward-vs-forward classification of every jump
/// is preserved.
pub struct DecodedProgram {
    insns: Vec<DecodedInsn>,
    /// Original slot index of each effective instruction.
    orig_index: Vec<u32>,
    /// Original program length S.
    source_len: usize,
}

/// Result of one execution. Registers, memory and flags live in the
/// caller's buffers; this carries the rest of the final state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecOutcome {
    pub halt: HaltReason,
    pub loopcount_used: u64,
    pub final_ip: usize,
    pub zf: bool,
    pub sf: bool,
    pub of: bool,
}

impl DecodedProgram {
    pub fn decode(program: &Program, profile: &MachineProfile) -> DecodedProgram {
        let mut decoded = DecodedProgram::empty();
        decoded.decode_into(program, profile);
        decoded
    }

    pub fn empty() -> DecodedProgram {
        DecodedProgram { insns: Vec::new(), orig_index: Vec::new(), source_len: 0 }
    }

    /// Re-decode into the existing allocations (the evaluator hot path).
    pub fn decode_into(&mut self, program: &Program, profile: &MachineProfile) {
        self.insns.clear();
        self.orig_index.clear();
        self.source_len = program.len();
        let mut dest = Operand::Reg(0);
        for (slot, inst) in program.instructions().iter().enumerate() {
            let op = inst.opcode();
            let src = resolve_operand(inst.operand(), profile);
            if op == OP_ARG {
                dest = src;
                continue;
            }
            let target =
                if is_jump(op) { jump_target(inst.operand(), profile) as u32 } else { 0 };
            self.insns.push(DecodedInsn { op, src, dest, target });
            self.orig_index.push(slot as u32);
        }
        // remap original jump targets to compacted indices
        for insn in &mut self.insns {
            if is_jump(insn.op) {
                insn.target = match self.orig_index.partition_point(|&o| o < insn.target) {
                    i if i == self.orig_index.len() => TARGET_END,
                    i => i as u32,
                };
            }
        }
    }

    fn original_ip(&self, compacted: usize) -> usize {
        self.orig_index.get(compacted).map_or(self.source_len, |&o| o as usize)
    }

    /// Interpret from ip 0 until end-of-program, a memory violation, or the
    /// loopcount budget is exhausted (the jump that would exceed `bound` is
    /// rejected, so `loopcount_used <= bound` always holds).
    ///
    /// Spin shortcut: when two consecutive taken backjumps share the same
    /// (ip, target) and the same flags, with no register or memory write in
    /// between, the full machine state has repeated exactly, so the run is a
    /// deterministic cycle that can only end at the loopcount bound. It is
    /// forwarded there directly; the final state is bit-identical to the
    /// full run's.
    pub fn run(&self, regs: &mut [i64; REG_COUNT], mem: &mut [i64], bound: u64) -> ExecOutcome {
        let code = &self.insns;
        let mut ip = 0usize;
        let mut used = 0u64;
        let (mut zf, mut sf, mut of) = (false, false, false);
        let mut dirty = true;
        let mut last_backjump = (usize::MAX, usize::MAX, false, false, false);

        macro_rules! read {
            ($loc:expr) => {
                match $loc {
                    Operand::Reg(r) => regs[r as usize],
                    Operand::Imm(v) => v,
                    Operand::Mem(r) => {
                        let a = regs[r as usize];
                        if a < 0 || a as usize >= mem.len() {
                            break HaltReason::MemoryViolation;
                        }
                        mem[a as usize]
                    }
                }
            };
        }
        macro_rules! write {
            ($loc:expr, $val:expr) => {
                match $loc {
                    Operand::Reg(r) => {
                        regs[r as usize] = $val;
                        dirty = true;
                    }
                    Operand::Imm(_) => {} // writes to immediates are dropped
                    Operand::Mem(r) => {
                        let a = regs[r as usize];
                        if a < 0 || a as usize >= mem.len() {
                            break HaltReason::MemoryViolation;
                        }
                        mem[a as usize] = $val;
                        dirty = true;
                    }
                }
            };
        }
        macro_rules! flags {
            ($r:expr, $o:expr) => {
                zf = $r == 0;
                sf = $r < 0;
                of = $o;
            };
        }

        let halt = loop {
            let Some(insn) = code.get(ip) else { break HaltReason::EndOfProgram };
            match insn.op {
                OP_MOV => {
                    let v = read!(insn.src);
                    write!(insn.dest, v);
                }
                OP_ADD => {
                    let a = read!(insn.dest);
                    let b = read!(insn.src);
                    let (r, o) = a.overflowing_add(b);
                    flags!(r, o);
                    write!(insn.dest, r);
                }
                OP_SUB => {
                    let a = read!(insn.dest);
                    let b = read!(insn.src);
                    let (r, o) = a.overflowing_sub(b);
                    flags!(r, o);
                    write!(insn.dest, r);
                }
                OP_IMUL => {
                    let a = read!(insn.dest);
                    let b = read!(insn.src);
                    let (r, o) = a.overflowing_mul(b);
                    flags!(r, o);
                    write!(insn.dest, r);
                }
                // INC increments its operand location directly; the comb
                // sort transcription pins this reading (its INC runs under
                // a memory-destination ARG scope yet must step a register).
                OP_INC => {
                    let a = read!(insn.src);
                    let (r, o) = a.overflowing_add(1);
                    flags!(r, o);
                    write!(insn.src, r);
                }
                OP_CMP => {
                    let a = read!(insn.dest);
                    let b = read!(insn.src);
                    let (r, o) = a.overflowing_sub(b);
                    flags!(r, o);
                }
                OP_TEST => {
                    let a = read!(insn.dest);
                    let b = read!(insn.src);
                    let r = a & b;
                    flags!(r, false);
                }
                OP_SHR => {
                    let a = read!(insn.dest);
                    let sh = (read!(insn.src) & 63) as u32;
                    let r = ((a as u64) >> sh) as i64;
                    flags!(r, false);
                    write!(insn.dest, r);
                }
                OP_SHL => {
                    let a = read!(insn.dest);
                    let sh = (read!(insn.src) & 63) as u32;
                    let r = ((a as u64) << sh) as i64;
                    flags!(r, false);
                    write!(insn.dest, r);
                }
                OP_ARG => {} // destination switch is precomputed
                _ => {
                    let take = match insn.op {
                        OP_JMP => true,
                        OP_JZ => zf,
                        OP_JNZ => !zf,
                        _ => !zf && (sf == of), // JG, signed greater
                    };
                    if take {
                        let target = insn.target as usize;
                        if target <= ip {
                            if used >= bound {
                                break HaltReason::LoopcountExceeded;
                            }
                            if !dirty && last_backjump == (ip, target, zf, sf, of) {
                                used = bound;
                                break HaltReason::LoopcountExceeded;
                            }
                            used += 1;
                            last_backjump = (ip, target, zf, sf, of);
                            dirty = false;
                        }
                        ip = target;
                        continue;
                    }
                }
            }
            ip += 1;
        };
        ExecOutcome { halt, loopcount_used: used, final_ip: ip, zf, sf, of }
    }
}

/// Execute a program against a prepared state. Convenience wrapper over
/// [`DecodedProgram::run`]; the state at the halt is returned for scoring
/// whatever the halt reason.
pub fn execute(
    program: &Program,
    profile: &MachineProfile,
    mut state: X86State,
    loopcount_bound: u64,
) -> (X86State, HaltReason) {
    let decoded = DecodedProgram::decode(program, profile);
    let mut regs = state.regs;
    let outcome = decoded.run(&mut regs, &mut state.memory, loopcount_bound);
    state.regs = regs;
    state.ip = decoded.original_ip(outcome.final_ip);
    state.loopcount_used = outcome.loopcount_used;
    state.zf = outcome.zf;
    state.sf = outcome.sf;
    state.of = outcome.of;
    (state, outcome.halt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{X86_MEM, X86_SCALAR};

    fn asm(pairs: &[(u8, u16)], profile: &MachineProfile) -> Program {
        let mut v: Vec<_> =
            pairs.iter().map(|&(op, arg)| profile.instruction(op, arg).unwrap()).collect();
        while v.len() < profile.program_len {
            v.push(profile.instruction(OP_ARG, 0).unwrap());
        }
        Program::new(v, profile).unwrap()
    }

    #[test]
    fn operand_layout_with_memory() {
        assert_eq!(resolve_operand(14, &X86_MEM), Operand::Imm(2));
        assert_eq!(resolve_operand(3, &X86_MEM), Operand::Reg(3));
        assert_eq!(resolve_operand(6, &X86_MEM), Operand::Mem(0));
        assert_eq!(resolve_operand(11, &X86_MEM), Operand::Mem(5));
        assert_eq!(resolve_operand(12, &X86_MEM), Operand::Imm(0));
        assert_eq!(resolve_operand(15, &X86_MEM), Operand::Imm(3));
        assert_eq!(jump_target(7, &X86_MEM), 14);
    }

    #[test]
    fn operand_layout_scalar_profile() {
        assert_eq!(resolve_operand(5, &X86_SCALAR), Operand::Reg(5));
        assert_eq!(resolve_operand(6, &X86_SCALAR), Operand::Imm(0));
        assert_eq!(resolve_operand(9, &X86_SCALAR), Operand::Imm(3));
        assert_eq!(jump_target(9, &X86_SCALAR), 27);
    }

    #[test]
    fn mov_to_default_dest() {
        // ARG R0 then MOV imm 3: R0 ends at 3, halt off the end.
        let p = asm(&[(OP_ARG, 0), (OP_MOV, 15)], &X86_MEM);
        let (state, halt) = execute(&p, &X86_MEM, X86State::new([0; 6], vec![]), 100);
        assert_eq!(halt, HaltReason::EndOfProgram);
        assert_eq!(state.regs[0], 3);
        assert_eq!(state.ip, 32);
    }

    #[test]
    fn arg_scope_is_textual() {
        // dest switches to R2 midway; both MOVs hit their own scope.
        let p = asm(&[(OP_MOV, 13), (OP_ARG, 2), (OP_MOV, 15)], &X86_MEM);
        let (state, _) = execute(&p, &X86_MEM, X86State::new([0; 6], vec![]), 100);
        assert_eq!(state.regs[0], 1);
        assert_eq!(state.regs[2], 3);
    }

    #[test]
    fn inc_targets_its_operand() {
        // ARG [R0] sets a memory destination, but INC R3 must still step R3.
        let p = asm(&[(OP_ARG, 6), (OP_INC, 3)], &X86_MEM);
        let mut init = X86State::new([0; 6], vec![7]);
        init.regs[3] = 41;
        let (state, halt) = execute(&p, &X86_MEM, init, 100);
        assert_eq!(halt, HaltReason::EndOfProgram);
        assert_eq!(state.regs[3], 42);
        assert_eq!(state.memory, vec![7]);
    }

    #[test]
    fn backjump_budget_rejects_next_attempt() {
        // Self-jump at slot 0: every take is a backjump. With bound 4 the
        // fifth attempt is rejected and used stays at the bound.
        let p = asm(&[(OP_JMP, 0)], &X86_MEM);
        let (state, halt) = execute(&p, &X86_MEM, X86State::new([0; 6], vec![]), 4);
        assert_eq!(halt, HaltReason::LoopcountExceeded);
        assert_eq!(state.loopcount_used, 4);
        assert_eq!(state.ip, 0);
    }

    #[test]
    fn forward_jumps_are_free() {
        // JMP to slot 14, then fall off the end; no loopcount.
        let p = asm(&[(OP_JMP, 7)], &X86_MEM);
        let (state, halt) = execute(&p, &X86_MEM, X86State::new([0; 6], vec![]), 0);
        assert_eq!(halt, HaltReason::EndOfProgram);
        assert_eq!(state.loopcount_used, 0);
    }

    #[test]
    fn memory_violation_keeps_partial_state() {
        // R1 := 2 succeeds, then a read through R0 = -1 violates.
        let p = asm(&[(OP_ARG, 1), (OP_MOV, 14), (OP_ADD, 6)], &X86_MEM);
        let mut init = X86State::new([0; 6], vec![1, 2]);
        init.regs[0] = -1;
        let (state, halt) = execute(&p, &X86_MEM, init, 100);
        assert_eq!(halt, HaltReason::MemoryViolation);
        assert_eq!(state.regs[1], 2);
        assert_eq!(state.ip, 2);
    }

    #[test]
    fn writes_to_immediates_are_dropped() {
        let p = asm(&[(OP_ARG, 12), (OP_MOV, 15), (OP_ADD, 15)], &X86_MEM);
        let (state, halt) = execute(&p, &X86_MEM, X86State::new([0; 6], vec![]), 100);
        assert_eq!(halt, HaltReason::EndOfProgram);
        assert_eq!(state.regs, [0; 6]);
        // ADD still set flags from imm 0 + imm 3
        assert!(!state.zf && !state.sf && !state.of);
    }

    #[test]
    fn jg_uses_overflow_flag() {
        // R1 = i64::MIN; CMP R1 vs imm 1 overflows: SF=0, OF=1, so JG
        // (signed greater) must not be taken.
        let p = asm(&[(OP_ARG, 1), (OP_CMP, 13), (OP_JG, 7), (OP_ARG, 2), (OP_MOV, 15)], &X86_MEM);
        let mut init = X86State::new([0; 6], vec![]);
        init.regs[1] = i64::MIN;
        let (state, _) = execute(&p, &X86_MEM, init, 100);
        assert_eq!(state.regs[2], 3, "JG must fall through on signed overflow");
        assert!(state.of && !state.sf);
    }

    #[test]
    fn register_init_layout_examples() {
        // scalar only
        let regs = initial_registers(&InputLayout {
            scalars: vec![5],
            arrays: vec![],
            row_size: None,
        })
        .unwrap();
        assert_eq!(regs, [0, 5, 0, 0, 0, 0]);

        // one array of length 4: last index 3, n = 4
        let regs = initial_registers(&InputLayout {
            scalars: vec![],
            arrays: vec![vec![9, 9, 9, 9]],
            row_size: None,
        })
        .unwrap();
        assert_eq!(regs, [0, 3, 4, 0, 0, 0]);

        // three arrays of length 2: last indices 1,3,5, starts 2,4, n=6 in R0
        let regs = initial_registers(&InputLayout {
            scalars: vec![],
            arrays: vec![vec![1, 2], vec![3, 4], vec![0, 0]],
            row_size: None,
        })
        .unwrap();
        assert_eq!(regs, [6, 1, 3, 5, 2, 4]);

        // empty array reports -1
        let regs = initial_registers(&InputLayout {
            scalars: vec![],
            arrays: vec![vec![]],
            row_size: None,
        })
        .unwrap();
        assert_eq!(regs, [0, -1, 0, 0, 0, 0]);

        // overflow: 1 scalar + 3 last indices + 2 starts + n + m-1 + m = 9 values
        let err = initial_registers(&InputLayout {
            scalars: vec![1],
            arrays: vec![vec![1], vec![1], vec![1]],
            row_size: Some(1),
        })
        .unwrap_err();
        assert_eq!(err, InitError::TooManyRegisterValues { needed: 9 });
    }

    #[test]
    fn execution_is_deterministic() {
        let mut rng = crate::rng::rng_from_seed(11);
        for _ in 0..200 {
            let p = X86_MEM.random_program(&mut rng);
            let init = X86State::new([3, 1, 4, 1, 5, 9], vec![2, 6, 5, 3, 5]);
            let (s1, h1) = execute(&p, &X86_MEM, init.clone(), 50);
            let (s2, h2) = execute(&p, &X86_MEM, init, 50);
            assert_eq!(h1, h2);
            assert_eq!(s1.regs, s2.regs);
            assert_eq!(s1.memory, s2.memory);
            assert_eq!(s1.loopcount_used, s2.loopcount_used);
            assert!(s1.loopcount_used <= 50);
        }
    }
}
