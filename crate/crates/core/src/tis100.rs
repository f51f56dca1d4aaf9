//! Deterministic single-node TIS-100 interpreter with the imager protocol.
//!
//! Two registers ACC and BAK hold integers clamped to [-999, +999]. The
//! instruction pointer wraps to the first instruction after the last one
//! finishes. Values sent DOWN feed the imager: first X, then Y, then a run
//! of colors painted at (X,Y), (X+1,Y), ...; a negative value resets the
//! protocol to expect X. Execution halts the moment the canvas exactly
//! matches the target, otherwise the score is the best match count seen at
//! any point within the cycle budget.

use thiserror::Error;

use crate::isa::{MachineProfile, Program};

pub const IMAGE_WIDTH: usize = 30;
pub const IMAGE_HEIGHT: usize = 18;
pub const IMAGE_PIXELS: usize = IMAGE_WIDTH * IMAGE_HEIGHT;
pub const COLOR_MAX: u8 = 4;
pub const VALUE_LIMIT: i32 = 999;

pub const OP_SAV: u8 = 0;
pub const OP_SWP: u8 = 1;
pub const OP_MOVAD: u8 = 2; // MOV ACC,DOWN
pub const OP_MOVD: u8 = 3; // MOV op,DOWN
pub const OP_MOVA: u8 = 4; // MOV op,ACC
pub const OP_NEG: u8 = 5;
pub const OP_ADD: u8 = 6;
pub const OP_ADDA: u8 = 7; // ADD ACC
pub const OP_SUB: u8 = 8;
pub const OP_SUBA: u8 = 9; // SUB ACC
pub const OP_NOP: u8 = 10;
pub const OP_JMP: u8 = 11;
pub const OP_JEZ: u8 = 12;
pub const OP_JNZ: u8 = 13;
pub const OP_JLZ: u8 = 14;
pub const OP_JGZ: u8 = 15;

pub static MNEMONICS: [&str; 16] = [
    "SAV", "SWP", "MOVAD", "MOVD", "MOVA", "NEG", "ADD", "ADDA", "SUB", "SUBA", "NOP", "JMP",
    "JEZ", "JNZ", "JLZ", "JGZ",
];

pub fn is_jump(opcode: u8) -> bool {
    opcode >= OP_JMP
}

fn sends_down(opcode: u8) -> bool {
    opcode == OP_MOVAD || opcode == OP_MOVD
}

/// Immediate interpretation of an operand index: `x - floor(P/2)`, giving a
/// symmetric range around zero.
pub fn immediate(index: u16, profile: &MachineProfile) -> i32 {
    index as i32 - (profile.operand_count / 2) as i32
}

/// Jump interpretation: instruction `floor(x * S / P)`.
pub fn jump_target(index: u16, profile: &MachineProfile) -> usize {
    index as usize * profile.program_len / profile.operand_count as usize
}

pub(crate) fn operand_comment(opcode: u8, operand: u16, profile: &MachineProfile) -> String {
    if is_jump(opcode) {
        format!("-> {}", jump_target(operand, profile))
    } else {
        format!("imm {}", immediate(operand, profile))
    }
}

fn clamp(v: i32) -> i32 {
    v.clamp(-VALUE_LIMIT, VALUE_LIMIT)
}

/// A 30x18 target image with colors 0-4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetImage {
    pixels: [u8; IMAGE_PIXELS],
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("line {0}: expected {IMAGE_WIDTH} digits")]
    BadRow(usize),
    #[error("line {line}: color `{got}` outside 0-{COLOR_MAX}")]
    BadColor { line: usize, got: char },
    #[error("expected {IMAGE_HEIGHT} rows, found {0}")]
    WrongRowCount(usize),
}

impl TargetImage {
    pub fn from_fn(f: impl Fn(usize, usize) -> u8) -> TargetImage {
        let mut pixels = [0u8; IMAGE_PIXELS];
        for y in 0..IMAGE_HEIGHT {
            for x in 0..IMAGE_WIDTH {
                let c = f(x, y);
                assert!(c <= COLOR_MAX);
                pixels[y * IMAGE_WIDTH + x] = c;
            }
        }
        TargetImage { pixels }
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * IMAGE_WIDTH + x]
    }

    pub fn pixels(&self) -> &[u8; IMAGE_PIXELS] {
        &self.pixels
    }

    /// Parse the text grid format: 18 lines of 30 digits 0-4.
    pub fn parse(text: &str) -> Result<TargetImage, ImageError> {
        let mut pixels = [0u8; IMAGE_PIXELS];
        let mut rows = 0usize;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if rows >= IMAGE_HEIGHT {
                rows += 1;
                continue;
            }
            if line.chars().count() != IMAGE_WIDTH {
                return Err(ImageError::BadRow(i + 1));
            }
            for (x, ch) in line.chars().enumerate() {
                let digit =
                    ch.to_digit(10).ok_or(ImageError::BadColor { line: i + 1, got: ch })? as u8;
                if digit > COLOR_MAX {
                    return Err(ImageError::BadColor { line: i + 1, got: ch });
                }
                pixels[rows * IMAGE_WIDTH + x] = digit;
            }
            rows += 1;
        }
        if rows != IMAGE_HEIGHT {
            return Err(ImageError::WrongRowCount(rows));
        }
        Ok(TargetImage { pixels })
    }

    /// Render in the same grid format `parse` accepts.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(IMAGE_PIXELS + IMAGE_HEIGHT);
        for y in 0..IMAGE_HEIGHT {
            for x in 0..IMAGE_WIDTH {
                out.push((b'0' + self.pixel(x, y)) as char);
            }
            out.push('\n');
        }
        out
    }
}

/// One image puzzle: the target plus its cycle budget.
#[derive(Clone, Debug)]
pub struct TisProblem {
    pub target: TargetImage,
    pub cycle_bound: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ImagerPhase {
    ExpectX,
    ExpectY,
    Color,
}

/// Machine state during/after execution.
#[derive(Clone, Debug)]
pub struct TisState {
    pub acc: i32,
    pub bak: i32,
    pub ip: usize,
    pub cycles_used: u64,
    phase: ImagerPhase,
    cursor_x: i32,
    cursor_y: i32,
    canvas: [u8; IMAGE_PIXELS],
    matches: u32,
    pub best_match: u32,
    pub solved: bool,
}

impl TisState {
    fn new(target: &TargetImage) -> TisState {
        // the blank canvas already matches the target's zero pixels
        let matches = target.pixels.iter().filter(|&&c| c == 0).count() as u32;
        TisState {
            acc: 0,
            bak: 0,
            ip: 0,
            cycles_used: 0,
            phase: ImagerPhase::ExpectX,
            cursor_x: 0,
            cursor_y: 0,
            canvas: [0u8; IMAGE_PIXELS],
            matches,
            best_match: matches,
            solved: matches as usize == IMAGE_PIXELS,
        }
    }

    pub fn canvas(&self) -> &[u8; IMAGE_PIXELS] {
        &self.canvas
    }

    /// Feed one value to the imager. Out-of-grid paints and colors outside
    /// 0-4 are discarded (the cursor still advances); this is the single
    /// place that rule lives.
    fn send_to_imager(&mut self, value: i32, target: &TargetImage) {
        match self.phase {
            ImagerPhase::ExpectX => {
                self.cursor_x = value;
                self.phase = ImagerPhase::ExpectY;
            }
            ImagerPhase::ExpectY => {
                self.cursor_y = value;
                self.phase = ImagerPhase::Color;
            }
            ImagerPhase::Color => {
                if value < 0 {
                    self.phase = ImagerPhase::ExpectX;
                    return;
                }
                let (x, y) = (self.cursor_x, self.cursor_y);
                self.cursor_x += 1;
                if value <= COLOR_MAX as i32
                    && (0..IMAGE_WIDTH as i32).contains(&x)
                    && (0..IMAGE_HEIGHT as i32).contains(&y)
                {
                    let idx = y as usize * IMAGE_WIDTH + x as usize;
                    let old = self.canvas[idx];
                    let new = value as u8;
                    if old != new {
                        let want = target.pixels[idx];
                        self.matches += (new == want) as u32;
                        self.matches -= (old == want) as u32;
                        self.canvas[idx] = new;
                        if self.matches > self.best_match {
                            self.best_match = self.matches;
                        }
                        if self.matches as usize == IMAGE_PIXELS {
                            self.solved = true;
                        }
                    }
                }
            }
        }
    }
}

/// Result of one execution.
#[derive(Clone, Debug)]
pub struct TisOutcome {
    pub best_match: u32,
    pub solved: bool,
    pub cycles_used: u64,
    pub state: TisState,
}

#[derive(Clone, Copy)]
struct DecodedTis {
    op: u8,
    imm: i32,
    target: u16,
}

/// Program decoded for execution.
pub struct DecodedTisProgram {
    insns: Vec<DecodedTis>,
}

impl DecodedTisProgram {
    pub fn decode(program: &Program, profile: &MachineProfile) -> DecodedTisProgram {
        let mut d = DecodedTisProgram { insns: Vec::new() };
        d.decode_into(program, profile);
        d
    }

    pub fn empty() -> DecodedTisProgram {
        DecodedTisProgram { insns: Vec::new() }
    }

    pub fn decode_into(&mut self, program: &Program, profile: &MachineProfile) {
        self.insns.clear();
        for inst in program.instructions() {
            self.insns.push(DecodedTis {
                op: inst.opcode(),
                imm: immediate(inst.operand(), profile),
                target: jump_target(inst.operand(), profile) as u16,
            });
        }
    }

    /// Run against a target image. Instructions cost 1 cycle, sends to the
    /// imager cost 2; an instruction whose cost would exceed `cycle_bound`
    /// is not executed. Painting the full target halts immediately.
    pub fn run(&self, target: &TargetImage, cycle_bound: u64) -> TisOutcome {
        self.run_observed(target, cycle_bound, |_| {})
    }

    /// Same as [`run`](Self::run) with a per-instruction hook (opcode of
    /// each instruction actually executed), used to cross-check cycle
    /// accounting from outside.
    pub fn run_observed(
        &self,
        target: &TargetImage,
        cycle_bound: u64,
        mut on_step: impl FnMut(u8),
    ) -> TisOutcome {
        let mut st = TisState::new(target);
        if !self.insns.is_empty() && !st.solved {
            loop {
                let insn = self.insns[st.ip];
                let cost = if sends_down(insn.op) { 2 } else { 1 };
                if st.cycles_used + cost > cycle_bound {
                    break;
                }
                st.cycles_used += cost;
                on_step(insn.op);
                let mut next = st.ip + 1;
                match insn.op {
                    OP_SAV => st.bak = st.acc,
                    OP_SWP => std::mem::swap(&mut st.acc, &mut st.bak),
                    OP_MOVAD => st.send_to_imager(st.acc, target),
                    OP_MOVD => st.send_to_imager(insn.imm, target),
                    OP_MOVA => st.acc = clamp(insn.imm),
                    OP_NEG => st.acc = clamp(-st.acc),
                    OP_ADD => st.acc = clamp(st.acc + insn.imm),
                    OP_ADDA => st.acc = clamp(st.acc + st.acc),
                    OP_SUB => st.acc = clamp(st.acc - insn.imm),
                    OP_SUBA => st.acc = 0,
                    OP_NOP => {}
                    _ => {
                        let take = match insn.op {
                            OP_JMP => true,
                            OP_JEZ => st.acc == 0,
                            OP_JNZ => st.acc != 0,
                            OP_JLZ => st.acc < 0,
                            _ => st.acc > 0, // JGZ
                        };
                        if take {
                            next = insn.target as usize;
                        }
                    }
                }
                if st.solved {
                    st.ip = next % self.insns.len();
                    break;
                }
                // wrap to the first instruction after the last finishes
                st.ip = if next >= self.insns.len() { 0 } else { next };
            }
        }
        TisOutcome {
            best_match: st.best_match,
            solved: st.solved,
            cycles_used: st.cycles_used,
            state: st,
        }
    }
}

/// Decode-and-run convenience used by tests and the CLI.
pub fn execute(
    program: &Program,
    profile: &MachineProfile,
    target: &TargetImage,
    cycle_bound: u64,
) -> TisOutcome {
    DecodedTisProgram::decode(program, profile).run(target, cycle_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{Program, TIS_P101, TIS_P1999, TIS_P21};
    use rand::Rng;

    pub(crate) fn checkerboard() -> TargetImage {
        TargetImage::from_fn(|x, y| if (x + y) % 2 == 0 { 3 } else { 0 })
    }

    fn all_nop(profile: &MachineProfile) -> Program {
        Program::new(
            vec![profile.instruction(OP_NOP, 0).unwrap(); profile.program_len],
            profile,
        )
        .unwrap()
    }

    #[test]
    fn immediates_are_symmetric() {
        assert_eq!(immediate(999, &TIS_P1999), 0);
        assert_eq!(immediate(0, &TIS_P21), -10);
        assert_eq!(immediate(20, &TIS_P21), 10);
        assert_eq!(immediate(0, &TIS_P1999), -999);
        assert_eq!(immediate(1998, &TIS_P1999), 999);
    }

    #[test]
    fn jump_targets_scale_by_s_over_p() {
        assert_eq!(jump_target(1998, &TIS_P1999), 14);
        assert_eq!(jump_target(0, &TIS_P21), 0);
        assert_eq!(jump_target(6, &TIS_P21), 4);
        assert_eq!(jump_target(20, &TIS_P21), 14);
    }

    #[test]
    fn all_nop_scores_blank_canvas() {
        let target3 = TargetImage::from_fn(|_, _| 3);
        let out = execute(&all_nop(&TIS_P21), &TIS_P21, &target3, 10_000);
        assert_eq!(out.best_match, 0);
        assert!(!out.solved);

        let out = execute(&all_nop(&TIS_P21), &TIS_P21, &checkerboard(), 10_000);
        assert_eq!(out.best_match, 270);
        assert!(!out.solved);
        assert_eq!(out.cycles_used, 10_000);
    }

    #[test]
    fn imager_paints_runs_and_resets() {
        // send X=2, Y=1, colors 3,4, then reset, then X=0,Y=0, color 1
        let profile = &TIS_P21;
        let seq = [2, 1, 3, 4, -1, 0, 0, 1];
        let mut insns = Vec::new();
        for v in seq {
            insns.push(profile.instruction(OP_MOVD, (v + 10) as u16).unwrap());
        }
        insns.push(profile.instruction(OP_JEZ, 20).unwrap()); // spin at 14
        while insns.len() < profile.program_len {
            insns.push(profile.instruction(OP_NOP, 0).unwrap());
        }
        let program = Program::new(insns, profile).unwrap();
        let target = TargetImage::from_fn(|_, _| 1);
        let out = execute(&program, profile, &target, 64);
        let canvas = out.state.canvas();
        assert_eq!(canvas[IMAGE_WIDTH + 2], 3);
        assert_eq!(canvas[IMAGE_WIDTH + 3], 4);
        assert_eq!(canvas[0], 1);
    }

    #[test]
    fn out_of_grid_paints_are_discarded_cursor_advances() {
        let profile = &TIS_P101;
        // X=28, Y=0, then four paints: the last two fall off the right edge.
        // A self-jump then spins until the cycle budget runs out.
        let seq = [28, 0, 1, 2, 3, 4];
        let mut insns = Vec::new();
        for v in seq {
            insns.push(profile.instruction(OP_MOVD, (v + 50) as u16).unwrap());
        }
        insns.push(profile.instruction(OP_JEZ, 41).unwrap()); // target 6: itself
        while insns.len() < profile.program_len {
            insns.push(profile.instruction(OP_NOP, 0).unwrap());
        }
        let program = Program::new(insns, profile).unwrap();
        let target = TargetImage::from_fn(|_, _| 1);
        let out = execute(&program, profile, &target, 64);
        let canvas = out.state.canvas();
        assert_eq!(canvas[28], 1);
        assert_eq!(canvas[29], 2);
        assert_eq!(out.best_match, 1, "only the color-1 paint matches the all-1 target");
        assert!(!out.solved);
    }

    #[test]
    fn acc_clamps_to_limit() {
        let mut rng = crate::rng::rng_from_seed(13);
        let target = checkerboard();
        for _ in 0..300 {
            let p = TIS_P1999.random_program(&mut rng);
            let out = execute(&p, &TIS_P1999, &target, 2_000);
            assert!(out.state.acc.abs() <= VALUE_LIMIT);
            assert!(out.state.bak.abs() <= VALUE_LIMIT);
            assert!(out.cycles_used <= 2_000);
            assert!(out.best_match >= 270); // monotone from the blank canvas
        }
    }

    #[test]
    fn cycle_accounting_matches_observed_trace() {
        let mut rng = crate::rng::rng_from_seed(14);
        let target = checkerboard();
        for _ in 0..100 {
            let p = TIS_P21.random_program(&mut rng);
            let decoded = DecodedTisProgram::decode(&p, &TIS_P21);
            let mut plain = 0u64;
            let mut sends = 0u64;
            let bound = rng.gen_range(0..3_000u64);
            let out = decoded.run_observed(&target, bound, |op| {
                if sends_down(op) {
                    sends += 1;
                } else {
                    plain += 1;
                }
            });
            assert_eq!(out.cycles_used, plain + 2 * sends);
        }
    }

    #[test]
    fn image_text_roundtrip() {
        let img = checkerboard();
        let text = img.render();
        assert_eq!(TargetImage::parse(&text).unwrap(), img);
        assert!(matches!(TargetImage::parse("123"), Err(ImageError::BadRow(1))));
        let bad = text.replacen('3', "7", 1);
        assert!(matches!(TargetImage::parse(&bad), Err(ImageError::BadColor { .. })));
    }
}
