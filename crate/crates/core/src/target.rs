//! Target distributions: one-point targets, the one-hot table layout, and
//! the 8×20 grid image split into 2×2 blocks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};

const SUM_TOL: f64 = 1e-12;

/// Probability vector over basis indices `0..2^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDistribution {
    probs: Vec<f64>,
}

impl TargetDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if !probs.len().is_power_of_two() {
            return Err(QbmError::Config(format!(
                "distribution length {} is not a power of two",
                probs.len()
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL || probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(QbmError::Unnormalized { sum });
        }
        Ok(Self { probs })
    }

    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_qubits(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    /// Index of the largest probability; lowest index wins ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }
}

pub(crate) fn argmax<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest value; lowest index wins ties.
pub(crate) fn argmin<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

/// Parses an `n`-character string of `0`/`1` into its basis index
/// (first character is qubit 1, the most significant bit).
pub fn parse_bitstring(bits: &str, n: usize) -> Result<usize> {
    if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(QbmError::MalformedBitstring(bits.to_owned()));
    }
    Ok(usize::from_str_radix(bits, 2).expect("validated binary digits"))
}

pub fn format_bitstring(index: usize, n: usize) -> String {
    format!("{index:0n$b}")
}

/// All mass on the basis state spelled by `bits`.
pub fn one_point(bits: &str, n: usize) -> Result<TargetDistribution> {
    let idx = parse_bitstring(bits, n)?;
    let mut probs = vec![0.0; 1 << n];
    probs[idx] = 1.0;
    Ok(TargetDistribution { probs })
}

/// One-hot vector in the table's printed order: component 0 (leftmost) is
/// value 15, the last component is value 0, so value `v` sits at `15 − v`.
pub fn onehot_encode(bits: &str) -> Result<[u8; 16]> {
    let v = parse_bitstring(bits, 4)?;
    let mut out = [0u8; 16];
    out[15 - v] = 1;
    Ok(out)
}

pub fn onehot_decode(vector: &[u8]) -> Result<String> {
    let malformed = || QbmError::MalformedBitstring(vector.iter().map(|d| d.to_string()).collect());
    if vector.len() != 16 || vector.iter().any(|&d| d > 1) || vector.iter().filter(|&&d| d == 1).count() != 1 {
        return Err(malformed());
    }
    let pos = vector.iter().position(|&d| d == 1).ok_or_else(malformed)?;
    Ok(format_bitstring(15 - pos, 4))
}

/// Printed one-hot string, e.g. `"0000001000000000"` for `"1001"`.
pub fn onehot_string(bits: &str) -> Result<String> {
    Ok(onehot_encode(bits)?.iter().map(|d| char::from(b'0' + d)).collect())
}

pub const GRID_ROWS: usize = 8;
pub const GRID_COLS: usize = 20;
pub const BLOCK_COUNT: usize = GRID_ROWS * GRID_COLS / 4;

/// Binary 8×20 image; `true` is a black cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridImage {
    cells: [[bool; GRID_COLS]; GRID_ROWS],
}

impl GridImage {
    pub fn blank() -> Self {
        Self {
            cells: [[false; GRID_COLS]; GRID_ROWS],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    pub fn set(&mut self, row: usize, col: usize, black: bool) {
        self.cells[row][col] = black;
    }

    pub fn black_count(&self) -> usize {
        self.cells.iter().flatten().filter(|&&c| c).count()
    }

    /// Cells that differ from `other`.
    pub fn mismatches(&self, other: &GridImage) -> usize {
        self.cells
            .iter()
            .flatten()
            .zip(other.cells.iter().flatten())
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GridImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.cells {
            for &c in row {
                f.write_str(if c { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

impl FromStr for GridImage {
    type Err = QbmError;

    fn from_str(text: &str) -> Result<Self> {
        load_grid(text)
    }
}

/// Parses 8 non-empty lines of 20 `0`/`1` characters. Whitespace inside and
/// around lines is ignored.
pub fn load_grid(text: &str) -> Result<GridImage> {
    let rows: Vec<String> = text
        .lines()
        .map(|l| l.chars().filter(|c| !c.is_whitespace()).collect::<String>())
        .filter(|l| !l.is_empty())
        .collect();
    if rows.len() != GRID_ROWS {
        return Err(QbmError::Grid(format!("expected {GRID_ROWS} rows, found {}", rows.len())));
    }
    let mut img = GridImage::blank();
    for (r, line) in rows.iter().enumerate() {
        if line.chars().count() != GRID_COLS {
            return Err(QbmError::Grid(format!(
                "row {} has {} cells, expected {GRID_COLS}",
                r + 1,
                line.chars().count()
            )));
        }
        for (c, ch) in line.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => img.cells[r][c] = true,
                other => {
                    return Err(QbmError::Grid(format!(
                        "illegal character {other:?} at row {}, column {}",
                        r + 1,
                        c + 1
                    )))
                }
            }
        }
    }
    Ok(img)
}

/// The bundled "qubit" word grid.
pub fn reference_grid() -> GridImage {
    load_grid(include_str!("../assets/qubit.txt")).expect("bundled grid is well-formed")
}

/// One 2×2 block with the origin of its top-left cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    /// Cells in (top-left, top-right, bottom-left, bottom-right) order,
    /// which are qubits 1–4.
    pub cells: [bool; 4],
}

impl Block {
    /// Four-character bitstring of the block, qubit 1 first.
    pub fn bitstring(&self) -> String {
        self.cells.iter().map(|&c| if c { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(row: usize, col: usize, bits: &str) -> Result<Self> {
        let idx = parse_bitstring(bits, 4)?;
        let mut cells = [false; 4];
        for (k, cell) in cells.iter_mut().enumerate() {
            *cell = (idx >> (3 - k)) & 1 == 1;
        }
        Ok(Self { row, col, cells })
    }
}

/// 40 blocks in left-to-right, then top-to-bottom scan order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    pub blocks: Vec<Block>,
}

pub fn decompose(img: &GridImage) -> BlockPlan {
    let mut blocks = Vec::with_capacity(BLOCK_COUNT);
    for row in (0..GRID_ROWS).step_by(2) {
        for col in (0..GRID_COLS).step_by(2) {
            let cells = [
                img.get(row, col),
                img.get(row, col + 1),
                img.get(row + 1, col),
                img.get(row + 1, col + 1),
            ];
            blocks.push(Block { row, col, cells });
        }
    }
    BlockPlan { blocks }
}

pub fn block_target(block: &Block) -> TargetDistribution {
    one_point(&block.bitstring(), 4).expect("block bitstrings are 4 bits")
}

/// Rebuilds the grid from 40 per-block bitstrings in scan order.
pub fn assemble<S: AsRef<str>>(bitstrings: &[S]) -> Result<GridImage> {
    if bitstrings.len() != BLOCK_COUNT {
        return Err(QbmError::BlockCount {
            expected: BLOCK_COUNT,
            got: bitstrings.len(),
        });
    }
    let mut img = GridImage::blank();
    let origins = (0..GRID_ROWS)
        .step_by(2)
        .flat_map(|r| (0..GRID_COLS).step_by(2).map(move |c| (r, c)));
    for ((row, col), bits) in origins.zip(bitstrings) {
        let b = Block::from_bitstring(row, col, bits.as_ref())?;
        img.set(row, col, b.cells[0]);
        img.set(row, col + 1, b.cells[1]);
        img.set(row + 1, col, b.cells[2]);
        img.set(row + 1, col + 1, b.cells[3]);
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference one-hot vectors, index 15 printed leftmost.
    const TABLE: [(&str, &str); 16] = [
        ("0000", "0000000000000001"),
        ("0001", "0000000000000010"),
        ("0010", "0000000000000100"),
        ("0011", "0000000000001000"),
        ("0100", "0000000000010000"),
        ("0101", "0000000000100000"),
        ("0110", "0000000001000000"),
        ("0111", "0000000010000000"),
        ("1000", "0000000100000000"),
        ("1001", "0000001000000000"),
        ("1010", "0000010000000000"),
        ("1011", "0000100000000000"),
        ("1100", "0001000000000000"),
        ("1101", "0010000000000000"),
        ("1110", "0100000000000000"),
        ("1111", "1000000000000000"),
    ];

    #[test]
    fn onehot_matches_table() {
        for (bits, printed) in TABLE {
            assert_eq!(onehot_string(bits).unwrap(), printed);
            let v: Vec<u8> = printed.bytes().map(|b| b - b'0').collect();
            assert_eq!(onehot_decode(&v).unwrap(), bits);
        }
        assert!(onehot_encode("100").is_err());
        assert!(onehot_encode("10x1").is_err());
        assert!(onehot_decode(&[0; 16]).is_err());
    }

    #[test]
    fn one_point_agrees_with_printed_order() {
        for (bits, printed) in TABLE {
            let d = one_point(bits, 4).unwrap();
            assert_eq!(d.probs().iter().sum::<f64>(), 1.0);
            // Printed position k holds basis index 15 − k.
            let reversed: String = d.probs().iter().rev().map(|&p| if p == 1.0 { '1' } else { '0' }).collect();
            assert_eq!(reversed, printed);
        }
        let d = one_point("0000", 4).unwrap();
        assert_eq!(d.probs()[0], 1.0);
        assert!(one_point("001", 4).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(TargetDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(TargetDistribution::new(vec![0.5, 0.25, 0.25]).is_err());
        assert!(TargetDistribution::new(vec![1.5, -0.5]).is_err());
        assert_eq!(TargetDistribution::uniform(4).n_qubits(), 4);
    }

    #[test]
    fn grid_parsing() {
        let zeros = "00000000000000000000\n".repeat(8);
        let img = load_grid(&zeros).unwrap();
        assert_eq!(img, GridImage::blank());
        assert_eq!(img.render(), zeros);

        let seven = "00000000000000000000\n".repeat(7);
        assert!(matches!(load_grid(&seven), Err(QbmError::Grid(_))));
        let wide = "000000000000000000000\n".repeat(8);
        assert!(load_grid(&wide).is_err());
        let bad = zeros.replacen('0', "2", 1);
        assert!(load_grid(&bad).is_err());
        let spaced = "0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1\n".repeat(8);
        assert_eq!(load_grid(&spaced).unwrap().black_count(), 8);
    }

    #[test]
    fn reference_grid_cell_count() {
        let img = reference_grid();
        // Counted once from assets/qubit.txt.
        assert_eq!(img.black_count(), 45);
        assert_eq!(load_grid(&img.render()).unwrap(), img);
    }

    #[test]
    fn block_order_and_round_trip() {
        let img = reference_grid();
        let plan = decompose(&img);
        assert_eq!(plan.blocks.len(), 40);
        assert_eq!((plan.blocks[0].row, plan.blocks[0].col), (0, 0));
        assert_eq!((plan.blocks[1].row, plan.blocks[1].col), (0, 2));
        assert_eq!((plan.blocks[10].row, plan.blocks[10].col), (2, 0));
        let modal: Vec<String> = plan
            .blocks
            .iter()
            .map(|b| format_bitstring(block_target(b).argmax(), 4))
            .collect();
        assert_eq!(assemble(&modal).unwrap(), img);
        assert!(matches!(
            assemble(&modal[..39]),
            Err(QbmError::BlockCount { expected: 40, got: 39 })
        ));
    }

    #[test]
    fn block_cell_order_is_row_major() {
        let mut img = GridImage::blank();
        img.set(0, 1, true); // top-right of block 0
        img.set(1, 0, true); // bottom-left of block 0
        let plan = decompose(&img);
        assert_eq!(plan.blocks[0].bitstring(), "0110");
        assert_eq!(block_target(&plan.blocks[0]).argmax(), 0b0110);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn decompose_assemble_bijection(bits in prop::collection::vec(any::<bool>(), 160)) {
                let mut img = GridImage::blank();
                for (k, &b) in bits.iter().enumerate() {
                    img.set(k / GRID_COLS, k % GRID_COLS, b);
                }
                let strings: Vec<String> = decompose(&img).blocks.iter().map(Block::bitstring).collect();
                prop_assert_eq!(assemble(&strings).unwrap(), img);
            }
        }
    }
}
