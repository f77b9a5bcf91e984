use serde::{Deserialize, Serialize};

use super::verify::Column;
use crate::error::{Error, Result};

/// Bob's inference about Alice's bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Guess {
    Zero,
    One,
    Abstain,
}

/// Columns `1..=N` mean 0, column `N+1` means 1, Φ abstains.
pub fn guess_rule(column: Column, n: usize) -> Guess {
    match column {
        Column::Candidate(l) if l < n => Guess::Zero,
        Column::Candidate(_) => Guess::One,
        Column::Phi => Guess::Abstain,
    }
}

/// One shared pair: the bit Alice encoded and Bob's guess. Failed clones
/// count as abstentions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessRecord {
    pub sent: u8,
    pub guess: Guess,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    /// Fraction of blocks decoded correctly; tied blocks count one half.
    pub accuracy: f64,
    pub blocks: usize,
    /// Blocks with no decisive majority, including all-abstain blocks.
    pub tied_blocks: usize,
    pub all_abstain_blocks: usize,
}

/// Majority vote over the non-abstaining guesses in each consecutive block of
/// `pairs_per_bit` records. A trailing partial block is ignored.
pub fn channel_accuracy(records: &[GuessRecord], pairs_per_bit: usize) -> Result<ChannelReport> {
    if pairs_per_bit == 0 {
        return Err(Error::Config("pairs per bit must be at least 1".into()));
    }
    let mut score = 0.0;
    let mut blocks = 0;
    let mut tied_blocks = 0;
    let mut all_abstain_blocks = 0;
    for block in records.chunks_exact(pairs_per_bit) {
        let sent = block[0].sent;
        if block.iter().any(|r| r.sent != sent) {
            return Err(Error::Config("block mixes different sent bits".into()));
        }
        let ones = block.iter().filter(|r| r.guess == Guess::One).count();
        let zeros = block.iter().filter(|r| r.guess == Guess::Zero).count();
        blocks += 1;
        if ones == zeros {
            tied_blocks += 1;
            if ones == 0 {
                all_abstain_blocks += 1;
            }
            score += 0.5;
        } else if u8::from(ones > zeros) == sent {
            score += 1.0;
        }
    }
    if blocks == 0 {
        return Err(Error::Config(format!(
            "{} records do not fill a block of {pairs_per_bit}",
            records.len()
        )));
    }
    Ok(ChannelReport {
        accuracy: score / blocks as f64,
        blocks,
        tied_blocks,
        all_abstain_blocks,
    })
}
