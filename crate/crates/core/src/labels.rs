use crate::error::{Error, Result};

/// The ten command words, in class-index order.
pub const COMMANDS: [&str; 10] = [
    "yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go",
];
pub const UNKNOWN: &str = "unknown";
pub const BACKGROUND: &str = "background";
/// Directory holding the long background-noise recordings.
pub const NOISE_DIR: &str = "_background_noise_";

/// Fixed 12-class label space: commands `0..=9`, `unknown` = 10,
/// `background` = 11.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelSet;

impl LabelSet {
    pub const N_CLASSES: usize = 12;
    pub const UNKNOWN: usize = 10;
    pub const BACKGROUND: usize = 11;

    pub fn len(&self) -> usize {
        Self::N_CLASSES
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self) -> Vec<&'static str> {
        COMMANDS
            .iter()
            .copied()
            .chain([UNKNOWN, BACKGROUND])
            .collect()
    }

    pub fn name(&self, index: usize) -> Result<&'static str> {
        match index {
            0..=9 => Ok(COMMANDS[index]),
            Self::UNKNOWN => Ok(UNKNOWN),
            Self::BACKGROUND => Ok(BACKGROUND),
            _ => Err(Error::invalid(format!(
                "class index {index} out of range 0..12"
            ))),
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names().iter().position(|&n| n == name)
    }

    /// Class for a word directory: the command itself, or `unknown`.
    pub fn classify_word(&self, word: &str) -> usize {
        COMMANDS
            .iter()
            .position(|&c| c == word)
            .unwrap_or(Self::UNKNOWN)
    }

    pub fn is_command(&self, index: usize) -> bool {
        index < COMMANDS.len()
    }
}
