//! Character-offset helpers. Offsets everywhere in this crate count Unicode
//! scalar values, matching the BRAT standoff convention.

/// Byte positions of every char boundary in a string, so char-offset slicing
/// is O(1) after construction.
#[derive(Debug, Clone)]
pub struct CharIndex {
    bounds: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut bounds: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bounds.push(text.len());
        CharIndex { bounds }
    }

    /// Number of chars in the indexed text.
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice<'a>(&self, text: &'a str, start: usize, end: usize) -> Option<&'a str> {
        if start > end || end > self.len() {
            return None;
        }
        Some(&text[self.bounds[start]..self.bounds[end]])
    }
}

/// Slice `text` by char offsets without building an index.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    CharIndex::new(text).slice(text, start, end)
}
