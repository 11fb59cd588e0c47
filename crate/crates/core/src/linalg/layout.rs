use crate::error::{Error, Result};

/// Global numbering of a slab system: fields in order, within a field the
/// temporal DoF is the outer index and the spatial DoF the inner one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub field: usize,
    pub time_dofs: usize,
    pub space_dofs: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.time_dofs * self.space_dofs
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl BlockLayout {
    /// `blocks[i]` describes field `i`.
    pub fn new(sizes: &[(usize, usize)]) -> Self {
        let blocks: Vec<Block> = sizes
            .iter()
            .enumerate()
            .map(|(field, &(time_dofs, space_dofs))| Block { field, time_dofs, space_dofs })
            .collect();
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b.len());
        }
        Self { blocks, offsets }
    }

    pub fn n_fields(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, field: usize) -> Block {
        self.blocks[field]
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn field_offset(&self, field: usize) -> usize {
        self.offsets[field]
    }

    pub fn field_range(&self, field: usize) -> std::ops::Range<usize> {
        self.offsets[field]..self.offsets[field + 1]
    }

    #[inline]
    pub fn index(&self, field: usize, time_dof: usize, space_dof: usize) -> usize {
        let b = &self.blocks[field];
        debug_assert!(time_dof < b.time_dofs && space_dof < b.space_dofs);
        self.offsets[field] + time_dof * b.space_dofs + space_dof
    }

    pub fn checked_index(&self, field: usize, time_dof: usize, space_dof: usize) -> Result<usize> {
        let b = self
            .blocks
            .get(field)
            .ok_or_else(|| Error::DimensionMismatch(format!("unknown field {field}")))?;
        if time_dof >= b.time_dofs || space_dof >= b.space_dofs {
            return Err(Error::DimensionMismatch(format!(
                "({time_dof}, {space_dof}) outside field {field} block {}x{}",
                b.time_dofs, b.space_dofs
            )));
        }
        Ok(self.index(field, time_dof, space_dof))
    }

    /// Inverse of [`BlockLayout::index`].
    pub fn locate(&self, global: usize) -> Option<(usize, usize, usize)> {
        if global >= self.total() {
            return None;
        }
        let field = self.offsets.partition_point(|&o| o <= global) - 1;
        let local = global - self.offsets[field];
        let s = self.blocks[field].space_dofs;
        Some((field, local / s, local % s))
    }
}
