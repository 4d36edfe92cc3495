use serde::{Deserialize, Serialize};

/// Unknown blocks of the monolithic system, in global order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    FluidVelocity,
    SolidVelocity,
    Flux,
    FluidPressure,
    PorePressure,
}

impl Block {
    pub const ALL: [Block; 5] = [
        Block::FluidVelocity,
        Block::SolidVelocity,
        Block::Flux,
        Block::FluidPressure,
        Block::PorePressure,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Block::FluidVelocity => "v_f",
            Block::SolidVelocity => "v_s",
            Block::Flux => "q",
            Block::FluidPressure => "p_f",
            Block::PorePressure => "p_d",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    sizes: [usize; 5],
    offsets: [usize; 5],
}

impl BlockLayout {
    pub fn new(sizes: [usize; 5]) -> Self {
        let mut offsets = [0; 5];
        for b in 1..5 {
            offsets[b] = offsets[b - 1] + sizes[b - 1];
        }
        BlockLayout { sizes, offsets }
    }

    pub fn offset(&self, b: Block) -> usize {
        self.offsets[b.index()]
    }

    pub fn size(&self, b: Block) -> usize {
        self.sizes[b.index()]
    }

    pub fn range(&self, b: Block) -> std::ops::Range<usize> {
        self.offset(b)..self.offset(b) + self.size(b)
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Block and block-local index of a global index.
    pub fn locate(&self, global: usize) -> Option<(Block, usize)> {
        Block::ALL
            .into_iter()
            .find(|&b| self.range(b).contains(&global))
            .map(|b| (b, global - self.offset(b)))
    }
}
