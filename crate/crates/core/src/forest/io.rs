use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{ForestError, ForestModel, ForestParams, Node, Tree, Variant};
use crate::Scalar;

const MAGIC: &[u8; 4] = b"CKRF";
const VERSION: u16 = 1;
const TAG_LEAF: u8 = 0;
const TAG_SPLIT: u8 = 1;

fn write_scalar<T: Scalar, W: Write>(w: &mut W, v: T) -> std::io::Result<()> {
    if T::WIDTH == 4 {
        w.write_f32::<LE>(v.to_f64_lossy() as f32)
    } else {
        w.write_f64::<LE>(v.to_f64_lossy())
    }
}

fn fmt(msg: impl Into<String>) -> ForestError {
    ForestError::Format(msg.into())
}

impl<T: Scalar> ForestModel<T> {
    /// Little-endian binary model; see FORMATS.md.
    pub fn write<W: Write>(&self, mut w: W) -> Result<(), ForestError> {
        let p = &self.params;
        w.write_all(MAGIC)?;
        w.write_u16::<LE>(VERSION)?;
        w.write_u8(T::WIDTH as u8)?;
        w.write_u8(self.variant.code())?;
        w.write_u32::<LE>(self.n_features as u32)?;
        w.write_u32::<LE>(p.n_trees as u32)?;
        w.write_u32::<LE>(p.max_features as u32)?;
        w.write_u32::<LE>(p.min_samples_split as u32)?;
        w.write_u64::<LE>(p.seed)?;
        w.write_u8(p.bootstrap as u8)?;
        w.write_u32::<LE>(p.max_thresholds.min(u32::MAX as usize) as u32)?;
        w.write_u32::<LE>(self.trees.len() as u32)?;
        for t in &self.trees {
            w.write_u32::<LE>(t.nodes.len() as u32)?;
            for n in &t.nodes {
                match *n {
                    Node::Leaf { pos, neg } => {
                        w.write_u8(TAG_LEAF)?;
                        w.write_u32::<LE>(pos)?;
                        w.write_u32::<LE>(neg)?;
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        w.write_u8(TAG_SPLIT)?;
                        w.write_u32::<LE>(feature)?;
                        write_scalar(&mut w, threshold)?;
                        w.write_u32::<LE>(left)?;
                        w.write_u32::<LE>(right)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Reads a model of either scalar width, converting thresholds to `T`.
    pub fn read<R: Read>(mut r: R) -> Result<Self, ForestError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(fmt("not a forest model"));
        }
        let version = r.read_u16::<LE>()?;
        if version != VERSION {
            return Err(fmt(format!("unsupported version {version}")));
        }
        let width = r.read_u8()?;
        if width != 4 && width != 8 {
            return Err(fmt(format!("bad scalar width {width}")));
        }
        let variant = Variant::from_code(r.read_u8()?).ok_or_else(|| fmt("unknown variant"))?;
        let n_features = r.read_u32::<LE>()? as usize;
        let params = ForestParams {
            n_trees: r.read_u32::<LE>()? as usize,
            max_features: r.read_u32::<LE>()? as usize,
            min_samples_split: r.read_u32::<LE>()? as usize,
            seed: r.read_u64::<LE>()?,
            bootstrap: r.read_u8()? != 0,
            max_thresholds: r.read_u32::<LE>()? as usize,
        };
        let n_trees = r.read_u32::<LE>()? as usize;
        if n_trees == 0 {
            return Err(fmt("model has no trees"));
        }
        let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
        for _ in 0..n_trees {
            let n_nodes = r.read_u32::<LE>()? as usize;
            if n_nodes == 0 {
                return Err(fmt("empty tree"));
            }
            let mut nodes = Vec::with_capacity(n_nodes.min(1 << 20));
            for _ in 0..n_nodes {
                let node = match r.read_u8()? {
                    TAG_LEAF => {
                        let pos = r.read_u32::<LE>()?;
                        let neg = r.read_u32::<LE>()?;
                        if pos + neg == 0 {
                            return Err(fmt("empty leaf"));
                        }
                        Node::Leaf { pos, neg }
                    }
                    TAG_SPLIT => {
                        let feature = r.read_u32::<LE>()?;
                        let threshold = if width == 4 {
                            T::of(r.read_f32::<LE>()? as f64)
                        } else {
                            T::of(r.read_f64::<LE>()?)
                        };
                        let left = r.read_u32::<LE>()?;
                        let right = r.read_u32::<LE>()?;
                        if feature as usize >= n_features || !threshold.is_finite() {
                            return Err(fmt("bad split node"));
                        }
                        if left as usize >= n_nodes || right as usize >= n_nodes {
                            return Err(fmt("child index out of range"));
                        }
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        }
                    }
                    t => return Err(fmt(format!("unknown node tag {t}"))),
                };
                nodes.push(node);
            }
            // children must point forward so that walks terminate
            for (i, n) in nodes.iter().enumerate() {
                if let Node::Split { left, right, .. } = n {
                    if *left as usize <= i || *right as usize <= i {
                        return Err(fmt("child index does not point forward"));
                    }
                }
            }
            trees.push(Tree { nodes });
        }
        Ok(ForestModel {
            params,
            variant,
            n_features,
            trees,
        })
    }
}
