//! Checkpoints: a JSON manifest plus one flat little-endian tensor dump.
//!
//! `manifest.json` names every tensor with its shape and element offset into
//! `tensors.bin`; the dump is the tensors concatenated in manifest order
//! with no padding. Model tensors are named `model.<tensor>`, actor tensors
//! `actor.global.<tensor>` and `actor.local.<i>.<tensor>`. The manifest also
//! records the element dtype and byte order, so a reader never has to guess.

use super::{ModelConfig, Parameters, ToyLanguageModel};
use crate::actors::ActorNetwork;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATA_FILE: &str = "tensors.bin";
const FORMAT: &str = "hbo-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    /// Offset into the dump, in elements.
    offset: usize,
    /// Element count (product of shape).
    len: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    dtype: String,
    byte_order: String,
    data_file: String,
    model_config: ModelConfig,
    has_global_actor: bool,
    local_actor_count: usize,
    tensors: Vec<TensorEntry>,
}

/// Everything a checkpoint restores.
#[derive(Debug)]
pub struct CheckpointContents<S> {
    pub model: ToyLanguageModel<S>,
    pub global_actor: Option<ActorNetwork<S>>,
    pub local_actors: Vec<ActorNetwork<S>>,
}

struct DumpBuilder<S> {
    entries: Vec<TensorEntry>,
    data: Vec<u8>,
    offset: usize,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar> DumpBuilder<S> {
    fn new() -> Self {
        DumpBuilder {
            entries: Vec::new(),
            data: Vec::new(),
            offset: 0,
            _marker: std::marker::PhantomData,
        }
    }

    fn push(&mut self, name: String, shape: Vec<usize>, values: &[S]) {
        debug_assert_eq!(shape.iter().product::<usize>(), values.len());
        for &v in values {
            v.write_le(&mut self.data);
        }
        self.entries.push(TensorEntry {
            name,
            shape,
            offset: self.offset,
            len: values.len(),
        });
        self.offset += values.len();
    }

    fn push_actor(&mut self, prefix: &str, actor: &ActorNetwork<S>) {
        let (units, h) = (actor.unit_count(), actor.hidden_dim());
        let shapes: [Vec<usize>; 4] =
            [vec![units, h], vec![h], vec![h], vec![units]];
        for ((name, values), shape) in actor.tensors().into_iter().zip(shapes) {
            self.push(format!("{prefix}.{name}"), shape, values);
        }
    }
}

/// Writes `manifest.json` and `tensors.bin` into `dir` (created if absent).
pub fn save_checkpoint<S: Scalar>(
    dir: &Path,
    model: &ToyLanguageModel<S>,
    global_actor: Option<&ActorNetwork<S>>,
    local_actors: &[ActorNetwork<S>],
) -> Result<()> {
    let cfg = model.config();
    let mut dump = DumpBuilder::<S>::new();
    let model_shapes: [Vec<usize>; 5] = [
        vec![cfg.embed_rows(), cfg.embed_dim],
        vec![cfg.input_dim(), cfg.hidden_dim],
        vec![cfg.hidden_dim],
        vec![cfg.hidden_dim, cfg.vocab_size],
        vec![cfg.vocab_size],
    ];
    for ((name, values), shape) in model.params().tensors().into_iter().zip(model_shapes) {
        dump.push(format!("model.{name}"), shape, values);
    }
    if let Some(actor) = global_actor {
        dump.push_actor("actor.global", actor);
    }
    for (i, actor) in local_actors.iter().enumerate() {
        dump.push_actor(&format!("actor.local.{i}"), actor);
    }

    let manifest = Manifest {
        format: FORMAT.into(),
        version: VERSION,
        dtype: S::DTYPE.into(),
        byte_order: "little".into(),
        data_file: DATA_FILE.into(),
        model_config: cfg.clone(),
        has_global_actor: global_actor.is_some(),
        local_actor_count: local_actors.len(),
        tensors: dump.entries,
    };
    fs::create_dir_all(dir)?;
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Contract(format!("manifest serialization: {e}")))?;
    fs::write(dir.join(MANIFEST_FILE), manifest_json + "\n")?;
    fs::write(dir.join(DATA_FILE), &dump.data)?;
    Ok(())
}

struct DumpReader<S> {
    entries: Vec<TensorEntry>,
    values: Vec<S>,
}

impl<S: Scalar> DumpReader<S> {
    fn take(&mut self, name: &str) -> Result<Vec<S>> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::Parse(format!("checkpoint lacks tensor {name}")))?;
        let end = entry.offset + entry.len;
        if end > self.values.len() {
            return Err(Error::Parse(format!(
                "tensor {name} extends past the dump ({end} > {})",
                self.values.len()
            )));
        }
        if entry.shape.iter().product::<usize>() != entry.len {
            return Err(Error::Parse(format!(
                "tensor {name}: shape {:?} does not match len {}",
                entry.shape, entry.len
            )));
        }
        Ok(self.values[entry.offset..end].to_vec())
    }

    fn take_actor(&mut self, prefix: &str) -> Result<ActorNetwork<S>> {
        let b1 = self.take(&format!("{prefix}.b1"))?;
        let hidden = b1.len();
        ActorNetwork::from_parts(
            hidden,
            self.take(&format!("{prefix}.w1"))?,
            b1,
            self.take(&format!("{prefix}.w2"))?,
            self.take(&format!("{prefix}.b_out"))?,
        )
    }
}

/// Restores a checkpoint written by [`save_checkpoint`] with the same scalar
/// type.
pub fn load_checkpoint<S: Scalar>(dir: &Path) -> Result<CheckpointContents<S>> {
    let manifest_text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text)
        .map_err(|e| Error::Parse(format!("checkpoint manifest: {e}")))?;
    if manifest.format != FORMAT {
        return Err(Error::Parse(format!(
            "not a checkpoint manifest (format {})",
            manifest.format
        )));
    }
    if manifest.version != VERSION {
        return Err(Error::Parse(format!(
            "unsupported checkpoint version {}",
            manifest.version
        )));
    }
    if manifest.dtype != S::DTYPE {
        return Err(Error::Parse(format!(
            "checkpoint dtype {} does not match requested {}",
            manifest.dtype,
            S::DTYPE
        )));
    }
    if manifest.byte_order != "little" {
        return Err(Error::Parse(format!(
            "unsupported byte order {}",
            manifest.byte_order
        )));
    }
    let bytes = fs::read(dir.join(&manifest.data_file))?;
    let width = std::mem::size_of::<S>();
    if bytes.len() % width != 0 {
        return Err(Error::Parse(format!(
            "tensor dump length {} is not a multiple of element width {width}",
            bytes.len()
        )));
    }
    let total: usize = manifest.tensors.iter().map(|t| t.len).sum();
    if bytes.len() / width != total {
        return Err(Error::Parse(format!(
            "tensor dump holds {} elements, manifest expects {total}",
            bytes.len() / width
        )));
    }
    let values: Vec<S> = bytes.chunks_exact(width).map(S::read_le).collect();
    let mut reader = DumpReader {
        entries: manifest.tensors,
        values,
    };

    let params = Parameters {
        embed: reader.take("model.embed")?,
        w1: reader.take("model.w1")?,
        b1: reader.take("model.b1")?,
        w2: reader.take("model.w2")?,
        b2: reader.take("model.b2")?,
    };
    let model = ToyLanguageModel::from_parts(manifest.model_config.clone(), params)?;
    let global_actor = if manifest.has_global_actor {
        Some(reader.take_actor("actor.global")?)
    } else {
        None
    };
    let local_actors = (0..manifest.local_actor_count)
        .map(|i| reader.take_actor(&format!("actor.local.{i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckpointContents {
        model,
        global_actor,
        local_actors,
    })
}
