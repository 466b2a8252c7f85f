//! Versioned binary model container: a fixed header (version, architecture
//! tag, attention flag, dimensions), the vocabulary, and named parameter
//! tensors stored row-major as little-endian 64-bit reals. Round-trips are
//! bit-exact.

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Vocabulary;
use crate::error::{Error, Result};
use crate::layers::{Arch, Net, NetConfig};

const MAGIC: &[u8; 8] = b"SDMODEL\0";
const VERSION: u32 = 1;
/// Caps against absurd sizes from corrupt files.
const MAX_STRING: u64 = 1 << 20;
const MAX_ELEMS: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lstm,
    Blstm,
    Svm,
}

impl ModelKind {
    fn to_byte(self) -> u8 {
        match self {
            ModelKind::Lstm => 0,
            ModelKind::Blstm => 1,
            ModelKind::Svm => 2,
        }
    }

    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(ModelKind::Lstm),
            1 => Ok(ModelKind::Blstm),
            2 => Ok(ModelKind::Svm),
            other => Err(Error::Data(format!("unknown architecture tag {other}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lstm => "lstm",
            ModelKind::Blstm => "blstm",
            ModelKind::Svm => "svm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<u64>,
    pub data: Vec<f64>,
}

impl NamedTensor {
    pub fn new(name: impl Into<String>, shape: Vec<u64>, data: Vec<f64>) -> Self {
        let t = Self {
            name: name.into(),
            shape,
            data,
        };
        debug_assert_eq!(t.shape.iter().product::<u64>() as usize, t.data.len());
        t
    }
}

/// In-memory image of one model file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub kind: ModelKind,
    pub attention: bool,
    /// |V|, embed dim, hidden size, attention projection width.
    pub dims: [u64; 4],
    pub vocab: Vec<String>,
    pub tensors: Vec<NamedTensor>,
}

fn write_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    write_u64(w, s.len() as u64)?;
    w.write_all(s.as_bytes())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Data(format!("truncated model file: {e}")))
}

fn read_u8(r: &mut impl Read) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(r, &mut b)?;
    Ok(b[0])
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_str(r: &mut impl Read) -> Result<String> {
    let len = read_u64(r)?;
    if len > MAX_STRING {
        return Err(Error::Data(format!("string of {len} bytes in model file")));
    }
    let mut buf = vec![0u8; len as usize];
    read_exact(r, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Data(format!("invalid UTF-8 in model file: {e}")))
}

impl ModelFile {
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let io = |e: std::io::Error| Error::Data(format!("model write: {e}"));
        w.write_all(MAGIC).map_err(io)?;
        write_u32(w, VERSION).map_err(io)?;
        w.write_all(&[self.kind.to_byte(), u8::from(self.attention)])
            .map_err(io)?;
        for d in self.dims {
            write_u64(w, d).map_err(io)?;
        }
        write_u64(w, self.vocab.len() as u64).map_err(io)?;
        for token in &self.vocab {
            write_str(w, token).map_err(io)?;
        }
        write_u64(w, self.tensors.len() as u64).map_err(io)?;
        for t in &self.tensors {
            write_str(w, &t.name).map_err(io)?;
            write_u64(w, t.shape.len() as u64).map_err(io)?;
            for d in &t.shape {
                write_u64(w, *d).map_err(io)?;
            }
            for v in &t.data {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Data("not a model file (bad magic)".into()));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Data(format!(
                "model format version {version}, this build reads {VERSION}"
            )));
        }
        let kind = ModelKind::from_byte(read_u8(r)?)?;
        let attention = match read_u8(r)? {
            0 => false,
            1 => true,
            other => return Err(Error::Data(format!("bad attention flag {other}"))),
        };
        let mut dims = [0u64; 4];
        for d in &mut dims {
            *d = read_u64(r)?;
        }
        let vocab_len = read_u64(r)?;
        if vocab_len > MAX_ELEMS {
            return Err(Error::Data(format!("vocabulary of {vocab_len} entries")));
        }
        let mut vocab = Vec::with_capacity(vocab_len as usize);
        for _ in 0..vocab_len {
            vocab.push(read_str(r)?);
        }
        let tensor_count = read_u64(r)?;
        if tensor_count > 1024 {
            return Err(Error::Data(format!("{tensor_count} tensors in model file")));
        }
        let mut tensors = Vec::with_capacity(tensor_count as usize);
        for _ in 0..tensor_count {
            let name = read_str(r)?;
            let ndim = read_u64(r)?;
            if ndim > 8 {
                return Err(Error::Data(format!("tensor {name} has {ndim} dimensions")));
            }
            let mut shape = Vec::with_capacity(ndim as usize);
            for _ in 0..ndim {
                shape.push(read_u64(r)?);
            }
            let elems = shape.iter().product::<u64>();
            if elems > MAX_ELEMS {
                return Err(Error::Data(format!("tensor {name} has {elems} elements")));
            }
            let mut data = Vec::with_capacity(elems as usize);
            let mut buf = [0u8; 8];
            for _ in 0..elems {
                read_exact(r, &mut buf)?;
                data.push(f64::from_le_bytes(buf));
            }
            tensors.push(NamedTensor { name, shape, data });
        }
        Ok(Self {
            kind,
            attention,
            dims,
            vocab,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(&mut bytes.as_slice())
    }

    pub fn tensor(&self, name: &str) -> Result<&NamedTensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Data(format!("model file is missing tensor {name}")))
    }
}

fn net_tensor_shape(net: &Net, name: &str) -> Vec<u64> {
    let h = net.config.hidden as u64;
    let k = net.config.embed_dim as u64;
    let v = net.config.vocab_size as u64;
    let w = net.hidden_width() as u64;
    match name {
        "embedding" => vec![v, k],
        "fwd.w_ih" | "bwd.w_ih" => vec![4 * h, k],
        "fwd.w_hh" | "bwd.w_hh" => vec![4 * h, h],
        "fwd.bias" | "bwd.bias" => vec![4 * h],
        "att.w" => vec![w, w],
        "att.b" | "att.u" => vec![w],
        "head.w" => vec![2, w],
        "head.b" => vec![2],
        other => panic!("unknown parameter {other}"),
    }
}

/// Packs a trained classifier and its vocabulary into a container image.
pub fn net_to_model(net: &Net, vocab: &Vocabulary) -> ModelFile {
    let kind = match net.config.arch {
        Arch::Lstm => ModelKind::Lstm,
        Arch::Blstm => ModelKind::Blstm,
    };
    let proj = if net.config.attention {
        net.hidden_width() as u64
    } else {
        0
    };
    let tensors = net
        .param_names()
        .iter()
        .map(|name| NamedTensor::new(*name, net_tensor_shape(net, name), net.param(name).to_vec()))
        .collect();
    ModelFile {
        kind,
        attention: net.config.attention,
        dims: [
            net.config.vocab_size as u64,
            net.config.embed_dim as u64,
            net.config.hidden as u64,
            proj,
        ],
        vocab: vocab.tokens().to_vec(),
        tensors,
    }
}

/// Rebuilds the classifier and vocabulary from a container image. The
/// dropout rate is a training-time setting and is not stored; the loaded
/// network has it at 0.
pub fn net_from_model(file: &ModelFile) -> Result<(Net, Vocabulary)> {
    let arch = match file.kind {
        ModelKind::Lstm => Arch::Lstm,
        ModelKind::Blstm => Arch::Blstm,
        ModelKind::Svm => {
            return Err(Error::Data(
                "model file holds an svm baseline, not a sequence classifier".into(),
            ));
        }
    };
    let vocab = Vocabulary::from_tokens(file.vocab.clone())?;
    if vocab.len() as u64 != file.dims[0] {
        return Err(Error::Data(format!(
            "header says {} vocabulary entries, file carries {}",
            file.dims[0],
            vocab.len()
        )));
    }
    let config = NetConfig {
        vocab_size: file.dims[0] as usize,
        embed_dim: file.dims[1] as usize,
        hidden: file.dims[2] as usize,
        arch,
        attention: file.attention,
        dropout: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut net = Net::init(config, &mut rng)?;
    let names = net.param_names();
    if file.tensors.len() != names.len() {
        return Err(Error::Data(format!(
            "model file has {} tensors, architecture needs {}",
            file.tensors.len(),
            names.len()
        )));
    }
    for name in names {
        let tensor = file.tensor(name)?;
        let slot = net.param_mut(name);
        if tensor.data.len() != slot.len() {
            return Err(Error::Data(format!(
                "tensor {name} has {} values, architecture needs {}",
                tensor.data.len(),
                slot.len()
            )));
        }
        slot.copy_from_slice(&tensor.data);
    }
    Ok((net, vocab))
}
