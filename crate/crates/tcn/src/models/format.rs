//! Binary model files (`.tcnm`). Little-endian throughout:
//!
//! ```text
//! magic "TCNM" | u32 version (1)
//! u8 kind (0 encoder-decoder, 1 dilated) | u8 causal | u8 activation | u8 reserved
//! kind 0: u32 input_dim, num_classes, num_layers, filter_duration,
//!         then num_layers x u32 filter counts
//! kind 1: u32 input_dim, num_classes, num_blocks, layers_per_block, num_filters
//! u32 epochs_trained | u64 seed | u32 curve_len | curve_len x f32 losses
//! u32 tensor_count, then per tensor:
//!   u16 name_len | name bytes | u8 ndim | ndim x u32 dims | prod(dims) x f32
//! ```
//!
//! Tensors appear in the model's canonical parameter order and are verified
//! by name and shape on load. Parameters are kept f32-representable in
//! memory, so a save/load round trip is exact.

use super::model::{TcnModel, TrainMeta};
use super::{DilatedTcnSpec, EdTcnSpec, ModelSpec};
use crate::error::{Result, TcnError};
use crate::nn::Activation;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"TCNM";
const VERSION: u32 = 1;

fn activation_id(kind: Activation) -> u8 {
    match kind {
        Activation::Sigmoid => 0,
        Activation::Relu => 1,
        Activation::Tanh => 2,
        Activation::Gated => 3,
        Activation::NormRelu => 4,
    }
}

fn activation_from_id(id: u8) -> Result<Activation> {
    Ok(match id {
        0 => Activation::Sigmoid,
        1 => Activation::Relu,
        2 => Activation::Tanh,
        3 => Activation::Gated,
        4 => Activation::NormRelu,
        _ => return Err(TcnError::data(format!("unknown activation id {id}"))),
    })
}

pub fn write_model(model: &TcnModel, w: &mut dyn Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let (kind, causal, activation) = match &model.spec {
        ModelSpec::EdTcn(s) => (0u8, s.causal, s.activation),
        ModelSpec::Dilated(s) => (1u8, s.causal, s.activation),
    };
    w.write_all(&[kind, u8::from(causal), activation_id(activation), 0])?;
    match &model.spec {
        ModelSpec::EdTcn(s) => {
            for v in [s.input_dim, s.num_classes, s.num_layers, s.filter_duration] {
                w.write_all(&(v as u32).to_le_bytes())?;
            }
            for &f in &s.filters {
                w.write_all(&(f as u32).to_le_bytes())?;
            }
        }
        ModelSpec::Dilated(s) => {
            for v in [
                s.input_dim,
                s.num_classes,
                s.num_blocks,
                s.layers_per_block,
                s.num_filters,
            ] {
                w.write_all(&(v as u32).to_le_bytes())?;
            }
        }
    }

    w.write_all(&model.meta.epochs_trained.to_le_bytes())?;
    w.write_all(&model.meta.seed.to_le_bytes())?;
    w.write_all(&(model.meta.loss_curve.len() as u32).to_le_bytes())?;
    for &v in &model.meta.loss_curve {
        w.write_all(&v.to_le_bytes())?;
    }

    let summary = model.param_summary();
    w.write_all(&(summary.len() as u32).to_le_bytes())?;
    let mut failed = None;
    model.visit_params(&mut |name, shape, values| {
        if failed.is_some() {
            return;
        }
        let mut emit = || -> std::io::Result<()> {
            w.write_all(&(name.len() as u16).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&[shape.len() as u8])?;
            for &d in shape {
                w.write_all(&(d as u32).to_le_bytes())?;
            }
            for &v in values {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
            Ok(())
        };
        if let Err(e) = emit() {
            failed = Some(e);
        }
    });
    match failed {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn read_model(r: &mut dyn Read) -> Result<TcnModel> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TcnError::data("not a model file (bad magic)"));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(TcnError::data(format!(
            "unsupported model format version {version}"
        )));
    }
    let mut flags = [0u8; 4];
    r.read_exact(&mut flags)?;
    let causal = match flags[1] {
        0 => false,
        1 => true,
        v => return Err(TcnError::data(format!("bad causal flag {v}"))),
    };
    let activation = activation_from_id(flags[2])?;

    let spec = match flags[0] {
        0 => {
            let input_dim = read_u32(r)? as usize;
            let num_classes = read_u32(r)? as usize;
            let num_layers = read_u32(r)? as usize;
            let filter_duration = read_u32(r)? as usize;
            if num_layers > 64 {
                return Err(TcnError::data(format!(
                    "implausible layer count {num_layers}"
                )));
            }
            let mut filters = Vec::with_capacity(num_layers);
            for _ in 0..num_layers {
                filters.push(read_u32(r)? as usize);
            }
            let mut s = EdTcnSpec::new(input_dim, num_classes, num_layers, filter_duration);
            s.filters = filters;
            s.causal = causal;
            s.activation = activation;
            ModelSpec::EdTcn(s)
        }
        1 => {
            let input_dim = read_u32(r)? as usize;
            let num_classes = read_u32(r)? as usize;
            let num_blocks = read_u32(r)? as usize;
            let layers_per_block = read_u32(r)? as usize;
            let num_filters = read_u32(r)? as usize;
            let mut s = DilatedTcnSpec::new(input_dim, num_classes, num_blocks, layers_per_block);
            s.num_filters = num_filters;
            s.causal = causal;
            s.activation = activation;
            ModelSpec::Dilated(s)
        }
        v => return Err(TcnError::data(format!("unknown model kind {v}"))),
    };

    let epochs_trained = read_u32(r)?;
    let mut seed_bytes = [0u8; 8];
    r.read_exact(&mut seed_bytes)?;
    let seed = u64::from_le_bytes(seed_bytes);
    let curve_len = read_u32(r)? as usize;
    if curve_len > 1 << 24 {
        return Err(TcnError::data(format!(
            "implausible loss curve length {curve_len}"
        )));
    }
    let mut loss_curve = Vec::with_capacity(curve_len);
    for _ in 0..curve_len {
        loss_curve.push(f32::from_le_bytes(read_array(r)?));
    }

    let mut model = TcnModel::allocate_zeroed(spec)?;
    model.meta = TrainMeta {
        epochs_trained,
        seed,
        loss_curve,
    };

    let expected = model.param_summary();
    let count = read_u32(r)? as usize;
    if count != expected.len() {
        return Err(TcnError::data(format!(
            "model file holds {count} tensors, structure needs {}",
            expected.len()
        )));
    }
    let mut tensors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (want_name, want_shape) in &expected {
        let name_len = read_u16(r)? as usize;
        let mut name_bytes = vec![0u8; name_len];
        r.read_exact(&mut name_bytes)?;
        let name = String::from_utf8(name_bytes)
            .map_err(|_| TcnError::data("tensor name is not UTF-8"))?;
        if &name != want_name {
            return Err(TcnError::data(format!(
                "tensor order mismatch: found {name:?}, expected {want_name:?}"
            )));
        }
        let ndim = read_array::<1>(r)?[0] as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u32(r)? as usize);
        }
        if &shape != want_shape {
            return Err(TcnError::data(format!(
                "tensor {name} has shape {shape:?}, expected {want_shape:?}"
            )));
        }
        let len: usize = shape.iter().product();
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(f32::from_le_bytes(read_array(r)?) as f64);
        }
        tensors.push(values);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(TcnError::data("trailing bytes after model payload"));
    }

    let mut it = tensors.into_iter();
    model.visit_params_mut(&mut |_, _, values| {
        values.copy_from_slice(&it.next().expect("tensor count already checked"));
    });
    Ok(model)
}

pub fn save_model(model: &TcnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path)
        .map_err(|e| TcnError::data(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TcnModel> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| TcnError::data(format!("cannot open {}: {e}", path.display())))?;
    read_model(&mut BufReader::new(file)).map_err(|e| match e {
        TcnError::Data(msg) => TcnError::parse(path.display().to_string(), "model", msg),
        other => other,
    })
}

fn read_u32(r: &mut dyn Read) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u16(r: &mut dyn Read) -> Result<u16> {
    Ok(u16::from_le_bytes(read_array(r)?))
}

fn read_array<const N: usize>(r: &mut dyn Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
