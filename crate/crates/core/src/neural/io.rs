//! Binary model files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        8 bytes  "MSWPMODL"
//! version      u32      FORMAT_VERSION
//! kind         u32      1 = network, 2 = blend-weight coefficients
//!
//! kind 1:
//!   input width        u32
//!   layer count        u32
//!   per layer          u32 neurons, u8 activation (0 relu, 1 tanh, 2 sigmoid, 3 linear)
//!   loss               u8 (0 cross-entropy, 1 squared error)
//!   optimizer          u8 (0 adam, 1 rmsprop)
//!   learning rate      f64
//!   update count       u64
//!   input shift        f64 × input width
//!   input scale        f64 × input width
//!   parameters         f64 × parameter count (per layer: weights row-major, then biases)
//!
//! kind 2:
//!   coefficient count  u32 (4)
//!   per coefficient    u16 name length, UTF-8 name, f64 value
//! ```

use std::fs;
use std::path::Path;

use super::{Activation, LayerSpec, Loss, Mlp, NeuralError, OptimizerKind, TrainingMeta};
use crate::heuristics::AlphaModel;

pub const MAGIC: &[u8; 8] = b"MSWPMODL";
pub const FORMAT_VERSION: u32 = 1;

const KIND_MLP: u32 = 1;
const KIND_ALPHA: u32 = 2;

fn header(kind: u32) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&kind.to_le_bytes());
    out
}

pub fn write_model(model: &Mlp) -> Vec<u8> {
    let mut out = header(KIND_MLP);
    let specs = model.layer_specs();
    out.extend_from_slice(&(model.input_width() as u32).to_le_bytes());
    out.extend_from_slice(&(specs.len() as u32).to_le_bytes());
    for s in &specs {
        out.extend_from_slice(&(s.neurons as u32).to_le_bytes());
        out.push(s.activation.code());
    }
    out.push(model.meta.loss.code());
    out.push(model.meta.optimizer.code());
    out.extend_from_slice(&model.meta.learning_rate.to_le_bytes());
    out.extend_from_slice(&model.meta.updates.to_le_bytes());
    let (shift, scale) = model.standardization();
    for v in shift.iter().chain(scale).chain(model.params()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_alpha(model: &AlphaModel) -> Vec<u8> {
    let mut out = header(KIND_ALPHA);
    out.extend_from_slice(&(model.theta.len() as u32).to_le_bytes());
    for (name, value) in AlphaModel::COEFFICIENT_NAMES.iter().zip(model.theta) {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&value.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], NeuralError> {
        if self.bytes.len() - self.pos < n {
            return Err(self.error(format!("truncated while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn error(&self, message: String) -> NeuralError {
        NeuralError::Format { offset: self.pos, message }
    }

    fn u8(&mut self, what: &str) -> Result<u8, NeuralError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16, NeuralError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32, NeuralError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, NeuralError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64, NeuralError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>, NeuralError> {
        (0..n).map(|_| self.f64(what)).collect()
    }

    fn header(&mut self, expected_kind: u32) -> Result<(), NeuralError> {
        if self.take(8, "magic")? != MAGIC {
            self.pos = 0;
            return Err(self.error("bad magic bytes".into()));
        }
        let version = self.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(NeuralError::UnsupportedVersion(version));
        }
        let at = self.pos;
        let kind = self.u32("kind")?;
        if kind != expected_kind {
            return Err(NeuralError::Format { offset: at, message: format!("expected kind {expected_kind}, found {kind}") });
        }
        Ok(())
    }

    fn finish(&self) -> Result<(), NeuralError> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(self.error(format!("{} trailing bytes", self.bytes.len() - self.pos)))
        }
    }
}

pub fn read_model(bytes: &[u8]) -> Result<Mlp, NeuralError> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(KIND_MLP)?;
    let input_width = r.u32("input width")? as usize;
    let layer_count = r.u32("layer count")? as usize;
    if input_width == 0 || layer_count == 0 || layer_count > 64 {
        return Err(r.error(format!("implausible shape: width {input_width}, {layer_count} layers")));
    }
    let mut specs = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let neurons = r.u32("layer width")? as usize;
        let at = r.pos;
        let code = r.u8("activation")?;
        let activation = Activation::from_code(code)
            .ok_or_else(|| NeuralError::Format { offset: at, message: format!("unknown activation {code}") })?;
        if neurons == 0 {
            return Err(r.error("layer with no neurons".into()));
        }
        specs.push(LayerSpec::new(neurons, activation));
    }
    if specs.last().unwrap().neurons != 1 {
        return Err(r.error("last layer must have one neuron".into()));
    }
    let at = r.pos;
    let loss = Loss::from_code(r.u8("loss")?)
        .ok_or_else(|| NeuralError::Format { offset: at, message: "unknown loss".into() })?;
    let at = r.pos;
    let optimizer = OptimizerKind::from_code(r.u8("optimizer")?)
        .ok_or_else(|| NeuralError::Format { offset: at, message: "unknown optimizer".into() })?;
    let learning_rate = r.f64("learning rate")?;
    let updates = r.u64("update count")?;
    let mut model = Mlp::new(input_width, &specs, TrainingMeta { loss, optimizer, learning_rate, updates });
    let shift = r.f64s(input_width, "input shift")?;
    let scale = r.f64s(input_width, "input scale")?;
    model.set_standardization(shift, scale);
    let params = r.f64s(model.param_count(), "parameters")?;
    model.params_mut().copy_from_slice(&params);
    r.finish()?;
    Ok(model)
}

pub fn read_alpha(bytes: &[u8]) -> Result<AlphaModel, NeuralError> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(KIND_ALPHA)?;
    let count = r.u32("coefficient count")? as usize;
    if count != 4 {
        return Err(r.error(format!("expected 4 coefficients, found {count}")));
    }
    let mut theta = [0.0; 4];
    for (k, expected) in AlphaModel::COEFFICIENT_NAMES.iter().enumerate() {
        let len = r.u16("name length")? as usize;
        let at = r.pos;
        let name = r.take(len, "name")?;
        if name != expected.as_bytes() {
            return Err(NeuralError::Format {
                offset: at,
                message: format!("expected coefficient {expected:?}, found {:?}", String::from_utf8_lossy(name)),
            });
        }
        theta[k] = r.f64("coefficient")?;
    }
    r.finish()?;
    Ok(AlphaModel { theta })
}

pub fn save_model(model: &Mlp, path: impl AsRef<Path>) -> Result<(), NeuralError> {
    Ok(fs::write(path, write_model(model))?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Mlp, NeuralError> {
    read_model(&fs::read(path)?)
}

pub fn save_alpha(model: &AlphaModel, path: impl AsRef<Path>) -> Result<(), NeuralError> {
    Ok(fs::write(path, write_alpha(model))?)
}

pub fn load_alpha(path: impl AsRef<Path>) -> Result<AlphaModel, NeuralError> {
    read_alpha(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::neural::{build_classifier, build_qnet};
    use crate::rng::rng_from_seed;

    fn trained() -> Mlp {
        let mut rng = rng_from_seed(8);
        let mut m = build_classifier(5);
        m.init_weights(&mut rng);
        m.fit_standardization(&[vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.0, 1.0, 3.0, 2.0, 9.0]]);
        m.meta.updates = 17;
        m
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let m = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.model");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        let mut rng = rng_from_seed(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            assert_eq!(back.eval(&x).to_bits(), m.eval(&x).to_bits());
        }
    }

    #[test]
    fn qnet_round_trip() {
        let mut m = build_qnet(3);
        m.init_weights(&mut rng_from_seed(3));
        assert_eq!(read_model(&write_model(&m)).unwrap(), m);
    }

    #[test]
    fn truncated_file_reports_offset() {
        let bytes = write_model(&trained());
        let cut = &bytes[..bytes.len() - 3];
        match read_model(cut) {
            Err(NeuralError::Format { offset, .. }) => assert!(offset > 16 && offset <= cut.len()),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_model(&bytes[..5]), Err(NeuralError::Format { .. })));
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let mut bytes = write_model(&trained());
        bytes[8..12].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(read_model(&bytes), Err(NeuralError::UnsupportedVersion(7))));
    }

    #[test]
    fn bad_magic_and_wrong_kind() {
        let mut bytes = write_model(&trained());
        bytes[0] = b'X';
        assert!(matches!(read_model(&bytes), Err(NeuralError::Format { offset: 0, .. })));
        let alpha = write_alpha(&AlphaModel::constant(0.3));
        assert!(matches!(read_model(&alpha), Err(NeuralError::Format { offset: 12, .. })));
    }

    #[test]
    fn alpha_round_trip() {
        let a = AlphaModel { theta: [0.01, -0.02, 0.7, 0.25] };
        assert_eq!(read_alpha(&write_alpha(&a)).unwrap(), a);
        let mut bytes = write_alpha(&a);
        bytes.push(0);
        assert!(matches!(read_alpha(&bytes), Err(NeuralError::Format { .. })));
    }
}
