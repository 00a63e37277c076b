//! Generic sources and sinks, plus the reserved RF slots.

use num_complex::Complex64;

use super::registry::{check_param_names, element_kind_param};
use super::{
    Block, BlockError, BlockRole, ElementKind, KindInfo, Params, Payload, PortSpec, Registry,
    WorkContext,
};

pub fn register(r: &mut Registry) {
    r.register(KindInfo {
        name: "vector_source",
        role: BlockRole::Source,
        inputs: vec![],
        outputs: vec![PortSpec::new("out", ElementKind::Byte)],
        factory: VectorSource::create,
        params: "value (int, default 0), len (default 1), kind (bit|soft|complex|byte, default byte)",
        generic: true,
    });
    r.register(KindInfo {
        name: "vector_sink",
        role: BlockRole::Sink,
        inputs: vec![PortSpec::new("in", ElementKind::Byte)],
        outputs: vec![],
        factory: VectorSink::create,
        params: "kind (default byte)",
        generic: true,
    });
    r.register(KindInfo {
        name: "null_sink",
        role: BlockRole::Sink,
        inputs: vec![PortSpec::new("in", ElementKind::Byte)],
        outputs: vec![],
        factory: NullSink::create,
        params: "kind (default byte)",
        generic: true,
    });
    r.register(KindInfo {
        name: "rf_source",
        role: BlockRole::Source,
        inputs: vec![],
        outputs: vec![PortSpec::new("out", ElementKind::Complex)],
        factory: |_| Err(BlockError::NotImplemented("rf_source".into())),
        params: "reserved for RF hardware",
        generic: false,
    });
    r.register(KindInfo {
        name: "rf_sink",
        role: BlockRole::Sink,
        inputs: vec![PortSpec::new("in", ElementKind::Complex)],
        outputs: vec![],
        factory: |_| Err(BlockError::NotImplemented("rf_sink".into())),
        params: "reserved for RF hardware",
        generic: false,
    });
}

/// Emits the same vector every iteration.
pub struct VectorSource {
    item: Payload,
}

impl VectorSource {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["value", "len", "kind"])?;
        let kind = element_kind_param(p)?;
        let len = p.int_in("len", Some(1), 0..=1 << 20)? as usize;
        let value = p.float("value")?.unwrap_or(0.0);
        let item = match kind {
            ElementKind::Bit | ElementKind::Byte => {
                let v = p.int_in("value", Some(0), 0..=255)? as u8;
                if kind == ElementKind::Bit && v > 1 {
                    return Err(BlockError::Param(format!("value = {v} is not a bit")));
                }
                if kind == ElementKind::Bit {
                    Payload::Bits(vec![v; len])
                } else {
                    Payload::Bytes(vec![v; len])
                }
            }
            ElementKind::Soft => Payload::Soft(vec![value; len]),
            ElementKind::Complex => Payload::Complex(vec![Complex64::new(value, 0.0); len]),
        };
        Ok(Box::new(VectorSource { item }))
    }
}

impl Block for VectorSource {
    fn work(&mut self, _: &WorkContext<'_>, _: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        Ok(vec![self.item.clone()])
    }

    fn max_output_items(&self, _port: usize) -> Option<usize> {
        Some(self.item.len())
    }
}

/// Keeps every payload it receives until collected.
#[derive(Default)]
pub struct VectorSink {
    held: Vec<Payload>,
}

impl VectorSink {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["kind"])?;
        element_kind_param(p)?;
        Ok(Box::<VectorSink>::default())
    }
}

impl Block for VectorSink {
    fn work(&mut self, _: &WorkContext<'_>, inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        if let Some(Some(p)) = inputs.into_iter().next() {
            self.held.push(p);
        }
        Ok(vec![])
    }

    fn take_collected(&mut self) -> Vec<Payload> {
        std::mem::take(&mut self.held)
    }
}

/// Discards its input.
pub struct NullSink;

impl NullSink {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["kind"])?;
        element_kind_param(p)?;
        Ok(Box::new(NullSink))
    }
}

impl Block for NullSink {
    fn work(&mut self, _: &WorkContext<'_>, _: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        Ok(vec![])
    }
}

/// First input payload of a block, checked for kind.
pub(crate) fn input(inputs: &mut [Option<Payload>], port: usize) -> Result<Payload, BlockError> {
    inputs
        .get_mut(port)
        .and_then(Option::take)
        .ok_or_else(|| BlockError::Input(format!("input {port} missing")))
}

pub(crate) fn bits_in(inputs: &mut [Option<Payload>], port: usize) -> Result<Vec<u8>, BlockError> {
    let p = input(inputs, port)?;
    let kind = p.kind();
    p.into_bits()
        .ok_or_else(|| BlockError::Input(format!("expected bits, got {kind}")))
}

pub(crate) fn soft_in(inputs: &mut [Option<Payload>], port: usize) -> Result<Vec<f64>, BlockError> {
    let p = input(inputs, port)?;
    let kind = p.kind();
    p.into_soft()
        .ok_or_else(|| BlockError::Input(format!("expected soft bits, got {kind}")))
}

pub(crate) fn complex_in(
    inputs: &mut [Option<Payload>],
    port: usize,
) -> Result<Vec<Complex64>, BlockError> {
    let p = input(inputs, port)?;
    let kind = p.kind();
    p.into_complex()
        .ok_or_else(|| BlockError::Input(format!("expected complex samples, got {kind}")))
}

/// Input length must be `expected`.
pub(crate) fn expect_len(what: &str, got: usize, expected: usize) -> Result<(), BlockError> {
    if got == expected {
        Ok(())
    } else {
        Err(BlockError::Input(format!("{what}: expected {expected} items, got {got}")))
    }
}
