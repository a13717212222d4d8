use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::real::Real;

/// How a parameter tensor is initialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
    XavierUniform { fan_in: usize, fan_out: usize },
    Const(f64),
}

/// Declared name, shape and initializer of one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub init: Init,
}

impl ParamSpec {
    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }
}

/// Ordered name → tensor map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore<T = f32> {
    tensors: IndexMap<String, Tensor<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore {
            tensors: IndexMap::new(),
        }
    }

    /// Inserts a tensor; names must be unique.
    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> Result<()> {
        let name = name.into();
        if self.tensors.contains_key(&name) {
            return Err(Error::InvalidArgument(format!("duplicate parameter `{name}`")));
        }
        self.tensors.insert(name, tensor);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Tensor<T>> {
        self.tensors.get(name).ok_or_else(|| Error::MissingParam(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor<T>> {
        self.tensors.get_mut(name).ok_or_else(|| Error::MissingParam(name.to_string()))
    }

    /// Looks a tensor up and checks its shape.
    pub fn expect(&self, name: &str, shape: &[usize]) -> Result<&Tensor<T>> {
        let t = self.get(name)?;
        if t.shape() != shape {
            return Err(Error::ParamShape {
                name: name.to_string(),
                expected: shape.to_vec(),
                found: t.shape().to_vec(),
            });
        }
        Ok(t)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor<T>)> {
        self.tensors.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    /// Checks that every declared parameter exists with the declared shape.
    pub fn check(&self, specs: &[ParamSpec]) -> Result<()> {
        for s in specs {
            self.expect(&s.name, &s.shape)?;
        }
        Ok(())
    }

    /// Concatenation of all tensors, in store order.
    pub fn to_flat(&self) -> Vec<T> {
        self.tensors.values().flat_map(|t| t.data().iter().copied()).collect()
    }

    /// Overwrites all tensors from a flat vector produced by [`Self::to_flat`].
    pub fn assign_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::shape(format!(
                "flat vector has {} values, store holds {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for t in self.tensors.values_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Flat index ranges of the tensors whose names start with `prefix`.
    pub fn ranges_with_prefix(&self, prefix: &str) -> Vec<std::ops::Range<usize>> {
        let mut offset = 0;
        let mut out = Vec::new();
        for (name, t) in &self.tensors {
            if name.starts_with(prefix) {
                out.push(offset..offset + t.len());
            }
            offset += t.len();
        }
        out
    }

    pub fn cast<U: Real>(&self) -> ParamStore<U> {
        ParamStore {
            tensors: self.tensors.iter().map(|(k, v)| (k.clone(), v.cast())).collect(),
        }
    }
}

/// Deterministic initialization: one ChaCha stream seeded with `seed`, consumed in
/// declaration order.
pub fn init_params(specs: &[ParamSpec], seed: u64) -> Result<ParamStore<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    for spec in specs {
        let data: Vec<f32> = match spec.init {
            Init::XavierUniform { fan_in, fan_out } => {
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt() as f32;
                (0..spec.numel()).map(|_| rng.random_range(-bound..=bound)).collect()
            }
            Init::Const(v) => vec![v as f32; spec.numel()],
        };
        store.insert(spec.name.clone(), Tensor::new(spec.shape.clone(), data)?)?;
    }
    Ok(store)
}
