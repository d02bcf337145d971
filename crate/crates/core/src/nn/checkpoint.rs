use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, InputScaling, NetworkParams};
use crate::error::{PinnError, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// On-disk network checkpoint. `flat_params` is laid out `W_1, b_1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    #[serde(default = "default_version")]
    pub version: u32,
    pub layer_dims: Vec<usize>,
    pub activation: Activation,
    pub flat_params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_scaling: Option<InputScaling>,
}

fn default_version() -> u32 {
    CHECKPOINT_VERSION
}

impl From<&NetworkParams> for Checkpoint {
    fn from(p: &NetworkParams) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            layer_dims: p.layer_dims().to_vec(),
            activation: p.activation(),
            flat_params: p.flat().to_vec(),
            input_scaling: p.scaling().cloned(),
        }
    }
}

impl Checkpoint {
    pub fn into_params(self) -> Result<NetworkParams> {
        if self.version != CHECKPOINT_VERSION {
            return Err(PinnError::Checkpoint(format!("unknown checkpoint version {}", self.version)));
        }
        let p = NetworkParams::from_flat(self.layer_dims, self.activation, self.flat_params)?;
        match self.input_scaling {
            Some(s) => p.with_scaling(s),
            None => Ok(p),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| PinnError::Checkpoint(e.to_string()))
    }
}

pub fn save_checkpoint(params: &NetworkParams, path: &Path) -> Result<()> {
    std::fs::write(path, Checkpoint::from(params).to_json()?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<NetworkParams> {
    Checkpoint::from_json(&std::fs::read_to_string(path)?)?.into_params()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_params, InitScheme};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(seed in 0u64..500, scale in proptest::bool::ANY) {
            let mut p = init_params(seed, &[3, 5, 4, 2], Activation::Celu, InitScheme::XavierUniform).unwrap();
            // exercise awkward values: subnormal, huge, negative zero
            p.flat_mut()[0] = 5e-324;
            p.flat_mut()[1] = -0.0;
            p.flat_mut()[2] = 1.2345678901234567e300;
            if scale {
                p = p.with_scaling(InputScaling::from_box(&[0.0, -1.0, 2.0], &[1.0, 1.0, 3.5])).unwrap();
            }
            let back = Checkpoint::from_json(&Checkpoint::from(&p).to_json().unwrap()).unwrap().into_params().unwrap();
            prop_assert_eq!(p.flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            back.flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(p.scaling(), back.scaling());
        }
    }

    #[test]
    fn unknown_version_is_rejected() {
        let p = init_params(0, &[1, 2, 1], Activation::Tanh, InitScheme::XavierUniform).unwrap();
        let mut ck = Checkpoint::from(&p);
        ck.version = 99;
        assert!(matches!(ck.into_params(), Err(PinnError::Checkpoint(_))));
    }
}
