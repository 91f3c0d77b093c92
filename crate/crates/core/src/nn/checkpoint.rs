use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::NetworkConfig;
use super::network::{DenseNetwork, Layer};
use crate::error::{Error, Result};

const FORMAT: &str = "hybridact-checkpoint";
const VERSION: u32 = 1;

/// On-disk form of a network: the config plus flat parameter arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    config: NetworkConfig,
    layers: Vec<Layer>,
}

pub fn checkpoint_to_json(net: &DenseNetwork) -> Result<String> {
    let doc = Checkpoint {
        format: FORMAT.into(),
        version: VERSION,
        config: net.config().clone(),
        layers: net.layers().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn checkpoint_from_json(text: &str) -> Result<DenseNetwork> {
    let doc: Checkpoint = serde_json::from_str(text)?;
    if doc.format != FORMAT || doc.version != VERSION {
        return Err(Error::contract(format!(
            "unsupported checkpoint {} v{}",
            doc.format, doc.version
        )));
    }
    let net = DenseNetwork::from_layers(doc.config, doc.layers)?;
    if !net.all_finite() {
        return Err(Error::contract("checkpoint holds non-finite parameters"));
    }
    Ok(net)
}

pub fn save_checkpoint(net: &DenseNetwork, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_to_json(net)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<DenseNetwork> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_json(&text)
}
