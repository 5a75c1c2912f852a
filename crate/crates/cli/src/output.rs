use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::args::Format;
use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One output document with its resolved configuration.
pub struct Document {
    pub file_stem: String,
    pub config: Vec<(String, String)>,
    pub body: Body,
}

pub enum Body {
    /// CSV text without the comment header.
    Csv(Vec<u8>),
    Json(Value),
}

impl Document {
    pub fn file_name(&self) -> String {
        match self.body {
            Body::Csv(_) => format!("{}.csv", self.file_stem),
            Body::Json(_) => format!("{}.json", self.file_stem),
        }
    }

    pub fn render(&self) -> Vec<u8> {
        match &self.body {
            Body::Csv(text) => {
                let mut out = format!("# treesearch {VERSION}\n").into_bytes();
                for (k, v) in &self.config {
                    out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
                }
                out.extend_from_slice(text);
                out
            }
            Body::Json(result) => {
                let config: Map<String, Value> =
                    self.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
                let doc = json!({ "tool": "treesearch", "version": VERSION, "config": config, "result": result });
                let mut out = serde_json::to_vec_pretty(&doc).expect("serializable");
                out.push(b'\n');
                out
            }
        }
    }
}

pub fn csv_body(f: impl FnOnce(&mut Vec<u8>) -> treesearch::Result<()>) -> Result<Body, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(Body::Csv(buf))
}

pub fn pick(format: Format, csv: impl FnOnce() -> Result<Body, Failure>, json: impl FnOnce() -> Result<Value, Failure>) -> Result<Body, Failure> {
    match format {
        Format::Csv => csv(),
        Format::Json => json().map(Body::Json),
    }
}

pub fn emit(docs: &[Document], dir: Option<&Path>) -> Result<(), Failure> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for d in docs {
                std::fs::write(dir.join(d.file_name()), d.render())?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for d in docs {
                lock.write_all(&d.render())?;
            }
            lock.flush()?;
        }
    }
    Ok(())
}
