use super::linearized::LinearizedOperator;
use crate::error::{Error, Result};
use crate::velocity_space::VelocityQuadrature;
use ndarray::Array2;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"VPBLOP\0\0";
pub const CACHE_VERSION: u32 = 1;

/// Writes the header (nodes per axis, scaling, angular order, version)
/// followed by the row-major nodal matrix, all little-endian.
pub fn save_operator(op: &LinearizedOperator, quad: &VelocityQuadrature, path: &Path) -> Result<()> {
    if op.key() != quad.key() {
        return Err(Error::Structure("operator and quadrature disagree".into()));
    }
    let dense = op.dense();
    let mut buf = Vec::with_capacity(40 + 8 * dense.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(quad.nodes_per_axis() as u64).to_le_bytes());
    buf.extend_from_slice(&quad.scaling().to_le_bytes());
    buf.extend_from_slice(&(op.angular_order() as u64).to_le_bytes());
    for x in dense.iter() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a cached operator, checking that it was built on `quad`.
pub fn load_operator(quad: &VelocityQuadrature, path: &Path) -> Result<LinearizedOperator> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format { path: path.to_path_buf(), reason };
    if bytes.len() < 36 || &bytes[..8] != MAGIC {
        return Err(bad("not an operator cache".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(8);
    if version != CACHE_VERSION {
        return Err(bad(format!("format version {version}, expected {CACHE_VERSION}")));
    }
    let n = u64_at(12) as usize;
    let scaling = f64::from_bits(u64_at(20));
    let order = u64_at(28) as usize;
    if n != quad.nodes_per_axis() || scaling.to_bits() != quad.scaling().to_bits() {
        return Err(bad(format!("built for {n} nodes per axis at scaling {scaling}")));
    }
    let nv = quad.len();
    let body = &bytes[36..];
    if body.len() != 8 * nv * nv {
        return Err(bad(format!("expected {} matrix bytes, found {}", 8 * nv * nv, body.len())));
    }
    let data: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let dense = Array2::from_shape_vec((nv, nv), data).map_err(|e| bad(e.to_string()))?;
    LinearizedOperator::from_dense(quad, order, &dense)
}
