//! Compact binary snapshots, content digests and an ASCII debug dump.

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Agent, WorldMap};
use crate::fire::FireState;
use crate::terrain::LandType;

const MAGIC: &[u8; 4] = b"WFSN";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not a world snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("snapshot truncated")]
    Truncated,
    #[error("invalid {layer} value {value} at cell {index}")]
    InvalidValue {
        layer: &'static str,
        value: u8,
        index: usize,
    },
}

/// Serializes every layer little-endian after a small header.
pub fn encode(world: &WorldMap) -> Vec<u8> {
    let n = world.len();
    let mut out = Vec::with_capacity(32 + n * 44);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(world.width as u64).to_le_bytes());
    out.extend_from_slice(&(world.height as u64).to_le_bytes());
    out.extend_from_slice(&world.seed.to_le_bytes());
    out.extend_from_slice(&world.step.to_le_bytes());
    out.extend(world.land.iter().map(|l| l.to_u8()));
    out.extend_from_slice(&world.trees);
    out.extend(world.fire.iter().map(|f| f.to_u8()));
    for v in &world.fire_age {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &world.wet {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in world.elevation.iter().chain(&world.moisture) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for w in &world.wind {
        out.extend_from_slice(&w[0].to_le_bytes());
        out.extend_from_slice(&w[1].to_le_bytes());
    }
    for v in &world.civilians {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for layer in [&world.labeled, &world.revealed, &world.visible] {
        out.extend(layer.iter().map(|&b| b as u8));
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        let end = self.pos.checked_add(n).ok_or(SnapshotError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(SnapshotError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], SnapshotError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.array()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<WorldMap, SnapshotError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = u32::from_le_bytes(r.array()?);
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let width = r.u64()? as usize;
    let height = r.u64()? as usize;
    let seed = r.u64()?;
    let step = r.u64()?;
    let n = width.checked_mul(height).ok_or(SnapshotError::Truncated)?;
    if n.saturating_mul(44) > bytes.len() {
        return Err(SnapshotError::Truncated);
    }
    let mut world = WorldMap::blank(width, height, seed);
    world.step = step;
    for (i, &b) in r.take(n)?.iter().enumerate() {
        world.land[i] = LandType::from_u8(b).ok_or(SnapshotError::InvalidValue {
            layer: "land",
            value: b,
            index: i,
        })?;
    }
    world.trees.copy_from_slice(r.take(n)?);
    for (i, &b) in r.take(n)?.iter().enumerate() {
        world.fire[i] = FireState::from_u8(b).ok_or(SnapshotError::InvalidValue {
            layer: "fire",
            value: b,
            index: i,
        })?;
    }
    for v in world.fire_age.iter_mut().chain(world.wet.iter_mut()) {
        *v = u16::from_le_bytes(r.array()?);
    }
    for v in world.elevation.iter_mut().chain(world.moisture.iter_mut()) {
        *v = f64::from_le_bytes(r.array()?);
    }
    for w in world.wind.iter_mut() {
        w[0] = f64::from_le_bytes(r.array()?);
        w[1] = f64::from_le_bytes(r.array()?);
    }
    for v in world.civilians.iter_mut() {
        *v = u16::from_le_bytes(r.array()?);
    }
    for layer in [&mut world.labeled, &mut world.revealed, &mut world.visible] {
        for (dst, &b) in layer.iter_mut().zip(r.take(n)?) {
            *dst = b != 0;
        }
    }
    if r.pos != bytes.len() {
        return Err(SnapshotError::Truncated);
    }
    Ok(world)
}

/// Hex SHA-256 over the world snapshot and the serialized agents.
pub fn world_digest(world: &WorldMap, agents: &[Agent]) -> String {
    let mut h = Sha256::new();
    h.update(encode(world));
    h.update(serde_json::to_vec(agents).expect("agents serialize"));
    hex::encode(h.finalize())
}

/// Legend character for a cell ignoring fog and agents.
pub fn cell_char(world: &WorldMap, i: usize) -> char {
    match world.fire[i] {
        FireState::Ignited => return 'i',
        FireState::Burning => return 'f',
        FireState::Extinguishing => return 'e',
        FireState::Extinguished => return 'x',
        FireState::None => {}
    }
    if world.civilians[i] > 0 {
        return 'C';
    }
    match world.land[i] {
        LandType::Water => 'w',
        LandType::Building => 'B',
        LandType::Rock => 'r',
        _ => char::from(b'0' + world.trees[i].min(3)),
    }
}

/// Full-map dump, one row per line, no fog.
pub fn ascii_dump(world: &WorldMap) -> String {
    let mut s = String::with_capacity(world.len() + world.height);
    for y in 0..world.height {
        for x in 0..world.width {
            s.push(cell_char(world, y * world.width + x));
        }
        s.push('\n');
    }
    s
}
