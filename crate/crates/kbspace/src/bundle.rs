//! On-disk index bundle.
//!
//! A bundle is a directory holding:
//!
//! | file            | content                                                |
//! |-----------------|--------------------------------------------------------|
//! | `manifest.json` | format name, version, item and fact counts             |
//! | `items.jsonl`   | one item record per line, ordered by code              |
//! | `facts.bin`     | fact table                                             |
//! | `nf.bin`        | item → fact-id rows                                    |
//! | `ni.bin`        | item → neighbor-item rows                              |
//!
//! Binary files are little-endian. `facts.bin` is `u64 count` followed by
//! `s p o nq (qp qo)*` as `u32`s per fact. Row files are `u64 rows`,
//! `(rows + 1) × u64` offsets, `u64 len`, `len × u32` values.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{encode_items, IntegerCoding, ItemRecord, RawFact};
use crate::kb::{Fact, FactId, ItemId, KbItem};
use crate::store::{Csr, KnowledgeBase};

pub const FORMAT_NAME: &str = "kbspace-index";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub items: usize,
    pub facts: usize,
}

/// Encodes raw records and builds the in-memory indexes in one step.
pub fn build_knowledge_base(items: &[ItemRecord], facts: &[RawFact]) -> Result<KnowledgeBase> {
    let coding = encode_items(items, facts)?;
    let encoded = coding.encode_facts(facts)?;
    KnowledgeBase::new(coding.into_items(), encoded)
}

/// Builds the indexes for `facts` and writes the bundle to `dir`.
pub fn build_index(facts: Vec<Fact>, coding: IntegerCoding, dir: &Path) -> Result<KnowledgeBase> {
    let kb = KnowledgeBase::new(coding.into_items(), facts)?;
    save(&kb, dir)?;
    Ok(kb)
}

pub fn save(kb: &KnowledgeBase, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let manifest = Manifest {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        items: kb.num_items(),
        facts: kb.num_facts(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    let path = dir.join("items.jsonl");
    write_file(&path, |w| {
        for it in kb.items() {
            serde_json::to_writer(&mut *w, it)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;

    let path = dir.join("facts.bin");
    write_file(&path, |w| {
        w.write_u64::<LittleEndian>(kb.num_facts() as u64)?;
        for f in kb.facts() {
            w.write_u32::<LittleEndian>(f.subject.0)?;
            w.write_u32::<LittleEndian>(f.predicate.0)?;
            w.write_u32::<LittleEndian>(f.object.0)?;
            w.write_u32::<LittleEndian>(f.qualifiers.len() as u32)?;
            for &(p, o) in &f.qualifiers {
                w.write_u32::<LittleEndian>(p.0)?;
                w.write_u32::<LittleEndian>(o.0)?;
            }
        }
        Ok(())
    })?;

    write_rows(&dir.join("nf.bin"), kb.nf_index(), |f| f.0)?;
    write_rows(&dir.join("ni.bin"), kb.ni_index(), |x| x.0)?;
    Ok(())
}

pub fn load(dir: &Path) -> Result<KnowledgeBase> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::parse(&path, 1, e.to_string()))?;
    if manifest.format != FORMAT_NAME {
        return Err(Error::CorruptIndex(format!("unknown format `{}`", manifest.format)));
    }
    if manifest.version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: FORMAT_VERSION,
            found: manifest.version,
        });
    }

    let path = dir.join("items.jsonl");
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut items = Vec::with_capacity(manifest.items);
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path, e))?;
        let item: KbItem = serde_json::from_str(&line).map_err(|e| Error::parse(&path, n + 1, e.to_string()))?;
        items.push(item);
    }

    let path = dir.join("facts.bin");
    let facts = read_file(&path, |r| {
        let count = r.read_u64::<LittleEndian>()? as usize;
        let mut facts = Vec::with_capacity(count);
        for i in 0..count {
            let s = r.read_u32::<LittleEndian>()?;
            let p = r.read_u32::<LittleEndian>()?;
            let o = r.read_u32::<LittleEndian>()?;
            let nq = r.read_u32::<LittleEndian>()? as usize;
            let mut qualifiers = Vec::with_capacity(nq);
            for _ in 0..nq {
                let qp = r.read_u32::<LittleEndian>()?;
                let qo = r.read_u32::<LittleEndian>()?;
                qualifiers.push((ItemId(qp), ItemId(qo)));
            }
            facts.push(Fact {
                id: FactId(i as u32),
                subject: ItemId(s),
                predicate: ItemId(p),
                object: ItemId(o),
                qualifiers,
            });
        }
        Ok(facts)
    })?;

    let nf = read_rows(&dir.join("nf.bin"), FactId)?;
    let ni = read_rows(&dir.join("ni.bin"), ItemId)?;

    if items.len() != manifest.items || facts.len() != manifest.facts {
        return Err(Error::CorruptIndex("manifest counts disagree with contents".into()));
    }
    if nf.rows() != items.len() || ni.rows() != items.len() {
        return Err(Error::CorruptIndex("index row count disagrees with item count".into()));
    }
    if items.iter().enumerate().any(|(i, it)| it.code.index() != i) {
        return Err(Error::CorruptIndex("item codes are not dense".into()));
    }
    if nf.values.iter().any(|f| f.index() >= facts.len()) || ni.values.iter().any(|x| x.index() >= items.len())
    {
        return Err(Error::CorruptIndex("row value out of range".into()));
    }
    Ok(KnowledgeBase::assemble(items, facts, nf, ni))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn read_file<T>(path: &Path, body: impl FnOnce(&mut BufReader<File>) -> std::io::Result<T>) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let out = body(&mut r).map_err(|e| Error::io(path, e))?;
    let mut trailing = [0u8; 1];
    match r.read(&mut trailing) {
        Ok(0) => Ok(out),
        Ok(_) => Err(Error::CorruptIndex(format!("trailing bytes in {}", path.display()))),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn write_rows<T: Copy>(path: &Path, csr: &Csr<T>, raw: impl Fn(T) -> u32) -> Result<()> {
    write_file(path, |w| {
        w.write_u64::<LittleEndian>(csr.rows() as u64)?;
        for &o in &csr.offsets {
            w.write_u64::<LittleEndian>(o as u64)?;
        }
        w.write_u64::<LittleEndian>(csr.values.len() as u64)?;
        for &v in &csr.values {
            w.write_u32::<LittleEndian>(raw(v))?;
        }
        Ok(())
    })
}

fn read_rows<T>(path: &Path, wrap: impl Fn(u32) -> T) -> Result<Csr<T>> {
    let csr = read_file(path, |r| {
        let rows = r.read_u64::<LittleEndian>()? as usize;
        let mut offsets = Vec::with_capacity(rows + 1);
        for _ in 0..=rows {
            offsets.push(r.read_u64::<LittleEndian>()? as usize);
        }
        let len = r.read_u64::<LittleEndian>()? as usize;
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(wrap(r.read_u32::<LittleEndian>()?));
        }
        Ok(Csr { offsets, values })
    })?;
    let monotone = csr.offsets.windows(2).all(|w| w[0] <= w[1]);
    if csr.offsets.first() != Some(&0) || csr.offsets.last() != Some(&csr.values.len()) || !monotone {
        return Err(Error::CorruptIndex(format!("bad row offsets in {}", path.display())));
    }
    Ok(csr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::ItemKind;

    fn records() -> (Vec<ItemRecord>, Vec<RawFact>) {
        let rec = |id: &str, kind| ItemRecord {
            external_id: id.into(),
            label: id.into(),
            aliases: vec![],
            description: String::new(),
            kind,
        };
        let items = vec![
            rec("A", ItemKind::Entity),
            rec("p", ItemKind::Predicate),
            rec("B", ItemKind::Entity),
        ];
        let facts = vec![RawFact {
            subject: "A".into(),
            predicate: "p".into(),
            object: "B".into(),
            qualifiers: vec![("p".into(), "\"2018\"".into())],
        }];
        (items, facts)
    }

    #[test]
    fn round_trip() {
        let (items, facts) = records();
        let kb = build_knowledge_base(&items, &facts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save(&kb, dir.path()).unwrap();
        let loaded = load(dir.path()).unwrap();
        assert_eq!(kb, loaded);
        assert_eq!(loaded.lookup("\"2018\""), Some(ItemId(3)));
    }

    #[test]
    fn version_mismatch_is_reported() {
        let (items, facts) = records();
        let kb = build_knowledge_base(&items, &facts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save(&kb, dir.path()).unwrap();
        let path = dir.path().join("manifest.json");
        let text = fs::read_to_string(&path).unwrap().replace("\"version\": 1", "\"version\": 99");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            load(dir.path()),
            Err(Error::VersionMismatch { expected: 1, found: 99 })
        ));
    }

    #[test]
    fn write_failure_names_the_path() {
        let (items, facts) = records();
        let kb = build_knowledge_base(&items, &facts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let err = save(&kb, &blocker.join("bundle")).unwrap_err();
        assert!(err.to_string().contains("bundle"), "{err}");
    }

    #[test]
    fn truncated_rows_are_rejected() {
        let (items, facts) = records();
        let kb = build_knowledge_base(&items, &facts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save(&kb, dir.path()).unwrap();
        let path = dir.path().join("ni.bin");
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
        assert!(load(dir.path()).is_err());
    }
}
