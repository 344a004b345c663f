//! Catalog and alignment-probability TSV files.
//!
//! Catalog: `transcript_id <TAB> length`, `#` comments allowed.
//! Alignments: `read_id <TAB> n_aligns <TAB> tr:value;tr:value;...` where
//! `value` is a probability (precomputed mode) or a read length (uniform mode).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub id: String,
    pub length: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranscriptCatalog {
    entries: Vec<TranscriptEntry>,
    index: HashMap<String, usize>,
}

impl TranscriptCatalog {
    pub fn new(entries: Vec<TranscriptEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.length == 0 {
                return Err(Error::Parameter(format!("transcript {} has zero length", e.id)));
            }
            if index.insert(e.id.clone(), i).is_some() {
                return Err(Error::Parameter(format!("duplicate transcript id {}", e.id)));
            }
        }
        Ok(TranscriptCatalog { entries, index })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn id(&self, k: usize) -> &str {
        &self.entries[k].id
    }

    pub fn length(&self, k: usize) -> u64 {
        self.entries[k].length
    }

    pub fn lookup(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// One read with its sparse alignment probabilities `f_k(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadRecord {
    pub id: String,
    pub aligns: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentSet {
    pub catalog: TranscriptCatalog,
    pub reads_a: Vec<ReadRecord>,
    pub reads_b: Vec<ReadRecord>,
}

impl AlignmentSet {
    pub fn new(
        catalog: TranscriptCatalog,
        reads_a: Vec<ReadRecord>,
        reads_b: Vec<ReadRecord>,
    ) -> Result<Self> {
        for r in reads_a.iter().chain(&reads_b) {
            validate_read(r, catalog.len())?;
        }
        Ok(AlignmentSet {
            catalog,
            reads_a,
            reads_b,
        })
    }

    /// Loads a catalog and pools the replicate files of each condition.
    pub fn load(
        catalog: &Path,
        files_a: &[PathBuf],
        files_b: &[PathBuf],
        mode: ProbMode,
    ) -> Result<Self> {
        let catalog = parse_catalog(catalog)?;
        let mut reads_a = Vec::new();
        for f in files_a {
            reads_a.extend(parse_alignment_file(f, &catalog, mode)?);
        }
        let mut reads_b = Vec::new();
        for f in files_b {
            reads_b.extend(parse_alignment_file(f, &catalog, mode)?);
        }
        Ok(AlignmentSet {
            catalog,
            reads_a,
            reads_b,
        })
    }

    pub fn n_transcripts(&self) -> usize {
        self.catalog.len()
    }
}

fn validate_read(r: &ReadRecord, k: usize) -> Result<()> {
    if r.aligns.is_empty() {
        return Err(Error::Parameter(format!("read {} has no alignments", r.id)));
    }
    for (i, &(t, p)) in r.aligns.iter().enumerate() {
        if t >= k {
            return Err(Error::Parameter(format!("read {}: transcript {t} out of range", r.id)));
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Parameter(format!("read {}: probability {p}", r.id)));
        }
        if r.aligns[..i].iter().any(|&(u, _)| u == t) {
            return Err(Error::Parameter(format!("read {}: duplicate transcript {t}", r.id)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbMode {
    Precomputed,
    Uniform,
}

/// Uniform read-start model: `1 / (L - l + 1)`, or `None` when the read
/// does not fit in the transcript.
pub fn uniform_alignment_prob(transcript_len: u64, read_len: u64) -> Option<f64> {
    if read_len == 0 || read_len > transcript_len {
        return None;
    }
    Some(1.0 / (transcript_len - read_len + 1) as f64)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn significant(line: &str) -> Option<&str> {
    let line = line.trim_end_matches('\r');
    if line.trim().is_empty() || line.starts_with('#') {
        None
    } else {
        Some(line)
    }
}

pub fn parse_catalog(path: &Path) -> Result<TranscriptCatalog> {
    read_catalog(open(path)?, path)
}

pub fn read_catalog<R: BufRead>(reader: R, path: &Path) -> Result<TranscriptCatalog> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut entries = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let Some(line) = significant(&line) else {
            continue;
        };
        let mut fields = line.split('\t');
        let (Some(id), Some(len), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(n + 1, "expected `transcript_id<TAB>length`".into()));
        };
        let length: u64 = len
            .trim()
            .parse()
            .map_err(|_| err(n + 1, format!("bad length `{len}`")))?;
        if length == 0 {
            return Err(err(n + 1, format!("transcript {id} has zero length")));
        }
        entries.push(TranscriptEntry {
            id: id.to_string(),
            length,
        });
    }
    TranscriptCatalog::new(entries).map_err(|e| err(0, e.to_string()))
}

pub fn parse_alignment_file(
    path: &Path,
    catalog: &TranscriptCatalog,
    mode: ProbMode,
) -> Result<Vec<ReadRecord>> {
    read_alignments(open(path)?, path, catalog, mode)
}

pub fn read_alignments<R: BufRead>(
    reader: R,
    path: &Path,
    catalog: &TranscriptCatalog,
    mode: ProbMode,
) -> Result<Vec<ReadRecord>> {
    let mut reads = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let Some(line) = significant(&line) else {
            continue;
        };
        let lineno = n + 1;
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg,
        };
        let mut fields = line.split('\t');
        let (Some(read_id), Some(count), Some(list), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(err("expected `read_id<TAB>n_aligns<TAB>alignments`".into()));
        };
        let n_aligns: usize = count
            .trim()
            .parse()
            .map_err(|_| err(format!("bad alignment count `{count}`")))?;
        let mut aligns = Vec::with_capacity(n_aligns);
        let mut listed = 0usize;
        for item in list.split(';').filter(|s| !s.is_empty()) {
            listed += 1;
            let (tr, value) = item
                .rsplit_once(':')
                .ok_or_else(|| err(format!("alignment `{item}` lacks `:`")))?;
            let k = catalog
                .lookup(tr)
                .ok_or_else(|| err(format!("unknown transcript id `{tr}`")))?;
            if aligns.iter().any(|&(t, _)| t == k) {
                return Err(err(format!("transcript `{tr}` listed twice")));
            }
            let prob = match mode {
                ProbMode::Precomputed => {
                    let p: f64 = value
                        .parse()
                        .map_err(|_| err(format!("bad probability `{value}`")))?;
                    if !(p > 0.0) || !p.is_finite() {
                        return Err(err(format!("non-positive probability `{value}`")));
                    }
                    p
                }
                ProbMode::Uniform => {
                    let read_len: u64 = value
                        .parse()
                        .map_err(|_| err(format!("bad read length `{value}`")))?;
                    match uniform_alignment_prob(catalog.length(k), read_len) {
                        Some(p) => p,
                        None => {
                            warn!(
                                "{}:{lineno}: read {read_id} (length {read_len}) longer than {tr}; alignment dropped",
                                path.display()
                            );
                            continue;
                        }
                    }
                }
            };
            aligns.push((k, prob));
        }
        if listed == 0 {
            return Err(err(format!("read `{read_id}` has an empty alignment list")));
        }
        if listed != n_aligns {
            return Err(err(format!("declared {n_aligns} alignments, found {listed}")));
        }
        if aligns.is_empty() {
            warn!(
                "{}:{lineno}: read {read_id} fits no transcript; read dropped",
                path.display()
            );
            continue;
        }
        reads.push(ReadRecord {
            id: read_id.to_string(),
            aligns,
        });
    }
    Ok(reads)
}

pub fn write_catalog(path: &Path, catalog: &TranscriptCatalog) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for e in catalog.entries() {
        writeln!(out, "{}\t{}", e.id, e.length).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes precomputed-mode records; probabilities use the shortest
/// round-tripping decimal form so re-parsing is exact.
pub fn write_alignments<W: Write>(
    out: &mut W,
    catalog: &TranscriptCatalog,
    reads: &[ReadRecord],
) -> std::io::Result<()> {
    for r in reads {
        write!(out, "{}\t{}\t", r.id, r.aligns.len())?;
        for (i, &(k, p)) in r.aligns.iter().enumerate() {
            if i > 0 {
                out.write_all(b";")?;
            }
            write!(out, "{}:{}", catalog.id(k), p)?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_alignment_file(
    path: &Path,
    catalog: &TranscriptCatalog,
    reads: &[ReadRecord],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_alignments(&mut out, catalog, reads)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
