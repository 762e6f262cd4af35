//! Reading and writing 2-D float arrays in the numpy ".npy" format, version 1.0.
//!
//! Only little- or big-endian `f4`/`f8` C-order arrays are accepted. Values are
//! widened to `f64`; writing always emits `<f8` with a 64-byte aligned header.

use std::fs;
use std::path::Path;

use crate::numerics::Matrix;
use crate::{Error, Result};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const HEADER_ALIGN: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Endian {
    Little,
    Big,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct FloatDescr {
    endian: Endian,
    size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NpyHeader {
    pub shape: Vec<usize>,
    descr: FloatDescr,
    /// Offset of the first data byte.
    data_offset: usize,
}

impl NpyHeader {
    pub fn item_size(&self) -> usize {
        self.descr.size
    }
}

/// Parses the magic, version and header dictionary, leaving the data untouched.
pub fn parse_header(bytes: &[u8]) -> Result<NpyHeader> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(Error::Npy("missing magic string".into()));
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(Error::Npy(format!(
            "unsupported format version {major}.{minor}, expected 1.0"
        )));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_offset = 10 + header_len;
    let text = bytes
        .get(10..data_offset)
        .ok_or_else(|| Error::Npy("truncated header".into()))?;
    let text = std::str::from_utf8(text).map_err(|_| Error::Npy("header is not ASCII".into()))?;
    let dict = HeaderDict::parse(text)?;
    if dict.fortran_order {
        return Err(Error::Npy("fortran-order arrays are not supported".into()));
    }
    Ok(NpyHeader {
        shape: dict.shape,
        descr: dict.descr,
        data_offset,
    })
}

/// Decodes a 2-D float array, widening to `f64`. Non-finite values are rejected.
pub fn decode_matrix(bytes: &[u8]) -> Result<Matrix> {
    let header = parse_header(bytes)?;
    if header.shape.len() != 2 {
        return Err(Error::Npy(format!(
            "expected a 2-D array, found shape {:?}",
            header.shape
        )));
    }
    let (rows, cols) = (header.shape[0], header.shape[1]);
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Npy("shape overflows".into()))?;
    let size = header.descr.size;
    let data = &bytes[header.data_offset..];
    let needed = count
        .checked_mul(size)
        .ok_or_else(|| Error::Npy("shape overflows".into()))?;
    if data.len() != needed {
        return Err(Error::Npy(format!(
            "data section holds {} bytes, shape {:?} needs {needed}",
            data.len(),
            header.shape
        )));
    }

    let values: Vec<f64> = data
        .chunks_exact(size)
        .map(|chunk| match (size, header.descr.endian) {
            (4, Endian::Little) => f32::from_le_bytes(chunk.try_into().unwrap()) as f64,
            (4, Endian::Big) => f32::from_be_bytes(chunk.try_into().unwrap()) as f64,
            (_, Endian::Little) => f64::from_le_bytes(chunk.try_into().unwrap()),
            (_, Endian::Big) => f64::from_be_bytes(chunk.try_into().unwrap()),
        })
        .collect();
    let matrix = Matrix::from_vec(rows, cols, values)?;
    if let Some((row, col)) = matrix.first_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    Ok(matrix)
}

/// Encodes a matrix as a version 1.0 `<f8` C-order array.
pub fn encode_matrix(matrix: &Matrix) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '<f8', 'fortran_order': False, 'shape': ({}, {}), }}",
        matrix.rows(),
        matrix.cols()
    );
    let unpadded = 10 + dict.len() + 1;
    let padding = (HEADER_ALIGN - unpadded % HEADER_ALIGN) % HEADER_ALIGN;
    let header_len = dict.len() + padding + 1;

    let mut out = Vec::with_capacity(10 + header_len + matrix.as_slice().len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header_len as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.extend(std::iter::repeat_n(b' ', padding));
    out.push(b'\n');
    for v in matrix.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrix(&bytes).map_err(|e| Error::Npy(format!("{}: {e}", path.display())))
}

/// Reads only the header of a file to obtain its shape.
pub fn read_shape(path: &Path) -> Result<Vec<usize>> {
    use std::io::Read;
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut prefix = [0u8; 10];
    file.read_exact(&mut prefix).map_err(|e| Error::io(path, e))?;
    let header_len = u16::from_le_bytes([prefix[8], prefix[9]]) as usize;
    let mut bytes = prefix.to_vec();
    bytes.resize(10 + header_len, 0);
    file.read_exact(&mut bytes[10..]).map_err(|e| Error::io(path, e))?;
    parse_header(&bytes)
        .map(|h| h.shape)
        .map_err(|e| Error::Npy(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, matrix: &Matrix) -> Result<()> {
    fs::write(path, encode_matrix(matrix)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Header dictionary: a python dict literal with 'descr', 'fortran_order', 'shape'
// ---------------------------------------------------------------------------

struct HeaderDict {
    descr: FloatDescr,
    fortran_order: bool,
    shape: Vec<usize>,
}

enum Literal {
    Str(String),
    Bool(bool),
    Tuple(Vec<usize>),
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Npy(format!(
                "malformed header: expected '{}' at byte {}",
                c as char, self.pos
            )))
        }
    }

    fn string(&mut self) -> Result<String> {
        let quote = match self.peek() {
            Some(q @ (b'\'' | b'"')) => q,
            _ => return Err(Error::Npy("malformed header: expected string".into())),
        };
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos] != quote {
            self.pos += 1;
        }
        if self.pos >= self.s.len() {
            return Err(Error::Npy("malformed header: unterminated string".into()));
        }
        let out = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
        self.pos += 1;
        Ok(out)
    }

    fn word(&mut self) -> &'a [u8] {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        &self.s[start..self.pos]
    }

    fn literal(&mut self) -> Result<Literal> {
        match self.peek() {
            Some(b'\'' | b'"') => self.string().map(Literal::Str),
            Some(b'(') => {
                self.pos += 1;
                let mut dims = Vec::new();
                loop {
                    if self.peek() == Some(b')') {
                        self.pos += 1;
                        break;
                    }
                    let w = self.word();
                    let w = w.strip_suffix(b"L").unwrap_or(w);
                    let n = std::str::from_utf8(w)
                        .ok()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| Error::Npy("malformed header: bad shape entry".into()))?;
                    dims.push(n);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {}
                        _ => return Err(Error::Npy("malformed header: bad shape tuple".into())),
                    }
                }
                Ok(Literal::Tuple(dims))
            }
            _ => match self.word() {
                b"True" => Ok(Literal::Bool(true)),
                b"False" => Ok(Literal::Bool(false)),
                _ => Err(Error::Npy("malformed header: unexpected value".into())),
            },
        }
    }
}

impl HeaderDict {
    fn parse(text: &str) -> Result<Self> {
        let mut cur = Cursor {
            s: text.as_bytes(),
            pos: 0,
        };
        let (mut descr, mut fortran, mut shape) = (None, None, None);
        cur.expect(b'{')?;
        loop {
            if cur.peek() == Some(b'}') {
                cur.pos += 1;
                break;
            }
            let key = cur.string()?;
            cur.expect(b':')?;
            let value = cur.literal()?;
            match (key.as_str(), value) {
                ("descr", Literal::Str(s)) => descr = Some(parse_descr(&s)?),
                ("fortran_order", Literal::Bool(b)) => fortran = Some(b),
                ("shape", Literal::Tuple(t)) => shape = Some(t),
                (k, _) => {
                    return Err(Error::Npy(format!("malformed header: unexpected key {k:?}")))
                }
            }
            match cur.peek() {
                Some(b',') => cur.pos += 1,
                Some(b'}') => {}
                _ => return Err(Error::Npy("malformed header: expected ',' or '}'".into())),
            }
        }
        if cur.peek().is_some() {
            return Err(Error::Npy("malformed header: trailing characters".into()));
        }
        Ok(HeaderDict {
            descr: descr.ok_or_else(|| Error::Npy("header missing 'descr'".into()))?,
            fortran_order: fortran
                .ok_or_else(|| Error::Npy("header missing 'fortran_order'".into()))?,
            shape: shape.ok_or_else(|| Error::Npy("header missing 'shape'".into()))?,
        })
    }
}

fn parse_descr(s: &str) -> Result<FloatDescr> {
    let endian = match s.as_bytes().first() {
        Some(b'<') => Endian::Little,
        Some(b'>') => Endian::Big,
        Some(b'=') if cfg!(target_endian = "little") => Endian::Little,
        Some(b'=') => Endian::Big,
        _ => return Err(Error::Npy(format!("unsupported element type {s:?}"))),
    };
    let size = match &s[1..] {
        "f4" => 4,
        "f8" => 8,
        _ => {
            return Err(Error::Npy(format!(
                "unsupported element type {s:?}, expected 32- or 64-bit float"
            )))
        }
    };
    Ok(FloatDescr { endian, size })
}
