//! JSON schemas shared by every module and a formatter that prints floats
//! with 17 significant digits so reports are byte-stable and round-trip.
//!
//! Complex numbers are `[re, im]`; matrices are `{"dim": n, "entries": rows}`.

use std::io;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::channel::{CPMap, LindbladGenerator};
use crate::error::{Error, Result};
use crate::linalg::{c64, Matrix, C64};
use crate::operator::DensityState;
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<bool>,
}

impl MatrixJson {
    pub fn from_matrix(m: &Matrix) -> Self {
        let entries = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        MatrixJson {
            dim: m.nrows(),
            entries,
            density: None,
        }
    }

    pub fn from_state(s: &DensityState) -> Self {
        MatrixJson {
            density: Some(true),
            ..Self::from_matrix(s.rho())
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        let n = self.dim;
        if self.entries.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.entries.len(),
            });
        }
        if let Some(row) = self.entries.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
        let m = Matrix::from_fn(n, n, |i, j| {
            let [re, im] = self.entries[i][j];
            c64(re, im)
        });
        if !crate::linalg::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    /// Density matrix; requires the `"density": true` marker.
    pub fn to_state(&self, tol: &Tolerances) -> Result<DensityState> {
        if self.density != Some(true) {
            return Err(Error::InvalidState {
                reason: "state JSON must carry \"density\": true".into(),
            });
        }
        DensityState::with_tolerances(self.to_matrix()?, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub dim: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelJson {
    pub fn from_map(map: &CPMap) -> Self {
        ChannelJson {
            dim: map.dim(),
            kraus: map.kraus().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_map(&self, tol: &Tolerances) -> Result<CPMap> {
        let kraus = matrices(self.dim, &self.kraus)?;
        CPMap::with_tolerances(kraus, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladJson {
    pub dim: usize,
    pub hamiltonian: MatrixJson,
    #[serde(default)]
    pub jumps: Vec<MatrixJson>,
}

impl LindbladJson {
    pub fn from_generator(gen: &LindbladGenerator) -> Self {
        LindbladJson {
            dim: gen.dim(),
            hamiltonian: MatrixJson::from_matrix(gen.hamiltonian()),
            jumps: gen.jumps().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_generator(&self) -> Result<LindbladGenerator> {
        let h = matrices(self.dim, std::slice::from_ref(&self.hamiltonian))?.remove(0);
        let jumps = matrices(self.dim, &self.jumps)?;
        LindbladGenerator::new(h, jumps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub d: usize,
    pub k: usize,
    pub ops: Vec<MatrixJson>,
}

impl TensorJson {
    pub fn from_ops(k: usize, ops: &[Matrix]) -> Self {
        TensorJson {
            d: ops.len(),
            k,
            ops: ops.iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_ops(&self) -> Result<Vec<Matrix>> {
        if self.ops.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: self.ops.len(),
            });
        }
        matrices(self.k, &self.ops)
    }
}

fn matrices(dim: usize, items: &[MatrixJson]) -> Result<Vec<Matrix>> {
    items
        .iter()
        .map(|m| {
            let m = m.to_matrix()?;
            if m.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows(),
                });
            }
            Ok(m)
        })
        .collect()
}

pub fn ser_complex<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn ser_complex_slice<S: Serializer>(zs: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(zs.len()))?;
    for z in zs {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

pub fn ser_matrix<S: Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from_matrix(m).serialize(s)
}

/// Pretty-printing formatter writing every float as `{:.16e}`.
pub struct StableFormatter {
    inner: PrettyFormatter<'static>,
}

impl Default for StableFormatter {
    fn default() -> Self {
        StableFormatter {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for StableFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serialise with [`StableFormatter`]. Non-finite floats become `null`.
pub fn to_stable_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, StableFormatter::default());
    value
        .serialize(&mut ser)
        .expect("serialising into memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
