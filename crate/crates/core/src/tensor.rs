//! Dense complex tensors with 1-based index semantics and a plain-text format.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{MAX_DENSE_LEN, MAX_ORDER};

/// An N-order complex tensor stored densely in row-major layout.
///
/// Indices are 1-based at the API boundary, matching the usual tensor
/// notation `X(k_1, ..., k_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    entries: Vec<Complex64>,
}

impl DenseTensor {
    /// Zero tensor with the given mode dimensions.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(DenseTensor {
            dims: dims.to_vec(),
            entries: vec![Complex64::ZERO; len],
        })
    }

    /// Builds a tensor from row-major entries, validating shape and finiteness.
    pub fn from_entries(dims: &[usize], entries: Vec<Complex64>) -> Result<Self> {
        let len = check_dims(dims)?;
        if entries.len() != len {
            return Err(Error::dim(format!(
                "expected {len} entries for dims {dims:?}, got {}",
                entries.len()
            )));
        }
        let t = DenseTensor {
            dims: dims.to_vec(),
            entries,
        };
        t.check_finite()?;
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// True when all mode dimensions are equal; such tensors are the domain
    /// of the antisymmetrization machinery.
    pub fn is_cubical(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(Error::dim(format!(
                "index {:?} has {} coordinates, tensor has order {}",
                index,
                index.len(),
                self.dims.len()
            )));
        }
        let mut off = 0usize;
        for (j, (&k, &dim)) in index.iter().zip(&self.dims).enumerate() {
            if k < 1 || k > dim {
                return Err(Error::arg(format!(
                    "coordinate {k} out of range 1..={dim} in mode {}",
                    j + 1
                )));
            }
            off = off * dim + (k - 1);
        }
        Ok(off)
    }

    /// Entry at a 1-based multi-index.
    pub fn get(&self, index: &[usize]) -> Result<Complex64> {
        Ok(self.entries[self.offset(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: Complex64) -> Result<()> {
        let off = self.offset(index)?;
        self.entries[off] = value;
        Ok(())
    }

    /// Iterates all 1-based multi-indices in row-major (lexicographic) order.
    pub fn indices(&self) -> IndexIter {
        IndexIter {
            dims: self.dims.clone(),
            next: if self.entries.is_empty() {
                None
            } else {
                Some(vec![1; self.dims.len()])
            },
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::dim(format!(
                "cannot compare tensors of dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Elementwise `a*self + b*other`.
    pub fn linear_combination(
        &self,
        a: Complex64,
        other: &DenseTensor,
        b: Complex64,
    ) -> Result<DenseTensor> {
        if self.dims != other.dims {
            return Err(Error::dim("linear combination of mismatched dims"));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| a * x + b * y)
            .collect();
        DenseTensor::from_entries(&self.dims, entries)
    }

    pub fn scale(&self, a: Complex64) -> DenseTensor {
        DenseTensor {
            dims: self.dims.clone(),
            entries: self.entries.iter().map(|z| a * z).collect(),
        }
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        for (i, z) in self.entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite entry {z} at flat offset {i}"
                )));
            }
        }
        Ok(())
    }

    /// Writes the plain-text format: a `tensor N K_1 .. K_N` header followed
    /// by one `k_1 .. k_N re im` line per nonzero entry, in lexicographic
    /// index order.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "tensor {}", self.order())?;
        for d in &self.dims {
            write!(w, " {d}")?;
        }
        writeln!(w)?;
        for index in self.indices() {
            let z = self.get(&index)?;
            if z != Complex64::ZERO {
                for k in &index {
                    write!(w, "{k} ")?;
                }
                writeln!(w, "{:.17e} {:.17e}", z.re, z.im)?;
            }
        }
        Ok(())
    }

    /// Reads the plain-text format. Entry lines may appear in any order;
    /// duplicate indices are an error, missing indices are zero.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (header_no, header) = loop {
            match lines.next() {
                Some((no, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break (no + 1, line);
                    }
                }
                None => return Err(Error::parse(1, "empty tensor file")),
            }
        };
        let mut tok = header.split_whitespace();
        if tok.next() != Some("tensor") {
            return Err(Error::parse(header_no, "expected `tensor` header"));
        }
        let order: usize = tok
            .next()
            .ok_or_else(|| Error::parse(header_no, "missing order"))?
            .parse()
            .map_err(|_| Error::parse(header_no, "bad order"))?;
        let dims: Vec<usize> = tok
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(header_no, format!("bad dimension `{t}`")))
            })
            .collect::<Result<_>>()?;
        if dims.len() != order {
            return Err(Error::parse(
                header_no,
                format!("header declares order {order} but lists {} dims", dims.len()),
            ));
        }
        let mut tensor = DenseTensor::zeros(&dims)?;
        let mut seen = vec![false; tensor.len()];
        for (no, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != order + 2 {
                return Err(Error::parse(
                    no + 1,
                    format!("expected {} fields, got {}", order + 2, parts.len()),
                ));
            }
            let index: Vec<usize> = parts[..order]
                .iter()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::parse(no + 1, format!("bad index `{t}`")))
                })
                .collect::<Result<_>>()?;
            let re: f64 = parts[order]
                .parse()
                .map_err(|_| Error::parse(no + 1, "bad real part"))?;
            let im: f64 = parts[order + 1]
                .parse()
                .map_err(|_| Error::parse(no + 1, "bad imaginary part"))?;
            let off = tensor.offset(&index).map_err(|e| {
                Error::parse(no + 1, format!("{e}"))
            })?;
            if seen[off] {
                return Err(Error::parse(
                    no + 1,
                    format!("duplicate entry for index {index:?}"),
                ));
            }
            seen[off] = true;
            tensor.entries[off] = Complex64::new(re, im);
        }
        tensor.check_finite()?;
        Ok(tensor)
    }

    pub fn write_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_text(std::io::BufWriter::new(file))
    }

    pub fn read_from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(file))
    }
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::arg("tensor order must be positive"));
    }
    if dims.len() > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order: dims.len(),
            max: MAX_ORDER,
        });
    }
    if dims.contains(&0) {
        return Err(Error::arg(format!("zero mode dimension in {dims:?}")));
    }
    let len: u128 = dims.iter().map(|&d| d as u128).product();
    if len > MAX_DENSE_LEN as u128 {
        return Err(Error::TensorTooLarge {
            elements: len,
            cap: MAX_DENSE_LEN,
        });
    }
    Ok(len as usize)
}

/// Row-major iterator over 1-based multi-indices.
pub struct IndexIter {
    dims: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for IndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for j in (0..self.dims.len()).rev() {
            if succ[j] < self.dims[j] {
                succ[j] += 1;
                self.next = Some(succ);
                break;
            }
            succ[j] = 1;
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_offsets_match_iteration_order() {
        let mut t = DenseTensor::zeros(&[2, 3]).unwrap();
        let mut counter = 0.0;
        for idx in t.indices().collect::<Vec<_>>() {
            t.set(&idx, Complex64::new(counter, 0.0)).unwrap();
            counter += 1.0;
        }
        // entries must now be 0..5 in storage order
        let stored: Vec<f64> = t.entries().iter().map(|z| z.re).collect();
        assert_eq!(stored, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(t.get(&[2, 1]).unwrap(), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn bounds_are_one_based() {
        let t = DenseTensor::zeros(&[2, 2]).unwrap();
        assert!(t.get(&[0, 1]).is_err());
        assert!(t.get(&[1, 3]).is_err());
        assert!(t.get(&[2, 2]).is_ok());
        assert!(t.get(&[1]).is_err());
    }

    #[test]
    fn size_guards() {
        assert!(DenseTensor::zeros(&[]).is_err());
        assert!(DenseTensor::zeros(&[2; 9]).is_err());
        assert!(DenseTensor::zeros(&[0, 2]).is_err());
        // 10^7 cap: 216 of dim 6^3 fine, 500^3 > cap
        assert!(DenseTensor::zeros(&[500, 500, 500]).is_err());
    }

    #[test]
    fn rejects_non_finite_entries() {
        let bad = vec![Complex64::new(f64::NAN, 0.0); 4];
        assert!(DenseTensor::from_entries(&[2, 2], bad).is_err());
    }

    #[test]
    fn text_roundtrip_preserves_entries() {
        let mut t = DenseTensor::zeros(&[2, 3]).unwrap();
        t.set(&[1, 2], Complex64::new(0.5, -1.25)).unwrap();
        t.set(&[2, 3], Complex64::new(-3.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = DenseTensor::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.dims(), t.dims());
        assert_eq!(back.max_abs_diff(&t).unwrap(), 0.0);
    }

    #[test]
    fn reader_accepts_any_order_and_rejects_duplicates() {
        let text = "tensor 2 2 2\n2 1 1.0 0.0\n1 2 2.0 0.0\n";
        let t = DenseTensor::read_text(text.as_bytes()).unwrap();
        assert_eq!(t.get(&[2, 1]).unwrap().re, 1.0);
        assert_eq!(t.get(&[1, 2]).unwrap().re, 2.0);

        let dup = "tensor 2 2 2\n1 2 1.0 0.0\n1 2 2.0 0.0\n";
        assert!(DenseTensor::read_text(dup.as_bytes()).is_err());
    }

    #[test]
    fn writer_emits_lexicographic_nonzeros() {
        let mut t = DenseTensor::zeros(&[2, 2]).unwrap();
        t.set(&[2, 1], Complex64::new(1.0, 0.0)).unwrap();
        t.set(&[1, 2], Complex64::new(1.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1 2 "));
        assert!(lines[2].starts_with("2 1 "));
    }
}
