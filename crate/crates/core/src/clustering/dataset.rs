use crate::corpus::Corpus;

/// Dense row-major point matrix.
#[derive(Debug, Clone)]
pub struct Dataset {
    data: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn new(data: Vec<f64>, dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        assert_eq!(data.len() % dim, 0, "data length must be a multiple of dim");
        Dataset { data, dim }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(1, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "ragged rows");
            data.extend_from_slice(row);
        }
        Dataset::new(data, dim)
    }

    pub fn from_corpus(corpus: &Corpus, normalize: bool) -> Self {
        let mut ds = Dataset::new(corpus.embedding_matrix(), corpus.dim());
        if normalize {
            ds.normalize_rows();
        }
        ds
    }

    pub fn normalize_rows(&mut self) {
        for row in self.data.chunks_mut(self.dim) {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
