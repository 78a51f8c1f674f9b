use rand::Rng;

use crate::codes::LinearCode;
use crate::field::{Field, FieldElement};

use super::ProtocolError;

/// A file: `β` stripes of `k` message symbols each.
pub type File = Vec<Vec<FieldElement>>;

/// Coded storage `y[i][b][s] = (x_b^i · G)_s` over all physical servers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Storage {
    field: Field,
    y: Vec<Vec<Vec<FieldElement>>>,
}

impl Storage {
    pub fn encode(code: &LinearCode, files: &[File]) -> Result<Storage, ProtocolError> {
        if files.is_empty() {
            return Err(ProtocolError::FileShape("no files".into()));
        }
        let beta = files[0].len();
        let mut y = Vec::with_capacity(files.len());
        for (i, file) in files.iter().enumerate() {
            if file.len() != beta || beta == 0 {
                return Err(ProtocolError::FileShape(format!(
                    "file {} has {} stripes, expected {beta}",
                    i + 1,
                    file.len()
                )));
            }
            let mut stripes = Vec::with_capacity(beta);
            for stripe in file {
                if stripe.len() != code.k() || stripe.iter().any(|e| e.field() != code.field()) {
                    return Err(ProtocolError::FileShape(format!(
                        "file {} stripe must hold {} symbols of {}",
                        i + 1,
                        code.k(),
                        code.field()
                    )));
                }
                stripes.push(code.encode(stripe)?);
            }
            y.push(stripes);
        }
        Ok(Storage { field: code.field(), y })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn beta(&self) -> usize {
        self.y[0].len()
    }

    pub fn servers(&self) -> usize {
        self.y[0][0].len()
    }

    pub fn symbol(&self, file: usize, stripe: usize, server: usize) -> FieldElement {
        self.y[file][stripe][server]
    }

    /// `(y_{b,s}^1, …, y_{b,s}^m)`: what server `s` holds for stripe `b`.
    pub fn server_column(&self, stripe: usize, server: usize) -> Vec<FieldElement> {
        self.y.iter().map(|f| f[stripe][server]).collect()
    }

    /// Replaces the content of one file (used for paired experiments).
    pub fn with_file(&self, code: &LinearCode, index: usize, file: &File) -> Result<Storage, ProtocolError> {
        let single = Storage::encode(code, std::slice::from_ref(file))?;
        let mut out = self.clone();
        out.y[index] = single.y.into_iter().next().expect("one file");
        Ok(out)
    }
}

/// `m` uniformly random files of `beta` stripes with `k` symbols.
pub fn random_files<R: Rng + ?Sized>(field: Field, k: usize, m: usize, beta: usize, rng: &mut R) -> Vec<File> {
    let q = field.order() as u16;
    (0..m)
        .map(|_| {
            (0..beta)
                .map(|_| (0..k).map(|_| field.element(rng.gen_range(0..q)).expect("in range")).collect())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::example_rs_4_2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rows_are_codewords() {
        let code = example_rs_4_2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let files = random_files(code.field(), 2, 3, 2, &mut rng);
        let st = Storage::encode(&code, &files).unwrap();
        assert_eq!((st.m(), st.beta(), st.servers()), (3, 2, 4));
        for (i, f) in files.iter().enumerate() {
            for (b, x) in f.iter().enumerate() {
                let row: Vec<_> = (0..4).map(|s| st.symbol(i, b, s)).collect();
                assert_eq!(row, code.encode(x).unwrap());
                // systematic code: first two symbols are the message
                assert_eq!(&row[..2], &x[..]);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let code = example_rs_4_2();
        let f = code.field();
        assert!(Storage::encode(&code, &[]).is_err());
        assert!(Storage::encode(&code, &[vec![vec![f.one()]]]).is_err());
        assert!(Storage::encode(&code, &[vec![vec![f.one(), f.one()]], vec![]]).is_err());
    }
}
