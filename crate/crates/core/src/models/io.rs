use serde::{Deserialize, Serialize};

use crate::{EdError, Mat, Result};

/// Matrix exchange format: `{"rows": r, "cols": c, "data": [row-major]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixFile {
    pub fn from_mat(m: &Mat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            data.extend(m.row(i).iter());
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_mat(&self) -> Result<Mat> {
        if self.data.len() != self.rows * self.cols {
            return Err(EdError::InvalidParameter(format!(
                "matrix declares {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(EdError::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Mat::from_row_slice(self.rows, self.cols, &self.data))
    }
}
