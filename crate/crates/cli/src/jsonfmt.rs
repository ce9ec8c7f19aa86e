//! JSON shapes for numeric output: complex numbers as [re, im], matrices as
//! arrays of rows.

use maxsym::C64;
use nalgebra::{Dim, Matrix, RawStorage};
use serde_json::{json, Value};

pub fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn cmatrix<R: Dim, C: Dim, S: RawStorage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> Value {
    Value::Array(m.row_iter().map(|r| Value::Array(r.iter().map(|z| complex(*z)).collect())).collect())
}

pub fn cvector<R: Dim, S: RawStorage<C64, R>>(v: &Matrix<C64, R, nalgebra::U1, S>) -> Value {
    Value::Array(v.iter().map(|z| complex(*z)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Vector3};

    #[test]
    fn shapes() {
        let m = Matrix2::new(C64::new(1.0, 2.0), C64::new(3.0, 0.0), C64::new(0.0, -1.0), C64::new(5.0, 6.0));
        assert_eq!(cmatrix(&m), json!([[[1.0, 2.0], [3.0, 0.0]], [[0.0, -1.0], [5.0, 6.0]]]));
        let v = Vector3::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.5));
        assert_eq!(cvector(&v), json!([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.5]]));
    }
}
