use nalgebra::DMatrix;

/// `dst += alpha · src`
pub(crate) fn add_scaled(dst: &mut DMatrix<f64>, alpha: f64, src: &DMatrix<f64>) {
    debug_assert_eq!(dst.shape(), src.shape());
    for (d, s) in dst.as_mut_slice().iter_mut().zip(src.as_slice()) {
        *d += alpha * s;
    }
}
