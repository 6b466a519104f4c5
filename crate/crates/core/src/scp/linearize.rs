/// `constant + coeff_y·y + coeff_z·z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineForm {
    pub coeff_y: f64,
    pub coeff_z: f64,
    pub constant: f64,
}

impl AffineForm {
    pub fn eval(&self, y: f64, z: f64) -> f64 {
        // `constant` cancels `coeff_y·y_hat` exactly, so at the expansion
        // point this returns `(d·y_hat)·z_hat` bit for bit
        (self.constant + self.coeff_y * y) + self.coeff_z * z
    }
}

/// First-order expansion of `h(y, z) = d·y·z` around `(y_hat, z_hat)`:
/// `d·(z_hat·y + y_hat·z - y_hat·z_hat)`. The error is exactly
/// `d·(y - y_hat)·(z - z_hat)`.
pub fn linearize_h(d: f64, y_hat: f64, z_hat: f64) -> AffineForm {
    AffineForm {
        coeff_y: d * z_hat,
        coeff_z: d * y_hat,
        constant: -(d * z_hat * y_hat),
    }
}
