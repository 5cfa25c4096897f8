//! Cubic Hermite shape functions on an element of length `h`.
//!
//! Local ordering: `[value@left, slope@left, value@right, slope@right]`,
//! with `ξ ∈ [0, 1]` the reference coordinate. Derivatives are with
//! respect to physical `x = x_left + ξ·h`.

/// Value, first and second physical derivatives of the four shapes at `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeTable {
    pub value: [f64; 4],
    pub d1: [f64; 4],
    pub d2: [f64; 4],
}

pub fn shapes(xi: f64, h: f64) -> ShapeTable {
    let x2 = xi * xi;
    let x3 = x2 * xi;
    ShapeTable {
        value: [
            1.0 - 3.0 * x2 + 2.0 * x3,
            h * (xi - 2.0 * x2 + x3),
            3.0 * x2 - 2.0 * x3,
            h * (x3 - x2),
        ],
        d1: [
            (6.0 * x2 - 6.0 * xi) / h,
            1.0 - 4.0 * xi + 3.0 * x2,
            (6.0 * xi - 6.0 * x2) / h,
            3.0 * x2 - 2.0 * xi,
        ],
        d2: [
            (12.0 * xi - 6.0) / (h * h),
            (6.0 * xi - 4.0) / h,
            (6.0 - 12.0 * xi) / (h * h),
            (6.0 * xi - 2.0) / h,
        ],
    }
}

/// Local shape index for a node at `corner` (0 = left, 1 = right) carrying
/// derivative order `deriv` (0 = value, 1 = slope).
#[inline]
pub fn local_index(corner: usize, deriv: usize) -> usize {
    2 * corner + deriv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_interpolation_conditions() {
        let h = 0.37;
        let left = shapes(0.0, h);
        let right = shapes(1.0, h);
        let expect_left_val = [1.0, 0.0, 0.0, 0.0];
        let expect_left_d1 = [0.0, 1.0, 0.0, 0.0];
        let expect_right_val = [0.0, 0.0, 1.0, 0.0];
        let expect_right_d1 = [0.0, 0.0, 0.0, 1.0];
        for k in 0..4 {
            assert!((left.value[k] - expect_left_val[k]).abs() < 1e-15);
            assert!((left.d1[k] - expect_left_d1[k]).abs() < 1e-15);
            assert!((right.value[k] - expect_right_val[k]).abs() < 1e-15);
            assert!((right.d1[k] - expect_right_d1[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1.3;
        let eps = 1e-6;
        for &xi in &[0.1, 0.45, 0.8] {
            let s = shapes(xi, h);
            let p = shapes(xi + eps, h);
            let m = shapes(xi - eps, h);
            for k in 0..4 {
                let fd1 = (p.value[k] - m.value[k]) / (2.0 * eps * h);
                let fd2 = (p.d1[k] - m.d1[k]) / (2.0 * eps * h);
                assert!((fd1 - s.d1[k]).abs() < 1e-8);
                assert!((fd2 - s.d2[k]).abs() < 1e-7);
            }
        }
    }
}
