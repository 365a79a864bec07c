use crate::error::{input, Result};

/// Right-hand sides of the two power triangle inequalities
///
/// `d(a,b)^z <= (1+eps)^(z-1) d(a,c)^z + ((1+eps)/eps)^(z-1) d(b,c)^z`
///
/// `|d(a,b)^z - d(a,c)^z| <= eps d(a,c)^z + ((z+eps)/eps)^(z-1) d(b,c)^z`
pub fn power_triangle_bound(dab: f64, dac: f64, dbc: f64, z: u32, eps: f64) -> Result<(f64, f64)> {
    if z == 0 || !(eps > 0.0) {
        return input("need z >= 1 and eps > 0");
    }
    for v in [dab, dac, dbc] {
        if !(v.is_finite() && v >= 0.0) {
            return input("distances must be finite and nonnegative");
        }
    }
    let slack = 1e-9;
    if dab > dac + dbc + slack || dac > dab + dbc + slack || dbc > dab + dac + slack {
        return input("distances violate the triangle inequality");
    }
    let zf = z as f64;
    let e = (z - 1) as i32;
    let b1 = (1.0 + eps).powi(e) * dac.powi(z as i32) + ((1.0 + eps) / eps).powi(e) * dbc.powi(z as i32);
    let b2 = eps * dac.powi(z as i32) + ((zf + eps) / eps).powi(e) * dbc.powi(z as i32);
    Ok((b1, b2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_and_z1() {
        let (b1, b2) = power_triangle_bound(3.0, 3.0, 0.0, 2, 0.1).unwrap();
        assert!(9.0 <= b1);
        assert!(b2 >= 0.0);
        let (b1, _) = power_triangle_bound(2.0, 1.5, 1.0, 1, 0.3).unwrap();
        assert_eq!(b1, 2.5);
        assert!(power_triangle_bound(5.0, 1.0, 1.0, 2, 0.1).is_err());
    }
}
