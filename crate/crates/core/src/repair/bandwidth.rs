use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

use super::RepairError;

fn check(k: usize, d: usize, m: usize) -> Result<u32, RepairError> {
    if k == 0 || m == 0 || d < k {
        return Err(RepairError::Inadmissible(format!(
            "k={k}, d={d}, m={m}: need k >= 1, m >= 1, d >= k"
        )));
    }
    u32::try_from((k - 1) * (d - k + 1)).map_err(|_| RepairError::Inadmissible("exponent overflow".into()))
}

/// Alignment repair bandwidth in units:
/// `(k-1)((m+1)/m)^N + (d-k+1)` with `N = (k-1)(d-k+1)`.
pub fn gamma_formula(k: usize, d: usize, m: usize) -> Result<BigRational, RepairError> {
    let n = check(k, d, m)?;
    let ratio = BigRational::new(BigInt::from(m + 1), BigInt::from(m));
    let pow: BigRational = if n == 0 { BigRational::one() } else { Pow::pow(ratio, n) };
    Ok(pow * BigInt::from(k - 1) + BigRational::from_integer(BigInt::from(d - k + 1)))
}

/// Total subsymbols downloaded by one alignment repair:
/// `(k-1)(m+1)^N + (d-k+1)m^N`.
pub fn alignment_download_subsymbols(k: usize, d: usize, m: usize) -> Result<BigInt, RepairError> {
    let n = check(k, d, m)?;
    Ok(BigInt::from(k - 1) * Pow::pow(BigInt::from(m + 1), n) + BigInt::from(d - k + 1) * Pow::pow(BigInt::from(m), n))
}

/// Fixed-point rendering of `r`, rounded half away from zero.
pub fn format_decimal(r: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = r * BigRational::from_integer(scale.clone());
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let rounded = if scaled < BigRational::from_integer(BigInt::from(0)) {
        -((-scaled) + half).floor()
    } else {
        (scaled + half).floor()
    }
    .to_integer();
    let sign = if rounded < BigInt::from(0) { "-" } else { "" };
    let abs = if rounded < BigInt::from(0) { -rounded } else { rounded };
    let int = &abs / &scale;
    if places == 0 {
        return format!("{sign}{int}");
    }
    let frac = &abs % &scale;
    format!("{sign}{int}.{frac:0>places$}")
}
