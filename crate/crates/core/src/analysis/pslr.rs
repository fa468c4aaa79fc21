use crate::error::{IsacError, Result};
use crate::estimators::Periodogram;

/// Peak-to-sidelobe ratio in dB.
///
/// The sidelobe is the largest value more than `mainlobe_halfwidth` bins
/// (circularly) from the global maximum. Returns +∞ when every sidelobe bin
/// is zero.
pub fn pslr(p: &Periodogram, mainlobe_halfwidth: usize) -> Result<f64> {
    let main_bin = p.argmax();
    let main = p.values()[main_bin];
    if main == 0.0 {
        return Err(IsacError::InvalidArgument(
            "spectrum is identically zero".into(),
        ));
    }
    let side = p
        .values()
        .iter()
        .enumerate()
        .filter(|&(i, _)| p.circular_distance(i, main_bin) > mainlobe_halfwidth)
        .map(|(_, &v)| v)
        .reduce(f64::max)
        .ok_or(IsacError::NoSidelobes)?;
    if side == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (main / side).log10())
}

/// [`pslr`] with the periodogram's own first-null halfwidth.
pub fn pslr_default(p: &Periodogram) -> Result<f64> {
    pslr(p, p.mainlobe_halfwidth())
}
