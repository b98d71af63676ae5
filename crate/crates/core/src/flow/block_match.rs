use crate::{Error, FlowField, GrayImage, Result};

/// Exhaustive sum-of-absolute-differences block matching.
///
/// Every pixel gets the integer displacement within `search_radius` whose
/// `patch x patch` neighbourhood best matches `next`. Ties go to the smaller
/// displacement, then to the earlier candidate in row-major scan order
/// (`dy` outer, `dx` inner, both ascending). Borders are clamped.
pub fn block_match_flow(
    prev: &GrayImage,
    next: &GrayImage,
    patch: usize,
    search_radius: usize,
) -> Result<FlowField> {
    if patch < 3 || patch.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "patch must be odd and at least 3, got {patch}"
        )));
    }
    if search_radius == 0 {
        return Err(Error::InvalidParameter("search radius must be at least 1".into()));
    }
    if prev.width() != next.width() || prev.height() != next.height() {
        return Err(Error::DimensionMismatch(format!(
            "frames are {}x{} and {}x{}",
            prev.width(),
            prev.height(),
            next.width(),
            next.height()
        )));
    }

    let r = search_radius as isize;
    let mut candidates: Vec<(isize, isize)> = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            candidates.push((dx, dy));
        }
    }
    // stable sort keeps scan order among equal magnitudes
    candidates.sort_by_key(|&(dx, dy)| dx * dx + dy * dy);

    let (w, h) = (prev.width() as isize, prev.height() as isize);
    let half = (patch / 2) as isize;
    let clamp = |v: isize, hi: isize| v.clamp(0, hi - 1) as usize;
    let mut u = Vec::with_capacity((w * h) as usize);
    let mut v = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut best = (f64::INFINITY, 0isize, 0isize);
            for &(dx, dy) in &candidates {
                let mut sad = 0.0;
                for py in -half..=half {
                    for px in -half..=half {
                        let a = prev.at(clamp(x + px, w), clamp(y + py, h));
                        let b = next.at(clamp(x + px + dx, w), clamp(y + py + dy, h));
                        sad += (a - b).abs();
                    }
                    if sad >= best.0 {
                        break;
                    }
                }
                if sad < best.0 {
                    best = (sad, dx, dy);
                }
            }
            u.push(best.1 as f64);
            v.push(best.2 as f64);
        }
    }
    Ok(FlowField::from_parts(w as usize, h as usize, u, v))
}
