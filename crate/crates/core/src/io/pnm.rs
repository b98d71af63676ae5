//! Binary PGM (P5) and PPM (P6), 8-bit only.

use crate::{ByteImage, Error, Result, RgbImage};

pub fn write_pgm(img: &ByteImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn read_pgm(bytes: &[u8]) -> Result<ByteImage> {
    let (w, h, offset) = parse_header(bytes, b"P5")?;
    let payload = take_payload(bytes, offset, w * h)?;
    ByteImage::new(w, h, payload.to_vec())
}

pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let (w, h, offset) = parse_header(bytes, b"P6")?;
    let payload = take_payload(bytes, offset, 3 * w * h)?;
    RgbImage::new(w, h, payload.to_vec())
}

/// Either kind of frame, as a real-valued gray raster.
pub fn read_frame(bytes: &[u8]) -> Result<crate::GrayImage> {
    match bytes.get(..2) {
        Some(b"P5") => Ok(read_pgm(bytes)?.to_gray()),
        Some(b"P6") => Ok(read_ppm(bytes)?.to_gray()),
        _ => Err(Error::format(0, "expected a P5 or P6 image")),
    }
}

fn take_payload(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8]> {
    let available = bytes.len().saturating_sub(offset);
    if available != len {
        return Err(Error::format(
            offset,
            format!("pixel payload is {available} bytes, header implies {len}"),
        ));
    }
    Ok(&bytes[offset..])
}

/// Returns width, height and the offset of the first pixel byte.
fn parse_header(bytes: &[u8], magic: &[u8; 2]) -> Result<(usize, usize, usize)> {
    if bytes.get(..2) != Some(&magic[..]) {
        return Err(Error::format(
            0,
            format!("expected magic {}", String::from_utf8_lossy(magic)),
        ));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (k, name) in ["width", "height", "maxval"].iter().enumerate() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(start, format!("missing {name}")));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        fields[k] = text
            .parse()
            .map_err(|_| Error::format(start, format!("{name} `{text}` out of range")))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format(pos, "expected one whitespace byte after maxval"));
    }
    let [w, h, maxval] = fields;
    if w == 0 || h == 0 {
        return Err(Error::format(2, format!("bad dimensions {w}x{h}")));
    }
    if maxval != 255 {
        return Err(Error::format(pos, format!("unsupported maxval {maxval}, only 255")));
    }
    Ok((w, h, pos + 1))
}
