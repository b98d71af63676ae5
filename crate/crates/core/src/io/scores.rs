//! Score files: header `video_id,class_0,...,class_{K-1}`, then one row per
//! video with nine significant digits per score.

use crate::fusion::VideoPrediction;
use crate::{Error, Result, ScoreVector};

/// `x` with nine significant digits, plain decimal notation.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (8 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.999999999 -> 10.00000000
    let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if digits > 9 && decimals > 0 {
        let d = decimals - 1;
        format!("{x:.d$}")
    } else {
        s
    }
}

pub fn write_scores(predictions: &[VideoPrediction]) -> Result<String> {
    let k = predictions.first().map_or(0, |p| p.scores.classes());
    let mut out = String::from("video_id");
    for c in 0..k {
        out.push_str(&format!(",class_{c}"));
    }
    out.push('\n');
    for p in predictions {
        if p.video_id.contains([',', '\n']) {
            return Err(Error::InvalidParameter(format!(
                "video id `{}` cannot be written to CSV",
                p.video_id
            )));
        }
        if p.scores.classes() != k {
            return Err(Error::DimensionMismatch("score rows differ in length".into()));
        }
        out.push_str(&p.video_id);
        for s in p.scores.scores() {
            out.push(',');
            out.push_str(&format_significant(*s));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Rows are renormalized, absorbing the rounding of the text form.
pub fn read_scores(text: &str) -> Result<Vec<VideoPrediction>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::format(0, "empty score file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"video_id")
        || cols[1..].iter().enumerate().any(|(i, c)| *c != format!("class_{i}"))
        || cols.len() < 2
    {
        return Err(Error::format(0, format!("bad score header `{header}`")));
    }
    let k = cols.len() - 1;
    let mut out = Vec::new();
    let mut offset = header.len() + 1;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != k + 1 {
            return Err(Error::format(offset, format!("expected {} fields", k + 1)));
        }
        let scores = fields[1..]
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::format(offset, format!("bad score: {e}")))?;
        out.push(VideoPrediction {
            video_id: fields[0].to_string(),
            scores: ScoreVector::normalized(scores).map_err(|e| Error::format(offset, e.to_string()))?,
        });
        offset += line.len() + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.6), "0.600000000");
        assert_eq!(format_significant(0.123456789123), "0.123456789");
        assert_eq!(format_significant(1.0), "1.00000000");
        assert_eq!(format_significant(0.000123456789123), "0.000123456789");
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(0.99999999999), "1.00000000");
    }

    #[test]
    fn round_trip() {
        let preds = vec![
            VideoPrediction {
                video_id: "a/1".into(),
                scores: ScoreVector::new(vec![0.25, 0.75]).unwrap(),
            },
            VideoPrediction {
                video_id: "b/2".into(),
                scores: ScoreVector::new(vec![1.0, 0.0]).unwrap(),
            },
        ];
        let text = write_scores(&preds).unwrap();
        assert!(text.starts_with("video_id,class_0,class_1\n"));
        assert_eq!(read_scores(&text).unwrap(), preds);
    }

    #[test]
    fn bad_files() {
        assert!(read_scores("").is_err());
        assert!(read_scores("id,class_0\n").is_err());
        assert!(read_scores("video_id,class_0,class_1\nx,0.5\n").is_err());
        assert!(read_scores("video_id,class_0\nx,abc\n").is_err());
    }
}
