mod common;

use std::io::Cursor;

use common::fixture;
use image::{ImageFormat, RgbImage};
use proptest::prelude::*;
use webhouse::extract::{extract_image, extract_links, extract_text, image_meta};

#[derive(serde::Deserialize)]
struct ImageOracle {
    file: String,
    tool_format: String,
    width: u32,
    height: u32,
}

#[test]
fn image_dimensions_match_oracle() {
    let mut reader = csv::Reader::from_path(fixture("images/oracle.csv")).unwrap();
    let mut n = 0;
    for row in reader.deserialize::<ImageOracle>() {
        let row = row.unwrap();
        let meta = extract_image(&fixture("images").join(&row.file)).unwrap();
        assert_eq!(
            (meta.width, meta.length),
            (row.width, row.height),
            "{}",
            row.file
        );
        assert!(
            meta.format.eq_ignore_ascii_case(&row.tool_format),
            "{} is {}",
            row.file,
            meta.format
        );
        n += 1;
    }
    assert!(n >= 5);
}

#[derive(serde::Deserialize)]
struct TextOracle {
    file: String,
    nb_char: u64,
    nb_lines: u64,
}

#[test]
fn text_metrics_match_hand_counts() {
    let mut reader = csv::Reader::from_path(fixture("text/oracle.csv")).unwrap();
    for row in reader.deserialize::<TextOracle>() {
        let row = row.unwrap();
        let t = extract_text(&fixture("text").join(&row.file)).unwrap();
        assert_eq!(
            (t.nb_char, t.nb_lines),
            (row.nb_char, row.nb_lines),
            "{}",
            row.file
        );
    }
}

#[test]
fn html_fixture_links() {
    let html = std::fs::read_to_string(fixture("composite/page.html")).unwrap();
    assert_eq!(
        extract_links(&html),
        ["style.css", "http://example.org/beach", "wave.png"]
    );
}

fn encode(w: u32, h: u32, format: ImageFormat) -> Vec<u8> {
    let img = RgbImage::from_fn(w, h, |x, y| image::Rgb([(x * 7) as u8, (y * 3) as u8, 90]));
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, format).unwrap();
    out.into_inner()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn headers_agree_with_encoder(w in 1u32..300, h in 1u32..300, f in 0usize..3) {
        let format = [ImageFormat::Png, ImageFormat::Gif, ImageFormat::Jpeg][f];
        let meta = image_meta(&encode(w, h, format)).unwrap();
        prop_assert_eq!((meta.width, meta.length), (w, h));
    }
}
