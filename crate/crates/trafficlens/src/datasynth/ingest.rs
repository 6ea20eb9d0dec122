//! File ingestion and emission: traffic CSV, accident CSV, and PGM/PPM
//! image directories partitioned by class-named subdirectories.
//!
//! Every rejection names the file and line (or file) it came from. Numeric
//! CSV fields are written in shortest round-trip form, so write-then-read
//! reproduces the values exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::SynthError;
use crate::datamodel::{AccidentRecord, FeatureValue, ImageClass, ImageSample, TrafficSeries};
use crate::vision::resize_bilinear;

const SEVERITY_COLUMN: &str = "severity";

pub fn save_traffic_csv(path: &Path, series: &TrafficSeries) -> Result<(), SynthError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["timestamp_hour", "volume"])?;
    for (i, value) in series.values().iter().enumerate() {
        writer.write_record([(series.start_hour() + i as i64).to_string(), value.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load_traffic_csv(path: &Path) -> Result<TrafficSeries, SynthError> {
    let name = path.display();
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    if headers.len() != 2 || &headers[0] != "timestamp_hour" || &headers[1] != "volume" {
        return Err(SynthError::Schema(format!(
            "{name}: expected header timestamp_hour,volume, got {headers:?}"
        )));
    }

    let mut start_hour = None;
    let mut expected_ts = 0i64;
    let mut values = Vec::new();
    for row in reader.records() {
        let record = row.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(SynthError::Parse(format!(
                "{name} line {line}: {} fields, expected 2",
                record.len()
            )));
        }
        let ts: i64 = record[0].parse().map_err(|_| {
            SynthError::Parse(format!("{name} line {line}: bad timestamp {:?}", &record[0]))
        })?;
        let volume: f64 = record[1].parse().map_err(|_| {
            SynthError::Parse(format!("{name} line {line}: bad volume {:?}", &record[1]))
        })?;
        if !volume.is_finite() || volume < 0.0 {
            return Err(SynthError::Parse(format!(
                "{name} line {line}: volume must be finite and non-negative, got {volume}"
            )));
        }
        match start_hour {
            None => {
                start_hour = Some(ts);
                expected_ts = ts;
            }
            Some(_) if ts != expected_ts => {
                return Err(SynthError::Gap(format!(
                    "{name} line {line}: timestamp {ts}, expected consecutive {expected_ts}"
                )));
            }
            Some(_) => {}
        }
        expected_ts += 1;
        values.push(volume);
    }
    let start_hour =
        start_hour.ok_or_else(|| SynthError::Schema(format!("{name}: no data rows")))?;
    Ok(TrafficSeries::new(start_hour, values)?)
}

pub fn save_accidents_csv(path: &Path, records: &[AccidentRecord]) -> Result<(), SynthError> {
    let Some(first) = records.first() else {
        return Err(SynthError::Schema("cannot write an empty accident dataset".into()));
    };
    let names: Vec<&String> = first.features.keys().collect();
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    header.push(SEVERITY_COLUMN);
    writer.write_record(&header)?;

    for (i, record) in records.iter().enumerate() {
        if record.features.len() != names.len()
            || !record.features.keys().zip(&names).all(|(a, b)| &a == b)
        {
            return Err(SynthError::Schema(format!(
                "record {i} does not share the dataset feature names"
            )));
        }
        let mut row: Vec<String> = Vec::with_capacity(names.len() + 1);
        for value in record.features.values() {
            row.push(match value {
                FeatureValue::Numeric(v) => v.to_string(),
                FeatureValue::Categorical(tok) => tok.clone(),
                FeatureValue::Missing => String::new(),
            });
        }
        row.push(record.severity.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Load accident records. Empty fields become [`FeatureValue::Missing`];
/// fields that parse as finite numbers become numeric, everything else is a
/// categorical token.
pub fn load_accidents_csv(path: &Path) -> Result<Vec<AccidentRecord>, SynthError> {
    let name = path.display();
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let columns: Vec<String> = headers.iter().map(str::to_string).collect();
    if columns.last().map(String::as_str) != Some(SEVERITY_COLUMN) {
        return Err(SynthError::Schema(format!(
            "{name}: the final column must be {SEVERITY_COLUMN:?}, got {:?}",
            columns.last()
        )));
    }
    let feature_names = &columns[..columns.len() - 1];

    let mut records = Vec::new();
    for row in reader.records() {
        let record = row.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != columns.len() {
            return Err(SynthError::Parse(format!(
                "{name} line {line}: {} fields, expected {}",
                record.len(),
                columns.len()
            )));
        }
        let mut features = BTreeMap::new();
        for (column, raw) in feature_names.iter().zip(record.iter()) {
            let value = if raw.is_empty() {
                FeatureValue::Missing
            } else if let Ok(v) = raw.parse::<f64>() {
                if !v.is_finite() {
                    return Err(SynthError::Parse(format!(
                        "{name} line {line}: non-finite value {raw:?} in column {column:?}"
                    )));
                }
                FeatureValue::Numeric(v)
            } else {
                FeatureValue::Categorical(raw.to_string())
            };
            features.insert(column.clone(), value);
        }
        let severity_token = &record[columns.len() - 1];
        let severity = crate::datamodel::SeverityLabel::parse(severity_token).map_err(|_| {
            SynthError::Parse(format!(
                "{name} line {line}: bad severity {severity_token:?}"
            ))
        })?;
        records.push(AccidentRecord { features, severity });
    }
    if records.is_empty() {
        return Err(SynthError::Schema(format!("{name}: no data rows")));
    }
    Ok(records)
}

/// Write images as binary PGM (P5) files under class-named subdirectories.
pub fn save_image_dir(path: &Path, samples: &[ImageSample]) -> Result<(), SynthError> {
    for class in ImageClass::ALL {
        fs::create_dir_all(path.join(class.name()))?;
    }
    let mut counters = [0usize; 4];
    for sample in samples {
        if sample.channels() != 1 {
            return Err(SynthError::Schema("PGM output requires grayscale samples".into()));
        }
        let index = counters[sample.label.index()];
        counters[sample.label.index()] += 1;
        let file = path.join(sample.label.name()).join(format!("img_{index:05}.pgm"));
        let mut bytes =
            format!("P5\n{} {}\n255\n", sample.width(), sample.height()).into_bytes();
        bytes.extend(sample.pixels().iter().map(|p| (p * 255.0).round() as u8));
        fs::write(file, bytes)?;
    }
    Ok(())
}

/// Load a class-partitioned image directory. P6 color images are reduced to
/// luma; anything that is not 32x32 is resampled bilinearly on ingestion.
pub fn load_image_dir(path: &Path) -> Result<Vec<ImageSample>, SynthError> {
    let mut class_dirs = Vec::new();
    for entry in fs::read_dir(path)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let dir_name = entry.file_name().to_string_lossy().into_owned();
        let class = ImageClass::parse(&dir_name).map_err(|_| {
            SynthError::Schema(format!(
                "{}: unknown class directory {dir_name:?}",
                path.display()
            ))
        })?;
        class_dirs.push((class, entry.path()));
    }
    if class_dirs.is_empty() {
        return Err(SynthError::Schema(format!(
            "{}: no class directories found",
            path.display()
        )));
    }
    class_dirs.sort_by_key(|(class, _)| class.index());

    let mut samples = Vec::new();
    for (class, dir) in class_dirs {
        let mut files: Vec<_> = fs::read_dir(&dir)?
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for file in files {
            let bytes = fs::read(&file)?;
            let gray = parse_netpbm_to_gray(&bytes, &file)?;
            samples.push(ImageSample::new(32, 32, 1, gray, class)?);
        }
    }
    Ok(samples)
}

/// Parse binary P5/P6, convert to grayscale in [0,1], resample to 32x32.
fn parse_netpbm_to_gray(bytes: &[u8], file: &Path) -> Result<Vec<f64>, SynthError> {
    let name = file.display();
    let bad = |msg: &str| SynthError::Parse(format!("{name}: {msg}"));

    if bytes.len() < 2 {
        return Err(bad("file too short for a netpbm header"));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1usize,
        b"P6" => 3usize,
        _ => return Err(bad("expected binary PGM (P5) or PPM (P6) magic")),
    };

    // Header: three whitespace-separated integers, # comments allowed.
    let mut cursor = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        while cursor < bytes.len() {
            match bytes[cursor] {
                b' ' | b'\t' | b'\r' | b'\n' => cursor += 1,
                b'#' => {
                    while cursor < bytes.len() && bytes[cursor] != b'\n' {
                        cursor += 1;
                    }
                }
                _ => break,
            }
        }
        let start = cursor;
        while cursor < bytes.len() && bytes[cursor].is_ascii_digit() {
            cursor += 1;
        }
        if start == cursor {
            return Err(bad("malformed netpbm header"));
        }
        *field = std::str::from_utf8(&bytes[start..cursor])
            .unwrap()
            .parse()
            .map_err(|_| bad("header value out of range"))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(bad("image dimensions must be positive"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit netpbm images are supported"));
    }
    cursor += 1; // single whitespace byte after maxval

    let expected = width * height * channels;
    let data = bytes.get(cursor..cursor + expected).ok_or_else(|| {
        bad(&format!("truncated pixel data: wanted {expected} bytes"))
    })?;

    let scale = 1.0 / maxval as f64;
    let gray: Vec<f64> = match channels {
        1 => data.iter().map(|b| *b as f64 * scale).collect(),
        _ => data
            .chunks_exact(3)
            .map(|px| {
                (0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64) * scale
            })
            .collect(),
    };
    if (height, width) == (32, 32) {
        Ok(gray)
    } else {
        Ok(resize_bilinear(&gray, height, width, 32, 32))
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>, SynthError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> SynthError {
    SynthError::Parse(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasynth::{
        gen_accidents, gen_images, gen_traffic, AccidentGenSpec, ImageGenSpec, TrafficGenSpec,
    };

    #[test]
    fn traffic_csv_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traffic.csv");
        let series =
            gen_traffic(&TrafficGenSpec { n: 200, ..TrafficGenSpec::default() }).unwrap();
        save_traffic_csv(&path, &series).unwrap();
        let loaded = load_traffic_csv(&path).unwrap();
        assert_eq!(series, loaded);
    }

    #[test]
    fn non_numeric_volume_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let mut rows = vec!["timestamp_hour,volume".to_string()];
        rows.extend((0..20).map(|t| format!("{t},{}", 10 + t)));
        rows[16] = "15,not-a-number".into(); // line 17 of the file
        fs::write(&path, rows.join("\n")).unwrap();
        match load_traffic_csv(&path) {
            Err(SynthError::Parse(msg)) => {
                assert!(msg.contains("line 17"), "message should name line 17: {msg}")
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn timestamp_gap_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gap.csv");
        fs::write(&path, "timestamp_hour,volume\n0,1.0\n1,2.0\n3,4.0\n").unwrap();
        assert!(matches!(load_traffic_csv(&path), Err(SynthError::Gap(msg)) if msg.contains("line 4")));
    }

    #[test]
    fn accident_csv_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("accidents.csv");
        let records =
            gen_accidents(&AccidentGenSpec { n: 50, ..AccidentGenSpec::default() }).unwrap();
        save_accidents_csv(&path, &records).unwrap();
        let loaded = load_accidents_csv(&path).unwrap();
        assert_eq!(records, loaded);
    }

    #[test]
    fn missing_severity_column_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("no_sev.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(load_accidents_csv(&path), Err(SynthError::Schema(_))));
    }

    #[test]
    fn empty_fields_load_as_missing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing.csv");
        fs::write(&path, "age,weather,severity\n33,,Low\n,rain,High\n").unwrap();
        let records = load_accidents_csv(&path).unwrap();
        assert_eq!(records[0].features["weather"], FeatureValue::Missing);
        assert_eq!(records[1].features["age"], FeatureValue::Missing);
        assert_eq!(records[1].features["weather"], FeatureValue::Categorical("rain".into()));
    }

    #[test]
    fn image_dir_round_trips_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let samples = gen_images(&ImageGenSpec { n: 12, ..ImageGenSpec::default() }).unwrap();
        save_image_dir(dir.path(), &samples).unwrap();
        let loaded = load_image_dir(dir.path()).unwrap();
        assert_eq!(loaded.len(), samples.len());

        // Files come back sorted class-by-class; match them up by label
        // order within class.
        let mut by_class: Vec<Vec<&ImageSample>> = vec![Vec::new(); 4];
        for s in &samples {
            by_class[s.label.index()].push(s);
        }
        let mut cursor = [0usize; 4];
        for got in &loaded {
            let k = got.label.index();
            let want = by_class[k][cursor[k]];
            cursor[k] += 1;
            let worst = got
                .pixels()
                .iter()
                .zip(want.pixels())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 0.5 / 255.0 + 1e-12, "quantization error {worst}");
        }
    }

    #[test]
    fn unknown_class_directory_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("lorries")).unwrap();
        assert!(matches!(load_image_dir(dir.path()), Err(SynthError::Schema(_))));
    }

    #[test]
    fn corrupted_files_are_rejected_not_crashed_on() {
        let dir = tempfile::tempdir().unwrap();

        // A small corpus of deliberately broken inputs.
        let cases: Vec<(&str, Vec<u8>)> = vec![
            ("empty.csv", b"".to_vec()),
            ("header_only.csv", b"timestamp_hour,volume\n".to_vec()),
            ("wrong_header.csv", b"time,count\n0,1\n".to_vec()),
            ("negative.csv", b"timestamp_hour,volume\n0,-5\n".to_vec()),
            ("nan.csv", b"timestamp_hour,volume\n0,NaN\n".to_vec()),
            ("ragged.csv", b"timestamp_hour,volume\n0,1.0\n1\n".to_vec()),
        ];
        for (name, bytes) in cases {
            let path = dir.path().join(name);
            fs::write(&path, bytes).unwrap();
            assert!(load_traffic_csv(&path).is_err(), "{name} should be rejected");
        }

        let img_root = dir.path().join("imgs");
        fs::create_dir_all(img_root.join("clear")).unwrap();
        let img_cases: Vec<(&str, Vec<u8>)> = vec![
            ("bad_magic.pgm", b"P2\n2 2\n255\n0 0 0 0".to_vec()),
            ("truncated.pgm", b"P5\n32 32\n255\nshort".to_vec()),
            ("no_header.pgm", b"P5".to_vec()),
            ("deep.pgm", b"P5\n2 2\n65535\n\0\0\0\0\0\0\0\0".to_vec()),
        ];
        for (name, bytes) in img_cases {
            fs::write(img_root.join("clear").join(name), bytes).unwrap();
            assert!(load_image_dir(&img_root).is_err(), "{name} should be rejected");
            fs::remove_file(img_root.join("clear").join(name)).unwrap();
        }
    }

    #[test]
    fn color_ppm_loads_as_luma_and_resizes() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("accident")).unwrap();
        // A 16x16 all-red PPM; luma of pure red is 0.299.
        let mut bytes = b"P6\n16 16\n255\n".to_vec();
        for _ in 0..16 * 16 {
            bytes.extend_from_slice(&[255, 0, 0]);
        }
        fs::write(dir.path().join("accident").join("red.ppm"), bytes).unwrap();
        let samples = load_image_dir(dir.path()).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].label, ImageClass::Accident);
        assert_eq!((samples[0].height(), samples[0].width()), (32, 32));
        for p in samples[0].pixels() {
            assert!((p - 0.299).abs() < 1e-9);
        }
    }
}
