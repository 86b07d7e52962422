//! CSV forms of the feature table and the information-gain ranking.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::features::{FeatureRanking, FeatureVector, RankedFeature};
use crate::scenario::EventType;

const ID_COL: &str = "spec_id";
const LABEL_COL: &str = "class_label";
const EVENT_COL: &str = "event_type";

/// Labelled feature vectors with the event type of each row (for the
/// HIF-only slice of the evaluation).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub vectors: Vec<FeatureVector<f64>>,
    pub event_types: Vec<EventType>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidData(e.to_string())
}

/// Columns: `spec_id, class_label, event_type`, then the catalog in order.
pub fn write_features_csv(t: &FeatureTable) -> Result<Vec<u8>> {
    let Some(first) = t.vectors.first() else {
        return Err(Error::InvalidData("no feature vectors".into()));
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![ID_COL.to_string(), LABEL_COL.into(), EVENT_COL.into()];
    header.extend(first.names.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (fv, ev) in t.vectors.iter().zip(&t.event_types) {
        let label = fv
            .label
            .ok_or_else(|| Error::InvalidData(format!("vector {} has no label", fv.spec_id)))?;
        let mut rec = vec![fv.spec_id.to_string(), label.to_string(), ev.as_str().to_string()];
        rec.extend(fv.values.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::InvalidData(e.to_string()))
}

pub fn read_features_csv(bytes: &[u8]) -> Result<FeatureTable> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() < 4 || header.get(0) != Some(ID_COL) || header.get(1) != Some(LABEL_COL) || header.get(2) != Some(EVENT_COL) {
        return Err(Error::InvalidData(format!(
            "expected header {ID_COL},{LABEL_COL},{EVENT_COL},<features>"
        )));
    }
    let names: Arc<[String]> = header.iter().skip(3).map(str::to_string).collect::<Vec<_>>().into();
    let mut table = FeatureTable {
        vectors: Vec::new(),
        event_types: Vec::new(),
    };
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = line + 2;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let spec_id: u64 = field(0)
            .parse()
            .map_err(|e| Error::InvalidData(format!("line {row}: spec_id: {e}")))?;
        let label = field(1).parse().map_err(|e: Error| Error::InvalidData(format!("line {row}: {e}")))?;
        let event: EventType = field(2).parse().map_err(|e: Error| Error::InvalidData(format!("line {row}: {e}")))?;
        let values = (3..rec.len())
            .map(|i| {
                field(i)
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidData(format!("line {row}, column {}: {e}", header.get(i).unwrap_or("?"))))
            })
            .collect::<Result<Vec<_>>>()?;
        table.vectors.push(FeatureVector {
            spec_id,
            names: names.clone(),
            values,
            label: Some(label),
        });
        table.event_types.push(event);
    }
    Ok(table)
}

pub fn write_ranking_csv(r: &FeatureRanking) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "feature_name", "gain"]).map_err(csv_err)?;
    for (i, e) in r.entries.iter().enumerate() {
        w.write_record([(i + 1).to_string(), e.feature_name.clone(), e.gain.to_string()])
            .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::InvalidData(e.to_string()))
}

pub fn read_ranking_csv(bytes: &[u8]) -> Result<FeatureRanking> {
    let mut r = csv::Reader::from_reader(bytes);
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let gain = rec
            .get(2)
            .unwrap_or_default()
            .parse()
            .map_err(|e| Error::InvalidData(format!("ranking gain: {e}")))?;
        entries.push(RankedFeature {
            feature_name: rec.get(1).unwrap_or_default().to_string(),
            gain,
        });
    }
    Ok(FeatureRanking { entries })
}
