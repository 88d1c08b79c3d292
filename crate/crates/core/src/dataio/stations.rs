//! Transit station coordinates.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use super::{read_rows, DataError, FieldCtx};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Station {
    pub station_id: String,
    pub lat: f64,
    pub lon: f64,
}

/// The stations that define the catchment. May be empty at load time;
/// distance-based group assignment will refuse to run against an empty
/// set.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct StationSet {
    pub stations: Vec<Station>,
}

impl StationSet {
    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }
}

const STATION_HEADERS: &[&str] = &["station_id", "lat", "lon"];

pub fn load_stations(path: &Path) -> Result<StationSet, DataError> {
    let file = path.display().to_string();
    let mut stations = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, rec) in read_rows(path, STATION_HEADERS)? {
        let ctx = FieldCtx { file: &file, line };
        let station_id = ctx.nonempty("station_id", &rec[0])?;
        if !seen.insert(station_id.clone()) {
            return Err(DataError::DuplicateKey {
                file: file.clone(),
                line,
                key: station_id,
            });
        }
        let lat = ctx.f64("lat", &rec[1])?;
        let lon = ctx.f64("lon", &rec[2])?;
        if !(-90.0..=90.0).contains(&lat) {
            return Err(ctx.bad(format!("lat {lat} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(ctx.bad(format!("lon {lon} outside [-180, 180]")));
        }
        stations.push(Station {
            station_id,
            lat,
            lon,
        });
    }
    stations.sort_by(|a, b| a.station_id.cmp(&b.station_id));
    Ok(StationSet { stations })
}

pub fn write_stations(set: &StationSet, path: &Path) -> Result<(), DataError> {
    let mut text = String::from("station_id,lat,lon\n");
    for s in &set.stations {
        text.push_str(&format!("{},{},{}\n", s.station_id, s.lat, s.lon));
    }
    std::fs::write(path, text).map_err(|e| DataError::WriteIo {
        path: path.to_path_buf(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_station_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stations.csv");
        std::fs::write(
            &p,
            "station_id,lat,lon\nS1,34.018,-118.283\nS2,34.026,-118.275\n\
             S3,34.033,-118.267\nS4,34.040,-118.259\nS5,34.047,-118.251\nS6,34.054,-118.243\n",
        )
        .unwrap();
        let set = load_stations(&p).unwrap();
        assert_eq!(set.len(), 6);
        assert_eq!(set.stations[0].station_id, "S1");
    }

    #[test]
    fn latitude_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stations.csv");
        std::fs::write(&p, "station_id,lat,lon\nS1,95.0,-118.283\n").unwrap();
        match load_stations(&p) {
            Err(DataError::MalformedRow {
                line: 2, reason, ..
            }) => {
                assert!(reason.contains("lat"), "{reason}")
            }
            other => panic!("expected malformed row, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_loads_as_empty_set() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stations.csv");
        std::fs::write(&p, "station_id,lat,lon\n").unwrap();
        let set = load_stations(&p).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn station_round_trip() {
        let set = StationSet {
            stations: vec![
                Station {
                    station_id: "A".into(),
                    lat: 34.0181,
                    lon: -118.2831,
                },
                Station {
                    station_id: "B".into(),
                    lat: 34.0269,
                    lon: -118.2755,
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stations.csv");
        write_stations(&set, &p).unwrap();
        assert_eq!(load_stations(&p).unwrap(), set);
    }
}
