//! Drone flight logs: GPS fix plus attitude per record.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 7] = [
    "t_s",
    "lat_deg",
    "lon_deg",
    "alt_asl_m",
    "pitch_deg",
    "roll_deg",
    "yaw_deg",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    /// Altitude above sea level, m.
    pub alt_asl: f64,
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    records: Vec<TrajectoryRecord>,
}

impl TrajectoryLog {
    /// Validates ordering and angle ranges.
    pub fn new(records: Vec<TrajectoryRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            check_record(r)?;
            if i > 0 && r.t <= records[i - 1].t {
                return Err(Error::Order {
                    record: i,
                    prev: records[i - 1].t,
                    t: r.t,
                });
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Median spacing between consecutive records, seconds.
    pub fn median_interval(&self) -> Option<f64> {
        if self.records.len() < 2 {
            return None;
        }
        let mut gaps: Vec<f64> = self.records.windows(2).map(|w| w[1].t - w[0].t).collect();
        gaps.sort_by(f64::total_cmp);
        Some(gaps[gaps.len() / 2])
    }
}

fn check_record(r: &TrajectoryRecord) -> Result<()> {
    let fields = [
        ("t_s", r.t),
        ("lat_deg", r.lat),
        ("lon_deg", r.lon),
        ("alt_asl_m", r.alt_asl),
        ("pitch_deg", r.pitch),
        ("roll_deg", r.roll),
        ("yaw_deg", r.yaw),
    ];
    if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::range(*name, *v));
    }
    let limits = [
        ("lat_deg", r.lat, 90.0),
        ("lon_deg", r.lon, 180.0),
        ("pitch_deg", r.pitch, 90.0),
        ("roll_deg", r.roll, 180.0),
    ];
    for (name, v, lim) in limits {
        if v.abs() > lim {
            return Err(Error::range(name, v));
        }
    }
    Ok(())
}

pub fn parse_trajectory(r: impl Read) -> Result<TrajectoryLog> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    if headers.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "expected header {}, got {}",
                TRAJECTORY_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let mut vals = [0.0f64; 7];
        for (k, v) in vals.iter_mut().enumerate() {
            let field = row.get(k).ok_or_else(|| Error::Parse {
                line,
                msg: format!("missing column {}", TRAJECTORY_HEADER[k]),
            })?;
            *v = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("{}: not a number: {field:?}", TRAJECTORY_HEADER[k]),
            })?;
        }
        records.push(TrajectoryRecord {
            t: vals[0],
            lat: vals[1],
            lon: vals[2],
            alt_asl: vals[3],
            pitch: vals[4],
            roll: vals[5],
            yaw: vals[6],
        });
    }
    TrajectoryLog::new(records)
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<TrajectoryLog> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(std::io::BufReader::new(file))
}

pub fn write_trajectory_to(w: &mut impl Write, log: &TrajectoryLog) -> std::io::Result<()> {
    writeln!(w, "{}", TRAJECTORY_HEADER.join(","))?;
    for r in log.records() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.t, r.lat, r.lon, r.alt_asl, r.pitch, r.roll, r.yaw
        )?;
    }
    Ok(())
}

pub fn write_trajectory(path: impl AsRef<Path>, log: &TrajectoryLog) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_trajectory_to(&mut w, log)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "t_s,lat_deg,lon_deg,alt_asl_m,pitch_deg,roll_deg,yaw_deg\n";

    #[test]
    fn three_rows() {
        let text = format!(
            "{HEAD}0.0,50.86,4.68,30.0,1.0,-2.0,90\n0.1,50.86,4.68,30.1,1.1,-2.1,91\n0.2,50.86,4.68,30.2,0.9,-1.9,92\n"
        );
        let log = parse_trajectory(text.as_bytes()).unwrap();
        assert_eq!(log.len(), 3);
        assert_eq!(log.records()[2].alt_asl, 30.2);
        assert!((log.median_interval().unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn decreasing_time_is_order_error() {
        let text = format!("{HEAD}5.0,0,0,0,0,0,0\n4.0,0,0,0,0,0,0\n");
        assert!(matches!(
            parse_trajectory(text.as_bytes()),
            Err(Error::Order { record: 1, .. })
        ));
    }

    #[test]
    fn repeated_time_is_order_error() {
        let text = format!("{HEAD}1.0,0,0,0,0,0,0\n1.0,0,0,0,0,0,0\n");
        assert!(matches!(
            parse_trajectory(text.as_bytes()),
            Err(Error::Order { .. })
        ));
    }

    #[test]
    fn out_of_range_angles() {
        for row in [
            "0,91,0,0,0,0,0",
            "0,0,181,0,0,0,0",
            "0,0,0,0,90.5,0,0",
            "0,0,0,0,0,-180.5,0",
        ] {
            let text = format!("{HEAD}{row}\n");
            assert!(
                matches!(parse_trajectory(text.as_bytes()), Err(Error::Range { .. })),
                "{row}"
            );
        }
    }

    #[test]
    fn wrong_header() {
        let text = "t,lat,lon\n0,0,0\n";
        assert!(matches!(
            parse_trajectory(text.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn write_then_parse() {
        let log = TrajectoryLog::new(vec![
            TrajectoryRecord {
                t: 0.0,
                lat: 50.862088,
                lon: 4.685513,
                alt_asl: 40.25,
                pitch: -3.5,
                roll: 12.0,
                yaw: 270.0,
            },
            TrajectoryRecord {
                t: 0.1,
                lat: 50.8621,
                lon: 4.6856,
                alt_asl: 40.5,
                pitch: -3.0,
                roll: 11.0,
                yaw: 271.0,
            },
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_to(&mut buf, &log).unwrap();
        assert_eq!(parse_trajectory(buf.as_slice()).unwrap(), log);
    }
}
