//! Bundled traffic-light benchmark.

pub const TLC_CSM: &str = include_str!("../assets/tlc.csm");
pub const TLC_CAR_CSM: &str = include_str!("../assets/tlc_car.csm");
pub const TLC_QUERIES: &str = include_str!("../assets/tlc_queries.tq");

/// File name and contents of every bundled asset.
pub const ALL: [(&str, &str); 3] =
    [("tlc.csm", TLC_CSM), ("tlc_car.csm", TLC_CAR_CSM), ("tlc_queries.tq", TLC_QUERIES)];

pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
