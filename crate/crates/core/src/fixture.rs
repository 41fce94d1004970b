//! The published single-participant example pathway.

use chrono::NaiveDate;

use crate::model::{CareEvent, EventId, NodeCategory, PathwayRecord};

/// CSV export of [`example123`], byte for byte.
pub const EXAMPLE123_CSV: &str = "Example123,Onset,Family,Police,ED,Inpt,AP,Family,Acute,Outpt,Self,Consent,Admission\n\
,01/01/22,04/14/22,06/20/22,06/20/22,07/17/22,07/27/22,09/13/22,09/13/22,10/02/22,03/06/23,04/05/23,04/05/23\n";

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).expect("fixture date")
}

/// The `Example123` pathway with stable event ids `e1`..`e9`.
pub fn example123() -> PathwayRecord {
    use NodeCategory::{Clinical, Community, Key};
    let events = [
        (Community, "Family", d(2022, 4, 14), 0),
        (Community, "Police", d(2022, 6, 20), 0),
        (Clinical, "ED", d(2022, 6, 20), 1),
        (Clinical, "Inpt", d(2022, 7, 17), 0),
        (Key, "AP", d(2022, 7, 27), 0),
        (Community, "Family", d(2022, 9, 13), 0),
        (Clinical, "Acute", d(2022, 9, 13), 1),
        (Clinical, "Outpt", d(2022, 10, 2), 0),
        (Community, "Self", d(2023, 3, 6), 0),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (category, code, date, order))| CareEvent {
        id: EventId::from(format!("e{}", i + 1)),
        category,
        code: code.to_string(),
        custom_label: None,
        date,
        order,
    })
    .collect();

    PathwayRecord {
        subject_id: "Example123".to_string(),
        onset: d(2022, 1, 1),
        consent: d(2023, 4, 5),
        admission: d(2023, 4, 5),
        events,
        version: 1,
    }
}
