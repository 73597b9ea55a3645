mod common;

use matextract::codec::{decode, encode};
use matextract::records::{Records, SchemaId};

#[test]
fn round_trip_every_schema() {
    common::check_round_trip(1000).unwrap();
}

#[test]
fn eng_paradigms_and_keyword_mutations() {
    common::check_eng_grammar().unwrap();
}

#[test]
fn empty_records_round_trip() {
    for schema in SchemaId::ALL {
        let empty = Records::empty(schema);
        let text = encode(schema, &empty).unwrap();
        assert_eq!(decode(schema, &text).into_record(), Some(empty), "{schema}");
    }
}

#[test]
fn eng_encoding_keeps_input_order_of_dopants() {
    let r = decode(SchemaId::DopingEng, "The host 'GaN' was doped with 'Si', 'Mg' and 'Zn'.").into_record().unwrap();
    assert_eq!(encode(SchemaId::DopingEng, &r).unwrap(), "The host 'GaN' was doped with 'Si', 'Mg' and 'Zn'.");
}
