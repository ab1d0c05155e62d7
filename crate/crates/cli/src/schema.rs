//! Published JSON Schema for the layout payload and the messages that wrap
//! it. Served at `GET /schema`.

pub const PAYLOAD_SCHEMA: &str = include_str!("../schema/payload.schema.json");

#[cfg(test)]
mod tests {
    #[test]
    fn schema_is_valid_json() {
        let v: serde_json::Value = serde_json::from_str(super::PAYLOAD_SCHEMA).unwrap();
        assert_eq!(v["title"], "LayoutPayload");
        assert!(v["$defs"]["event"].is_object());
    }
}
