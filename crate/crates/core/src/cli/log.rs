use serde_json::{Map, Value};

/// Event sink: `key=value` lines on stderr, or one JSON object per line
/// with `--json`.
#[derive(Debug, Clone, Copy, Default)]
pub struct EventLog {
    pub json: bool,
}

impl EventLog {
    pub fn emit(&self, event: &str, fields: Value) {
        eprintln!("{}", self.format(event, fields));
    }

    pub fn format(&self, event: &str, fields: Value) -> String {
        let fields = match fields {
            Value::Object(map) => map,
            Value::Null => Map::new(),
            other => Map::from_iter([("value".to_string(), other)]),
        };
        if self.json {
            let mut obj = Map::new();
            obj.insert("event".into(), Value::String(event.into()));
            obj.extend(fields);
            Value::Object(obj).to_string()
        } else {
            let parts: Vec<String> = fields
                .iter()
                .map(|(k, v)| match v {
                    Value::String(s) => format!("{k}={s}"),
                    other => format!("{k}={other}"),
                })
                .collect();
            format!("[{event}] {}", parts.join(" "))
        }
    }
}
