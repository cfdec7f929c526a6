//! Drives a delegate through the remote completion interface. The transport
//! here is an in-process closure that answers like a provider would; with
//! the `remote-http` feature the same requests go over HTTP.

use dci_core::delegate::{
    ArchetypeKind, CompletionRequest, DelegateBox, Policy, RemoteDelegate, SimulatedDelegate,
};
use dci_core::events::CallKind;
use dci_core::session::{CouncilMember, Criterion, SessionEnvelope};
use dci_core::{EventLog, run_session_logged};
use serde_json::{Value, json};

fn provider(req: &CompletionRequest) -> Result<Value, String> {
    let p = &req.payload;
    Ok(match req.call {
        CallKind::Proposal => json!({
            "author": "",
            "framing": "Keep it boring.",
            "hypotheses": [{"label": "managed queue", "description": "Use the cloud queue."}],
            "concerns": [],
            "confidence": 0.7,
            "suggested_criteria": []
        }),
        CallKind::Contribute => json!({"contributions": [], "moves": []}),
        CallKind::Score => {
            let criteria: Vec<String> = p["criteria"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| c["id"].as_str().unwrap().to_owned())
                .collect();
            let mut scores = serde_json::Map::new();
            let mut top = Value::Null;
            for o in p["finalists"].as_array().unwrap() {
                let s = if o["label"] == "managed queue" { 8 } else { 5 };
                if s == 8 || top.is_null() {
                    top = o["option_id"].clone();
                }
                let row: serde_json::Map<String, Value> = criteria.iter().map(|c| (c.clone(), json!(s))).collect();
                scores.insert(o["option_id"].to_string(), Value::Object(row));
            }
            json!({"delegate": "", "scores": scores, "confidence": 0.7, "evidence_strength": 0.7, "rationale": {}, "top_choice": top})
        }
        CallKind::IntegratorPick => p["top_two"][0]["option_id"].clone(),
    })
}

fn main() {
    let council: Vec<CouncilMember> = ArchetypeKind::ALL
        .iter()
        .enumerate()
        .map(|(i, a)| CouncilMember { id: format!("d{i}").into(), archetype: *a })
        .collect();
    let envelope = SessionEnvelope::with_defaults(
        "remote",
        "Which queue should the importer use?",
        council,
        vec![Criterion { id: "fit".into(), weight: 1.0 }],
    );
    let mut delegates: Vec<DelegateBox> = vec![
        Box::new(RemoteDelegate::new(provider)),
        Box::new(SimulatedDelegate::new(Policy::Cooperative, 1)),
        Box::new(SimulatedDelegate::new(Policy::Cooperative, 2)),
        Box::new(SimulatedDelegate::new(Policy::Cooperative, 3)),
    ];
    let mut log = EventLog::new();
    let out = run_session_logged(envelope, &mut delegates, &mut log).unwrap();
    println!("decision: {} ({:?}) after {} events", out.packet.decision.label, out.packet.verdict, log.len());
}
