// File-backed canvas documents with last-write-wins resolution.
//
// cargo run --example canvas_store

use chrono::{TimeZone, Utc};
use talestream::server::{canvas_warnings, CanvasDocument, CanvasStore, Card, CardType, Position};
use talestream::load_dataset;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/micro10.jsonl");

fn board(minute: u32, writer: &str, payload: &str) -> CanvasDocument {
    CanvasDocument {
        id: "pitch".into(),
        title: "Pitch board".into(),
        cards: vec![Card {
            card_id: "c1".into(),
            card_type: CardType::Trope,
            position: Position { x: 10.0, y: 20.0 },
            payload: payload.into(),
            selected_for_input: true,
        }],
        updated_at: Utc.with_ymd_and_hms(2026, 5, 1, 12, minute, 0).unwrap(),
        writer: writer.into(),
    }
}

pub fn run_example() -> anyhow::Result<()> {
    let (corpus, _) = load_dataset(DATA, true)?;
    let dir = std::env::temp_dir().join(format!("talestream-canvas-{}", std::process::id()));
    let store = CanvasStore::new(&dir)?;

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let (accepted, _) = store.put(board(5, "ana", "ViceCity")).await?;
        println!("first write accepted: {accepted}");
        let (accepted, current) = store.put(board(1, "ben", "TheHeist")).await?;
        println!("older write accepted: {accepted}; stored payload {}", current.cards[0].payload);
        let (accepted, _) = store.put(board(5, "cleo", "CityNoir")).await?;
        println!("same-time write from a larger writer token accepted: {accepted}");

        let stored = store.get("pitch").await?.expect("stored");
        println!("final payload {} by {}", stored.cards[0].payload, stored.writer);
        anyhow::ensure!(stored.cards[0].payload == "CityNoir");
        anyhow::Ok(())
    })?;

    println!("warnings: {:?}", canvas_warnings(&corpus, &board(9, "ana", "Atlantis")));
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
