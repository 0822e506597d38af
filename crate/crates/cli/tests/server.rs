use std::net::SocketAddr;
use std::process::Command;

use futures_util::{SinkExt, StreamExt};
use logichart_cli::serve;
use logichart_core::logichart::DiagramConfig;
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio::sync::oneshot;
use tokio_tungstenite::tungstenite::Message;

const CUT: &str = "f :- g, !, h, fail.\nf.\ng :- write(a),nl.\ng :- write(b),nl.\nh.\n";
const APPEND_TEST: &str = "test(X,Y,Z) :- appendList(X,Y,Z), write((X,Y,Z)), nl.
test(_,_,_) :- write(end), nl.
appendList([],X,X).
appendList([X|L1],L2,[X|List]) :- appendList(L1,L2,List).
";

async fn start() -> (SocketAddr, oneshot::Sender<()>) {
    let listener = serve::bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop, stopped) = oneshot::channel::<()>();
    let app = serve::router(DiagramConfig::default(), None);
    tokio::spawn(serve::serve(listener, app, async {
        let _ = stopped.await;
    }));
    (addr, stop)
}

async fn get(addr: SocketAddr, path: &str) -> String {
    let mut stream = TcpStream::connect(addr).await.unwrap();
    let request = format!("GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n");
    stream.write_all(request.as_bytes()).await.unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).await.unwrap();
    response
}

type Socket = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<TcpStream>>;

async fn connect(addr: SocketAddr) -> Socket {
    tokio_tungstenite::connect_async(format!("ws://{addr}/session")).await.unwrap().0
}

async fn send(ws: &mut Socket, request: Value) {
    ws.send(Message::text(request.to_string())).await.unwrap();
}

/// Reads responses until one of kind `last` arrives.
async fn until(ws: &mut Socket, last: &str) -> Vec<Value> {
    let mut out = Vec::new();
    while let Some(message) = ws.next().await {
        let Message::Text(text) = message.unwrap() else { continue };
        let value: Value = serde_json::from_str(&text).unwrap();
        let done = value["kind"] == last;
        out.push(value);
        if done {
            return out;
        }
    }
    panic!("connection closed before {last}: {out:?}");
}

#[tokio::test(flavor = "multi_thread")]
async fn healthz_and_index_are_served() {
    let (addr, stop) = start().await;
    let health = get(addr, "/healthz").await;
    assert!(health.starts_with("HTTP/1.1 200"), "{health}");
    assert!(health.ends_with("ok"));
    let index = get(addr, "/").await;
    assert!(index.starts_with("HTTP/1.1 200"));
    assert!(index.contains("/session"));
    stop.send(()).unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn websocket_session_runs_the_cut_program() {
    let (addr, stop) = start().await;
    let mut ws = connect(addr).await;
    send(&mut ws, json!({"kind": "LoadProgram", "text": CUT})).await;
    assert_eq!(until(&mut ws, "Ack").await.len(), 1);
    send(&mut ws, json!({"kind": "SetQuery", "text": "?- f."})).await;
    let full = until(&mut ws, "DiagramFull").await;
    assert_eq!(full[0]["nodes"].as_array().unwrap().len(), 15);

    send(&mut ws, json!({"kind": "Step"})).await;
    let first = until(&mut ws, "Bindings").await;
    assert_eq!(first[0], json!({"kind": "NodeState", "address": [{"body": 0}], "state": "called"}));

    send(&mut ws, json!({"kind": "Run"})).await;
    let rest = until(&mut ws, "Done").await;
    assert_eq!(rest.last().unwrap(), &json!({"kind": "Done", "success": false, "solutions": 0}));
    let pruned = rest.iter().filter(|m| m["state"] == "pruned").count();
    assert_eq!(pruned, 2);

    send(&mut ws, json!({"kind": "Step"})).await;
    let err = until(&mut ws, "Error").await;
    assert!(err[0]["message"].as_str().unwrap().contains("Reset"));

    // a snapshot is the diagram followed by every touched node's state
    send(&mut ws, json!({"kind": "GetDiagram"})).await;
    ws.send(Message::text("not json")).await.unwrap();
    let snapshot = until(&mut ws, "Error").await;
    let (error, snapshot) = snapshot.split_last().unwrap();
    assert_eq!(snapshot[0]["kind"], "DiagramFull");
    assert!(snapshot[1..].iter().all(|m| m["kind"] == "NodeState"));
    assert_eq!(snapshot[1..].iter().filter(|m| m["state"] == "pruned").count(), 2);
    assert!(error["message"].as_str().unwrap().starts_with("malformed"));
    stop.send(()).unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn backtrack_prompt_round_trip() {
    let (addr, stop) = start().await;
    let mut ws = connect(addr).await;
    send(&mut ws, json!({"kind": "LoadProgram", "text": APPEND_TEST})).await;
    send(&mut ws, json!({"kind": "SetQuery", "text": "test(X,Y,Z)."})).await;
    until(&mut ws, "DiagramFull").await;
    send(&mut ws, json!({"kind": "Run"})).await;
    let prompt = until(&mut ws, "PromptBacktrack").await;
    assert_eq!(prompt.last().unwrap()["vars"][0]["value"], "[]");
    send(&mut ws, json!({"kind": "AnswerBacktrack", "success": false})).await;
    let done = until(&mut ws, "Done").await;
    assert_eq!(done, [json!({"kind": "Done", "success": true, "solutions": 1})]);
    stop.send(()).unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn sessions_are_independent() {
    let (addr, stop) = start().await;
    let mut clients = Vec::new();
    for i in 0..8 {
        clients.push(tokio::spawn(async move {
            let mut ws = connect(addr).await;
            let (program, query) = if i % 2 == 0 { (CUT, "f.") } else { (APPEND_TEST, "test(X,Y,Z).") };
            send(&mut ws, json!({"kind": "LoadProgram", "text": program})).await;
            send(&mut ws, json!({"kind": "SetQuery", "text": query})).await;
            until(&mut ws, "DiagramFull").await;
            send(&mut ws, json!({"kind": "Run"})).await;
            let last = if i % 2 == 0 { "Done" } else { "PromptBacktrack" };
            until(&mut ws, last).await.into_iter().filter(|m| m["kind"] == "NodeState").count()
        }));
    }
    let mut counts = Vec::new();
    for client in clients {
        counts.push(client.await.unwrap());
    }
    assert!(counts.iter().step_by(2).all(|&c| c == counts[0]));
    assert!(counts.iter().skip(1).step_by(2).all(|&c| c == counts[1]));
    stop.send(()).unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn port_in_use_exits_two() {
    let listener = serve::bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let port = listener.local_addr().unwrap().port().to_string();
    let out = Command::new(env!("CARGO_BIN_EXE_logichart")).args(["serve", "--port", &port]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot listen"));
}
