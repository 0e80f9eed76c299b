use std::path::PathBuf;

use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};

use toffa_service::{serve_on, ServeConfig};

async fn http(addr: std::net::SocketAddr, method: &str, path: &str, body: &str) -> String {
    let mut s = TcpStream::connect(addr).await.unwrap();
    let req = format!(
        "{method} {path} HTTP/1.1\r\nhost: localhost\r\nconnection: close\r\ncontent-type: text/plain\r\ncontent-length: {}\r\n\r\n{body}",
        body.len()
    );
    s.write_all(req.as_bytes()).await.unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).await.unwrap();
    out
}

async fn start(
    snapshot: PathBuf,
) -> (
    std::net::SocketAddr,
    tokio::sync::oneshot::Sender<()>,
    tokio::task::JoinHandle<std::io::Result<()>>,
) {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let cfg = ServeConfig {
        addr,
        static_dir: None,
        snapshot: Some(snapshot),
    };
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let h = tokio::spawn(serve_on(listener, cfg, async {
        let _ = rx.await;
    }));
    (addr, tx, h)
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("sessions.json");
    let src = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/gridstix.toffa"),
    )
    .unwrap();

    let (addr, stop, h) = start(snap.clone()).await;
    assert!(http(addr, "GET", "/healthz", "")
        .await
        .starts_with("HTTP/1.1 200"));
    let created = http(addr, "POST", "/api/session", &src).await;
    assert!(created.starts_with("HTTP/1.1 201"), "{created}");
    let body = &created[created.find("\r\n\r\n").unwrap() + 4..];
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    let id = v["session_id"].as_str().unwrap().to_string();
    stop.send(()).unwrap();
    h.await.unwrap().unwrap();
    assert!(snap.exists());

    let (addr, stop, h) = start(snap).await;
    let ccfs = http(addr, "GET", &format!("/api/session/{id}/ccfs"), "").await;
    assert!(ccfs.starts_with("HTTP/1.1 200"), "{ccfs}");
    assert!(ccfs.contains("\"count\":6"));
    stop.send(()).unwrap();
    h.await.unwrap().unwrap();
}
