//! Test helpers: a minimal blocking HTTP/1.1 JSON server and fixtures.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use embedforge_core::topics::{fit_topic_distribution, LabeledQuery, TopicDistribution};
use embedforge_core::Category;
use serde_json::{json, Value};

pub type Handler = dyn Fn(&str, &Value) -> (u16, Value) + Send + Sync;

/// Serves every request on its own thread until dropped.
pub struct MockServer {
    pub url: String,
    stop: Arc<AtomicBool>,
}

impl MockServer {
    pub fn start(handler: impl Fn(&str, &Value) -> (u16, Value) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let stop = Arc::new(AtomicBool::new(false));
        let handler: Arc<Handler> = Arc::new(handler);
        let flag = stop.clone();
        std::thread::spawn(move || {
            for conn in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(conn) = conn else { continue };
                let handler = handler.clone();
                std::thread::spawn(move || serve(conn, &*handler));
            }
        });
        MockServer { url, stop }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop so it sees the flag.
        let _ = TcpStream::connect(self.url.trim_start_matches("http://"));
    }
}

fn serve(conn: TcpStream, handler: &Handler) {
    let mut reader = BufReader::new(conn.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() || request_line.is_empty() {
        return;
    }
    let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).is_err() {
            return;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; len];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let value: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let (status, reply) = handler(&path, &value);
    let text = reply.to_string();
    let mut conn = conn;
    let _ = write!(
        conn,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    );
    let _ = conn.flush();
}

/// A small fitted topic distribution.
pub fn topics() -> TopicDistribution {
    let q = |labels: &[(&str, f64)]| {
        LabeledQuery::new("q", labels.iter().map(|(t, s)| (t.to_string(), *s)).collect()).unwrap()
    };
    fit_topic_distribution(&[
        q(&[("Sports", 0.9), ("Health", 0.4)]),
        q(&[("Sports", 0.8)]),
        q(&[("Finance", 0.7), ("News", 0.6)]),
        q(&[("Health", 0.9), ("Sports", 0.2)]),
    ])
    .unwrap()
}

/// A valid reply for `category`, numbered so outputs are distinguishable.
pub fn reply(category: Category, n: u64) -> String {
    let [a, b, c] = category.response_keys();
    json!({a: format!("query {n}"), b: format!("positive {n}"), c: format!("negative {n}")}).to_string()
}

/// Chat-completions body carrying `content`.
pub fn chat(content: &str) -> Value {
    json!({
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 100, "completion_tokens": 50}
    })
}
