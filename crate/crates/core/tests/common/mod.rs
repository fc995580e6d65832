//! Loopback HTTP fixture standing in for a chat-completions service.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone)]
pub struct Recorded {
    pub headers: Vec<(String, String)>,
    pub body: serde_json::Value,
}

impl Recorded {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    /// Content of the last message in the request.
    pub fn last_content(&self) -> String {
        let msgs = self.body["messages"].as_array().expect("messages array");
        msgs.last().unwrap()["content"].as_str().unwrap().to_owned()
    }
}

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: u16,
    pub body: String,
    pub headers: Vec<(String, String)>,
}

impl Reply {
    pub fn completion(text: &str) -> Reply {
        Reply {
            status: 200,
            body: serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string(),
            headers: Vec::new(),
        }
    }

    pub fn status(status: u16) -> Reply {
        Reply {
            status,
            body: r#"{"error": "fixture"}"#.into(),
            headers: Vec::new(),
        }
    }

    pub fn with_header(mut self, k: &str, v: &str) -> Reply {
        self.headers.push((k.into(), v.into()));
        self
    }
}

pub struct Fixture {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Recorded>>>,
}

impl Fixture {
    pub fn count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

type Handler = dyn Fn(usize, &Recorded) -> Reply + Send + Sync;

fn handle(mut stream: TcpStream, n: usize, handler: &Handler, log: &Mutex<Vec<Recorded>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    reader.read_line(&mut line).unwrap();
    let mut headers = Vec::new();
    let mut len = 0usize;
    loop {
        line.clear();
        reader.read_line(&mut line).unwrap();
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap();
            }
            headers.push((k.trim().to_owned(), v.trim().to_owned()));
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    let rec = Recorded {
        headers,
        body: serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null),
    };
    let reply = handler(n, &rec);
    log.lock().unwrap().push(rec);
    let mut head = format!(
        "HTTP/1.1 {} Fixture\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n",
        reply.status,
        reply.body.len()
    );
    for (k, v) in &reply.headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str("\r\n");
    let _ = stream.write_all(head.as_bytes());
    let _ = stream.write_all(reply.body.as_bytes());
    let _ = stream.flush();
}

/// Serves on 127.0.0.1 with an ephemeral port. `handler` gets the zero-based
/// request index.
pub fn serve(handler: impl Fn(usize, &Recorded) -> Reply + Send + Sync + 'static) -> Fixture {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = requests.clone();
    let handler: Arc<Handler> = Arc::new(handler);
    let counter = Arc::new(AtomicUsize::new(0));
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let (h, l, c) = (handler.clone(), log.clone(), counter.clone());
            std::thread::spawn(move || {
                let n = c.fetch_add(1, Ordering::SeqCst);
                handle(stream, n, &*h, &l);
            });
        }
    });
    Fixture { url, requests }
}

/// Replies in order, repeating the last one.
pub fn scripted(replies: Vec<Reply>) -> Fixture {
    serve(move |n, _| replies[n.min(replies.len() - 1)].clone())
}

/// A loopback URL with nothing listening.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}/v1/chat/completions")
}

pub const PROMPT_SHA256: [(&str, &str); 10] = [
    ("baseline", "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"),
    ("interrogate", "51574bb490f8bbdff53fa035101c1b8f1fdd8bc9c3a778223d86bc920d3886d3"),
    ("clarify", "9b877d3928d2a89d0f99911cbf6de00cd7f02d1e8c4d6fa59e620366746e7818"),
    ("hedge", "8b7e6bdad08433e8e28b100b9858b8cdf098832a3ad64be9c5ef8a4816cfff1c"),
    ("cot", "3f6b9e86cbab19161a5a3f4f763b112c568f9653f6ca2e15c3b94a8862e3e250"),
    ("clarify_flex", "2c4d982c0f8d17497547a6518b7d48b3a643ebe8221a2efaccf8d2a8037cf94d"),
    ("classify_underspec", "ac24ca36e96769b998e71f2e8c522d23e9663349536a409473b42c742c3835ea"),
    ("classify_tau", "fd0b032cff113a8415d9f362aca189f5ada71ae731a113e9f51f970c60dbb912"),
    ("extract_recs_and_questions", "63adbc7872d81bc277c4c558fcdc32b80c35a2d34cc32707e0cefc17c752eeb2"),
    ("map_questions_to_thetas", "52ca4a4032a980fa6350fa964103f0a1b43273c745b98afb3f9bc24b6e30b47a"),
];
