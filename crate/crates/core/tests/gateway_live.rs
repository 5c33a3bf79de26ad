use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use boldline::gateway::{
    fixture_key, Classifier, ClassifierRequest, FixtureStore, Gateway, GatewayMode, GatewayOptions,
    RegardLabel, Task, ToxicityLabel,
};
use boldline::GatewayError;

struct Received {
    path: String,
    authorization: Option<String>,
    body: Vec<u8>,
}

struct Reply {
    status: u16,
    body: String,
    delay: Duration,
}

/// Minimal HTTP/1.1 server: one request per connection.
struct MockServer {
    url: String,
    hits: Arc<AtomicUsize>,
    received: Arc<Mutex<Vec<Received>>>,
}

fn read_request(stream: &mut TcpStream) -> Option<Received> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let path = line.split_whitespace().nth(1)?.to_string();
    let mut length = 0;
    let mut authorization = None;
    loop {
        line.clear();
        reader.read_line(&mut line).ok()?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        let (name, value) = l.split_once(':')?;
        match name.to_ascii_lowercase().as_str() {
            "content-length" => length = value.trim().parse().ok()?,
            "authorization" => authorization = Some(value.trim().to_string()),
            _ => {}
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    Some(Received {
        path,
        authorization,
        body,
    })
}

impl MockServer {
    fn start<F>(handler: F) -> MockServer
    where
        F: Fn(&Received) -> Reply + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let received = Arc::new(Mutex::new(Vec::new()));
        let (h, r) = (hits.clone(), received.clone());
        let handler = Arc::new(handler);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let (h, r, handler) = (h.clone(), r.clone(), handler.clone());
                thread::spawn(move || {
                    let Some(req) = read_request(&mut stream) else { return };
                    h.fetch_add(1, Ordering::SeqCst);
                    let reply = handler(&req);
                    r.lock().unwrap().push(req);
                    thread::sleep(reply.delay);
                    let reason = if reply.status == 200 { "OK" } else { "Error" };
                    let _ = write!(
                        stream,
                        "HTTP/1.1 {} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                        reply.status,
                        reply.body.len(),
                        reply.body
                    );
                });
            }
        });
        MockServer {
            url,
            hits,
            received,
        }
    }
}

const TOXICITY: &str = r#"{"task":"toxicity","toxicity":{"toxic":0.9,"severe_toxic":0.01,"threat":0.01,"obscene":0.01,"insult":0.01,"identity_threat":0.01},"threshold":0.5}"#;
const REGARD: &str = r#"{"task":"regard","regard":{"label":"negative","scores":{"positive":0.1,"negative":0.7,"neutral":0.1,"other":0.1}}}"#;

fn ok(body: &str) -> Reply {
    Reply {
        status: 200,
        body: body.to_string(),
        delay: Duration::ZERO,
    }
}

fn live(url: &str) -> GatewayOptions {
    GatewayOptions {
        mode: GatewayMode::Live,
        endpoint: Some(url.to_string()),
        timeout: Duration::from_millis(500),
        backoff: Duration::from_millis(5),
        ..GatewayOptions::default()
    }
}

#[test]
fn live_request_is_bit_exact_and_validated() {
    let server = MockServer::start(|r| {
        if r.body.starts_with(br#"{"task":"regard""#) {
            ok(REGARD)
        } else {
            ok(TOXICITY)
        }
    });
    let gw = Gateway::new(GatewayOptions {
        bearer_token: Some("secret".into()),
        ..live(&server.url)
    })
    .unwrap();

    let req = ClassifierRequest::new(Task::Toxicity, "Person was rude", "t-1").unwrap();
    let tox = gw.classify(&req).unwrap().toxicity(0.5).unwrap().unwrap();
    assert!(tox.is_toxic);
    assert!(tox.flags[&ToxicityLabel::Toxic]);
    assert_eq!(tox.flags.values().filter(|f| **f).count(), 1);

    let req = ClassifierRequest::new(Task::Regard, "Person was convicted", "r-1").unwrap();
    assert_eq!(gw.classify(&req).unwrap().regard_label(), Some(RegardLabel::Negative));

    let received = server.received.lock().unwrap();
    assert_eq!(received[0].path, "/v1/classify");
    assert_eq!(
        received[0].body,
        br#"{"task":"toxicity","text":"Person was rude","request_id":"t-1"}"#
    );
    assert_eq!(received[0].authorization.as_deref(), Some("Bearer secret"));
}

#[test]
fn out_of_range_probability_is_malformed() {
    let server = MockServer::start(|_| ok(&TOXICITY.replace("0.9", "1.2")));
    let gw = Gateway::new(live(&server.url)).unwrap();
    let req = ClassifierRequest::new(Task::Toxicity, "text", "1").unwrap();
    assert!(matches!(gw.classify(&req), Err(GatewayError::Malformed(_))));
}

#[test]
fn error_status_carries_message() {
    let server = MockServer::start(|_| Reply {
        status: 422,
        body: r#"{"error":"empty text"}"#.into(),
        delay: Duration::ZERO,
    });
    let gw = Gateway::new(live(&server.url)).unwrap();
    let req = ClassifierRequest::new(Task::Toxicity, "text", "1").unwrap();
    match gw.classify(&req) {
        Err(GatewayError::Status { status, message }) => {
            assert_eq!(status, 422);
            assert_eq!(message, "empty text");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn timeouts_are_retried_three_times() {
    let server = MockServer::start(|_| Reply {
        status: 200,
        body: TOXICITY.into(),
        delay: Duration::from_millis(400),
    });
    let gw = Gateway::new(GatewayOptions {
        timeout: Duration::from_millis(100),
        ..live(&server.url)
    })
    .unwrap();
    let req = ClassifierRequest::new(Task::Toxicity, "slow", "1").unwrap();
    assert!(matches!(
        gw.classify(&req),
        Err(GatewayError::Timeout { attempts: 4 })
    ));
    // Each attempt reaches the server before timing out.
    thread::sleep(Duration::from_millis(100));
    assert_eq!(server.hits.load(Ordering::SeqCst), 4);
}

#[test]
fn record_then_replay_is_byte_identical() {
    // Odd spacing in the body must survive the round trip untouched.
    let body = TOXICITY.replace(",\"threshold\"", ", \"threshold\"");
    let served = body.clone();
    let server = MockServer::start(move |_| ok(&served));
    let dir = tempfile::tempdir().unwrap();

    let recorder = Gateway::new(GatewayOptions {
        mode: GatewayMode::Record,
        fixtures: Some(dir.path().to_path_buf()),
        ..live(&server.url)
    })
    .unwrap();
    let req = ClassifierRequest::new(Task::Toxicity, "Person  was\trude", "1").unwrap();
    let recorded = recorder.classify(&req).unwrap();

    let store = FixtureStore::new(dir.path());
    let key = fixture_key(Task::Toxicity, "Person was rude");
    assert_eq!(store.read(&key).unwrap().unwrap(), body.as_bytes());

    let replayer = Gateway::new(GatewayOptions {
        mode: GatewayMode::Replay,
        fixtures: Some(dir.path().to_path_buf()),
        ..GatewayOptions::default()
    })
    .unwrap();
    assert_eq!(replayer.classify(&req).unwrap(), recorded);
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn concurrent_replay_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let store = FixtureStore::new(dir.path());
    for i in 0..16 {
        store
            .write(&fixture_key(Task::Regard, &format!("text {i}")), REGARD.as_bytes())
            .unwrap();
    }
    let gw = Arc::new(
        Gateway::new(GatewayOptions {
            mode: GatewayMode::Replay,
            fixtures: Some(dir.path().to_path_buf()),
            ..GatewayOptions::default()
        })
        .unwrap(),
    );
    let handles: Vec<_> = (0..16)
        .map(|i| {
            let gw = gw.clone();
            thread::spawn(move || {
                let req = ClassifierRequest::new(Task::Regard, format!("text {i}"), i.to_string()).unwrap();
                gw.classify(&req).unwrap().regard_label()
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), Some(RegardLabel::Negative));
    }
}
