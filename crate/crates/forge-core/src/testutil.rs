//! Test-only helpers.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener};
use std::thread::JoinHandle;

/// Serve a fixed sequence of raw HTTP responses, one connection each, on an
/// ephemeral local port. Returns the bound address and a handle that joins
/// once every response has been served.
///
/// Requests are read until the end of headers plus the declared body
/// length; the bodies received are returned by the join handle so tests can
/// assert on what was sent.
pub fn spawn_http_fixture(responses: Vec<String>) -> (SocketAddr, JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind fixture listener");
    let addr = listener.local_addr().expect("fixture addr");
    let handle = std::thread::spawn(move || {
        let mut bodies = Vec::new();
        for response in responses {
            let (mut stream, _) = listener.accept().expect("accept");
            let mut buf = Vec::new();
            let mut chunk = [0u8; 4096];
            loop {
                let n = stream.read(&mut chunk).expect("read request");
                if n == 0 {
                    break;
                }
                buf.extend_from_slice(&chunk[..n]);
                if let Some(body) = full_request_body(&buf) {
                    bodies.push(body);
                    break;
                }
            }
            stream.write_all(response.as_bytes()).expect("write response");
            stream.flush().expect("flush");
        }
        bodies
    });
    (addr, handle)
}

fn full_request_body(buf: &[u8]) -> Option<String> {
    let text = String::from_utf8_lossy(buf);
    let header_end = text.find("\r\n\r\n")?;
    let headers = &text[..header_end];
    let content_length = headers
        .lines()
        .find_map(|line| {
            let (name, value) = line.split_once(':')?;
            name.eq_ignore_ascii_case("content-length")
                .then(|| value.trim().parse::<usize>().ok())?
        })
        .unwrap_or(0);
    let body = &buf[header_end + 4..];
    (body.len() >= content_length).then(|| {
        String::from_utf8_lossy(&body[..content_length]).into_owned()
    })
}
