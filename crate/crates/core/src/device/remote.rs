//! Remote backend protocol: each frame is a 4-byte big-endian length followed
//! by that many bytes of JSON.
//!
//! Requests are `{"op": "snapshot"}` or
//! `{"op": "execute", "payload": {"action": {...}, "settle_ms": n}}`. A
//! snapshot is answered with `{"activity", "hierarchy"}`, an execute with an
//! [`ExecutionOutcome`] object, and failures with `{"error": "..."}`.

use std::io::{self, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};

use serde::{Deserialize, Serialize};

use super::{Device, DeviceError, ExecutionOutcome, Snapshot};
use crate::action::Action;

const MAX_FRAME: u32 = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "payload", rename_all = "snake_case")]
pub enum Request {
    Snapshot,
    Execute { action: Action, settle_ms: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Response {
    Snapshot(Snapshot),
    Outcome(ExecutionOutcome),
    Error { error: String },
}

pub fn write_frame<W: Write, T: Serialize>(w: &mut W, value: &T) -> Result<(), DeviceError> {
    let body = serde_json::to_vec(value).map_err(|e| DeviceError::Protocol(e.to_string()))?;
    let len = u32::try_from(body.len())
        .ok()
        .filter(|&n| n <= MAX_FRAME)
        .ok_or_else(|| DeviceError::Protocol(format!("frame of {} bytes is too large", body.len())))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(&body)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `Ok(None)` on a clean end of stream before the header.
pub fn read_frame<R: Read, T: for<'de> Deserialize<'de>>(r: &mut R) -> Result<Option<T>, DeviceError> {
    let mut header = [0u8; 4];
    match r.read_exact(&mut header) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(header);
    if len > MAX_FRAME {
        return Err(DeviceError::Protocol(format!("frame length {len} exceeds limit")));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body)?;
    serde_json::from_slice(&body).map(Some).map_err(|e| DeviceError::Protocol(e.to_string()))
}

/// Client side of the protocol.
pub struct RemoteDevice<S = TcpStream> {
    stream: S,
}

impl RemoteDevice<TcpStream> {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self, DeviceError> {
        Ok(Self { stream: TcpStream::connect(addr)? })
    }
}

impl<S: Read + Write> RemoteDevice<S> {
    pub fn from_stream(stream: S) -> Self {
        Self { stream }
    }

    fn call(&mut self, request: &Request) -> Result<Response, DeviceError> {
        write_frame(&mut self.stream, request)?;
        match read_frame::<_, Response>(&mut self.stream)? {
            Some(Response::Error { error }) => Err(DeviceError::Remote(error)),
            Some(r) => Ok(r),
            None => Err(DeviceError::Protocol("connection closed before reply".into())),
        }
    }
}

impl<S: Read + Write> Device for RemoteDevice<S> {
    fn snapshot(&mut self) -> Result<Snapshot, DeviceError> {
        match self.call(&Request::Snapshot)? {
            Response::Snapshot(s) => Ok(s),
            other => Err(DeviceError::Protocol(format!("expected snapshot, got {other:?}"))),
        }
    }

    fn execute(&mut self, action: &Action, settle_ms: u64) -> Result<ExecutionOutcome, DeviceError> {
        match self.call(&Request::Execute { action: action.clone(), settle_ms })? {
            Response::Outcome(o) => Ok(o),
            other => Err(DeviceError::Protocol(format!("expected outcome, got {other:?}"))),
        }
    }
}

/// Serves requests from one connection against `device` until the peer
/// closes the stream.
pub fn serve_connection<D: Device, S: Read + Write>(device: &mut D, mut stream: S) -> Result<(), DeviceError> {
    while let Some(request) = read_frame::<_, Request>(&mut stream)? {
        let response = match request {
            Request::Snapshot => device.snapshot().map(Response::Snapshot),
            Request::Execute { action, settle_ms } => device.execute(&action, settle_ms).map(Response::Outcome),
        }
        .unwrap_or_else(|e| Response::Error { error: e.to_string() });
        write_frame(&mut stream, &response)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::OutcomeStatus;

    #[test]
    fn wire_shapes() {
        let req = Request::Execute { action: Action::click("OK"), settle_ms: 1000 };
        assert_eq!(
            serde_json::to_string(&req).unwrap(),
            r#"{"op":"execute","payload":{"action":{"kind":"click","target":"OK"},"settle_ms":1000}}"#
        );
        assert_eq!(serde_json::to_string(&Request::Snapshot).unwrap(), r#"{"op":"snapshot"}"#);

        let outcome: Response =
            serde_json::from_str(r#"{"status":"target-not-found","detail":"x","transients":[],"page_changed":false}"#)
                .unwrap();
        assert!(matches!(outcome, Response::Outcome(o) if o.status == OutcomeStatus::TargetNotFound));
        let err: Response = serde_json::from_str(r#"{"error":"boom"}"#).unwrap();
        assert_eq!(err, Response::Error { error: "boom".into() });
    }

    #[test]
    fn frame_round_trip_and_eof() {
        let mut buf = Vec::new();
        write_frame(&mut buf, &Request::Snapshot).unwrap();
        assert_eq!(&buf[..4], &(buf.len() as u32 - 4).to_be_bytes());
        let mut cursor = io::Cursor::new(buf);
        assert_eq!(read_frame::<_, Request>(&mut cursor).unwrap(), Some(Request::Snapshot));
        assert_eq!(read_frame::<_, Request>(&mut cursor).unwrap(), None);
    }

    #[test]
    fn oversized_header_rejected() {
        let mut cursor = io::Cursor::new(u32::MAX.to_be_bytes().to_vec());
        assert!(matches!(read_frame::<_, Request>(&mut cursor), Err(DeviceError::Protocol(_))));
    }
}
