//! Length-prefixed messages for pipe mode: the payload's byte length in
//! decimal, a newline, then exactly that many bytes of JSON.

use std::io::{self, BufRead, Write};

/// Largest payload accepted, to bound memory on a corrupt stream.
pub const MAX_FRAME: usize = 16 << 20;

/// Reads one frame; `Ok(None)` at a clean end of input.
pub fn read_frame(r: &mut impl BufRead) -> io::Result<Option<Vec<u8>>> {
    let mut header = String::new();
    loop {
        header.clear();
        if r.read_line(&mut header)? == 0 {
            return Ok(None);
        }
        // tolerate blank lines between frames
        if !header.trim().is_empty() {
            break;
        }
    }
    let len: usize = header
        .trim()
        .parse()
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, format!("bad frame header {:?}", header.trim())))?;
    if len > MAX_FRAME {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("frame of {len} bytes is too large")));
    }
    let mut payload = vec![0; len];
    r.read_exact(&mut payload)?;
    Ok(Some(payload))
}

pub fn write_frame(w: &mut impl Write, payload: &[u8]) -> io::Result<()> {
    writeln!(w, "{}", payload.len())?;
    w.write_all(payload)?;
    w.write_all(b"\n")?;
    w.flush()
}
