//! 802.11-style broadcast frame around a payload.
//!
//! Header (32 bytes): frame control `08 03`, duration/id = payload length
//! (little-endian), addr1 = broadcast, addr2 = zero, addr3, sequence control
//! (little-endian), addr4, then the message id `0xa21d` (big-endian). The
//! frame ends with a 2-byte CRC-16/CCITT-FALSE over header and payload,
//! big-endian.

use crc::{Crc, CRC_16_IBM_3740};

use super::{WireError, MAX_PAYLOAD};

pub const FRAME_CONTROL: [u8; 2] = [0x08, 0x03];
pub const BROADCAST: [u8; 6] = [0xff; 6];
pub const MESSAGE_ID: u16 = 0xa21d;
pub const HEADER_BYTES: usize = 32;
pub const FCS_BYTES: usize = 2;

const CRC16: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RidFrame {
    pub addr3: [u8; 6],
    pub seq_ctl: u16,
    pub addr4: [u8; 6],
    pub payload: Vec<u8>,
}

pub fn fcs(bytes: &[u8]) -> u16 {
    CRC16.checksum(bytes)
}

pub fn encode_frame(frame: &RidFrame) -> Result<Vec<u8>, WireError> {
    let len = frame.payload.len();
    if len > MAX_PAYLOAD {
        return Err(WireError::Oversize(len));
    }
    let mut out = Vec::with_capacity(HEADER_BYTES + len + FCS_BYTES);
    out.extend_from_slice(&FRAME_CONTROL);
    out.extend_from_slice(&(len as u16).to_le_bytes());
    out.extend_from_slice(&BROADCAST);
    out.extend_from_slice(&[0u8; 6]);
    out.extend_from_slice(&frame.addr3);
    out.extend_from_slice(&frame.seq_ctl.to_le_bytes());
    out.extend_from_slice(&frame.addr4);
    out.extend_from_slice(&MESSAGE_ID.to_be_bytes());
    out.extend_from_slice(&frame.payload);
    let sum = fcs(&out);
    out.extend_from_slice(&sum.to_be_bytes());
    Ok(out)
}

pub fn decode_frame(bytes: &[u8]) -> Result<RidFrame, WireError> {
    let need = HEADER_BYTES + FCS_BYTES;
    if bytes.len() < need {
        return Err(WireError::Truncated {
            need,
            have: bytes.len(),
        });
    }
    let (body, tail) = bytes.split_at(bytes.len() - FCS_BYTES);
    let found = u16::from_be_bytes([tail[0], tail[1]]);
    let computed = fcs(body);
    if found != computed {
        return Err(WireError::Fcs { computed, found });
    }
    if body[..2] != FRAME_CONTROL {
        return Err(WireError::FrameControl(u16::from_be_bytes([
            body[0], body[1],
        ])));
    }
    if body[4..10] != BROADCAST {
        return Err(WireError::NotBroadcast);
    }
    if body[10..16] != [0u8; 6] {
        return Err(WireError::Sender);
    }
    let id = u16::from_be_bytes([body[30], body[31]]);
    if id != MESSAGE_ID {
        return Err(WireError::MessageId(id));
    }
    let payload = &body[HEADER_BYTES..];
    let declared = u16::from_le_bytes([body[2], body[3]]) as usize;
    if declared != payload.len() {
        return Err(WireError::Duration {
            declared,
            actual: payload.len(),
        });
    }
    if payload.len() > MAX_PAYLOAD {
        return Err(WireError::Oversize(payload.len()));
    }
    Ok(RidFrame {
        addr3: body[16..22].try_into().expect("6 bytes"),
        seq_ctl: u16::from_le_bytes([body[22], body[23]]),
        addr4: body[24..30].try_into().expect("6 bytes"),
        payload: payload.to_vec(),
    })
}
