//! DNS message wire format (RFC 1035 subset).
//!
//! Encoding is canonical: no name compression, names lowercase without the
//! trailing dot. Decoding accepts compression pointers so arbitrary
//! well-formed queries parse. Everything the resolver emits survives
//! decode-then-encode byte-for-byte.

use std::net::Ipv4Addr;

pub const TYPE_A: u16 = 1;
pub const TYPE_AAAA: u16 = 28;
pub const CLASS_IN: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("message truncated at offset {0}")]
    Truncated(usize),
    #[error("bad compression pointer at offset {0}")]
    BadPointer(usize),
    #[error("label exceeds 63 octets")]
    LabelTooLong,
    #[error("name exceeds 253 octets")]
    NameTooLong,
    #[error("{0} trailing bytes after message")]
    TrailingBytes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rcode {
    NoError,
    FormErr,
    ServFail,
    NxDomain,
    NotImp,
    Refused,
}

impl Rcode {
    fn to_u4(self) -> u16 {
        match self {
            Rcode::NoError => 0,
            Rcode::FormErr => 1,
            Rcode::ServFail => 2,
            Rcode::NxDomain => 3,
            Rcode::NotImp => 4,
            Rcode::Refused => 5,
        }
    }

    fn from_u4(v: u16) -> Rcode {
        match v {
            1 => Rcode::FormErr,
            2 => Rcode::ServFail,
            3 => Rcode::NxDomain,
            4 => Rcode::NotImp,
            5 => Rcode::Refused,
            _ => Rcode::NoError,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub response: bool,
    pub opcode: u8,
    pub authoritative: bool,
    pub truncated: bool,
    pub recursion_desired: bool,
    pub recursion_available: bool,
    pub rcode: Rcode,
}

impl Flags {
    pub fn query() -> Flags {
        Flags {
            response: false,
            opcode: 0,
            authoritative: false,
            truncated: false,
            recursion_desired: true,
            recursion_available: false,
            rcode: Rcode::NoError,
        }
    }

    fn encode(self) -> u16 {
        (self.response as u16) << 15
            | (self.opcode as u16 & 0xf) << 11
            | (self.authoritative as u16) << 10
            | (self.truncated as u16) << 9
            | (self.recursion_desired as u16) << 8
            | (self.recursion_available as u16) << 7
            | self.rcode.to_u4()
    }

    fn decode(raw: u16) -> Flags {
        Flags {
            response: raw >> 15 & 1 == 1,
            opcode: (raw >> 11 & 0xf) as u8,
            authoritative: raw >> 10 & 1 == 1,
            truncated: raw >> 9 & 1 == 1,
            recursion_desired: raw >> 8 & 1 == 1,
            recursion_available: raw >> 7 & 1 == 1,
            rcode: Rcode::from_u4(raw & 0xf),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub name: String,
    pub qtype: u16,
    pub qclass: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RData {
    A(Ipv4Addr),
    Other(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub name: String,
    pub rtype: u16,
    pub class: u16,
    pub ttl: u32,
    pub rdata: RData,
}

impl Record {
    pub fn a(name: &str, addr: Ipv4Addr, ttl: u32) -> Record {
        Record {
            name: name.to_string(),
            rtype: TYPE_A,
            class: CLASS_IN,
            ttl,
            rdata: RData::A(addr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub id: u16,
    pub flags: Flags,
    pub questions: Vec<Question>,
    pub answers: Vec<Record>,
}

impl Message {
    /// A stub-style A query for `name`.
    pub fn a_query(id: u16, name: &str) -> Message {
        Message {
            id,
            flags: Flags::query(),
            questions: vec![Question {
                name: name.to_string(),
                qtype: TYPE_A,
                qclass: CLASS_IN,
            }],
            answers: Vec::new(),
        }
    }

    /// An authoritative response to `query` carrying `answers`.
    pub fn response_to(query: &Message, rcode: Rcode, answers: Vec<Record>) -> Message {
        Message {
            id: query.id,
            flags: Flags {
                response: true,
                opcode: query.flags.opcode,
                authoritative: true,
                truncated: false,
                recursion_desired: query.flags.recursion_desired,
                recursion_available: false,
                rcode,
            },
            questions: query.questions.clone(),
            answers,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        let mut out = Vec::with_capacity(64);
        out.extend_from_slice(&self.id.to_be_bytes());
        out.extend_from_slice(&self.flags.encode().to_be_bytes());
        out.extend_from_slice(&(self.questions.len() as u16).to_be_bytes());
        out.extend_from_slice(&(self.answers.len() as u16).to_be_bytes());
        out.extend_from_slice(&0u16.to_be_bytes()); // nscount
        out.extend_from_slice(&0u16.to_be_bytes()); // arcount
        for q in &self.questions {
            encode_name(&q.name, &mut out)?;
            out.extend_from_slice(&q.qtype.to_be_bytes());
            out.extend_from_slice(&q.qclass.to_be_bytes());
        }
        for rr in &self.answers {
            encode_name(&rr.name, &mut out)?;
            out.extend_from_slice(&rr.rtype.to_be_bytes());
            out.extend_from_slice(&rr.class.to_be_bytes());
            out.extend_from_slice(&rr.ttl.to_be_bytes());
            match &rr.rdata {
                RData::A(addr) => {
                    out.extend_from_slice(&4u16.to_be_bytes());
                    out.extend_from_slice(&addr.octets());
                }
                RData::Other(bytes) => {
                    out.extend_from_slice(&(bytes.len() as u16).to_be_bytes());
                    out.extend_from_slice(bytes);
                }
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Message, WireError> {
        let mut cur = Cursor { bytes, pos: 0 };
        let id = cur.u16()?;
        let flags = Flags::decode(cur.u16()?);
        let qdcount = cur.u16()?;
        let ancount = cur.u16()?;
        let nscount = cur.u16()?;
        let arcount = cur.u16()?;
        let mut questions = Vec::with_capacity(qdcount as usize);
        for _ in 0..qdcount {
            let name = cur.name()?;
            questions.push(Question { name, qtype: cur.u16()?, qclass: cur.u16()? });
        }
        let mut answers = Vec::with_capacity(ancount as usize);
        for _ in 0..ancount {
            answers.push(cur.record()?);
        }
        // Authority and additional sections are parsed past and dropped;
        // the resolver never emits them.
        for _ in 0..(nscount as usize + arcount as usize) {
            cur.record()?;
        }
        if cur.pos != bytes.len() {
            return Err(WireError::TrailingBytes(bytes.len() - cur.pos));
        }
        Ok(Message { id, flags, questions, answers })
    }
}

fn encode_name(name: &str, out: &mut Vec<u8>) -> Result<(), WireError> {
    let trimmed = name.strip_suffix('.').unwrap_or(name);
    if trimmed.len() > 253 {
        return Err(WireError::NameTooLong);
    }
    if !trimmed.is_empty() {
        for label in trimmed.split('.') {
            if label.len() > 63 {
                return Err(WireError::LabelTooLong);
            }
            out.push(label.len() as u8);
            out.extend_from_slice(label.as_bytes());
        }
    }
    out.push(0);
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn u8(&mut self) -> Result<u8, WireError> {
        let b = *self.bytes.get(self.pos).ok_or(WireError::Truncated(self.pos))?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes([self.u8()?, self.u8()?]))
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes([self.u8()?, self.u8()?, self.u8()?, self.u8()?]))
    }

    fn take(&mut self, n: usize) -> Result<&[u8], WireError> {
        let end = self.pos + n;
        let slice = self.bytes.get(self.pos..end).ok_or(WireError::Truncated(self.pos))?;
        self.pos = end;
        Ok(slice)
    }

    /// Read a possibly-compressed name starting at the cursor.
    fn name(&mut self) -> Result<String, WireError> {
        let mut labels: Vec<String> = Vec::new();
        let mut jumps = 0;
        let mut pos = self.pos;
        let mut end_after_jump: Option<usize> = None;
        loop {
            let len = *self.bytes.get(pos).ok_or(WireError::Truncated(pos))?;
            if len & 0xc0 == 0xc0 {
                let low = *self.bytes.get(pos + 1).ok_or(WireError::Truncated(pos))?;
                let target = ((len & 0x3f) as usize) << 8 | low as usize;
                if end_after_jump.is_none() {
                    end_after_jump = Some(pos + 2);
                }
                // Pointers must go strictly backwards or loops could spin.
                if target >= pos {
                    return Err(WireError::BadPointer(pos));
                }
                jumps += 1;
                if jumps > 32 {
                    return Err(WireError::BadPointer(pos));
                }
                pos = target;
                continue;
            }
            if len & 0xc0 != 0 {
                return Err(WireError::BadPointer(pos));
            }
            pos += 1;
            if len == 0 {
                break;
            }
            let end = pos + len as usize;
            let raw = self.bytes.get(pos..end).ok_or(WireError::Truncated(pos))?;
            labels.push(String::from_utf8_lossy(raw).into_owned());
            pos = end;
        }
        self.pos = end_after_jump.unwrap_or(pos);
        let name = labels.join(".");
        if name.len() > 253 {
            return Err(WireError::NameTooLong);
        }
        Ok(name)
    }

    fn record(&mut self) -> Result<Record, WireError> {
        let name = self.name()?;
        let rtype = self.u16()?;
        let class = self.u16()?;
        let ttl = self.u32()?;
        let rdlength = self.u16()? as usize;
        let rdata = self.take(rdlength)?;
        let rdata = if rtype == TYPE_A && rdlength == 4 {
            RData::A(Ipv4Addr::new(rdata[0], rdata[1], rdata[2], rdata[3]))
        } else {
            RData::Other(rdata.to_vec())
        };
        Ok(Record { name, rtype, class, ttl, rdata })
    }
}
