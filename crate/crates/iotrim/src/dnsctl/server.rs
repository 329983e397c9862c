//! Datagram endpoint so the resolver can stand alone as a gateway piece.

use std::collections::HashMap;
use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::Duration;

use super::wire::{Flags, Message, Rcode};
use super::Resolver;

/// UDP DNS server over a shared [`Resolver`].
///
/// Per-device views are matched on the client's source address, standing in
/// for source-IP views: register a client address for a device id and its
/// queries resolve through that device's view. Unregistered clients get the
/// ALL-scoped view.
pub struct DnsServer {
    socket: UdpSocket,
    local_addr: SocketAddr,
    clients: Arc<RwLock<HashMap<SocketAddr, String>>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl DnsServer {
    /// Bind and serve on `bind_addr` (use port 0 for an ephemeral port).
    pub fn spawn(resolver: Arc<Resolver>, bind_addr: &str) -> io::Result<DnsServer> {
        let socket = UdpSocket::bind(bind_addr)?;
        socket.set_read_timeout(Some(Duration::from_millis(25)))?;
        let local_addr = socket.local_addr()?;
        let clients: Arc<RwLock<HashMap<SocketAddr, String>>> = Arc::default();
        let stop = Arc::new(AtomicBool::new(false));

        let loop_socket = socket.try_clone()?;
        let loop_clients = Arc::clone(&clients);
        let loop_stop = Arc::clone(&stop);
        let handle = std::thread::spawn(move || {
            let mut buf = [0u8; 1500];
            while !loop_stop.load(Ordering::Relaxed) {
                let (len, src) = match loop_socket.recv_from(&mut buf) {
                    Ok(pair) => pair,
                    Err(e)
                        if e.kind() == io::ErrorKind::WouldBlock
                            || e.kind() == io::ErrorKind::TimedOut =>
                    {
                        continue
                    }
                    Err(_) => break,
                };
                let datagram = &buf[..len];
                let device = loop_clients.read().unwrap().get(&src).cloned();
                let response = match Message::decode(datagram) {
                    Ok(query) => resolver.handle_query(&query, device.as_deref()),
                    Err(_) => match formerr_for(datagram) {
                        Some(msg) => msg,
                        None => continue, // not even an id to echo
                    },
                };
                if let Ok(bytes) = response.encode() {
                    let _ = loop_socket.send_to(&bytes, src);
                }
            }
        });

        Ok(DnsServer { socket, local_addr, clients, stop, handle: Some(handle) })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Route queries from `addr` through `device`'s view.
    pub fn register_client(&self, addr: SocketAddr, device: &str) {
        self.clients.write().unwrap().insert(addr, device.to_string());
    }

    pub fn shutdown(mut self) {
        self.stop_loop();
    }

    fn stop_loop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        // Nudge the socket out of its recv wait.
        let _ = self.socket.send_to(&[], self.local_addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

impl Drop for DnsServer {
    fn drop(&mut self) {
        if self.handle.is_some() {
            self.stop_loop();
        }
    }
}

/// Minimal FORMERR reply for datagrams that do not parse: echo the id when
/// present, no question section.
fn formerr_for(datagram: &[u8]) -> Option<Message> {
    if datagram.len() < 2 {
        return None;
    }
    let id = u16::from_be_bytes([datagram[0], datagram[1]]);
    Some(Message {
        id,
        flags: Flags {
            response: true,
            opcode: 0,
            authoritative: false,
            truncated: false,
            recursion_desired: false,
            recursion_available: false,
            rcode: Rcode::FormErr,
        },
        questions: Vec::new(),
        answers: Vec::new(),
    })
}
