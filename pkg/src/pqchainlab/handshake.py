"""Minimal TLS-1.3-style authenticated key establishment over TCP.

One handshake is six framed messages in fixed order:

    C -> S  ClientHello        client_random(32) || group_id(u16) || key share
    S -> C  ServerHello        server_random(32) || server key share
    S -> C  Certificate        count(u8) || (len(u32) || cert bytes)*
    S -> C  CertificateVerify  leaf-key signature over the transcript
    S -> C  ServerFinished     HMAC over the transcript
    C -> S  ClientFinished     HMAC over the transcript

Frames are ``type(u8) || length(u32 BE) || body``.  There is no record
protection, resumption or extension machinery: the protocol isolates
exactly the costs under study (chain transmission, leaf signature,
path validation) with bit-exact byte accounting.

Secrets: ``master = SHA256("ms" || classical_ss? || kem_ss? || th(SH))``
where absent key-exchange components contribute nothing, and
``finished_key = SHA256("fk" || master)``.  CertificateVerify signs
``SHA256("pqchainlab-cv" || th(Certificate))``; the Finished MACs are
HMAC-SHA256 over the running transcript hash.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import socket
import struct
import time
from dataclasses import dataclass
from typing import Optional

from . import pki
from .crypto import backend
from .crypto.backend import RandomBytes, Signer
from .pki import CertificateRecord, HierarchyMaterial, PathError, ServedChainPolicy
from .scenario import KexMode

MSG_CLIENT_HELLO = 1
MSG_SERVER_HELLO = 2
MSG_CERTIFICATE = 3
MSG_CERT_VERIFY = 4
MSG_SERVER_FINISHED = 5
MSG_CLIENT_FINISHED = 6

_HEADER = struct.Struct(">BI")

GROUP_IDS = {
    KexMode.CLASSICAL: 0x001D,
    KexMode.HYBRID: 0x11EC,
    KexMode.PURE_PQC: 0x0201,
}
_GROUP_BY_ID = {v: k for k, v in GROUP_IDS.items()}

CV_CONTEXT = b"pqchainlab-cv"
_MS_LABEL = b"ms"
_FK_LABEL = b"fk"


class HandshakeError(Exception):
    pass


class Malformed(HandshakeError):
    pass


class UnsupportedGroup(HandshakeError):
    pass


class BadCertVerify(HandshakeError):
    pass


class BadFinished(HandshakeError):
    pass


class ChainRejected(HandshakeError):
    def __init__(self, path_error: PathError):
        self.path_error = path_error
        super().__init__(f"chain rejected: {path_error}")


@dataclass
class SessionSecrets:
    classical_ss: Optional[bytes]
    kem_ss: Optional[bytes]
    master_secret: bytes
    finished_key: bytes


@dataclass(frozen=True)
class ChainObservation:
    chain_len_unique: int
    chain_bytes_unique: int
    served_chain_der_bytes: int


def derive_secrets(
    classical_ss: Optional[bytes], kem_ss: Optional[bytes], th_server_hello: bytes
) -> SessionSecrets:
    material = _MS_LABEL + (classical_ss or b"") + (kem_ss or b"") + th_server_hello
    master = hashlib.sha256(material).digest()
    finished = hashlib.sha256(_FK_LABEL + master).digest()
    return SessionSecrets(classical_ss, kem_ss, master, finished)


class Conn:
    """Framed messaging over a socket with byte accounting."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.bytes_read = 0
        self.bytes_written = 0
        self.transcript = hashlib.sha256()

    def send_msg(self, msg_type: int, body: bytes) -> None:
        frame = _HEADER.pack(msg_type, len(body)) + body
        self.sock.sendall(frame)
        self.bytes_written += len(frame)
        self.transcript.update(frame)

    def _recv_exact(self, n: int) -> bytes:
        chunks = []
        remaining = n
        while remaining:
            chunk = self.sock.recv(min(remaining, 65536))
            if not chunk:
                raise Malformed("connection closed mid-message")
            chunks.append(chunk)
            remaining -= len(chunk)
        self.bytes_read += n
        return b"".join(chunks)

    def recv_msg(self, expected_type: int) -> bytes:
        header = self._recv_exact(_HEADER.size)
        msg_type, length = _HEADER.unpack(header)
        if msg_type != expected_type:
            raise Malformed(f"expected message type {expected_type}, got {msg_type}")
        if length > 1 << 24:
            raise Malformed("oversized message")
        body = self._recv_exact(length)
        self.transcript.update(header + body)
        return body

    def transcript_hash(self) -> bytes:
        return self.transcript.copy().digest()


def encode_certificate_msg(chain: list[CertificateRecord]) -> bytes:
    body = [struct.pack(">B", len(chain))]
    for cert in chain:
        body.append(struct.pack(">I", len(cert.encoded)))
        body.append(cert.encoded)
    return b"".join(body)


def decode_certificate_msg(body: bytes) -> list[CertificateRecord]:
    try:
        (count,) = struct.unpack_from(">B", body, 0)
        offset = 1
        certs = []
        for _ in range(count):
            (n,) = struct.unpack_from(">I", body, offset)
            offset += 4
            certs.append(pki.decode_certificate(body[offset : offset + n]))
            offset += n
        if offset != len(body) or not certs:
            raise Malformed("bad certificate message framing")
        return certs
    except (struct.error, pki.CodecError) as exc:
        raise Malformed(f"bad certificate message: {exc}") from exc


def _cv_message(th_certificate: bytes) -> bytes:
    return hashlib.sha256(CV_CONTEXT + th_certificate).digest()


# --- client -------------------------------------------------------------


@dataclass
class ClientResult:
    secrets: SessionSecrets
    observation: ChainObservation
    bytes_read: int
    bytes_written: int


def client_handshake(
    sock: socket.socket,
    kex: KexMode,
    trust_store: list[CertificateRecord],
    now: int = pki.DEFAULT_NOW,
    rng: RandomBytes = os.urandom,
) -> ClientResult:
    """Run the client side on a connected socket; raises HandshakeError."""
    conn = Conn(sock)
    share, state = backend.client_share(kex, rng)
    conn.send_msg(
        MSG_CLIENT_HELLO, rng(32) + struct.pack(">H", GROUP_IDS[kex]) + share
    )

    sh = conn.recv_msg(MSG_SERVER_HELLO)
    if len(sh) != 32 + backend.server_share_len(kex):
        raise Malformed("bad ServerHello length")
    classical_ss, kem_ss = backend.client_complete_kex(state, sh[32:])
    secrets = derive_secrets(classical_ss, kem_ss, conn.transcript_hash())

    cert_body = conn.recv_msg(MSG_CERTIFICATE)
    served = decode_certificate_msg(cert_body)
    th_cert = conn.transcript_hash()
    observation = ChainObservation(
        chain_len_unique=pki.chain_len_unique(served),
        chain_bytes_unique=pki.chain_bytes_unique(served),
        served_chain_der_bytes=len(cert_body),
    )
    try:
        pki.validate_chain(served, trust_store, now)
    except PathError as exc:
        raise ChainRejected(exc) from exc

    leaf = served[0]
    cv = conn.recv_msg(MSG_CERT_VERIFY)
    if not backend.verify(leaf.key_family, leaf.public_key, _cv_message(th_cert), cv):
        raise BadCertVerify("CertificateVerify does not verify under the leaf key")

    th_cv = conn.transcript_hash()
    sf = conn.recv_msg(MSG_SERVER_FINISHED)
    if not hmac.compare_digest(sf, hmac.new(secrets.finished_key, th_cv, hashlib.sha256).digest()):
        raise BadFinished("ServerFinished MAC mismatch")

    conn.send_msg(
        MSG_CLIENT_FINISHED,
        hmac.new(secrets.finished_key, conn.transcript_hash(), hashlib.sha256).digest(),
    )
    return ClientResult(secrets, observation, conn.bytes_read, conn.bytes_written)


# --- server -------------------------------------------------------------


@dataclass
class ServerMaterial:
    """Everything the server needs to answer handshakes for one scenario."""

    kex: KexMode
    chain: list[CertificateRecord]
    leaf_signer: Signer

    @classmethod
    def from_hierarchy(
        cls, h: HierarchyMaterial, kex: KexMode, policy: ServedChainPolicy
    ) -> "ServerMaterial":
        return cls(kex=kex, chain=pki.served_chain(h, policy), leaf_signer=Signer(h.leaf[1]))


@dataclass
class ServerResult:
    secrets: SessionSecrets
    bytes_read: int
    bytes_written: int
    client_finished_ok: bool


def server_handshake(
    sock: socket.socket, material: ServerMaterial, rng: RandomBytes = os.urandom
) -> ServerResult:
    """Serve one handshake on an accepted socket; raises HandshakeError."""
    conn = Conn(sock)
    hello = conn.recv_msg(MSG_CLIENT_HELLO)
    if len(hello) < 34:
        raise Malformed("short ClientHello")
    (group_id,) = struct.unpack_from(">H", hello, 32)
    mode = _GROUP_BY_ID.get(group_id)
    if mode is None or mode is not material.kex:
        raise UnsupportedGroup(f"group 0x{group_id:04x} not enabled for this scenario")
    share = hello[34:]

    server_share, classical_ss, kem_ss = backend.server_respond_kex(mode, share, rng)
    conn.send_msg(MSG_SERVER_HELLO, rng(32) + server_share)
    secrets = derive_secrets(classical_ss, kem_ss, conn.transcript_hash())

    conn.send_msg(MSG_CERTIFICATE, encode_certificate_msg(material.chain))
    th_cert = conn.transcript_hash()
    conn.send_msg(MSG_CERT_VERIFY, material.leaf_signer.sign(_cv_message(th_cert)))

    th_cv = conn.transcript_hash()
    conn.send_msg(
        MSG_SERVER_FINISHED, hmac.new(secrets.finished_key, th_cv, hashlib.sha256).digest()
    )

    th_sf = conn.transcript_hash()
    cf = conn.recv_msg(MSG_CLIENT_FINISHED)
    ok = hmac.compare_digest(cf, hmac.new(secrets.finished_key, th_sf, hashlib.sha256).digest())
    return ServerResult(secrets, conn.bytes_read, conn.bytes_written, ok)


# --- serving loop with control channel ----------------------------------


def run_server(
    listener: socket.socket,
    material: ServerMaterial,
    control: Optional[socket.socket] = None,
    max_connections: Optional[int] = None,
    rng: RandomBytes = os.urandom,
) -> int:
    """Accept and serve handshakes strictly sequentially.

    After each connection a JSON line
    ``{"connection_index": i, "server_cpu_ms": x, "bytes_in": n, "bytes_out": m}``
    is written to the control socket.  Transport or protocol failures drop
    the connection and continue; the loop ends after ``max_connections``
    or when the listener closes.  Returns the number of completed
    handshakes.
    """
    ctrl_file = control.makefile("w") if control is not None else None
    completed = 0
    index = 0
    while max_connections is None or index < max_connections:
        try:
            sock, _ = listener.accept()
        except OSError:
            break
        record = None
        try:
            with sock:
                sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                cpu0 = time.thread_time_ns()
                result = server_handshake(sock, material, rng)
                cpu_ms = (time.thread_time_ns() - cpu0) / 1e6
                record = {
                    "connection_index": index,
                    "server_cpu_ms": cpu_ms,
                    "bytes_in": result.bytes_read,
                    "bytes_out": result.bytes_written,
                }
                completed += 1
        except (HandshakeError, OSError) as exc:
            record = {"connection_index": index, "error": str(exc)}
        index += 1
        if ctrl_file is not None and record is not None:
            try:
                ctrl_file.write(json.dumps(record) + "\n")
                ctrl_file.flush()
            except OSError:
                break
    return completed


def serve_scenario_process(
    listener: socket.socket,
    control_listener: socket.socket,
    pki_dir: str,
    kex_label: str,
    policy_label: str,
    max_connections: Optional[int] = None,
) -> None:
    """Entry point for a forked server process: load material, serve, report."""
    h = pki.load_hierarchy(pki_dir)
    material = ServerMaterial.from_hierarchy(
        h, KexMode.from_label(kex_label), ServedChainPolicy.from_label(policy_label)
    )
    control, _ = control_listener.accept()
    control_listener.close()
    with control:
        run_server(listener, material, control, max_connections)
    listener.close()
