"""One-round coordinator/worker protocol.

Each worker computes its local truncated eigendecomposition and sends exactly
one message; the coordinator aggregates whatever arrives before the deadline.
Two transports share the same codec: in-process (frames still pass through
encode/decode, so results are bit-identical with the socket path) and TCP.

Wire frame, all little-endian:

    u32  frame length (bytes after this field)
    4s   magic "BDPC"
    u16  version: 1 = rank-q summary, 2 = adds the bundled rank-r block
    u32  machine_id
    u32  p
    u32  q
    u32  n_ell
    f64* values  (q)
    f64* vectors (p*q, column-major)
    -- version 2 only --
    u32  r
    f64* values_r  (r)
    f64* vectors_r (p*r, column-major)
    u32  CRC32 over everything between the version field and this checksum

For version 1 the frame size is exactly q*(p+1)*8 + FRAME_OVERHEAD bytes.
"""

from __future__ import annotations

import logging
import os
import socket
import struct
import threading
import time
import zlib
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .aggregation import AggregateResult, BetaConfig, beta_aggregate
from .errors import CorruptMessage, InvalidInput, IoError, ParseError
from .local_pca import DataShard, TruncatedEig, local_summary, truncate_summary
from .selection import DEFAULT_CANDIDATES, make_folds, select_beta

logger = logging.getLogger(__name__)

FRAME_MAGIC = b"BDPC"
VERSION_BASE = 1
VERSION_WITH_VALIDATION = 2
# length prefix + magic + version + four u32 fields + crc32
FRAME_OVERHEAD = 4 + 4 + 2 + 16 + 4

DEFAULT_TIMEOUT_SECS = 30.0
TIMEOUT_ENV_VAR = "BDPCA_TIMEOUT_SECS"


@dataclass(frozen=True, eq=False)
class LocalSummaryMsg:
    """One worker's contribution: the rank-q summary plus, in CV mode, its
    own rank-r projection for the validation side."""

    machine_id: int
    n_ell: int
    summary: TruncatedEig
    validation: TruncatedEig | None = None

    def __post_init__(self):
        if self.machine_id < 0 or self.n_ell < 1:
            raise InvalidInput("machine_id must be >= 0 and n_ell >= 1")
        if self.validation is not None:
            if self.validation.p != self.summary.p:
                raise InvalidInput("validation block has a different p")
            if self.validation.q > self.summary.q:
                raise InvalidInput("validation rank exceeds the summary rank")

    @property
    def p(self) -> int:
        return self.summary.p

    @property
    def q(self) -> int:
        return self.summary.q


@dataclass(frozen=True)
class FixedBeta:
    """Aggregate at one announced beta."""

    beta: float


@dataclass(frozen=True)
class CvSelect:
    """Select beta by machine-level cross-validation before aggregating."""

    candidates: tuple[float, ...] = DEFAULT_CANDIDATES
    folds: int = 5
    seed: int = 0


@dataclass(frozen=True)
class JobSpec:
    """What the coordinator announces to every worker for one round."""

    r: int
    q: int
    beta_mode: FixedBeta | CvSelect
    delta: float = 1e-5
    center: bool = False

    def __post_init__(self):
        if not 1 <= self.r <= self.q:
            raise InvalidInput(f"need 1 <= r <= q, got r={self.r}, q={self.q}")
        if not isinstance(self.beta_mode, (FixedBeta, CvSelect)):
            raise InvalidInput("beta_mode must be FixedBeta or CvSelect")
        if not self.delta > 0:
            raise InvalidInput("delta must be positive")

    @property
    def protocol_version(self) -> int:
        return VERSION_WITH_VALIDATION if isinstance(self.beta_mode, CvSelect) else VERSION_BASE


def _block_bytes(block: TruncatedEig) -> bytes:
    return (block.values.astype("<f8").tobytes()
            + block.vectors.astype("<f8").tobytes(order="F"))


def encode_summary(msg: LocalSummaryMsg) -> bytes:
    """Serialize one message into a full frame (length prefix included)."""
    version = VERSION_BASE if msg.validation is None else VERSION_WITH_VALIDATION
    payload = struct.pack("<IIII", msg.machine_id, msg.p, msg.q, msg.n_ell)
    payload += _block_bytes(msg.summary)
    if msg.validation is not None:
        payload += struct.pack("<I", msg.validation.q)
        payload += _block_bytes(msg.validation)
    body = FRAME_MAGIC + struct.pack("<H", version) + payload
    body += struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)
    return struct.pack("<I", len(body)) + body


def _take_block(payload: bytes, offset: int, p: int, q: int, what: str):
    need = 8 * q * (p + 1)
    if len(payload) < offset + need:
        raise ParseError(f"frame too short for the {what} block")
    values = np.frombuffer(payload, dtype="<f8", count=q, offset=offset).copy()
    offset += 8 * q
    vectors = np.frombuffer(payload, dtype="<f8", count=p * q, offset=offset) \
        .reshape((p, q), order="F").copy()
    return values, vectors, offset + 8 * p * q


def decode_summary(frame: bytes) -> LocalSummaryMsg:
    """Parse and verify one frame; the inverse of encode_summary.

    Structural problems raise ParseError; a checksum mismatch raises
    CorruptMessage carrying the claimed machine_id.
    """
    if len(frame) < FRAME_OVERHEAD:
        raise ParseError(f"frame of {len(frame)} bytes is shorter than any valid message")
    (length,) = struct.unpack("<I", frame[:4])
    body = frame[4:]
    if len(body) != length:
        raise ParseError(f"frame length field says {length}, got {len(body)} bytes")
    if body[:4] != FRAME_MAGIC:
        raise ParseError(f"bad magic {body[:4]!r}")
    (version,) = struct.unpack("<H", body[4:6])
    if version not in (VERSION_BASE, VERSION_WITH_VALIDATION):
        raise ParseError(f"unsupported protocol version {version}")
    payload, (crc,) = body[6:-4], struct.unpack("<I", body[-4:])
    if len(payload) < 16:
        raise ParseError("frame too short for the fixed header")
    machine_id, p, q, n_ell = struct.unpack("<IIII", payload[:16])
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise CorruptMessage(machine_id, "checksum mismatch")
    if p < 1 or q < 1 or q > p:
        raise ParseError(f"inconsistent dimensions p={p}, q={q}")
    values, vectors, offset = _take_block(payload, 16, p, q, "summary")
    validation = None
    if version == VERSION_WITH_VALIDATION:
        if len(payload) < offset + 4:
            raise ParseError("version-2 frame is missing the validation rank")
        (r,) = struct.unpack("<I", payload[offset:offset + 4])
        if r < 1 or r > q:
            raise ParseError(f"validation rank r={r} inconsistent with q={q}")
        v_values, v_vectors, offset = _take_block(payload, offset + 4, p, r, "validation")
        validation = TruncatedEig(values=v_values, vectors=v_vectors)
    if offset != len(payload):
        raise ParseError(f"{len(payload) - offset} trailing bytes in frame")
    try:
        summary = TruncatedEig(values=values, vectors=vectors)
        return LocalSummaryMsg(machine_id=machine_id, n_ell=n_ell,
                               summary=summary, validation=validation)
    except InvalidInput as exc:
        # the payload is intact (CRC passed) but violates the summary invariants
        raise ParseError(f"frame from machine {machine_id} carries an invalid summary: {exc}") from exc


def worker_round(shard: DataShard, job: JobSpec) -> LocalSummaryMsg:
    """The entire worker side: covariance, rank-q truncation, one message.

    In CV mode the message bundles the worker's own rank-r projection so the
    coordinator can validate without a second round.
    """
    summary = local_summary(shard, job.q, center=job.center)
    validation = None
    if isinstance(job.beta_mode, CvSelect):
        validation = truncate_summary(summary, job.r)
    return LocalSummaryMsg(machine_id=shard.machine_id, n_ell=shard.n_ell,
                           summary=summary, validation=validation)


def coordinator_round(msgs: Sequence[LocalSummaryMsg], job: JobSpec,
                      expected_m: int | None = None) -> AggregateResult:
    """Aggregate the received messages (sorted by machine_id for determinism).

    With expected_m set, machines numbered 1..expected_m that did not report
    are listed in the result's `missing` field and the averaging weight
    becomes 1/(machines received).
    """
    if not msgs:
        raise InvalidInput("no worker messages to aggregate")
    msgs = sorted(msgs, key=lambda m: m.machine_id)
    ids = [m.machine_id for m in msgs]
    if len(set(ids)) != len(ids):
        raise InvalidInput(f"duplicate machine ids in round: {ids}")
    for m in msgs:
        if m.p != msgs[0].p or m.q != msgs[0].q:
            raise InvalidInput("worker messages differ in p or q")
        if m.q != job.q:
            raise InvalidInput(f"worker sent rank {m.q}, job announced q={job.q}")
    missing: tuple[int, ...] = ()
    if expected_m is not None:
        missing = tuple(i for i in range(1, expected_m + 1) if i not in set(ids))
        if missing:
            logger.warning("aggregating without machines %s (%d of %d reported)",
                           missing, len(msgs), expected_m)
    summaries = [m.summary for m in msgs]
    if isinstance(job.beta_mode, FixedBeta):
        cfg = BetaConfig(beta=job.beta_mode.beta, delta=job.delta)
        agg = beta_aggregate(summaries, cfg, job.r)
        return replace(agg, missing=missing)
    mode = job.beta_mode
    validations = [m.validation for m in msgs]
    if any(v is None for v in validations):
        raise InvalidInput("cv mode needs the bundled rank-r block from every worker")
    plan = make_folds(len(msgs), mode.folds, mode.seed,
                      candidate_set=mode.candidates, r=job.r, q=job.q)
    cv = select_beta(summaries, validations, plan,
                     BetaConfig(beta=mode.candidates[0], delta=job.delta))
    agg = beta_aggregate(summaries, BetaConfig(beta=cv.best_beta, delta=job.delta), job.r)
    return replace(agg, cv=cv, missing=missing)


def run_local(shards: Sequence[DataShard], job: JobSpec) -> AggregateResult:
    """In-process transport: frames still round-trip through the codec so the
    result is bit-identical with the socket transport."""
    frames = [encode_summary(worker_round(s, job)) for s in shards]
    msgs = [decode_summary(f) for f in frames]
    return coordinator_round(msgs, job, expected_m=len(shards))


def resolve_timeout(timeout: float | None = None) -> float:
    """Explicit argument, else the BDPCA_TIMEOUT_SECS env var, else 30s."""
    if timeout is not None:
        return float(timeout)
    env = os.environ.get(TIMEOUT_ENV_VAR)
    if env:
        try:
            return float(env)
        except ValueError as exc:
            raise InvalidInput(f"{TIMEOUT_ENV_VAR}={env!r} is not a number") from exc
    return DEFAULT_TIMEOUT_SECS


def _recv_exactly(conn: socket.socket, nbytes: int) -> bytes:
    chunks = []
    got = 0
    while got < nbytes:
        chunk = conn.recv(min(65536, nbytes - got))
        if not chunk:
            raise IoError(f"connection closed after {got} of {nbytes} bytes")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def _read_frame(conn: socket.socket) -> bytes:
    head = _recv_exactly(conn, 4)
    (length,) = struct.unpack("<I", head)
    return head + _recv_exactly(conn, length)


def _collect(server: socket.socket, m: int, timeout: float) -> list[LocalSummaryMsg]:
    deadline = time.monotonic() + timeout
    msgs: list[LocalSummaryMsg] = []
    while len(msgs) < m:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            break
        server.settimeout(remaining)
        try:
            conn, _addr = server.accept()
        except socket.timeout:
            break
        with conn:
            try:
                msgs.append(decode_summary(_read_frame(conn)))
            except (CorruptMessage, ParseError, IoError) as exc:
                logger.warning("dropping bad worker connection: %s", exc)
    return msgs


def serve(host: str, port: int, m: int, job: JobSpec,
          timeout: float | None = None, on_listen=None) -> AggregateResult:
    """Coordinator side of the TCP transport.

    Listens on host:port, waits up to the resolved timeout for m worker
    messages (one frame per connection), then aggregates whatever arrived.
    on_listen, when given, is called with the bound (host, port) before
    accepting; port=0 picks a free port.
    """
    if m < 1:
        raise InvalidInput("need at least one expected worker")
    secs = resolve_timeout(timeout)
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as server:
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            server.bind((host, port))
        except OSError as exc:
            raise IoError(f"cannot bind {host}:{port}: {exc}") from exc
        server.listen(m)
        if on_listen is not None:
            on_listen(server.getsockname()[:2])
        msgs = _collect(server, m, secs)
    if not msgs:
        raise IoError(f"no worker messages arrived within {secs:g}s")
    return coordinator_round(msgs, job, expected_m=m)


def send_summary(host: str, port: int, msg: LocalSummaryMsg,
                 retries: int = 5, backoff: float = 0.2) -> int:
    """Worker side of the TCP transport: one connection, one frame.

    Retries connection refusals briefly so workers may start slightly before
    the coordinator.  Returns the number of bytes sent.
    """
    frame = encode_summary(msg)
    attempt = 0
    while True:
        try:
            with socket.create_connection((host, port), timeout=resolve_timeout(None)) as conn:
                conn.sendall(frame)
            return len(frame)
        except OSError as exc:
            attempt += 1
            if attempt > retries:
                raise IoError(f"cannot deliver summary to {host}:{port}: {exc}") from exc
            time.sleep(backoff)


def run_sockets(shards: Sequence[DataShard], job: JobSpec, host: str = "127.0.0.1",
                port: int = 0, timeout: float | None = None) -> AggregateResult:
    """Drive a full round over loopback TCP: coordinator thread plus one
    send per shard.  Functionally identical to run_local."""
    box: dict = {}
    listening = threading.Event()

    def _serve():
        try:
            box["result"] = serve(host, port, len(shards), job, timeout=timeout,
                                  on_listen=lambda addr: (box.__setitem__("addr", addr),
                                                          listening.set()))
        except BaseException as exc:  # propagate to the caller
            box["error"] = exc
            listening.set()

    thread = threading.Thread(target=_serve, name="bdpca-coordinator", daemon=True)
    thread.start()
    if not listening.wait(resolve_timeout(timeout)):
        raise IoError("coordinator did not start listening in time")
    if "error" in box:
        raise box["error"]
    bound_host, bound_port = box["addr"]
    for shard in shards:
        send_summary(bound_host, bound_port, worker_round(shard, job))
    thread.join(resolve_timeout(timeout) + 5.0)
    if thread.is_alive():
        raise IoError("coordinator thread did not finish")
    if "error" in box:
        raise box["error"]
    return box["result"]
