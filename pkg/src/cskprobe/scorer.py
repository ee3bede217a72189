"""Pluggable mask-fill scoring.

Protocol v1 is newline-delimited JSON over a byte stream (child-process
stdio or TCP), one object per line, UTF-8:

    {"op":"hello","version":1}
        -> {"op":"hello","version":1,"mask_marker":"[MASK]","vocab_size":N}
    {"op":"score","id":"p1","text":"...","top_k":10}
        -> {"op":"result","id":"p1","candidates":[["animal",-1.2],...]}
    {"op":"vocab","token":"animal"}
        -> {"op":"vocab","token":"animal","in_vocab":true}
    errors -> {"op":"error","id":"p1","message":"..."}

Scores travel as raw log-likelihoods; downstream metrics consume only the
ordering, so backends need not agree on normalization. All backends must be
deterministic: identical requests in one session return identical rankings.

The built-in mock scorer ranks the corpus unigram distribution regardless
of context. It is a deterministic floor baseline for hermetic tests, not a
language model.
"""

from __future__ import annotations

import json
import math
import shlex
import socket
import socketserver
import subprocess
import time
from dataclasses import dataclass
from typing import IO, Callable, Iterable, Mapping, Sequence

from .segmentation import Document, tokenize, word_tokens

__all__ = [
    "PROTOCOL_VERSION",
    "ScoreRequest",
    "RankedPrediction",
    "ScorerError",
    "TransportError",
    "ProtocolError",
    "ConfigError",
    "MockScorer",
    "count_mask_markers",
    "validate_prediction",
    "serve_connection",
    "serve_stdio",
    "serve_tcp",
    "ScorerClient",
]

PROTOCOL_VERSION = 1


class ScorerError(Exception):
    """Base class for scorer-side and transport failures."""


class TransportError(ScorerError):
    pass


class ProtocolError(ScorerError):
    pass


class ConfigError(ScorerError):
    pass


@dataclass(frozen=True)
class ScoreRequest:
    probe_id: str
    text: str
    top_k: int

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class RankedPrediction:
    probe_id: str
    candidates: tuple[tuple[str, float], ...]


def count_mask_markers(text: str, mask_marker: str) -> int:
    return text.count(mask_marker)


def validate_prediction(pred: RankedPrediction, request: ScoreRequest) -> None:
    """Enforce the RankedPrediction invariants for one response."""
    if pred.probe_id != request.probe_id:
        raise ProtocolError(
            f"response id {pred.probe_id!r} does not match request {request.probe_id!r}"
        )
    if len(pred.candidates) > request.top_k:
        raise ProtocolError(f"{pred.probe_id}: more than top_k candidates returned")
    tokens = [t for t, _ in pred.candidates]
    if len(set(tokens)) != len(tokens):
        raise ProtocolError(f"{pred.probe_id}: duplicate candidate tokens")
    scores = [s for _, s in pred.candidates]
    if any(b > a for a, b in zip(scores, scores[1:])):
        raise ProtocolError(f"{pred.probe_id}: candidate scores increase")


class MockScorer:
    """Context-free unigram scorer over a token->frequency model.

    Candidates are the most frequent vocabulary tokens; ties break
    lexicographically. Scores are log relative frequencies.
    """

    def __init__(self, model: Mapping[str, int], mask_marker: str = "[MASK]"):
        if not model:
            raise ValueError("unigram model is empty")
        self.mask_marker = mask_marker
        self._model = dict(model)
        total = sum(self._model.values())
        ranked = sorted(self._model.items(), key=lambda kv: (-kv[1], kv[0]))
        self._ranked = [(tok, math.log(count / total)) for tok, count in ranked]

    @classmethod
    def from_corpus(cls, docs: Iterable[Document], mask_marker: str = "[MASK]") -> "MockScorer":
        counts: dict[str, int] = {}
        for doc in docs:
            for tok in word_tokens(tokenize(doc.text)):
                counts[tok.normalized] = counts.get(tok.normalized, 0) + 1
        return cls(counts, mask_marker)

    @property
    def vocab_size(self) -> int:
        return len(self._model)

    def vocab_contains(self, token: str) -> bool:
        return token in self._model

    def score(self, request: ScoreRequest) -> RankedPrediction:
        n = count_mask_markers(request.text, self.mask_marker)
        if n != 1:
            raise ProtocolError(
                f"{request.probe_id}: expected exactly one {self.mask_marker!r}, found {n}"
            )
        return RankedPrediction(request.probe_id, tuple(self._ranked[: request.top_k]))


# ---------------------------------------------------------------------------
# protocol v1 server


def _error_frame(message: str, probe_id: str | None = None) -> dict:
    frame: dict = {"op": "error", "message": message}
    if probe_id is not None:
        frame["id"] = probe_id
    return frame


def _handle_frame(backend, frame: dict) -> dict:
    op = frame.get("op")
    if op == "hello":
        return {
            "op": "hello",
            "version": PROTOCOL_VERSION,
            "mask_marker": backend.mask_marker,
            "vocab_size": backend.vocab_size,
        }
    if op == "score":
        probe_id = frame.get("id")
        try:
            request = ScoreRequest(probe_id, frame["text"], int(frame.get("top_k", 10)))
        except (KeyError, TypeError, ValueError) as exc:
            return _error_frame(f"bad score request: {exc}", probe_id)
        try:
            pred = backend.score(request)
        except ScorerError as exc:
            return _error_frame(str(exc), probe_id)
        return {
            "op": "result",
            "id": pred.probe_id,
            "candidates": [[t, s] for t, s in pred.candidates],
        }
    if op == "vocab":
        token = frame.get("token")
        if not isinstance(token, str):
            return _error_frame("vocab request needs a string token")
        return {"op": "vocab", "token": token, "in_vocab": bool(backend.vocab_contains(token))}
    return _error_frame(f"unknown op {op!r}")


def serve_connection(backend, rfile: IO[bytes], wfile: IO[bytes]) -> None:
    """Answer protocol v1 frames on a byte stream until EOF.

    The backend needs `mask_marker`, `vocab_size`, `score(ScoreRequest)` and
    `vocab_contains(token)`.
    """
    for raw in rfile:
        line = raw.decode("utf-8", errors="replace").strip()
        if not line:
            continue
        try:
            frame = json.loads(line)
            if not isinstance(frame, dict):
                raise ValueError("frame is not an object")
        except ValueError as exc:
            response = _error_frame(f"malformed frame: {exc}")
        else:
            response = _handle_frame(backend, frame)
        wfile.write((json.dumps(response, ensure_ascii=False) + "\n").encode("utf-8"))
        wfile.flush()


def serve_stdio(backend) -> None:
    import sys

    serve_connection(backend, sys.stdin.buffer, sys.stdout.buffer)


def serve_tcp(backend, host: str = "127.0.0.1", port: int = 0):
    """Serve protocol v1 over TCP; returns the bound server (caller runs
    serve_forever / shutdown). The backend is shared read-only across
    connection threads."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self) -> None:
            serve_connection(backend, self.rfile, self.wfile)

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    return Server((host, port), Handler)


# ---------------------------------------------------------------------------
# client


class ScorerClient:
    """Protocol v1 client over child-process stdio or TCP.

    Endpoint specs: "tcp:HOST:PORT" or "cmd:SHELL_COMMAND". The handshake
    runs on connect; mask-marker mismatches in outgoing requests are
    reported as ConfigError before anything is sent. Timeouts retry with
    backoff on a fresh connection, then fail the batch.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        timeout: float = 30.0,
        retries: int = 2,
        backoff: float = 0.5,
    ):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        self._rfile: IO[bytes] | None = None
        self._wfile: IO[bytes] | None = None
        self.mask_marker: str = ""
        self.vocab_size: int = 0
        self._open()

    # -- connection management

    def _open(self) -> None:
        if self.endpoint.startswith("tcp:"):
            try:
                _, host, port = self.endpoint.split(":")
                sock = socket.create_connection((host, int(port)), timeout=self.timeout)
            except (OSError, ValueError) as exc:
                raise TransportError(f"cannot connect to {self.endpoint}: {exc}")
            sock.settimeout(self.timeout)
            self._sock = sock
            self._rfile = sock.makefile("rb")
            self._wfile = sock.makefile("wb")
        elif self.endpoint.startswith("cmd:"):
            argv = shlex.split(self.endpoint[4:])
            try:
                self._proc = subprocess.Popen(
                    argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE
                )
            except OSError as exc:
                raise TransportError(f"cannot spawn scorer {argv!r}: {exc}")
            self._rfile = self._proc.stdout
            self._wfile = self._proc.stdin
        else:
            raise ConfigError(f"endpoint must be tcp:HOST:PORT or cmd:..., got {self.endpoint!r}")
        self._handshake()

    def close(self) -> None:
        for stream in (self._wfile, self._rfile):
            if stream is not None:
                try:
                    stream.close()
                except OSError:
                    pass
        if self._sock is not None:
            self._sock.close()
            self._sock = None
        if self._proc is not None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
            self._proc = None
        self._rfile = self._wfile = None

    def __enter__(self) -> "ScorerClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _reconnect(self) -> None:
        self.close()
        self._open()

    # -- framing

    def _send(self, frame: dict) -> None:
        assert self._wfile is not None
        try:
            self._wfile.write((json.dumps(frame, ensure_ascii=False) + "\n").encode("utf-8"))
            self._wfile.flush()
        except (OSError, ValueError) as exc:
            raise TransportError(f"send failed: {exc}")

    def _recv(self) -> dict:
        assert self._rfile is not None
        try:
            raw = self._rfile.readline()
        except (OSError, socket.timeout) as exc:
            raise TransportError(f"receive failed: {exc}")
        if not raw:
            raise TransportError("scorer closed the connection")
        try:
            frame = json.loads(raw.decode("utf-8"))
        except ValueError as exc:
            raise ProtocolError(f"unparseable response line: {exc}")
        if not isinstance(frame, dict):
            raise ProtocolError("response is not a JSON object")
        return frame

    def _handshake(self) -> None:
        self._send({"op": "hello", "version": PROTOCOL_VERSION})
        frame = self._recv()
        if frame.get("op") != "hello":
            raise ProtocolError(f"expected hello response, got {frame.get('op')!r}")
        if frame.get("version") != PROTOCOL_VERSION:
            raise ConfigError(f"scorer speaks protocol {frame.get('version')!r}, need {PROTOCOL_VERSION}")
        self.mask_marker = frame.get("mask_marker", "")
        self.vocab_size = int(frame.get("vocab_size", 0))
        if not self.mask_marker:
            raise ProtocolError("handshake did not report a mask marker")

    # -- operations

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[RankedPrediction]:
        """One validated response per request, in request order."""
        for request in requests:
            n = count_mask_markers(request.text, self.mask_marker)
            if n != 1:
                raise ConfigError(
                    f"{request.probe_id}: text has {n} occurrences of the scorer's "
                    f"mask marker {self.mask_marker!r} (need exactly 1)"
                )
        attempt = 0
        while True:
            try:
                return self._score_batch_once(requests)
            except TransportError:
                attempt += 1
                if attempt > self.retries:
                    raise
                time.sleep(self.backoff * (2 ** (attempt - 1)))
                self._reconnect()

    def _score_batch_once(self, requests: Sequence[ScoreRequest]) -> list[RankedPrediction]:
        for request in requests:
            self._send(
                {
                    "op": "score",
                    "id": request.probe_id,
                    "text": request.text,
                    "top_k": request.top_k,
                }
            )
        by_id: dict[str, RankedPrediction] = {}
        for _ in requests:
            frame = self._recv()
            op = frame.get("op")
            if op == "error":
                raise ProtocolError(
                    f"scorer error for {frame.get('id')!r}: {frame.get('message')}"
                )
            if op != "result":
                raise ProtocolError(f"unexpected op {op!r} in score response")
            try:
                candidates = tuple((str(t), float(s)) for t, s in frame["candidates"])
                pred = RankedPrediction(str(frame["id"]), candidates)
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolError(f"malformed result frame: {exc}")
            by_id[pred.probe_id] = pred
        out = []
        for request in requests:
            pred = by_id.get(request.probe_id)
            if pred is None:
                raise ProtocolError(f"no response for probe {request.probe_id!r}")
            validate_prediction(pred, request)
            out.append(pred)
        return out

    def vocab_contains(self, token: str) -> bool:
        self._send({"op": "vocab", "token": token})
        frame = self._recv()
        if frame.get("op") == "error":
            raise ProtocolError(f"vocab query failed: {frame.get('message')}")
        if frame.get("op") != "vocab":
            raise ProtocolError(f"unexpected op {frame.get('op')!r} in vocab response")
        return bool(frame.get("in_vocab"))
