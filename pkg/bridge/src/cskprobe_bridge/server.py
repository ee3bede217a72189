"""Masked-LM scorer bridge.

Serves mask-fill top-k candidates and vocabulary-membership queries for any
Hugging Face masked-LM checkpoint over the line protocol (newline-delimited
JSON, UTF-8):

    {"op":"hello","version":1}
        -> {"op":"hello","version":1,"mask_marker":"[MASK]","vocab_size":N}
    {"op":"score","id":"p1","text":"...","top_k":10}
        -> {"op":"result","id":"p1","candidates":[["blue",-1.2],...]}
    {"op":"vocab","token":"blue"}
        -> {"op":"vocab","token":"blue","in_vocab":true}
    errors -> {"op":"error","id":"p1","message":"..."}

The bridge is deliberately standalone: it shares a wire format with the
analysis toolkit, not code. Scoring is deterministic (eval mode, no
sampling, no dropout); identical requests in a session return identical
candidate lists. Consecutive score requests are batched through one padded
forward pass, up to the configured batch size, and answered in arrival
order. One model instance serves all connections; inference is serialized.
"""

from __future__ import annotations

import json
import queue
import socketserver
import threading
from dataclasses import dataclass
from typing import IO

import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer

PROTOCOL_VERSION = 1


@dataclass
class BridgeConfig:
    model: str  # checkpoint path or hub name
    device: str = "cpu"
    mask_marker: str | None = None  # None: use the tokenizer's mask token
    max_batch: int = 16
    deterministic: bool = True  # must stay on for reproducible rankings


class ScoreError(Exception):
    """Request-level failure reported as an error frame."""


class MaskFillBackend:
    """Wraps one checkpoint; thread-safe via an inference lock."""

    def __init__(self, config: BridgeConfig):
        self.config = config
        if config.deterministic:
            torch.manual_seed(0)
        try:
            from transformers.utils import logging as hf_logging

            hf_logging.disable_progress_bar()  # keep stderr clean for servers
        except ImportError:
            pass
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        self.model = AutoModelForMaskedLM.from_pretrained(config.model)
        self.model.to(config.device)
        self.model.eval()
        if self.tokenizer.mask_token is None:
            raise ValueError(f"{config.model} has no mask token; not a masked LM")
        self.mask_marker = config.mask_marker or self.tokenizer.mask_token
        self._vocab = self.tokenizer.get_vocab()
        self.max_length = min(
            int(getattr(self.tokenizer, "model_max_length", 1 << 30)),
            int(getattr(self.model.config, "max_position_embeddings", 1 << 30)),
        )
        self._lock = threading.Lock()

    @property
    def vocab_size(self) -> int:
        return len(self._vocab)

    def vocab_contains(self, token: str) -> bool:
        """True iff the token is exactly one unit of the model vocabulary."""
        return token in self._vocab

    def _encode(self, probe_id: str, text: str) -> list[int]:
        n = text.count(self.mask_marker)
        if n != 1:
            raise ScoreError(
                f"{probe_id}: expected exactly one {self.mask_marker!r}, found {n}"
            )
        if self.mask_marker != self.tokenizer.mask_token:
            text = text.replace(self.mask_marker, self.tokenizer.mask_token)
        ids = self.tokenizer.encode(text, truncation=False)
        if len(ids) > self.max_length:
            raise ScoreError(
                f"{probe_id}: text is {len(ids)} tokens, model context is {self.max_length}"
            )
        if ids.count(self.tokenizer.mask_token_id) != 1:
            raise ScoreError(f"{probe_id}: text must contain exactly one mask position")
        return ids

    def score_batch(
        self, requests: list[tuple[str, str, int]]
    ) -> list[tuple[str, list[tuple[str, float]]]]:
        """[(probe_id, text, top_k)] -> [(probe_id, candidates)] in order.

        Raises ScoreError carrying the offending probe_id; the caller turns
        it into an error frame (the whole batch is re-run singly so healthy
        requests still get answers).
        """
        encoded = [self._encode(pid, text) for pid, text, _ in requests]
        pad_id = self.tokenizer.pad_token_id
        if pad_id is None:
            pad_id = 0
        width = max(len(ids) for ids in encoded)
        input_ids = torch.full((len(encoded), width), pad_id, dtype=torch.long)
        attention = torch.zeros((len(encoded), width), dtype=torch.long)
        for row, ids in enumerate(encoded):
            input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            attention[row, : len(ids)] = 1
        input_ids = input_ids.to(self.config.device)
        attention = attention.to(self.config.device)

        with self._lock, torch.no_grad():
            logits = self.model(input_ids=input_ids, attention_mask=attention).logits

        out = []
        mask_id = self.tokenizer.mask_token_id
        for row, (probe_id, _, top_k) in enumerate(requests):
            pos = encoded[row].index(mask_id)
            scores = torch.log_softmax(logits[row, pos], dim=-1)
            k = min(top_k, scores.shape[-1])
            top = torch.topk(scores, k)
            tokens = self.tokenizer.convert_ids_to_tokens(top.indices.tolist())
            out.append((probe_id, list(zip(tokens, top.values.tolist()))))
        return out


# ---------------------------------------------------------------------------
# protocol plumbing


def _error(message: str, probe_id: str | None = None) -> dict:
    frame: dict = {"op": "error", "message": message}
    if probe_id is not None:
        frame["id"] = probe_id
    return frame


def _hello(backend: MaskFillBackend) -> dict:
    return {
        "op": "hello",
        "version": PROTOCOL_VERSION,
        "mask_marker": backend.mask_marker,
        "vocab_size": backend.vocab_size,
    }


def _result(probe_id: str, candidates: list[tuple[str, float]]) -> dict:
    return {"op": "result", "id": probe_id, "candidates": [[t, s] for t, s in candidates]}


def _score_frames(backend: MaskFillBackend, frames: list[dict]) -> list[dict]:
    """Answer a batch of score frames in order; a bad probe gets an error
    frame without poisoning its batchmates."""
    responses: list[dict | None] = []
    requests: list[tuple[str, str, int]] = []
    slots: list[int] = []
    for frame in frames:
        probe_id = frame.get("id")
        text = frame.get("text")
        try:
            top_k = int(frame.get("top_k", 10))
        except (TypeError, ValueError):
            top_k = 0
        if not isinstance(probe_id, str) or not isinstance(text, str) or top_k < 1:
            responses.append(
                _error(
                    "score needs a string id, string text and integer top_k >= 1",
                    probe_id if isinstance(probe_id, str) else None,
                )
            )
            continue
        slots.append(len(responses))
        responses.append(None)
        requests.append((probe_id, text, top_k))

    if requests:
        try:
            scored = [_result(pid, cands) for pid, cands in backend.score_batch(requests)]
        except ScoreError:
            scored = []
            for request in requests:
                try:
                    ((pid, cands),) = backend.score_batch([request])
                    scored.append(_result(pid, cands))
                except ScoreError as exc:
                    scored.append(_error(str(exc), request[0]))
        for slot, resp in zip(slots, scored):
            responses[slot] = resp
    return [r for r in responses if r is not None]


def _handle_single(backend: MaskFillBackend, frame: dict) -> dict:
    op = frame.get("op")
    if op == "hello":
        return _hello(backend)
    if op == "vocab":
        token = frame.get("token")
        if not isinstance(token, str):
            return _error("vocab request needs a string token")
        return {"op": "vocab", "token": token, "in_vocab": backend.vocab_contains(token)}
    return _error(f"unknown op {op!r}")


def serve_stream(backend: MaskFillBackend, rfile: IO[bytes], wfile: IO[bytes]) -> None:
    """Serve one connection until EOF, batching adjacent score requests."""

    frames: "queue.Queue[dict | None]" = queue.Queue()

    def reader() -> None:
        for raw in rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            try:
                frame = json.loads(line)
                if not isinstance(frame, dict):
                    raise ValueError("frame is not an object")
            except ValueError as exc:
                frame = {"op": "__malformed__", "message": str(exc)}
            frames.put(frame)
        frames.put(None)

    threading.Thread(target=reader, daemon=True).start()

    def respond(frame_out: dict) -> None:
        wfile.write((json.dumps(frame_out, ensure_ascii=False) + "\n").encode("utf-8"))

    nothing = object()  # distinct from the EOF sentinel None
    carried: object = nothing
    while True:
        frame = carried if carried is not nothing else frames.get()
        carried = nothing
        if frame is None:
            break
        if frame.get("op") == "__malformed__":
            respond(_error(f"malformed frame: {frame['message']}"))
            wfile.flush()
            continue
        if frame.get("op") != "score":
            respond(_handle_single(backend, frame))
            wfile.flush()
            continue
        batch = [frame]
        while len(batch) < backend.config.max_batch:
            try:
                nxt = frames.get_nowait()
            except queue.Empty:
                break
            if nxt is None or nxt.get("op") != "score":
                carried = nxt
                break
            batch.append(nxt)
        for resp in _score_frames(backend, batch):
            respond(resp)
        wfile.flush()


def serve_stdio(backend: MaskFillBackend) -> None:
    import sys

    serve_stream(backend, sys.stdin.buffer, sys.stdout.buffer)


def serve_tcp(backend: MaskFillBackend, host: str = "127.0.0.1", port: int = 0):
    class Handler(socketserver.StreamRequestHandler):
        def handle(self) -> None:
            serve_stream(backend, self.rfile, self.wfile)

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    return Server((host, port), Handler)
