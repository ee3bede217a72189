"""Multi-pattern phrase automaton over integer symbol streams.

The automaton is the throughput-critical kernel of assertion spotting:
corpora are scanned once per document, not once per pattern. Construction
(trie + failure links + output propagation) is one-time pure Python; the
scan inner loop dispatches to a compiled Cython kernel when the extension
built, falling back to a pure-Python scanner otherwise. Set
CSKPROBE_PURE_PYTHON=1 to force the fallback.

Symbols are non-negative ints; a negative symbol never matches and resets
the automaton, which makes it usable as a sentence separator.
"""

from __future__ import annotations

import os
from collections import deque
from typing import Sequence

import numpy as np

from . import _scan_py

try:
    if os.environ.get("CSKPROBE_PURE_PYTHON"):
        raise ImportError("pure-python scan forced via CSKPROBE_PURE_PYTHON")
    from . import _scan_cy
except ImportError:
    _scan_cy = None

DEFAULT_BACKEND = "cython" if _scan_cy is not None else "python"

__all__ = ["PhraseAutomaton", "DEFAULT_BACKEND", "available_backends"]


def available_backends() -> list[str]:
    return ["python"] if _scan_cy is None else ["cython", "python"]


class PhraseAutomaton:
    """Matches a fixed set of phrases (sequences of symbol ids) against
    symbol streams, reporting (phrase_index, end_offset) for every
    occurrence in a single left-to-right pass.

    Immutable after construction; safe to share read-only across workers.
    """

    def __init__(self, phrases: Sequence[Sequence[int]]):
        if not phrases:
            raise ValueError("need at least one phrase")
        self.phrase_lengths = [len(p) for p in phrases]
        if min(self.phrase_lengths) < 1:
            raise ValueError("phrases must be non-empty")

        children: list[dict[int, int]] = [{}]
        emit: list[list[int]] = [[]]
        for pid, phrase in enumerate(phrases):
            node = 0
            for sym in phrase:
                if sym < 0:
                    raise ValueError("phrase symbols must be non-negative")
                nxt = children[node].get(sym)
                if nxt is None:
                    children.append({})
                    emit.append([])
                    nxt = len(children) - 1
                    children[node][sym] = nxt
                node = nxt
            emit[node].append(pid)

        # Failure links by BFS; each node's emit list absorbs its failure
        # target's (already complete at that depth), so emit[state] is the
        # full set of phrases ending at the current position.
        fail = [0] * len(children)
        queue = deque()
        for child in children[0].values():
            queue.append(child)
        while queue:
            node = queue.popleft()
            for sym, child in children[node].items():
                f = fail[node]
                while f and sym not in children[f]:
                    f = fail[f]
                fail[child] = children[f].get(sym, 0)
                emit[child] = emit[child] + emit[fail[child]]
                queue.append(child)

        self._children = children
        self._fail = fail
        self._emit = emit
        self._arrays: tuple[np.ndarray, ...] | None = None
        self._compiled = None

    @property
    def n_nodes(self) -> int:
        return len(self._children)

    def __getstate__(self) -> dict:
        state = self.__dict__.copy()
        state["_compiled"] = None  # rebuilt lazily; not picklable
        return state

    def _csr_arrays(self) -> tuple[np.ndarray, ...]:
        """Flatten to CSR int32 arrays for the compiled kernel."""
        if self._arrays is None:
            n = len(self._children)
            edge_start = np.zeros(n + 1, np.int32)
            syms: list[int] = []
            dsts: list[int] = []
            for i, edges in enumerate(self._children):
                for sym in sorted(edges):
                    syms.append(sym)
                    dsts.append(edges[sym])
                edge_start[i + 1] = len(syms)
            emit_start = np.zeros(n + 1, np.int32)
            pids: list[int] = []
            for i, out in enumerate(self._emit):
                pids.extend(out)
                emit_start[i + 1] = len(pids)
            self._arrays = (
                edge_start,
                np.array(syms, np.int32),
                np.array(dsts, np.int32),
                np.array(self._fail, np.int32),
                emit_start,
                np.array(pids, np.int32),
            )
        return self._arrays

    def scan(
        self, symbols: Sequence[int], backend: str | None = None
    ) -> list[tuple[int, int]]:
        """All (phrase_index, end_offset_exclusive) occurrences in order."""
        backend = backend or DEFAULT_BACKEND
        if backend == "cython":
            if _scan_cy is None:
                raise RuntimeError("cython scan kernel not built")
            if self._compiled is None:
                self._compiled = _scan_cy.CompiledAutomaton(*self._csr_arrays())
            return self._compiled.scan(symbols)
        if backend == "python":
            return _scan_py.scan(self._children, self._fail, self._emit, symbols)
        raise ValueError(f"unknown backend {backend!r}")
