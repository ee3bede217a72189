"""Pure-Python scan fallback. Same contract as the compiled kernel."""

from __future__ import annotations

from typing import Sequence


def scan(
    children: list[dict[int, int]],
    fail: list[int],
    emit: list[list[int]],
    seq: Sequence[int],
) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    state = 0
    for i, sym in enumerate(seq):
        if sym < 0:
            state = 0
            continue
        while state and sym not in children[state]:
            state = fail[state]
        state = children[state].get(sym, 0)
        for pid in emit[state]:
            out.append((pid, i + 1))
    return out
