# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled scan kernel.

A CompiledAutomaton wraps the flattened automaton arrays once (buffer
acquisition per construction, not per scan) and walks int symbol streams
with C-level binary-searched transitions, so per-call overhead stays small
even for sentence-sized streams.
"""

import numpy as np


cdef class CompiledAutomaton:
    cdef const int[::1] edge_start
    cdef const int[::1] edge_sym
    cdef const int[::1] edge_dst
    cdef const int[::1] fail
    cdef const int[::1] emit_start
    cdef const int[::1] emit_pid

    def __init__(self, edge_start, edge_sym, edge_dst, fail, emit_start, emit_pid):
        self.edge_start = edge_start
        self.edge_sym = edge_sym
        self.edge_dst = edge_dst
        self.fail = fail
        self.emit_start = emit_start
        self.emit_pid = emit_pid

    cdef inline int _goto(self, int state, int sym) noexcept nogil:
        cdef int lo = self.edge_start[state]
        cdef int hi = self.edge_start[state + 1]
        cdef int mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.edge_sym[mid] < sym:
                lo = mid + 1
            else:
                hi = mid
        if lo < self.edge_start[state + 1] and self.edge_sym[lo] == sym:
            return self.edge_dst[lo]
        return -1

    def scan(self, seq):
        """All (phrase_index, end_offset) occurrences over an int sequence."""
        cdef list out = []
        cdef int state = 0
        cdef int sym, target, e
        cdef Py_ssize_t i = 0
        for obj in seq:
            sym = obj
            i += 1
            if sym < 0:
                state = 0
                continue
            while True:
                target = self._goto(state, sym)
                if target >= 0:
                    state = target
                    break
                if state == 0:
                    break
                state = self.fail[state]
            for e in range(self.emit_start[state], self.emit_start[state + 1]):
                out.append((self.emit_pid[e], i))
        return out
