"""Masked-LM scorer bridge for the cskprobe line protocol."""

from .server import BridgeConfig, MaskFillBackend, serve_stdio, serve_tcp

__version__ = "0.1.0"
