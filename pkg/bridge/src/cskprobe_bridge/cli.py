"""Bridge entry point: serve a masked-LM checkpoint over stdio or TCP."""

from __future__ import annotations

import click

from .server import BridgeConfig, MaskFillBackend, serve_stdio, serve_tcp


@click.command()
@click.option("--model", required=True, help="Checkpoint path or hub name.")
@click.option("--stdio", "use_stdio", is_flag=True)
@click.option("--tcp", "tcp_port", type=int, default=None, help="TCP port (0 = ephemeral).")
@click.option("--mask-marker", default=None,
              help="Marker used in incoming texts; defaults to the model's mask token.")
@click.option("--max-batch", type=int, default=16, show_default=True)
@click.option("--device", default="cpu", show_default=True)
def main(model: str, use_stdio: bool, tcp_port: int | None, mask_marker: str | None,
         max_batch: int, device: str) -> None:
    """Serve top-k mask-fill candidates and vocabulary queries (line
    protocol v1)."""
    if use_stdio == (tcp_port is not None):
        raise click.UsageError("exactly one of --stdio / --tcp PORT is required")
    config = BridgeConfig(
        model=model, device=device, mask_marker=mask_marker, max_batch=max_batch
    )
    try:
        backend = MaskFillBackend(config)
    except (OSError, ValueError) as exc:
        raise click.ClickException(f"cannot load {model}: {exc}")
    if use_stdio:
        serve_stdio(backend)
        return
    server = serve_tcp(backend, port=tcp_port)
    host, port = server.server_address[:2]
    click.echo(f"bridge listening on {host}:{port}", err=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


if __name__ == "__main__":
    main()
