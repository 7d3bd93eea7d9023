"""Run every config in configs/ through the matching CLI command.

Outputs land wherever each config's [output].path points (results/ by default).
"""
import sys
from pathlib import Path

import click
from click.testing import CliRunner

from viscobounds.cli import main as cli

ROOT = Path(__file__).resolve().parent.parent


def command_for(name: str) -> str:
    for cmd in ("domain", "kernel", "invert", "correlate"):
        if name.startswith(cmd):
            return cmd
    return "bounds"


@click.command()
@click.option("--threads", type=int, default=4, show_default=True)
@click.option("--grid-scale", type=float, default=1.0, show_default=True)
@click.option("--only", default="", help="Substring filter on config names.")
def main(threads, grid_scale, only):
    runner = CliRunner()
    failed = 0
    for cfg in sorted((ROOT / "configs").glob("*.toml")):
        if only not in cfg.stem:
            continue
        cmd = command_for(cfg.stem)
        args = [cmd, "--config", str(cfg), "--threads", str(threads), "--grid-scale", str(grid_scale)]
        res = runner.invoke(cli, args)
        status = "ok" if res.exit_code == 0 else f"exit {res.exit_code}"
        click.echo(f"{cfg.name:32s} {cmd:10s} {status}")
        if res.exit_code:
            failed += 1
            click.echo(res.output, err=True)
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
