"""Write synthetic measurements from an f1 = 0.4 composite at the two volume-fraction pinch times.

Each value is the midpoint of the volume-fraction bounds, i.e. a response some
f1 = 0.4 microstructure could plausibly produce.
"""
from pathlib import Path

import click

from viscobounds import BoundQuery, InfoSet, default_stress_pair, optimize_bound


@click.command()
@click.option("--f1", type=float, default=0.4, show_default=True)
@click.option("--times", "times", type=float, multiple=True, default=(0.78, 4.3), show_default=True)
@click.option("--out", type=click.Path(path_type=Path),
              default=Path(__file__).resolve().parent.parent / "configs" / "pinch_measurements.csv")
def main(f1, times, out):
    pair = default_stress_pair()
    q = BoundQuery(pair, InfoSet(f1))
    rows = ["t,value"]
    for t in times:
        lo, _ = optimize_bound(q, t, "lower")
        hi, _ = optimize_bound(q, t, "upper")
        rows.append(f"{t!r},{0.5 * (lo + hi)!r}")
    out.write_text("# synthetic midpoint responses, f1 = %r, unit strain step\n" % f1 + "\n".join(rows) + "\n")
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
