"""Locate the local minima of the bound gap (the times where the bounds pinch).

Prints one row per minimum: information set, time, normalised gap.
"""
import click

from viscobounds import BoundQuery, InfoSet, default_stress_pair
from viscobounds.optimizer import gap_local_minima


@click.command()
@click.option("--f1", type=float, default=0.4, show_default=True)
@click.option("--t-max", type=float, default=10.0, show_default=True)
@click.option("--samples", type=int, default=400, show_default=True)
def main(f1, t_max, samples):
    pair = default_stress_pair()
    click.echo("info,t,gap")
    for name, info in (("vf", InfoSet(f1)), ("iso+vf", InfoSet(f1, True))):
        for t, gap in gap_local_minima(BoundQuery(pair, info), 0.05, t_max, n=samples):
            click.echo(f"{name},{t:.6f},{gap:.6e}")


if __name__ == "__main__":
    main()
