"""Halftone subcommand: stipple a PGM image."""

import logging
from typing import Optional

import click

from rieszflow.commands.common import GlobalOptions, emit_records, write_text
from rieszflow.halftone import HalftoneConfig, export_svg, run_halftone
from rieszflow.measures import cloud_records

logger = logging.getLogger(__name__)


def halftone_impl(
    cfg: HalftoneConfig,
    csv_out: Optional[str],
    svg_out: Optional[str],
    dot_radius: float,
    canvas_height: float,
    options: GlobalOptions,
):
    dots, log = run_halftone(cfg)
    click.echo(
        f"🎯 Discrepancy {log.energies[0].discrepancy:.6g} -> "
        f"{log.energies[-1].discrepancy:.6g} after {cfg.steps} steps",
        err=True,
    )
    fields, rows = cloud_records(dots)
    emit_records(fields, rows, options, dest=csv_out)
    if svg_out:
        canvas = (canvas_height * cfg.image.aspect, canvas_height)
        write_text(export_svg(dots, dot_radius, canvas, cfg.image.aspect), svg_out)
        click.echo(f"🖼️ Wrote {dots.size} dots to {svg_out}", err=True)
    return dots, log
