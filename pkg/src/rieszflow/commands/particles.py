"""Particles subcommand: Euler-forward particle flows of the discrepancy."""

import logging
from typing import Optional

from rieszflow.commands.common import GlobalOptions, emit_records
from rieszflow.particles import SimConfig, energy_records, run, snapshot_records

logger = logging.getLogger(__name__)


def particles_impl(cfg: SimConfig, energy_out: Optional[str], options: GlobalOptions):
    """Snapshots to ``--out``; the energy trace to ``energy_out`` when given."""
    log = run(cfg)
    fields, rows = snapshot_records(log.snapshots)
    emit_records(fields, rows, options)
    if energy_out:
        fields, rows = energy_records(log)
        emit_records(fields, rows, options, dest=energy_out)
    if log.violations:
        logger.warning("%d steps exceeded the energy slack", log.violations)
    return log
