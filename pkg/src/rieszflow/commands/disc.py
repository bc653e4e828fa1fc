"""Disc subcommand: discrepancy decomposition between two point clouds."""

import logging
from dataclasses import asdict

from rieszflow.commands.common import GlobalOptions, emit_records
from rieszflow.kernels import Riesz, Wendland, discrepancy

logger = logging.getLogger(__name__)

FIELDS = ["interaction", "potential", "target_self_energy", "discrepancy"]


def disc_impl(mu, nu, kernel: str, r: float, options: GlobalOptions):
    """Emit one record ``interaction,potential,target_self_energy,discrepancy``."""
    k = Wendland() if kernel == "wendland" else Riesz(r)
    report = discrepancy(k, mu, nu, workers=options.workers)
    logger.info("discrepancy %r (%d vs %d atoms)", report.discrepancy, mu.size, nu.size)
    emit_records(FIELDS, [asdict(report)], options)
    return report
