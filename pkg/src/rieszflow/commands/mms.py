"""MMS subcommand: solved times of the minimizing movement scheme."""

import logging

from rieszflow.commands.common import GlobalOptions, emit_records
from rieszflow.mms import limit_curve, run_mms

logger = logging.getLogger(__name__)


def mms_impl(r: float, tau: float, steps: int, emit: str, options: GlobalOptions):
    """Rows ``n,t_n``; with ``emit="f-curves"`` also ``f_tau,f_limit`` at t = n tau."""
    traj = run_mms(tau, r, steps)
    exponent = 1.0 / (2.0 - r)
    rows = []
    for n, t_n in enumerate(traj.times):
        row = {"n": n, "t_n": t_n}
        if emit == "f-curves":
            row["f_tau"] = t_n**exponent
            row["f_limit"] = float(limit_curve(n * tau, r))
        rows.append(row)
    fields = ["n", "t_n"] + (["f_tau", "f_limit"] if emit == "f-curves" else [])
    emit_records(fields, rows, options)
    return traj
