"""Equilibrium subcommand: eta*, its energy and the proximal scale."""

import json
from typing import Optional

from rieszflow.commands.common import GlobalOptions, emit_records, write_text
from rieszflow.equilibrium import c_tau, equilibrium_unit


def equilibrium_record(d: int, r: float, tau: Optional[float] = None) -> dict:
    sol = equilibrium_unit(d, r)
    record = {
        "d": d,
        "r": r,
        "variant": sol.variant,
        "scale": sol.scale,
        "second_moment": sol.eta_star.second_moment(),
        "energy": sol.energy,
    }
    if tau is not None:
        record["tau"] = tau
        record["c_tau"] = c_tau(tau, sol)
    return record


def equilibrium_impl(d: int, r: float, tau: Optional[float], options: GlobalOptions):
    """A JSON object by default; ``--format csv`` gives a one-row table."""
    record = equilibrium_record(d, r, tau)
    if options.output_format(default="json") == "csv":
        emit_records(list(record), [record], options)
    else:
        write_text(json.dumps(record, indent=2) + "\n", options.out)
    return record
