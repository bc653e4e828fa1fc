"""Flow subcommand: sample an analytic flow curve on a time grid."""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from rieszflow.analytic_flows import (
    FlowCurve,
    MSigmaState,
    msigma_flow,
    msigma_value,
)
from rieszflow.commands.common import GlobalOptions, Record, emit_records
from rieszflow.kernels import Kernel
from rieszflow.measures import DiscreteMeasure, QuantileGrid, ScalingFamilyPoint

logger = logging.getLogger(__name__)


def _family_rows(t: float, point: ScalingFamilyPoint) -> List[Record]:
    row = {"t": t, "scale": point.scale, "support_radius": point.support_radius}
    row.update({f"shift{k + 1}": v for k, v in enumerate(point.shift)})
    return [row]


def descriptor_rows(t: float, value) -> List[Record]:
    """Flatten one curve value into ``t,descriptor...`` rows."""
    if isinstance(value, ScalingFamilyPoint):
        return _family_rows(t, value)
    if isinstance(value, QuantileGrid):
        s = QuantileGrid.nodes(value.n)
        return [{"t": t, "s": s_k, "q": q_k} for s_k, q_k in zip(s, value.values)]
    if isinstance(value, DiscreteMeasure):
        rows = []
        for point, weight in zip(value.points, value.weights):
            row = {"t": t}
            row.update({f"x{k + 1}": v for k, v in enumerate(point)})
            row["w"] = weight
            rows.append(row)
        return rows
    position, reached = value
    row = {"t": t}
    row.update({f"x{k + 1}": v for k, v in enumerate(np.atleast_1d(position))})
    row["reached"] = bool(reached)
    return [row]


def _fieldnames(rows: Sequence[Record]) -> List[str]:
    names: List[str] = []
    for row in rows:
        names.extend(name for name in row if name not in names)
    return names


def flow_impl(curve: FlowCurve, times: Sequence[float], options: GlobalOptions):
    rows: List[Record] = []
    for t in times:
        rows.extend(descriptor_rows(t, curve.at(t)))
    logger.info("sampled %s at %d times", type(curve).__name__, len(times))
    emit_records(_fieldnames(rows), rows, options)
    return rows


def msigma_impl(
    initial: MSigmaState,
    kernel: Kernel,
    target: QuantileGrid,
    dt: float,
    steps: int,
    options: GlobalOptions,
) -> List[Tuple[float, MSigmaState]]:
    """Rows ``t,m,sigma,value`` of the flow restricted to uniform measures."""
    trajectory = msigma_flow(initial, kernel, target, dt, steps)
    rows = [
        {
            "t": n * dt,
            "m": state.m,
            "sigma": state.sigma,
            "value": msigma_value(state, kernel, target),
        }
        for n, state in enumerate(trajectory)
    ]
    emit_records(["t", "m", "sigma", "value"], rows, options)
    return [(n * dt, state) for n, state in enumerate(trajectory)]
