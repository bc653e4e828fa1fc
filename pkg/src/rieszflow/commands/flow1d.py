"""Flow1d subcommand: Euler flows in quantile space."""

import logging
from typing import Optional

from rieszflow.commands.common import GlobalOptions, emit_records
from rieszflow.flow1d import Flow1DConfig, euler_flow, interaction_flow_1d
from rieszflow.measures import DiscreteMeasure, QuantileGrid, quantile_of_atomic

logger = logging.getLogger(__name__)


def flow1d_impl(
    mu: DiscreteMeasure,
    nu: Optional[DiscreteMeasure],
    cfg: Flow1DConfig,
    options: GlobalOptions,
):
    """Frames ``step,s,q``; without ``nu`` only the interaction term acts."""
    q0 = quantile_of_atomic(mu, cfg.n)
    if nu is None:
        frames = interaction_flow_1d(q0, cfg)
    else:
        frames = euler_flow(q0, quantile_of_atomic(nu, cfg.n), cfg)

    s = QuantileGrid.nodes(cfg.n)
    rows = [
        {"step": step, "s": s_k, "q": q_k}
        for step, grid in zip(cfg.snapshot_steps(), frames)
        for s_k, q_k in zip(s, grid.values)
    ]
    emit_records(["step", "s", "q"], rows, options)
    return frames
