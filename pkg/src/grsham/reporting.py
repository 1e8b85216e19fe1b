"""CSV emission and figure rendering for the report path.

Trajectory CSV columns are fixed: t, q_1..q_r, u, p_1..p_r, phi, H, then
one column per registered conserved quantity; floats carry 17 significant
digits so every number in a report can be re-derived from the file.
Figures are optional companions to the CSV, never a replacement.
"""

from __future__ import annotations

import csv
from typing import Dict, List, Optional, Sequence

import numpy as np

from .catalog import SolutionCurve
from .dopri import IntegratorStats
from .flows import Trajectory


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def trajectory_header(r: int, conserved: Sequence[str]) -> List[str]:
    cols = ["t"]
    cols += [f"q{i + 1}" for i in range(r)]
    cols += ["u"]
    cols += [f"p{i + 1}" for i in range(r)]
    cols += ["phi", "H"]
    cols += list(conserved)
    return cols


def write_trajectory_csv(path: str, traj: Trajectory) -> None:
    names = sorted(traj.conserved)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(trajectory_header(traj.orbit.r, names))
        for i, t in enumerate(traj.times):
            row = [t, *traj.states[i], traj.hvalues[i]]
            row += [traj.conserved[name][i] for name in names]
            writer.writerow(_fmt(float(x)) for x in row)


def read_trajectory_csv(path: str):
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    return header, np.array(rows)


def curve_trajectory(curve: SolutionCurve, grid,
                     conserved=None) -> Trajectory:
    """Sample a catalog curve into the common Trajectory container."""
    from .phase_dynamics import hamiltonian_value

    params = curve.params_obj()
    rows, hvals = [], []
    extra: Dict[str, List[float]] = {name: [] for name in (conserved or {})}
    for t in grid:
        pt = curve.phase_point(float(t), params)
        rows.append(pt.pack())
        hvals.append(hamiltonian_value(curve.orbit, params, pt))
        for name, func in (conserved or {}).items():
            extra[name].append(func(pt))
    return Trajectory(orbit=curve.orbit, params=params,
                      times=np.asarray(grid, dtype=float),
                      states=np.array(rows), hvalues=np.array(hvals),
                      conserved={k: np.array(v) for k, v in extra.items()},
                      stats=IntegratorStats(), reason="closed-form")


def write_table_csv(path: str, header: Sequence[str],
                    rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) if isinstance(x, float) else str(x)
                             for x in row])


def render_trajectory_figure(path: str, traj: Trajectory,
                             title: Optional[str] = None) -> None:
    """Metric coefficients, potential, and |H| to a figure file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    r = traj.orbit.r
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    ts = traj.times
    for i in range(r):
        axes[0].plot(ts, np.exp(traj.states[:, i] / 2.0), label=f"h{i + 1}")
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("h_i")
    axes[0].legend(fontsize=8)
    axes[1].plot(ts, traj.states[:, r], color="tab:purple")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("u")
    hvals = np.abs(traj.hvalues)
    axes[2].semilogy(ts, np.maximum(hvals, 1e-18), color="tab:red")
    axes[2].set_xlabel("t")
    axes[2].set_ylabel("|H|")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
