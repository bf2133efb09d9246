"""AC power flow per timestep: Newton-Raphson in polar coordinates.

Internal math is per-unit on the network's nominal voltage and base power.
Each step starts flat (1.0 p.u, 0 rad) so results are order-independent and
steps can be solved in parallel. The slack bus is ideal: fixed at 1.0 p.u and
0 rad; the transformer rating only enters the reverse-flow statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PowerFlowError
from .milp import BuildingDesign
from .network import Network, injections_at_buses
from .timeseries import TimeGrid

DEFAULT_TOLERANCE_PU = 1e-8
DEFAULT_MAX_ITERATIONS = 50
DEFAULT_FLAGGED_FRACTION = 1e-3


@dataclass(frozen=True)
class PowerFlowOptions:
    tolerance_pu: float = DEFAULT_TOLERANCE_PU
    max_iterations: int = DEFAULT_MAX_ITERATIONS


@dataclass(frozen=True)
class PowerFlowResult:
    step: int
    bus_voltage_pu: np.ndarray  # aligned to net.buses
    bus_angle_rad: np.ndarray
    line_current_a: np.ndarray  # aligned to net.lines
    slack_power_kw: float  # positive = feeding the LV side, negative = reverse
    converged: bool = True
    residual_pu: float = 0.0
    iterations: int = 0


def admittance_matrix(net: Network) -> np.ndarray:
    """Bus admittance matrix in per-unit (series line impedances only)."""
    n = len(net.buses)
    v_base = net.slack_bus.nominal_voltage
    z_base = v_base * v_base / (net.base_power_kva * 1000.0)
    ybus = np.zeros((n, n), dtype=complex)
    index = {bus.id: i for i, bus in enumerate(net.buses)}
    for line in net.lines:
        z_pu = complex(line.resistance, line.reactance) / z_base
        if z_pu == 0:
            raise PowerFlowError(f"line {line.id} has zero impedance")
        y = 1.0 / z_pu
        i, j = index[line.from_bus], index[line.to_bus]
        ybus[i, i] += y
        ybus[j, j] += y
        ybus[i, j] -= y
        ybus[j, i] -= y
    return ybus


def power_mismatch(
    ybus: np.ndarray,
    voltage: np.ndarray,
    angle: np.ndarray,
    p_spec: np.ndarray,
    q_spec: np.ndarray,
    pq_index: np.ndarray,
) -> np.ndarray:
    """Stacked active/reactive power mismatch at the PQ buses (per-unit)."""
    v = voltage * np.exp(1j * angle)
    s_calc = v * np.conj(ybus @ v)
    dp = p_spec[pq_index] - s_calc.real[pq_index]
    dq = q_spec[pq_index] - s_calc.imag[pq_index]
    return np.concatenate([dp, dq])


def power_jacobian(
    ybus: np.ndarray,
    voltage: np.ndarray,
    angle: np.ndarray,
    pq_index: np.ndarray,
) -> np.ndarray:
    """Jacobian of calculated (P, Q) w.r.t. (angle, magnitude) at PQ buses."""
    g, b = ybus.real, ybus.imag
    theta = angle[:, None] - angle[None, :]
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    vv = voltage[:, None] * voltage[None, :]

    p_calc = (vv * (g * cos_t + b * sin_t)).sum(axis=1)
    q_calc = (vv * (g * sin_t - b * cos_t)).sum(axis=1)

    # off-diagonal blocks
    dp_dth = vv * (g * sin_t - b * cos_t)
    dp_dv = voltage[:, None] * (g * cos_t + b * sin_t)
    dq_dth = -vv * (g * cos_t + b * sin_t)
    dq_dv = voltage[:, None] * (g * sin_t - b * cos_t)

    # diagonals
    np.fill_diagonal(dp_dth, -q_calc - b.diagonal() * voltage**2)
    np.fill_diagonal(dp_dv, p_calc / voltage + g.diagonal() * voltage)
    np.fill_diagonal(dq_dth, p_calc - g.diagonal() * voltage**2)
    np.fill_diagonal(dq_dv, q_calc / voltage - b.diagonal() * voltage)

    idx = np.ix_(pq_index, pq_index)
    top = np.hstack([dp_dth[idx], dp_dv[idx]])
    bottom = np.hstack([dq_dth[idx], dq_dv[idx]])
    return np.vstack([top, bottom])


def _injection_vectors(net: Network, injections: dict[str, float]):
    """Per-unit specified P, Q (generation positive) from consumption in kW."""
    n = len(net.buses)
    p_spec = np.zeros(n)
    q_spec = np.zeros(n)
    tan_phi = math.tan(math.acos(net.power_factor))
    for bus_id, consumption_kw in injections.items():
        i = net.bus_index(bus_id)
        p_spec[i] = -consumption_kw / net.base_power_kva
        q_spec[i] = p_spec[i] * tan_phi
    return p_spec, q_spec


def solve_step(
    net: Network,
    injections: dict[str, float],
    opts: PowerFlowOptions | None = None,
    *,
    step: int = 0,
    ybus: np.ndarray | None = None,
) -> PowerFlowResult:
    """Newton-Raphson solve for one step's injections (kW, consumption > 0)."""
    opts = opts or PowerFlowOptions()
    if ybus is None:
        ybus = admittance_matrix(net)
    n = len(net.buses)
    slack = net.bus_index(net.slack_bus.id)
    pq_index = np.array([i for i in range(n) if i != slack], dtype=np.int64)
    for bus_id in injections:
        if bus_id not in net.bus_ids:
            raise PowerFlowError(f"injection at unknown bus {bus_id}")

    p_spec, q_spec = _injection_vectors(net, injections)

    voltage = np.ones(n)
    angle = np.zeros(n)
    residual = np.inf
    converged = False
    iterations = 0

    def newton_update():
        mismatch = power_mismatch(ybus, voltage, angle, p_spec, q_spec, pq_index)
        jac = power_jacobian(ybus, voltage, angle, pq_index)
        try:
            delta = np.linalg.solve(jac, mismatch)
        except np.linalg.LinAlgError as exc:
            raise PowerFlowError(f"singular Jacobian at step {step}: {exc}") from exc
        k = len(pq_index)
        angle[pq_index] += delta[:k]
        voltage[pq_index] += delta[k:]

    for iterations in range(1, opts.max_iterations + 1):
        mismatch = power_mismatch(ybus, voltage, angle, p_spec, q_spec, pq_index)
        residual = float(np.abs(mismatch).max(initial=0.0))
        if residual <= opts.tolerance_pu:
            converged = True
            break
        newton_update()

    if converged and residual > 1e-14:
        # one polishing update takes the quadratically convergent iterate from
        # just-below-tolerance to machine precision; keep the better of the two
        saved = (voltage.copy(), angle.copy(), residual)
        newton_update()
        mismatch = power_mismatch(ybus, voltage, angle, p_spec, q_spec, pq_index)
        polished = float(np.abs(mismatch).max(initial=0.0))
        if polished <= residual:
            residual = polished
        else:
            voltage, angle, residual = saved

    v = voltage * np.exp(1j * angle)
    v_base = net.slack_bus.nominal_voltage
    z_base = v_base * v_base / (net.base_power_kva * 1000.0)
    current_base = net.base_power_kva * 1000.0 / (math.sqrt(3.0) * v_base)
    index = {bus.id: i for i, bus in enumerate(net.buses)}
    currents = np.zeros(len(net.lines))
    for k, line in enumerate(net.lines):
        z_pu = complex(line.resistance, line.reactance) / z_base
        i_pu = (v[index[line.from_bus]] - v[index[line.to_bus]]) / z_pu
        currents[k] = abs(i_pu) * current_base

    s_slack = v[slack] * np.conj(ybus[slack] @ v)
    slack_power_kw = float(s_slack.real) * net.base_power_kva

    return PowerFlowResult(
        step=step,
        bus_voltage_pu=voltage,
        bus_angle_rad=angle,
        line_current_a=currents,
        slack_power_kw=slack_power_kw,
        converged=converged,
        residual_pu=residual,
        iterations=iterations,
    )


def solve_horizon(
    net: Network,
    designs: list[BuildingDesign],
    grid: TimeGrid,
    opts: PowerFlowOptions | None = None,
    *,
    flagged_fraction: float = DEFAULT_FLAGGED_FRACTION,
) -> list[PowerFlowResult]:
    """One power-flow result per step of the horizon.

    Non-converged steps are kept (flagged, carrying the last iterate) and the
    run fails only when their fraction exceeds ``flagged_fraction``.
    """
    opts = opts or PowerFlowOptions()
    ybus = admittance_matrix(net)
    results: list[PowerFlowResult] = []
    flagged: list[int] = []
    for t in range(grid.step_count):
        injections = injections_at_buses(designs, net, t)
        result = solve_step(net, injections, opts, step=t, ybus=ybus)
        if not result.converged:
            flagged.append(t)
        results.append(result)
    if grid.step_count and len(flagged) / grid.step_count > flagged_fraction:
        raise PowerFlowError(
            f"{len(flagged)} of {grid.step_count} steps failed to converge: "
            f"{flagged[:20]}{'...' if len(flagged) > 20 else ''}"
        )
    return results


def total_line_losses_kw(result: PowerFlowResult, net: Network) -> float:
    """Ohmic losses summed over lines, from the solved currents."""
    current_base = net.base_power_kva * 1000.0 / (
        math.sqrt(3.0) * net.slack_bus.nominal_voltage
    )
    v_base = net.slack_bus.nominal_voltage
    z_base = v_base * v_base / (net.base_power_kva * 1000.0)
    losses_pu = 0.0
    for k, line in enumerate(net.lines):
        i_pu = result.line_current_a[k] / current_base
        losses_pu += i_pu * i_pu * (line.resistance / z_base)
    return losses_pu * net.base_power_kva
