"""Analytic execution-time and resource estimators for fault-tolerant adders.

Carry-lookahead depth and the repeater-grid communication-step count are
evaluated in exact integer/rational arithmetic; resource formulas are exact
integers.  Execution times combine the per-primitive costs of a
:class:`~ionarch.steane.LogicalCostTable` with the layout's calibrated
folded-error-correction count, one round per circuit time step.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

from .arch import ArchLayout, MusiqcLayout, NnLayout, layout_from_name
from .device import DeviceParams
from .errors import NTooSmall, ValidationError
from .steane import (LogicalCostTable, Primitive, required_concat_level,
                     table_at_level)

CSV_COLUMNS = ["n", "layout", "circuit", "level", "depth_total",
               "toffoli_steps", "time_s", "qubits", "parallel_ops"]


def floor_log2(x) -> int:
    """floor(log2(x)) for a positive int or Fraction, exactly."""
    if x <= 0:
        raise ValidationError("floor_log2 requires a positive argument")
    if isinstance(x, int):
        return x.bit_length() - 1
    frac = Fraction(x)
    if frac >= 1:
        return (frac.numerator // frac.denominator).bit_length() - 1
    e = 0
    while frac < 1:
        frac *= 2
        e -= 1
    return e


@dataclass(frozen=True)
class DepthProfile:
    x_steps: int
    cnot_steps: int
    toffoli_steps: int

    @property
    def total(self) -> int:
        return self.x_steps + self.cnot_steps + self.toffoli_steps


def qcla_depth(n: int) -> DepthProfile:
    """Circuit depth of the n-bit in-place carry-lookahead adder.

    Total depth is the four floor-log terms plus 14; two steps are X gates,
    four are CNOTs, and the remainder are Toffoli steps.
    """
    if n <= 6:
        raise NTooSmall(f"carry-lookahead depth formula requires n > 6, got {n}")
    total = (floor_log2(n) + floor_log2(n - 1)
             + floor_log2(Fraction(n, 3)) + floor_log2(Fraction(n - 1, 3)) + 14)
    return DepthProfile(x_steps=2, cnot_steps=4, toffoli_steps=total - 6)


def qla_comm_steps(n: int) -> Fraction:
    """Entanglement-distribution swap steps of the n-bit adder on the grid.

    Sum over the four stage-count terms of T(T+17)/4 with T the floor-log of
    n, n-1, n/3 and (n-1)/3.  The expression is kept as an exact fraction;
    callers round up only for reporting.
    """
    if n <= 6:
        raise NTooSmall(f"communication-step formula requires n > 6, got {n}")
    total = Fraction(0)
    for x in (Fraction(n), Fraction(n - 1), Fraction(n, 3), Fraction(n - 1, 3)):
        t = floor_log2(x)
        total += Fraction(t * (t + 17), 4)
    return total


def qla_teleport_distance(t: int) -> dict:
    """Teleport geometry for a lookahead stage spanning distance 2**t.

    Returns the inter-unit distance d(t), the ion-chain length L(t) = 7 d(t),
    and the nested-swapping step count floor(log2 L(t)).
    """
    if t < 1:
        raise ValidationError("stage index t must be at least 1")
    if t % 2 == 0:
        d = 3 * 2 ** (t // 2) + 1
    else:
        d = 2 ** ((t + 1) // 2) + 1
    chain = 7 * d
    return {"d": d, "chain_length": chain, "swap_steps": floor_log2(chain)}


def adder_resources(n: int, layout: ArchLayout) -> dict:
    """Exact qubit and parallel-operation counts for an n-bit adder."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    return {"qubits": layout.qubits(n), "parallel_ops": layout.parallel_ops(n)}


def _musiqc_step_times(table: LogicalCostTable, ec_rounds: int) -> dict:
    """Per-step costs on the switched architecture (no distance dependence)."""
    ec = ec_rounds * table.time(Primitive.ERROR_CORRECT_ROUND)
    return {
        "toffoli": table.time(Primitive.TOFFOLI) + ec,
        "cnot": table.time(Primitive.REMOTE_CNOT) + ec,
        "x": table.time(Primitive.TRANSVERSAL_SINGLE) + ec,
    }


def _local_step_times(table: LogicalCostTable, ec_rounds: int) -> dict:
    ec = ec_rounds * table.time(Primitive.ERROR_CORRECT_ROUND)
    local_teleport = (table.time(Primitive.TRANSVERSAL_CNOT)
                      + table.time(Primitive.LOGICAL_MEASURE)
                      + table.time(Primitive.TRANSVERSAL_SINGLE))
    return {
        "toffoli": table.time(Primitive.TOFFOLI) + ec,
        "cnot": local_teleport + ec,
        "x": table.time(Primitive.TRANSVERSAL_SINGLE) + ec,
    }


def adder_execution_time(n: int, layout: ArchLayout,
                         table: LogicalCostTable) -> float:
    """Wall-clock execution time (seconds) of one n-bit addition.

    Carry-lookahead on the switched and grid layouts (one folded error
    correction round per time step, per the layout calibration); ripple-carry
    on the nearest-neighbor layout with 2n+3 Toffoli-dominated steps.  The
    grid additionally pays the swap-step count for entanglement distribution.
    """
    k = layout.ec_rounds_per_step
    if isinstance(layout, NnLayout):
        if n < 1:
            raise ValidationError("n must be at least 1")
        step = (table.time(Primitive.TOFFOLI)
                + k * table.time(Primitive.ERROR_CORRECT_ROUND))
        return (2 * n + 3) * step
    profile = qcla_depth(n)
    if isinstance(layout, MusiqcLayout):
        steps = _musiqc_step_times(table, k)
        return (profile.toffoli_steps * steps["toffoli"]
                + profile.cnot_steps * steps["cnot"]
                + profile.x_steps * steps["x"])
    steps = _local_step_times(table, k)
    comm = float(qla_comm_steps(n)) * table.swap_step_time
    return (profile.toffoli_steps * steps["toffoli"]
            + profile.cnot_steps * steps["cnot"]
            + profile.x_steps * steps["x"]
            + comm)


def logical_toffoli_step_time(layout: ArchLayout, table: LogicalCostTable) -> float:
    """One Toffoli time step including the layout's folded correction rounds."""
    return (table.time(Primitive.TOFFOLI)
            + layout.ec_rounds_per_step * table.time(Primitive.ERROR_CORRECT_ROUND))


# Roll-up model for the modular-exponentiation circuit (all model inputs, not
# measured quantities):
#   * 4 n^2 adder calls of 10n logical gates each and 6n logical qubits set
#     the K*Q error budget for level selection;
#   * four-way multiplier parallelism leaves n^2 sequential adder stages;
#   * the qubit roll-up provisions ceil(2 sqrt(n)) concurrent adder units and
#     applies the self-similar layout factor of 25 physical per logical qubit
#     at each additional concatenation level.
SHOR_GATES_PER_ADDER_BIT = 10
SHOR_LEVEL_QUBIT_FACTOR = 25


def shor_k_q(n: int) -> tuple[int, int]:
    k_ops = 4 * n * n * SHOR_GATES_PER_ADDER_BIT * n
    q_logical = 6 * n
    return k_ops, q_logical


def shor_estimate(n: int, layout: ArchLayout, params: DeviceParams,
                  eps_phys: float = 1e-7, eps_threshold: float = 1e-4,
                  stabilizer_reps: int = 3) -> dict:
    """Execution time, qubit count and code level for factoring an n-bit number."""
    if n < 8:
        raise ValidationError("modular-exponentiation roll-up requires n >= 8")
    if isinstance(layout, NnLayout):
        raise ValidationError(
            "the factoring roll-up is defined for the musiqc and qla layouts")
    k_ops, q_logical = shor_k_q(n)
    selection = required_concat_level(k_ops, q_logical, eps_phys, eps_threshold)
    table = table_at_level(params, layout, selection.level,
                           stabilizer_reps=stabilizer_reps)
    adder_time = adder_execution_time(n, layout, table)
    time_s = n * n * adder_time
    units = math.ceil(2.0 * math.sqrt(n))
    qubits = (units * layout.qubits(n)
              * SHOR_LEVEL_QUBIT_FACTOR ** (selection.level - 1))
    return {
        "time_s": time_s,
        "qubits": qubits,
        "level": selection.level,
        "logical_error_per_op": selection.logical_error_per_op,
        "k_ops": k_ops,
        "q_logical": q_logical,
        "adder_time_s": adder_time,
    }


def adder_row(n: int, layout: ArchLayout, params: DeviceParams,
              level: int = 1, stabilizer_reps: int = 3) -> dict:
    """One report row in the canonical CSV schema."""
    table = table_at_level(params, layout, level, stabilizer_reps=stabilizer_reps)
    resources = adder_resources(n, layout)
    if isinstance(layout, NnLayout):
        depth_total = 2 * n + 3
        toffoli_steps = 2 * n + 3
        circuit = "qrca"
    else:
        profile = qcla_depth(n)
        depth_total = profile.total
        toffoli_steps = profile.toffoli_steps
        circuit = "qcla"
    return {
        "n": n,
        "layout": layout.kind,
        "circuit": circuit,
        "level": level,
        "depth_total": depth_total,
        "toffoli_steps": toffoli_steps,
        "time_s": adder_execution_time(n, layout, table),
        "qubits": resources["qubits"],
        "parallel_ops": resources["parallel_ops"],
    }


def crossover_scan(n_values, layouts=("musiqc", "qla", "nn"),
                   params: DeviceParams | None = None,
                   level: int = 1) -> dict:
    """Sweep adder times over ``n_values`` for the requested layouts.

    Returns the rows (sorted by n then layout) and the smallest scanned n at
    which the switched-layout lookahead adder beats the nearest-neighbor
    ripple-carry adder, if any.
    """
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values:
        raise ValidationError("n_range must be non-empty")
    params = params or DeviceParams()
    layout_objs = [layout_from_name(name) if isinstance(name, str) else name
                   for name in layouts]
    rows = []
    for n in n_values:
        for layout in layout_objs:
            try:
                rows.append(adder_row(n, layout, params, level=level))
            except NTooSmall:
                continue
    crossover_n = None
    by_n = {}
    for row in rows:
        by_n.setdefault(row["n"], {})[row["layout"]] = row["time_s"]
    for n in n_values:
        times = by_n.get(n, {})
        if "musiqc" in times and "nn" in times and times["musiqc"] < times["nn"]:
            crossover_n = n
            break
    return {"rows": rows, "crossover_n": crossover_n}


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        out = dict(row)
        out["time_s"] = f"{row['time_s']:.9g}"
        writer.writerow(out)
    return buf.getvalue()
