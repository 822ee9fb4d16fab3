"""Tree-structured register clusters for slow heralded links.

A hypercell exposes many optical ports through layered branching so that two
neighboring cells entangle near-deterministically even when a single heralded
attempt succeeds with small probability p = t / tau_E.  The analytics cover
the failure probability of an m-port connection attempt, the root-to-root
path length, the accumulated memory and swap errors, the feasibility window
for the attempt time t, and the operational cost scaling; the Monte Carlo
builds trees explicitly with per-pair timestamps and reports the empirical
root-to-root error against the analytic total.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .errors import DomainError, ValidationError
from .rng import philox_stream


@dataclass(frozen=True)
class TreeConfig:
    """Shape of the branching trees making up a hypercell."""

    elu_coordination: int = 3    # register valency: 1 link down, rest up
    layers: int = 4
    p: float = 0.1               # per-attempt link success probability
    c: float = 3.0               # -ln of the tolerated connection failure

    def __post_init__(self):
        if self.elu_coordination not in (3, 4, 5):
            raise ValidationError("coordination must be 3, 4, or 5")
        if self.layers < 1:
            raise ValidationError("layers must be at least 1")
        if not 0 < self.p <= 1:
            raise ValidationError("p must lie in (0, 1]")
        if self.c <= 0:
            raise ValidationError("c must be positive")

    @property
    def arity(self) -> int:
        return self.elu_coordination - 1

    @property
    def ports(self) -> int:
        # one extra branching at the top layer: twice the top-layer registers
        # for binary trees, arity times for wider ones
        return self.arity * self.arity**self.layers


@dataclass(frozen=True)
class HypercellBudget:
    """Timing and error inputs of a hypercell design point.

    ``c`` is the port-provisioning target, minus the log of the tolerated
    connection-failure probability (default 3, roughly a 5% failure budget).
    """

    t: float                 # attempt window
    tau_e: float             # mean heralded connection time
    tau_d: float             # decoherence time
    eps: float               # gate error per swap operation
    eps_crit: float = 2.9e-3
    c: float = 3.0

    def __post_init__(self):
        if self.t <= 0 or self.tau_e <= 0 or self.tau_d <= 0:
            raise ValidationError("t, tau_e, tau_d must be positive")
        if self.t > self.tau_e:
            raise ValidationError("t must not exceed tau_e (p = t/tau_e <= 1)")
        if self.eps < 0:
            raise ValidationError("eps must be non-negative")
        if self.eps_crit <= 0 or self.c <= 0:
            raise ValidationError("eps_crit and c must be positive")

    @property
    def p(self) -> float:
        return self.t / self.tau_e


def fail_prob(p: float, m: int) -> dict:
    """Probability that all m port pairs fail, exact and exponential forms."""
    if m < 1:
        raise ValidationError("m must be at least 1")
    if not 0 <= p <= 1:
        raise ValidationError("p must lie in [0, 1]")
    return {"exact": (1.0 - p) ** m, "approx": math.exp(-m * p)}


def path_length(m: int) -> float:
    """Bell pairs between the two roots: 2 log2(m) + 1."""
    if m < 2:
        raise ValidationError("m must be at least 2")
    return 2.0 * math.log2(m) + 1.0


def _log_term(budget: HypercellBudget) -> float:
    ratio = budget.c * budget.tau_e / budget.t
    if ratio < 2:
        raise DomainError(
            f"c * tau_E / t = {ratio:.3g} < 2; the tree has no ports")
    return math.log2(ratio)


def memory_error(budget: HypercellBudget) -> float:
    """Accumulated memory error of the root pair: (t/tau_D)(3 log2(c tau_E/t) + 1/2)."""
    return budget.t / budget.tau_d * (3.0 * _log_term(budget) + 0.5)


def total_error(budget: HypercellBudget) -> float:
    """Memory error plus 2 eps log2(c tau_E / t) of swap error."""
    return memory_error(budget) + 2.0 * budget.eps * _log_term(budget)


def ft_bounds(budget: HypercellBudget) -> dict:
    """Feasibility window for the attempt time under gate error.

    The swap-error budget caps the tree depth, bounding t from below by
    c tau_E 2^(-eps_crit / 2 eps); the memory budget caps t from above by
    (eps_crit - 2 eps) tau_D / 3.  A non-empty window requires
    tau_E / tau_D < ((eps_crit - 2 eps) / 3c) 2^(eps_crit / 2 eps), which is
    necessary but not sufficient; with eps -> 0 the ratio bound diverges and
    any link-to-memory timescale ratio admits a design point.
    """
    eps, crit, c = budget.eps, budget.eps_crit, budget.c
    if eps == 0:
        return {"t_min": 0.0, "t_max": crit * budget.tau_d / 3.0,
                "ratio_bound": math.inf, "feasible": True}
    exponent = crit / (2.0 * eps)
    t_min = c * budget.tau_e * 2.0 ** (-exponent) if exponent < 16000 else 0.0
    t_max = (crit - 2.0 * eps) * budget.tau_d / 3.0
    if crit <= 2.0 * eps:
        ratio_bound = 0.0
    else:
        log_bound = (math.log((crit - 2.0 * eps) / (3.0 * c))
                     + exponent * math.log(2.0))
        ratio_bound = math.exp(log_bound) if log_bound < 700.0 else math.inf
    return {"t_min": t_min, "t_max": t_max,
            "ratio_bound": ratio_bound,
            "feasible": t_min < t_max}


def hypercell_cost(p: float, c: float) -> dict:
    """Operational cost (1/p)^(4.5 c / p), evaluated in the log domain.

    Returns the natural log always; the linear value is included only when it
    is representable in a float, with ``overflow`` flagging the other case.
    The cost has no dependence on any computation-size input.
    """
    if not 0 < p <= 1:
        raise ValidationError("p must lie in (0, 1]")
    if c <= 0:
        raise ValidationError("c must be positive")
    log_cost = (4.5 * c / p) * math.log(1.0 / p)
    if log_cost < 700.0:
        return {"cost": math.exp(log_cost), "log_cost": log_cost, "overflow": False}
    return {"cost": None, "log_cost": log_cost, "overflow": True}


def construction2_error(t: float, tau_d: float, eps: float,
                        c1: float, c2: float) -> float:
    """Distance-independent nested-cluster error form c1 t/tau_D + c2 eps."""
    if c1 <= 0 or c2 <= 0:
        raise ValidationError("c1 and c2 must be positive")
    if tau_d <= 0:
        raise ValidationError("tau_d must be positive")
    if t < 0 or eps < 0:
        raise ValidationError("t and eps must be non-negative")
    return c1 * t / tau_d + c2 * eps


MC_TRIAL_CHUNK = 256


def mc_tree_build(config: TreeConfig, budget: HypercellBudget, trials: int,
                  seed: int, staged: bool = True) -> dict:
    """Simulate building two trees and connecting their roots.

    Tree links succeed with probability p per attempt window; in staged mode
    failed links are retried layer by layer (cost grows linearly), in
    single-shot mode a whole tree is rebuilt until every link of one window
    succeeds.  Successful pairs carry explicit birth timestamps: tree pairs
    born uniformly inside the construction window [0, t), the connecting pair
    inside [t, 2t).  The root-to-root error accumulates one age/tau_D memory
    term per path pair plus one eps swap term per intermediate register, and
    is averaged over trials where the port connection heralds.

    Trials run in fixed chunks, each on its own counter-based stream, so the
    result does not depend on how chunks are spread over workers.
    """
    if trials < 1:
        raise ValidationError("trials must be positive")
    p = budget.p
    m = config.ports
    n_path_pairs = int(round(path_length(m) if m >= 2 else 1.0))
    n_tree_pairs = n_path_pairs - 1          # split across the two trees
    n_swaps = n_path_pairs - 1
    tree_edges = sum(config.arity**k for k in range(1, config.layers + 1))

    successes = 0
    total_cost = 0
    err_sum = 0.0
    done = 0
    chunk_index = 0
    while done < trials:
        take = min(MC_TRIAL_CHUNK, trials - done)
        rng = philox_stream(seed, chunk_index)
        for _ in range(take):
            cost = 0
            for _tree in (0, 1):
                if staged:
                    # retry each link independently until it heralds
                    draws = (rng.geometric(p, size=tree_edges) if p < 1
                             else [1] * tree_edges)
                    cost += int(sum(draws))
                else:
                    while True:
                        cost += tree_edges
                        if p == 1 or bool((rng.random(tree_edges) < p).all()):
                            break
            # connect the two surfaces: m port pairs, one window
            cost += m
            connected = p == 1 or bool((rng.random(m) < p).any())
            total_cost += cost
            if not connected:
                continue
            successes += 1
            ages = budget.t * 2.0 - rng.uniform(0.0, budget.t, size=n_tree_pairs)
            connect_age = budget.t - rng.uniform(0.0, budget.t)
            err_sum += ((float(ages.sum()) + connect_age) / budget.tau_d
                        + budget.eps * n_swaps)
        done += take
        chunk_index += 1

    return {
        "success_rate": successes / trials,
        "mean_accumulated_error": err_sum / successes if successes else float("nan"),
        "mean_cost_attempts": total_cost / trials,
        "trials": trials,
        "path_pairs": n_path_pairs,
        "ports": m,
    }


BOUNDARY_CSV_COLUMNS = ["eps", "ratio", "t_opt", "layers_opt", "eps_total",
                        "p_fail", "feasible"]


def boundary_scan(eps_grid, ratio_grid, config: TreeConfig | None = None,
                  trials: int = 0, seed: int = 0,
                  t_points: int = 120, eps_crit: float = 2.9e-3) -> list[dict]:
    """Feasibility map over gate error and tau_E/tau_D.

    For each grid point the attempt time is swept logarithmically over the
    valid domain of the error formulas (tree depth follows from the port
    target c/p); a point is feasible when some t keeps the total error below
    eps_crit.  With ``trials`` > 0 each feasible optimum is cross-checked by
    the tree Monte Carlo.
    """
    eps_grid = sorted(set(float(e) for e in eps_grid))
    ratio_grid = sorted(set(float(x) for x in ratio_grid))
    if not eps_grid or not ratio_grid:
        raise ValidationError("grids must be non-empty")
    config = config or TreeConfig()
    tau_d = 1.0
    rows = []
    for eps in eps_grid:
        for ratio in ratio_grid:
            tau_e = ratio * tau_d
            best = None
            # t must satisfy c tau_E / t >= 2 and t <= tau_E
            t_hi = min(tau_e, config.c * tau_e / 2.0)
            t_lo = t_hi / 2.0**40
            for k in range(t_points):
                t = t_lo * (t_hi / t_lo) ** (k / (t_points - 1))
                budget = HypercellBudget(t=t, tau_e=tau_e, tau_d=tau_d,
                                         eps=eps, eps_crit=eps_crit)
                err = total_error(budget)
                if best is None or err < best["eps_total"]:
                    m = config.c / budget.p
                    layers = max(1, math.ceil(math.log(max(m, 2.0), config.arity)) - 1)
                    best = {"t_opt": t, "eps_total": err,
                            "layers_opt": layers,
                            "p_fail": fail_prob(min(budget.p, 1.0),
                                                max(int(m), 1))["exact"]}
            feasible = best["eps_total"] < eps_crit
            if feasible and trials > 0:
                mc_cfg = TreeConfig(elu_coordination=config.elu_coordination,
                                    layers=best["layers_opt"],
                                    p=min(best["t_opt"] / tau_e, 1.0),
                                    c=config.c)
                mc_budget = HypercellBudget(t=best["t_opt"], tau_e=tau_e,
                                            tau_d=tau_d, eps=eps,
                                            eps_crit=eps_crit)
                mc = mc_tree_build(mc_cfg, mc_budget, trials, seed)
                feasible = mc["success_rate"] > 0.5
            rows.append({
                "eps": eps, "ratio": ratio,
                "t_opt": best["t_opt"], "layers_opt": best["layers_opt"],
                "eps_total": best["eps_total"], "p_fail": best["p_fail"],
                "feasible": feasible,
            })
    return rows


def boundary_rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BOUNDARY_CSV_COLUMNS,
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        out = dict(row)
        for key in ("eps", "ratio", "t_opt", "eps_total", "p_fail"):
            out[key] = f"{row[key]:.9g}"
        out["feasible"] = "1" if row["feasible"] else "0"
        writer.writerow(out)
    return buf.getvalue()
