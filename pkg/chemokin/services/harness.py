"""
Experiment harness tying the model tiers together.

Every command takes an ExperimentConfig, writes CSV/JSON tables plus the
resolved config into ``<outputs.directory>/<command>/`` and returns a
RunReport whose checks mirror the acceptance thresholds of that tier.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from chemokin.config import Settings, get_settings
from chemokin.errors import ChemokinError, ConfigurationError, SteadyStateTimeout
from chemokin.models import (
    Environment,
    ExperimentConfig,
    PhysParams,
    Regime,
    ResultTable,
    RunReport,
    Tier,
)
from chemokin.services import agents, closure, kinetic, macro
from chemokin.services.base import TierCommand, TierRegistry, get_tier_registry
from chemokin.services.metrics import Distribution1D, l1_histogram_distance, wasserstein1
from chemokin.services.pathway import (
    classify_regime,
    domain_bounds,
    environment_for,
    gradient_number,
    warn_if_unusual,
)
from chemokin.services.sweeps import SweepPool

logger = logging.getLogger(__name__)

# Acceptance thresholds
DISTRIBUTION_L1_TOL = 0.05
DRIFT_REL_TOL = 0.05
DRIFT_STDERR_FACTOR = 3.0
SUPPORT_MASS_MC = 0.99
SUPPORT_MASS_KINETIC = 1.0 - 1e-10
FLATNESS_TOL = 0.05
KS_L1_TOL = 0.05
VARIANCE_SLOPE_TOL = 0.02
CONVERGENCE_FACTOR = 1.5
MASS_TOL = 1e-10
SUPPORT_PAD_CELLS = 2

DEFAULT_KR_SWEEP = [0.0005, 0.001, 0.005, 0.01]
DEFAULT_VELOCITY_GRADIENTS = np.geomspace(1e-5, 2e-3, 12).tolist()
DEFAULT_CASE2_G_MU = 5e-4
DEFAULT_CASE2_LENGTH = 10.0


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def load_config(path: Path | None = None, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Read a JSON experiment and apply CLI overrides.

    Args:
        path: JSON file; defaults are used when omitted
        overrides: Any of ``seed``, ``threads``, ``out`` (None values are ignored)

    Raises:
        pydantic.ValidationError: If the file does not match the schema
    """
    if path is None:
        config = ExperimentConfig()
    else:
        config = ExperimentConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    numerics_update = {k: overrides[k] for k in ("seed", "threads") if k in overrides}
    if numerics_update:
        config = config.model_copy(
            update={"numerics": config.numerics.model_copy(update=numerics_update)}
        )
    if "out" in overrides:
        config = config.model_copy(
            update={"outputs": config.outputs.model_copy(update={"directory": str(overrides["out"])})}
        )
    return config


def resolve_config(config: ExperimentConfig, settings: Settings | None = None) -> ExperimentConfig:
    """Fill seed, threads and output directory from settings where unset."""
    settings = settings or get_settings()
    numerics = config.numerics.model_copy(
        update={
            "seed": settings.seed if config.numerics.seed is None else config.numerics.seed,
            "threads": settings.threads if config.numerics.threads is None else config.numerics.threads,
        }
    )
    outputs = config.outputs.model_copy(
        update={"directory": config.outputs.directory or settings.output_dir}
    )
    return config.model_copy(update={"numerics": numerics, "outputs": outputs})


def config_hash(config: ExperimentConfig) -> str:
    """First 16 hex digits of the SHA-256 of the canonical config JSON."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _write_outputs(
    config: ExperimentConfig, command: str, tables: list[ResultTable]
) -> tuple[str, list[Path]]:
    digest = config_hash(config)
    directory = Path(config.outputs.directory or get_settings().output_dir) / command
    directory.mkdir(parents=True, exist_ok=True)
    resolved = directory / "resolved_config.json"
    resolved.write_text(
        json.dumps({"config_hash": digest, "config": config.model_dump(mode="json")}, indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    files = [resolved]
    for table in tables:
        files.extend(table.write(directory, digest))
    logger.info("[Harness] %s wrote %d files to %s", command, len(files), directory)
    return digest, files


def _report(
    config: ExperimentConfig,
    command: str,
    tables: list[ResultTable],
    checks: dict[str, bool],
    summary: dict[str, Any],
) -> RunReport:
    digest, files = _write_outputs(config, command, tables)
    report = RunReport(tier=command, config_hash=digest, files=files, checks=checks, summary=summary)
    if not report.passed:
        logger.warning("[Harness] %s failed checks: %s", command, ", ".join(report.failed_checks))
    return report


def _single_gradient(config: ExperimentConfig) -> float:
    return config.env.G if config.env.G is not None else config.env.gradients()[0]


def _environment(config: ExperimentConfig, p: PhysParams, G: float) -> Environment:
    bounds = config.env.bounds
    if bounds is None and G == 0:
        raise ConfigurationError("env.G = 0 needs explicit env.x_min and env.x_max")
    return environment_for(p, G, bounds, config.env.periodic)


def _profile(p: PhysParams, G: float, nodes: int) -> closure.ClosureProfile:
    try:
        return closure.build_profile(p, G, nodes=nodes)
    except ChemokinError as e:
        raise type(e)(f"closure at G={G:g}: {e}") from e


def _drift_agrees(v_d: float, stderr: float, kappa: float) -> bool:
    return abs(v_d - kappa) <= max(DRIFT_REL_TOL * abs(kappa), DRIFT_STDERR_FACTOR * stderr)


# ---------------------------------------------------------------------------
# closure
# ---------------------------------------------------------------------------


def cmd_closure(config: ExperimentConfig) -> RunReport:
    """Closure profiles and constants for every gradient in the sweep."""
    config = resolve_config(config)
    p = config.params
    warn_if_unusual(p)
    nodes = config.numerics.closure.nodes
    tables: list[ResultTable] = []
    rows: dict[str, list[Any]] = {
        k: []
        for k in (
            "G", "g", "a1", "a2", "regime", "c0", "theta_left", "theta_right",
            "kappa", "P_plus", "P_minus", "left_limit", "right_limit",
        )
    }
    checks: dict[str, bool] = {}
    for G in config.env.gradients():
        profile = _profile(p, G, nodes)
        tables.append(closure.profile_table(profile))
        p_plus, p_minus = closure.direction_masses(profile)
        thetas = (math.nan, math.nan) if profile.is_delta else closure.boundary_exponents(profile)
        limits = {"left": "", "right": ""} if profile.is_delta else closure.endpoint_density_limit(profile)
        for key, value in (
            ("G", G),
            ("g", profile.g),
            ("a1", profile.a1),
            ("a2", profile.a2),
            ("regime", classify_regime(profile.g).value),
            ("c0", profile.c0),
            ("theta_left", thetas[0]),
            ("theta_right", thetas[1]),
            ("kappa", closure.drift_velocity(profile)),
            ("P_plus", p_plus),
            ("P_minus", p_minus),
            ("left_limit", limits["left"]),
            ("right_limit", limits["right"]),
        ):
            rows[key].append(value)
        checks[f"normalized_G{G:g}"] = abs(p_plus + p_minus - 1.0) <= 1e-8
        checks[f"kappa_bounded_G{G:g}"] = abs(closure.drift_velocity(profile)) <= p.v0
    tables.append(
        ResultTable(
            name="closure_summary",
            columns=rows,
            units={"G": "1/um", "kappa": "um/s"},
            summary={"gradients": len(rows["G"]), "kR": p.kR},
        )
    )
    return _report(config, "closure", tables, checks, {"kappa": rows["kappa"], "G": rows["G"]})


# ---------------------------------------------------------------------------
# agents / compare
# ---------------------------------------------------------------------------


@dataclass
class _AgentRun:
    ensemble: agents.Ensemble
    result: agents.SteadyStateResult
    histogram: agents.ActivityHistogram
    timed_out: bool = False


def _run_agents(config: ExperimentConfig, p: PhysParams, G: float, seed: int, threads: int) -> _AgentRun:
    num = config.numerics.agents
    env = _environment(config, p, G)
    ensemble = agents.create_ensemble(
        p, env, num.agent_count, seed, num.init, num.a_init, num.record_every
    )
    timed_out = False
    if num.duration is not None:
        agents.run_for(ensemble, num.duration, num.dt, threads)
        result = agents.summarize_drift(ensemble, since=min(num.burn_in, 0.5 * num.duration))
    else:
        try:
            ensemble, result = agents.run_to_steady_state(
                ensemble,
                window=num.window,
                tol=num.tol,
                dt=num.dt,
                max_time=num.max_time,
                burn_in=num.burn_in,
                threads=threads,
            )
        except SteadyStateTimeout as e:
            logger.warning("[Agents] G=%g: %s", G, e)
            result = e.partial
            timed_out = True
    g, a1, a2 = gradient_number(p, G)
    a_range = (a1, a2) if 0 < g < 1 else (0.0, 1.0)
    histogram = agents.activity_histogram(ensemble, num.bins, a_range, num.x_bins)
    return _AgentRun(ensemble, result, histogram, timed_out)


def _support_fraction(run: _AgentRun, a1: float, a2: float) -> float:
    width = float(run.histogram.edges[1] - run.histogram.edges[0])
    a = run.ensemble.activity()
    inside = (a >= a1 - SUPPORT_PAD_CELLS * width) & (a <= a2 + SUPPORT_PAD_CELLS * width)
    return float(inside.mean())


def _flatness(histogram: agents.ActivityHistogram) -> float:
    occupied = histogram.mean_a[np.isfinite(histogram.mean_a)]
    if occupied.size == 0:
        return math.nan
    return float((occupied.max() - occupied.min()) / occupied.mean())


def _agent_tables(run: _AgentRun, write_series: bool) -> list[ResultTable]:
    hist = run.histogram
    tables = [
        ResultTable(
            name="agents_histogram",
            columns={
                "a_lo": hist.edges[:-1].tolist(),
                "a_hi": hist.edges[1:].tolist(),
                "mass_plus": hist.mass_plus.tolist(),
                "mass_minus": hist.mass_minus.tolist(),
            },
            summary={"outside_plus": hist.outside_plus, "outside_minus": hist.outside_minus},
        ),
        ResultTable(
            name="agents_x_profile",
            columns={
                "x": hist.x_centers.tolist(),
                "mean_a": hist.mean_a.tolist(),
                "var_a": hist.var_a.tolist(),
            },
            units={"x": "um"},
        ),
    ]
    if write_series:
        tables.append(
            ResultTable(
                name="agents_drift",
                columns=agents.drift_table(run.ensemble),
                units={"t": "s", "v_d": "um/s"},
            )
        )
    return tables


def cmd_agents(config: ExperimentConfig) -> RunReport:
    """Monte Carlo ensemble at a single gradient."""
    config = resolve_config(config)
    p = config.params
    warn_if_unusual(p)
    G = _single_gradient(config)
    seed = config.numerics.seed or 0
    run = _run_agents(config, p, G, seed, config.numerics.threads or 1)
    g, a1, a2 = gradient_number(p, G)
    activity = run.ensemble.activity()
    summary: dict[str, Any] = {
        "G": G,
        "g": g,
        "v_d": run.result.v_d,
        "stderr": run.result.stderr,
        "windows": run.result.windows,
        "time": run.result.time,
        "converged": run.result.converged,
        "center_of_mass": agents.center_of_mass(run.ensemble),
        "agents": run.ensemble.count,
    }
    checks = {
        "activity_in_unit_interval": bool(np.all((activity > 0) & (activity < 1))),
        "agent_count": run.ensemble.count == config.numerics.agents.agent_count,
    }
    if config.numerics.agents.duration is None:
        checks["steady_state"] = run.result.converged and not run.timed_out
    if G > 0 and abs(g - 1.0) > 1e-9:
        kappa = closure.drift_velocity(_profile(p, G, config.numerics.closure.nodes))
        summary["kappa"] = kappa
        checks["drift_vs_closure"] = _drift_agrees(run.result.v_d, run.result.stderr, kappa)
    table = ResultTable(name="agents_summary", summary=summary)
    tables = [table, *_agent_tables(run, config.outputs.time_series)]
    return _report(config, "agents", tables, checks, summary)


def cmd_compare(config: ExperimentConfig) -> RunReport:
    """Monte Carlo activity histograms overlaid on the closure."""
    config = resolve_config(config)
    p = config.params
    G = _single_gradient(config)
    profile = _profile(p, G, config.numerics.closure.nodes)
    run = _run_agents(config, p, G, config.numerics.seed or 0, config.numerics.threads or 1)
    hist = run.histogram
    edges = hist.edges

    distances: dict[str, float] = {}
    columns: dict[str, list[Any]] = {
        "a_lo": edges[:-1].tolist(),
        "a_hi": edges[1:].tolist(),
    }
    for direction in ("plus", "minus"):
        analytic = closure.bin_masses(profile, edges, direction)
        analytic_dist = Distribution1D.from_histogram(edges, analytic, renormalize=True)
        mc = hist.conditional(direction)
        distances[f"L1_{direction}"] = l1_histogram_distance(mc, analytic_dist)
        distances[f"W1_{direction}"] = wasserstein1(mc, analytic_dist)
        columns[f"mc_{direction}"] = mc.masses.tolist()
        columns[f"closure_{direction}"] = analytic_dist.masses.tolist()

    g, a1, a2 = gradient_number(p, G)
    flatness = _flatness(hist)
    summary: dict[str, Any] = {
        "G": G,
        "g": g,
        "kappa": closure.drift_velocity(profile),
        "v_d": run.result.v_d,
        "stderr": run.result.stderr,
        "mean_a_variation": flatness,
        **distances,
    }
    checks = {
        "L1_plus": distances["L1_plus"] <= DISTRIBUTION_L1_TOL,
        "L1_minus": distances["L1_minus"] <= DISTRIBUTION_L1_TOL,
        "mean_a_flat": flatness <= FLATNESS_TOL,
        "drift_vs_closure": _drift_agrees(run.result.v_d, run.result.stderr, summary["kappa"]),
    }
    if 0 < g < 1:
        summary["support_fraction"] = _support_fraction(run, a1, a2)
        checks["support_confinement"] = summary["support_fraction"] >= SUPPORT_MASS_MC
    tables = [
        ResultTable(name="compare_histogram", columns=columns, summary=summary),
        *_agent_tables(run, write_series=False),
    ]
    return _report(config, "compare", tables, checks, summary)


# ---------------------------------------------------------------------------
# velocity sweep
# ---------------------------------------------------------------------------


def _has_interior_maximum(values: list[float]) -> bool:
    peak = int(np.argmax(values))
    return 0 < peak < len(values) - 1


def cmd_velocity_sweep(config: ExperimentConfig) -> RunReport:
    """Drift velocity curves kappa(G), one table per adaptation rate."""
    config = resolve_config(config)
    kR_values = config.env.kR_sweep or DEFAULT_KR_SWEEP
    gradients = sorted(config.env.G_sweep) if config.env.G_sweep else DEFAULT_VELOCITY_GRADIENTS
    nodes = min(config.numerics.closure.nodes, 512)
    with_mc = config.numerics.agents.monte_carlo
    pool = SweepPool(config.numerics.seed or 0, config.numerics.threads or 1)

    tables: list[ResultTable] = []
    checks: dict[str, bool] = {}
    peaks: dict[str, float] = {}
    for index, kR in enumerate(kR_values):
        p = config.params.model_copy(update={"kR": kR})
        kappa = closure.drift_curve(p, gradients, nodes=nodes).tolist()
        columns: dict[str, list[Any]] = {"G": list(gradients), "kappa_analytic": kappa}
        if len(gradients) >= 3:
            checks[f"nonmonotone_kR{kR:g}"] = _has_interior_maximum(kappa)
        peaks[f"kR{kR:g}"] = gradients[int(np.argmax(kappa))]

        if with_mc:

            def mc_point(G: float, seed: int, p: PhysParams = p) -> _AgentRun:
                return _run_agents(config, p, G, seed, threads=1)

            # offset by kR index so curves do not share streams
            pool.master_seed = (config.numerics.seed or 0) + index
            outcomes = pool.map(mc_point, gradients)
            v_mc: list[float | None] = []
            v_err: list[float | None] = []
            status: list[str] = []
            agree = True
            for outcome, k in zip(outcomes, kappa):
                if not outcome.ok or outcome.result is None:
                    v_mc.append(None)
                    v_err.append(None)
                    status.append(outcome.error or "failed")
                    continue
                result = outcome.result.result
                v_mc.append(result.v_d)
                v_err.append(result.stderr)
                status.append("timeout" if outcome.result.timed_out else "ok")
                if not outcome.result.timed_out:
                    agree &= _drift_agrees(result.v_d, result.stderr, k)
            columns.update({"v_d_mc": v_mc, "v_d_stderr": v_err, "status": status})
            checks[f"mc_agreement_kR{kR:g}"] = agree
        tables.append(
            ResultTable(
                name=f"velocity_kR{kR:g}",
                columns=columns,
                units={"G": "1/um", "kappa_analytic": "um/s", "v_d_mc": "um/s", "v_d_stderr": "um/s"},
                summary={"kR": kR, "G_peak": peaks[f"kR{kR:g}"], "kappa_peak": max(kappa)},
            )
        )
    return _report(config, "velocity-sweep", tables, checks, {"G_peak": peaks})


# ---------------------------------------------------------------------------
# kinetic / convergence
# ---------------------------------------------------------------------------


@dataclass
class _KineticCase:
    """Scaled problem for one eps: environment, grid, initial field and macro limit."""

    field: kinetic.KineticField
    profile: closure.ClosureProfile
    kappa: float
    D0: float
    x_courant: float | None


def _kinetic_bounds(config: ExperimentConfig, p: PhysParams, G: float, case: str) -> tuple[float, float]:
    kin = config.numerics.kinetic
    if config.env.bounds is not None:
        return config.env.bounds
    if kin.length is not None:
        return 0.0, kin.length
    if case == "II" or G == 0:
        return 0.0, DEFAULT_CASE2_LENGTH
    return domain_bounds(p, G)


def _kinetic_case(config: ExperimentConfig, eps: float) -> _KineticCase:
    p = config.params
    kin = config.numerics.kinetic
    nodes = config.numerics.closure.nodes
    if kin.case == "I":
        G = _single_gradient(config)
        bounds = _kinetic_bounds(config, p, G, "I")
        env = Environment(G=G, x_min=bounds[0], x_max=bounds[1], periodic=True, S0=p.S0)
        grid = kinetic.activity_grid(p, G, kin.a_cells)
        profile = _profile(p, G, nodes)
        kappa, D0, beta, mu, x_courant = closure.drift_velocity(profile), 0.0, 1.0, 0.0, None
    else:
        G_mu = kin.G_mu if kin.G_mu is not None else DEFAULT_CASE2_G_MU
        bounds = _kinetic_bounds(config, p, G_mu, "II")
        env = kinetic.case2_environment(p, G_mu, eps, kin.mu, bounds)
        grid = kinetic.activity_grid(p, env.G, kin.a_cells, window=kinetic.case2_window(p, env.G))
        profile = _profile(p, env.G, nodes)
        kappa, D0 = closure.case2_coefficients(p, G_mu, config.numerics.closure.kappa3_convention)
        mu, beta = kin.mu, 1.0 + kin.mu
        # diffusive scaling: pin the x step to an exact shift
        x_courant = 1.0 if kin.mu >= 1.0 else None
        if kin.mu < 1.0:
            D0 = 0.0
    x_faces = kinetic.x_faces_for(env, kin.x_cells)
    centers = 0.5 * (x_faces[:-1] + x_faces[1:])
    rho = kinetic.cosine_density(centers, env.x_min, env.length, kin.bump_amplitude)
    field = kinetic.from_closure(profile, env, grid, kin.x_cells, eps, mu, beta, rho)
    return _KineticCase(field, profile, kappa, D0, x_courant)


def _macro_density(case: _KineticCase, T: float) -> np.ndarray:
    field = case.field
    start = macro.make_field(field.env.x_min, field.env.x_max, kinetic.density(field))
    if case.D0 > 0:
        return macro.solve_keller_segel(start, case.D0, case.kappa, T).rho
    return macro.solve_transport(start, case.kappa, T).rho


def _support_mass(field: kinetic.KineticField) -> float | None:
    g, a1, a2 = gradient_number(field.params, field.env.G)
    if not 0 < g < 1:
        return None
    faces = field.grid.faces
    lo = faces[max(int(np.searchsorted(faces, a1)) - SUPPORT_PAD_CELLS, 0)]
    hi = faces[min(int(np.searchsorted(faces, a2)) + SUPPORT_PAD_CELLS, faces.size - 1)]
    marginal = kinetic.marginal_activity(field)
    inside = (field.grid.centers >= lo) & (field.grid.centers <= hi)
    total = marginal.mass_plus.sum() + marginal.mass_minus.sum()
    return float((marginal.mass_plus[inside].sum() + marginal.mass_minus[inside].sum()) / total)


def _evolve_case(config: ExperimentConfig, case: _KineticCase) -> tuple[kinetic.KineticField, float]:
    kin = config.numerics.kinetic
    _, dt, _ = kinetic.plan_steps(case.field, kin.t_final, kin.cfl, case.x_courant)
    final = kinetic.evolve(
        case.field, kin.t_final, kin.cfl, config.numerics.threads or 1, x_courant=case.x_courant
    )
    return final, dt


def cmd_kinetic(config: ExperimentConfig) -> RunReport:
    """One kinetic run at the first eps from well-prepared data."""
    config = resolve_config(config)
    kin = config.numerics.kinetic
    eps = kin.eps_list[0]
    case = _kinetic_case(config, eps)
    final, dt = _evolve_case(config, case)
    T = final.time
    marginal = kinetic.marginal_activity(final)
    rho = kinetic.density(final)
    mass = kinetic.total_mass(final)
    summary: dict[str, Any] = {
        "case": kin.case,
        "eps": eps,
        "G": final.env.G,
        "T": T,
        "dt": dt,
        "mass": mass,
        "min_value": float(min(final.qplus.min(), final.qminus.min())),
        "mean_velocity": kinetic.mean_velocity(final),
        "kappa_limit": case.kappa,
        "D0_limit": case.D0,
        "W1_to_closure": kinetic.local_closure_distance(
            final, kinetic.closure_reference(case.profile, final.grid)
        ),
    }
    checks = {
        "mass_conserved": abs(mass - 1.0) <= MASS_TOL,
        "non_negative": summary["min_value"] >= 0.0,
    }
    support = _support_mass(final)
    if support is not None:
        summary["support_mass"] = support
        checks["support_confinement"] = support >= SUPPORT_MASS_KINETIC
    tables = [
        ResultTable(
            name="kinetic_marginal",
            columns={
                "a_lo": final.grid.faces[:-1].tolist(),
                "a_hi": final.grid.faces[1:].tolist(),
                "mass_plus": marginal.mass_plus.tolist(),
                "mass_minus": marginal.mass_minus.tolist(),
            },
            summary=summary,
        ),
        ResultTable(
            name="kinetic_density",
            columns={"x": final.x_centers.tolist(), "rho": rho.tolist()},
            units={"x": "um", "rho": "1/um"},
        ),
    ]
    return _report(config, "kinetic", tables, checks, summary)


def _local_orders(eps: list[float], values: list[float]) -> list[float | None]:
    orders: list[float | None] = [None]
    for i in range(1, len(eps)):
        if values[i] > 0 and values[i - 1] > 0:
            orders.append(math.log(values[i] / values[i - 1]) / math.log(eps[i] / eps[i - 1]))
        else:
            orders.append(None)
    return orders


def _fitted_order(eps: list[float], values: list[float]) -> float | None:
    pairs = [(e, v) for e, v in zip(eps, values) if v > 0]
    if len(pairs) < 2:
        return None
    slope, _ = np.polyfit(np.log([e for e, _ in pairs]), np.log([v for _, v in pairs]), 1)
    return float(slope)


def cmd_convergence(config: ExperimentConfig) -> RunReport:
    """Distance of kinetic states to their closure and macroscopic limits over eps."""
    config = resolve_config(config)
    kin = config.numerics.kinetic
    eps_values = sorted(kin.eps_list, reverse=True)
    rows: dict[str, list[Any]] = {
        k: []
        for k in ("eps", "W1_to_closure", "W1_to_split", "L1_density_to_macro", "mass", "converged")
    }
    for eps in eps_values:
        case = _kinetic_case(config, eps)
        final, dt = _evolve_case(config, case)
        split, converged = kinetic.split_stationary_marginal(case.field, dt)
        rows["eps"].append(eps)
        rows["W1_to_closure"].append(
            kinetic.local_closure_distance(final, kinetic.closure_reference(case.profile, final.grid))
        )
        rows["W1_to_split"].append(
            kinetic.local_closure_distance(final, (split.conditional("plus"), split.conditional("minus")))
        )
        rows["L1_density_to_macro"].append(
            macro.l1_distance(kinetic.density(final), _macro_density(case, final.time - case.field.time), final.dx)
        )
        rows["mass"].append(kinetic.total_mass(final))
        rows["converged"].append(converged)
        if not converged:
            logger.warning("[Convergence] split reference not steady at eps=%g", eps)
        logger.debug(
            "[Convergence] eps done | eps=%g W1=%.4g L1=%.4g",
            eps, rows["W1_to_closure"][-1], rows["L1_density_to_macro"][-1],
        )

    w1 = rows["W1_to_closure"]
    l1 = rows["L1_density_to_macro"]
    tracked = w1 if kin.case == "I" else l1
    rows["order"] = _local_orders(eps_values, tracked)
    summary: dict[str, Any] = {
        "case": kin.case,
        "order": _fitted_order(eps_values, tracked),
        "order_W1_to_split": _fitted_order(eps_values, rows["W1_to_split"]),
    }
    checks: dict[str, bool] = {
        "mass_conserved": all(abs(m - 1.0) <= MASS_TOL for m in rows["mass"]),
        "split_references_steady": all(rows["converged"]),
    }
    if len(eps_values) >= 2:
        if kin.case == "I":
            checks["w1_decreasing"] = all(b < a for a, b in zip(w1, w1[1:]))
            checks["w1_rate"] = all(
                b <= a / CONVERGENCE_FACTOR
                for (ea, a), (eb, b) in zip(zip(eps_values, w1), zip(eps_values[1:], w1[1:]))
                if math.isclose(eb, 0.5 * ea, rel_tol=1e-9)
            )
    if kin.case == "II" and kin.mu >= 1.0:
        checks["ks_limit"] = l1[-1] <= KS_L1_TOL
    table = ResultTable(name="convergence", columns=rows, summary=summary)
    return _report(config, "convergence", [table], checks, summary)


# ---------------------------------------------------------------------------
# macro
# ---------------------------------------------------------------------------


def _macro_coefficients(config: ExperimentConfig, p: PhysParams, G: float) -> tuple[Regime, float, float]:
    g, _, _ = gradient_number(p, G)
    mu_hint = config.numerics.kinetic.mu if config.numerics.kinetic.case == "II" else None
    regime = classify_regime(g, mu_hint)
    convention = config.numerics.closure.kappa3_convention
    if regime in (Regime.CASE_I_SUPERCRITICAL, Regime.CASE_I_SUBCRITICAL):
        return regime, closure.drift_velocity(_profile(p, G, config.numerics.closure.nodes)), 0.0
    kappa3, D0 = closure.case2_coefficients(p, G, convention)
    if regime == Regime.CASE_II_HYPERBOLIC:
        return regime, kappa3, 0.0
    return regime, kappa3, D0


def cmd_macro(config: ExperimentConfig) -> RunReport:
    """Macroscopic limit PDE selected by the regime of the gradient."""
    config = resolve_config(config)
    p = config.params
    num = config.numerics.macro
    G = _single_gradient(config)
    regime, kappa, D0 = _macro_coefficients(config, p, G)
    if config.env.bounds is not None:
        x_min, x_max = config.env.bounds
    elif num.length is not None:
        x_min, x_max = 0.0, num.length
    elif G > 0:
        x_min, x_max = domain_bounds(p, G)
    else:
        raise ConfigurationError("env.G = 0 needs explicit bounds or numerics.macro.length")
    start = macro.gaussian_bump(x_min, x_max, num.x_cells, 0.5 * (x_min + x_max), num.bump_width)
    if num.bump_width < 2 * start.dx:
        logger.warning("[Macro] bump width %g is under two cells (dx=%g)", num.bump_width, start.dx)
    times = sorted({t for t in num.snapshot_times if 0 < t < num.t_final} | {num.t_final})
    states = macro.solve_with_snapshots(start, kappa, D0, times, num.cfl)
    final = states[-1]

    com = np.unwrap([macro.center_of_mass(s) for s in [start, *states]], period=final.length)
    speed = float((com[-1] - com[0]) / num.t_final)
    variance_slope = (macro.variance(final) - macro.variance(start)) / num.t_final
    summary: dict[str, Any] = {
        "regime": regime.value,
        "kappa": kappa,
        "D0": D0,
        "com_speed": speed,
        "variance_slope": variance_slope,
        "mass": final.mass(),
        "min_rho": float(final.rho.min()),
    }
    checks = {
        "mass_conserved": abs(final.mass() - 1.0) <= MASS_TOL,
        "non_negative": summary["min_rho"] >= 0.0,
        "com_speed": abs(speed - kappa) * num.t_final <= start.dx,
    }
    if D0 > 0 and kappa == 0:
        checks["variance_slope"] = abs(variance_slope - 2.0 * D0) <= VARIANCE_SLOPE_TOL * 2.0 * D0
    tables = [macro.snapshot_table([start, *states])]
    return _report(config, "macro", tables, checks, summary)


# ---------------------------------------------------------------------------
# Registration
# ---------------------------------------------------------------------------


def builtin_commands() -> list[TierCommand]:
    """The harness commands in CLI order."""
    return [
        TierCommand("closure", cmd_closure, 10, "Closure profiles, exponents and drift per gradient"),
        TierCommand("agents", cmd_agents, 20, "Monte Carlo ensemble to steady state", slow=True),
        TierCommand("kinetic", cmd_kinetic, 30, "Kinetic finite-volume run at one eps", slow=True),
        TierCommand("macro", cmd_macro, 40, "Macroscopic transport or Keller-Segel solve"),
        TierCommand("velocity-sweep", cmd_velocity_sweep, 50, "Drift velocity curves over G and kR"),
        TierCommand("convergence", cmd_convergence, 60, "Kinetic-to-limit distances over eps", slow=True),
        TierCommand("compare", cmd_compare, 70, "Monte Carlo histograms against the closure", slow=True),
    ]


def register_builtin_tiers(registry: TierRegistry | None = None) -> TierRegistry:
    """Register every harness command that is not yet present."""
    registry = registry if registry is not None else get_tier_registry()
    for command in builtin_commands():
        if command.name not in registry:
            registry.register(command)
    return registry


TIER_COMMANDS = {
    Tier.CLOSURE: "closure",
    Tier.AGENTS: "agents",
    Tier.KINETIC: "kinetic",
    Tier.MACRO: "macro",
    Tier.COMPARE: "compare",
}
