"""Command-line front end.

Subcommands: simulate | force-check | bifurcation | potential | hill |
scatter.  Configuration is one JSON document validated against the shipped
schema before any computation; outputs are CSV with '#'-prefixed metadata
lines (floats at 17 significant digits) plus JSON sidecars/reports.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 event-budget exhaustion.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources

import jsonschema
import numpy as np

from . import __version__, balanced, model, scattering, unbalanced
from .integrators import (
    EventSpec,
    IntegrationError,
    IntegratorConfig,
    Invariant,
    integrate_until_event,
)
from .params import (
    CHART_BODY,
    CHART_CANONICAL,
    ConfigurationError,
    FoilParams,
    FullState,
    SourceSpec,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_BUDGET = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _load_schema(name: str) -> dict:
    text = resources.files("foilflow.schemas").joinpath(name).read_text()
    return json.loads(text)


def load_config(path: str) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    schema = _load_schema("config.schema.json")
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        lines = [
            f"config: {'/'.join(map(str, e.path)) or '<root>'}: {e.message}"
            for e in errors
        ]
        raise ConfigurationError("\n".join(lines))
    return raw


def _params_from(config: dict) -> FoilParams:
    return FoilParams(**config.get("params", {}))


def _source_from(config: dict) -> SourceSpec:
    block = config.get("source", {})
    return SourceSpec.constant(
        block.get("q", 1.0),
        position=tuple(block.get("position", (0.0, 0.0))),
        mobile=block.get("mobile", False),
    )


def _integrator_from(config: dict) -> IntegratorConfig:
    block = dict(config.get("integrator", {}))
    if "projection_targets" in block:
        block["projection_targets"] = tuple(block["projection_targets"])
    return IntegratorConfig(**block)


def write_csv(path: str, header: list[str], rows, metadata: dict):
    with open(path, "w", newline="") as fh:
        fh.write(f"# foilflow {__version__}\n")
        for key in sorted(metadata):
            fh.write(f"# {key} = {_fmt(metadata[key])}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: str, payload: dict, schema_name: str):
    jsonschema.validate(payload, _load_schema(schema_name),
                        cls=jsonschema.Draft202012Validator)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _meta_common(params: FoilParams, q: float) -> dict:
    return {
        "m_c": params.m_c, "I_c": params.I_c, "R": params.R,
        "d": params.d, "rho": params.rho, "q": q,
    }


def cmd_simulate(config: dict, out: str, seed: int, threads: int) -> int:
    params = _params_from(config)
    source = _source_from(config)
    icfg = _integrator_from(config)
    block = config.get("simulate")
    if block is None:
        raise ConfigurationError("config: missing 'simulate' block")
    init = dict(block["initial"])
    chart = init.pop("chart", CHART_BODY)
    state0 = FullState(**init, X_q=source.position[0], Y_q=source.position[1],
                       chart=chart)
    state0.validate(params)
    t_end = float(block["t_end"])
    trace_dt = float(block.get("trace_dt", t_end / 1000.0))
    r_escape = float(block.get("r_escape", 1e4))
    formulation = block.get("formulation", "newtonian")
    q0 = source.intensity(0.0)

    conserved = (
        not source.mobile
        and source.intensity_rate(0.0) == 0.0
        and source.position == (0.0, 0.0)
    )

    if formulation == "hamiltonian":
        if not conserved:
            raise ConfigurationError(
                "hamiltonian formulation needs a fixed constant source at the origin"
            )
        work0 = (
            state0 if chart == CHART_CANONICAL
            else model.body_to_canonical(state0, params, q0)
        )

        def rhs(t, y):
            s = FullState.from_array(y, chart=CHART_CANONICAL)
            return model.hamiltonian_rhs(s, params, q0)

        invariants = []
        if "H" in icfg.projection_targets:
            invariants.append(
                Invariant(
                    lambda y: model.hamiltonian(
                        FullState.from_array(y, chart=CHART_CANONICAL), params, q0
                    )
                )
            )
        if "K" in icfg.projection_targets:
            invariants.append(
                Invariant(
                    lambda y: model.angular_momentum(
                        FullState.from_array(y, chart=CHART_CANONICAL)
                    ),
                    lambda y: np.array(
                        model.angular_momentum_grad(
                            FullState.from_array(y, chart=CHART_CANONICAL)
                        )
                    ),
                )
            )
        row_chart = CHART_CANONICAL
    else:
        if chart == CHART_CANONICAL:
            state0 = model.canonical_to_body(state0, params, q0)
        work0 = state0

        def rhs(t, y):
            s = FullState.from_array(y, chart=CHART_BODY)
            return model.full_rhs(s, t, params, source)

        invariants = []
        row_chart = CHART_BODY

    events = [
        EventSpec(kind="contact", value=params.R * (1 + 1e-9),
                  direction="decreasing"),
        EventSpec(kind="escape", value=r_escape, direction="increasing"),
        EventSpec(kind="max_time", value=t_end),
    ]
    try:
        result = integrate_until_event(
            rhs, work0.as_array(), events, icfg,
            invariants=invariants, trace_dt=trace_dt,
        )
    except IntegrationError as exc:
        if "underflow" in str(exc):
            return EXIT_BUDGET
        raise

    rows = []
    header = ["t", "X_c", "Y_c", "theta", "px", "py", "ptheta", "X_q", "Y_q"]
    if conserved:
        header += ["H", "K"]
    trace_t = result.trace_t if result.trace_t is not None else np.array([0.0])
    trace_y = (
        result.trace_y if result.trace_y is not None
        else work0.as_array()[None, :]
    )
    h0 = k0 = hf = kf = None
    for t, y in zip(trace_t, trace_y):
        s = FullState.from_array(y, chart=row_chart)
        row = [float(t), *map(float, y[:8])]
        if conserved:
            canon = (
                s if row_chart == CHART_CANONICAL
                else model.body_to_canonical(s, params, q0)
            )
            h = model.hamiltonian(canon, params, q0)
            k = model.angular_momentum(canon)
            row += [h, k]
            if h0 is None:
                h0, k0 = h, k
            hf, kf = h, k
        rows.append(row)

    meta = _meta_common(params, q0)
    meta.update({"t_end": t_end, "formulation": formulation, "seed": seed})
    write_csv(out, header, rows, meta)

    event_name = "completed"
    if result.event is not None and result.event.kind == "contact":
        event_name = "contact"
    elif result.event is not None and result.event.kind == "escape":
        event_name = "escape"
    sidecar = {
        "event": event_name,
        "t_final": float(result.time),
        "n_steps": int(len(trace_t)),
        "near_contact": bool(result.near_contact),
        "h_initial": h0, "h_final": hf,
        "k_initial": k0, "k_final": kf,
        "config": config,
    }
    write_json(out + ".sidecar.json", sidecar, "sidecar.schema.json")
    return EXIT_OK


def cmd_force_check(config: dict, out: str, seed: int, threads: int) -> int:
    params = _params_from(config)
    block = config.get("force_check", {})
    n_samples = int(block.get("n_samples", 20))
    tol = float(block.get("tolerance", 1e-8))
    rng = np.random.default_rng(seed)

    samples = []
    max_err = 0.0
    for _ in range(n_samples):
        # random kinematic snapshot with the source safely outside the foil
        zc = complex(*rng.uniform(-1, 1, 2))
        angle = rng.uniform(0, 2 * math.pi)
        sep = params.R * rng.uniform(1.5, 4.0)
        zq = zc + sep * complex(math.cos(angle), math.sin(angle))
        vel_c = complex(*rng.uniform(-1, 1, 2))
        acc_c = complex(*rng.uniform(-1, 1, 2))
        vel_q = complex(*rng.uniform(-1, 1, 2))
        q = rng.uniform(-2, 2)
        qdot = rng.uniform(-1, 1)
        state = FullState(zc.real, zc.imag, 0.0, 0.0, 0.0, 0.0, zq.real, zq.imag)
        f_closed = complex(
            *model.sedov_force(state, vel_c, acc_c, vel_q, q, qdot, params)
        )
        f_quad = complex(
            *model.sedov_force_quadrature(state, vel_c, acc_c, vel_q, q, qdot, params)
        )
        denom = max(abs(f_closed), 1e-12)
        err = abs(f_closed - f_quad) / denom
        max_err = max(max_err, err)
        samples.append(
            {
                "closed_form": [f_closed.real, f_closed.imag],
                "quadrature": [f_quad.real, f_quad.imag],
                "rel_error": float(err),
            }
        )
    report = {
        "n_samples": n_samples,
        "seed": int(seed),
        "max_rel_error": float(max_err),
        "tolerance": tol,
        "passed": bool(max_err <= tol),
        "samples": samples,
    }
    write_json(out, report, "force_report.schema.json")
    return EXIT_OK if report["passed"] else EXIT_NUMERICAL


def cmd_bifurcation(config: dict, out: str, seed: int, threads: int) -> int:
    params = _params_from(config)
    q = _source_from(config).intensity(0.0)
    block = config.get("bifurcation", {})
    f_min = float(block.get("f_min", 0.05))
    f_max = float(block.get("f_max", 2.0))
    resolution = int(block.get("resolution", 200))
    probe_count = int(block.get("probe_count", 8))
    meta = _meta_common(params, q)
    meta["f_critical"] = balanced.f_critical(params, q)
    header = ["f", "sigma_id", "h"]
    if resolution == 0:
        write_csv(out, header, [], meta)
        return EXIT_OK
    diagram = balanced.bifurcation_diagram(
        params, q, f_range=(f_min, f_max), resolution=resolution,
        probe_count=probe_count,
    )
    rows = []
    for f, h in diagram.sigma_a:
        rows.append([f, "a", h])
    for f, h in diagram.sigma_b:
        rows.append([f, "b", h])
    for f, h in diagram.sigma_c:
        rows.append([f, "c", h])
    for f, h, count in diagram.leaf_count:
        rows.append([f, f"leaf{count}", h])
    write_csv(out, header, rows, meta)
    return EXIT_OK


def cmd_potential(config: dict, out: str, seed: int, threads: int) -> int:
    params = _params_from(config)
    q = _source_from(config).intensity(0.0)
    block = config.get("potential")
    if block is None:
        raise ConfigurationError("config: missing 'potential' block")
    k = float(block["k"])
    report = unbalanced.critical_points(k, params, q)
    span = 1.5 * max((abs(p.x) for p in report.critical_points), default=10.0)
    span = max(span, 3.0 * params.R)
    window = block.get("window", [-span, span, -span, span])
    resolution = int(block.get("resolution", 200))
    xs = np.linspace(window[0], window[1], resolution)
    ys = np.linspace(window[2], window[3], resolution)
    rows = []
    for x in xs:
        for y in ys:
            if x * x + y * y <= params.R**2:
                u = math.nan
            else:
                u = unbalanced.effective_potential(x, y, k, params, q)
            rows.append([float(x), float(y), u])
    meta = _meta_common(params, q)
    meta.update({"k": k, "regime": report.regime, "k_cr": report.k_cr})
    write_csv(out, ["x", "y", "U_e"], rows, meta)
    payload = {
        "k": k,
        "regime": report.regime,
        "k_cr": report.k_cr,
        "k_inf": report.k_inf,
        "critical_points": [
            {"x": p.x, "kind": p.kind, "value": p.value,
             "hessian": list(p.hessian)}
            for p in report.critical_points
        ],
    }
    write_json(out + ".critical.json", payload, "critical_points.schema.json")
    return EXIT_OK


def cmd_hill(config: dict, out: str, seed: int, threads: int) -> int:
    params = _params_from(config)
    q = _source_from(config).intensity(0.0)
    block = config.get("hill")
    if block is None:
        raise ConfigurationError("config: missing 'hill' block")
    window = block.get("window")
    if window is not None and (window[0] >= window[1] or window[2] >= window[3]):
        raise ConfigurationError("hill window is empty")
    regions = unbalanced.hill_regions(
        float(block["h"]), float(block["k"]), params, q,
        window=tuple(window) if window is not None else None,
        resolution=int(block.get("resolution", 500)),
    )
    rows = []
    for i, poly in enumerate(regions.boundaries):
        for x, y in poly:
            rows.append([i, float(x), float(y)])
    meta = _meta_common(params, q)
    meta.update(
        {
            "h": regions.h, "k": regions.k,
            "n_regions": regions.n_regions,
            "region_tags": ";".join(regions.regions),
            "window": ";".join(_fmt(v) for v in regions.window),
        }
    )
    write_csv(out, ["boundary_id", "x", "y"], rows, meta)
    return EXIT_OK


def cmd_scatter(config: dict, out: str, seed: int, threads: int) -> int:
    params = _params_from(config)
    q = _source_from(config).intensity(0.0)
    block = config.get("scatter")
    if block is None:
        raise ConfigurationError("config: missing 'scatter' block")
    cfg = scattering.ScatterConfig(
        r_max=float(block["r_max"]),
        h=float(block["h"]),
        k=float(block["k"]),
        branch=block.get("branch", "largest"),
        max_flight_time=float(block.get("max_flight_time", 1e5)),
        params=params,
        q=q,
    )
    ga = block.get("alpha_grid", {"min": 0.0, "max": 2 * math.pi, "n": 8})
    gb = block.get("b_grid", {"min": -5.0, "max": 5.0, "n": 8})
    alpha_grid = np.linspace(ga["min"], ga["max"], ga["n"])
    b_grid = np.linspace(gb["min"], gb["max"], gb["n"])
    portrait = scattering.scatter_portrait(
        alpha_grid, b_grid, int(block.get("n_iter", 10)), cfg,
        allow_unsafe_level=bool(block.get("allow_unsafe_level", False)),
        n_workers=threads,
    )
    branch_names = {1.0: "largest", 0.0: "smallest"}
    outcome_names = {0.0: "returned", 1.0: "contact", 2.0: "timeout"}
    rows = [
        [int(r[0]), int(r[1]), r[2], r[3], r[4], r[5],
         branch_names[r[6]], outcome_names[r[7]]]
        for r in portrait["points"]
    ]
    meta = _meta_common(params, q)
    meta.update(
        {
            "r_max": cfg.r_max, "h": cfg.h, "k": cfg.k, "branch": cfg.branch,
            "holes": ";".join(map(str, portrait["holes"])),
            "seed": seed,
        }
    )
    write_csv(
        out,
        ["orbit_id", "iter", "alpha", "b", "phi", "p", "branch", "outcome"],
        rows,
        meta,
    )
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "force-check": cmd_force_check,
    "bifurcation": cmd_bifurcation,
    "potential": cmd_potential,
    "hill": cmd_hill,
    "scatter": cmd_scatter,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="foilflow")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", required=True, help="output path (CSV or JSON)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("FSD_THREADS", "0")) or (os.cpu_count() or 1)

    try:
        config = load_config(args.config)
        return _COMMANDS[args.command](config, args.out, args.seed, threads)
    except (ConfigurationError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
