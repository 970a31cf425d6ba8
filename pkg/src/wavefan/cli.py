"""Command-line entry point.

Subcommands: solve, sweep, boundary, eigen, nsystem, oracle, check.
Values resolve flag-over-config-over-default; every summary file embeds
the configuration that actually ran. CSV numbers carry 17 significant
digits so outputs round-trip bit-exactly.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys

import numpy as np

from .boundary import BoundaryData, boundary_layer_check, solve_boundary
from .config import (
    cfg_float,
    cfg_float_list,
    cfg_get,
    cfg_int,
    parse_config,
    parse_system_file,
)
from .constitutive import (
    StressLaw,
    cubic_law,
    hardening_law,
    linear_law,
    load_custom_law,
)
from .eigen import (
    DiffusionSystem,
    admissibility_check,
    generalized_eigen,
    generalized_speed,
    standard_frames,
    two_by_two_closed_form,
)
from .errors import ConfigError, WavefanError
from .exprgrammar import parse_matrix, parse_vector_field
from .limits import (
    analyze_jumps,
    profile_plot_script,
    summary_rows,
    sum_rule_defect,
    sweep_from_solutions,
    sweep_plot_script,
)
from .measures import envelope_check, make_half_grid
from .nsystem import (
    assemble_sources,
    coupled_iteration,
    cross_mass,
    decompose,
    family_jumps,
    family_wave_measure,
)
from .oracle import evolve, self_similar_compare
from .solver import (
    RiemannData,
    SolverConfig,
    auto_domain,
    solve_excised,
    solve_profile,
)

_G17 = ".17g"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) or isinstance(x, np.floating):
        return format(float(x), _G17)
    return str(x)


def _float_of(text, what: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: {text!r} is not a number")


# --------------------------------------------------------------------------
# flag/config resolution


def _load_cfg(args) -> dict:
    if getattr(args, "config", None):
        return parse_config(args.config)
    return {}


def _pick(args, cfg, name, section, cast, default=None, key=None):
    val = getattr(args, name, None)
    if val is not None:
        return val
    key = key or name
    getter = {"float": cfg_float, "int": cfg_int, "str": cfg_get}[cast]
    return getter(cfg, section, key, default)


def _build_law(args, cfg):
    """(law, resolved-description dict) from flags and [law] config."""
    kind = args.law or cfg_get(cfg, "law", "kind")
    if kind is None:
        raise ConfigError("law kind required (--law or [law] kind)")
    kind = kind.lower()
    if kind == "linear":
        c0 = args.c0 if args.c0 is not None else cfg_float(cfg, "law", "c0", 1.0)
        return linear_law(c0), {"law": "linear", "c0": c0}
    if kind == "hardening":
        a = cfg_float(cfg, "law", "a", 1.0)
        b = cfg_float(cfg, "law", "b", 1.0)
        return hardening_law(a, b), {"law": "hardening", "a": a, "b": b}
    if kind == "cubic":
        return cubic_law(), {"law": "cubic"}
    if kind == "custom":
        table = cfg_get(cfg, "law", "table")
        if table is None:
            raise ConfigError("custom law needs [law] table = <csv path>")
        return load_custom_law(table), {"law": "custom", "table": table}
    raise ConfigError(f"unknown law {kind!r}")


def _solver_config(args, cfg, eps: float) -> SolverConfig:
    return SolverConfig(
        eps=eps,
        gamma=_pick(args, cfg, "gamma", "solver", "float", 0.0),
        L=_pick(args, cfg, "L", "solver", "float", None, key="l"),
        n_nodes=_pick(args, cfg, "grid", "solver", "int", 2001),
        excision_delta=_pick(args, cfg, "delta", "solver", "float", 0.0),
        damping=_pick(args, cfg, "damping", "solver", "float", 1.0),
        tol=_pick(args, cfg, "tol", "solver", "float", 1e-10),
        max_iter=_pick(args, cfg, "max_iter", "solver", "int", 200),
    )


def _riemann_data(args, cfg) -> RiemannData:
    return RiemannData(
        v_l=_pick(args, cfg, "vl", "solver", "float", 0.0),
        w_l=_pick(args, cfg, "wl", "solver", "float", 0.0),
        v_r=_pick(args, cfg, "vr", "solver", "float", 0.0),
        w_r=_pick(args, cfg, "wr", "solver", "float", 0.0),
    )


def _eps_of(args, cfg) -> float:
    raw = args.eps if args.eps is not None else cfg_get(cfg, "solver", "eps")
    if raw is None:
        raise ConfigError("eps is required (--eps or [solver] eps)")
    return _float_of(raw, "eps")


def _out_dir(args, cfg) -> str:
    out = _pick(args, cfg, "out_dir", "output", "str", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _describe_config(cfg: SolverConfig) -> dict:
    d = dataclasses.asdict(cfg)
    if d["L"] is None:
        d["L"] = "auto"
    return d


def _write_summary(path, title, sections) -> None:
    """sections: list of (section_name, dict)."""
    lines = [f"# {title}"]
    for name, payload in sections:
        lines.append("")
        lines.append(f"[{name}]")
        for k, v in payload.items():
            lines.append(f"{k} = {_fmt(v)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _config_comment_lines(resolved: dict) -> list:
    return [f"# {k} = {_fmt(v)}" for k, v in resolved.items()]


def _measure_columns(solution):
    """Full-grid phi columns aligned with grid.nodes."""
    grid = solution.grid
    n = len(grid.nodes)
    phi_m = np.zeros(n)
    phi_p = np.zeros(n)
    mm, mp = solution.measures
    idx_m = np.sort(grid.side_indices("minus"))
    idx_p = np.sort(grid.side_indices("plus"))
    phi_m[idx_m] = mm.density
    phi_p[idx_p] = mp.density
    return phi_m, phi_p


def _write_profile_csv(path, solution, resolved) -> None:
    grid = solution.grid
    phi_m, phi_p = _measure_columns(solution)
    with open(path, "w", newline="") as fh:
        for line in _config_comment_lines(resolved):
            fh.write(line + "\n")
        wr = csv.writer(fh)
        wr.writerow(["y", "w", "v", "phi_minus", "phi_plus"])
        for i in range(len(grid.nodes)):
            wr.writerow(
                [
                    _fmt(grid.nodes[i]),
                    _fmt(grid.w[i]),
                    _fmt(grid.v[i]),
                    _fmt(phi_m[i]),
                    _fmt(phi_p[i]),
                ]
            )


def _write_measures_csv(path, solution) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["side", "y", "density", "exponent"])
        for m in solution.measures:
            for i in range(len(m.support_nodes)):
                wr.writerow(
                    [m.side, _fmt(m.support_nodes[i]), _fmt(m.density[i]),
                     _fmt(m.exponent[i])]
                )


def _jump_section(jumps, defect=None) -> dict:
    out = {"n_jumps": len(jumps)}
    for k, j in enumerate(jumps):
        out[f"jump{k}_location"] = j.location
        out[f"jump{k}_w_minus"] = j.w_minus
        out[f"jump{k}_w_plus"] = j.w_plus
        out[f"jump{k}_rh_w"] = j.rh_w
        out[f"jump{k}_rh_v"] = j.rh_v
        out[f"jump{k}_class"] = j.classification
    if defect is not None:
        out["sum_rule_defect"] = defect
    return out


# --------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    cfg = _load_cfg(args)
    law, law_desc = _build_law(args, cfg)
    eps = _eps_of(args, cfg)
    config = _solver_config(args, cfg, eps)
    data = _riemann_data(args, cfg)
    out = _out_dir(args, cfg)

    if config.excision_delta > 0:
        solution = solve_excised(law, config, data, config.excision_delta)
    else:
        solution = solve_profile(law, config, data)

    resolved = dict(law_desc)
    resolved.update(_describe_config(config))
    resolved.update(dataclasses.asdict(data))

    try:
        jumps = analyze_jumps(solution, law)
        defect = sum_rule_defect(solution, jumps)
        jump_info = _jump_section(jumps, defect)
    except WavefanError as err:
        jump_info = {"jump_analysis_error": err.name}

    profile_path = os.path.join(out, "profile.csv")
    _write_profile_csv(profile_path, solution, resolved)
    if args.dump_measures:
        _write_measures_csv(os.path.join(out, "measures.csv"), solution)
    _write_summary(
        os.path.join(out, "summary.txt"),
        "wavefan solve",
        [
            ("resolved_config", resolved),
            ("results", solution.to_summary()),
            ("waves", jump_info),
        ],
    )
    with open(os.path.join(out, "profile.gp"), "w") as fh:
        fh.write(profile_plot_script("profile.csv"))
    print(
        f"solve: w_star={solution.w_star:.6g} v_star={solution.v_star:.6g} "
        f"iterations={solution.iterations} -> {profile_path}"
    )
    return 0


def cmd_boundary(args) -> int:
    cfg = _load_cfg(args)
    law, law_desc = _build_law(args, cfg)
    eps = _eps_of(args, cfg)
    config = _solver_config(args, cfg, eps)
    wb = _pick(args, cfg, "wb", "solver", "float", None)
    if wb is None:
        raise ConfigError("boundary needs --wb (or [solver] wb)")
    data = BoundaryData(
        w_b=wb,
        v_r=_pick(args, cfg, "vr", "solver", "float", 0.0),
        w_r=_pick(args, cfg, "wr", "solver", "float", 0.0),
    )
    out = _out_dir(args, cfg)
    solution = solve_boundary(law, config, data)
    layer = boundary_layer_check(solution, eps)

    resolved = dict(law_desc)
    resolved.update(_describe_config(config))
    resolved.update(dataclasses.asdict(data))

    grid = solution.grid
    m = solution.measure
    prof = os.path.join(out, "boundary_profile.csv")
    with open(prof, "w", newline="") as fh:
        for line in _config_comment_lines(resolved):
            fh.write(line + "\n")
        wr = csv.writer(fh)
        wr.writerow(["y", "w", "v", "phi_plus"])
        for i in range(len(grid.nodes)):
            wr.writerow(
                [_fmt(grid.nodes[i]), _fmt(grid.w[i]), _fmt(grid.v[i]),
                 _fmt(m.density[i])]
            )
    results = solution.to_summary()
    results["layer_constant"] = layer.constant
    _write_summary(
        os.path.join(out, "boundary_summary.txt"),
        "wavefan boundary",
        [("resolved_config", resolved), ("results", results)],
    )
    with open(os.path.join(out, "boundary_profile.gp"), "w") as fh:
        fh.write(profile_plot_script("boundary_profile.csv"))
    print(
        f"boundary: v0_trace={solution.v0_trace:.6g} "
        f"iterations={solution.iterations} -> {prof}"
    )
    return 0


def _sweep_member(payload):
    law, config, data, delta = payload
    if delta > 0:
        return solve_excised(law, config, data, delta)
    return solve_profile(law, config, data)


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    law, law_desc = _build_law(args, cfg)
    raw = args.eps if args.eps is not None else cfg_get(cfg, "sweep", "eps_list")
    if raw is None:
        raise ConfigError("sweep needs --eps e1,e2,... (or [sweep] eps_list)")
    if isinstance(raw, str):
        eps_list = [_float_of(p, "eps member") for p in raw.split(",") if p.strip()]
    else:
        eps_list = list(raw)
    if len(eps_list) < 2:
        raise ConfigError("sweep needs at least two eps values")
    gamma = args.gamma if args.gamma is not None else cfg_float(cfg, "sweep", "gamma", 0.0)
    r0 = cfg_float(cfg, "sweep", "r0", 0.1)
    jobs = _pick(args, cfg, "jobs", "sweep", "int", 1)
    data = _riemann_data(args, cfg)
    base = _solver_config(args, cfg, eps_list[0])
    out = _out_dir(args, cfg)

    members = [
        (law, dataclasses.replace(base, eps=e, gamma=gamma), data, base.excision_delta)
        for e in eps_list
    ]
    if jobs and jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            solutions = list(pool.map(_sweep_member, members))
    else:
        solutions = [_sweep_member(mb) for mb in members]
    sweep = sweep_from_solutions(solutions, eps_list, r0)

    resolved = dict(law_desc)
    resolved.update(_describe_config(base))
    resolved.update(dataclasses.asdict(data))
    resolved["eps_list"] = ",".join(_fmt(e) for e in eps_list)
    resolved["gamma"] = gamma
    resolved["r0"] = r0
    resolved["jobs"] = jobs

    jumps_per = []
    for sol in solutions:
        try:
            jumps_per.append(analyze_jumps(sol, law))
        except WavefanError:
            jumps_per.append([])

    table = os.path.join(out, "sweep_summary.csv")
    header, rows = summary_rows(solutions, jumps_per)
    with open(table, "w", newline="") as fh:
        for line in _config_comment_lines(resolved):
            fh.write(line + "\n")
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)

    for e, sol in zip(eps_list, solutions):
        _write_profile_csv(
            os.path.join(out, f"profile_eps_{e:g}.csv"), sol, resolved
        )

    dist = {f"d_{k}": d for k, d in enumerate(sweep.distances)}
    dist["cauchy"] = sweep.cauchy
    dist["max_tv_w"] = max(sweep.tv_w)
    _write_summary(
        os.path.join(out, "sweep_summary.txt"),
        "wavefan sweep",
        [("resolved_config", resolved), ("distances", dist)],
    )
    with open(os.path.join(out, "sweep.gp"), "w") as fh:
        fh.write(sweep_plot_script("sweep_summary.csv"))
    print(
        f"sweep: {len(eps_list)} members, cauchy={'yes' if sweep.cauchy else 'no'} "
        f"-> {table}"
    )
    return 0


def cmd_eigen(args) -> int:
    cfg = _load_cfg(args)
    spec = parse_system_file(args.system)
    n = spec.n
    if not spec.a_entries:
        raise ConfigError(f"{args.system}: eigen needs A entries (a11 = ...)")
    A_map = parse_matrix(spec.a_entries, n, n)
    if spec.b_entries:
        B_map = parse_matrix(spec.b_entries, n, n)
    else:
        B_map = lambda u: np.eye(n)
    system = DiffusionSystem(n=n, A=A_map, B=B_map, eta=spec.eta)
    out = _out_dir(args, cfg)

    base_u = spec.states.get("u", np.zeros(n))
    states = [np.asarray(base_u, dtype=float)]
    if spec.samples > 0:
        rng = np.random.default_rng(0)
        states += [
            base_u + rng.uniform(-0.5, 0.5, size=n) for _ in range(spec.samples)
        ]

    report = os.path.join(out, "eigen_report.csv")
    n_err = 0
    with open(report, "w", newline="") as fh:
        wr = csv.writer(fh)
        head = [f"u{k+1}" for k in range(n)] + ["y"]
        head += [f"mu{j+1}" for j in range(n)]
        head += [f"lambda_hat{j+1}" for j in range(n)]
        if n == 2:
            head += ["beta", "admissible"]
        head += ["error"]
        wr.writerow(head)
        for u in states:
            row = [_fmt(x) for x in u] + [_fmt(spec.y)]
            try:
                pairs = generalized_eigen(system, u, spec.y)
                speeds = generalized_speed(system, u, spec.y)
                row += [_fmt(p.mu) for p in pairs]
                row += [_fmt(s) for s in speeds]
                if n == 2:
                    rec = admissibility_check(system, [u])[0]
                    row += [_fmt(rec.beta), _fmt(rec.passed)]
                row += [""]
            except WavefanError as err:
                pad = 2 * n + (2 if n == 2 else 0)
                row += [""] * pad + [err.name]
                n_err += 1
            wr.writerow(row)

    _write_summary(
        os.path.join(out, "eigen_summary.txt"),
        "wavefan eigen",
        [
            (
                "resolved_config",
                {"system": args.system, "n": n, "y": spec.y,
                 "samples": spec.samples, "eta": spec.eta},
            ),
            ("results", {"rows": len(states), "errors": n_err}),
        ],
    )
    print(f"eigen: {len(states)} state(s), {n_err} error row(s) -> {report}")
    return 0


def cmd_nsystem(args) -> int:
    cfg = _load_cfg(args)
    spec = parse_system_file(args.system)
    n = spec.n
    flux_sources = spec.flux_list()
    if flux_sources is None:
        raise ConfigError(f"{args.system}: nsystem needs flux components F1..F{n}")
    F_fn, _ = parse_vector_field(flux_sources, n)
    if "wb" not in spec.states or "wr" not in spec.states:
        raise ConfigError(f"{args.system}: nsystem needs wb and wr state vectors")
    w_b = spec.states["wb"]
    w_r = spec.states["wr"]
    eps = _eps_of(args, cfg)
    gamma = _pick(args, cfg, "gamma", "solver", "float", 0.0)
    n_grid = _pick(args, cfg, "grid", "solver", "int", 801)
    out = _out_dir(args, cfg)

    fd_h = 1e-6

    def A_of_w(u):
        u = np.asarray(u, dtype=float)
        J = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = fd_h
            J[:, j] = (F_fn(u + e) - F_fn(u - e)) / (2.0 * fd_h)
        return J

    L = _pick(args, cfg, "L", "solver", "float", None, key="l")
    if L is None:
        lam_max = 0.0
        for t in np.linspace(0.0, 1.0, 21):
            ev = np.linalg.eigvals(A_of_w(w_b + t * (w_r - w_b)))
            lam_max = max(lam_max, float(np.sqrt(np.max(np.abs(ev)))))
        L = lam_max + 2.0

    grid = make_half_grid(L, n_grid)
    y = grid.nodes
    ramp = (y / L)[:, None]
    W = w_b[None, :] + ramp * (w_r - w_b)[None, :]

    decomp = decompose(A_of_w, y, W)
    measures = [
        family_wave_measure(decomp.lam[:, j], y, eps, gamma, "plus")
        for j in range(n)
    ]
    coeffs = family_jumps(A_of_w, w_b, w_r)

    n_iter = 5
    contractions = []
    res = None
    for _ in range(n_iter):
        sources = assemble_sources(decomp, A_of_w, eps, gamma)
        res = coupled_iteration(decomp, measures, sources, coeffs, eps)
        decomp.a = res.a
        contractions.append(res.contraction)

    afields = os.path.join(out, "nsystem_afields.csv")
    with open(afields, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["y"] + [f"a{j+1}" for j in range(n)]
                    + [f"phi{j+1}" for j in range(n)])
        for i in range(len(y)):
            wr.writerow(
                [_fmt(y[i])]
                + [_fmt(decomp.a[i, j]) for j in range(n)]
                + [_fmt(measures[j].density[i]) for j in range(n)]
            )

    results = {
        "L": L,
        "eps": eps,
        "gamma": gamma,
        "iterations": n_iter,
    }
    for j in range(n):
        results[f"lambda{j+1}_min"] = float(decomp.lam[:, j].min())
        results[f"lambda{j+1}_max"] = float(decomp.lam[:, j].max())
        results[f"coeff{j+1}"] = float(coeffs[j])
        results[f"amplitude{j+1}"] = float(res.amplitudes[j])
    for k, c in enumerate(contractions):
        results[f"contraction_{k}"] = c
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            results[f"cross_mass_{i+1}{j+1}"] = cross_mass(
                measures[i],
                float(decomp.lam[:, j].min()),
                float(decomp.lam[:, j].max()),
            )
    _write_summary(
        os.path.join(out, "nsystem_summary.txt"),
        "wavefan nsystem",
        [
            ("resolved_config",
             {"system": args.system, "n": n, "eps": eps, "gamma": gamma,
              "grid": n_grid, "L": L}),
            ("results", results),
        ],
    )
    print(
        f"nsystem: {n} families, final contraction={contractions[-1]:.3g} "
        f"-> {afields}"
    )
    return 0


def cmd_oracle(args) -> int:
    cfg = _load_cfg(args)
    law, law_desc = _build_law(args, cfg)
    eps = _eps_of(args, cfg)
    data = _riemann_data(args, cfg)
    gamma = _pick(args, cfg, "gamma", "solver", "float", 0.0)
    delta = args.delta if args.delta is not None else gamma * eps * eps
    t_final = args.t_final if args.t_final is not None else 2.0
    cfl = args.cfl if args.cfl is not None else 0.4
    n_grid = _pick(args, cfg, "grid", "solver", "int", 4001)
    out = _out_dir(args, cfg)

    if args.X is not None:
        X = args.X
    else:
        X = (auto_domain(law, data) - 2.0) * t_final / 0.8 + 1.0

    result = evolve(law, data, eps, delta, X, t_final, cfl=cfl, n_nodes=n_grid)

    gamma_equiv = delta / (eps * eps) if eps > 0 else 0.0
    sol_config = SolverConfig(eps=eps, gamma=gamma_equiv, n_nodes=min(n_grid, 4001))
    solution = solve_profile(law, sol_config, data)
    report = self_similar_compare(result, solution, r0=0.0)

    resolved = dict(law_desc)
    resolved.update(dataclasses.asdict(data))
    resolved.update(
        {"eps": eps, "delta": delta, "X": X, "t_final": t_final, "cfl": cfl,
         "grid": n_grid}
    )

    y_o, v_o, w_o = result.rescaled()
    prof = os.path.join(out, "oracle_profile.csv")
    with open(prof, "w", newline="") as fh:
        for line in _config_comment_lines(resolved):
            fh.write(line + "\n")
        wr = csv.writer(fh)
        wr.writerow(["y", "w", "v"])
        for i in range(len(y_o)):
            wr.writerow([_fmt(y_o[i]), _fmt(w_o[i]), _fmt(v_o[i])])

    _write_summary(
        os.path.join(out, "oracle_summary.txt"),
        "wavefan oracle",
        [
            ("resolved_config", resolved),
            (
                "results",
                {
                    "steps": result.steps,
                    "backend": result.backend,
                    "conservation_w": result.conservation_w,
                    "conservation_v": result.conservation_v,
                    "conservation_w_rel": result.conservation_w_rel,
                    "conservation_v_rel": result.conservation_v_rel,
                    "l1_w_vs_profile": report.l1_w,
                    "l1_v_vs_profile": report.l1_v,
                    "profile_w_star": solution.w_star,
                },
            ),
        ],
    )
    print(
        f"oracle: {result.steps} steps ({result.backend}), "
        f"L1(w)={report.l1_w:.4g} -> {prof}"
    )
    return 0


# --------------------------------------------------------------------------
# check: built-in invariant suite


def _check_cases():
    lin2 = linear_law(2.0)
    hard = hardening_law(1.0, 1.0)

    def measure_normalization():
        cfg = SolverConfig(eps=0.05, n_nodes=801)
        sol = solve_profile(lin2, cfg, RiemannData(0.0, 0.0, 0.0, 1.0))
        worst = 0.0
        for m in sol.measures:
            worst = max(worst, abs(m.mass() - 1.0))
            if m.density.min() < 0:
                return False, "negative density"
        return worst <= 1e-12, f"max |mass-1| = {worst:.2e}"

    def measure_envelopes():
        cfg = SolverConfig(eps=0.02, n_nodes=2001)
        sol = solve_profile(lin2, cfg, RiemannData(0.0, 0.0, 0.0, 1.0))
        rep = envelope_check(sol.measures[1], 0.02)
        return rep.passed, f"C1 = {rep.c1_fit:.3g}"

    def middle_state_linear():
        cfg = SolverConfig(eps=0.05, n_nodes=801)
        sol = solve_profile(lin2, cfg, RiemannData(0.0, 0.0, 0.0, 1.0))
        err = abs(sol.w_star - 0.5)
        return err <= 5 * 0.05, f"|w_star - 0.5| = {err:.2e}"

    def conservation_defect():
        cfg = SolverConfig(eps=0.05, n_nodes=801)
        sol = solve_profile(hard, cfg, RiemannData(0.1, -0.2, -0.1, 0.3))
        return sol.conservation_defect <= 1e-8, f"defect = {sol.conservation_defect:.2e}"

    def mirror_symmetry():
        cfg = SolverConfig(eps=0.05, n_nodes=801)
        a = solve_profile(hard, cfg, RiemannData(0.3, -0.2, -0.1, 0.4))
        b = solve_profile(hard, cfg, RiemannData(0.1, 0.4, -0.3, -0.2))
        same = np.array_equal(a.grid.w, b.grid.w[::-1])
        return same, "w field mirrors bitwise" if same else "mirror mismatch"

    def tv_bound():
        cfg = SolverConfig(eps=0.05, n_nodes=801)
        data = RiemannData(0.2, -0.5, -0.3, 0.6)
        sol = solve_profile(hard, cfg, data)
        c0 = np.sqrt(hard.c0_sq)
        lim = abs(data.w_r - data.w_l) + (2.0 / c0) * abs(data.v_r - data.v_l)
        return sol.tv_w <= 1.05 * lim, f"tv_w = {sol.tv_w:.4g} vs {1.05 * lim:.4g}"

    def boundary_trace():
        cfg = SolverConfig(eps=0.02, n_nodes=1601)
        sol = solve_boundary(lin2, cfg, BoundaryData(1.0, 0.0, 0.0))
        err = abs(sol.v0_trace + 2.0)
        return err <= 5 * 0.02, f"|v(0) + 2| = {err:.2e}"

    def eigen_identity_diffusion():
        A = np.array([[2.0, 1.0], [0.5, 3.0]])
        system = DiffusionSystem(n=2, A=lambda u: A, B=lambda u: np.eye(2))
        lams, _, _ = standard_frames(A)
        pairs = generalized_eigen(system, np.zeros(2), 0.0)
        err = max(abs(p.mu - l) for p, l in zip(pairs, lams))
        return err <= 1e-12, f"max |mu - lambda| = {err:.2e}"

    def eigen_closed_form():
        b = np.array([[1.0, 0.1], [0.1, 1.0]])
        got = two_by_two_closed_form(b, 1.0, 4.0, 0.0)
        ref = (0.9966923282402469, 4.053812722264803)
        err = max(abs(g - r) for g, r in zip(got, ref))
        return err <= 1e-10, f"closed-form err = {err:.2e}"

    def oracle_conservation():
        res = evolve(
            lin2, RiemannData(0.0, 0.0, 0.0, 1.0), 0.05, 0.0,
            X=4.0, t_final=0.5, n_nodes=801,
        )
        worst = max(res.conservation_w_rel, res.conservation_v_rel)
        return worst <= 1e-6, f"audit rel = {worst:.2e}"

    def jump_rh_and_sum_rule():
        # double-shock datum on the chord w: 0.3 -> 0.7 -> 0.3; smooth data
        # spread into rarefactions far below the jump detector threshold
        cfg = SolverConfig(eps=0.02, n_nodes=2001, L=4.0)
        sol = solve_profile(hard, cfg, RiemannData(0.0, 0.3, 1.070327052820772, 0.3))
        jumps = analyze_jumps(sol, hard)
        if len(jumps) != 2:
            return False, f"expected 2 jumps, got {len(jumps)}"
        gate = max(
            j.rh_w + j.rh_v - 20 * 0.02 * (1 + abs(j.location)) for j in jumps
        )
        defect = sum_rule_defect(sol, jumps)
        ok = gate <= 0 and defect <= 1e-6
        return ok, f"rh slack = {-gate:.2e}, sum defect = {defect:.2e}"

    def nsystem_reconstruction():
        A = lambda u: np.array([[4.0, 0.0], [0.0, 9.0]])
        y = np.linspace(0.0, 5.0, 201)
        W = np.column_stack([0.02 * np.tanh(y - 2.0), 0.01 * np.tanh(y - 3.0)])
        dec = decompose(A, y, W)
        resid = np.max(np.abs(dec.reconstruct_wprime() - np.gradient(W, y, axis=0)))
        src = assemble_sources(dec, A, 0.01)
        return (
            resid <= 1e-10 and np.max(np.abs(src.D1)) <= 1e-12,
            f"resid = {resid:.2e}, |D1| = {np.max(np.abs(src.D1)):.2e}",
        )

    return [
        ("measure_normalization", measure_normalization),
        ("measure_envelopes", measure_envelopes),
        ("middle_state_linear", middle_state_linear),
        ("conservation_defect", conservation_defect),
        ("mirror_symmetry", mirror_symmetry),
        ("tv_bound", tv_bound),
        ("boundary_trace", boundary_trace),
        ("eigen_identity_diffusion", eigen_identity_diffusion),
        ("eigen_closed_form", eigen_closed_form),
        ("oracle_conservation", oracle_conservation),
        ("jump_rh_and_sum_rule", jump_rh_and_sum_rule),
        ("nsystem_reconstruction", nsystem_reconstruction),
    ]


def cmd_check(args) -> int:
    rows = []
    for name, fn in _check_cases():
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, ok, detail))
    width = max(len(r[0]) for r in rows)
    n_fail = 0
    for name, ok, detail in rows:
        mark = "PASS" if ok else "FAIL"
        if not ok:
            n_fail += 1
        print(f"{name:<{width}}  {mark}  {detail}")
    print(f"{n_fail} of {len(rows)} checks failed" if n_fail else
          f"all {len(rows)} checks passed")
    return 1 if n_fail else 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key-value config file")
    common.add_argument("--out-dir", dest="out_dir", help="output directory")

    law_p = argparse.ArgumentParser(add_help=False)
    law_p.add_argument("--law", choices=["linear", "hardening", "cubic", "custom"])
    law_p.add_argument("--c0", type=float, help="linear law sound speed")

    solver_p = argparse.ArgumentParser(add_help=False)
    solver_p.add_argument("--eps", help="viscosity (sweep: comma list)")
    solver_p.add_argument("--gamma", type=float, help="capillarity ratio delta/eps^2")
    solver_p.add_argument("--delta", type=float,
                          help="excision radius (oracle: dispersion coefficient)")
    solver_p.add_argument("--L", type=float, help="half-width of the y domain")
    solver_p.add_argument("--grid", type=int, help="node count")
    solver_p.add_argument("--tol", type=float, help="fixed-point tolerance")
    solver_p.add_argument("--max-iter", dest="max_iter", type=int)
    solver_p.add_argument("--damping", type=float)

    data_p = argparse.ArgumentParser(add_help=False)
    data_p.add_argument("--vl", type=float)
    data_p.add_argument("--wl", type=float)
    data_p.add_argument("--vr", type=float)
    data_p.add_argument("--wr", type=float)

    parser = argparse.ArgumentParser(
        prog="wavefan",
        description="Self-similar viscous and viscous-capillary wave fans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, law_p, solver_p, data_p],
                       help="solve one Riemann problem")
    p.add_argument("--dump-measures", dest="dump_measures", action="store_true")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("sweep", parents=[common, law_p, solver_p, data_p],
                       help="eps -> 0 sweep with Cauchy distances")
    p.add_argument("--jobs", type=int, help="parallel workers")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("boundary", parents=[common, law_p, solver_p],
                       help="boundary Riemann problem on y > 0")
    p.add_argument("--wb", type=float, help="boundary state w_b")
    p.add_argument("--vr", type=float)
    p.add_argument("--wr", type=float)
    p.set_defaults(fn=cmd_boundary)

    p = sub.add_parser("eigen", parents=[common],
                       help="generalized eigenstructure report")
    p.add_argument("--system", required=True, metavar="FILE")
    p.set_defaults(fn=cmd_eigen)

    p = sub.add_parser("nsystem", parents=[common, solver_p],
                       help="N-family decomposition and coupled iteration")
    p.add_argument("--system", required=True, metavar="FILE")
    p.set_defaults(fn=cmd_nsystem)

    p = sub.add_parser("oracle", parents=[common, law_p, solver_p, data_p],
                       help="time-dependent comparison run")
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--X", dest="X", type=float, help="half-width of the x domain")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("check", parents=[common],
                       help="run the built-in invariant suite")
    p.set_defaults(fn=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except WavefanError as exc:
        msg = str(exc) or exc.name
        print(f"error: {exc.name}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
