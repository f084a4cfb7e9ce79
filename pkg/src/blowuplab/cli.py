"""Command-line entry point: ``blowuplab {check,simulate,gronwall,report,sweep}``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as bio
from .criteria import SystemKind, envelope_J, gate, lower_bound_Ei
from .errors import BadSpec, BlowupLabError, InvalidParams, MissingManifest
from .gronwall import GronwallParams, gronwall_bound, ode_oracle
from .moments import MonoKineticParticles, build_initial_data, fluid_moments, particle_moments
from .scenario import Scenario, load_scenario
from .simulator import SimState, check_identities, simulate
from .simulator.twophase import DispersedPhase, run_two_phase

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_GATE_FALSE = 2
EXIT_IDENTITY = 3

CHECK_JSON = "check.json"
MOMENTS_CSV = "moments.csv"
IDENTITIES_JSON = "identities.json"
ENVELOPE_CSV = "envelope.csv"
STATE_CSV = "final_state.csv"
REPORT_MD = "report.md"


def _err(msg: str):
    print(f"error: {msg}", file=sys.stderr)


def resolve_out(scenario: Scenario, out: Optional[str]) -> Path:
    """``--out`` wins, then ``outputs.directory``, then ``$BLOWUPLAB_OUT/<stem>``, then ``runs/<stem>``."""
    if out:
        return Path(out)
    if scenario.cfg.outputs.directory:
        return Path(scenario.cfg.outputs.directory)
    root = os.environ.get("BLOWUPLAB_OUT")
    return Path(root or "runs") / scenario.stem


def _wants(scenario: Scenario, fmt: str) -> bool:
    return fmt in scenario.cfg.outputs.formats


def _initial_moments(scenario: Scenario, params):
    field_, cloud = build_initial_data(scenario.initial_spec(), params)
    mv = fluid_moments(field_, params)
    if len(cloud):
        mv = mv.combine(particle_moments(cloud))
    return mv


def _criterion(scenario: Scenario, params):
    mv0 = _initial_moments(scenario, params)
    return gate(scenario.system(), params, mv0, scenario.overrides())


def _check_summary(rep) -> dict:
    lb = rep.lifespan_bound
    return {
        "system": rep.system.value,
        "theorem": rep.theorem.value,
        "branch": rep.branch,
        "gate": bool(rep.gate),
        "margin": rep.margin,
        "t_star": None if lb is None else lb.t_star,
        "bracket": None if lb is None else [lb.bracket_lo, lb.bracket_hi],
        "notes": list(rep.notes),
    }


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def run_check(scenario: Scenario, out_dir: Path, echo=print) -> int:
    started = bio.now()
    params = scenario.params()
    rep = _criterion(scenario, params)
    artifacts = []
    if _wants(scenario, "json"):
        bio.write_json(out_dir / CHECK_JSON, rep.to_json_dict())
        artifacts.append(CHECK_JSON)
    summary = _check_summary(rep)
    bio.update_manifest(out_dir, "check", scenario.digest, scenario.cfg.initial_data.seed,
                        artifacts, summary, started)
    echo(f"theorem: {rep.theorem.value} [{rep.branch}]")
    echo(f"gate: {str(rep.gate).lower()} (margin {rep.margin:.6g})")
    if summary["t_star"] is not None:
        lo, hi = summary["bracket"]
        echo(f"T*: {summary['t_star']:.9g} in [{lo:.9g}, {hi:.9g}]")
    for note in rep.notes:
        echo(f"note: {note}")
    return EXIT_OK if rep.gate else EXIT_GATE_FALSE


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _evolve(scenario: Scenario, params, config):
    kind = scenario.system().kind
    spec = scenario.initial_spec()
    if kind == SystemKind.THICK_SPRAYS:
        raise BadSpec("thick sprays are evaluated on static data only; use 'check'")
    if kind == SystemKind.TWO_PHASE:
        p = spec.particles
        if p is not None and not isinstance(p, MonoKineticParticles):
            raise BadSpec("two_phase needs monokinetic particles for the dispersed phase")
        field_, _ = build_initial_data(
            type(spec)(spec.domain, spec.cells, spec.fluid, None, 0, spec.seed), params
        )
        if p is None:
            phase = DispersedPhase(field_.x_lo, field_.x_hi, np.zeros(field_.n), np.zeros(field_.n))
        else:
            phase = DispersedPhase.gaussian(field_.x_lo, field_.x_hi, field_.n, p.mass, p.center,
                                            p.width, p.drift, p.slope)
        return run_two_phase(field_, phase, params, config, check=False)
    field_, cloud = build_initial_data(spec, params)
    return simulate(SimState.from_data(field_, cloud), params, config)


def _envelope_rows(series, rep, params, rho_max):
    t = np.asarray(series.t, dtype=float)
    J = series.column("J")
    E_i = series.column("E_i")
    I_rho = series.column("I_rho")
    env = np.asarray(envelope_J(rep.theorem, rep.constants, t, params), dtype=float)
    ci = rep.crossing
    I_up = ci.I0 + ci.P1 * t + ci.P2 * t * t
    low = np.asarray(lower_bound_Ei(rep.theorem, rep.constants, None, t, params, rho_max),
                     dtype=float)
    header = ["t", "J", "J_envelope", "I_rho", "I_upper", "E_i", "E_i_lower"]
    return header, list(zip(t, J, env, I_rho, I_up, E_i, low))


def run_simulate(scenario: Scenario, out_dir: Path, echo=print) -> int:
    started = bio.now()
    params = scenario.params()
    config = scenario.sim_config()
    if config is None:
        raise BadSpec("scenario has no 'sim' section")
    result = _evolve(scenario, params, config)

    rep = None
    try:
        rep = _criterion(scenario, params)
    except BlowupLabError as exc:
        echo(f"note: no criterion for this scenario ({exc})")
    envelope = None
    if rep is not None and rep.constants.m_rho > 0:
        try:
            envelope_J(rep.theorem, rep.constants, 0.0, params)

            def envelope(t, _rep=rep):
                return envelope_J(_rep.theorem, _rep.constants, t, params)
        except BlowupLabError:
            envelope = None

    ident = check_identities(result.series, params, dx=result.dx, dt=result.dt_max,
                             envelope=envelope, t_stop=result.verdict.t_detect,
                             tolerances=dict(scenario.cfg.sim.tolerances))

    artifacts = []
    if _wants(scenario, "csv"):
        bio.write_moments_csv(out_dir / MOMENTS_CSV, result.series)
        artifacts.append(MOMENTS_CSV)
        st = result.final
        bio.write_csv(out_dir / STATE_CSV, ["x", "rho", "u"], zip(st.x, st.rho, st.u))
        artifacts.append(STATE_CSV)
        if envelope is not None:
            header, rows = _envelope_rows(result.series, rep, params, scenario.cfg.system.rho_max)
            bio.write_csv(out_dir / ENVELOPE_CSV, header, rows)
            artifacts.append(ENVELOPE_CSV)
    if _wants(scenario, "json"):
        bio.write_json(out_dir / IDENTITIES_JSON, ident.to_json_dict())
        artifacts.append(IDENTITIES_JSON)

    v = result.verdict
    summary = {
        "verdict": v.as_dict(),
        "steps": result.steps,
        "samples": len(result.series),
        "dx": result.dx,
        "dt_min": result.dt_min,
        "dt_max": result.dt_max,
        "identities": {n: c.summary() for n, c in ident.checks.items()},
        "identities_ok": ident.ok,
        "criterion": None if rep is None else _check_summary(rep),
    }
    bio.update_manifest(out_dir, "simulate", scenario.digest, scenario.cfg.initial_data.seed,
                        artifacts, summary, started)

    line = f"verdict: {v.kind.value}"
    if v.t_detect is not None:
        line += f" at t={v.t_detect:.6g} ({v.trigger})"
    if v.reason:
        line += f" ({v.reason})"
    echo(line)
    echo(f"steps: {result.steps}, samples: {len(result.series)}")
    for name, c in ident.checks.items():
        if c.applicable:
            flag = "ok" if c.ok else "VIOLATED"
            echo(f"identity {name}: max {c.worst:.3e} (tol {c.tolerance:.1e}) {flag}")
    if not ident.ok:
        echo(f"identity violation: {', '.join(ident.violations())}")
        return EXIT_IDENTITY
    if v.kind.value == "aborted":
        return EXIT_ERROR
    return EXIT_OK


# ---------------------------------------------------------------------------
# gronwall
# ---------------------------------------------------------------------------


def gronwall_table(a: float, b: float, beta: float, f0: float, t_end: float, points: int = 25,
                   dt: float = 1e-3):
    """Bound and oracle on a log-spaced grid ending at ``t_end``."""
    p = GronwallParams(a, b, beta, f0)
    t = np.geomspace(t_end * 1e-3, t_end, points)
    bound = np.asarray(gronwall_bound(p, t), dtype=float)
    oracle = ode_oracle(p, t_end, min(dt, t[0]), t_eval=t).f
    return t, bound, np.asarray(oracle, dtype=float)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def ascii_plot(t, curves: dict, width: int = 64, height: int = 16, log: bool = True) -> str:
    """Character plot of several curves sharing the time axis (later curves drawn on top)."""
    t = np.asarray(t, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in curves.items()}
    tr = lambda y: np.log10(np.maximum(y, 1e-300)) if log else y  # noqa: E731
    allv = np.concatenate([tr(v)[np.isfinite(tr(v))] for v in ys.values()])
    if t.size < 2 or allv.size == 0:
        return "(not enough samples to plot)\n"
    lo, hi = float(allv.min()), float(allv.max())
    if hi <= lo:
        hi = lo + 1.0
    grid = [[" "] * width for _ in range(height)]
    marks = "*o+x#"
    t0, t1 = float(t[0]), float(t[-1])
    span = t1 - t0 if t1 > t0 else 1.0
    for ci, (name, y) in enumerate(ys.items()):
        for ti, yi in zip(t, tr(y)):
            if not np.isfinite(yi):
                continue
            c = min(width - 1, int((ti - t0) / span * (width - 1) + 0.5))
            r = min(height - 1, int((hi - yi) / (hi - lo) * (height - 1) + 0.5))
            grid[r][c] = marks[ci % len(marks)]
    label = "log10 " if log else ""
    top, bot = f"{label}{hi:+.3g}", f"{label}{lo:+.3g}"
    w = max(len(top), len(bot))
    pad = " " * (w + 1)
    lines = [f"{top:>{w}} |" + "".join(grid[0])]
    lines += [pad + "|" + "".join(row) for row in grid[1:-1]]
    lines.append(f"{bot:>{w}} |" + "".join(grid[-1]))
    lines.append(pad + "+" + "-" * width)
    lines.append(pad + f" t = {t0:.3g} .. {t1:.3g}")
    legend = ", ".join(f"{marks[i % len(marks)]} {k}" for i, k in enumerate(ys))
    lines.append(pad + f" {legend}")
    return "\n".join(lines) + "\n"


def render_report(run_dir: Path) -> str:
    manifest = bio.load_manifest(run_dir)
    cmds = manifest.get("commands", {})
    chk = cmds.get("check", {}).get("summary")
    sim = cmds.get("simulate", {}).get("summary")
    crit = chk or (sim or {}).get("criterion")
    out = [f"# Blow-up report: {run_dir}", ""]
    out.append(f"scenario sha256: {manifest.get('scenario_hash')}  seed: {manifest.get('seed')}  "
               f"version: {manifest.get('version')}")
    out.append("")
    t_star = None
    if crit:
        t_star = crit.get("t_star")
        out += ["## Criterion", ""]
        out.append(f"- system: {crit['system']}")
        out.append(f"- theorem: {crit['theorem']} [{crit['branch']}]")
        out.append(f"- gate: {str(crit['gate']).lower()} (margin {_fmt(crit['margin'])})")
        if t_star is not None:
            lo, hi = crit["bracket"]
            out.append(f"- T*: {_fmt(t_star)} (bracket [{_fmt(lo)}, {_fmt(hi)}])")
        else:
            out.append("- T*: not available")
        for note in crit.get("notes", []):
            out.append(f"- note: {note}")
        out.append("")
    if sim:
        v = sim["verdict"]
        out += ["## Simulation", ""]
        out.append(f"- verdict: {v['kind']}")
        out.append(f"- T_detect: {_fmt(v['t_detect']) if v['t_detect'] is not None else 'none'}"
                   + (f" (trigger {v['trigger']})" if v.get("trigger") else ""))
        if v.get("reason"):
            out.append(f"- reason: {v['reason']}")
        out.append(f"- steps: {sim['steps']}, dx = {_fmt(sim['dx'])}, "
                   f"dt in [{_fmt(sim['dt_min'])}, {_fmt(sim['dt_max'])}]")
        if v["t_detect"] is not None and t_star is not None:
            ok = v["t_detect"] <= t_star
            out.append(f"- T_detect <= T*: {'PASS' if ok else 'FAIL (flag for investigation)'}")
        elif v["t_detect"] is not None:
            out.append("- T_detect <= T*: n/a (no T*)")
        out += ["", "### Identity residual maxima", "",
                "| identity | max residual | tolerance | status |", "|---|---|---|---|"]
        for name, c in sim["identities"].items():
            status = "n/a" if not c["applicable"] else ("ok" if c["ok"] else "VIOLATED")
            out.append(f"| {name} | {_fmt(c['max_residual'])} | {_fmt(c['tolerance'])} | {status} |")
        out.append("")
        env_path = run_dir / ENVELOPE_CSV
        if env_path.is_file():
            cols = bio.read_csv_columns(env_path)
            t = cols["t"]
            if v["t_detect"] is not None:
                keep = t <= v["t_detect"]
                cols = {k: a[keep] for k, a in cols.items()}
                t = cols["t"]
            ratio = cols["J"] / cols["J_envelope"]
            out += ["### Envelope containment", ""]
            out.append(f"- max J / envelope: {_fmt(float(np.max(ratio, initial=0.0)))}")
            gap = cols["E_i_lower"] - cols["E_i"]
            out.append(f"- max (E_i lower bound - E_i): {_fmt(float(np.max(gap, initial=-np.inf)))}")
            out.append(f"- plot data: {ENVELOPE_CSV}")
            out += ["", "```",
                    ascii_plot(t, {"J": cols["J"], "envelope": cols["J_envelope"]}).rstrip(),
                    "```", ""]
    return "\n".join(out) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, str):
        return v
    return f"{v:.6g}"


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _sweep_job(job):
    command, path, overrides, seed, out_dir = job
    lines = []
    try:
        sc = load_scenario(path, overrides, seed)
        code = (run_check if command == "check" else run_simulate)(sc, Path(out_dir), lines.append)
    except BlowupLabError as exc:
        lines.append(f"error: {exc}")
        code = EXIT_ERROR
    return code, lines


def _sweep_jobs(args) -> list:
    root = Path(args.out or os.environ.get("BLOWUPLAB_OUT") or "runs") / "sweep"
    values = []
    if args.vary:
        key, _, raw = args.vary.partition("=")
        if not key or not raw:
            raise InvalidParams("--vary expects key=v1,v2,...")
        values = [(key, v) for v in raw.split(",")]
    jobs = []
    for path in args.scenario:
        stem = Path(path).stem
        for key, v in values or [(None, None)]:
            ov = list(args.override or [])
            name = stem
            if key is not None:
                ov.append(f"{key}={v}")
                name = f"{stem}__{key.rsplit('.', 1)[-1]}={v}"
            jobs.append((name, (args.job, path, ov, args.seed, str(root / name))))
    names = [n for n, _ in jobs]
    if len(set(names)) != len(names):
        raise InvalidParams("sweep jobs must have distinct scenario names")
    return root, jobs


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _nonneg(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="PATH", help="scenario YAML file")
    common.add_argument("--out", metavar="DIR", help="output directory (default $BLOWUPLAB_OUT)")
    common.add_argument("--seed", type=int, help="override initial_data.seed")
    common.add_argument("--override", action="append", metavar="KEY=VALUE", default=[],
                        help="override a scenario entry by dotted key (repeatable)")

    ap = argparse.ArgumentParser(prog="blowuplab",
                                 description="Blow-up criteria, Gronwall bounds and 1-D simulations.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="evaluate the blow-up criterion")
    sub.add_parser("simulate", parents=[common], help="run the 1-D solver and identity checks")

    g = sub.add_parser("gronwall", parents=[common], help="closed-form bound vs ODE oracle (CSV)")
    g.add_argument("--a", type=_positive, required=True)
    g.add_argument("--b", type=_nonneg, required=True)
    g.add_argument("--beta", type=float, required=True)
    g.add_argument("--f0", type=_nonneg, required=True)
    g.add_argument("--t-end", type=_positive, default=10.0)
    g.add_argument("--points", type=int, default=25)
    g.add_argument("--dt", type=_positive, default=1e-3, help="oracle step")

    r = sub.add_parser("report", parents=[common], help="summarise a run directory")
    r.add_argument("run_dir", nargs="?", help="run directory (default --out)")

    s = sub.add_parser("sweep", help="run several scenarios with isolated output directories")
    s.add_argument("--scenario", action="append", required=True, metavar="PATH")
    s.add_argument("--out", metavar="DIR")
    s.add_argument("--seed", type=int)
    s.add_argument("--override", action="append", metavar="KEY=VALUE", default=[])
    s.add_argument("--vary", metavar="KEY=V1,V2,...", help="one job per value of a dotted key")
    s.add_argument("--command", dest="job", choices=("check", "simulate"), default="check")
    s.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "gronwall":
            return _main_gronwall(ap, args)
        if args.command == "report":
            run_dir = Path(args.run_dir or args.out or os.environ.get("BLOWUPLAB_OUT") or ".")
            text = render_report(run_dir)
            bio.atomic_write_text(run_dir / REPORT_MD, text)
            print(text, end="")
            return EXIT_OK
        if args.command == "sweep":
            return _main_sweep(args)
        if not args.scenario:
            ap.error(f"{args.command} requires --scenario")
        sc = load_scenario(args.scenario, args.override, args.seed)
        out = resolve_out(sc, args.out)
        if args.command == "check":
            return run_check(sc, out)
        return run_simulate(sc, out)
    except MissingManifest as exc:
        _err(str(exc))
        return EXIT_ERROR
    except BlowupLabError as exc:
        _err(str(exc))
        return EXIT_ERROR


def _main_gronwall(ap, args) -> int:
    if args.points < 2:
        ap.error("--points must be at least 2")
    try:
        t, bound, oracle = gronwall_table(args.a, args.b, args.beta, args.f0, args.t_end,
                                          args.points, args.dt)
    except InvalidParams as exc:
        ap.error(str(exc))
    text = bio.csv_text(["t", "bound", "oracle"], zip(t, bound, oracle))
    if args.out:
        path = Path(args.out)
        if path.suffix.lower() != ".csv":
            path = path / "gronwall.csv"
        bio.atomic_write_text(path, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _main_sweep(args) -> int:
    root, jobs = _sweep_jobs(args)
    payload = [job for _, job in jobs]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_job, payload))
    else:
        results = [_sweep_job(job) for job in payload]
    rows = []
    for (name, job), (code, lines) in zip(jobs, results):
        for line in lines:
            print(f"[{name}] {line}")
        rows.append(_sweep_row(name, job[0], code, Path(job[4])))
    header = ["name", "command", "exit_code", "gate", "margin", "t_star", "verdict", "t_detect"]
    bio.write_csv(root / "sweep.csv", header, rows)
    print(f"sweep summary: {root / 'sweep.csv'}")
    return EXIT_ERROR if any(code == EXIT_ERROR for code, _ in results) else EXIT_OK


def _sweep_row(name, command, code, out_dir: Path):
    row = [name, command, code, "", "", "", "", ""]
    try:
        m = bio.load_manifest(out_dir)
    except BlowupLabError:
        return row
    s = m["commands"].get(command, {}).get("summary", {})
    crit = s if command == "check" else (s.get("criterion") or {})
    if crit:
        row[3] = str(crit["gate"]).lower()
        row[4] = crit["margin"]
        row[5] = "" if crit["t_star"] is None else crit["t_star"]
    if command == "simulate":
        row[6] = s["verdict"]["kind"]
        row[7] = "" if s["verdict"]["t_detect"] is None else s["verdict"]["t_detect"]
    return row


if __name__ == "__main__":
    sys.exit(main())
