"""Command line entry point: ``hirota <command> [options]``.

Exit status is 0 iff every asserted check passes.  ``HIROTA_THREADS`` sets the
number of worker threads for z-parallel scattering sweeps and FFTs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import darboux as dbx
from . import harness as hx
from . import scattering as sc
from ._kernels import BACKEND
from .config import load_config
from .pde import EvolutionConfig, SnapshotWriter, run
from .potential import Potential
from .soliton import SolitonParams, soliton_value


def _pair(s: str) -> complex:
    re, im = (float(v) for v in s.split(","))
    return complex(re, im)


def _write_table(out: Path, name: str, header, rows, fmt: str):
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in r])
    else:
        with open(out / f"{name}.json", "w") as fh:
            json.dump({"header": list(header), "rows": [list(map(_jsonable, r)) for r in rows]}, fh)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _write_json(out: Path, name: str, obj):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w") as fh:
        json.dump(obj, fh, indent=1, default=_jsonable)


def _finish(reports, out: Path, fmt: str) -> int:
    ok = True
    for rep in reports:
        for line in rep.summary_lines():
            print(line)
        tag = rep.kind.replace("[", "_").replace("]", "").replace(",", "_")
        for name, (header, rows) in rep.tables.items():
            _write_table(out, f"{tag}_{name}", header, rows, fmt)
        _write_json(out, f"{tag}_report.json", rep.to_dict())
        ok &= rep.passed
    print("OK" if ok else "FAILED")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument plumbing


def _soliton_from_args(args, cfg) -> SolitonParams:
    s, e = cfg["soliton"], cfg["equation"]
    pick = lambda v, d: d if v is None else v
    return SolitonParams(pick(args.eta, s["eta"]), pick(args.xi, s["xi"]), pick(args.gamma, s["gamma"]),
                         e["alpha"], e["beta"], pick(args.x_off, s["x_off"]))


def _initial_function(args, cfg):
    """Initial data from --potential, --sech or the soliton flags (in that order)."""
    if getattr(args, "potential", None):
        with open(args.potential) as fh:
            q = Potential.from_dict(json.load(fh), tail_policy="ignore")
        return lambda x: np.interp(x, q.x, q.samples.real, 0, 0) + 1j * np.interp(x, q.x, q.samples.imag, 0, 0), q
    if getattr(args, "sech", None) is not None:
        return hx.sech_initial(args.sech), None
    p = _soliton_from_args(args, cfg)
    return (lambda x: soliton_value(p, x, 0.0)), None


def _config(args):
    cfg = load_config(args.config)
    eq = cfg["equation"]
    if getattr(args, "alpha", None) is not None:
        eq["alpha"] = args.alpha
    if getattr(args, "beta", None) is not None:
        eq["beta"] = args.beta
    return cfg


def _add_common(p):
    p.add_argument("--config", help="TOML file merged over the built-in defaults")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_source(p):
    p.add_argument("--potential", help="potential JSON file")
    p.add_argument("--sech", type=float, help="use q0 = A sech(x)")
    for name in ("eta", "xi", "gamma", "alpha", "beta"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--x-off", dest="x_off", type=float)


# ---------------------------------------------------------------------------
# commands


def cmd_scatter(args):
    cfg = _config(args)
    out = Path(args.out)
    f, q = _initial_function(args, cfg)
    q = q or hx.scatter_potential(f, cfg)
    zg = hx.zgrid(cfg)
    s = cfg["scatter"]
    s11, s12, s21, s22 = sc.scattering_coefficients(q, zg)
    unit = float(np.max(np.abs(np.abs(s11) ** 2 + np.abs(s21) ** 2 - 1)))
    d = sc.reflection_coefficient(q, zg, cfg["equation"]["alpha"], cfg["equation"]["beta"], s["s11_min"])
    bs = sc.find_bound_states(q, hx.search_box(q, cfg))
    d = sc.ScatteringData(d.zgrid, d.r, tuple(bs), d.alpha, d.beta)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        d.write_csv(out / "reflection.csv")
        with open(out / "bound_states.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re_z", "im_z", "re_c", "im_c"])
            for z, c in bs:
                w.writerow([z.real, z.imag, c.real, c.imag])
    _write_json(out, "scattering_data.json", d.to_dict())
    rep = hx.Report("scatter")
    tol = s["unitarity_tol"]
    rep.check("unitarity", unit, unit <= tol, f"max ||s11|^2 + |s21|^2 - 1| <= {tol}")
    rep.info.update(n_bound_states=len(bs), sup_r=d.sup_norm(), backend=BACKEND)
    return _finish([rep], out, args.format)


def cmd_evolve(args):
    cfg = _config(args)
    out = Path(args.out)
    f, _ = _initial_function(args, cfg)
    p = cfg["pde"]
    t_max = p["t_max"] if args.t_max is None else args.t_max
    dt = p["dt"] if args.dt is None else args.dt
    times = np.linspace(0, t_max, int(p["n_snapshots"]))
    ec = EvolutionConfig(p["domain_half_width"], int(p["n_modes"]), dt, t_max, cfg["equation"]["alpha"],
                         cfg["equation"]["beta"], snapshot_times=tuple(sorted(times)), scheme=p["scheme"],
                         cfl=p["cfl"])
    with SnapshotWriter(out / "snapshots") as sink:
        res = run(ec.initial(f), ec, sink=sink)
    rep = hx.Report("evolve")
    rep.check("mass_drift", res.mass_drift, res.mass_drift <= p["mass_tol"], f"relative <= {p['mass_tol']}")
    rep.info.update(momentum_drift=res.momentum_drift, steps=res.steps, config=ec.to_dict())
    rep.add_table("index", ["t", "mass", "sup_norm"], res.table)
    return _finish([rep], out, args.format)


def cmd_darboux(args):
    cfg = _config(args)
    out = Path(args.out)
    s = cfg["scatter"]
    if args.seed == "zero":
        q = Potential.from_function(np.zeros_like, -s["x_half_width"], s["x_half_width"], int(s["n_x"]))
    else:
        with open(args.seed) as fh:
            q = Potential.from_dict(json.load(fh), tail_policy="ignore")
    pair = dbx.DressingPair(_pair(args.zs), _pair(args.c1))
    e = cfg["equation"]
    kw = dict(t=args.t, alpha=e["alpha"], beta=e["beta"], convention=s["convention"])
    det = dbx.dressing_determinant(q, pair, **kw)
    qn = dbx.add_bound_state(q, pair, **kw)
    rep = hx.Report("darboux")
    floor = cfg["darboux"]["positivity_floor"]
    rep.check("det_positive", float(det.min()), bool(np.all(det > floor)), f"> {floor} at every x")
    rep.check("finite", float(np.max(np.abs(qn.samples))), bool(np.all(np.isfinite(qn.samples))), "finite samples")
    _write_json(out, "potential.json", qn.to_dict())
    if args.format == "csv":
        _write_table(out, "potential", ["x", "re_q", "im_q"],
                     [(float(x), float(v.real), float(v.imag)) for x, v in zip(qn.x, qn.samples)], "csv")
    return _finish([rep], out, args.format)


def cmd_asymptotics(args):
    cfg = _config(args)
    out = Path(args.out)
    a = cfg["asymptotics"]
    e = cfg["equation"]
    t = a["t"] if args.t is None else args.t
    if args.scattering:
        with open(args.scattering) as fh:
            d = sc.ScatteringData.from_dict(json.load(fh))
    else:
        f, q = _initial_function(args, cfg)
        q = q or hx.scatter_potential(f, cfg)
        d = sc.scattering_data(q, hx.zgrid(cfg), e["alpha"], e["beta"], box=hx.search_box(q, cfg))
    xs = np.linspace(a["xt_min"], a["xt_max"], int(a["n_points"])) * t
    rep = hx.Report("asymptotics")
    if not d.bound_states:
        rows = []
        for x in xs:
            try:
                v = asy.dispersive_leading_term(d, float(x), t)
            except asy.DomainError:
                continue
            rows.append((float(x), t, abs(v), float(np.angle(v))))
        kind = "dispersive"
    else:
        p = hx.soliton_from_data(*d.bound_states[0], d.alpha, d.beta)
        v = asy.asymptotic_soliton(p, d, xs, t, "plus" if t >= 0 else "minus", cfg["shift"]["formula"])
        rows = [(float(x), t, abs(w), float(np.angle(w))) for x, w in zip(xs, v)]
        kind = "soliton"
    finite = all(np.isfinite(r[2]) for r in rows)
    rep.check("finite_prediction", len(rows), finite and len(rows) > 0, "non-empty and finite")
    rep.info.update(kind=kind)
    rep.add_table("profile", ["x", "t", "abs_q_pred", "arg_q_pred"], rows)
    return _finish([rep], out, args.format)


def cmd_radiation(args):
    cfg = _config(args)
    amp = cfg["radiation"]["amplitude"] if args.sech is None else args.sech
    rep = hx.run_radiation_experiment(hx.sech_initial(amp), cfg)
    return _finish([rep], Path(args.out), args.format)


def cmd_stability(args):
    cfg = _config(args)
    p0 = _soliton_from_args(args, cfg)
    st = cfg["stability"]
    shapes = args.shapes.split(",") if args.shapes else st["shapes"]
    reps = [hx.run_stability_experiment(p0, s, cfg) for s in shapes]
    if st["time_reversed"]:
        reps.append(hx.run_stability_experiment(p0, shapes[0], cfg, time_sign=-1.0))
    if cfg["shift"]["enabled"]:
        for side in ("plus", "minus"):
            reps.append(hx.run_shift_experiment(p0, cfg, side, cfg["shift"]["formula"]))
    return _finish(reps, Path(args.out), args.format)


def cmd_roundtrip(args):
    cfg = _config(args)
    rt = cfg["roundtrip"]
    reps = []
    amp = rt["amplitude"] if args.sech is None else args.sech
    reps.append(hx.run_roundtrip_experiment(hx.sech_initial(amp), cfg))
    if rt["perturbed_epsilon"] > 0:
        p0 = hx.soliton_params(cfg)
        u = hx.perturbation("gauss", cfg, rt["perturbed_epsilon"])
        r2 = hx.run_roundtrip_experiment(lambda x: soliton_value(p0, x, 0.0) + u(x), cfg)
        r2.kind = "roundtrip[perturbed_soliton]"
        reps.append(r2)
    return _finish(reps, Path(args.out), args.format)


def build_parser():
    ap = argparse.ArgumentParser(prog="hirota", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", help="reflection coefficient and bound states of a potential")
    _add_common(p)
    _add_source(p)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("evolve", help="split-step PDE run with snapshot directory")
    _add_common(p)
    _add_source(p)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--dt", type=float)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("darboux", help="add a bound state to a seed potential")
    _add_common(p)
    p.add_argument("--seed", required=True, help="potential JSON file or 'zero'")
    p.add_argument("--zs", required=True, help="bound state as re,im")
    p.add_argument("--c1", required=True, help="norming constant as re,im")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.set_defaults(func=cmd_darboux)

    p = sub.add_parser("asymptotics", help="leading-order long-time profile along x = (x/t) t")
    _add_common(p)
    _add_source(p)
    p.add_argument("--scattering", help="scattering data JSON file")
    p.add_argument("--t", type=float)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("radiation", help="dispersive decay experiment")
    _add_common(p)
    p.add_argument("--sech", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.set_defaults(func=cmd_radiation)

    p = sub.add_parser("stability", help="perturbed soliton experiment")
    _add_common(p)
    _add_source(p)
    p.add_argument("--shapes", help="comma-separated perturbation shapes")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("roundtrip", help="isospectral round trip through the PDE")
    _add_common(p)
    p.add_argument("--sech", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.set_defaults(func=cmd_roundtrip)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as e:  # report, nonzero exit
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
