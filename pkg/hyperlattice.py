#!/usr/bin/env python3
"""
hyperlattice.py

Command line front end.

Usage:
    python hyperlattice.py admissibility --alpha 2 --n 0
    python hyperlattice.py verdict --group modular --alpha 1
    python hyperlattice.py identity-suite --format json
    python hyperlattice.py tile --points=2j,-0.5+2j --svg tiles.svg
    python hyperlattice.py finite-demo --N 8 --K 4
    python hyperlattice.py covolume --group hecke --q 5
    python hyperlattice.py periodization --word-length 8 --cusp-height 10
    python hyperlattice.py sweep --groups modular,hecke:4 --alphas 1,2 --format xlsx --out sweep.xlsx

Every command accepts --config FILE (key = value lines); the file named by
HYPERLATTICE_CONFIG is read first. Exit codes: 0 success, 1 identity check
failure, 2 domain error, 3 numeric error.
"""

import argparse
import logging
import math
import sys
from dataclasses import replace

import numpy as np
import pandas as pd

from density import PERIOD_HAAR_SPEC, density_verdict, periodization_check, verdict_sweep
from errors import DomainError, HyperlatticeError, IdentityCheckFailure, NumericError
from frame_core import density_analog_experiment, selection_for_size
from fuchsian import (boundary_gap, covolume, enumerate_ball, format_word, group_from_name,
                      reduce_to_domain, tile_histogram, BOUNDARY_TOL, DEFAULT_RULE)
from hardy import DEFAULT_FREQ_SPEC, Wavelet, formal_dimension
from halfplane import rotation
from report_export import Report, ReportExporter
from run_config import COMMANDS, FORMATS, load_config
from tiling_svg import write_tiling
from wavelet import (ORTHO_HAAR_SPEC, SpanFunction, TransformFunction, calderon_constant,
                     coherent_state, intertwine_residual, ortho_relation_check, range_residual,
                     rep_apply, stationarity_report, wavelet_of_span, wspace_inner)

logger = logging.getLogger("hyperlattice")

# ─── CONFIG ────────────────────────────────────────────────────────────────────
SUITE_TOLERANCES = {
    "intertwining":  1e-8,
    "stationarity":  1e-6,
    "calderon":      1e-3,
    "orthogonality": 1e-2,
    "range":         1e-2,
    "periodization": 5e-2,
}
# negative controls must stay on the far side of these bounds
CONTROL_BOUNDS = {
    "stationarity":  0.1,
    "orthogonality": 0.5,
    "range":         0.1,
}
ROTATION_ANGLE   = 0.4
RANGE_ANGLE      = 0.5
INTERTWINE_MOVE  = (2.0, -1.0)
SPAN_ATOMS       = 3
TILE_SAMPLES     = 1000
TILE_BOX         = (-2.0, 2.0, 0.05, 3.0)


# ─── HELPERS ───────────────────────────────────────────────────────────────────
def _haar_spec(cfg, base):
    changes = {k: v for k, v in (("n_a", cfg.nodes_a), ("n_b", cfg.nodes_b),
                                 ("n_theta", cfg.nodes_theta)) if v is not None}
    return replace(base, **changes)


def _freq_spec(cfg):
    return DEFAULT_FREQ_SPEC if cfg.nodes_freq is None else replace(DEFAULT_FREQ_SPEC, nodes=cfg.nodes_freq)


def _group(cfg):
    return group_from_name(cfg.group, cfg.q)


def _box_indicator():
    def rule(z):
        inside = (np.abs(z.real) <= 1.0) & (z.imag >= 0.5) & (z.imag <= 2.0)
        return inside.astype(complex)
    return TransformFunction(rule, "box", center=1j)


# ─── COMMANDS ──────────────────────────────────────────────────────────────────
def cmd_admissibility(cfg):
    fd = formal_dimension(Wavelet(cfg.n, cfg.alpha), _freq_spec(cfg))
    ratio = fd.admissibility / fd.norm_sq
    return Report("admissibility", {
        "alpha": cfg.alpha, "n": cfg.n,
        "admissibility_constant": fd.admissibility,
        "norm_sq": fd.norm_sq,
        "ratio": ratio,
        "two_over_alpha": 2.0 / cfg.alpha,
        "ratio_residual": abs(ratio - 2.0 / cfg.alpha),
        "formal_dimension": fd.quadrature,
        "formal_dimension_closed_form": fd.closed_form,
    })


def cmd_verdict(cfg):
    target = cfg.covolume if cfg.covolume is not None else _group(cfg)
    verdict = density_verdict(target, cfg.alpha, cfg.n, cfg.cusp_height)
    return Report("verdict", verdict.as_dict())


def _suite_row(name, compute, tolerance):
    """Run one identity check; compute() returns (residual, control or None, note)."""
    bound = CONTROL_BOUNDS.get(name)
    try:
        residual, control, note = compute()
    except NumericError as exc:
        logger.warning("identity check %s failed numerically: %s", name, exc)
        return {"check": name, "residual": math.nan, "tolerance": tolerance, "control": math.nan,
                "control_bound": bound, "passed": False, "note": f"{type(exc).__name__}: {exc}"}
    passed = residual < tolerance
    if bound is not None:
        passed = passed and (control >= bound if name == "orthogonality" else control > bound)
    return {"check": name, "residual": residual, "tolerance": tolerance, "control": control,
            "control_bound": bound, "passed": bool(passed), "note": note}


def cmd_identity_suite(cfg):
    psi = Wavelet(cfg.n, cfg.alpha)
    mismatched = Wavelet(cfg.n, cfg.alpha + 1.0)
    rng = np.random.default_rng(cfg.seed)
    f = SpanFunction.random(psi, SPAN_ATOMS, rng)
    base = coherent_state(psi, 1j)

    def intertwining():
        return intertwine_residual(f, psi, *INTERTWINE_MOVE), None, "W(rho f) vs tau(m_ab) W f"

    def stationarity():
        window = mismatched if cfg.corrupt_window else None
        rep = stationarity_report(cfg.n, cfg.alpha, ROTATION_ANGLE, window=window)
        control = stationarity_report(cfg.n, cfg.alpha, ROTATION_ANGLE, window=mismatched)
        note = f"phase {rep.phase:.6f}" + (" (corrupted window)" if cfg.corrupt_window else "")
        return max(rep.dispersion, rep.modulus_residual), control.dispersion, note

    def calderon():
        lhs = wspace_inner(wavelet_of_span(f, psi), wavelet_of_span(f, psi)).real
        rhs = calderon_constant(psi) * f.norm_sq()
        return abs(lhs - rhs) / abs(rhs), None, f"<Wf, Wf> = {lhs:.8g}"

    def orthogonality():
        single = SpanFunction.of(psi, [(1.0, 1.0, 0.0)], label="psi")
        chk = ortho_relation_check(single, single, single, single, psi,
                                   _haar_spec(cfg, ORTHO_HAAR_SPEC))
        doubled = abs(chk.lhs - chk.rhs / 2.0) / abs(chk.rhs / 2.0)
        return chk.relerr, doubled, f"lhs {abs(chk.lhs):.8g} rhs {abs(chk.rhs):.8g}"

    def range_check():
        turned = rep_apply(rotation(RANGE_ANGLE), cfg.n, cfg.alpha, base)
        return range_residual(turned, psi), range_residual(_box_indicator(), psi), "rotated W psi psi"

    def periodization():
        rep = periodization_check(base, base, _group(cfg), cfg.word_length,
                                  _haar_spec(cfg, PERIOD_HAAR_SPEC), _group(cfg).domain(cfg.cusp_height))
        return rep.relerr, None, f"L={rep.word_length} Y={rep.cusp_height:g} ball={rep.ball_size}"

    checks = [("intertwining", intertwining), ("stationarity", stationarity),
              ("calderon", calderon), ("orthogonality", orthogonality),
              ("range", range_check), ("periodization", periodization)]
    rows = []
    for k, (name, compute) in enumerate(checks, 1):
        logger.info("Processing identity check %d/%d: %s", k, len(checks), name)
        tol = SUITE_TOLERANCES[name] if cfg.tolerance is None else cfg.tolerance
        rows.append(_suite_row(name, compute, tol))
    table = pd.DataFrame(rows, columns=["check", "residual", "tolerance", "control",
                                        "control_bound", "passed", "note"])
    passed = int(table["passed"].sum())
    report = Report("identity-suite", {"alpha": cfg.alpha, "n": cfg.n, "passed": passed,
                                       "check_count": len(rows)}, {"checks": table})
    report.failed = passed < len(rows)
    return report


def _tile_points(cfg):
    if cfg.points:
        return list(cfg.points)
    rng = np.random.default_rng(cfg.seed)
    count = cfg.samples or TILE_SAMPLES
    x0, x1, y0, y1 = TILE_BOX
    x = rng.uniform(x0, x1, count)
    y = np.exp(rng.uniform(math.log(y0), math.log(y1), count))
    return list(x + 1j * y)


def cmd_tile(cfg):
    group = _group(cfg)
    domain = group.domain(cfg.cusp_height)
    points = _tile_points(cfg)
    rows = []
    for z in points:
        gamma, z0, word = reduce_to_domain(z, group)
        rows.append({"x": z.real, "y": z.imag, "word": format_word(word), "x0": z0.x, "y0": z0.y,
                     "flagged": boundary_gap(z0, domain) < BOUNDARY_TOL})
    ball = enumerate_ball(group, cfg.word_length)
    hist = tile_histogram(points, group, ball)
    values = {"group": group.name, "point_count": len(points), "tile_count": len(hist.counts),
              "assigned": hist.total, "flagged": len(hist.flagged), "outside_ball": hist.outside_ball}
    if cfg.svg:
        values["svg"] = write_tiling(cfg.svg, ball, domain)
    return Report("tile", values, {"assignments": pd.DataFrame(rows), "tiles": hist.to_frame()})


def cmd_finite_demo(cfg):
    selection = cfg.selection or (selection_for_size(cfg.N, cfg.K) if cfg.K else "full")
    report = density_analog_experiment(cfg.N, selection, seed=cfg.seed)
    return Report("finite-demo", report.as_dict())


def cmd_covolume(cfg):
    group = _group(cfg)
    rule = DEFAULT_RULE if cfg.panel_nodes is None else replace(DEFAULT_RULE, nodes=cfg.panel_nodes)
    vol = covolume(group.domain(cfg.cusp_height), rule)
    closed = math.pi * (1.0 - 2.0 / group.q)
    return Report("covolume", {"group": group.name, "cusp_height": cfg.cusp_height,
                               "covolume": vol, "closed_form": closed,
                               "residual": abs(vol - closed)})


def cmd_periodization(cfg):
    psi = Wavelet(cfg.n, cfg.alpha)
    W = coherent_state(psi, 1j)
    group = _group(cfg)
    report = periodization_check(W, W, group, cfg.word_length, _haar_spec(cfg, PERIOD_HAAR_SPEC),
                                 group.domain(cfg.cusp_height))
    values = report.as_dict()
    values["target"] = abs(wspace_inner(W, W)) ** 2 / (cfg.alpha / 2.0)
    return Report("periodization", values)


def cmd_sweep(cfg):
    targets = [group_from_name(g) for g in cfg.groups]
    table, summary = verdict_sweep(targets, cfg.alphas, cfg.n, cfg.cusp_height)
    return Report("sweep", {"n": cfg.n, "groups": list(cfg.groups), "alphas": list(cfg.alphas)},
                  {"verdicts": table, "group_summary": summary})


DISPATCH = {
    "admissibility": cmd_admissibility,
    "verdict": cmd_verdict,
    "identity-suite": cmd_identity_suite,
    "tile": cmd_tile,
    "finite-demo": cmd_finite_demo,
    "covolume": cmd_covolume,
    "periodization": cmd_periodization,
    "sweep": cmd_sweep,
}


# ─── ENTRY POINT ───────────────────────────────────────────────────────────────
def build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", default=None, help="key = value config file")
    common.add_argument("--alpha", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--group", help="modular, hecke or hecke:q")
    common.add_argument("--q", type=int)
    common.add_argument("--covolume", type=float)
    common.add_argument("--word-length", dest="word_length", type=int)
    common.add_argument("--cusp-height", dest="cusp_height", type=float)
    common.add_argument("--nodes-a", dest="nodes_a", type=int)
    common.add_argument("--nodes-b", dest="nodes_b", type=int)
    common.add_argument("--nodes-theta", dest="nodes_theta", type=int)
    common.add_argument("--nodes-freq", dest="nodes_freq", type=int)
    common.add_argument("--panel-nodes", dest="panel_nodes", type=int,
                        help="Gauss nodes per panel for covolume")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--canonical", action="store_true", help="sorted keys, no whitespace")
    common.add_argument("--verbose", "-v", action="store_true")
    common.add_argument("--points", help="comma separated complex numbers, e.g. --points=2j,-0.5+2j")
    common.add_argument("--samples", type=int)
    common.add_argument("--svg")
    common.add_argument("--N", type=int)
    common.add_argument("--K", type=int)
    common.add_argument("--selection", help="full, translations, modulations, trivial or lattice:p,q")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--corrupt-window", dest="corrupt_window", action="store_true")
    common.add_argument("--alphas", help="comma separated alphas for sweep")
    common.add_argument("--groups", help="comma separated groups for sweep")

    parser = argparse.ArgumentParser(prog="hyperlattice",
                                     description="Density checks for lattice orbits of PSL(2,R) wavelet representations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None, environ=None):
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("config", None)
    try:
        cfg = load_config(args, config_path, environ).validate()
        logging.basicConfig(level=logging.INFO if cfg.verbose else logging.WARNING,
                            stream=sys.stderr,
                            format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        report = DISPATCH[cfg.command](cfg)
        exporter = ReportExporter(report)
        if cfg.format == "xlsx":
            exporter.export_to_excel(cfg.out)
        else:
            text = exporter.render(cfg.format, cfg.canonical)
            if cfg.out:
                with open(cfg.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
    except HyperlatticeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DomainError.exit_code
    except (ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        # numpy / scipy failures that escaped the typed checks
        logger.debug("unhandled numeric failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return NumericError.exit_code
    if report.failed:
        print("error: identity checks failed", file=sys.stderr)
        return IdentityCheckFailure.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
