"""Command line front end.

Every subcommand reads a surface file (or a bundled fixture name), does its
work and prints ``key = value`` lines grouped under ``[section]`` headers.
Exit status is 0 on success, 1 when a check fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import List, Optional, Sequence, TextIO

import numpy as np

from .grassmann import GrassmannError, to_text
from .ptolemy import UnsupportedFlipError, double_flip, flip
from .superalgebra import project_sl2
from .surface import (CoordinateVector, Orientation, SurfaceComplex, SurfaceError, default_orientation,
                      dimension_audit, dump_surface, gauge_factors, load_surface, normalize_ratios,
                      orientation_class_count, puncture_loops, random_coordinates, torus_f11)
from .teichmueller import (DEFAULT_DEPTH, LiftError, build_lift, check_spin_consistency, f11_generators, holonomy,
                           lift_report, trace_body)
from .verification import SUITES, injected_bug, run_suite

FIXTURES = ("f11", "f03")
DEFAULT_TOL = 1e-9


class InputError(Exception):
    pass


@dataclass
class Session:
    surface: SurfaceComplex
    coords: CoordinateVector
    omega_sigma: Orientation
    omega_iota: Orientation
    log: List[str] = field(default_factory=list)

    def dump(self) -> str:
        return dump_surface(self.surface, self.coords, {"sigma": self.omega_sigma, "iota": self.omega_iota})


def fixture_text(name: str) -> str:
    return resources.files("artifact").joinpath("data", f"{name}.surface").read_text()


def session_from_text(text: str, seed: int = 0) -> Session:
    S, c, om = load_surface(text)
    if c is None:
        c = random_coordinates(S, np.random.default_rng(seed))
    os_ = om.get("sigma", default_orientation(S))
    oi = om.get("iota", os_)
    return Session(S, c, os_, oi)


def cmd_load(source: str, seed: int = 0) -> Session:
    if source in FIXTURES:
        return session_from_text(fixture_text(source), seed)
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror}") from None
    return session_from_text(text, seed)


# session operations ---------------------------------------------------------

def cmd_flip(s: Session, edges: Sequence[int], out: TextIO, tol: float = DEFAULT_TOL) -> Session:
    """Flip the edges in order, printing one block per flip.

    When an edge is flipped twice in a row the pair is also checked against
    the starting configuration.
    """
    history = [s]
    for n, e in enumerate(edges):
        cur = history[-1]
        if not 0 <= e < cur.surface.nedges:
            raise InputError(f"no edge {e}; the surface has {cur.surface.nedges}")
        q_lam = _quad_lengths(cur, e)
        r = flip(cur.surface, cur.coords, e, cur.omega_sigma, cur.omega_iota)
        print(f"[flip {n + 1}]", file=out)
        print(f"edge = {e}", file=out)
        for line in r.report().splitlines():
            print(line if "=" in line else f"case = {line[5:]}", file=out)
        a, b, c, d, ee = q_lam
        print(f"f_bosonic = {((a * c + b * d).body() / ee.body()):.15g}", file=out)
        nxt = Session(r.surface, r.coords, r.omega_sigma, r.omega_iota, cur.log + [f"flip {e}"])
        if n > 0 and edges[n - 1] == e:
            prev = history[-2]
            rep = double_flip(prev.surface, prev.coords, e, prev.omega_sigma, prev.omega_iota, tol)
            refl = [t for t, sg in enumerate(rep.signs or []) if sg == -1]
            print(f"closure = {'ok' if rep.ok else 'FAILED'}", file=out)
            print(f"closure_reflections = {' '.join(map(str, refl)) or 'none'}", file=out)
            if not rep.ok:
                raise ClosureFailure(f"flipping edge {e} twice did not close up")
        history.append(nxt)
    return history[-1]


class ClosureFailure(Exception):
    pass


def _quad_lengths(s: Session, e: int):
    from .ptolemy import quad_labels
    q = quad_labels(s.surface, e, s.omega_sigma)
    return tuple(s.coords.lam_side(s.surface, q.sides[x]) for x in ("a", "b", "c", "d", "e"))


def cmd_normalize(s: Session, out: TextIO) -> Session:
    alphas = gauge_factors(s.surface, s.coords)
    c = normalize_ratios(s.surface, s.coords)
    print("[normalize]", file=out)
    for t, a in enumerate(alphas):
        print(f"alpha {t} = {to_text(a)}", file=out)
    for k, v in dimension_audit(s.surface).items():
        print(f"{k} = {v}", file=out)
    return replace(s, coords=c, log=s.log + ["normalize"])


def replay(s: Session, lines: Sequence[str], out: TextIO) -> Session:
    for n, ln in enumerate(lines, 1):
        toks = ln.split("#", 1)[0].split()
        if not toks:
            continue
        if toks[0] == "flip" and len(toks) >= 2:
            try:
                edges = [int(x) for x in toks[1:]]
            except ValueError:
                raise InputError(f"log line {n}: bad edge in {ln.strip()!r}") from None
            s = cmd_flip(s, edges, out)
        elif toks == ["normalize"]:
            s = cmd_normalize(s, out)
        else:
            raise InputError(f"log line {n}: cannot replay {ln.strip()!r}")
    return s


# read-only commands ---------------------------------------------------------

def summary(s: Session, out: TextIO):
    S = s.surface
    print("[surface]", file=out)
    print(f"type = {S.describe()}", file=out)
    print(f"genus = {S.genus}", file=out)
    print(f"punctures = {S.punctures}", file=out)
    print(f"generators = {s.coords.ngen}", file=out)
    print(f"orientation_sigma = {_signs(s.omega_sigma)}", file=out)
    print(f"orientation_iota = {_signs(s.omega_iota)}", file=out)
    print(f"spin_classes = {orientation_class_count(S)}", file=out)
    a = dimension_audit(S)
    print(f"dimension = {a['even']}|{a['odd']}", file=out)


def _signs(om: Orientation) -> str:
    return " ".join("+" if x == 1 else "-" for x in om)


def _is_torus_fixture(S: SurfaceComplex) -> bool:
    return S.ntri == 2 and S.edges == torus_f11().edges


def named_cycles(S: SurfaceComplex):
    out = {}
    if _is_torus_fixture(S):
        out.update(f11_generators(S))
    for i, g in enumerate(puncture_loops(S)):
        out[f"loop{i}"] = g
    return out


def parse_word(S: SurfaceComplex, word: str):
    cycles = named_cycles(S)
    if word in cycles:
        return cycles[word]
    path = []
    for tok in word.replace(",", " ").split():
        try:
            t, k = tok.split(".")
            path.append((int(t), int(k)))
        except ValueError:
            raise InputError(f"bad side {tok!r}; use T.k or one of {', '.join(cycles)}") from None
    if not path:
        raise InputError("empty path")
    return tuple(path)


def cmd_holonomy(s: Session, word: str, out: TextIO):
    gamma = parse_word(s.surface, word)
    g = holonomy(s.surface, s.coords, s.omega_sigma, s.omega_iota, gamma)
    m = project_sl2(g)
    print("[holonomy]", file=out)
    print(f"path = {' '.join(f'{t}.{k}' for t, k in gamma)}", file=out)
    print(f"psi = {g.psi}", file=out)
    print(f"trace_body = {trace_body(g):.15g}", file=out)
    print(f"sl2 = [[{m[0, 0]:.15g}, {m[0, 1]:.15g}], [{m[1, 0]:.15g}, {m[1, 1]:.15g}]]", file=out)
    for i in range(3):
        print(f"row {i} = " + " ; ".join(to_text(x) for x in g.mat.entries[i]), file=out)


def cmd_spin(s: Session, out: TextIO) -> bool:
    rep = check_spin_consistency(s.surface, s.coords, s.omega_sigma, s.omega_iota, named_cycles(s.surface))
    print("[spin]", file=out)
    for line in rep.text().splitlines():
        name, rest = line.split(": ", 1)
        print(f"{name} = {rest}", file=out)
    print(f"consistent = {'yes' if rep.ok else 'no'}", file=out)
    return rep.ok


def cmd_lift(s: Session, depth: int, base: str, out: TextIO):
    try:
        t, k = (int(x) for x in base.split("."))
    except ValueError:
        raise InputError(f"bad base frame {base!r}; use T.k") from None
    L = build_lift(s.surface, s.coords, s.omega_sigma, s.omega_iota, base=(t, k), depth=depth)
    print("[lift]", file=out)
    for key, v in lift_report(L).items():
        print(f"{key} = {v:.3e}" if isinstance(v, float) else f"{key} = {v}", file=out)
    print("[points]", file=out)
    print(L.dump(), file=out)


def cmd_verify(suite: str, out: TextIO, seed: int = 0, depth: int = DEFAULT_DEPTH, tol: Optional[float] = None,
               quick: bool = False, bug: Optional[str] = None, figure: Optional[str] = None) -> bool:
    if bug:
        with injected_bug(bug):
            results = run_suite(suite, seed=seed, depth=depth, quick=quick)
    else:
        results = run_suite(suite, seed=seed, depth=depth, quick=quick)
    if tol is not None:
        for r in results:
            r.tol = max(r.tol, tol) if r.tol > 0 else r.tol
    print(f"[verify {suite}]", file=out)
    for r in results:
        print(r.line(), file=out)
        if not r.passed:
            for ln in r.counterexample.splitlines():
                print(f"    counterexample: {ln}", file=out)
    ok = all(r.passed for r in results)
    print(f"result = {'pass' if ok else 'fail'} ({sum(r.passed for r in results)}/{len(results)})", file=out)
    if figure:
        render_figure(results, figure)
        print(f"figure = {figure}", file=out)
    return ok


def render_figure(results, path: str):
    """Bar chart of log10 of the worst error of every check against its tolerance."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    floor = -17.0
    vals = [max(np.log10(r.error), floor) if r.error > 0 else floor for r in results]
    tols = [np.log10(r.tol) if r.tol > 0 else floor for r in results]
    fig, ax = plt.subplots(figsize=(8, 0.3 * len(results) + 1.5))
    y = np.arange(len(results))
    ax.barh(y, [v - floor for v in vals], left=floor,
            color=["tab:green" if r.passed else "tab:red" for r in results])
    ax.scatter(tols, y, marker="|", color="k", s=120, label="tolerance")
    ax.set_yticks(y)
    ax.set_yticklabels([r.name for r in results], fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("log10 max error (floor at 1e-17)")
    ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# argument handling ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description="Super Teichmueller coordinates on triangulated surfaces.")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="window depth for lifts")
    p.add_argument("--tolerance", type=float, default=None, help="comparison tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for random draws")
    # the same flags are accepted after the subcommand too
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=argparse.SUPPRESS)
    common.add_argument("--tolerance", type=float, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="cmd", required=True)

    def with_surface(name, help_):
        q = sub.add_parser(name, help=help_, parents=[common])
        q.add_argument("surface", help="surface file or fixture name (f11, f03)")
        q.add_argument("--replay", metavar="LOG", help="apply a session log first")
        return q

    with_surface("load", "parse and summarise a surface")
    q = with_surface("save", "write the (replayed) session to a file")
    q.add_argument("out")
    q = with_surface("flip", "flip edges in order")
    q.add_argument("edges", nargs="+", type=int)
    q.add_argument("--out", help="write the resulting surface")
    q.add_argument("--log", help="write the session log")
    q = with_surface("lift", "lift a window of the universal cover")
    q.add_argument("--base", default="0.0", help="base frame T.k")
    q = with_surface("holonomy", "holonomy of a closed path")
    q.add_argument("word", help="named cycle (a, b, loopN) or sides T.k,T.k,...")
    with_surface("spin", "compare trace signs with the spin quadratic form")
    q = with_surface("normalize", "gauge the ratios to the normal form")
    q.add_argument("--out", help="write the resulting surface")
    q = sub.add_parser("verify", help="run property suites", parents=[common])
    q.add_argument("suite", nargs="?", default="all", help=f"one of {', '.join(SUITES)}, all")
    q.add_argument("--quick", action="store_true", help="fewer random draws")
    q.add_argument("--inject-bug", choices=["c_theta"], help="break a formula on purpose")
    q.add_argument("--figure", help="also render an error chart to this path")
    return p


def _open_session(args, out) -> Session:
    s = cmd_load(args.surface, args.seed)
    if args.replay:
        try:
            lines = Path(args.replay).read_text().splitlines()
        except OSError as exc:
            raise InputError(f"cannot read {args.replay}: {exc.strerror}") from None
        s = replay(s, lines, out)
    return s


def _write(path: str, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def run(argv: Optional[Sequence[str]] = None, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    args = build_parser().parse_args(argv)
    tol = args.tolerance if args.tolerance is not None else DEFAULT_TOL
    try:
        if args.cmd == "verify":
            if args.suite not in SUITES + ("all",):
                raise InputError(f"unknown suite {args.suite!r}")
            ok = cmd_verify(args.suite, out, args.seed, args.depth, args.tolerance, args.quick,
                            args.inject_bug, args.figure)
            return 0 if ok else 1
        s = _open_session(args, out)
        if args.cmd == "load":
            summary(s, out)
        elif args.cmd == "save":
            _write(args.out, s.dump())
            print(f"saved = {args.out}", file=out)
        elif args.cmd == "flip":
            s = cmd_flip(s, args.edges, out, tol)
            if args.out:
                _write(args.out, s.dump())
            if args.log:
                _write(args.log, "\n".join(s.log) + "\n")
        elif args.cmd == "normalize":
            s = cmd_normalize(s, out)
            if args.out:
                _write(args.out, s.dump())
        elif args.cmd == "lift":
            cmd_lift(s, args.depth, args.base, out)
        elif args.cmd == "holonomy":
            cmd_holonomy(s, args.word, out)
        elif args.cmd == "spin":
            return 0 if cmd_spin(s, out) else 1
        return 0
    except ClosureFailure as exc:
        print(f"error: {exc}", file=err)
        return 1
    except UnsupportedFlipError as exc:
        print(f"error: unsupported flip: {exc}", file=err)
        return 2
    except (InputError, SurfaceError, GrassmannError, LiftError) as exc:
        print(f"error: {exc}", file=err)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
