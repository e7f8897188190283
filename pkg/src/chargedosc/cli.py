"""Command-line entry point: ``chargedosc <subcommand> --system FILE ...``.

Every command writes CSV (to ``--out`` or stdout) preceded by ``#`` lines that
echo the resolved configuration. Floats use 17 significant digits; complex
values take two columns.

Exit codes: 0 success, 1 a numerical comparison failed, 2 bad input,
3 the configuration has no analytic solution.
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys

import numpy as np

from . import __version__, fixtures, oracle
from .dynamics import (CoherentSpec, SqueezeSpec, coherent_trajectory, displaced_wavefunction,
                       squeezed_trajectory)
from .errors import ConfigError, DegenerateAxis, OscillatorError
from .normal_modes import identity_residuals, solve_modes
from .params import (UNSOLVABLE_REASON, Configuration, ZMotion, center_shift, classify, derive,
                     format_system, landau_frame, load_system)
from .spectrum import LevelIndex, energy, lowest_planar, z_levels
from .states import (eigenstate, landau_wavefunction, moments, system_ground_form)

COMMANDS = ("spectrum", "modes", "groundstate", "wavefunction", "evolve", "oracle", "compare")
REL_TOL = 1e-3
REL_TOL_1D = 1e-4


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return f"{float(x):.17g}"


# ---------------------------------------------------------------- argument parsing


def _floats(text, count=None, name="value"):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"{name}: cannot parse {text!r} as numbers") from None
    if count is not None and len(vals) not in (count if isinstance(count, tuple) else (count,)):
        raise UsageError(f"{name}: expected {count} comma-separated numbers, got {text!r}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{name}: values must be finite")
    return vals


def _complex_pair(values, name):
    if values is None:
        return None
    if len(values) != 2:
        raise UsageError(f"{name}: expected two 're,im' values")
    out = []
    for v in values:
        re, im = _floats(v, 2, name)
        out.append(complex(re, im))
    return out


def parse_levels(text):
    if text is None:
        return None
    vals = _floats(text, (2, 3, 4), "--levels")
    ints = vals[:3]
    if any(v != int(v) or v < 0 for v in ints):
        raise UsageError("--levels: n1, n2, n3 must be non-negative integers")
    n = [int(v) for v in ints] + [0] * (3 - len(ints))
    k = vals[3] if len(vals) == 4 else 0.0
    return n[0], n[1], n[2], k


def parse_grid(text):
    if text is None:
        return None
    nx, ny, Lx, Ly = _floats(text, 4, "--grid")
    if nx != int(nx) or ny != int(ny):
        raise UsageError("--grid: nx, ny must be integers")
    return int(nx), int(ny), Lx, Ly


def parse_time(text):
    if text is None:
        return None
    T, N = _floats(text, 2, "--time")
    if N != int(N) or N < 1 or T < 0:
        raise UsageError("--time: need T >= 0 and integer N >= 1")
    return T, int(N)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chargedosc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        if name == "oracle":
            s.add_argument("fixture", nargs="?", default="aniso",
                           help=f"one of: {', '.join(sorted(fixtures.ALL))}")
            s.add_argument("--system", help="system file (overrides the fixture)")
        else:
            s.add_argument("--system", required=True)
        s.add_argument("--out")
        s.add_argument("--grid", help="nx,ny,Lx,Ly (half-widths)")
        s.add_argument("--levels", help="n1,n2[,n3[,k]]")
        s.add_argument("--alpha", nargs=2, metavar="RE,IM")
        s.add_argument("--zeta", nargs=2, metavar="RE,IM")
        s.add_argument("--time", help="T,N")
    return p


# ---------------------------------------------------------------- output


class Report:
    def __init__(self, command, system, extra=()):
        tag = classify(system)
        self.lines = [f"# chargedosc {__version__} {command}"]
        self.lines += ["# " + line for line in format_system(system).splitlines()]
        self.lines.append(f"# configuration = {tag.name}")
        self.lines.append(f"# z_motion = {tag.z_motion.value}")
        if tag.swapped_axes:
            self.lines.append("# swapped_axes = True")
        for key, value in extra:
            self.lines.append(f"# {key} = {value}")

    def header(self, *cols):
        self.lines.append(",".join(cols))

    def row(self, *vals):
        self.lines.append(",".join(v if isinstance(v, str) else fmt(v) if isinstance(v, float)
                                   else str(v) for v in vals))

    def comment(self, text):
        self.lines.append("# " + text)

    def text(self):
        return "\n".join(self.lines) + "\n"


def _write(report: Report, out):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(report.text())
    else:
        sys.stdout.write(report.text())


# ---------------------------------------------------------------- commands


def _require_quadratic(system, command):
    kind = classify(system).kind
    if kind not in (Configuration.GENERIC, Configuration.TILTED_B):
        raise UsageError(f"{command} needs a Generic or TiltedB configuration, got {kind.value}")


def cmd_spectrum(system, args):
    tag = classify(system)
    levels = parse_levels(args.levels) or (2, 2, 2, 0.0)
    n1m, n2m, n3m, k = levels
    if tag.kind in (Configuration.LANDAU_Y, Configuration.BOTH_PLANAR_FREE):
        n2m = 0
    if tag.z_motion is not ZMotion.HARMONIC:
        n3m = 0
    rows = []
    for n1, n2, n3 in itertools.product(range(n1m + 1), range(n2m + 1), range(n3m + 1)):
        res = energy(system, LevelIndex(n1, n2, n3, k))
        rows.append((res.value, n1, n2, n3, res))
    rows.sort(key=lambda r: r[:4])
    names = [n for n, _ in rows[0][4].decomposition]
    extra = [("levels", f"{n1m},{n2m},{n3m}"), ("k", fmt(k))]
    z = z_levels(system, 0)
    if not hasattr(z, "value") or tag.kind is Configuration.TILTED_B:
        extra.append(("z_spectrum", "continuum (not included)"))
    rep = Report("spectrum", system, extra)
    rep.header("n1", "n2", "n3", "k", "value", *names)
    for value, n1, n2, n3, res in rows:
        rep.row(n1, n2, n3, float(k), float(value), *[float(res.term(n)) for n in names])
    return rep, 0


def cmd_modes(system, args):
    _require_quadratic(system, "modes")
    m = solve_modes(system)
    rep = Report("modes", system)
    rep.header("quantity", "row", "col", "re", "im")
    rep.row("sigma", 1, 0, float(m.sigma1), 0.0)
    rep.row("sigma", 2, 0, float(m.sigma2), 0.0)
    for i, e in enumerate(m.epsilon):
        rep.row("epsilon", i + 1, 0, float(e), 0.0)
    for name, mat in (("H", m.hamiltonian.matrix), ("Omega", m.omega), ("Q", m.Q), ("Q_inv", m.Q_inv)):
        for (i, j), z in np.ndenumerate(np.asarray(mat, dtype=complex)):
            rep.row(name, i + 1, j + 1, float(z.real), float(z.imag))
    for name, val in identity_residuals(m).items():
        rep.row("residual_" + name, 0, 0, float(val), 0.0)
    return rep, 0


def cmd_groundstate(system, args):
    _require_quadratic(system, "groundstate")
    m = solve_modes(system)
    form = system_ground_form(system, m, lab_frame=True)
    mo = moments(eigenstate(m, 0, 0, form))
    rep = Report("groundstate", system)
    rep.header("quantity", "re", "im")
    for (i, j), z in np.ndenumerate(form.Lambda):
        rep.row(f"Lambda_{i + 1}{j + 1}", float(z.real), float(z.imag))
    rep.row("lambda_x", float(form.lambda_x), 0.0)
    rep.row("lambda_y", float(form.lambda_y), 0.0)
    rep.row("lambda_xy", float(form.lambda_xy), 0.0)
    rep.row("N0", float(form.N0), 0.0)
    rep.row("x0", float(form.center[0]), 0.0)
    rep.row("y0", float(form.center[1]), 0.0)
    for name, d in zip(("dx", "dpx", "dy", "dpy"), mo.deltas):
        rep.row(name, float(d), 0.0)
    px, py = mo.uncertainty_products
    rep.row("dx_dpx", float(px), 0.0)
    rep.row("dy_dpy", float(py), 0.0)
    return rep, 0


def _auto_grid(system, grid, center=(0.0, 0.0), n=128):
    if grid is not None:
        nx, ny, Lx, Ly = grid
        return oracle.GridSpec(nx, ny, Lx, Ly, center[0], center[1])
    return oracle.default_grid(system, n, center=center)


def cmd_wavefunction(system, args):
    tag = classify(system)
    n1, n2, _, k = parse_levels(args.levels) or (0, 0, 0, 0.0)
    alpha = _complex_pair(args.alpha, "--alpha")
    grid = parse_grid(args.grid)
    if tag.kind in (Configuration.LANDAU_Y, Configuration.BOTH_PLANAR_FREE):
        if grid is None:
            raise UsageError("wavefunction for a Landau configuration needs --grid")
        g = oracle.GridSpec(*grid)
        X, Y = g.mesh()
        psi = landau_wavefunction(system, n1, k, X, Y)
        extra = [("n1", n1), ("k", fmt(k))]
    else:
        _require_quadratic(system, "wavefunction")
        m = solve_modes(system)
        form = system_ground_form(system, m, lab_frame=True)
        state = eigenstate(m, n1, n2, form)
        g = _auto_grid(system, grid, form.center, 64)
        X, Y = g.mesh()
        extra = [("n1", n1), ("n2", n2)]
        if alpha is not None:
            spec = CoherentSpec(*alpha)
            cx, cy = form.center

            def base(xt, yt):
                return state(xt + cx, yt + cy)

            psi = displaced_wavefunction(base, spec, m, system.hbar, X - cx, Y - cy)
            extra.append(("alpha", f"{fmt(spec.alpha1.real)},{fmt(spec.alpha1.imag)} "
                                   f"{fmt(spec.alpha2.real)},{fmt(spec.alpha2.imag)}"))
        else:
            psi = state(X, Y)
    extra.append(("grid", f"{g.nx},{g.ny},{fmt(g.Lx)},{fmt(g.Ly)},{fmt(g.cx)},{fmt(g.cy)}"))
    rep = Report("wavefunction", system, extra)
    rep.header("x", "y", "re", "im", "abs2")
    for x, y, z in zip(X.ravel(), Y.ravel(), np.asarray(psi).ravel()):
        rep.row(float(x), float(y), float(z.real), float(z.imag), float(abs(z) ** 2))
    return rep, 0


def cmd_evolve(system, args):
    _require_quadratic(system, "evolve")
    m = solve_modes(system)
    n1, n2, _, _ = parse_levels(args.levels) or (0, 0, 0, 0.0)
    T, N = parse_time(args.time) or (2 * math.pi / m.sigma2, 512)
    times = np.linspace(0.0, T, N + 1)
    alpha = _complex_pair(args.alpha, "--alpha")
    zeta = _complex_pair(args.zeta, "--zeta")
    if alpha is not None and zeta is not None:
        raise UsageError("evolve takes either --alpha or --zeta, not both")
    extra = [("n1", n1), ("n2", n2), ("time", f"{fmt(T)},{N}")]
    if zeta is not None:
        traj = squeezed_trajectory(SqueezeSpec(*zeta), m, system.hbar, times, n1, n2)
        extra.append(("state", "squeezed"))
        extra.append(("zeta", " ".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in zeta)))
    else:
        alpha = alpha or [0j, 0j]
        traj = coherent_trajectory(CoherentSpec(*alpha), m, system.hbar, times, n1, n2)
        extra.append(("state", "displaced"))
        extra.append(("alpha", " ".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in alpha)))
    extra.append(("frame", "reduced (measured from the equilibrium centre)"))
    rep = Report("evolve", system, extra)
    rep.header("t", "x", "y", "px", "py", "dx", "dpx", "dy", "dpy")
    for t, c, d in zip(traj.times, traj.centers, traj.uncertainties):
        rep.row(float(t), *[float(c[i]) for i in (0, 2, 1, 3)], *[float(v) for v in d])
    return rep, 0


# ---------------------------------------------------------------- analytic vs grid


def comparison_rows(system, k=0.0, grid=None, count=6):
    """``(label, analytic, numeric)`` triples and a tolerance for one system."""
    tag = classify(system)
    hbar, M = system.hbar, system.mass
    rows = []
    if tag.kind in (Configuration.GENERIC, Configuration.TILTED_B):
        m = solve_modes(system)
        tilted = tag.kind is Configuration.TILTED_B
        shift = center_shift(system, tag)
        if tilted:
            df = derive(system)
            yc = (system.charge * system.E_y + 2 * k * hbar * df.omega_Bp) / (M * df.tilde_omega_2**2)
            center = (shift.x0 or 0.0, yc)
            offset = energy(system, LevelIndex(0, 0, 0, k)).value - hbar * (m.sigma1 + m.sigma2) / 2
        else:
            center = (shift.x0, shift.y0)
            offset = sum(v for n, v in shift.contributions if n != "electric_z")
        g = _auto_grid(system, grid, center)
        op = oracle.discretize(system, g, frame="lab", k=k)
        res = oracle.lowest_eigenpairs(op, count)
        for (n1, n2, e), num in zip(lowest_planar(m, hbar, count), res.energies):
            rows.append((f"planar n1={n1} n2={n2}", e + offset, float(num), REL_TOL))
    elif tag.kind in (Configuration.LANDAU_Y, Configuration.BOTH_PLANAR_FREE):
        s = landau_frame(system, tag)
        df = derive(s)
        w1 = df.tilde_omega_1
        from .spectrum import landau_levels
        from .states import landau_center
        xc = landau_center(system, k)
        g1 = oracle.Grid1D(2001, 12.0 / math.sqrt(M * w1 / hbar), xc)

        def V(x):
            return ((hbar * k - 2 * M * df.omega_B * x) ** 2 / (2 * M)
                    + 0.5 * M * s.omega_x**2 * x**2 - s.charge * s.E_x * x)

        num, _ = oracle.solve_1d(V, g1, count, M, hbar)
        for n1 in range(count):
            rows.append((f"landau n1={n1}", landau_levels(system, n1, k).value, float(num[n1]), REL_TOL_1D))
    else:
        raise DegenerateAxis(UNSOLVABLE_REASON)
    if tag.z_motion is ZMotion.HARMONIC and tag.kind is not Configuration.TILTED_B:
        g1 = oracle.Grid1D(2001, 12.0 / math.sqrt(M * system.omega_z / hbar),
                           system.charge * system.E_z / (M * system.omega_z**2))
        num, _ = oracle.solve_1d(lambda z: 0.5 * M * system.omega_z**2 * z**2 - system.charge * system.E_z * z,
                                 g1, 3, M, hbar)
        for n3 in range(3):
            rows.append((f"z n3={n3}", z_levels(system, n3).value, float(num[n3]), REL_TOL_1D))
    return rows


def _compare(system, args, command, k=0.0, extra=()):
    k = parse_levels(args.levels)[3] if args.levels else k
    rows = comparison_rows(system, k, parse_grid(args.grid))
    rep = Report(command, system, list(extra) + [("k", fmt(k))])
    rep.header("level", "analytic", "numeric", "abs_err", "rel_err", "tolerance", "pass")
    ok = True
    for label, a, n, tol in rows:
        err = abs(n - a)
        rel = err / abs(a) if a != 0 else err
        passed = rel < tol
        ok &= passed
        rep.row(label, float(a), float(n), float(err), float(rel), float(tol), "PASS" if passed else "FAIL")
    rep.comment(f"summary: {'PASS' if ok else 'FAIL'} ({sum(r[3] > 0 for r in rows)} levels compared)")
    return rep, 0 if ok else 1


def cmd_oracle(system, args):
    return _compare(system, args, "oracle", args._fixture_k, [("fixture", args._fixture_name)])


def cmd_compare(system, args):
    return _compare(system, args, "compare")


HANDLERS = {
    "spectrum": cmd_spectrum,
    "modes": cmd_modes,
    "groundstate": cmd_groundstate,
    "wavefunction": cmd_wavefunction,
    "evolve": cmd_evolve,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "oracle" and not args.system:
            fx = fixtures.get(args.fixture)
            system, args._fixture_k, args._fixture_name = fx.system, fx.k, fx.name
        else:
            system = load_system(args.system)
            args._fixture_k, args._fixture_name = 0.0, args.system
    except ConfigError as exc:
        print(f"error: {args.system}: {exc}", file=sys.stderr)
        return 2
    except (OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if classify(system).kind is Configuration.UNSOLVABLE:
        print(f"error: unsolvable configuration: {UNSOLVABLE_REASON}", file=sys.stderr)
        return 3
    try:
        report, code = HANDLERS[args.command](system, args)
        _write(report, args.out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateAxis as exc:
        print(f"error: unsolvable configuration: {exc}", file=sys.stderr)
        return 3
    except (OscillatorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 2
    return code


def main():
    sys.exit(run())
