"""Command-line front end.

Every run reads one flat ``key = value`` config file and writes one CSV
(``figures`` writes two files into a directory).  Exit codes: 0 success,
1 numerical failure, 2 configuration error.

Recognised keys (all optional)::

    kernel          power-law | tempered-power-law | caputo-fabrizio |
                    atangana-baleanu | distributed-order |
                    bessel-klein-gordon | classical | power-law-order2
    alpha, rate, gamma
    kappa_alpha     replace kappa by the power-law kernel of this order
                    (a deliberately mismatched pair for negative controls)
    scale           identity | signed-power | logarithmic     (beta)
    weight          unit | exponential                        (weight_rate)
    t_min, t_max, t_step, xi_max, xi_step, y_step, history_window
    lambda
    source          gaussian | pulse | file   (center, width, source_file)
    operator        derivative | integral
    forms           comma list of direct, spectral, marchaud, or all
    manufactured    true: source is D u* + lambda u* for the u* above
    method          spectral | convolution   (solve)
    check_points    comma list of t values   (kernel-check)
    s_values        comma list of s values   (kernel-check)
    xi0, count, tol
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .errors import EdgeDecayWarning, UnsupportedFormError, WeylSonineError
from .kernels import (
    KERNEL_NAMES,
    check_sonine_condition,
    check_symbol_duality,
    make_kernel,
)
from .operators import Form, OperatorRequest, apply_operator
from .solver import EvolutionProblem, residual, solve_evolution, wave_dispersion_roots, redshift_trace
from .structure import SampledSignal, StructurePair, make_scale, make_weight, uniform_grid
from .wft import FrequencyGrid

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _num(x) -> str:
    # metadata lines use the shortest round-trip form
    return repr(float(x))


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    path: str = ""

    def get(self, key, default=None):
        return self.values.get(key, default)

    def number(self, key, default):
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}") from None

    def numbers(self, key, default):
        raw = self.values.get(key)
        if raw is None:
            return list(default)
        try:
            return [float(x) for x in raw.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"{key} must be a comma-separated list of numbers") from None

    def flag(self, key, default=False):
        raw = self.values.get(key)
        if raw is None:
            return default
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key} must be true or false")


def load_config(path) -> RunConfig:
    """Parse a flat ``key = value`` file (``#`` and ``;`` start comments)."""
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return RunConfig({k: v.strip() for k, v in parser["run"].items()}, str(path))


# ---------------------------------------------------------------------------
# building domain objects from a config


def build_pair(cfg: RunConfig):
    name = cfg.get("kernel", "power-law")
    if name not in KERNEL_NAMES:
        raise ConfigError(f"unknown kernel {name!r}; expected one of {', '.join(KERNEL_NAMES)}")
    params = {}
    for key in ("alpha", "rate", "gamma"):
        if cfg.get(key) is not None:
            params[key] = cfg.number(key, None)
    try:
        pair = make_kernel(name, **params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.get("kappa_alpha") is not None:
        other = make_kernel("power-law", alpha=cfg.number("kappa_alpha", 0.5))
        pair = replace(
            pair,
            name=pair.name + "-mismatched",
            kappa_time=other.kappa_time,
            kappa_singularity=other.kappa_singularity,
            components=(),
        )
    return pair


def build_structure(cfg: RunConfig) -> StructurePair:
    try:
        kind = cfg.get("scale", "identity")
        scale = make_scale(kind, beta=cfg.number("beta", 0.6)) if kind == "signed-power" else make_scale(kind)
        wkind = cfg.get("weight", "unit")
        weight = (
            make_weight(wkind, rate=cfg.number("weight_rate", 0.25)) if wkind == "exponential" else make_weight(wkind)
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return StructurePair(scale, weight)


def build_grid(cfg: RunConfig, s: StructurePair) -> np.ndarray:
    lo, hi = s.domain
    # half-line scales need fine steps near the origin, where psi varies fastest
    half_line = not math.isinf(lo)
    t_min = cfg.number("t_min", 2e-3 if half_line else -20.0)
    t_max = cfg.number("t_max", 400.0 if half_line else 20.0)
    step = cfg.number("t_step", 2e-3 if half_line else 0.01)
    if not (t_max > t_min and step > 0):
        raise ConfigError("need t_max > t_min and t_step > 0")
    grid = uniform_grid(t_min, t_max, step)
    if grid.size < 8:
        raise ConfigError("time grid needs at least 8 points")
    if not np.all(s.scale.contains(grid)):
        raise ConfigError(f"time grid leaves the scale domain {s.domain}")
    return grid


def build_freq(cfg: RunConfig) -> FrequencyGrid:
    try:
        return FrequencyGrid.symmetric(cfg.number("xi_max", 50.0), cfg.number("xi_step", 0.005))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _bump(x):
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def build_source(cfg: RunConfig, s: StructurePair, grid: np.ndarray) -> SampledSignal:
    kind = cfg.get("source", "gaussian")
    center, width = cfg.number("center", 0.0), cfg.number("width", 1.0)
    if width <= 0:
        raise ConfigError("width must be positive")
    if kind == "gaussian":
        # centred in warped time so every structure gets a decaying input
        return SampledSignal.from_function(lambda t: np.exp(-((s.psi(t) - center) / width) ** 2 / 2), grid)
    if kind == "pulse":
        return SampledSignal.from_function(lambda t: _bump((s.psi(t) - center) / width), grid)
    if kind == "file":
        path = cfg.get("source_file")
        if not path:
            raise ConfigError("source = file needs source_file")
        try:
            data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read source_file: {exc}") from None
        if data.shape[1] < 2:
            raise ConfigError("source_file needs columns t, value")
        try:
            return SampledSignal.on_grid(data[:, 0], data[:, 1])
        except ValueError as exc:
            raise ConfigError(f"source_file: {exc}") from None
    raise ConfigError(f"unknown source {kind!r}")


def parse_forms(raw: str, pair) -> list[Form]:
    names = [x.strip() for x in raw.split(",") if x.strip()]
    if names == ["all"]:
        forms = [Form.DIRECT, Form.SPECTRAL]
        if pair.levy is not None and pair.n == 1:
            forms.append(Form.MARCHAUD)
        return forms
    try:
        return [Form(n) for n in names]
    except ValueError:
        raise ConfigError(f"forms must be among direct, spectral, marchaud, all; got {raw!r}") from None


# ---------------------------------------------------------------------------
# output


def write_csv(path, header_lines, columns, rows):
    """Write ``#`` metadata, a header row and data rows; atomic for real paths."""

    def emit(fh):
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) if isinstance(x, (float, int, np.floating, np.integer)) else x for x in row])

    if path is None or path == "-":
        emit(sys.stdout)
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            emit(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _echo(cfg: RunConfig, command: str):
    lines = [f"weylsonine {__version__} {command}"]
    if cfg.path:
        lines.append(f"config: {cfg.path}")
    lines += [f"{k} = {v}" for k, v in sorted(cfg.values.items())]
    return lines


# ---------------------------------------------------------------------------
# commands: each returns (exit code, message); building may raise ConfigError


def cmd_kernel_check(cfg: RunConfig, out, tol):
    pair = build_pair(cfg)
    points = cfg.numbers("check_points", (0.1, 1.0, 10.0))
    s_values = cfg.numbers("s_values", (0.5, 1.0, 2.0, 5.0))
    tol = tol if tol is not None else cfg.number("tol", 1e-8)
    if any(p <= 0 for p in points) or any(v <= 0 for v in s_values):
        raise ConfigError("check_points and s_values must be positive")
    header = _echo(cfg, "kernel-check")
    rows, ok, checked = [], True, False
    if pair.k_time is not None and pair.kappa_time is not None:
        rep = check_sonine_condition(pair, points, tol)
        rows = list(zip(rep.t, rep.values, rep.target, rep.errors))
        header.append(f"sonine max_error = {_num(rep.max_error)} tol = {_num(tol)} pass = {rep.passed}")
        ok &= rep.passed
        checked = True
    else:
        header.append("sonine: skipped (no closed-form conjugate kernel)")
    try:
        dual = check_symbol_duality(pair, s_values)
        dual_tol = max(tol, 1e-6)
        passed = dual.max_rel_error < dual_tol
        header.append(
            f"duality via {dual.kernel}: max_rel_error = {_num(dual.max_rel_error)} tol = {_num(dual_tol)} pass = {passed}"
        )
        for s_, num, exp in zip(dual.s, dual.numeric, dual.expected):
            header.append(f"duality s = {_num(s_)} numeric = {_num(num)} symbol = {_num(exp)}")
        ok &= passed
        checked = True
    except UnsupportedFormError:
        header.append("duality: skipped (no closed-form kernel)")
    if not checked:
        ok = False
        header.append("nothing to check: kernel has no closed time form")
    header.append(f"result = {'pass' if ok else 'fail'}")
    write_csv(out, header, ["t", "convolution_value", "target", "error"], rows)
    return (EXIT_OK if ok else EXIT_FAILURE), ("kernel check passed" if ok else "kernel check failed")


def _operator_input(cfg, s, grid):
    return build_source(cfg, s, grid)


def cmd_apply(cfg: RunConfig, out, form_flag, tol):
    pair, s = build_pair(cfg), build_structure(cfg)
    grid = build_grid(cfg, s)
    freq = build_freq(cfg)
    u = _operator_input(cfg, s, grid)
    op = cfg.get("operator", "derivative")
    if op not in ("derivative", "integral"):
        raise ConfigError("operator must be derivative or integral")
    forms = parse_forms(form_flag or cfg.get("forms", "spectral"), pair)
    window = cfg.number("history_window", None)
    if window is not None and window <= 0:
        raise ConfigError("history_window must be positive")
    y_step = cfg.number("y_step", None)
    results = {}
    for form in forms:
        req = OperatorRequest(pair, s, u, form, history_window=window, freq=freq, y_step=y_step)
        results[form.value] = apply_operator(req, op)
    header = _echo(cfg, "apply") + [f"operator = {op}", f"forms = {','.join(results)}"]
    names = list(results)
    worst = 0.0
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            d = float(np.abs(results[names[i]].values - results[names[j]].values).max())
            worst = max(worst, d)
            header.append(f"max_diff {names[i]}-{names[j]} = {_num(d)}")
    cols = ["t", "re_u", "im_u"]
    for n in names:
        cols += [f"re_{n}", f"im_{n}"]
    data = [grid, u.values.real, u.values.imag]
    for n in names:
        data += [results[n].values.real, results[n].values.imag]
    ok = True
    if tol is not None and len(names) > 1:
        ok = worst < tol
        header.append(f"tol = {_num(tol)} pass = {ok}")
    write_csv(out, header, cols, zip(*data))
    return (EXIT_OK if ok else EXIT_FAILURE), f"applied {op} with {', '.join(names)}"


def cmd_solve(cfg: RunConfig, out, form_flag, tol):
    pair, s = build_pair(cfg), build_structure(cfg)
    grid = build_grid(cfg, s)
    freq = build_freq(cfg)
    lam = cfg.number("lambda", 1.0)
    method = cfg.get("method", "spectral")
    if method not in ("spectral", "convolution"):
        raise ConfigError("method must be spectral or convolution")
    base = build_source(cfg, s, grid)
    exact = None
    if cfg.flag("manufactured"):
        form = Form.DIRECT if pair.kappa_time is not None and pair.n <= 2 else Form.SPECTRAL
        du = apply_operator(OperatorRequest(pair, s, base, form, freq=freq), "derivative")
        source, exact = base.with_values(du.values + lam * base.values), base
    else:
        source = base
    try:
        prob = EvolutionProblem(pair, s, lam, source, freq)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    u = solve_evolution(prob, method)
    res = residual(prob, u)
    tol = tol if tol is not None else cfg.number("tol", 1e-3)
    header = _echo(cfg, "solve") + [f"method = {method}", f"residual = {_num(res)}"]
    ok = res < tol
    if exact is not None:
        err = float(np.abs(u.values - exact.values).max())
        header.append(f"max_abs_error_vs_manufactured = {_num(err)}")
        ok = ok and err < max(tol, 1e-3)
    header.append(f"tol = {_num(tol)} pass = {ok}")
    rows = zip(grid, source.values.real, u.values.real, u.values.imag)
    write_csv(out, header, ["t", "f", "re_u", "im_u"], rows)
    return (EXIT_OK if ok else EXIT_FAILURE), f"residual {res:.3g}"


def cmd_dispersion(cfg: RunConfig, out, form_flag, tol):
    gamma, lam = cfg.number("gamma", math.pi), cfg.number("lambda", 1.0)
    count = int(cfg.number("count", 3))
    if gamma <= 0 or count < 0:
        raise ConfigError("gamma must be positive and count nonnegative")
    res = wave_dispersion_roots(gamma, lam, count)
    header = _echo(cfg, "dispersion") + [f"infimum = {_num(res.infimum)}"]
    if res.message:
        header.append(res.message)
    rows = [(m, xi, abs(np.exp(1j * gamma / xi) + lam)) for m, xi in enumerate(res.roots)]
    write_csv(out, header, ["m", "xi", "residual"], rows)
    return EXIT_OK, f"{len(res.roots)} root(s)"


def cmd_figures(cfg: RunConfig, out, form_flag, tol):
    alpha, rate = cfg.number("alpha", 0.5), cfg.number("rate", 1.0)
    xi0, beta = cfg.number("xi0", 5.0), cfg.number("beta", 0.6)
    if not (0 < alpha < 1 and rate >= 0 and xi0 > 0 and beta > 0):
        raise ConfigError("figures need 0 < alpha < 1, rate >= 0, xi0 > 0, beta > 0")
    directory = out if out not in (None, "-") else "."
    kappa = make_kernel("power-law", alpha=alpha).kappa_time
    z = np.unique(np.concatenate([np.logspace(-2, 1, 301), [1.0]]))
    k_pl = kappa(z)
    fig1 = zip(z, k_pl, np.exp(-rate * z) * k_pl, np.exp(-z))
    head = _echo(cfg, "figures")
    write_csv(
        os.path.join(directory, "fig1_kernels.csv"),
        head + [f"alpha = {_num(alpha)} rate = {_num(rate)}"],
        ["z", "k_powerlaw", "k_tempered", "k_exponential"],
        fig1,
    )
    t = uniform_grid(0.0, cfg.number("t_max", 20.0), cfg.number("t_step", 0.01))
    classical = redshift_trace(xi0, StructurePair.identity(), t)
    warped = redshift_trace(xi0, StructurePair(make_scale("signed-power", beta=beta), make_weight()), t)
    write_csv(
        os.path.join(directory, "fig3_redshift.csv"),
        head + [f"xi0 = {_num(xi0)} beta = {_num(beta)}"],
        ["t", "trace_classical", "trace_warped"],
        zip(t, classical.values.real, warped.values.real),
    )
    return EXIT_OK, f"figures written to {directory}"


COMMANDS = {
    "kernel-check": lambda cfg, a: cmd_kernel_check(cfg, a.out, a.tol),
    "apply": lambda cfg, a: cmd_apply(cfg, a.out, a.form, a.tol),
    "solve": lambda cfg, a: cmd_solve(cfg, a.out, a.form, a.tol),
    "dispersion": lambda cfg, a: cmd_dispersion(cfg, a.out, a.form, a.tol),
    "figures": lambda cfg, a: cmd_figures(cfg, a.out, a.form, a.tol),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weylsonine", description="Weighted Weyl-Sonine operators and solvers.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output CSV (a directory for figures); '-' or omitted for stdout")
        p.add_argument("--form", choices=["direct", "spectral", "marchaud", "all"], help="operator form")
        p.add_argument("--tol", type=float, help="pass/fail tolerance")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EdgeDecayWarning)
            code, msg = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (WeylSonineError, ValueError, ArithmeticError) as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(msg, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
