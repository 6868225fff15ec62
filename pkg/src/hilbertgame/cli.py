"""Command-line front end.

    hilbertgame build     --builtin penny-quantum
    hilbertgame iterate   --builtin prisoners-dilemma --beta inf
    hilbertgame sweep     --builtin hawk-dove --betas 0:8:0.5,inf --init "0.6;0.5" --update-order 2,1
    hilbertgame stability --builtin penny-classical --beta 2

Player numbers on the command line are 1-based.  Output goes to stdout
unless ``--out`` is given.  Exit status is non-zero only for operational
failures (bad input, I/O); non-convergence and instability are results.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import gamefile, games, kinetics, lina
from .games import QuantumGameSpec


class CLIError(Exception):
    pass


def fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_num(x: float):
    x = float(x)
    return fmt(x) if not math.isfinite(x) else x


# --------------------------------------------------------------------------
# Argument parsing helpers


def parse_beta(text: str) -> float:
    try:
        beta = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid beta {text!r}") from None
    if math.isnan(beta) or beta < 0:
        raise argparse.ArgumentTypeError(f"beta must be >= 0 or inf, got {text!r}")
    return beta


def parse_betas(text: str) -> list[float]:
    """Comma-separated items, each a value or an inclusive ``start:stop:step``."""
    out: list[float] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise argparse.ArgumentTypeError(f"bad range {item!r}; use start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if not step > 0 or not all(map(math.isfinite, (start, stop, step))):
                raise argparse.ArgumentTypeError(f"bad range {item!r}")
            count = int(math.floor((stop - start) / step + 1e-9))
            out.extend(start + k * step for k in range(count + 1))
        else:
            out.append(parse_beta(item))
    if not out:
        raise argparse.ArgumentTypeError("empty beta grid")
    if any(b < 0 for b in out):
        raise argparse.ArgumentTypeError("betas must be non-negative")
    return out


def parse_order(text: str, n_players: int) -> tuple[int, ...]:
    try:
        order = tuple(int(k) - 1 for k in text.split(","))
    except ValueError:
        raise CLIError(f"invalid --update-order {text!r}") from None
    if sorted(order) != list(range(n_players)):
        raise CLIError(f"--update-order must be a permutation of 1..{n_players}")
    return order


def parse_init(text: str | None, dims: Sequence[int]) -> list[games.PlayerState]:
    """Initial mixtures from ``--init``.

    Players are separated by ``;`` and each lists its strategy probabilities
    (the last may be omitted and is then inferred).  An empty entry means
    uniform.  When every player has two strategies, a plain comma list with
    one number per player gives each player's first-strategy probability.
    """
    n = len(dims)
    if text is None or not text.strip():
        return [games.uniform_state(d) for d in dims]
    if ";" in text:
        parts = text.split(";")
    elif all(d == 2 for d in dims) and len(text.split(",")) == n:
        parts = text.split(",")
    elif n == 1:
        parts = [text]
    else:
        raise CLIError(f"cannot read --init {text!r}; separate players with ';'")
    if len(parts) != n:
        raise CLIError(f"--init gives {len(parts)} players, game has {n}")
    states = []
    for k, (part, d) in enumerate(zip(parts, dims)):
        if not part.strip():
            states.append(games.uniform_state(d))
            continue
        try:
            probs = [float(x) for x in part.split(",")]
        except ValueError:
            raise CLIError(f"bad probabilities for player {k + 1}: {part!r}") from None
        if len(probs) == d - 1:
            probs.append(1.0 - sum(probs))
        if len(probs) != d:
            raise CLIError(f"player {k + 1} has {d} strategies, --init gives {len(probs)} values")
        try:
            states.append(games.mixture_state(probs))
        except ValueError as exc:
            raise CLIError(f"player {k + 1}: {exc}") from None
    return states


def load(args) -> games.Game:
    if args.builtin:
        try:
            return games.builtin(args.builtin)
        except ValueError as exc:
            raise CLIError(str(exc)) from None
    try:
        return gamefile.load_game(args.game)
    except OSError as exc:
        raise CLIError(f"cannot read {args.game}: {exc.strerror}") from None
    except gamefile.GameFileError as exc:
        raise CLIError(f"{args.game}: {exc}") from None


def _player(args, game) -> int:
    k = args.player - 1
    if not 0 <= k < game.n_players:
        raise CLIError(f"--player must be between 1 and {game.n_players}")
    return k


def _config(args, game, beta: float) -> kinetics.KineticsConfig:
    order = parse_order(args.update_order, game.n_players) if args.update_order else None
    return kinetics.KineticsConfig(beta=beta, tolerance=args.tol, max_sweeps=args.max_sweeps,
                                   update_order=order, parallel=args.order == "par",
                                   record_trace=getattr(args, "trace", False))


# --------------------------------------------------------------------------
# Emitters


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _matrix_rows(m: np.ndarray, prefix: Sequence = ()) -> list[list]:
    rows = []
    for r, row in enumerate(m):
        line = list(prefix) + [r]
        for z in row:
            line += [fmt(z.real), fmt(z.imag)]
        rows.append(line)
    return rows


def _matrix_header(side: int, prefix: Sequence[str] = ()) -> list[str]:
    head = list(prefix) + ["row"]
    for c in range(side):
        head += [f"re_{c}", f"im_{c}"]
    return head


def _state_doc(rho: np.ndarray) -> list:
    return gamefile.matrix_to_json(rho)


def _report_doc(report: kinetics.FixedPointReport, game, beta: float) -> dict:
    doc = {
        "beta": _json_num(beta),
        "converged": report.converged,
        "sweeps": report.sweeps_used,
        "residual": _json_num(report.residual),
        "probabilities": [list(map(float, p)) for p in report.probabilities],
        "payoffs": [float(x) for x in report.payoffs],
        "states": [_state_doc(s.rho) for s in report.states],
        "warnings": list(report.warnings),
    }
    if report.stability is not None:
        doc["stability"] = _stability_doc(report.stability)
    if not report.converged:
        doc["window"] = [[list(map(float, r.diagonal().real)) for r in step]
                         for step in report.window]
    return doc


def _stability_doc(s: kinetics.StabilityReport) -> dict:
    return {"spectral_radius": float(s.spectral_radius),
            "classification": s.classification,
            "jacobian": [list(map(float, row)) for row in s.jacobian]}


# --------------------------------------------------------------------------
# Commands


def cmd_build(args, game) -> str:
    mats = games.payoff_matrices(game)
    players = [_player(args, game)] if args.player is not None else range(game.n_players)
    if args.format == "structured":
        if args.player is not None:
            k = players[0]
            doc = {"kind": "payoff-matrix", "player": k + 1, "dims": list(game.dims),
                   "payoff_matrix": gamefile.matrix_to_json(mats[k])}
        else:
            doc = gamefile.raw_doc(mats, game.dims, game.labels, game.name)
        return gamefile.dumps(doc)
    side = mats[0].shape[0]
    rows = []
    for k in players:
        rows += _matrix_rows(mats[k], prefix=[k + 1])
    return _csv(_matrix_header(side, ["player"]), rows)


def cmd_eval(args, game) -> str:
    states = parse_init(args.init, game.dims)
    system = games.system_from_players(states)
    mats = games.payoff_matrices(game)
    players = [_player(args, game)] if args.player is not None else range(game.n_players)
    values = {k + 1: games.payoff(system, mats[k]) for k in players}
    if args.format == "structured":
        return gamefile.dumps({"payoffs": {str(k): v for k, v in values.items()},
                               "probabilities": [list(map(float, s.probabilities)) for s in states]})
    return _csv(["player", "payoff"], [[k, fmt(v)] for k, v in values.items()])


def cmd_reduce(args, game) -> str:
    owner = _player(args, game) if args.player is not None else 0
    states = parse_init(args.init, game.dims)
    h = games.payoff_matrices(game)[owner]
    h_r = kinetics.reduced_payoff(h, states, game.dims, owner)
    if args.format == "structured":
        eig = lina.eig_hermitian(h_r)
        return gamefile.dumps({"player": owner + 1,
                               "reduced_payoff": gamefile.matrix_to_json(h_r),
                               "eigenvalues": [float(v) for v in eig.values]})
    return _csv(_matrix_header(h_r.shape[0]), _matrix_rows(h_r))


def _prob_rows(prefix, rhos, labels):
    rows = []
    for k, rho in enumerate(rhos):
        for label, p in zip(labels[k], rho.diagonal().real):
            rows.append(list(prefix) + [k + 1, label, fmt(p)])
    return rows


def cmd_iterate(args, game) -> str:
    config = _config(args, game, args.beta)
    report = kinetics.iterate(game, parse_init(args.init, game.dims), config)
    if args.format == "structured":
        return gamefile.dumps(_report_doc(report, game, args.beta))
    header = ["sweep", "player", "strategy", "probability", "residual", "converged"]
    rows = []
    if args.trace:
        last = len(report.trace) - 1
        for t, (rhos, res) in enumerate(report.trace):
            flag = str(report.converged).lower() if t == last else ""
            for row in _prob_rows([t], rhos, game.labels):
                rows.append(row + ["" if math.isnan(res) else fmt(res), flag])
    else:
        rhos = [s.rho for s in report.states]
        for row in _prob_rows([report.sweeps_used], rhos, game.labels):
            rows.append(row + [fmt(report.residual), str(report.converged).lower()])
    return _csv(header, rows)


def cmd_sweep(args, game) -> str:
    config = _config(args, game, 0.0)
    sweep = kinetics.beta_sweep(game, args.betas, parse_init(args.init, game.dims),
                                config, warm_start=args.warm_start)
    if args.format == "structured":
        return gamefile.dumps({"rows": [_report_doc(r.report, game, r.beta) for r in sweep]})
    header = ["beta", "player", "strategy", "probability", "converged", "spectral_radius"]
    rows = []
    for r in sweep:
        rhos = [s.rho for s in r.report.states]
        radius = "" if math.isnan(r.spectral_radius) else fmt(r.spectral_radius)
        for row in _prob_rows([fmt(r.beta)], rhos, game.labels):
            rows.append(row + [str(r.report.converged).lower(), radius])
    return _csv(header, rows)


def cmd_stability(args, game) -> str:
    if isinstance(game, QuantumGameSpec):
        raise CLIError("stability needs a classical game")
    config = _config(args, game, args.beta)
    states = parse_init(args.init, game.dims)
    if args.from_iterate:
        states = kinetics.iterate(game, states, config).states
    mats = games.payoff_matrices(game)
    try:
        report = kinetics.stability(states, game, config, fd_step=args.fd_step)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    _, residual = kinetics.sweep_once(states, mats, game.dims, config)
    if args.format == "structured":
        doc = _stability_doc(report)
        doc.update(beta=_json_num(args.beta), fixed_point_residual=float(residual),
                   probabilities=[list(map(float, s.probabilities)) for s in states])
        return gamefile.dumps(doc)
    jac = " ".join(fmt(x) for x in report.jacobian.ravel())
    return _csv(["beta", "spectral_radius", "classification", "fixed_point_residual", "jacobian"],
                [[fmt(args.beta), fmt(report.spectral_radius), report.classification,
                  fmt(residual), jac]])


def cmd_decompose(args, game) -> str:
    if args.unitary is not None:
        try:
            theta, phi = (float(x) for x in args.unitary.split(","))
        except ValueError:
            raise CLIError("--unitary expects theta,phi") from None
        op = games.penny_unitary(theta, phi)
    elif args.operator is not None:
        try:
            op = gamefile._Reader(args.operator, {}).matrix(json.loads(args.operator), "operator")
        except (json.JSONDecodeError, gamefile.GameFileError) as exc:
            raise CLIError(f"bad --operator: {exc}") from None
    else:
        raise CLIError("decompose needs --operator or --unitary")
    if args.basis == "units":
        basis = games.matrix_unit_basis(op.shape[0])
        labels = [f"e{j}{k}" for j in range(op.shape[0]) for k in range(op.shape[0])]
    else:
        if not isinstance(game, QuantumGameSpec):
            raise CLIError("decompose on the game basis needs a quantum game (or --basis units)")
        k = _player(args, game) if args.player is not None else 0
        basis, labels = game.strategy_bases[k], game.labels[k]
    if basis[0].shape != op.shape:
        raise CLIError(f"operator shape {op.shape} does not match basis {basis[0].shape}")
    dec = games.decompose_operator(op, basis)
    if args.format == "structured":
        return gamefile.dumps({"labels": list(labels),
                               "coefficients": [gamefile.complex_entry(c) for c in dec.coefficients],
                               "residual": dec.residual})
    rows = [[label, fmt(c.real), fmt(c.imag)] for label, c in zip(labels, dec.coefficients)]
    rows.append(["residual", fmt(dec.residual), fmt(0.0)])
    return _csv(["basis", "re", "im"], rows)


HANDLERS = {
    "build": cmd_build, "eval": cmd_eval, "reduce": cmd_reduce, "iterate": cmd_iterate,
    "sweep": cmd_sweep, "stability": cmd_stability, "decompose": cmd_decompose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hilbertgame",
        description="Payoff matrices and Gibbs fixed-point equilibria of classical and quantum games.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--game", metavar="PATH", help="game file (JSON)")
    src.add_argument("--builtin", metavar="NAME", choices=sorted(games.BUILTINS),
                     help="built-in game: %(choices)s")
    common.add_argument("--player", type=int, help="1-based player number")
    common.add_argument("--init", help="initial mixtures, e.g. '0.6;0.5' or '0.2,0.8;0.5,0.5'")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "structured"))

    kin = argparse.ArgumentParser(add_help=False)
    kin.add_argument("--tol", type=float, default=1e-10)
    kin.add_argument("--max-sweeps", type=int, default=100_000)
    kin.add_argument("--order", choices=("seq", "par"), default="seq",
                     help="sequential or simultaneous player updates")
    kin.add_argument("--update-order", metavar="I,J,..",
                     help="player update order, e.g. 2,1 (default 1..N)")

    sub.add_parser("build", parents=[common], help="emit payoff matrices")
    sub.add_parser("eval", parents=[common], help="payoffs at the --init state")
    sub.add_parser("reduce", parents=[common], help="reduced payoff matrix of --player")
    p = sub.add_parser("iterate", parents=[common, kin], help="iterate to a fixed point")
    p.add_argument("--beta", type=parse_beta, default=1.0)
    p.add_argument("--trace", action="store_true", help="emit every sweep")
    p = sub.add_parser("sweep", parents=[common, kin], help="fixed points over a beta grid")
    p.add_argument("--betas", type=parse_betas, required=True,
                   help="e.g. 0:8:0.5,inf")
    p.add_argument("--warm-start", action="store_true",
                   help="start each beta from the previous fixed point")
    p = sub.add_parser("stability", parents=[common, kin], help="linear stability at --init")
    p.add_argument("--beta", type=parse_beta, default=1.0)
    p.add_argument("--fd-step", type=float, default=1e-6)
    p.add_argument("--from-iterate", action="store_true",
                   help="iterate from --init first and analyse the end state")
    p = sub.add_parser("decompose", parents=[common], help="operator coefficients on a basis")
    p.add_argument("--operator", help="JSON matrix with [re, im] entries")
    p.add_argument("--unitary", metavar="THETA,PHI", help="the penny operator U(theta, phi)")
    p.add_argument("--basis", choices=("game", "units"), default="game")
    return parser


def execute(args: argparse.Namespace) -> str:
    if args.format is None:
        args.format = "structured" if args.command == "build" else "csv"
    game = load(args)
    try:
        return HANDLERS[args.command](args, game)
    except ValueError as exc:
        # invalid game data or flag values found after parsing
        raise CLIError(str(exc)) from None


def run(argv: Sequence[str] | None = None) -> str:
    """Parse ``argv``, run the command and return its output text."""
    return execute(build_parser().parse_args(argv))


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = execute(args)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except CLIError as exc:
        print(f"hilbertgame: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"hilbertgame: error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1
    return 0
