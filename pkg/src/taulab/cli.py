"""Command line: generate data, build tau tables, run check suites, dump factorizations.

Exit codes: 0 pass, 1 relation failure or method mismatch, 2 input error,
3 internal error.  Settings come from flags, then a JSON ``--config`` file,
then built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from itertools import product
from pathlib import Path

from .algebra import num_den
from .conditions import ArrayFormatError, CoefficientArray, random_array
from . import looprestrict as lr
from . import matgroup, relations
from .fock import WindowOverflow
from .tau import CrossMethodMismatch, Grid, METHODS, TauTable, build_table

SUITES = ("2T", "2Q", "3T", "3Q", "hdiff", "nonneg", "conj-gln", "conj-glinf")
EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "check"
    n: int = 2
    seed: int = 0
    box: str = "3x3"
    origin: str = "0,0"
    grid: int | None = None
    shifts: int = 1
    methods: str | None = None
    suite: str = "all"
    input: str | None = None
    out: str | None = None
    jobs: int = 1
    loop: bool = False
    k: str | None = None
    shift: str | None = None
    verbose: bool = False

    @property
    def box_dims(self) -> tuple[int, int]:
        try:
            r, c = self.box.lower().split("x")
            dims = (int(r), int(c))
        except ValueError:
            raise InputError(f"--box wants RxC, got {self.box!r}") from None
        if min(dims) < 1:
            raise InputError("--box dimensions must be positive")
        return dims

    @property
    def origin_pair(self) -> tuple[int, int]:
        try:
            i, j = (int(x) for x in self.origin.split(","))
        except ValueError:
            raise InputError(f"--origin wants I,J, got {self.origin!r}") from None
        return (i, j)

    @property
    def grid_max(self) -> int:
        if self.grid is not None:
            return self.grid
        return {2: 3, 3: 2}.get(self.n, 1)


def _int_list(text: str | None, length: int, name: str) -> tuple[int, ...]:
    if text is None:
        return (0,) * length
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"{name} wants comma separated integers") from None
    if len(vals) != length:
        raise InputError(f"{name} needs {length} entries")
    return vals


# ---------------------------------------------------------------------------
# data


def load_data(cfg: RunConfig):
    """The array or loop coefficients named by the config (file, or seeded generation)."""
    if cfg.input:
        try:
            obj = json.loads(Path(cfg.input).read_text())
        except OSError as exc:
            raise InputError(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise ArrayFormatError(str(exc)) from exc
        if isinstance(obj, dict) and obj.get("loop"):
            data = lr.QCoefficients.from_json_obj(obj)
        else:
            data = CoefficientArray.from_json_obj(obj)
        cfg.n = data.n
        return data
    if cfg.n < 2:
        raise InputError("--n must be at least 2")
    if cfg.loop:
        return lr.random_q(cfg.n, cfg.seed, length=cfg.box_dims[0])
    return random_array(cfg.n, cfg.seed, box=cfg.box_dims, origin=cfg.origin_pair)


def as_array(data, cfg: RunConfig) -> CoefficientArray:
    if isinstance(data, CoefficientArray):
        return data
    lo, hi = data.span()
    return lr.lift(data, max(abs(lo), abs(hi)) + cfg.grid_max + cfg.shifts + 2)


def as_loop(data, cfg: RunConfig) -> lr.QCoefficients:
    """Loop data for the loop suites.

    Generated runs draw loop coefficients from the same seed; an input array
    must be constant along anti-diagonals.
    """
    if isinstance(data, lr.QCoefficients):
        return data
    if not cfg.input:
        return lr.random_q(data.n, cfg.seed, length=cfg.box_dims[0])
    try:
        return lr.restrict(data)
    except lr.NotAntiDiagonal as exc:
        raise InputError(f"loop suite needs anti-diagonal data: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def cmd_gen(cfg: RunConfig) -> int:
    if cfg.input:
        raise InputError("gen does not read input")
    data = load_data(cfg)
    _emit(cfg.out, data.to_json())
    return EXIT_PASS


def _tau_grid(n: int, cfg: RunConfig) -> Grid:
    g, s = cfg.grid_max, cfg.shifts
    if n == 2:
        return Grid.n2(g, s)
    if n == 3:
        return Grid.n3(g, s)
    ks = tuple(kv for kv in product(range(g + 1), repeat=n - 1) if sum(kv) <= g)
    return Grid(ks, tuple(product(range(-s, s + 1), repeat=n)))


def default_methods(n: int) -> str:
    return {2: "hankel,minor,fock", 3: "residue,minor,fock"}.get(n, "minor,fock")


def cmd_tau(cfg: RunConfig) -> int:
    data = load_data(cfg)
    n = data.n
    methods = [m for m in (cfg.methods or default_methods(n)).split(",") if m]
    grid = _tau_grid(n, cfg)
    if isinstance(data, lr.QCoefficients):
        table = _loop_table(data, grid, methods)
    else:
        for m in methods:
            if m not in METHODS:
                raise InputError(f"unknown method {m!r}")
        table = build_table(data, grid, methods)
    if cfg.out:
        Path(cfg.out + ".csv").write_text(table.to_csv())
        Path(cfg.out + ".json").write_text(table.to_json())
    else:
        sys.stdout.write(table.to_csv())
    return EXIT_PASS


def _loop_table(q: lr.QCoefficients, grid: Grid, methods) -> TauTable:
    table = TauTable(q.n)
    for m in methods:
        if m not in ("minor", "hankel") or (m == "hankel" and q.n != 2):
            raise InputError(f"method {m!r} is not available for loop data with n={q.n}")
    for kv, sv in grid.points():
        for m in methods:
            if m == "minor":
                v = lr.loop_tau(q, kv, sv)
            else:
                v = lr.hankel_loop(q, kv[0], sv[0] - sv[1])
            table.insert(kv, sv, m, v)
    return table


def _k_grid(n: int, g: int) -> tuple:
    return tuple(product(range(g + 1), repeat=n - 1))


def _shift_grid(length: int, s: int) -> tuple:
    return tuple(product(range(-s, s + 1), repeat=length))


def applicable_suites(n: int) -> list[str]:
    if n == 2:
        return ["2T", "2Q", "hdiff", "nonneg", "conj-gln", "conj-glinf"]
    if n == 3:
        return ["3T", "3Q", "hdiff", "nonneg", "conj-gln", "conj-glinf"]
    return ["nonneg", "conj-gln", "conj-glinf"]


def run_suite(suite: str, data, cfg: RunConfig) -> list[relations.RelationReport]:
    n, g, s, seed = data.n, cfg.grid_max, cfg.shifts, cfg.seed
    need = {"2T": 2, "2Q": 2, "3T": 3, "3Q": 3}
    if suite in need and n != need[suite]:
        raise InputError(f"suite {suite} needs n={need[suite]}")
    if suite == "hdiff" and n not in (2, 3):
        raise InputError("suite hdiff needs n=2 or n=3")
    kg = Grid(_k_grid(n, g), _shift_grid(n, s))
    if suite == "2T":
        arr = as_array(data, cfg)
        return [relations.check_2T(TauTable(2, source=arr), kg, seed)]
    if suite == "3T":
        arr = as_array(data, cfg)
        table = TauTable(3, source=arr)
        return [relations.check_3T_three_term(table, kg, seed), relations.check_3T_four_term(table, kg, seed)]
    if suite == "hdiff":
        return [relations.check_h_differences(as_array(data, cfg), kg, seed)]
    if suite == "nonneg":
        return [relations.check_nonneg(as_array(data, cfg), kg, seed)]
    if suite == "conj-glinf":
        return [relations.probe_glinf_grid(as_array(data, cfg), kg, seed)]
    q = as_loop(data, cfg)
    qg = Grid(_k_grid(n, g), _shift_grid(n - 1, s))
    if suite == "2Q":
        return [relations.check_2q_loop(q, qg, seed), relations.check_2T_collapse(q, g, s, seed)]
    if suite == "3Q":
        derived = relations.check_3Q(q, qg, "derived", seed)
        candidate = relations.check_3Q(q, qg, "candidate", seed)
        candidate.conjecture = True  # open parameter map: reported, never asserted
        return [derived, candidate]
    if suite == "conj-gln":
        return [relations.probe_gln_grid(q, qg, seed)]
    raise InputError(f"unknown suite {suite!r}")


def _suite_worker(job):
    suite, data, cfg = job
    return run_suite(suite, data, cfg)


def cmd_check(cfg: RunConfig) -> int:
    data = load_data(cfg)
    suites = applicable_suites(data.n) if cfg.suite == "all" else cfg.suite.split(",")
    for s in suites:
        if s not in SUITES:
            raise InputError(f"unknown suite {s!r}; choose from {', '.join(SUITES)} or all")
    jobs = [(s, data, cfg) for s in suites]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_suite_worker, jobs))
    else:
        results = [_suite_worker(j) for j in jobs]
    reports = [r for group in results for r in group]
    for r in reports:
        print(r.summary())
    if cfg.out:
        Path(cfg.out).write_text(json.dumps({"reports": [r.to_json_obj() for r in reports]}, indent=1, sort_keys=True) + "\n")
    return EXIT_FAIL if any(r.verdict == "fail" for r in reports) else EXIT_PASS


def _rat(v) -> dict:
    num, den = num_den(v)
    return {"num": num, "den": den}


def cmd_factor(cfg: RunConfig) -> int:
    data = load_data(cfg)
    n = data.n
    kv = _int_list(cfg.k, n - 1, "--k")
    sv = _int_list(cfg.shift, n, "--shift")
    out: dict = {"n": n, "k": list(kv), "shift": list(sv)}
    if isinstance(data, lr.QCoefficients):
        try:
            gm, gp = lr.birkhoff_factorize(lr.loop_matrix(data, sv, kv))
        except lr.NoBirkhoff:
            out["factorization"] = None
        else:
            dump = lambda m: [
                {"a": a, "b": b, "power": p, **_rat(v)} for a in range(n) for b in range(n) for p, v in sorted(m.coeffs(a, b).items())
            ]
            out["factorization"] = {"g_minus": dump(gm), "g_plus": dump(gp)}
    else:
        try:
            gp = matgroup.gauss_for(data, kv, sv)
        except matgroup.SingularBlock:
            out["factorization"] = None
        else:
            x = [{"row": list(r), "col": list(c), **_rat(v)} for (r, c), v in sorted(gp.x.items())]
            h = [
                {"a": a, "b": b, "i": i, "j": j, **_rat(v)}
                for (a, b, i, j), v in sorted(matgroup.extract_h(gp).values.items())
            ]
            out["factorization"] = {"K": gp.matrix.K, "x": x, "h": h}
        out["tau"] = _rat(matgroup.tau_minor(data, kv, sv))
    _emit(cfg.out, json.dumps(out, indent=1, sort_keys=True) + "\n")
    return EXIT_PASS


def _emit(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


COMMANDS = {"gen": cmd_gen, "tau": cmd_tau, "check": cmd_check, "factor": cmd_factor}


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="taulab", description="Exact tau-function tables and difference-system checks.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("suite_pos", nargs="?", metavar="SUITE", help="suite for check (same as --suite)")
    S = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="JSON file with default settings")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--box", default=S, help="support box RxC for generated data")
    p.add_argument("--origin", default=S, help="support origin I,J for generated data (write negative values as --origin=-1,-1)")
    p.add_argument("--grid", type=int, default=S, help="largest translation index")
    p.add_argument("--shifts", type=int, default=S, help="largest absolute shift")
    p.add_argument("--methods", default=S, help="comma separated tau methods")
    p.add_argument("--suite", default=S)
    p.add_argument("--input", default=S, help="coefficient JSON file")
    p.add_argument("--out", default=S)
    p.add_argument("--jobs", type=int, default=S)
    p.add_argument("--loop", action="store_true", default=S, help="generate loop (single-index) data")
    p.add_argument("--k", default=S, help="translation vector for factor, e.g. 1,0")
    p.add_argument("--shift", default=S, help="shift vector for factor, e.g. 0,1,0")
    p.add_argument("-v", "--verbose", action="store_true", default=S)
    return p


def make_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    settings: dict = {}
    env_jobs = os.environ.get("TAULAB_JOBS")
    if env_jobs:
        try:
            settings["jobs"] = int(env_jobs)
        except ValueError:
            raise InputError("TAULAB_JOBS must be an integer") from None
    config_path = args.pop("config")
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    suite_pos = args.pop("suite_pos")
    settings.update(args)
    if suite_pos:
        settings["suite"] = suite_pos
    return RunConfig(**settings)


def main(argv=None) -> int:
    try:
        cfg = make_config(argv)
        return COMMANDS[cfg.command](cfg)
    except SystemExit as exc:  # argparse usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    except (InputError, ArrayFormatError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CrossMethodMismatch as exc:
        print(f"method mismatch: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (WindowOverflow, matgroup.WindowTooSmall) as exc:
        print(f"window error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last resort maps to the internal-error code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
