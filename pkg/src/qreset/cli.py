"""Batch front-end: experiment configs in, CSV artifacts out.

Configs are flat ``key = value`` documents (``#`` comments allowed) that
map onto :class:`RunConfig`.  Recipes name the standard experiments:

* ``pdet``            integrated detection probability vs time, per engine
* ``reset-survival``  restarted survival vs time plus the e^{-alpha T/t_r} line
* ``mfdt-sweep``      mean first-detection time vs restart time
* ``optimal-tr``      -alpha/t_r vs restart time per dissipative model,
                      with an argmin summary
* ``delta-pr``        per-window detection gap between the projective run
                      and each dissipative model

The CLI performs no numerics of its own: every column is an engine
output, rendered to 12 significant digits.  Sweeps fan grid points out
to a thread pool; engine calls are pure, so results are merged back in
value order and the output is byte-identical to a sequential run.

Exit codes: 0 success, 1 validation error, 2 partial sweep failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import alpha, delta_p_r, optimal_tr_nh, survival_prediction
from .dynamics import measured_evolution, nh_survival_series
from .errors import ConfigError, QresetError
from .lattice import LatticeSpec, ModelKind
from .restart import mfdt, reset_pdet, reset_survival

__all__ = [
    "RECIPES",
    "RunConfig",
    "CsvArtifact",
    "PartialSweepError",
    "parse_config",
    "parse_values",
    "run_experiment",
    "sweep",
    "main",
]

RECIPES = ("pdet", "reset-survival", "mfdt-sweep", "optimal-tr", "delta-pr")

_MODEL_CHOICES = ("exact", "model1", "model2", "all")

_INT_KEYS = frozenset({"L", "detector_index", "initial_index", "r", "n_max", "seed"})
_FLOAT_KEYS = frozenset({"tau", "t_r", "horizon"})
_LIST_KEYS = frozenset({"tau_sweep", "tr_sweep"})
_STR_KEYS = frozenset({"model", "output_path"})
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _LIST_KEYS | _STR_KEYS

# Accepted slack when deciding whether t_r sits on the measurement grid.
_GRID_RTOL = 1e-9


class PartialSweepError(QresetError):
    """A grid finished only partially; completed rows were already written."""


@dataclass
class RunConfig:
    """One experiment's knobs, validated on construction.

    ``model`` selects which engines a recipe runs: a single engine name
    or ``all``.  ``r`` and ``t_r`` both describe the restart period and
    are mutually exclusive; ``horizon`` (a physical time) is folded into
    ``n_max`` during parsing.  ``seed`` exists for synthetic-noise test
    fixtures only; the physics is deterministic.
    """

    tau: float
    L: int = 500
    detector_index: int | None = None
    initial_index: int | None = None
    model: str = "all"
    r: int | None = None
    t_r: float | None = None
    n_max: int | None = None
    tau_sweep: tuple[float, ...] | None = None
    tr_sweep: tuple[float, ...] | None = None
    output_path: str | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.detector_index is None:
            self.detector_index = self.L // 2 + 10
        if self.initial_index is None:
            self.initial_index = self.L // 2
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.model not in _MODEL_CHOICES:
            raise ConfigError(
                f"model must be one of {', '.join(_MODEL_CHOICES)}, got {self.model!r}"
            )
        if self.r is not None and self.t_r is not None:
            raise ConfigError("r and t_r are mutually exclusive")
        if self.r is not None and self.r < 1:
            raise ConfigError(f"r must be at least 1, got {self.r}")
        if self.t_r is not None:
            if self.t_r <= 0:
                raise ConfigError(f"t_r must be positive, got {self.t_r}")
            # Projective runs live on the measurement grid, so a restart
            # time must land on it whenever the exact engine is in play.
            if self.model in ("exact", "all") and not self._on_grid(self.t_r):
                raise ConfigError(
                    f"t_r={self.t_r} is not an integer multiple of tau={self.tau}"
                )
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError(f"n_max must be at least 1, got {self.n_max}")
        for name, values in (("tau_sweep", self.tau_sweep), ("tr_sweep", self.tr_sweep)):
            if values is None:
                continue
            if len(values) == 0:
                raise ConfigError(f"{name} must not be empty")
            if any(v <= 0 for v in values):
                raise ConfigError(f"{name} values must be positive")
        try:
            self.lattice()
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def _on_grid(self, t_r: float) -> bool:
        ratio = t_r / self.tau
        return abs(ratio - round(ratio)) <= _GRID_RTOL * max(1.0, abs(ratio))

    def lattice(self) -> LatticeSpec:
        return LatticeSpec(
            L=self.L,
            detector_index=self.detector_index,
            initial_index=self.initial_index,
        )

    def engine_kinds(self) -> tuple[ModelKind, ...]:
        if self.model == "all":
            return (ModelKind.EXACT, ModelKind.MODEL1, ModelKind.MODEL2)
        return (ModelKind(self.model),)

    def dissipative_kinds(self) -> tuple[ModelKind, ...]:
        return tuple(k for k in self.engine_kinds() if k is not ModelKind.EXACT)

    def resolve_r(self) -> int:
        """Restart period in measurements, from ``r`` or a grid-aligned ``t_r``."""
        if self.r is not None:
            return self.r
        if self.t_r is None:
            raise ConfigError("this recipe needs a restart period: set r or t_r")
        if not self._on_grid(self.t_r):
            raise ConfigError(
                f"t_r={self.t_r} is not an integer multiple of tau={self.tau}"
            )
        return int(round(self.t_r / self.tau))

    def n_measurements(self) -> int:
        if self.n_max is None:
            raise ConfigError("this recipe needs a run length: set n_max or horizon")
        return self.n_max


def _as_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key} expects an integer, got {text!r}") from None


def _as_float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key} expects a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {text!r}")
    return value


def parse_values(text: str) -> tuple[float, ...]:
    """Value list: ``v1,v2,...`` or an inclusive ``start:stop:step`` range."""
    text = text.strip()
    if not text:
        raise ConfigError("empty value list")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"ranges use start:stop:step, got {text!r}")
        start, stop, step = (_as_float("range bound", p.strip()) for p in parts)
        if step <= 0:
            raise ConfigError(f"range step must be positive, got {step}")
        if stop < start:
            raise ConfigError(f"range stop {stop} is below start {start}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = tuple(start + i * step for i in range(count))
    else:
        values = tuple(_as_float("sweep value", p.strip()) for p in text.split(","))
    if any(v <= 0 for v in values):
        raise ConfigError(f"sweep values must be positive: {text!r}")
    return values


def parse_config(text: str) -> RunConfig:
    """Parse a flat ``key = value`` document into a validated RunConfig.

    Unknown and duplicate keys are errors; nothing is silently ignored.
    """
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = key.strip(), value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        entries[key] = value

    if "tau" not in entries:
        raise ConfigError("missing required key 'tau'")
    if "n_max" in entries and "horizon" in entries:
        raise ConfigError("n_max and horizon are mutually exclusive")

    kwargs: dict[str, object] = {}
    for key, value in entries.items():
        if key == "horizon":
            continue
        if key in _INT_KEYS:
            kwargs[key] = _as_int(key, value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = _as_float(key, value)
        elif key in _LIST_KEYS:
            kwargs[key] = parse_values(value)
        else:
            kwargs[key] = value

    if "horizon" in entries:
        horizon = _as_float("horizon", entries["horizon"])
        tau = kwargs["tau"]
        if not isinstance(tau, float) or tau <= 0:
            raise ConfigError(f"tau must be positive, got {tau}")
        n_max = int(math.floor(horizon / tau + 1e-9))
        if n_max < 1:
            raise ConfigError(
                f"horizon {horizon} is shorter than one measurement interval tau={tau}"
            )
        kwargs["n_max"] = n_max

    return RunConfig(**kwargs)  # type: ignore[arg-type]


@dataclass
class CsvArtifact:
    """One CSV file: header, rows, and the formatting contract.

    Numeric cells render as 12-significant-digit decimals; when the
    first column is numeric it must increase strictly row to row, and
    every numeric value must be finite.
    """

    path: Path
    header: tuple[str, ...]
    rows: list[tuple]

    def write(self) -> Path:
        lines = [",".join(self.header)]
        prev_lead: float | None = None
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError(
                    f"{self.path.name}: row width {len(row)} does not match "
                    f"header width {len(self.header)}"
                )
            cells = []
            for cell in row:
                if isinstance(cell, str):
                    cells.append(cell)
                    continue
                value = float(cell)
                if not math.isfinite(value):
                    raise ValueError(f"{self.path.name}: non-finite value in row {row}")
                cells.append(f"{value:.12g}")
            lead = row[0]
            if not isinstance(lead, str):
                lead = float(lead)
                if prev_lead is not None and lead <= prev_lead:
                    raise ValueError(
                        f"{self.path.name}: first column must increase strictly "
                        f"({lead} after {prev_lead})"
                    )
                prev_lead = lead
            lines.append(",".join(cells))
        self.path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return self.path


def _stem(config: RunConfig, default: str, tag: str) -> str:
    return f"{config.output_path or default}{tag}"


def _build_pdet(config: RunConfig, out_dir: Path, tag: str) -> list[CsvArtifact]:
    spec = config.lattice()
    n = config.n_measurements()
    header = ["T"]
    columns = []
    times = None
    for kind in config.engine_kinds():
        if kind is ModelKind.EXACT:
            series = measured_evolution(spec, config.tau, n)
        else:
            series = nh_survival_series(spec, kind, config.tau, n)
        header.append(f"Pdet_{kind.value}")
        columns.append(series.Pdet)
        if times is None:
            times = series.times
    rows = [tuple(row) for row in zip(times, *columns)]
    artifact = CsvArtifact(
        out_dir / f"{_stem(config, 'pdet', tag)}.csv", tuple(header), rows
    )
    artifact.write()
    return [artifact]


def _build_reset_survival(config: RunConfig, out_dir: Path, tag: str) -> list[CsvArtifact]:
    spec = config.lattice()
    n = config.n_measurements()
    r = config.resolve_r()
    base = measured_evolution(spec, config.tau, r)
    trajectory = reset_survival(base, r, n)
    times = config.tau * np.arange(1, n + 1)
    decay = alpha(ModelKind.MODEL2, spec, config.tau, r * config.tau)
    predicted = survival_prediction(decay.alpha, decay.t_r, times)
    rows = [tuple(row) for row in zip(times, trajectory, predicted)]
    artifact = CsvArtifact(
        out_dir / f"{_stem(config, 'reset_survival', tag)}.csv",
        ("T", "P_exact", "P_nh_predicted"),
        rows,
    )
    artifact.write()
    return [artifact]


def _build_mfdt_sweep(config: RunConfig, out_dir: Path, tag: str) -> list[CsvArtifact]:
    if not config.tr_sweep:
        raise ConfigError("mfdt-sweep needs tr_sweep (config key or --sweep-tr)")
    spec = config.lattice()
    tau = config.tau
    r_values = []
    for t_r in config.tr_sweep:
        ratio = t_r / tau
        r = int(round(ratio))
        if abs(ratio - r) > _GRID_RTOL * max(1.0, abs(ratio)) or r < 1:
            raise ConfigError(
                f"tr_sweep value {t_r:g} is not an integer multiple of tau={tau:g}"
            )
        r_values.append(r)
    base = measured_evolution(spec, tau, max(r_values))
    rows: list[tuple] = []
    artifact = CsvArtifact(
        out_dir / f"{_stem(config, 'mfdt_sweep', tag)}.csv", ("t_r", "MFDT"), rows
    )
    for t_r, r in zip(config.tr_sweep, r_values):
        try:
            rows.append((t_r, mfdt(base, r, tau)))
        except QresetError as err:
            artifact.write()
            raise PartialSweepError(
                f"mfdt-sweep failed at t_r={t_r:g}: {err}"
            ) from err
    artifact.write()
    return [artifact]


def _build_optimal_tr(config: RunConfig, out_dir: Path, tag: str) -> list[CsvArtifact]:
    if not config.tr_sweep:
        raise ConfigError("optimal-tr needs tr_sweep (config key or --sweep-tr)")
    kinds = config.dissipative_kinds()
    if not kinds:
        raise ConfigError("optimal-tr needs a dissipative model: model1, model2, or all")
    spec = config.lattice()
    stem = _stem(config, "optimal_tr", tag)
    artifacts = []
    summary_rows: list[tuple] = []
    for kind in kinds:
        result = optimal_tr_nh(kind, spec, config.tau, config.tr_sweep)
        # Fully absorbed grid points carry no objective; leave them out.
        rows = [
            (t_r, objective)
            for t_r, objective in zip(result.grid, result.objective)
            if math.isfinite(objective)
        ]
        artifact = CsvArtifact(
            out_dir / f"{stem}_{kind.value}.csv",
            ("t_r", "neg_alpha_over_tr"),
            rows,
        )
        artifact.write()
        artifacts.append(artifact)
        summary_rows.append((kind.value, result.t_star))
    summary = CsvArtifact(
        out_dir / f"{stem}_summary.csv", ("model", "t_star"), summary_rows
    )
    summary.write()
    artifacts.append(summary)
    return artifacts


def _build_delta_pr(config: RunConfig, out_dir: Path, tag: str) -> list[CsvArtifact]:
    kinds = config.dissipative_kinds()
    if not kinds:
        raise ConfigError("delta-pr needs a dissipative model: model1, model2, or all")
    spec = config.lattice()
    r = config.resolve_r()
    n = config.n_measurements()
    R_max = n // r
    if R_max < 1:
        raise ConfigError(
            f"run length n_max={n} is shorter than one restart window of r={r}"
        )
    needed = r * R_max
    base = measured_evolution(spec, config.tau, r)
    exact_curve = reset_pdet(base, r, needed)
    header = ["R"]
    columns = []
    for kind in kinds:
        nh_base = nh_survival_series(spec, kind, config.tau, r)
        report = delta_p_r(
            exact_curve, reset_pdet(nh_base, r, needed), r, config.tau, R_max
        )
        header.append(f"delta_pr_{kind.value}")
        columns.append(report.delta)
    rows = [tuple(row) for row in zip(range(1, R_max + 1), *columns)]
    artifact = CsvArtifact(
        out_dir / f"{_stem(config, 'delta_pr', tag)}.csv", tuple(header), rows
    )
    artifact.write()
    return [artifact]


_RECIPE_BUILDERS = {
    "pdet": _build_pdet,
    "reset-survival": _build_reset_survival,
    "mfdt-sweep": _build_mfdt_sweep,
    "optimal-tr": _build_optimal_tr,
    "delta-pr": _build_delta_pr,
}


def run_experiment(
    config: RunConfig, recipe: str, out_dir: Path | str = ".", tag: str = ""
) -> list[CsvArtifact]:
    """Run one recipe and write its artifacts under ``out_dir``.

    ``tag`` is appended to every filename stem; sweeps use it to embed
    the swept value.
    """
    if recipe not in _RECIPE_BUILDERS:
        raise ConfigError(
            f"unknown recipe {recipe!r}; choose from {', '.join(RECIPES)}"
        )
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    return _RECIPE_BUILDERS[recipe](config, out_path, tag)


def sweep(
    config: RunConfig,
    recipe: str,
    axis: str,
    values: Sequence[float],
    out_dir: Path | str = ".",
    workers: int = 1,
) -> tuple[list[CsvArtifact], list[str]]:
    """Run a recipe once per value of ``axis`` (``tau`` or ``t_r``).

    Grid points run independently (in a thread pool when workers > 1);
    results and failures are collected in value order, so output is
    deterministic under any schedule.  Failures go to ``errors.log`` in
    ``out_dir``, one line per failed value; completed artifacts stay.
    """
    if axis not in ("tau", "t_r"):
        raise ValueError(f"sweep axis must be 'tau' or 't_r', got {axis!r}")
    values = tuple(float(v) for v in values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    if any(v <= 0 for v in values):
        raise ConfigError("sweep values must be positive")
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)

    def one(value: float) -> list[CsvArtifact]:
        if axis == "tau":
            derived = replace(config, tau=value)
            tag = f"_tau{value:g}"
        else:
            derived = replace(config, r=None, t_r=value)
            tag = f"_tr{value:g}"
        return run_experiment(derived, recipe, out_path, tag=tag)

    outcomes: list[list[CsvArtifact] | Exception] = [None] * len(values)  # type: ignore[list-item]
    if workers <= 1:
        for i, value in enumerate(values):
            try:
                outcomes[i] = one(value)
            except Exception as err:  # recorded per grid point, run continues
                outcomes[i] = err
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(one, value) for value in values]
            for i, future in enumerate(futures):
                try:
                    outcomes[i] = future.result()
                except Exception as err:
                    outcomes[i] = err

    artifacts: list[CsvArtifact] = []
    failures: list[str] = []
    for value, outcome in zip(values, outcomes):
        if isinstance(outcome, Exception):
            failures.append(f"{axis}={value:g}: {outcome}")
        else:
            artifacts.extend(outcome)
    if failures:
        (out_path / "errors.log").write_text(
            "\n".join(failures) + "\n", encoding="utf-8"
        )
    return artifacts, failures


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which would collide with
    # the partial-sweep exit code; route usage errors through ConfigError.
    def error(self, message: str):  # type: ignore[override]
        raise ConfigError(message)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _ArgumentParser(
        prog="qreset",
        description="First-detection and sharp-restart experiments on a tight-binding chain.",
    )
    parser.add_argument("recipe", choices=RECIPES, help="experiment to run")
    parser.add_argument("--config", required=True, metavar="PATH", help="key = value config file")
    parser.add_argument("--out", default=".", metavar="DIR", help="artifact directory")
    parser.add_argument("--sweep-tau", metavar="VALUES", help="override tau_sweep")
    parser.add_argument("--sweep-tr", metavar="VALUES", help="override tr_sweep")
    parser.add_argument("--workers", type=int, default=1, help="parallel grid points")

    try:
        args = parser.parse_args(argv)
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from err
        config = parse_config(text)
        if args.sweep_tau:
            config = replace(config, tau_sweep=parse_values(args.sweep_tau))
        if args.sweep_tr:
            config = replace(config, tr_sweep=parse_values(args.sweep_tr))
        if args.workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {args.workers}")

        # mfdt-sweep and optimal-tr consume tr_sweep as their row grid, so
        # only tau can fan out into files; other recipes sweep either axis.
        if args.recipe in ("mfdt-sweep", "optimal-tr"):
            plan = ("tau", config.tau_sweep) if config.tau_sweep else None
        elif config.tau_sweep and config.tr_sweep:
            raise ConfigError(
                f"tau_sweep and tr_sweep are mutually exclusive for {args.recipe}"
            )
        elif config.tau_sweep:
            plan = ("tau", config.tau_sweep)
        elif config.tr_sweep:
            plan = ("t_r", config.tr_sweep)
        else:
            plan = None

        if plan is None:
            run_experiment(config, args.recipe, args.out)
            return 0
        axis, values = plan
        _, failures = sweep(
            config, args.recipe, axis, values, args.out, workers=args.workers
        )
        if failures:
            for line in failures:
                print(f"error: {line}", file=sys.stderr)
            return 2
        return 0
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except PartialSweepError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (QresetError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
