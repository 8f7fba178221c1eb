"""Command-line orchestration.

Subcommands: explain-global (full class-wise synthesis plus artifacts),
explain-local (one instance's explanation with neighbourhood diagnostics),
selftest (bundled oracle suite). Settings resolve as CLI flag > config file
> default; the environment variable L2GTX_SEED is the seed fallback.

Exit codes: 0 ok, 1 internal error, 2 usage/config error, 3 external
predictor protocol or transport error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import ExplainerConfig, PipelineConfig
from .data import DataFormatError, load_ucr_tsv, standardize
from .local import explain_instance
from .predict import ExternalPredictor, ProtocolError, TransportError, fit_nearest_centroid
from .selftest import run_selftest
from .synthesis import run_pipeline

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_PROTOCOL = 3


class ConfigError(ValueError):
    pass


def _parse_percentiles(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError(f"bad percentile list {text!r}") from None
    if not values:
        raise ConfigError("empty percentile list")
    return values


def read_config_file(path) -> dict[str, str]:
    """Plain `key = value` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


# name -> (kind, parser); `kind` tells resolve() where the value lands.
_KEYS = {
    "data": ("run", str),
    "predictor": ("run", str),
    "out": ("run", str),
    "n_inst": ("pipeline", int),
    "budget": ("pipeline", int),
    "percentiles": ("pipeline", _parse_percentiles),
    "seed": ("pipeline", int),
    "jobs": ("pipeline", int),
    "pooled_tau": ("pipeline", lambda v: str(v).lower() in {"1", "true", "yes"}),
    "samples": ("explainer", int),
    "top_n": ("explainer", int),
    "lambda": ("explainer", float),
    "sigma": ("explainer", float),
    "segments": ("explainer", int),
    "k_min": ("explainer", int),
    "k_max": ("explainer", int),
    "temperature": ("run", float),
}
_EXPLAINER_FIELDS = {
    "samples": "n_samples",
    "top_n": "top_n",
    "lambda": "ridge_lambda",
    "sigma": "sigma",
    "segments": "n_segments",
    "k_min": "k_min",
    "k_max": "k_max",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l2gtx",
        description="Class-wise global explanations for time-series classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser):
        p.add_argument("--config", help="key = value settings file")
        p.add_argument("--data", help="UCR-style dataset file")
        p.add_argument(
            "--predictor",
            help="'nearest-centroid' (optionally ':temperature=X') or 'external:<command>'",
        )
        p.add_argument("--n-inst", type=int, dest="n_inst")
        p.add_argument("--budget", type=int)
        p.add_argument("--percentiles", help="comma-separated, e.g. 25,50,75,95")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="artifact output directory")
        p.add_argument("--jobs", type=int, help="explanation worker threads")
        p.add_argument("--lambda", type=float, dest="ridge_lambda")
        p.add_argument("--samples", type=int, help="neighbourhood size")
        p.add_argument("--top-n", type=int, dest="top_n")

    g = sub.add_parser("explain-global", help="run the full pipeline, write artifacts")
    add_common(g)

    l = sub.add_parser("explain-local", help="explain a single instance")
    add_common(l)
    l.add_argument("--index", type=int, required=True, help="dataset instance index")

    sub.add_parser("selftest", help="run the bundled oracle suite")
    return parser


class RunSettings:
    def __init__(self, data: str, predictor: str, out: str, temperature: float,
                 pipeline: PipelineConfig):
        self.data = data
        self.predictor = predictor
        self.out = out
        self.temperature = temperature
        self.pipeline = pipeline


def resolve_settings(args: argparse.Namespace) -> RunSettings:
    file_values: dict[str, str] = {}
    if args.config:
        if not Path(args.config).is_file():
            raise ConfigError(f"config file not found: {args.config}")
        file_values = read_config_file(args.config)
        unknown = set(file_values) - set(_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def pick(name: str, cli_value):
        if cli_value is not None:
            return cli_value
        if name in file_values:
            _, parse = _KEYS[name]
            try:
                return parse(file_values[name])
            except (ValueError, TypeError):
                raise ConfigError(f"bad value for {name!r}: {file_values[name]!r}") from None
        return None

    data = pick("data", args.data)
    if not data:
        raise ConfigError("--data is required")
    predictor = pick("predictor", args.predictor) or "nearest-centroid"
    out = pick("out", args.out) or "out"
    temperature = pick("temperature", None)
    seed = pick("seed", args.seed)
    if seed is None:
        env_seed = os.environ.get("L2GTX_SEED")
        if env_seed is not None:
            try:
                seed = int(env_seed)
            except ValueError:
                raise ConfigError(f"L2GTX_SEED is not an integer: {env_seed!r}") from None
    percentiles = args.percentiles
    if isinstance(percentiles, str):
        percentiles = _parse_percentiles(percentiles)
    elif percentiles is None:
        percentiles = pick("percentiles", None)

    cli_explainer = {
        "samples": args.samples,
        "top_n": args.top_n,
        "lambda": args.ridge_lambda,
        "sigma": None,
        "segments": None,
        "k_min": None,
        "k_max": None,
    }
    explainer_kwargs = {}
    for key, attr in _EXPLAINER_FIELDS.items():
        value = pick(key, cli_explainer[key])
        if value is not None:
            explainer_kwargs[attr] = value

    pipeline_kwargs = {"jobs": os.cpu_count() or 1}
    for key, target in (("n_inst", "n_inst"), ("budget", "budget"), ("jobs", "jobs"),
                        ("pooled_tau", "pooled_tau")):
        value = pick(key, getattr(args, key, None))
        if value is not None:
            pipeline_kwargs[target] = value
    if seed is not None:
        pipeline_kwargs["seed"] = seed
    if percentiles is not None:
        pipeline_kwargs["percentiles"] = tuple(percentiles)
    try:
        pipeline = PipelineConfig(
            explainer=ExplainerConfig(**explainer_kwargs), **pipeline_kwargs
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunSettings(data, predictor, out, temperature, pipeline)


def build_predictor(spec: str, dataset_std, temperature: float | None):
    """Instantiate the predictor named by `spec` (fit on standardised data)."""
    if spec.startswith("external:"):
        command = spec[len("external:"):].strip()
        if not command:
            raise ConfigError("external predictor needs a command line")
        predictor = ExternalPredictor(command)
        if predictor.class_count != dataset_std.class_count:
            predictor.close()
            raise ProtocolError(
                f"external predictor serves {predictor.class_count} classes, "
                f"dataset has {dataset_std.class_count}"
            )
        return predictor
    name, _, params = spec.partition(":")
    if name != "nearest-centroid":
        raise ConfigError(f"unknown predictor {name!r}")
    if params:
        for part in params.split(","):
            key, _, value = part.partition("=")
            if key.strip() != "temperature":
                raise ConfigError(f"unknown predictor parameter {key.strip()!r}")
            try:
                temperature = float(value)
            except ValueError:
                raise ConfigError(f"bad temperature {value!r}") from None
    return fit_nearest_centroid(dataset_std, temperature if temperature else 1.0)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False,
                  default=_json_default)
        fh.write("\n")


def _format_p(p: float) -> str:
    return str(int(p)) if float(p).is_integer() else str(p).replace(".", "_")


def cmd_explain_global(settings: RunSettings) -> int:
    data_path = Path(settings.data)
    if not data_path.is_file():
        raise ConfigError(f"dataset file not found: {data_path}")
    dataset = load_ucr_tsv(data_path)
    dataset_std = standardize(dataset)
    predictor = build_predictor(settings.predictor, dataset_std, settings.temperature)
    try:
        result = run_pipeline(dataset, predictor, settings.pipeline)
    finally:
        if isinstance(predictor, ExternalPredictor):
            predictor.close()

    root = Path(settings.out) / dataset.name / str(settings.pipeline.seed)
    for (label, p), summary in sorted(result.summaries.items()):
        write_json(
            root / f"class_{label}" / f"summary_p{_format_p(p)}.json",
            summary.to_json(),
        )
    write_json(root / "metrics.json", result.metrics)
    for p in settings.pipeline.percentiles:
        rows = ["class,global_id,pep_kind,normalised_importance,attr,mean,std,count"]
        for (label, pp), summary in sorted(result.summaries.items()):
            if pp != p:
                continue
            for cluster in summary.clusters:
                for attr, (mean, std) in cluster.stats.items():
                    rows.append(
                        f"{label},{cluster.global_id},{cluster.kind},"
                        f"{cluster.normalised_importance!r},{attr},{mean!r},{std!r},"
                        f"{cluster.event_count}"
                    )
        csv_path = root / f"plot_{_format_p(p)}.csv"
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text("\n".join(rows) + "\n", encoding="ascii")
    for p in settings.pipeline.percentiles:
        print(f"macro GF (p={_format_p(p)}): {result.macro_gf(p):.6f}")
    return EXIT_OK


def cmd_explain_local(settings: RunSettings, index: int) -> int:
    data_path = Path(settings.data)
    if not data_path.is_file():
        raise ConfigError(f"dataset file not found: {data_path}")
    dataset = load_ucr_tsv(data_path)
    if not 0 <= index < len(dataset):
        raise ConfigError(f"instance index {index} out of range [0, {len(dataset)})")
    dataset_std = standardize(dataset)
    predictor = build_predictor(settings.predictor, dataset_std, settings.temperature)
    try:
        explanation = explain_instance(
            dataset_std.values[index],
            predictor,
            settings.pipeline.explainer,
            settings.pipeline.seed,
            instance_id=index,
        )
    finally:
        if isinstance(predictor, ExternalPredictor):
            predictor.close()
    payload = explanation.to_json()
    payload["diagnostics"] = explanation.diagnostics
    payload["config"] = dict(settings.pipeline.echo(), dataset=dataset.name)
    root = Path(settings.out) / dataset.name / str(settings.pipeline.seed)
    out_path = root / f"local_instance_{index}.json"
    write_json(out_path, payload)
    fid = explanation.fidelity
    print(f"instance {index}: class {explanation.predicted_class}, "
          f"fidelity {'undefined' if fid is None else f'{fid:.4f}'}, "
          f"{len(explanation.clusters)} clusters -> {out_path}")
    return EXIT_OK


def cmd_selftest() -> int:
    results = run_selftest()
    failures = [r for r in results if not r.ok]
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}")
    if failures:
        print(f"{len(failures)} check(s) failed: {', '.join(r.name for r in failures)}",
              file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return cmd_selftest()
        settings = resolve_settings(args)
        if args.command == "explain-global":
            return cmd_explain_global(settings)
        return cmd_explain_local(settings, args.index)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProtocolError, TransportError) as exc:
        print(f"external predictor error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
