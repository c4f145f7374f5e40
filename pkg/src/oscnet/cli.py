"""Command-line entry points.

Commands
--------
properties   run every catalog scan, write JSON + CSV reports, exit nonzero on
             any measured-vs-descriptor contradiction
xor          train a single neuron on XOR (grid-search fallback), export the
             certificate JSON and decision-boundary CSV
bench        run the (activation x conv_layers) benchmark matrix on CIFAR-10,
             streaming one JSON record per epoch plus a summary table
emit-plots   reshape benchmark records into plottable long-format CSV series

Exit codes: 0 ok, 2 config error, 3 data error, 4 property contradiction,
5 XOR failure (neither training nor grid search produced a valid certificate).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cifar, network, properties, xorlab
from .activations import ActivationId, all_ids
from .errors import ConfigError, DataFormatError
from .network import NetworkConfig, adam_init, build_model, evaluate_top1, train_epoch

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PROPERTY = 4
EXIT_XOR = 5


@dataclass
class BenchConfig:
    activations: list
    conv_layers: list
    epochs: int = 25
    batch: int = 64
    lr: float = 1e-4
    subset: int | None = None
    seed: int = 0
    out_dir: Path = Path(".")
    deterministic: bool = False

    def __post_init__(self):
        if self.epochs <= 0 or self.batch <= 0 or self.lr <= 0:
            raise ConfigError("epochs, batch and lr must be positive")
        for d in self.conv_layers:
            if d not in (1, 2, 3, 4):
                raise ConfigError(f"conv-layers entries must be 1..4, got {d}")


def _parse_one_activation(name: str) -> ActivationId:
    try:
        return ActivationId(name.strip())
    except ValueError:
        valid = ", ".join(a.value for a in all_ids())
        raise ConfigError(f"unknown activation {name!r}; valid: {valid}")


def _parse_activations(text: str) -> list:
    if text == "all":
        return list(all_ids())
    return [_parse_one_activation(name) for name in text.split(",")]


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_properties(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = properties.verify_catalog()
    (out / "properties.json").write_text(properties.report_to_json(rows) + "\n")
    properties.write_report_csv(rows, out / "properties.csv")
    failures = [(r.id.value, c) for r in rows for c in r.contradictions]
    for ident, prop in failures:
        print(f"contradiction: {ident}: {prop}", file=sys.stderr)
    print(f"properties: {len(rows)} activations checked, "
          f"{len(failures)} contradictions -> {out}")
    return EXIT_PROPERTY if failures else EXIT_OK


def cmd_xor(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ident = _parse_one_activation(args.activation)
    spec = xorlab.TrainSpec(learning_rate=args.lr, epochs=args.epochs,
                            restarts=args.restarts, seed=args.seed,
                            init_scale=args.init_scale)
    cert, _trace = xorlab.train_single_neuron(ident, spec)
    trained = cert.valid
    source = "trained"
    if not trained:
        grid_cert = xorlab.grid_search_certificate(ident, args.bound, args.resolution)
        if grid_cert.valid:
            cert, source = grid_cert, "grid"

    stem = out / f"xor_{ident.value}"
    xorlab.write_certificate_json(f"{stem}_certificate.json", cert, source=source)
    xorlab.write_boundary_csv(f"{stem}_boundary.csv", cert.neuron)
    if cert.valid:
        print(f"xor {ident.value}: valid certificate via {source} "
              f"(w={cert.neuron.w}, b={cert.neuron.b})")
        return EXIT_OK
    print(f"xor {ident.value}: training failed and grid search failed "
          f"(best {cert.correct}/4)", file=sys.stderr)
    return EXIT_XOR


def _bench_cell(activation: ActivationId, depth: int, cfg: BenchConfig,
                train_ds, test_ds, records_fh) -> dict:
    model = build_model(NetworkConfig(depth, activation, seed=cfg.seed))
    state = adam_init(model.params)
    rng = np.random.default_rng(cfg.seed + 1)
    acc_by_epoch = {}
    status = "ok"
    cell_start = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        try:
            loss = train_epoch(model, train_ds.images, train_ds.labels,
                               state, cfg.lr, rng, batch=cfg.batch)
        except network.DivergenceError as exc:
            status = f"diverged at epoch {epoch} ({exc})"
            break
        acc = evaluate_top1(model, test_ds.images, test_ds.labels)
        acc_by_epoch[epoch] = acc
        record = {
            "activation": activation.value,
            "conv_layers": depth,
            "epoch": epoch,
            "train_loss": loss,
            "test_top1": acc,
            "wall_seconds": 0.0 if cfg.deterministic else time.perf_counter() - t0,
        }
        records_fh.write(json.dumps(record, sort_keys=True) + "\n")
        records_fh.flush()
    return {
        "activation": activation.value,
        "conv_layers": depth,
        "status": status,
        "acc_epoch_20": acc_by_epoch.get(20),
        "acc_epoch_25": acc_by_epoch.get(25),
        "acc_final": acc_by_epoch.get(max(acc_by_epoch)) if acc_by_epoch else None,
        "acc_best": max(acc_by_epoch.values()) if acc_by_epoch else None,
        "wall_seconds": 0.0 if cfg.deterministic else time.perf_counter() - cell_start,
    }


def cmd_bench(args) -> int:
    data_dir = args.data_dir or os.environ.get("OSC_DATA_DIR")
    if not data_dir:
        raise ConfigError("bench needs --data-dir or OSC_DATA_DIR")
    cfg = BenchConfig(
        activations=_parse_activations(args.activations),
        conv_layers=[int(x) for x in args.conv_layers.split(",")],
        epochs=args.epochs, batch=args.batch, lr=args.lr,
        subset=args.subset, seed=args.seed, out_dir=Path(args.out_dir),
        deterministic=args.deterministic)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)

    train_ds, test_ds = cifar.load_cifar10(data_dir)
    if cfg.subset:
        train_ds = cifar.stratified_subset(train_ds, cfg.subset, cfg.seed)
        test_n = min(len(test_ds), max(cfg.subset // 5, cifar.NUM_CLASSES))
        test_n -= test_n % cifar.NUM_CLASSES
        test_ds = cifar.stratified_subset(test_ds, test_n, cfg.seed)

    summaries = []
    with open(cfg.out_dir / "records.jsonl", "w") as records_fh:
        for activation in cfg.activations:
            for depth in cfg.conv_layers:
                summary = _bench_cell(activation, depth, cfg, train_ds, test_ds, records_fh)
                summaries.append(summary)
                print(f"bench {activation.value} conv={depth}: {summary['status']}, "
                      f"final top-1 {summary['acc_final']}")
    _write_json(cfg.out_dir / "summary.json", summaries)
    with open(cfg.out_dir / "summary.csv", "w") as fh:
        fh.write("activation,conv_layers,status,acc_epoch_20,acc_epoch_25,acc_final,acc_best\n")
        for s in summaries:
            fh.write(f"{s['activation']},{s['conv_layers']},{s['status']},"
                     f"{s['acc_epoch_20']},{s['acc_epoch_25']},{s['acc_final']},{s['acc_best']}\n")
    return EXIT_OK


def _read_records(path: Path) -> list:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                rows.append((row["activation"], int(row["conv_layers"]),
                             int(row["epoch"]), float(row["test_top1"])))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataFormatError(f"bad record at line {lineno}: {exc}")
    return rows


def cmd_emit_plots(args) -> int:
    records = Path(args.records)
    if not records.is_file():
        raise DataFormatError(f"records file not found: {records}")
    rows = _read_records(records)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    with open(out / "accuracy_vs_epoch.csv", "w") as fh:
        fh.write("activation,conv_layers,epoch,test_top1\n")
        for act, depth, epoch, acc in rows:
            fh.write(f"{act},{depth},{epoch},{acc!r}\n")

    final: dict = {}
    for act, depth, epoch, acc in rows:
        key = (act, depth)
        if key not in final or epoch > final[key][0]:
            final[key] = (epoch, acc)
    with open(out / "accuracy_vs_depth.csv", "w") as fh:
        fh.write("activation,conv_layers,test_top1\n")
        for (act, depth), (_, acc) in sorted(final.items()):
            fh.write(f"{act},{depth},{acc!r}\n")
    n_series = len({act for act, *_ in rows})
    print(f"emit-plots: {len(rows)} records, {n_series} activation series -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oscnet", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("properties", help="verify the activation catalog")
    sp.add_argument("--out-dir", default="out")
    sp.set_defaults(func=cmd_properties)

    sx = sub.add_parser("xor", help="certify single-neuron XOR learnability")
    sx.add_argument("activation", help="activation id, e.g. squ, gcu, tanh")
    sx.add_argument("--out-dir", default="out")
    sx.add_argument("--lr", type=float, default=0.05)
    sx.add_argument("--epochs", type=int, default=2000)
    sx.add_argument("--restarts", type=int, default=20)
    sx.add_argument("--seed", type=int, default=7)
    sx.add_argument("--init-scale", type=float, default=1.0)
    sx.add_argument("--bound", type=float, default=5.0)
    sx.add_argument("--resolution", type=float, default=0.1)
    sx.set_defaults(func=cmd_xor)

    sb = sub.add_parser("bench", help="run the CNN benchmark matrix")
    sb.add_argument("--data-dir", default=None,
                    help="CIFAR-10 binary archive dir (or env OSC_DATA_DIR)")
    sb.add_argument("--out-dir", default="out")
    sb.add_argument("--activations", default="all")
    sb.add_argument("--conv-layers", default="1,2,3,4")
    sb.add_argument("--epochs", type=int, default=25)
    sb.add_argument("--batch", type=int, default=64)
    sb.add_argument("--lr", type=float, default=1e-4)
    sb.add_argument("--subset", type=int, default=None)
    sb.add_argument("--seed", type=int, default=0)
    sb.add_argument("--deterministic", action="store_true")
    sb.set_defaults(func=cmd_bench)

    se = sub.add_parser("emit-plots", help="reshape bench records into CSV series")
    se.add_argument("--records", required=True)
    se.add_argument("--out-dir", default="out")
    se.set_defaults(func=cmd_emit_plots)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:  # invalid flag values (TrainSpec, Interval, ...)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
