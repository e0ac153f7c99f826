"""Command-line front end: train, parse, eval, analyze, crossval (and synth)."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__, graph_parser, transition_parser
from .error_analysis import DEFAULT_BINS, parse_bins, run_all_reports
from .evaluation import evaluate
from .modelio import load_model, save_model
from .synthetic import synthetic_treebank
from .treebank import Treebank, fold_indices, read_conll, write_conll, write_fold_manifest

log = logging.getLogger("deplab")

PARSERS = ("graph", "transition")
CONFIG_DEFAULTS = {
    "treebank": None,
    "parser": "both",
    "k": 5,
    "seed": 0,
    "epochs": 10,
    "include_punct": True,
    "strict_root": True,
    "bins": [],
    "out": None,
}


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {s!r}")


def _parsers(kind: str) -> list[str]:
    return list(PARSERS) if kind == "both" else [kind]


def train_model(kind: str, treebank: Treebank, epochs: int, seed: int, strict_root: bool = True):
    if kind == "graph":
        return graph_parser.train_graph_model(treebank, epochs, seed, strict_root=strict_root)
    return transition_parser.train_transition_model(treebank, epochs, seed)


def parse_with(model, treebank: Treebank) -> Treebank:
    if isinstance(model, graph_parser.ArcFactorModel):
        return graph_parser.parse_treebank(model, treebank)
    return transition_parser.parse_treebank(model, treebank)


def write_reports(reports: dict, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    combined = []
    for name, rep in reports.items():
        text = rep.to_text()
        (outdir / f"{name}.txt").write_text(text, encoding="utf-8")
        (outdir / f"{name}.json").write_text(rep.to_json(), encoding="utf-8")
        combined.append(text)
    (outdir / "all_reports.txt").write_text("\n".join(combined), encoding="utf-8")


def _bins(specs) -> dict:
    out = {}
    for s in specs or []:
        b = parse_bins(s)
        if b.factor not in DEFAULT_BINS:
            raise ValueError(f"unknown factor in bin override: {b.factor!r}")
        out[b.factor] = b
    return out


# -- commands --------------------------------------------------------------------

def cmd_train(args) -> int:
    tb = read_conll(args.treebank)
    model = train_model(args.parser, tb, args.epochs, args.seed, args.strict_root)
    save_model(model, args.model)
    print(f"trained {args.parser} model on {len(tb)} sentences -> {args.model}")
    return 0


def cmd_parse(args) -> int:
    model = load_model(args.model)
    tb = read_conll(args.treebank)
    write_conll(parse_with(model, tb), args.out)
    print(f"parsed {len(tb)} sentences -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    res = evaluate(read_conll(args.gold), read_conll(args.pred), include_punct=args.include_punct)
    sys.stdout.write(res.to_text())
    if args.json:
        Path(args.json).write_text(res.to_json(), encoding="utf-8")
    return 0


def cmd_analyze(args) -> int:
    gold = read_conll(args.gold)
    preds = args.pred
    if not 1 <= len(preds) <= 2:
        raise ValueError("analyze takes one or two --pred files")
    names = args.names or [Path(p).stem for p in preds]
    if len(names) != len(preds):
        raise ValueError("--names must match the number of --pred files")
    systems = [(n, read_conll(p)) for n, p in zip(names, preds)]
    reports = run_all_reports(gold, systems, args.include_punct, _bins(args.bins))
    write_reports(reports, Path(args.out))
    print(f"wrote {len(reports)} reports -> {args.out}")
    return 0


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_crossval(cfg: dict) -> dict:
    """Train, parse and analyze every fold; returns the manifest written to ``out``."""
    out = Path(cfg["out"])
    tb = read_conll(cfg["treebank"])
    folds = fold_indices(len(tb), cfg["k"], cfg["seed"])
    parsers = _parsers(cfg["parser"])
    bins = _bins(cfg["bins"])
    for sub in ("predictions", "models", "reports"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    write_fold_manifest(folds, out / "folds.txt")

    gold_parts = [tb.subset(f) for f in folds]
    pooled_gold = Treebank(tuple(s for part in gold_parts for s in part))
    write_conll(pooled_gold, out / "predictions" / "gold.conll")
    pooled = {}
    eval_lines, eval_doc = [], {}
    for kind in parsers:
        (out / "predictions" / kind).mkdir(exist_ok=True)
        (out / "models" / kind).mkdir(exist_ok=True)
        preds = []
        for i, test_idx in enumerate(folds):
            train = tb.subset(sorted(set(range(len(tb))) - set(int(x) for x in test_idx)))
            log.info("%s fold %d: train %d, test %d", kind, i, len(train), len(test_idx))
            model = train_model(kind, train, cfg["epochs"], cfg["seed"], cfg["strict_root"])
            save_model(model, out / "models" / kind / f"fold{i}.model")
            pred = parse_with(model, gold_parts[i])
            write_conll(pred, out / "predictions" / kind / f"fold{i}.conll")
            res = evaluate(gold_parts[i], pred, cfg["include_punct"])
            eval_doc.setdefault(kind, {})[f"fold{i}"] = {"uas": res.uas, "las": res.las, "tokens": res.token_count}
            preds.append(pred)
        pooled[kind] = Treebank(tuple(s for p in preds for s in p))
        write_conll(pooled[kind], out / "predictions" / kind / "pooled.conll")
        res = evaluate(pooled_gold, pooled[kind], cfg["include_punct"])
        eval_doc[kind]["pooled"] = {"uas": res.uas, "las": res.las, "label_accuracy": res.label_accuracy,
                                    "tokens": res.token_count}
        eval_lines.append(f"[{kind}]\n" + res.to_text())

    (out / "reports" / "evaluation.txt").write_text("\n".join(eval_lines), encoding="utf-8")
    (out / "reports" / "evaluation.json").write_text(json.dumps(eval_doc, indent=2, sort_keys=True) + "\n",
                                                     encoding="utf-8")
    write_reports(run_all_reports(pooled_gold, list(pooled.items()), cfg["include_punct"], bins), out / "reports")

    manifest = {
        **{k: cfg[k] for k in CONFIG_DEFAULTS if k != "out"},
        "treebank_sha256": _sha256(cfg["treebank"]),
        "deplab_version": __version__,
        "template_versions": {"graph": graph_parser.TEMPLATE_VERSION,
                              "transition": transition_parser.TEMPLATE_VERSION},
        "folds": [[int(x) for x in f] for f in folds],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def resolve_config(args) -> dict:
    """Defaults, then the optional JSON config file, then explicit flags."""
    cfg = dict(CONFIG_DEFAULTS)
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            file_cfg = json.load(f)
        cfg.update({k: v for k, v in file_cfg.items() if k in CONFIG_DEFAULTS})
    for k in CONFIG_DEFAULTS:
        v = getattr(args, k, None)
        if v is not None and v != []:
            cfg[k] = v
    if not cfg["treebank"]:
        raise ValueError("crossval needs --treebank (or a config file naming one)")
    if not cfg["out"]:
        raise ValueError("crossval needs --out")
    if cfg["parser"] not in (*PARSERS, "both"):
        raise ValueError(f"unknown parser {cfg['parser']!r}")
    if int(cfg["k"]) < 2:
        raise ValueError(f"k must be at least 2, got {cfg['k']}")
    if not Path(cfg["treebank"]).exists():
        raise FileNotFoundError(f"treebank not found: {cfg['treebank']}")
    cfg["k"], cfg["seed"], cfg["epochs"] = int(cfg["k"]), int(cfg["seed"]), int(cfg["epochs"])
    return cfg


def cmd_crossval(args) -> int:
    cfg = resolve_config(args)
    run_crossval(cfg)
    sys.stdout.write((Path(cfg["out"]) / "reports" / "evaluation.txt").read_text(encoding="utf-8"))
    return 0


def cmd_synth(args) -> int:
    write_conll(synthetic_treebank(args.n, args.seed), args.out)
    print(f"wrote {args.n} synthetic sentences -> {args.out}")
    return 0


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deplab", description="Dependency parsing and error analysis laboratory.")
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    p.add_argument("--version", action="version", version=f"deplab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one parser and save the model")
    t.add_argument("--treebank", required=True)
    t.add_argument("--parser", choices=PARSERS, required=True)
    t.add_argument("--model", required=True, help="output model file")
    t.add_argument("--epochs", type=int, default=10)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--strict-root", type=_bool, default=True, metavar="{true|false}")
    t.set_defaults(func=cmd_train)

    q = sub.add_parser("parse", help="parse a CoNLL-X file with a saved model (gold POS is used)")
    q.add_argument("--model", required=True)
    q.add_argument("--treebank", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_parse)

    e = sub.add_parser("eval", help="UAS/LAS of a prediction file")
    e.add_argument("--gold", required=True)
    e.add_argument("--pred", required=True)
    e.add_argument("--include-punct", type=_bool, default=True, metavar="{true|false}")
    e.add_argument("--json", help="also write the result as JSON")
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("analyze", help="factor reports for one or two prediction files")
    a.add_argument("--gold", required=True)
    a.add_argument("--pred", action="append", required=True)
    a.add_argument("--names", nargs="+")
    a.add_argument("--include-punct", type=_bool, default=True, metavar="{true|false}")
    a.add_argument("--bins", action="append", help="bin override, e.g. dependency_length=1,2,3,4+")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("crossval", help="k-fold train/parse/evaluate/analyze for one or both parsers")
    c.add_argument("--config", help="JSON config; a previous run's manifest.json works")
    c.add_argument("--treebank")
    c.add_argument("--parser", choices=(*PARSERS, "both"))
    c.add_argument("--k", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--epochs", type=int)
    c.add_argument("--include-punct", dest="include_punct", type=_bool, metavar="{true|false}")
    c.add_argument("--strict-root", dest="strict_root", type=_bool, metavar="{true|false}")
    c.add_argument("--bins", action="append")
    c.add_argument("--out")
    c.set_defaults(func=cmd_crossval)

    s = sub.add_parser("synth", help="write a synthetic CoNLL-X treebank")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as e:
        print(f"deplab {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
