"""Command-line front end: ``metricfactors {factors,regress,adversarial,ensemble}``.

Exit status is 0 on success, 1 for configuration/validation errors and
2 for errors raised while processing the data.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

from . import adversarial as adv
from .config import BUILTIN_LEX, ConfigError, RunConfig, load_config
from .conllu import parse_conllu, tagged_words
from .data import (
    CLB,
    FACTOR_ORDER,
    MOR,
    ScoreTable,
    join_factors,
    load_embeddings,
    load_pair_dataset,
    load_score_table,
    read_factor_scores,
    write_factor_scores,
)
from .ensemble import evaluate_ensembles, render_ensemble_table
from .factors import align_trees, clb_scores, factor_maps
from .morph import build_morph_lexicon, load_tagged_words, morph_overlap, retrofit_embeddings
from .regression import clean_json, fit_ols, render_table

log = logging.getLogger("metricfactors")

FACTORS_REPORT = "factors_report.json"


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.+-]+", "_", name)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(clean_json(obj), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def cmd_factors(cfg: RunConfig) -> None:
    cfg.validate_factors()
    pairs = load_pair_dataset(cfg.pairs)
    active = [f for f in FACTOR_ORDER if f in cfg.active]
    report: dict = {"n_pairs": len(pairs), "deactivated": {}}
    x_trees = y_trees = None
    x_parsed = y_parsed = None
    if "SYN" in active or MOR in active:
        x_parsed, y_parsed = parse_conllu(cfg.x_conllu), parse_conllu(cfg.y_conllu)
        x_trees = align_trees(pairs, x_parsed, "x")
        y_trees = align_trees(pairs, y_parsed, "y")
    retro = None
    if MOR in active:
        x_tags = tagged_words(x_parsed, cfg.lowercase)
        y_tags = tagged_words(y_parsed, cfg.lowercase)
        overlap = morph_overlap(x_tags, y_tags)
        report["morph_overlap"] = overlap
        if overlap < cfg.mor_min_overlap:
            reason = (
                f"morphological feature overlap {overlap:.4f} is below "
                f"{cfg.mor_min_overlap}; MOR would not be meaningful"
            )
            log.warning("deactivating MOR: %s", reason)
            report["deactivated"][MOR] = reason
            active.remove(MOR)
        else:
            if cfg.tagged_words is not None:
                words = load_tagged_words(cfg.tagged_words)
                if cfg.lowercase:
                    words = [(w.lower(), f) for w, f in words]
            else:
                words = x_tags + y_tags
            lexicon = build_morph_lexicon(words, cap=cfg.lexicon_cap, seed=cfg.seed)
            base = load_embeddings(cfg.embeddings)
            if cfg.lowercase:
                base = base.casefolded()
            retro = retrofit_embeddings(base, lexicon, cfg.retrofit_iterations)
            report["lexicon_pairs"] = len(lexicon)
    maps, skipped = factor_maps(
        pairs,
        active,
        x_trees=x_trees,
        y_trees=y_trees,
        retro=retro,
        lowercase=cfg.lowercase,
        lex_direction=cfg.lex_direction,
        brevity_penalty=cfg.brevity_penalty,
    )
    report["active"] = active
    report["skipped"] = {f: ids for f, ids in skipped.items() if ids}
    outdir = cfg.out / "factors"
    outdir.mkdir(parents=True, exist_ok=True)
    for f in FACTOR_ORDER:
        stale = outdir / f"{f}.tsv"
        if stale.exists() and f not in active:
            stale.unlink()
    for f in active:
        write_factor_scores(outdir / f"{f}.tsv", f, maps[f])
        log.info("wrote %s (%d values, %d skipped)", outdir / f"{f}.tsv", len(maps[f]), len(skipped[f]))
    _write_json(cfg.out / FACTORS_REPORT, report)


def _load_factor_files(cfg: RunConfig) -> tuple[list[str], dict[str, dict[str, float]]]:
    report_path = cfg.out / FACTORS_REPORT
    if not report_path.is_file():
        raise ConfigError(f"{report_path} not found; run the 'factors' command first")
    report = json.loads(report_path.read_text(encoding="utf-8"))
    active = report["active"]
    maps = {}
    for f in active:
        path = cfg.out / "factors" / f"{f}.tsv"
        if not path.is_file():
            raise ConfigError(f"factor file not found: {path}")
        _, maps[f] = read_factor_scores(path)
    return active, maps


def cmd_regress(cfg: RunConfig) -> None:
    cfg.validate_regress()
    if cfg.pairs is None or not cfg.pairs.is_file():
        raise ConfigError("data.pairs is required to order the regression rows")
    active, maps = _load_factor_files(cfg)
    pairs = load_pair_dataset(cfg.pairs)
    outdir = cfg.out / "regress"
    fits, names, summary = [], [], []
    results = {}
    for metric, path in cfg.metrics.items():
        target = load_score_table(path, metric)
        runs = [(metric, maps)]
        if metric in cfg.clb:
            with_clb = dict(maps)
            with_clb[CLB] = clb_scores(load_score_table(cfg.clb[metric], metric))
            runs.append((f"{metric}+CLB", with_clb))
        metric_fits = []
        for label, factor_maps_ in runs:
            table = join_factors(pairs, factor_maps_, target)
            if cfg.normalize:
                table = table.zscored()
            fit = fit_ols(table)
            metric_fits.append((label, fit))
        results[metric] = metric_fits
    outdir.mkdir(parents=True, exist_ok=True)
    for metric, metric_fits in results.items():
        labels = [label for label, _ in metric_fits]
        mfits = [fit for _, fit in metric_fits]
        docs = []
        for label, fit in metric_fits:
            doc = fit.to_dict()
            doc["label"] = label
            docs.append(doc)
        _write_json(outdir / f"{_slug(metric)}.json", docs if len(docs) > 1 else docs[0])
        (outdir / f"{_slug(metric)}.tsv").write_text(render_table(mfits, labels), encoding="utf-8")
        fits += mfits
        names += labels
        summary += docs
    (outdir / "summary.tsv").write_text(render_table(fits, names), encoding="utf-8")
    _write_json(outdir / "summary.json", summary)


def cmd_adversarial(cfg: RunConfig) -> None:
    cfg.validate_adversarial()
    build_info: dict = {}
    if cfg.adv_triples is not None:
        triples = adv.load_triples(cfg.adv_triples, cfg.lowercase)
        build_info["source"] = "triples"
    else:
        if cfg.adv_mode == "freitag":
            items = adv.load_freitag(cfg.adv_input)
        else:
            items = adv.load_paws(cfg.adv_input)
        built = adv.build_triples(items, cfg.adv_mode, seed=cfg.seed, top_k=cfg.adv_top_k, lowercase=cfg.lowercase)
        triples = built.triples
        build_info.update(source=cfg.adv_mode, skipped=built.skipped, unchanged=built.unchanged)
    if not triples:
        raise ValueError("no adversarial triples")
    n = len(triples)
    build_info["n"] = n
    build_info["mean_lex_ab"] = sum(t.lex_ab for t in triples) / n
    build_info["mean_lex_ac"] = sum(t.lex_ac for t in triples) / n
    tables = {}
    for name, spec in cfg.adv_metrics.items():
        if spec == BUILTIN_LEX:
            tables[name] = adv.lex_metric(triples, cfg.lowercase)
        else:
            tables[name] = (load_score_table(spec[0], name), load_score_table(spec[1], name))
    reports = [adv.evaluate_preferences(triples, ab, ac, metric=name) for name, (ab, ac) in tables.items()]
    outdir = cfg.out / "adversarial"
    outdir.mkdir(parents=True, exist_ok=True)
    adv.write_triples(outdir / "triples.tsv", triples)
    lines = ["metric\tn\tprefer_b\tprefer_c\tties\tmean_gap"]
    for rep in reports:
        _write_json(outdir / f"{_slug(rep.metric)}.json", rep.to_dict())
        (outdir / f"{_slug(rep.metric)}.tsv").write_text(rep.rows_tsv(), encoding="utf-8")
        lines.append(
            f"{rep.metric}\t{len(rep.rows)}\t{rep.prefer_b:.4f}\t{rep.prefer_c:.4f}\t{rep.ties:.4f}\t{rep.mean_gap:.4f}"
        )
    (outdir / "summary.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_json(outdir / "summary.json", {"triples": build_info, "metrics": [r.to_dict() for r in reports]})


def cmd_ensemble(cfg: RunConfig) -> None:
    cfg.validate_ensemble()
    members = {name: load_score_table(path, name) for name, path in cfg.ens_members.items()}
    human = load_score_table(cfg.ens_human, "human")
    groups: dict[str, set[str] | None] = {"all": None}
    if cfg.ens_by_language:
        groups = {}
        for p in load_pair_dataset(cfg.pairs):
            groups.setdefault(p.lang_pair, set()).add(p.id)
    reports = []
    for group, ids in groups.items():
        if ids is None:
            g_members, g_human = members, human
        else:
            g_members = {k: ScoreTable(t.metric, {i: v for i, v in t.scores.items() if i in ids}) for k, t in members.items()}
            g_human = ScoreTable("human", {i: v for i, v in human.scores.items() if i in ids})
        reports += evaluate_ensembles(g_members, g_human, cfg.ens_combos, cfg.ens_normalize_first, group=group)
    outdir = cfg.out / "ensemble"
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "report.json", [r.to_dict() for r in reports])
    (outdir / "report.tsv").write_text(render_ensemble_table(reports), encoding="utf-8")


COMMANDS = {
    "factors": cmd_factors,
    "regress": cmd_regress,
    "adversarial": cmd_adversarial,
    "ensemble": cmd_ensemble,
}


def _add_globals(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--config", default=default, help="TOML run configuration")
    parser.add_argument("--seed", type=int, default=default, help="override the config seed")
    parser.add_argument("--out", default=default, help="override the output directory")
    parser.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metricfactors", description=__doc__.splitlines()[0])
    _add_globals(parser, None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _add_globals(sp, argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if not args.config:
            raise ConfigError("--config is required")
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = Path(args.out)
        COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"metricfactors {args.command}: configuration error: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as e:
        print(f"metricfactors {args.command}: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
