"""qaspan command line: validate, stats, translate, evaluate, inspect.

Exit codes: 0 success, 1 domain failure, 2 input error, 3 backend error.
"""

from __future__ import annotations

import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any

import click
import yaml

from . import __version__
from .align import AlignConfig, NoAlignment, align_answer
from .backends import BackendConfig, BackendError, make_backends
from .languages import default_registry
from .metrics import EvaluationError, evaluate
from .pipeline import (CheckpointError, PipelineConfig, prepare_paragraph,
                       translate_dataset)
from .segmenter import (DEFAULT_ABBREVIATIONS, AnswerOutsideContext, Segmenter,
                        find_answer_sentence, load_abbreviations)
from .squad import (EncodingError, MalformedInput, SquadDataset, parse_dataset,
                    serialize_dataset, stats, validate)
from .synthetic import generate_corpus

log = logging.getLogger("qaspan")

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT, EXIT_BACKEND = 0, 1, 2, 3

# defaults for everything a config file or flag can set
DEFAULTS: dict[str, Any] = {
    "source_lang": "en",
    "target_lang": None,
    "translator": "identity",
    "similarity": "lexical",
    "transliterator": "none",
    "mock_marker": "§",
    "min_score": 0.5,
    "tolerance": 0.01,
    "tolerance_mode": "relative",
    "extend_reference": "running",
    "max_tokens": 40,
    "workers": 1,
    "checkpoint_every": 1,
    "drop_impossible": False,
    "translate_plausible": False,
    "abort_on_backend_failure": True,
    "endpoint": None,
    "translit_endpoint": None,
    "similarity_endpoint": None,
    "cache_path": None,
    "max_retries": 5,
    "backoff_base": 0.5,
    "rate_limit": 0.0,
    "batch_size": 32,
    "timeout": 30.0,
    "languages_file": None,
    "abbreviations_file": None,
    "indent": None,
}


class InputError(Exception):
    pass


def _load_config_file(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"config {path}: expected a mapping")
    flat: dict[str, Any] = {}
    for k, v in raw.items():
        if isinstance(v, dict) and k in ("pipeline", "backend", "backends", "align", "metrics"):
            flat.update(v)
        else:
            flat[k] = v
    unknown = sorted(set(flat) - set(DEFAULTS))
    if unknown:
        raise InputError(f"config {path}: unknown keys {', '.join(unknown)}")
    return flat


def resolve_config(config_file: str | None, **flags: Any) -> dict[str, Any]:
    """defaults < config file < explicitly given flags."""
    cfg = dict(DEFAULTS)
    cfg.update(_load_config_file(config_file))
    cfg.update({k: v for k, v in flags.items() if v is not None})
    return cfg


def _echo_config(cfg: dict[str, Any]) -> None:
    click.echo("resolved config: " + json.dumps(cfg, sort_keys=True, ensure_ascii=False), err=True)


def _read_dataset(path: str) -> SquadDataset:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return parse_dataset(raw)
    except (MalformedInput, EncodingError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _build(cfg: dict[str, Any]):
    try:
        return _build_unchecked(cfg)
    except ValueError as exc:  # out-of-range settings
        raise InputError(str(exc)) from exc


def _build_unchecked(cfg: dict[str, Any]):
    registry = default_registry()
    if cfg["languages_file"]:
        registry.load_file(cfg["languages_file"])
    if not cfg["target_lang"]:
        raise InputError("no target language given (--target or target_lang)")
    try:
        src = registry.get(cfg["source_lang"])
        tgt = registry.get(cfg["target_lang"])
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc
    bcfg = BackendConfig(**{f.name: cfg[f.name] for f in fields(BackendConfig)
                            if f.name in cfg and f.name != "endpoint"},
                         endpoint=cfg["endpoint"])
    tcfg = BackendConfig(**{**asdict(bcfg), "endpoint": cfg["translit_endpoint"] or cfg["endpoint"]})
    scfg = BackendConfig(**{**asdict(bcfg), "endpoint": cfg["similarity_endpoint"] or cfg["endpoint"],
                            "cache_path": None})
    try:
        backends = make_backends(cfg["translator"], cfg["similarity"],
                                 None if cfg["transliterator"] == "none" else cfg["transliterator"],
                                 bcfg, tcfg, scfg, cfg["mock_marker"])
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    pcfg = PipelineConfig(
        target_lang=tgt, source_lang=src, min_score=cfg["min_score"],
        tolerance=cfg["tolerance"], tolerance_mode=cfg["tolerance_mode"],
        extend_reference=cfg["extend_reference"], max_tokens=cfg["max_tokens"],
        workers=cfg["workers"], checkpoint_every=cfg["checkpoint_every"],
        drop_impossible=cfg["drop_impossible"], translate_plausible=cfg["translate_plausible"],
        abort_on_backend_failure=cfg["abort_on_backend_failure"],
    )
    pcfg.align  # validates the alignment settings up front
    abbrevs = (load_abbreviations(cfg["abbreviations_file"]) if cfg["abbreviations_file"]
               else DEFAULT_ABBREVIATIONS)
    return pcfg, backends, Segmenter(abbrevs)


def _guard(fn):
    """Map exceptions to the exit-code contract."""
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except InputError as exc:
            click.echo(f"error: {exc}", err=True)
            code = EXIT_INPUT
        except CheckpointError as exc:
            click.echo(f"error: {exc}", err=True)
            code = EXIT_INPUT
        except BackendError as exc:
            click.echo(f"backend error: {exc}", err=True)
            code = EXIT_BACKEND
        sys.exit(code or EXIT_OK)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


_pipeline_options = [
    click.option("--config", "config_file", type=click.Path(dir_okay=False), help="YAML/JSON config file."),
    click.option("--source", "source_lang", help="Source language code (default en)."),
    click.option("--target", "target_lang", help="Target language code, e.g. mr, hi, ta."),
    click.option("--backend", "translator", type=click.Choice(["identity", "mock", "remote"])),
    click.option("--similarity", type=click.Choice(["lexical", "exact", "embedding"])),
    click.option("--transliterator", type=click.Choice(["none", "identity", "remote"])),
    click.option("--endpoint", help="Translation service URL."),
    click.option("--translit-endpoint"),
    click.option("--similarity-endpoint"),
    click.option("--cache", "cache_path", type=click.Path(dir_okay=False)),
    click.option("--max-retries", type=int),
    click.option("--backoff-base", type=float),
    click.option("--rate-limit", type=float, help="Requests per second (0 = unlimited)."),
    click.option("--batch-size", type=int),
    click.option("--min-score", type=float),
    click.option("--tolerance", type=float),
    click.option("--tolerance-mode", type=click.Choice(["relative", "absolute"])),
    click.option("--extend-reference", type=click.Choice(["running", "base"])),
    click.option("--max-tokens", type=int),
    click.option("--languages", "languages_file", type=click.Path(exists=True, dir_okay=False)),
    click.option("--abbreviations", "abbreviations_file", type=click.Path(exists=True, dir_okay=False)),
]


def pipeline_options(fn):
    for opt in reversed(_pipeline_options):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(__version__)
@click.option("--log-level", default="WARNING", show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
def main(log_level):
    """Translate SQuAD 2.0 datasets with answer-span recovery, and evaluate QA output."""
    logging.basicConfig(level=log_level.upper(), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@main.command("validate")
@click.argument("path")
@_guard
def cmd_validate(path):
    """Check offsets, answerability flags and id uniqueness."""
    ds = _read_dataset(path)
    violations = validate(ds)
    for v in violations:
        click.echo(str(v))
    click.echo(f"{len(violations)} violations")
    return EXIT_DOMAIN if violations else EXIT_OK


@main.command("stats")
@click.argument("paths", nargs=-1, required=True)
@_guard
def cmd_stats(paths):
    """Article, paragraph and QA counts, and the unanswerable share."""
    out = {}
    for path in paths:
        s = stats(_read_dataset(path))
        out[path] = s.as_dict()
        click.echo(f"{path}")
        click.echo(f"  articles     {s.num_articles:>10,}")
        click.echo(f"  paragraphs   {s.num_paragraphs:>10,}")
        click.echo(f"  QAs          {s.num_qas:>10,}")
        click.echo(f"  impossible   {s.num_impossible:>10,}  ({100 * s.pct_impossible:.2f}%)")
    click.echo(json.dumps(out if len(paths) > 1 else out[paths[0]], indent=2))
    return EXIT_OK


@main.command("translate")
@click.argument("input_path")
@click.argument("output_path")
@pipeline_options
@click.option("--workers", type=int)
@click.option("--checkpoint-every", type=int, help="Articles per progress flush.")
@click.option("--drop-impossible/--keep-impossible", default=None)
@click.option("--translate-plausible/--no-translate-plausible", default=None)
@click.option("--abort-on-backend-failure/--drop-on-backend-failure", default=None,
              help="Stop with exit 3 (resumable) or drop affected QAs.")
@click.option("--progress", "progress_path", type=click.Path(dir_okay=False),
              help="Progress file (default OUTPUT.progress.jsonl).")
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="JSON report (default OUTPUT.report.json).")
@click.option("--indent", type=int)
@click.option("--fresh", is_flag=True, help="Discard existing progress and start over.")
def cmd_translate(input_path, output_path, config_file, progress_path, report_path, fresh, **flags):
    """Translate INPUT_PATH into OUTPUT_PATH, resuming from the progress file if present."""
    _guard(_translate)(input_path, output_path, config_file, progress_path, report_path, fresh, flags)


def _translate(input_path, output_path, config_file, progress_path, report_path, fresh, flags):
    cfg = resolve_config(config_file, **flags)
    _echo_config(cfg)
    ds = _read_dataset(input_path)
    violations = validate(ds)
    if violations:
        for v in violations[:20]:
            click.echo(str(v), err=True)
        raise InputError(f"{input_path}: {len(violations)} violations; fix the input first")
    pcfg, backends, segmenter = _build(cfg)
    progress = Path(progress_path or f"{output_path}.progress.jsonl")
    if fresh and progress.exists():
        progress.unlink()
    out, report = translate_dataset(ds, pcfg, backends, progress, segmenter)
    Path(output_path).write_bytes(serialize_dataset(out, cfg["indent"]))
    rpath = Path(report_path or f"{output_path}.report.json")
    rpath.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    click.echo(report.summary())
    bad = validate(out)
    if bad:  # would be a bug in the pipeline
        for v in bad[:20]:
            click.echo(str(v), err=True)
        return EXIT_DOMAIN
    return EXIT_OK


@main.command("evaluate")
@click.argument("dataset_path")
@click.argument("predictions_path")
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
@click.option("--remove-articles", is_flag=True, help="Strip English a/an/the before scoring.")
@click.option("--bleu-mode", type=click.Choice(["corpus", "sentence"]), default="corpus",
              show_default=True)
@_guard
def cmd_evaluate(dataset_path, predictions_path, report_path, remove_articles, bleu_mode):
    """Score a {qa_id: answer} prediction file against a dataset."""
    ds = _read_dataset(dataset_path)
    try:
        preds = json.loads(Path(predictions_path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read predictions {predictions_path}: {exc}") from exc
    if not isinstance(preds, dict) or not all(isinstance(v, str) for v in preds.values()):
        raise InputError(f"{predictions_path}: expected an object mapping id to answer text")
    try:
        rep = evaluate(preds, ds, remove_articles=remove_articles, bleu_mode=bleu_mode)
    except EvaluationError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DOMAIN
    click.echo(rep.table())
    payload = json.dumps(rep.to_dict(), indent=2) + "\n"
    if report_path:
        Path(report_path).write_text(payload, encoding="utf-8")
    else:
        click.echo(payload)
    return EXIT_OK


@main.command("inspect")
@click.argument("input_path")
@click.argument("qa_id")
@pipeline_options
@click.option("--top", "top_k", type=int, default=10, show_default=True)
def cmd_inspect(input_path, qa_id, config_file, top_k, **flags):
    """Print the alignment trace of one QA."""
    _guard(_inspect)(input_path, qa_id, config_file, top_k, flags)


def _inspect(input_path, qa_id, config_file, top_k, flags):
    cfg = resolve_config(config_file, **flags)
    _echo_config(cfg)
    ds = _read_dataset(input_path)
    found = next(((p, q) for p, q in ds.iter_qas() if q.id == qa_id), None)
    if found is None:
        click.echo(f"error: unknown QA id {qa_id!r}", err=True)
        return EXIT_DOMAIN
    par, qa = found
    pcfg, backends, segmenter = _build(cfg)
    state = prepare_paragraph(par, pcfg, backends, segmenter)
    if state.failure:
        raise BackendError(state.failure)
    click.echo(f"qa {qa.id}: {qa.question}")
    if qa.is_impossible:
        click.echo("unanswerable: emitted with translated question and no answers")
        return EXIT_OK
    for k, ans in enumerate(qa.answers):
        click.echo(f"== answer {k}: {ans.text!r} at {ans.answer_start}")
        try:
            first, last = find_answer_sentence(state.sentences, ans.answer_start, len(ans.text))
        except AnswerOutsideContext as exc:
            click.echo(f"AnswerOutsideContext: {exc}")
            continue
        for i in range(first, last + 1):
            click.echo(f"source sentence {i}: {state.sentences[i].text}")
        merged = " ".join(state.translated[first:last + 1])
        click.echo(f"translated sentence: {merged}")
        t_answer = state.lookup.get(ans.text.strip())
        if t_answer is None:
            t_answer = backends.translator.translate(ans.text.strip(), pcfg.source_lang, pcfg.target_lang)
        click.echo(f"translated answer: {t_answer}")
        for line in format_trace(merged, t_answer, backends.similarity, pcfg.align, top_k):
            click.echo(line)
    return EXIT_OK


def format_trace(sentence: str, answer: str, sim, config: AlignConfig, top_k: int = 10) -> list[str]:
    trace: list[dict[str, Any]] = []
    lines = []
    try:
        res = align_answer(sentence, answer, sim, config, trace)
    except NoAlignment as exc:
        res = None
        err = exc
    cands = [t for t in trace if t["event"] == "candidate"]
    if any(t["event"] == "exact" for t in trace):
        lines.append("fast path: translated answer occurs verbatim")
    if cands:
        ranked = sorted(cands, key=lambda t: (-t["score"], t["last_token"] - t["first_token"],
                                              t["first_token"]))
        lines.append(f"candidates scored: {len(cands)}; top {min(top_k, len(cands))}:")
        lines.append("first_token\tlast_token\tscore\ttext")
        for t in ranked[:top_k]:
            lines.append(f"{t['first_token']}\t{t['last_token']}\t{t['score']:.6f}\t{t['text']}")
    for t in trace:
        if t["event"] == "base":
            lines.append(f"base span: tokens {t['first_token']}..{t['last_token']} "
                         f"score {t['score']:.6f} {t['text']!r}")
        elif t["event"] == "extend":
            verdict = "accept" if t["accepted"] else "reject"
            lines.append(f"extend {t['side']:<5} -> tokens {t['first_token']}..{t['last_token']} "
                         f"score {t['score']:.6f} vs reference {t['reference']:.6f}: {verdict}")
    if res is None:
        lines.append(f"NoAlignment: best score {err.best_score:.6f} < min_score {err.min_score}")
    else:
        lines.append(f"result: chars [{res.char_start}, {res.char_end}) {res.span_text!r} "
                     f"score {res.score:.6f} extended={res.extended} exact_match={res.exact_match}")
    return lines


@main.command("generate")
@click.argument("output_path")
@click.option("--qas", "n_qas", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_generate(output_path, n_qas, seed):
    """Write a synthetic multi-script corpus (for smoke tests and benchmarks)."""
    Path(output_path).write_bytes(serialize_dataset(generate_corpus(n_qas, seed)))


if __name__ == "__main__":
    main()
