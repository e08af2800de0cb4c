"""Command line entry point: run, evaluate, build-sft-data, serve-stub."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import statistics
import sys

from .core import BoundaryConfig, SessionTrace, build_corpus, read_lines, split_words
from .data import MODES, dump_jsonl, emit_sft_dataset, load_jsonl
from .errors import ShapeMismatch, SimulMTError
from .metrics import (
    LEVELS,
    average_lagging,
    computation_aware_al,
    corpus_bleu,
    difficulty_partition,
    hallucination_rate,
    read_pharaoh,
)
from .orchestrator import SessionConfig, SourceStream, run_corpus
from .policy import ScriptedAgent, WaitKAgent, word_policy_from_record
from .translator import ChatCompletionTransport, HttpTranslator, MockTranslator, PromptTemplate, load_lexicon, make_instruction

log = logging.getLogger("simulmt")


def _template(path):
    return PromptTemplate.from_file(path) if path else PromptTemplate()


def _policy_factory(spec: str, sources, cfg: BoundaryConfig):
    kind, _, arg = spec.partition(":")
    if kind == "waitk":
        agent = WaitKAgent(int(arg))
        return lambda n, words: agent
    if kind not in ("scripted", "tokenfile"):
        raise SystemExit(f"unknown policy {spec!r}; use waitk:K, scripted:FILE or tokenfile:FILE")
    records = load_jsonl(arg)
    if len(records) != len(sources):
        raise ShapeMismatch(f"{len(records)} policy records for {len(sources)} source lines")
    policies = []
    for n, (rec, words) in enumerate(zip(records, sources)):
        if kind == "scripted":
            g = rec["g"]
        else:
            pair, wp = word_policy_from_record(rec, cfg)
            if pair.J != len(words):
                raise ShapeMismatch(f"line {n + 1}: policy covers {pair.J} source words, corpus has {len(words)}")
            g = wp.g
        policies.append(g)
    return lambda n, words: ScriptedAgent(policies[n], len(words))


def _translator_factory(args):
    if args.translator == "mock":
        mock = MockTranslator(load_lexicon(args.lexicon) if args.lexicon else {}, args.length_cap)
        return lambda n, words: mock.with_cap(min(args.length_cap, len(words)))
    if args.translator.startswith("http:"):
        url = args.translator[len("http:"):]
        transport = ChatCompletionTransport() if args.protocol == "chat" else None
        agent = HttpTranslator(url, _template(args.template), timeout_ms=args.timeout_ms, transport=transport)
        return lambda n, words: agent
    raise SystemExit(f"unknown translator {args.translator!r}; use mock or http:URL")


def cmd_run(args) -> int:
    lines = [line for line in read_lines(args.source) if line.strip()]
    if args.timestamped:
        corpus = [SourceStream.from_timestamp_line(line) for line in lines]
        sources = [s.words for s in corpus]
    else:
        corpus = sources = [split_words(line) for line in lines]

    policy_factory = _policy_factory(args.policy, sources, BoundaryConfig(args.boundary_min, args.boundary_max))
    cfg = SessionConfig(args.max_target_words, args.arrival_interval_ms, args.abort_on_error)
    instruction = make_instruction(args.src_lang, args.tgt_lang)
    traces = run_corpus(corpus, policy_factory, _translator_factory(args), instruction, cfg, args.parallelism)

    out = sys.stdout if args.output == "-" else open(args.output, "w", encoding="utf-8")
    try:
        for n, tr in enumerate(traces):
            out.write(json.dumps({"index": n, **tr.to_dict()}, ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    failed = sum(tr.error is not None for tr in traces)
    log.info("%d sessions, %d failed", len(traces), failed)
    return 0


def load_traces(path) -> list[SessionTrace]:
    return [SessionTrace.from_dict(rec) for rec in load_jsonl(path)]


def evaluate(traces, references, alignments=None, reference_alignments=None) -> list[dict]:
    """One report row for the whole corpus plus one per difficulty level.

    Lagging is averaged over sentences with a non-empty, error-free
    translation; BLEU counts every sentence.
    """
    if len(traces) != len(references):
        raise ShapeMismatch(f"{len(traces)} traces vs {len(references)} references")
    if alignments is not None and len(alignments) != len(traces):
        raise ShapeMismatch(f"{len(alignments)} alignment lines for {len(traces)} traces")

    subsets = [("all", list(range(len(traces))))]
    if reference_alignments is not None:
        if len(reference_alignments) != len(traces):
            raise ShapeMismatch(f"{len(reference_alignments)} reference alignment lines for {len(traces)} traces")
        part = difficulty_partition([(tr.J, len(ref)) for tr, ref in zip(traces, references)], reference_alignments)
        subsets += [(level, part.indices(level)) for level in LEVELS]

    rows = []
    for name, idx in subsets:
        ok = [i for i in idx if traces[i].translation and traces[i].error is None]
        row = {"subset": name, "sentences": len(idx), "scored": len(ok)}
        row["AL"] = statistics.fmean(average_lagging(traces[i].realized_policy, traces[i].J) for i in ok) if ok else float("nan")
        try:
            row["AL_CA"] = statistics.fmean(computation_aware_al(traces[i]) for i in ok) if ok else float("nan")
        except SimulMTError:
            row["AL_CA"] = float("nan")
        row["BLEU"] = corpus_bleu([traces[i].translation for i in idx], [references[i] for i in idx]) if idx else float("nan")
        if alignments is not None and idx:
            row["HR"] = hallucination_rate(
                [traces[i].translation for i in idx], [alignments[i] for i in idx], [traces[i].J for i in idx]
            )
        else:
            row["HR"] = float("nan")
        rows.append(row)
    return rows


REPORT_COLUMNS = ("subset", "sentences", "scored", "AL", "AL_CA", "BLEU", "HR")


def cmd_evaluate(args) -> int:
    traces = load_traces(args.traces)
    references = [split_words(line) for line in read_lines(args.references)]
    alignments = read_pharaoh(args.alignments) if args.alignments else None
    ref_alignments = read_pharaoh(args.reference_alignments) if args.reference_alignments else None
    rows = evaluate(traces, references, alignments, ref_alignments)

    out = sys.stdout if args.output == "-" else open(args.output, "w", encoding="utf-8", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=REPORT_COLUMNS, delimiter="\t", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in row.items()})
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_build_sft_data(args) -> int:
    corpus = build_corpus(read_lines(args.source), read_lines(args.target))
    records = emit_sft_dataset(
        corpus,
        _template(args.template),
        make_instruction(args.src_lang, args.tgt_lang),
        mode=args.mode,
        k=args.k,
        sample_count=args.sample_count,
        rng_seed=args.seed,
    )
    dump_jsonl(records, args.output)
    log.info("wrote %d records to %s", len(records), args.output)
    return 0


def cmd_serve_stub(args) -> int:
    from .stub_server import StubModel, StubServer

    lexicon = load_lexicon(args.lexicon) if args.lexicon else {}
    srv = StubServer((args.host, args.port), StubModel(lexicon, _template(args.template)), delay_ms=args.delay_ms)
    print(f"stub inference server on {srv.url}/completion", flush=True)
    try:
        srv.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        srv.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simulmt", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def lang_flags(sp):
        sp.add_argument("--src-lang", default="German")
        sp.add_argument("--tgt-lang", default="English")
        sp.add_argument("--template", help="prompt template file with {instruction} {source} {target_prefix}")

    r = sub.add_parser("run", help="simultaneous translation over a corpus")
    r.add_argument("--source", required=True, help="one sentence per line")
    r.add_argument("--timestamped", action="store_true", help="source lines are word@ms tokens")
    r.add_argument("--policy", default="waitk:3", help="waitk:K | scripted:FILE | tokenfile:FILE")
    r.add_argument("--boundary-min", type=int, default=1, help="B for tokenfile policies")
    r.add_argument("--boundary-max", type=int, default=3, help="T for tokenfile policies")
    r.add_argument("--translator", default="mock", help="mock | http:URL")
    r.add_argument("--protocol", choices=("json", "chat"), default="json")
    r.add_argument("--lexicon", help="TSV lexicon for the mock translator")
    r.add_argument("--length-cap", type=int, default=10**6)
    r.add_argument("--timeout-ms", type=int, default=10_000)
    r.add_argument("--arrival-interval-ms", type=float, default=0.0)
    r.add_argument("--max-target-words", type=int)
    r.add_argument("--parallelism", type=int, default=1)
    r.add_argument("--abort-on-error", action="store_true")
    r.add_argument("--output", default="-")
    lang_flags(r)
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("evaluate", help="AL / AL-CA / BLEU / HR report as TSV")
    e.add_argument("--traces", required=True)
    e.add_argument("--references", required=True)
    e.add_argument("--alignments", help="Pharaoh links between source and translation (for HR)")
    e.add_argument("--reference-alignments", help="Pharaoh links between source and reference (for difficulty levels)")
    e.add_argument("--output", default="-")
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("build-sft-data", help="prompt/completion JSONL for fine-tuning")
    b.add_argument("--source", required=True)
    b.add_argument("--target", required=True)
    b.add_argument("--mode", choices=MODES, default="full_sentence")
    b.add_argument("-k", type=int, default=5)
    b.add_argument("--sample-count", type=int)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--output", required=True)
    lang_flags(b)
    b.set_defaults(func=cmd_build_sft_data)

    s = sub.add_parser("serve-stub", help="deterministic inference server for integration runs")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8765)
    s.add_argument("--lexicon")
    s.add_argument("--template")
    s.add_argument("--delay-ms", type=int, default=0)
    s.set_defaults(func=cmd_serve_stub)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SimulMTError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
