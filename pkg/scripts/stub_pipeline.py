"""End-to-end pipeline over HTTP against the bundled stub server.

Starts the stub in-process, translates a synthetic corpus with several wait-k
policies through the HTTP client and prints the evaluation table per policy.

    python scripts/stub_pipeline.py --sentences 50 --ks 1 3 5
"""

import argparse
import random

from simulmt.cli import REPORT_COLUMNS, evaluate
from simulmt.orchestrator import SessionConfig, run_corpus
from simulmt.policy import waitk_agent
from simulmt.stub_server import running_stub
from simulmt.translator import HttpTranslator, make_instruction

LEXICON = {"ich": "I", "gehe": "go", "heute": "today", "das": "the", "Haus": "house", "ist": "is", "klein": "small", "wir": "we", "sehen": "see"}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sentences", type=int, default=50)
    ap.add_argument("--ks", type=int, nargs="+", default=[1, 3, 5])
    ap.add_argument("--interval", type=float, default=5.0, help="ms between source words")
    ap.add_argument("--parallelism", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    words = sorted(LEXICON)
    corpus = [[rng.choice(words) for _ in range(rng.randint(2, 12))] for _ in range(args.sentences)]
    refs = [[LEXICON[w] for w in s] for s in corpus]
    aligns = [frozenset((j, j) for j in range(len(s))) for s in corpus]
    cfg = SessionConfig(source_arrival_interval_ms=args.interval)

    with running_stub(LEXICON) as srv:
        client = HttpTranslator(srv.url + "/completion")
        print("policy\t" + "\t".join(REPORT_COLUMNS))
        for k in args.ks:
            traces = run_corpus(corpus, lambda n, w: waitk_agent(k), lambda n, w: client, make_instruction(), cfg, parallelism=args.parallelism)
            for row in evaluate(traces, refs, aligns, aligns):
                cells = [f"{row[c]:.3f}" if isinstance(row[c], float) else str(row[c]) for c in REPORT_COLUMNS]
                print(f"wait-{k}\t" + "\t".join(cells))
        client.close()


if __name__ == "__main__":
    main()
