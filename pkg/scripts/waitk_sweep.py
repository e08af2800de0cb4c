"""Latency sweep over wait-k with the offline mock translator.

Each source word arrives every ``--interval`` ms and each translator call costs
``--compute`` ms of simulated time, so AL (in words) and AL-CA (in ms) can be
compared across k without any model or network.

    python scripts/waitk_sweep.py --sentences 200 --kmax 8
"""

import argparse
import random

from simulmt.metrics import average_lagging, computation_aware_al
from simulmt.orchestrator import FakeClock, SessionConfig, run_session
from simulmt.policy import waitk_agent
from simulmt.translator import mock_translator

VOCAB = ["ich", "du", "wir", "gehe", "sehen", "heute", "morgen", "das", "Haus", "ein", "Buch", "klein", "nach", "Hause"]


class Timed:
    """Charge a fixed compute cost on a simulated clock for every call."""

    def __init__(self, inner, clock, cost_ms):
        self.inner, self.clock, self.cost_ms = inner, clock, cost_ms

    def next_word(self, instruction, source_prefix, target_prefix):
        self.clock.advance(self.cost_ms)
        return self.inner.next_word(instruction, source_prefix, target_prefix)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sentences", type=int, default=200)
    ap.add_argument("--kmax", type=int, default=8)
    ap.add_argument("--interval", type=float, default=300.0, help="ms between source words")
    ap.add_argument("--compute", type=float, default=40.0, help="simulated ms per translator call")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    corpus = [[rng.choice(VOCAB) for _ in range(rng.randint(3, 25))] for _ in range(args.sentences)]
    cfg = SessionConfig(source_arrival_interval_ms=args.interval)

    print(f"{'k':>3} {'AL':>8} {'AL_CA_ms':>10}")
    for k in range(1, args.kmax + 1):
        al, al_ca = [], []
        for words in corpus:
            clock = FakeClock()
            tr = run_session(words, waitk_agent(k), Timed(mock_translator({}, len(words)), clock, args.compute), "", cfg, clock)
            al.append(average_lagging(tr.realized_policy, len(words)))
            al_ca.append(computation_aware_al(tr))
        print(f"{k:>3} {sum(al) / len(al):>8.3f} {sum(al_ca) / len(al_ca):>10.1f}")


if __name__ == "__main__":
    main()
