#!/usr/bin/env python3
"""Generate the synthetic benchmark reference corpus.

Words are drawn i.i.d. from data/vocab_en.tsv weighted by frequency and grouped
into sentences. The output is committed as data/bench_corpus.txt; rerunning
with the same arguments reproduces it byte for byte.
"""
import argparse
import random


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--vocab", default="data/vocab_en.tsv")
    ap.add_argument("--words", type=int, default=5200)
    ap.add_argument("--seed", type=int, default=2007)
    ap.add_argument("--out", default="data/bench_corpus.txt")
    args = ap.parse_args()

    words, weights = [], []
    with open(args.vocab) as f:
        for line in f:
            if line.startswith("#"):
                continue
            w, freq = line.rstrip("\n").split("\t")
            words.append(w)
            weights.append(float(freq))

    rng = random.Random(args.seed)
    drawn = rng.choices(words, weights=weights, k=args.words)

    sentences, i = [], 0
    while i < len(drawn):
        n = rng.randint(6, 18)
        s = drawn[i:i + n]
        i += n
        s[0] = s[0].capitalize()
        sentences.append(" ".join(s) + ".")

    lines, line = [], []
    for s in sentences:
        line.append(s)
        if len(line) == 4:
            lines.append(" ".join(line))
            line = []
    if line:
        lines.append(" ".join(line))

    with open(args.out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
