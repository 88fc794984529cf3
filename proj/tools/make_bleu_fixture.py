#!/usr/bin/env python3
"""Regenerates the pinned BLEU fixtures with sacreBLEU (run once; outputs are checked in).

Usage: python3 tools/make_bleu_fixture.py
"""
import json
import pathlib

import sacrebleu
from sacrebleu.metrics import BLEU
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

PAIRS = [
    ("The cat sat on the mat.", "The cat sat on the mat."),
    ("Hello, world.", "Hello, world!"),
    ("He paid 2,000 dollars for it.", "He paid $2,000 for it."),
    ("It was 3.5 meters long-ish.", "It was 3.5 metres long."),
    ("She said \"no\" and left.", "She said &quot;no&quot; and left."),
    ("Lin Yuan pushed the door open.", "Lin Yuan pushed open the wooden door."),
    ("A B C D E", "a b c d e"),
    ("the the the the", "the cat is on the mat"),
    ("Rain, rain, go away!", "Rain, rain, go away; come again another day."),
    ("In 1999-2001 prices rose.", "Between 1999 and 2001, prices rose."),
    ("Tom & Jerry (again) [sic] {x}", "Tom &amp; Jerry (again) [sic] {x}"),
    ("e-mail me at a@b.c", "Email me at a@b.c"),
    ("He smiled; she didn't.", "He smiled, but she did not."),
    ("Über café naïve résumé.", "Über café naive résumé."),
    ("苏晴醒来 rain", "苏晴 woke up, rain"),
    ("", "Nothing was said."),
    ("One.", "One two three four five six."),
    ("Old Chen only smiled and never explained.", "Old Chen only smiled at this and never explained."),
    ("The rain stopped, and the city grew noisy again.", "The rain stopped, and the city grew noisy again."),
    ("x -y 12-3 4- 5 .6 7. ,8", "x - y 12 - 3 4 - 5 . 6 7 . , 8"),
]

VARIANTS = {
    "default": {},
    "smooth_none": {"smooth_method": "none"},
    "char": {"tokenize": "char"},
    "lowercase": {"lowercase": True},
}


def report(bleu, hyps, refs):
    r = bleu.corpus_score(hyps, [refs])
    return {
        "score": r.score,
        "precisions": [p / 100.0 for p in r.precisions],
        "brevity_penalty": r.bp,
        "hyp_length": r.sys_len,
        "ref_length": r.ref_len,
        "correct": list(r.counts),
        "total": list(r.totals),
    }


def main():
    hyps = [h for h, _ in PAIRS]
    refs = [r for _, r in PAIRS]
    tok = Tokenizer13a()
    out = {
        "generator": f"sacrebleu {sacrebleu.__version__}",
        "pairs": [{"hypothesis": h, "reference": r} for h, r in PAIRS],
        "tokenized_13a": [tok(r.rstrip()).split() for r in refs] + [tok(h.rstrip()).split() for h in hyps],
        "corpus": {},
        "per_pair_default": [],
    }
    for name, kwargs in VARIANTS.items():
        out["corpus"][name] = report(BLEU(**kwargs), hyps, refs)
    for h, r in PAIRS:
        out["per_pair_default"].append(report(BLEU(), [h], [r])["score"])
    (FIXTURES / "bleu_20.json").write_text(json.dumps(out, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")

    # Toy pipeline: score the golden hypotheses against the toy references.
    corpus = [json.loads(l) for l in (ROOT / "data/toy/corpus.jsonl").read_text(encoding="utf-8").splitlines() if l]
    golden = [json.loads(l) for l in (ROOT / "tests/golden/toy_hypotheses.jsonl").read_text(encoding="utf-8").splitlines() if l]
    by_key = {(g["doc_id"], g["seg_index"]): g["hypothesis"] for g in golden}
    s_h, s_r, docs = [], [], {}
    for rec in corpus:
        h = by_key[(rec["doc_id"], rec["seg_index"])]
        s_h.append(h)
        s_r.append(rec["target"])
        docs.setdefault(rec["doc_id"], ([], []))
        docs[rec["doc_id"]][0].append(h)
        docs[rec["doc_id"]][1].append(rec["target"])
    d_h = [" ".join(v[0]) for v in docs.values()]
    d_r = [" ".join(v[1]) for v in docs.values()]
    toy = {
        "generator": f"sacrebleu {sacrebleu.__version__}",
        "s_bleu": report(BLEU(), s_h, s_r),
        "d_bleu": report(BLEU(), d_h, d_r),
    }
    (FIXTURES / "toy_scores.json").write_text(json.dumps(toy, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
