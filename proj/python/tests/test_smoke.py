import json
import os
import pathlib

import pytest

import litmt

ROOT = pathlib.Path(__file__).resolve().parents[2]
DATA = pathlib.Path(os.environ.get("LITMT_DATA", ROOT / "data"))
FIXTURES = ROOT / "tests" / "fixtures"


@pytest.fixture(scope="module")
def toy():
    return litmt.load_records(DATA / "toy" / "corpus.jsonl")


def test_toy_corpus_loads(toy):
    assert len(toy.documents) == 3
    assert toy.sentence_count() == 17
    assert toy.is_parallel()
    assert litmt.validate(toy) == []


def test_parse_records_error_names_line():
    bad = '{"doc_id": "a", "seg_index": 0, "source": "x"}\n{"doc_id": "a", "seg_index": 0, "source": "y"}\n'
    with pytest.raises(litmt.CorpusError, match="line 2"):
        litmt.parse_records(bad)


def test_bleu_matches_pinned_fixture():
    fx = json.loads((FIXTURES / "bleu_20.json").read_text(encoding="utf-8"))
    hyps = [p["hypothesis"] for p in fx["pairs"]]
    refs = [p["reference"] for p in fx["pairs"]]
    report = litmt.corpus_bleu(hyps, refs)
    assert abs(report.score - fx["corpus"]["default"]["score"]) < 0.01


def test_tokenizer_examples():
    assert litmt.tokenize("Hello, world.") == ["Hello", ",", "world", "."]
    assert litmt.tokenize("2,000") == ["2,000"]
    assert litmt.tokenize("") == []


def test_identity_translation_gives_sources(toy):
    records = litmt.translate_identity(toy, history=3, exemplars=2, parallelism=2)
    assert [r.hypothesis for r in records] == [p.source for d in toy.documents for p in d.pairs()]


def test_s_and_d_bleu_on_perfect_output(toy):
    system = [litmt.HypothesisRecord(d.doc_id, p.seg_index, p.target) for d in toy.documents for p in d.pairs()]
    assert litmt.s_bleu(system, toy).formatted() == "100.00"
    assert litmt.d_bleu(system, toy).segmentation == "document"


def test_retrieval_self_similarity():
    pool = [("the old man and the sea", "t", "d", 0), ("a dog barks", "t", "d", 1)]
    index = litmt.ExemplarIndex(pool)
    assert index.similarity("the old man and the sea", 0).combined == pytest.approx(1.0)
    assert index.top_k("the sea", k=1) == [("d", 0, pytest.approx(index.similarity("the sea", 0).combined))]


def test_interlinear_round_trip():
    pairs = [("甲", "A"), ("乙", "B")]
    assert litmt.parse_interlinear(litmt.format_interlinear(pairs)) == pairs


def test_stage1_units_cover_chapters(toy):
    units = litmt.stage1_paragraphs(toy, budget=40)
    assert sum(u.last_seg - u.first_seg + 1 for u in units) == toy.sentence_count()


def test_cli_validate(toy):
    assert litmt.run_cli(["validate", "--config", str(DATA / "toy" / "config.json")]) == 0
    assert litmt.run_cli(["validate", "--set", "corpus.records=/does/not/exist"]) == 1
