"""Python bindings for the litmt translation toolkit."""

from ._litmt import (
    AlignmentError,
    BleuReport,
    Corpus,
    CorpusError,
    Document,
    ExemplarIndex,
    HypothesisRecord,
    InterlinearParseError,
    ParagraphUnit,
    SentencePair,
    SimilarityScore,
    StageDataError,
    corpus_bleu,
    d_bleu,
    format_interlinear,
    load_line_aligned,
    load_records,
    parse_interlinear,
    parse_records,
    run_cli,
    s_bleu,
    stage1_paragraphs,
    tokenize,
    translate_identity,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
