"""
Training-data refinery
======================

The full pipeline on a small corpus: match questions to passages
(BM25 -> rerank -> verify), mine hard negatives, denoise, convert NLI
records, and export trainer-ready files. The deterministic token-overlap
scorer stands in for a neural cross-encoder; point a ScorerSpec at
`remote:http://...` to use a served model instead.
"""

import tempfile
from pathlib import Path

from passagekit import (
    DenoiseConfig,
    MatchConfig,
    MineConfig,
    PairDataset,
    ScorerSpec,
    build_index,
    convert_nli,
    denoise,
    export_training,
    load_corpus,
    load_questions,
    match_questions,
    mine_hard_negatives,
)

fixtures = Path(__file__).parent.parent / "tests" / "fixtures"
overlap = ScorerSpec(kind="overlap_oracle")

corpus = load_corpus(fixtures / "corpus_small.jsonl", use_title=True)
questions = load_questions(fixtures / "questions_small.jsonl")
index = build_index(corpus)

# 1. matching: BM25 candidates, overlap rerank, thresholded verification
matched = match_questions(
    questions, corpus, index, overlap, overlap,
    MatchConfig(bm25_top=10, rerank_top=3, verify_threshold=0.1),
)
n_pos = sum(1 for p in matched if p.relevance.to_bool())
print(f"matched {len(matched)} pairs, {n_pos} verified positive")

# keep the verified positives; mining will supply the negatives
positives = [p for p in matched if p.relevance.to_bool()]
dataset = PairDataset(
    pairs=positives,
    questions={q.id: q for q in questions},
    passages={p.id: p for p in corpus},
)

# 2. hard negatives: lexically close passages the scorer finds irrelevant
negatives = mine_hard_negatives(
    dataset, corpus, index, overlap, MineConfig(bm25_top=10, negative_threshold=0.5)
)
print(f"mined {len(negatives)} hard negatives")

# 3. denoising: cheap filters first, scorer gates last; every rejection
# carries the first filter that fired
combined = PairDataset(
    pairs=positives + negatives,
    questions=dataset.questions,
    passages=dataset.passages,
)
kept, report = denoise(
    combined, overlap,
    DenoiseConfig(
        min_q_tokens=2, max_q_tokens=32, min_p_tokens=5, max_p_tokens=64,
        max_overlap=0.5,   # drop positives nearly identical to their question
        pos_floor=0.25,    # drop positives the scorer no longer believes
    ),
)
print(report.format_summary())

# 4. NLI conversion: premises become yes/no questions
nli = convert_nli(
    [
        ("Ala ma kota.", "Ala posiada zwierzę.", "entailment"),
        ("Ziemia jest płaska.", "Ziemia jest kulą.", "contradiction"),
        ("Jan śpi.", "Jan lubi placki.", "neutral"),
    ]
)
for pair in nli.pairs:
    print(f"  {nli.questions[pair.question_id].text!r} -> {pair.relevance.value}, answer={pair.answer}")

# 5. export: one record per question with at least one positive
out = Path(tempfile.mkdtemp()) / "train.jsonl"
written = export_training(
    PairDataset(pairs=kept, questions=combined.questions, passages=combined.passages), out
)
print(f"wrote {written} trainer records to {out}")
