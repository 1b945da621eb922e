"""
BM25 indexing and retrieval
===========================

Build an inverted index over a toy corpus, look at its statistics, score
individual documents, and run a top-k search. Lemma-mode analysis folds
inflected Polish forms onto base forms before indexing.
"""

from passagekit import Corpus, Lexicon, Passage, bm25_score, build_index, search

corpus = Corpus(
    [
        Passage("d1", "kot pies"),
        Passage("d2", "kot kot ryba"),
        Passage("d3", "ryba"),
    ]
)

index = build_index(corpus)  # surface forms, k1=1.2, b=0.75
print(f"N={index.N}  avgdl={index.avgdl}  df(kot)={index.df('kot')}")

# score each document for a one-term query
for ordinal, pid in enumerate(index.doc_ids):
    print(f"  {pid}: {bm25_score(index, ['kot'], ordinal):.4f}")

# top-k retrieval: d3 contains no query term, so only two hits come back
run = search(index, ["kot"], k=10, query_id="demo")
print("ranking:", run.passage_ids())

# the same corpus under lemma analysis: a dictionary maps inflected
# surface forms to base forms, so "koty" retrieves documents with "kot"
lemmas = Lexicon({"koty": "kot", "psy": "pies"})
lemma_index = build_index(corpus, lemmas, analyzed="lemma")
print("lemma query 'koty' ->", search(lemma_index, ["kot"], 5).passage_ids())
