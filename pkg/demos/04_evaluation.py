"""
Retrieval evaluation
====================

Accuracy@k and NDCG@k over ranked runs and relevance judgments, plus the
per-question breakdown a report carries.
"""

from passagekit import RunList, accuracy_at_k, evaluate, ndcg_at_k

# a run is a ranked hit list; scores non-increasing, ties by ascending id
run = RunList.from_scores(
    "q1",
    [("p_relevant", 9.1), ("p_noise_a", 7.4), ("p_noise_b", 6.2), ("p_also_relevant", 5.8)],
)
relevant = {"p_relevant", "p_also_relevant"}

print("accuracy@10:", accuracy_at_k(run, relevant, 10))
# relevant hits at ranks 1 and 4: (1 + 1/log2 5) / (1 + 1/log2 3) ~ 0.877
print(f"ndcg@10:     {ndcg_at_k(run, relevant, 10):.4f}")

# dataset-level evaluation averages over questions with relevant
# passages; questions with none are skipped, missing runs score zero
qrels = {
    "q1": relevant,
    "q2": {"p9"},      # no run retrieved anything for q2
    "q3": set(),       # no relevant passages: skipped
}
report = evaluate([run], qrels, k=10)
print(report.format_table(label="demo-run"))
for row in report.per_question:
    print(f"  {row.question_id}: hit={row.hit} ndcg={row.ndcg:.4f}")
