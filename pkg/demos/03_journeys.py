"""
Manuscript journeys and transfer recommendations
================================================
"""

# %%
from dupescan import PipelineConfig, SynthSpec, generate_synthetic
from dupescan.corpus import Corpus
from dupescan.journeys import export_journey, recommend_transfers
from dupescan.pipeline import analyze, detect

# %%
sc = generate_synthetic(SynthSpec(size=2000, near_duplicate_rate=0.3, bad_transfer_rate=0.05,
                                  journals=20, seed=3))
corpus = Corpus.from_records(sc.records)
config = PipelineConfig(min_support=5)
analysis = analyze(corpus, detect(corpus, config).pairs, config)
journeys = analysis.journeys
print(len(journeys), "journeys,", sum(len(j.bad_transfer_steps) for j in journeys), "bad transfers")

# %% [markdown]
# A journey that returns to a journal it already went through. The edge into
# the repeat visit is drawn in red.

# %%
bad = next(j for j in journeys if j.bad_transfer_steps)
print(" -> ".join(s.journal_id for s in bad.steps))
print(export_journey(bad))

# %% [markdown]
# Where do manuscripts rejected at a journal tend to get accepted? Rates
# are smoothed as (accepted + 1) / (total + 2).

# %%
busiest = max({s.journal_id for j in journeys for s in j.steps},
              key=lambda jid: sum(s.journal_id == jid for j in journeys for s in j.steps))
rec = recommend_transfers(journeys, busiest, config.min_support)
print("after rejection at", busiest)
for d in rec.ranked_destinations[:5]:
    print(f"  {d.journal_id}: {d.rate:.2f} ({d.accepted}/{d.support})")
