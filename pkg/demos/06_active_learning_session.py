"""
A complete active-learning session
==================================

One call runs the whole loop: seed labels from the gold train split,
then each round trains the matcher, retrains the blocking committee,
retrieves a fresh candidate set, picks the most informative pairs, and
labels them with the simulated oracle.  Metrics are recorded per round;
the all-pairs F1 (the end goal: final predictions against every true
duplicate) climbs as labels accumulate.
"""

import tempfile

from erloop.blocker import CommitteeConfig
from erloop.encoder import EncoderConfig
from erloop.loop import (
    LoopConfig,
    SessionConfig,
    final_predictions,
    prepare_data,
    run_session,
)
from erloop.matcher import MatcherConfig
from erloop.selection import SelectionConfig
from erloop.synth import SynthConfig, write_dataset

out = tempfile.mkdtemp(prefix="erloop-demo-")
write_dataset(out, SynthConfig(n_r=1000, n_s=1000, n_dups=250, seed=3,
                               test_dups=75, test_negs=175,
                               train_dups=100, train_negs=200))

cfg = SessionConfig(
    loop=LoopConfig(rounds=5, seed_pos=24, seed_neg=24, global_seed=0),
    encoder=EncoderConfig(hash_buckets=1024),
    matcher=MatcherConfig(lr=2e-2, epochs=40, weight_decay=0.1),
    committee=CommitteeConfig(n_members=3, epochs=150, lr=5e-2,
                              similarity="scaled_cosine"),
    selection=SelectionConfig(budget=24, strategy="uncertainty"),
)

data = prepare_data(out, cfg.encoder)
state = run_session(data, cfg)

print("round  labels  cand-recall  test-F1  all-pairs-F1")
for m in state.history:
    print(f"{m.round:>5}  {m.labeled:>6}  {m.recall_cand:>11.3f}  "
          f"{m.test.f1:>7.3f}  {m.all.f1:>12.3f}")

predictions = final_predictions(state)
hits = len(predictions & data.gold.dups)
print(f"\nfinal predictions: {len(predictions)} pairs, "
      f"{hits} of {len(data.gold.dups)} true duplicates among them")
