"""
Driving the loop with a human labeler
=====================================

With the human oracle, a round stops after selection and exposes its
chosen pairs as a pending queue.  Labels are submitted one at a time —
here by consulting the gold standard, in real use by a person — and the
round completes once the queue drains.  Sessions checkpoint to disk at
any point, including mid-queue.  The bundled HTTP service wraps exactly
this queue as a REST API for the browser labeling tool.
"""

import tempfile

from erloop.blocker import CommitteeConfig
from erloop.encoder import EncoderConfig
from erloop.loop import (
    LoopConfig,
    SessionConfig,
    finish_round,
    init_session,
    load_session,
    prepare_data,
    run_round,
    save_session,
    submit_label,
)
from erloop.matcher import MatcherConfig
from erloop.selection import SelectionConfig
from erloop.synth import SynthConfig, write_dataset

out = tempfile.mkdtemp(prefix="erloop-demo-")
write_dataset(out, SynthConfig(n_r=300, n_s=300, n_dups=90, seed=8,
                               test_dups=20, test_negs=40,
                               train_dups=30, train_negs=60))

cfg = SessionConfig(
    loop=LoopConfig(rounds=2, seed_pos=15, seed_neg=15, global_seed=0, oracle="human"),
    encoder=EncoderConfig(hash_buckets=1024),
    matcher=MatcherConfig(lr=2e-2, epochs=30, weight_decay=0.1),
    committee=CommitteeConfig(n_members=2, epochs=60, lr=5e-2,
                              similarity="scaled_cosine"),
    selection=SelectionConfig(budget=6, strategy="uncertainty"),
)

data = prepare_data(out, cfg.encoder)
state = init_session(data, cfg)
run_round(state, data, cfg)  # trains, retrieves, selects, then waits
print(f"queue holds {len(state.pending)} pairs awaiting labels")

# Label half the queue, checkpoint, and resume from disk — nothing
# submitted so far is lost.
for pair in list(state.pending)[:3]:
    submit_label(state, pair, is_dup=pair in data.gold.dups)
ckpt = tempfile.mkdtemp(prefix="erloop-ckpt-")
save_session(state, cfg, ckpt)
state = load_session(ckpt)
print(f"after restart the queue still holds {len(state.pending)} pairs")

for pair in list(state.pending):
    submit_label(state, pair, is_dup=pair in data.gold.dups)
finish_round(state, data, cfg)
m = state.history[-1]
print(f"round {m.round} complete: {m.labeled} human labels, "
      f"candidate recall {m.recall_cand:.3f}, all-pairs F1 {m.all.f1:.3f}")
