"""Train both autoencoder variants on a small corpus.

The embedding AE decodes its N*K vector back to the window through
same-padding conv blocks; the baseline AE compresses the time axis with
strided convs and mirrors back up. Both minimize elementwise MSE under
Adam; gradients come from the hand-written backward passes, spot-checked
here against finite differences.
"""

import numpy as np

from t2vad import ndtensor as nd
from t2vad.autoenc import (AEConfig, build_recon_ae, build_t2v_ae,
                           bottleneck_length, reconstruct, train)
from t2vad.pipeline import SynthParams, synth_generate
from t2vad.rng import make_rng

corpus = synth_generate(SynthParams(n_windows=120), seed=11)

t2v_cfg = AEConfig(variant="t2v", k=7, decoder_layers=3, epochs=12, batch=16, seed=1)
t2v_model = train(build_t2v_ae(t2v_cfg, 100, 6), corpus.train_windows)
print(f"embedding AE   loss: {t2v_model.loss_curve[0]:.4f} -> "
      f"{t2v_model.loss_curve[-1]:.4f} over {t2v_cfg.epochs} epochs")

recon_cfg = AEConfig(variant="reconstruction", encoder_layers=2, epochs=12,
                     batch=16, seed=2)
recon_model = train(build_recon_ae(recon_cfg, 100, 6), corpus.train_windows)
print(f"baseline AE    loss: {recon_model.loss_curve[0]:.4f} -> "
      f"{recon_model.loss_curve[-1]:.4f} "
      f"(bottleneck {bottleneck_length(recon_model)} steps)")

w = corpus.test_windows[0]
err = np.mean(np.abs(reconstruct(t2v_model, w) - w.data))
print(f"mean |reconstruction error| on a held-out window: {err:.4f}")

# the backward passes are exact: finite differences agree at toy size
toy = build_t2v_ae(AEConfig(variant="t2v", k=3, decoder_layers=2, filters=4,
                            kernel=3, seed=3), 10, 2)
rng = make_rng(4)
rel_err = nd.grad_check(toy.stack, rng.normal(size=(1, 10, 2)),
                        rng.normal(size=(1, 10, 2)))
print(f"max relative gradient error vs finite differences: {rel_err:.2e}")
