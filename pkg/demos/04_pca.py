"""
Finding the leading principal axis of a channel ensemble
========================================================

Channels are zero-mean Gaussian with one dominant axis ``e_1``.  Maximising
the mean square of single-shot outcomes over unit weight vectors recovers
that axis; ``|t_1|`` is the overlap of the learned direction with ``e_1``.
"""
import numpy as np

from entangled_sensing.channels import make_rng
from entangled_sensing.datagen import generate_pca_channels
from entangled_sensing.pca import train_first_pc, train_sequential
from entangled_sensing.spsa import SpsaConfig

cfg = SpsaConfig(a=0.05, c=0.03, max_steps=1500)
for label, kind, n in (("entangled", "entangled", 1.0), ("separable", "separable", 1.0),
                       ("noiseless", "entangled", np.inf)):
    finals = []
    for seed in range(3):
        src = generate_pca_channels(20, alpha0=0.3, P=20.0, seed=seed)
        rep = train_first_pc(src, n, cfg, make_rng(100 + seed), kind=kind)
        finals.append(abs(rep.direction[0]))
    print(f"{label:>10}: final |t1| {np.round(finals, 3)}")

# two components of a Diag[9, 4, 1] ensemble, found one after the other
src = generate_pca_channels(3, 1.0, None, seed=0, variances=[9.0, 4.0, 1.0])
T = train_sequential(src, np.inf, 2, SpsaConfig(a=0.05, c=0.05, max_steps=2000), make_rng(0),
                     batch_size=50)
print("\nrows of the learned transform\n", np.round(T.rows, 3))
