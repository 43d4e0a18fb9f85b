"""Time-reversal regularized latent graph ODEs for multi-agent dynamics.

Subpackages:
    diffcore  -- minimal reverse-mode autodiff engine (dense float64 tensors)
    physics   -- ground-truth spring/pendulum simulators and symmetry checks
    dataio    -- trajectory generation, sampling, and the on-disk dataset format
    model     -- temporal-graph encoder, latent graph ODE, decoder
    training  -- losses, optimizer, training loop
    analysis  -- solver-order / reversal-loss experiments and sweeps
"""

__version__ = "0.1.0"
