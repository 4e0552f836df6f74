"""Learning constrained multibody dynamics with neural ODEs.

Subpackage map:

- ``autodiff``     reverse-mode AD tape over dense float64 arrays
- ``numerics``     dense LU solves and convergence-order estimation
- ``neural``       MLP/LSTM definitions, Adam, learning-rate schedules
- ``integrators``  FE1/MP2/RK4/LF2/YS4 one-step integrators
- ``trajectory``   time-grid + state-matrix record and its CSV format
- ``systems``      benchmark dynamics, energies, analytic solutions
- ``slider_crank`` the constrained three-body plant (DAE/KKT form)
- ``datasets``     ground-truth dataset generation
- ``model``        the neural-ODE model, training loops, MSE metric
- ``baselines``    FCNN and LSTM comparison models
- ``mpc``          cart-pole linearization and receding-horizon control
- ``cli``          experiment runner (generate/train/rollout/eval/mpc/check)
"""

__version__ = "0.1.0"
