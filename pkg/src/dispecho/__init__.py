"""Displacement echoes in the quantized kicked rotator."""

__version__ = "0.1.0"

from .statespace import (  # noqa: E402
    CoherentParams,
    QuantumState,
    TorusGrid,
    build_grid,
    coherent_state,
    displace,
    inner_product,
    to_momentum,
    to_position,
)
from .floquet import KickedRotatorParams, dense_floquet, evolve, floquet_step  # noqa: E402
from .echo import EchoSeries, ExperimentConfig, echo_series, ensemble_echo  # noqa: E402
from .theory import (  # noqa: E402
    TheoryParams,
    freeze_term,
    g_function,
    lyapunov_rate,
    predicted_echo,
    saturation_prediction,
    y_correlation_prediction,
)
from .classical import PhasePoint, benettin_lyapunov, standard_map_step  # noqa: E402
from .analysis import DecayFit, fit_decay, tail_saturation  # noqa: E402
