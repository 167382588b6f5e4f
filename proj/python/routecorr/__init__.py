"""Route choice models (MNL, link-nested logit, PCL, CoNL) against a probit target."""

from ._core import (
    ChoiceSet,
    Fixture,
    Link,
    Network,
    ValidationError,
    anchored_rcm_reference,
    builtin_names,
    builtin_network,
    ds_correlation,
    enumerate_efficient_routes,
    load_network_file,
    model_fcm,
    model_probabilities,
    mnp_probabilities,
    mse_correlations,
    mse_probabilities,
    reduce_to_rcm,
    resolve_network,
    run_grid,
    sample_choice_set,
)

__all__ = [
    "ChoiceSet",
    "Fixture",
    "Link",
    "Network",
    "ValidationError",
    "anchored_rcm_reference",
    "builtin_names",
    "builtin_network",
    "ds_correlation",
    "enumerate_efficient_routes",
    "load_network_file",
    "model_fcm",
    "model_probabilities",
    "mnp_probabilities",
    "mse_correlations",
    "mse_probabilities",
    "reduce_to_rcm",
    "resolve_network",
    "run_grid",
    "sample_choice_set",
]
