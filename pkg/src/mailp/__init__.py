"""Information transfer in multi-agent learning: dynamics, bounds, transforms,
and a tabular pursuit testbed."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    ENV,
    ConvergenceReport,
    InformationState,
    LearningFunction,
    MailpSpec,
    TargetKey,
    group_info_gain,
    homogeneous_spec,
    info_gain,
    info_loss,
    run_until,
    single_agent_spec,
    step,
    total_information,
)
