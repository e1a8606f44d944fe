"""Agent-facing reset/step bindings for the tenthsim racing engine."""

from .env import (ClosedHandleError, ENGINE_VERSION, Observation, RaceEnv,
                  SpaceSpec, make)

__version__ = "0.1.0"

__all__ = ["ClosedHandleError", "ENGINE_VERSION", "Observation", "RaceEnv",
           "SpaceSpec", "make", "__version__"]
