"""Persistent HTTP service and orchestration over the decision engines."""

from .core import DecisionService, ServiceError
from .http import create_app
from .log import EventLog, canonical_json

__all__ = ["DecisionService", "ServiceError", "create_app", "EventLog", "canonical_json"]
