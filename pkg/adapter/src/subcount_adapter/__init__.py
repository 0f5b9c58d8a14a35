"""Model adapter for the subcount attack wire protocol."""

from .models import AdapterModel, AdapterStartupError, echo_count, edge_count, induced_count, load_user_model
from .protocol import PROTOCOL_NAME, serve
