"""Reference worker process for the catscreen bridge wire protocol."""

from .worker import BridgeSession, load_backend, main, main_loop

__all__ = ["BridgeSession", "load_backend", "main", "main_loop"]
