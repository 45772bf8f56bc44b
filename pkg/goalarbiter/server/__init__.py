"""
The HTTP service: a FastAPI application over a KnowledgeBase, run by uvicorn
"""

from .app import create_app
from .dispatch import WebhookDispatcher
from .server import Server
from .session import ApiSession

__all__ = ["ApiSession", "Server", "WebhookDispatcher", "create_app"]
