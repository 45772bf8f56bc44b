"""
Server runs the REST application for a session and manages its lifetime
"""

from __future__ import annotations

import errno
import logging
import socket
import threading
import time

import uvicorn

from goalarbiter.errors import BindError

from .app import create_app
from .session import ApiSession

logger = logging.getLogger(__name__)


class Server:
    """
    Serves one ApiSession over HTTP
    """

    def __init__(self, session: ApiSession | None = None, host: str = "127.0.0.1", port: int = 8080) -> None:
        """
        Initialize the Server instance.

        :param session: The session to serve. A session with an empty knowledge base is created if None.
        :param host: The interface to bind.
        :param port: The port to bind, 0 picks a free one.
        """
        self.session = session if session is not None else ApiSession()
        self.host = host
        self.port = port
        self.app = create_app(self.session)

        self._server: uvicorn.Server | None = None
        self._socket: socket.socket | None = None
        self._thread: threading.Thread | None = None

    def _bind(self) -> socket.socket:
        try:
            sock = socket.create_server((self.host, self.port), reuse_port=False)
        except OSError as exc:
            if exc.errno in (errno.EADDRINUSE, errno.EACCES):
                raise BindError(
                    f"cannot bind {self.host}:{self.port}: {exc.strerror}", [{"host": self.host, "port": self.port}]
                ) from exc
            raise
        # Record the port actually bound when 0 was asked for
        self.port = sock.getsockname()[1]
        return sock

    def _prepare(self) -> None:
        self._socket = self._bind()
        config = uvicorn.Config(self.app, log_config=None, access_log=False)
        self._server = uvicorn.Server(config)

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    @property
    def running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def start(self, timeout: float = 5.0) -> None:
        """Start the Server in a background thread and wait until it accepts connections"""
        self._prepare()
        assert self._server is not None
        self._thread = threading.Thread(
            target=self._server.run, kwargs={"sockets": [self._socket]}, name="goalarbiter-server", daemon=True
        )
        self._thread.start()

        deadline = time.monotonic() + timeout
        while not self._server.started and self._thread.is_alive() and time.monotonic() < deadline:
            time.sleep(0.01)
        if not self._server.started:
            self.stop()
            raise RuntimeError(f"server on {self.url} did not start within {timeout}s")
        logger.info("Started server on %s", self.url)

    def stop(self) -> None:
        """Stop the Server"""
        if self._server is not None:
            self._server.should_exit = True
        if self._thread is not None:
            self._thread.join()
            self._thread = None
        if self._socket is not None:
            self._socket.close()
            self._socket = None
        logger.debug("Stopped server")

    def run(self) -> None:
        """Serve in the calling thread until interrupted"""
        self._prepare()
        assert self._server is not None
        logger.info("Serving on %s", self.url)
        try:
            self._server.run(sockets=[self._socket])
        finally:
            if self._socket is not None:
                self._socket.close()
                self._socket = None
