"""
Optional delivery of an action plan to actuators over HTTP.

Each actuator with a configured webhook receives a JSON POST of its setting. A
failed delivery is logged and reported, it never undoes or aborts the reaction.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from typing import Any

import requests

from goalarbiter.rules import Action
from goalarbiter.utils import json_number

logger = logging.getLogger(__name__)


class WebhookDispatcher:
    def __init__(self, webhooks: Mapping[str, str], timeout: float = 2.0, session: requests.Session | None = None):
        self.webhooks = dict(webhooks)
        self.timeout = timeout
        self._session = session if session is not None else requests.Session()

    @property
    def enabled(self) -> bool:
        return bool(self.webhooks)

    def dispatch(self, actions: Iterable[Action], revision: int) -> list[dict[str, Any]]:
        """POST each action that has a webhook; return one delivery report per POST"""
        reports = []
        for action in actions:
            url = self.webhooks.get(action.actuator)
            if url is None:
                continue

            body = {"actuator": action.actuator, "value": json_number(action.value), "revision": revision}
            report: dict[str, Any] = {"actuator": action.actuator, "url": url}
            try:
                response = self._session.post(url, json=body, timeout=self.timeout)
                report["status"] = response.status_code
                report["ok"] = response.ok
                if not response.ok:
                    logger.warning("Webhook for %s answered %i", action.actuator, response.status_code)
            except requests.RequestException as exc:
                logger.warning("Webhook for %s failed: %s", action.actuator, exc)
                report["status"] = None
                report["ok"] = False
                report["error"] = str(exc)
            reports.append(report)

        logger.debug("Dispatched %i of the actions", len(reports))
        return reports
