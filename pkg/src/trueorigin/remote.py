"""Shared JSON-over-HTTP plumbing for the remote extractor and classifier."""

from __future__ import annotations

import threading

import requests


class PluginError(RuntimeError):
    """A plugin could not produce an answer (unreachable, timeout, bad reply)."""


class RemoteClient:
    """POSTs JSON bodies to ``base_url`` with at most ``max_inflight`` requests
    outstanding across all threads using this client."""

    def __init__(self, base_url: str, timeout: float = 10.0, max_inflight: int = 4):
        if max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.max_inflight = max_inflight
        self._slots = threading.BoundedSemaphore(max_inflight)

    def post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}/{path.lstrip('/')}"
        with self._slots:
            try:
                resp = requests.post(url, json=payload, timeout=self.timeout)
                resp.raise_for_status()
                body = resp.json()
            except (requests.RequestException, ValueError) as exc:
                raise PluginError(f"POST {url} failed: {exc}") from exc
        if not isinstance(body, dict):
            raise PluginError(f"POST {url}: expected a JSON object")
        return body
