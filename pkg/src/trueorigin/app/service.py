"""Read-only HTTP front end over a snapshot index."""

from __future__ import annotations

import logging

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import Response

from ..gazetteer import NoCoverageError
from ..pipeline import PipelineDeps, Tweet
from ..remote import PluginError
from . import payloads
from .config import AppConfig

logger = logging.getLogger(__name__)


def _json(payload, status: int = 200) -> Response:
    return Response(payloads.dumps(payload), status_code=status, media_type="application/json")


def _error(status: int, message: str) -> Response:
    return _json({"error": message}, status)


def create_app(deps: PipelineDeps) -> FastAPI:
    app = FastAPI(title="trueorigin", docs_url=None, redoc_url=None)
    index = deps.index

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return _error(400, "; ".join(
            f"{'.'.join(str(p) for p in e.get('loc', ()))}: {e.get('msg')}" for e in exc.errors()))

    @app.get("/health")
    def health():
        return _json({"status": "ok", "entries": len(index)})

    @app.get("/search")
    def search(q: str, limit: int = 10):
        if limit < 1:
            return _error(400, "limit must be >= 1")
        return _json(payloads.search_payload(index, q, limit))

    @app.get("/reverse")
    def reverse(lon: float, lat: float):
        if not (-180 <= lon <= 180 and -90 <= lat <= 90):
            return _error(400, "coordinates out of range")
        try:
            return _json(payloads.reverse_payload(index, lon, lat))
        except NoCoverageError as exc:
            return _error(404, str(exc))

    @app.post("/geotag")
    def geotag(body: dict = Body(...)):
        try:
            tweet = Tweet.from_dict(body)
        except (ValueError, TypeError, AttributeError) as exc:
            return _error(400, f"invalid tweet: {exc}")
        try:
            return _json(payloads.geotag_payload(deps, tweet))
        except PluginError as exc:
            logger.warning("geotag %r: plugin failure: %s", tweet.id, exc)
            return _error(502, str(exc))

    return app


def serve(config: AppConfig) -> None:
    import uvicorn

    config.validate()
    host, port = config.bind_address()
    uvicorn.run(create_app(config.deps()), host=host, port=port, log_level="info")
