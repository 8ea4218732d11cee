"""Local analysis service: the HTTP twin of the CLI.

Stateless request handling over the engine handlers; every response body
is produced by the same serializers the CLI uses, so identical requests
yield byte-identical JSON on both entry points.  Validation failures
return 400 with machine-readable detail; unexpected failures return 500
with an opaque incident id only.
"""

from __future__ import annotations

import json
import logging
import uuid
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.staticfiles import StaticFiles

from .engine import handle_analyze, handle_egger, handle_leave_one_out, handle_mr
from .errors import DomainError, MetaBalancerError, ValidationError
from .io import SCHEMA_VERSION

log = logging.getLogger(__name__)


def _error_body(detail: dict, status: int) -> Response:
    body = {"schema_version": SCHEMA_VERSION, "error": detail}
    return Response(content=json.dumps(body, separators=(",", ":")),
                    status_code=status, media_type="application/json")


async def _run(request: Request, handler) -> Response:
    try:
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error_body({"message": f"invalid JSON body: {exc}"}, 400)
        outcome = handler(payload)
        for w in outcome.warnings:
            log.warning("%s %s: %s", request.method, request.url.path, w)
        return Response(content=outcome.payload, media_type="application/json")
    except ValidationError as exc:
        return _error_body(exc.detail(), 400)
    except (DomainError, MetaBalancerError) as exc:
        return _error_body({"message": str(exc)}, 400)
    except Exception:  # noqa: BLE001 - opaque 500, never leak internals
        incident = uuid.uuid4().hex
        log.exception("unhandled error (incident %s)", incident)
        return _error_body({"message": "internal error", "id": incident}, 500)


def create_app(ui_dir: str | Path | None = None) -> FastAPI:
    """Build the app; ``ui_dir`` optionally serves the browser UI at /."""
    app = FastAPI(title="meta-balancer", docs_url=None, redoc_url=None,
                  openapi_url=None)

    @app.get("/v1/health")
    async def health() -> Response:
        return Response(content=json.dumps({"status": "ok"},
                                           separators=(",", ":")),
                        media_type="application/json")

    @app.post("/v1/analyze")
    async def analyze(request: Request) -> Response:
        return await _run(request, handle_analyze)

    @app.post("/v1/mr")
    async def mr(request: Request) -> Response:
        return await _run(request, handle_mr)

    @app.post("/v1/leave-one-out")
    async def loo(request: Request) -> Response:
        return await _run(request, handle_leave_one_out)

    @app.post("/v1/egger")
    async def egger(request: Request) -> Response:
        return await _run(request, handle_egger)

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
