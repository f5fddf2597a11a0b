"""Client for the scheduling service.

The CLI talks to the service exclusively through this client.  Without a
server URL it dispatches in-process through the same handler table the HTTP
routes use; with one it issues real HTTP requests via httpx.  An injected
httpx-compatible client (e.g. an ASGI test client) overrides both.
"""

from __future__ import annotations

from typing import Optional

import httpx
from fastapi import HTTPException
from pydantic import BaseModel, ValidationError

from . import schemas
from .app import POST_ROUTES


class ServiceError(RuntimeError):
    def __init__(self, status_code: int, detail: str):
        super().__init__(f"service error {status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


class ServiceClient:
    def __init__(self, base_url: Optional[str] = None, http_client=None):
        self._http = http_client
        if base_url is not None and http_client is None:
            self._http = httpx.Client(base_url=base_url, timeout=600.0)

    def _post(self, path: str, request: BaseModel, response_type):
        if self._http is None:
            request_type, handler = POST_ROUTES[path]
            try:
                validated = request_type.model_validate(request.model_dump())
                return handler(validated)
            except ValidationError as exc:
                raise ServiceError(422, str(exc))
            except HTTPException as exc:
                raise ServiceError(exc.status_code, str(exc.detail))
        response = self._http.post(path, json=request.model_dump())
        if response.status_code != 200:
            raise ServiceError(response.status_code, response.text)
        return response_type.model_validate(response.json())

    def generate(self, request: schemas.GenerateRequest) -> schemas.GenerateResponse:
        return self._post("/instances/generate", request, schemas.GenerateResponse)

    def solve(self, request: schemas.SolveRequest) -> schemas.SolveResponse:
        return self._post("/solve", request, schemas.SolveResponse)

    def round(self, request: schemas.RoundRequest) -> schemas.RoundResponse:
        return self._post("/round", request, schemas.RoundResponse)

    def bench(self, request: schemas.BenchRequest) -> schemas.BenchResponse:
        return self._post("/bench", request, schemas.BenchResponse)
