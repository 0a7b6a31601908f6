"""
Structured Logging

One JSON object per line on stderr, stamped with the service name and
run id so the lines of a distributed run can be merged by the report
tool. Domain events pass their fields as `extra={"extra_data": {...}}`.

    AHD_LOG_LEVEL   DEBUG | INFO | WARNING | ERROR (default INFO)
    AHD_LOG_FORMAT  json | text (default json)
"""

import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from typing import Any, Optional
from uuid import uuid4

from fastapi import Request, Response
from starlette.middleware.base import BaseHTTPMiddleware, RequestResponseEndpoint
from starlette.types import ASGIApp

REQUEST_ID_HEADER = "X-Request-ID"
TEXT_FORMAT = "%(asctime)s | %(levelname)-8s | %(service)s | %(name)s | %(message)s"


class RunContextFilter(logging.Filter):
    """Adds `service` and `run_id` to every record passing the handler."""

    def __init__(self, service: str = "ahd", run_id: Optional[str] = None):
        super().__init__()
        self.service = service
        self.run_id = run_id

    def filter(self, record: logging.LogRecord) -> bool:
        record.service = self.service
        record.run_id = self.run_id
        return True


class JSONFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "service": getattr(record, "service", "ahd"),
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        run_id = getattr(record, "run_id", None)
        if run_id:
            entry["run_id"] = run_id
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        extra = getattr(record, "extra_data", None)
        if isinstance(extra, dict):
            # event fields never shadow the envelope fields above
            entry.update({k: v for k, v in extra.items() if k not in entry})
        return json.dumps(entry, default=str)


def configure_logging(
    level: Optional[str] = None,
    fmt: Optional[str] = None,
    *,
    service: str = "ahd",
    run_id: Optional[str] = None,
) -> logging.Logger:
    """Install the stderr handler on the `ahd` logger (and uvicorn's in json mode)."""
    log_level = (level or os.getenv("AHD_LOG_LEVEL", "INFO")).upper()
    log_format = (fmt or os.getenv("AHD_LOG_FORMAT", "json")).lower()

    handler = logging.StreamHandler(sys.stderr)
    handler.addFilter(RunContextFilter(service, run_id))
    if log_format == "json":
        handler.setFormatter(JSONFormatter())
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))

    logger = logging.getLogger("ahd")
    logger.setLevel(getattr(logging, log_level, logging.INFO))
    logger.handlers[:] = [handler]

    if log_format == "json":
        for name in ("uvicorn", "uvicorn.access", "uvicorn.error"):
            logging.getLogger(name).handlers[:] = [handler]
    return logger


class RequestLoggingMiddleware(BaseHTTPMiddleware):
    """
    One log line per request. A caller-supplied X-Request-ID is kept so a
    sampler round can be followed through the evaluator and the database;
    otherwise a fresh id is issued. Either way it is echoed back.
    """

    def __init__(self, app: ASGIApp, logger: Optional[logging.Logger] = None):
        super().__init__(app)
        self.logger = logger or logging.getLogger("ahd.http")

    async def dispatch(self, request: Request, call_next: RequestResponseEndpoint) -> Response:
        request_id = request.headers.get(REQUEST_ID_HEADER) or uuid4().hex[:8]
        request.state.request_id = request_id
        started = time.perf_counter()
        fields: dict[str, Any] = {
            "request_id": request_id,
            "method": request.method,
            "path": request.url.path,
        }

        try:
            response = await call_next(request)
        except Exception as e:
            fields.update(duration_ms=round((time.perf_counter() - started) * 1000, 2), error=str(e))
            self.logger.error("Request failed", extra={"extra_data": fields}, exc_info=True)
            raise

        fields.update(
            status_code=response.status_code,
            duration_ms=round((time.perf_counter() - started) * 1000, 2),
        )
        level = logging.WARNING if response.status_code >= 400 else logging.INFO
        if request.url.path == "/metrics":
            level = logging.DEBUG
        self.logger.log(level, f"{request.method} {request.url.path}", extra={"extra_data": fields})

        response.headers[REQUEST_ID_HEADER] = request_id
        return response
