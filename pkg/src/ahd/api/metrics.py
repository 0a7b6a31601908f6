"""
Prometheus Metrics

Exposes service and evolution metrics for monitoring.
"""

import re
import time

from fastapi import Request, Response
from prometheus_client import CONTENT_TYPE_LATEST, Counter, Gauge, Histogram, generate_latest
from starlette.middleware.base import BaseHTTPMiddleware, RequestResponseEndpoint

# Request metrics
REQUEST_COUNT = Counter(
    "ahd_http_requests_total",
    "Total HTTP requests",
    ["method", "endpoint", "status"],
)

REQUEST_LATENCY = Histogram(
    "ahd_http_request_duration_seconds",
    "HTTP request latency in seconds",
    ["method", "endpoint"],
    buckets=[0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0],
)

REQUESTS_IN_PROGRESS = Gauge(
    "ahd_http_requests_in_progress",
    "Number of HTTP requests currently being processed",
    ["method"],
)

# Evolution metrics
CANDIDATES = Counter(
    "ahd_candidates_total",
    "Generated candidates by registration outcome",
    ["outcome"],
)

LLM_FAILURES = Counter(
    "ahd_llm_failures_total",
    "Mutator calls that timed out or returned an unusable response",
)

EVALUATION_SECONDS = Histogram(
    "ahd_evaluation_seconds",
    "Wall-clock time of one candidate evaluation",
    buckets=[0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0, 30.0],
)

ISLAND_BEST_SCORE = Gauge(
    "ahd_island_best_score",
    "Best score stored on an island",
    ["island"],
)

RESETS = Counter(
    "ahd_resets_total",
    "Genetic resets performed",
)


def normalize_path(path: str) -> str:
    """Collapse numeric path segments so per-id routes share a label."""
    return re.sub(r"/\d+(/|$)", "/{id}\\1", path)


class MetricsMiddleware(BaseHTTPMiddleware):
    """Request count, latency and in-flight gauge per route."""

    SKIP_PATHS = {"/metrics", "/v1/health", "/docs", "/redoc", "/openapi.json"}

    async def dispatch(self, request: Request, call_next: RequestResponseEndpoint) -> Response:
        if request.url.path in self.SKIP_PATHS:
            return await call_next(request)

        method = request.method
        path = normalize_path(request.url.path)

        REQUESTS_IN_PROGRESS.labels(method=method).inc()
        start_time = time.perf_counter()
        status = 500
        try:
            response = await call_next(request)
            status = response.status_code
        finally:
            duration = time.perf_counter() - start_time
            REQUESTS_IN_PROGRESS.labels(method=method).dec()
            REQUEST_COUNT.labels(method=method, endpoint=path, status=status).inc()
            REQUEST_LATENCY.labels(method=method, endpoint=path).observe(duration)

        return response


def get_metrics() -> bytes:
    """Generate Prometheus metrics output."""
    return generate_latest()


def get_metrics_content_type() -> str:
    return CONTENT_TYPE_LATEST
