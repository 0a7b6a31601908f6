"""
API Authentication

Optional shared key. When AHD_API_KEY is set every /v1 endpoint requires
a matching X-API-Key header; otherwise the services are open.
"""

import logging
import os
import secrets
from typing import Optional

from fastapi import HTTPException, Security, status
from fastapi.security import APIKeyHeader

logger = logging.getLogger("ahd.auth")

api_key_header = APIKeyHeader(name="X-API-Key", auto_error=False)


def require_api_key(api_key: Optional[str] = Security(api_key_header)) -> Optional[str]:
    """FastAPI dependency enforcing the shared key when one is configured."""
    expected = os.getenv("AHD_API_KEY")
    if not expected:
        return None
    if not api_key or not secrets.compare_digest(api_key, expected):
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="Invalid or missing API key",
        )
    return api_key
