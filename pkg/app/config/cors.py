"""
CORS configuration for the Gaze-Guided Generation Service
"""

import logging
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from .settings import settings

logger = logging.getLogger(__name__)

# The API only reads models and answers JSON posts
CORS_METHODS = ["GET", "POST", "OPTIONS"]


def setup_cors_middleware(app: FastAPI) -> None:
    """
    Attach CORS middleware for the configured origins

    Credentials are only allowed for an explicit origin list; browsers reject
    credentialed responses carrying a wildcard origin.
    """
    origins = settings.get_cors_origins()
    wildcard = "*" in origins
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"] if wildcard else origins,
        allow_credentials=not wildcard,
        allow_methods=CORS_METHODS,
        allow_headers=["Content-Type", "Accept"],
    )
    logger.debug(f"CORS enabled for {'all origins' if wildcard else ', '.join(origins)}")
