"""
Generation API endpoints
"""

import logging
from fastapi import APIRouter, HTTPException
from pydantic import ValidationError
from ...core.exceptions import GazeGenError
from ...models.decoding import DecoderConfig, GenerationResult
from ...models.request import GenerateRequest
from ...services.decoder_service import generate
from ...services.model_registry import get_gaze_predictor, get_language_model

logger = logging.getLogger(__name__)

# Create router
generation_router = APIRouter()


@generation_router.post("/generate", response_model=GenerationResult)
def generate_text(request: GenerateRequest):
    """Guided generation with the configured language and gaze models"""
    try:
        config = DecoderConfig(**request.model_dump())
    except ValidationError as e:
        logger.error(f"Invalid decoder configuration: {e}")
        raise HTTPException(status_code=422, detail=str(e))
    try:
        lm = get_language_model()
        gaze = get_gaze_predictor()
        return generate(lm, gaze, config)
    except GazeGenError as e:
        logger.error(f"Generation failed for prompt {request.prompt!r}: {e}")
        raise HTTPException(status_code=e.status_code, detail=str(e))
