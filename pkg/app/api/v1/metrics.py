"""
Text statistics API endpoints
"""

import logging
from typing import List
from fastapi import APIRouter, HTTPException
from ...core.exceptions import GazeGenError
from ...models.metrics import TextStats
from ...models.request import TextStatsRequest
from ...services.metrics_service import compute_text_stats
from ...services.model_registry import get_lexicon

logger = logging.getLogger(__name__)

# Create router
metrics_router = APIRouter()


@metrics_router.post("/text-stats", response_model=List[TextStats])
def text_stats(request: TextStatsRequest):
    """Readability statistics per text; MTLD is null for texts too short to measure"""
    try:
        lexicon = get_lexicon()
        return [compute_text_stats(text, lexicon, require_mtld=False) for text in request.texts]
    except GazeGenError as e:
        logger.error(f"Text statistics failed: {e}")
        raise HTTPException(status_code=e.status_code, detail=str(e))
