"""
Reading measures API endpoints
"""

import logging
from typing import List
from fastapi import APIRouter, HTTPException
from ...core.exceptions import GazeGenError
from ...models.eyetracking import WordMeasures
from ...models.request import ReadingMeasuresRequest
from ...services.measures_service import compute_measures

logger = logging.getLogger(__name__)

# Create router
measures_router = APIRouter()


@measures_router.post("/reading-measures", response_model=List[WordMeasures])
def reading_measures(request: ReadingMeasuresRequest):
    """FPRT and go-past time per word of a word-level scanpath"""
    try:
        return compute_measures(request.scanpath, request.n_words, request.strict_first_pass)
    except GazeGenError as e:
        logger.error(f"Reading measures failed: {e}")
        raise HTTPException(status_code=e.status_code, detail=str(e))
