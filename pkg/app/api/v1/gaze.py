"""
Gaze model API endpoints
"""

import logging
from fastapi import APIRouter, HTTPException
from ...core.exceptions import GazeGenError
from ...models.request import GazeScoreRequest
from ...services.gaze_model_service import zscore_invert
from ...services.model_registry import get_gaze_predictor
from ...services.text_service import word_surfaces

logger = logging.getLogger(__name__)

# Create router
gaze_router = APIRouter()


@gaze_router.post("/gaze-score")
def gaze_score(request: GazeScoreRequest):
    """Predicted FPRT of every word (normalized and in ms) and the normalized sum"""
    try:
        predictor = get_gaze_predictor()
        words = word_surfaces(request.text)
        predictions = [predictor.predict_word(words, i) for i in range(len(words))]
        return {
            "success": True,
            "data": {
                "words": [
                    {"word": w, "predicted_fprt": p,
                     "predicted_fprt_ms": zscore_invert(p, predictor.model.mu, predictor.model.sigma)}
                    for w, p in zip(words, predictions)
                ],
                "gaze_score": sum(predictions),
                "n_words": len(words)
            }
        }
    except GazeGenError as e:
        logger.error(f"Gaze scoring failed: {e}")
        raise HTTPException(status_code=e.status_code, detail=str(e))
