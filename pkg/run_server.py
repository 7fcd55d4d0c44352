"""
Run the Gaze-Guided Generation Service
"""

import uvicorn
import sys
import os

# Add the current directory to Python path
sys.path.insert(0, os.path.dirname(__file__))

from app.config.settings import settings  # noqa: E402

if __name__ == "__main__":
    print("Starting Gaze-Guided Generation Service...")
    print(f"Server will be available at: http://localhost:{settings.PORT}")
    print(f"API docs at: http://localhost:{settings.PORT}/docs")
    print("Press Ctrl+C to stop the server")

    uvicorn.run(
        "app.main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=False,
        log_level=settings.LOG_LEVEL.lower()
    )
