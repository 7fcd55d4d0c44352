"""
Gaze-Guided Generation Service - guided decoding with eye-tracking based reading effort predictions
"""

__version__ = "1.0.0"
__author__ = "GazeGen Team"
