"""
API module for the Gaze-Guided Generation Service
"""
